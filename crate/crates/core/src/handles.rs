//! Candidate public-handle synthesis.
//!
//! Public channels on the platform are addressable by username, so new
//! communities can be found by generating plausible usernames from a seed
//! lexicon and from fragments of previously observed handles, then probing
//! each candidate. This module only generates candidates; probing lives in
//! [`crate::crawler`].

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Platform constraints on a public handle: 5 to 32 characters, alphanumeric
/// plus underscore, starting with a letter.
pub const HANDLE_MIN_LEN: usize = 5;
pub const HANDLE_MAX_LEN: usize = 32;

/// Number of fragments joined by one higher-order composition.
const HIGHER_ORDER_ARITY: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("seed lexicon has no usable terms")]
    EmptyLexicon,
    #[error("observed handle {0:?} is not a valid public handle")]
    InvalidHandle(String),
}

/// Lowercase token list seeding candidate generation. Terms are normalized on
/// construction (lowercased, characters outside `[a-z0-9_]` stripped); order
/// of first occurrence is preserved, duplicates dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLexicon {
    terms: Vec<String>,
}

impl SeedLexicon {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for term in terms {
            let norm = normalize_fragment(term.as_ref());
            if !norm.is_empty() && seen.insert(norm.clone()) {
                out.push(norm);
            }
        }
        SeedLexicon { terms: out }
    }

    /// Parse a plain-text lexicon: one term per line, `#` comments and blank
    /// lines ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Complete public handles seen in earlier crawls or historical link data.
/// Every member must already satisfy [`handle_ok`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservedHandles {
    handles: BTreeSet<String>,
}

impl ObservedHandles {
    pub fn new<I, S>(handles: I) -> Result<Self, SynthesisError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for h in handles {
            let h = h.as_ref();
            if !handle_ok(h) {
                return Err(SynthesisError::InvalidHandle(h.to_string()));
            }
            set.insert(h.to_string());
        }
        Ok(ObservedHandles { handles: set })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn handles(&self) -> impl Iterator<Item = &str> {
        self.handles.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }
}

/// Deduplicated lowercase fragments used to compose candidates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    fragments: BTreeSet<String>,
}

impl Vocabulary {
    pub fn fragments(&self) -> impl Iterator<Item = &str> {
        self.fragments.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn contains(&self, fragment: &str) -> bool {
        self.fragments.contains(fragment)
    }
}

/// Generated candidates plus the seed that fixed their order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub candidates: Vec<String>,
    pub seed: u64,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// True iff `candidate` is a well-formed public handle: 5–32 characters of
/// `[A-Za-z0-9_]` starting with a letter.
pub fn handle_ok(candidate: &str) -> bool {
    let bytes = candidate.as_bytes();
    if bytes.len() < HANDLE_MIN_LEN || bytes.len() > HANDLE_MAX_LEN {
        return false;
    }
    if !bytes[0].is_ascii_alphabetic() {
        return false;
    }
    bytes[1..]
        .iter()
        .all(|b| b.is_ascii_alphanumeric() || *b == b'_')
}

fn normalize_fragment(token: &str) -> String {
    token
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '_')
        .collect()
}

/// Union of the underscore-separated fragments of every observed handle,
/// lowercased. Empty fragments from doubled underscores are dropped.
pub fn split_handles(handles: &ObservedHandles) -> Vocabulary {
    let fragments = handles
        .handles()
        .flat_map(|h| h.split('_'))
        .filter(|f| !f.is_empty())
        .map(str::to_lowercase)
        .collect();
    Vocabulary { fragments }
}

/// Normalize raw tokens into vocabulary fragments: lowercase, strip characters
/// outside `[a-z0-9_]`, drop empty results, deduplicate. Fragments may start
/// with a digit; the final [`handle_ok`] gate rejects composites that do.
pub fn valid_fragments<I, S>(tokens: I) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let fragments = tokens
        .into_iter()
        .map(|t| normalize_fragment(t.as_ref()))
        .filter(|f| !f.is_empty())
        .collect();
    Vocabulary { fragments }
}

/// For each adjacent fragment pair `(f_i, f_(i+1))` of `handle`, emit both
/// `f_i_f_(i+1)` and `f_if_(i+1)` (lowercased). Handles with fewer than two
/// fragments yield nothing.
pub fn adjacent_combinations(handle: &str) -> BTreeSet<String> {
    let fragments: Vec<String> = handle
        .split('_')
        .filter(|f| !f.is_empty())
        .map(str::to_lowercase)
        .collect();
    let mut out = BTreeSet::new();
    for pair in fragments.windows(2) {
        out.insert(format!("{}_{}", pair[0], pair[1]));
        out.insert(format!("{}{}", pair[0], pair[1]));
    }
    out
}

/// Cross product over ordered pairs of distinct fragments: for every
/// `(w_i, w_j)` with `w_i != w_j`, emit `w_i_w_j` and `w_iw_j`.
pub fn pairwise_combinations(vocab: &Vocabulary) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for wi in vocab.fragments() {
        for wj in vocab.fragments() {
            if wi == wj {
                continue;
            }
            out.insert(format!("{wi}_{wj}"));
            out.insert(format!("{wi}{wj}"));
        }
    }
    out
}

/// Seeded random compositions of three fragments, each junction joined with
/// either `_` or nothing. Returns at most `k` distinct compositions and is a
/// pure function of `(vocab, k, seed)`.
pub fn sample_higher_order(vocab: &Vocabulary, k: usize, seed: u64) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if k == 0 || vocab.is_empty() {
        return out;
    }
    let fragments: Vec<&str> = vocab.fragments().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Bounded retry budget: small vocabularies may not admit k distinct
    // compositions, so draws must not loop forever.
    let mut attempts = k.saturating_mul(10).saturating_add(100);
    while out.len() < k && attempts > 0 {
        attempts -= 1;
        let mut composite = String::new();
        for i in 0..HIGHER_ORDER_ARITY {
            if i > 0 && rng.random_bool(0.5) {
                composite.push('_');
            }
            composite.push_str(fragments[rng.random_range(0..fragments.len())]);
        }
        out.insert(composite);
    }
    out
}

/// Full candidate generation: single fragments, adjacent combinations from
/// observed handles, pairwise combinations, and `k_higher` sampled
/// compositions, gated by [`handle_ok`], deduplicated, then deterministically
/// shuffled by `seed`.
pub fn generate_candidates(
    lexicon: &SeedLexicon,
    handles: &ObservedHandles,
    k_higher: usize,
    seed: u64,
) -> Result<CandidateSet, SynthesisError> {
    if lexicon.is_empty() {
        return Err(SynthesisError::EmptyLexicon);
    }

    let vocab = valid_fragments(
        lexicon
            .terms()
            .iter()
            .map(String::as_str)
            .chain(split_handles(handles).fragments()),
    );

    let mut pool: BTreeSet<String> = vocab.fragments().map(str::to_string).collect();
    for handle in handles.handles() {
        pool.extend(adjacent_combinations(handle));
    }
    pool.extend(pairwise_combinations(&vocab));
    pool.extend(sample_higher_order(&vocab, k_higher, seed));

    // BTreeSet iteration gives a canonical base order; the shuffle then
    // depends only on (inputs, seed).
    let mut candidates: Vec<String> = pool.into_iter().filter(|c| handle_ok(c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    candidates.shuffle(&mut rng);

    Ok(CandidateSet { candidates, seed })
}
