//! Rights catalog ingestion and fuzzy title matching.
//!
//! Matching is deterministic token work: a title matches a post when its
//! token sequence appears contiguously in the post's tokens, each token
//! exact or (for multi-token titles) within edit distance 1. Same-name
//! entries from different productions tie unless a year, country, or
//! company token disambiguates.

use crate::platform::PostRecord;
use crate::text::{slug, tokenize};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.8;
/// Catalog cutoff year; older titles are dropped at ingest.
pub const MIN_CATALOG_YEAR: u16 = 1980;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog io: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("catalog is empty after filters")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TitleKind {
    Movie,
    Tv,
}

impl std::fmt::Display for TitleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TitleKind::Movie => f.write_str("movie"),
            TitleKind::Tv => f.write_str("tv"),
        }
    }
}

/// One line of a catalog JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCatalogEntry {
    pub title: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alt_titles: Vec<String>,
    pub year: u16,
    pub kind: TitleKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub companies: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub countries: Vec<String>,
}

/// Ingested entry with a stable derived id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub alt_titles: Vec<String>,
    pub year: u16,
    pub kind: TitleKind,
    pub companies: Vec<String>,
    pub countries: Vec<String>,
}

/// Whole-title stoplist: a title is dropped when every token appears here.
#[derive(Debug, Clone)]
pub struct StopList {
    tokens: BTreeSet<String>,
}

impl StopList {
    pub fn from_text(text: &str) -> Self {
        StopList {
            tokens: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(StopList::from_text(&std::fs::read_to_string(path)?))
    }

    pub fn builtin() -> &'static StopList {
        static LIST: OnceLock<StopList> = OnceLock::new();
        LIST.get_or_init(|| StopList::from_text(include_str!("../data/stop_titles.txt")))
    }

    pub fn covers(&self, tokens: &[String]) -> bool {
        !tokens.is_empty() && tokens.iter().all(|t| self.tokens.contains(t))
    }
}

struct Variant {
    entry: u32,
    tokens: Vec<String>,
}

/// Immutable matchable catalog.
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    variants: Vec<Variant>,
    /// token → variant indices containing it.
    token_index: BTreeMap<String, Vec<u32>>,
    /// normalized primary-title name → entry indices, for tie detection.
    name_groups: BTreeMap<String, Vec<u32>>,
    /// entries dropped by the year filter and stoplist, for reporting.
    pub dropped: usize,
}

impl Catalog {
    pub fn ingest_path(path: &Path) -> Result<Catalog, CatalogError> {
        let file = std::fs::File::open(path)?;
        Catalog::ingest_reader(std::io::BufReader::new(file))
    }

    pub fn ingest_reader(reader: impl BufRead) -> Result<Catalog, CatalogError> {
        let mut raw = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("//") {
                continue;
            }
            let entry: RawCatalogEntry = serde_json::from_str(trimmed)
                .map_err(|e| CatalogError::Parse { line: i + 1, message: e.to_string() })?;
            raw.push(entry);
        }
        Catalog::from_raw(raw, StopList::builtin())
    }

    pub fn from_raw(raw: Vec<RawCatalogEntry>, stops: &StopList) -> Result<Catalog, CatalogError> {
        let mut entries: Vec<CatalogEntry> = Vec::new();
        let mut used_ids: BTreeSet<String> = BTreeSet::new();
        let mut dropped = 0usize;
        for r in raw {
            let tokens = tokenize(&r.title);
            if r.year < MIN_CATALOG_YEAR || tokens.is_empty() || stops.covers(&tokens) {
                dropped += 1;
                continue;
            }
            let base = format!("{}-{}", slug(&r.title), r.year);
            let mut id = base.clone();
            if used_ids.contains(&id) {
                if let Some(c) = r.countries.first() {
                    id = format!("{base}-{}", c.to_lowercase());
                }
            }
            let mut n = 2;
            while used_ids.contains(&id) {
                id = format!("{base}-{n}");
                n += 1;
            }
            used_ids.insert(id.clone());
            entries.push(CatalogEntry {
                id,
                title: r.title,
                alt_titles: r.alt_titles,
                year: r.year,
                kind: r.kind,
                companies: r.companies,
                countries: r.countries,
            });
        }
        if entries.is_empty() {
            return Err(CatalogError::Empty);
        }

        let mut variants = Vec::new();
        let mut token_index: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut name_groups: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (ei, e) in entries.iter().enumerate() {
            name_groups.entry(slug(&e.title)).or_default().push(ei as u32);
            for t in std::iter::once(&e.title).chain(e.alt_titles.iter()) {
                let tokens = tokenize(t);
                if tokens.is_empty() {
                    continue;
                }
                let vi = variants.len() as u32;
                for tok in BTreeSet::from_iter(tokens.iter().cloned()) {
                    token_index.entry(tok).or_default().push(vi);
                }
                variants.push(Variant { entry: ei as u32, tokens });
            }
        }
        Ok(Catalog { entries, variants, token_index, name_groups, dropped })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry_by_id(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Match a post's text against the catalog. Results are canonically
    /// ordered by (confidence desc, entry id asc).
    pub fn match_post(&self, post: &PostRecord, threshold: f64) -> Vec<TitleMatch> {
        self.match_text(&post.channel_id, post.post_id, &post.text, threshold)
    }

    pub fn match_text(
        &self,
        channel_id: &str,
        post_id: i64,
        text: &str,
        threshold: f64,
    ) -> Vec<TitleMatch> {
        let post_tokens = tokenize(text);
        if post_tokens.is_empty() {
            return Vec::new();
        }
        let post_token_set: BTreeSet<&str> = post_tokens.iter().map(String::as_str).collect();
        let has_quality = post_tokens.iter().any(|t| QUALITY_CONTEXT.contains(&t.as_str()));

        // Candidate variants share at least one exact token with the post.
        let mut candidates: BTreeSet<u32> = BTreeSet::new();
        for tok in &post_token_set {
            if let Some(vs) = self.token_index.get(*tok) {
                candidates.extend(vs.iter().copied());
            }
        }

        // Best confidence per entry across its variants.
        let mut per_entry: BTreeMap<u32, f64> = BTreeMap::new();
        for vi in candidates {
            let v = &self.variants[vi as usize];
            if let Some(base) = best_window_score(&post_tokens, &v.tokens) {
                let entry = &self.entries[v.entry as usize];
                let mut conf = base;
                if post_token_set.contains(entry.year.to_string().as_str()) {
                    conf += 0.1;
                }
                if has_quality {
                    conf += 0.05;
                }
                let conf = conf.min(1.0);
                let slot = per_entry.entry(v.entry).or_insert(0.0);
                if conf > *slot {
                    *slot = conf;
                }
            }
        }
        per_entry.retain(|_, conf| *conf >= threshold);

        // Tie resolution among same-name entries.
        let mut ambiguous: BTreeMap<u32, bool> = per_entry.keys().map(|&e| (e, false)).collect();
        for group in self.name_groups.values() {
            let present: Vec<u32> =
                group.iter().copied().filter(|e| per_entry.contains_key(e)).collect();
            if present.len() < 2 {
                continue;
            }
            let resolved: Vec<u32> = present
                .iter()
                .copied()
                .filter(|&e| self.disambiguated(&self.entries[e as usize], &post_token_set))
                .collect();
            if resolved.len() == 1 {
                for e in &present {
                    if *e != resolved[0] {
                        per_entry.remove(e);
                        ambiguous.remove(e);
                    }
                }
            } else {
                for e in &present {
                    ambiguous.insert(*e, true);
                }
            }
        }

        let mut out: Vec<TitleMatch> = per_entry
            .into_iter()
            .map(|(ei, confidence)| {
                let e = &self.entries[ei as usize];
                TitleMatch {
                    channel_id: channel_id.to_string(),
                    post_id,
                    entry_id: e.id.clone(),
                    title: e.title.clone(),
                    year: e.year,
                    kind: e.kind,
                    companies: e.companies.clone(),
                    countries: e.countries.clone(),
                    confidence,
                    ambiguous: ambiguous.get(&ei).copied().unwrap_or(false),
                }
            })
            .collect();
        out.sort_by(|a, b| {
            b.confidence
                .partial_cmp(&a.confidence)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.entry_id.cmp(&b.entry_id))
        });
        out
    }

    /// True when the post carries a token tying it to this specific entry:
    /// its year, a country code or alias, a company token, or an alt-title
    /// token absent from the base title.
    fn disambiguated(&self, entry: &CatalogEntry, post_tokens: &BTreeSet<&str>) -> bool {
        if post_tokens.contains(entry.year.to_string().as_str()) {
            return true;
        }
        for c in &entry.countries {
            let code = c.to_lowercase();
            if post_tokens.contains(code.as_str()) {
                return true;
            }
            for alias in country_aliases(&code) {
                if post_tokens.contains(alias) {
                    return true;
                }
            }
        }
        for comp in &entry.companies {
            if tokenize(comp).iter().any(|t| post_tokens.contains(t.as_str())) {
                return true;
            }
        }
        let base: BTreeSet<String> = tokenize(&entry.title).into_iter().collect();
        for alt in &entry.alt_titles {
            if tokenize(alt)
                .iter()
                .any(|t| !base.contains(t) && post_tokens.contains(t.as_str()))
            {
                return true;
            }
        }
        false
    }
}

fn country_aliases(code: &str) -> &'static [&'static str] {
    match code {
        "us" => &["usa", "american"],
        "gb" => &["uk", "british"],
        "kr" => &["korean"],
        "jp" => &["japanese"],
        "in" => &["indian"],
        "fr" => &["french"],
        "de" => &["german"],
        _ => &[],
    }
}

/// Quality tokens used only as a confidence-context bonus.
const QUALITY_CONTEXT: &[&str] = &[
    "480p", "720p", "1080p", "2160p", "4k", "8k", "x264", "x265", "hevc", "webrip", "webdl",
    "bluray", "brrip", "hdrip", "camrip", "hdcam", "dvdrip",
];

/// Token-level fuzzy equality: exact, or edit distance ≤1 for alphabetic
/// tokens of length ≥4 (years and short tokens must be exact).
fn token_fuzzy_eq(post_tok: &str, title_tok: &str) -> bool {
    if post_tok == title_tok {
        return true;
    }
    if title_tok.len() < 4 || title_tok.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    if post_tok.len().abs_diff(title_tok.len()) > 1 {
        return false;
    }
    strsim::levenshtein(post_tok, title_tok) <= 1
}

/// Best window score for a title-token sequence inside post tokens, or
/// None when no window matches. Score is the exact-match ratio with fuzzy
/// tokens discounted; single-token titles require an exact match.
fn best_window_score(post_tokens: &[String], title_tokens: &[String]) -> Option<f64> {
    let n = title_tokens.len();
    if n == 0 || n > post_tokens.len() {
        return None;
    }
    let allow_fuzzy = n >= 2;
    let mut best: Option<f64> = None;
    for window in post_tokens.windows(n) {
        let mut exact = 0usize;
        let mut fuzzy = 0usize;
        let mut ok = true;
        for (p, t) in window.iter().zip(title_tokens) {
            if p == t {
                exact += 1;
            } else if allow_fuzzy && token_fuzzy_eq(p, t) {
                fuzzy += 1;
            } else {
                ok = false;
                break;
            }
        }
        if ok {
            let score = (exact as f64 + 0.9 * fuzzy as f64) / n as f64;
            if best.is_none_or(|b| score > b) {
                best = Some(score);
            }
        }
    }
    best
}

/// A catalog hit for one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleMatch {
    pub channel_id: String,
    pub post_id: i64,
    pub entry_id: String,
    pub title: String,
    pub year: u16,
    pub kind: TitleKind,
    pub companies: Vec<String>,
    pub countries: Vec<String>,
    pub confidence: f64,
    pub ambiguous: bool,
}

pub mod fixture {
    //! Deterministic 500-entry test catalog. The shipped
    //! `data/fixture_catalog.jsonl` is this builder's output; a test keeps
    //! them in sync.

    use super::{CatalogEntry, RawCatalogEntry, StopList, TitleKind};
    use crate::text::tokenize;

    pub const FIXTURE_LEN: usize = 500;

    /// Hand-picked titles used by the simulator's planted posts. The Office
    /// pair is the same-name disambiguation fixture.
    pub const CURATED: &[(&str, u16, TitleKind, &str, &str)] = &[
        ("Crimson Harbor", 2022, TitleKind::Movie, "Meridian Pictures", "US"),
        ("Silent Meridian", 2021, TitleKind::Movie, "Meridian Pictures", "US"),
        ("Paper Lanterns", 2019, TitleKind::Movie, "Aurora Film Group", "JP"),
        ("Glass Orchard", 2023, TitleKind::Tv, "Northlight Studios", "GB"),
        ("Ember Coast", 2020, TitleKind::Tv, "Northlight Studios", "GB"),
        ("Violet Monsoon", 2018, TitleKind::Movie, "Aurora Film Group", "IN"),
        ("Granite Sky", 2024, TitleKind::Movie, "Pacific Crest Media", "US"),
        ("Hollow Cartographer", 2017, TitleKind::Movie, "Ironwood Entertainment", "CA"),
        ("Neon Tide", 2022, TitleKind::Tv, "Pacific Crest Media", "KR"),
        ("Winter Arcade", 2016, TitleKind::Movie, "Bluegate Films", "FR"),
        ("Copper Valley", 2015, TitleKind::Tv, "Ironwood Entertainment", "US"),
        ("Marble Equation", 2023, TitleKind::Movie, "Meridian Pictures", "US"),
        ("Feather District", 2021, TitleKind::Tv, "Aurora Film Group", "JP"),
        ("Juniper Protocol", 2020, TitleKind::Movie, "Northlight Studios", "GB"),
        ("Saffron Causeway", 2019, TitleKind::Movie, "Aurora Film Group", "IN"),
        ("Quartz Festival", 2018, TitleKind::Tv, "Bluegate Films", "DE"),
        ("Drift Harvest", 2024, TitleKind::Movie, "Pacific Crest Media", "AU"),
        ("Cobalt Meadow", 2014, TitleKind::Movie, "Ironwood Entertainment", "US"),
        ("Lantern Summit", 2022, TitleKind::Tv, "Meridian Pictures", "US"),
        ("Onyx Riverbed", 2021, TitleKind::Movie, "Northlight Studios", "GB"),
        ("Prairie Signal", 2017, TitleKind::Tv, "Pacific Crest Media", "US"),
        ("Velvet Compass", 2019, TitleKind::Movie, "Bluegate Films", "FR"),
        ("Falcon Terrace", 2023, TitleKind::Tv, "Ironwood Entertainment", "CA"),
        ("Maple Syndicate", 2020, TitleKind::Movie, "Meridian Pictures", "US"),
        ("Harbor Nocturne", 2016, TitleKind::Movie, "Aurora Film Group", "JP"),
        ("Static Bloom", 2015, TitleKind::Tv, "Northlight Studios", "GB"),
        ("Regal Thicket", 2018, TitleKind::Movie, "Bluegate Films", "DE"),
        ("Mirage Quartet", 2022, TitleKind::Movie, "Aurora Film Group", "IN"),
        ("Border Lullaby", 2021, TitleKind::Movie, "Pacific Crest Media", "KR"),
        ("Echo Pavilion", 2019, TitleKind::Tv, "Meridian Pictures", "US"),
        ("Frost Carnival", 2023, TitleKind::Movie, "Northlight Studios", "GB"),
        ("Gilded Atlas", 2017, TitleKind::Movie, "Ironwood Entertainment", "US"),
        ("Hidden Orchestra", 2020, TitleKind::Tv, "Aurora Film Group", "JP"),
        ("Ivory Monsoon", 2024, TitleKind::Movie, "Bluegate Films", "FR"),
        ("Crooked Lighthouse", 2016, TitleKind::Movie, "Pacific Crest Media", "AU"),
        ("Painted Vortex", 2018, TitleKind::Tv, "Ironwood Entertainment", "CA"),
        ("Amber Citadel", 2022, TitleKind::Movie, "Meridian Pictures", "US"),
        ("Nickel Aurora", 2014, TitleKind::Movie, "Northlight Studios", "GB"),
        ("Savage Pantomime", 2021, TitleKind::Tv, "Bluegate Films", "DE"),
        ("Twilight Foundry", 2023, TitleKind::Movie, "Pacific Crest Media", "US"),
        ("Penumbra", 1995, TitleKind::Movie, "Bluegate Films", "FR"),
    ];

    const FILLER_ADJ: &[&str] = &[
        "scarlet", "indigo", "obsidian", "cedar", "lunar", "solar", "arctic", "desert",
        "midnight", "golden", "rustic", "electric", "phantom", "radiant", "shadowed",
        "sapphire", "brazen", "mellow", "distant", "wandering", "restless", "ancient",
        "northern", "burning", "forgotten", "crystal",
    ];
    const FILLER_NOUN: &[&str] = &[
        "canyon", "station", "empire", "whisper", "garden", "fortress", "parade", "voyage",
        "temple", "market", "lagoon", "cascade", "horizon", "outpost", "serenade", "dominion",
        "paradox", "carousel", "sanctum", "mosaic", "rhapsody", "bastion",
    ];
    const FILLER_COMPANIES: &[&str] = &[
        "Altamira Works", "Kestrel Row Productions", "Stonebriar Media", "Quayside Pictures",
        "Fernways Studio", "Larkspur Entertainment",
    ];
    const FILLER_COUNTRIES: &[&str] = &["US", "GB", "IN", "JP", "KR", "FR", "DE", "BR", "ES", "IT"];

    /// True when the two token sequences could both match one stretch of
    /// text under the window rule (equal or nested with per-token edit
    /// distance ≤1). Fixture entries are kept pairwise conflict-free so a
    /// verbatim embedding matches exactly one entry.
    fn conflicts(a: &[String], b: &[String]) -> bool {
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        if short.is_empty() {
            return false;
        }
        long.windows(short.len()).any(|w| {
            w.iter()
                .zip(short)
                .all(|(x, y)| x == y || super::token_fuzzy_eq(x, y))
        })
    }

    fn title_case(word: &str) -> String {
        let mut cs = word.chars();
        match cs.next() {
            Some(f) => f.to_uppercase().chain(cs).collect(),
            None => String::new(),
        }
    }

    /// The full 500-entry fixture: curated titles, the Office pair, and
    /// generated two-word filler kept conflict-free against everything
    /// already accepted.
    pub fn raw_entries() -> Vec<RawCatalogEntry> {
        let mut out: Vec<RawCatalogEntry> = Vec::with_capacity(FIXTURE_LEN);
        for &(title, year, kind, company, country) in CURATED {
            out.push(RawCatalogEntry {
                title: title.to_string(),
                alt_titles: Vec::new(),
                year,
                kind,
                companies: vec![company.to_string()],
                countries: vec![country.to_string()],
            });
        }
        out.push(RawCatalogEntry {
            title: "The Office".into(),
            alt_titles: vec!["The Office (UK)".into()],
            year: 2001,
            kind: TitleKind::Tv,
            companies: vec!["BBC".into()],
            countries: vec!["GB".into()],
        });
        out.push(RawCatalogEntry {
            title: "The Office".into(),
            alt_titles: vec!["The Office (US)".into()],
            year: 2005,
            kind: TitleKind::Tv,
            companies: vec!["NBC".into()],
            countries: vec!["US".into()],
        });

        let mut accepted_tokens: Vec<Vec<String>> =
            out.iter().map(|e| tokenize(&e.title)).collect();
        let stops = StopList::builtin();
        let mut i = 0usize;
        'outer: for adj in FILLER_ADJ {
            for noun in FILLER_NOUN {
                if out.len() >= FIXTURE_LEN {
                    break 'outer;
                }
                let title = format!("{} {}", title_case(adj), title_case(noun));
                let tokens = tokenize(&title);
                if stops.covers(&tokens)
                    || accepted_tokens.iter().any(|t| conflicts(t, &tokens))
                {
                    continue;
                }
                out.push(RawCatalogEntry {
                    title,
                    alt_titles: Vec::new(),
                    year: 1981 + ((i * 7) % 44) as u16,
                    kind: if i % 3 == 0 { TitleKind::Tv } else { TitleKind::Movie },
                    companies: vec![FILLER_COMPANIES[i % FILLER_COMPANIES.len()].to_string()],
                    countries: vec![FILLER_COUNTRIES[i % FILLER_COUNTRIES.len()].to_string()],
                });
                accepted_tokens.push(tokens);
                i += 1;
            }
        }
        assert_eq!(out.len(), FIXTURE_LEN, "filler word lists too small for fixture");
        out
    }

    /// Fixture as an ingested catalog.
    pub fn catalog() -> super::Catalog {
        super::Catalog::from_raw(raw_entries(), StopList::builtin())
            .expect("fixture catalog ingests")
    }

    /// Serialize the fixture to JSONL (the committed data file's contents).
    pub fn to_jsonl() -> String {
        let mut s = String::new();
        for e in raw_entries() {
            s.push_str(&serde_json::to_string(&e).expect("fixture serializes"));
            s.push('\n');
        }
        s
    }

    /// Curated entries with ingest-derived ids, convenient for planting.
    pub fn curated_entries() -> Vec<CatalogEntry> {
        let cat = catalog();
        cat.entries()[..CURATED.len()].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn office_catalog() -> Catalog {
        let raw = vec![
            RawCatalogEntry {
                title: "The Office".into(),
                alt_titles: vec!["The Office (UK)".into()],
                year: 2001,
                kind: TitleKind::Tv,
                companies: vec!["BBC".into()],
                countries: vec!["GB".into()],
            },
            RawCatalogEntry {
                title: "The Office".into(),
                alt_titles: vec!["The Office (US)".into()],
                year: 2005,
                kind: TitleKind::Tv,
                companies: vec!["NBC".into()],
                countries: vec!["US".into()],
            },
        ];
        Catalog::from_raw(raw, StopList::builtin()).unwrap()
    }

    #[test]
    fn ingest_filters_year_and_stop_titles() {
        let raw = vec![
            RawCatalogEntry {
                title: "Old Classic".into(),
                alt_titles: vec![],
                year: 1975,
                kind: TitleKind::Movie,
                companies: vec![],
                countries: vec![],
            },
            RawCatalogEntry {
                title: "Love".into(),
                alt_titles: vec![],
                year: 2010,
                kind: TitleKind::Movie,
                companies: vec![],
                countries: vec![],
            },
            RawCatalogEntry {
                title: "Love Actually".into(),
                alt_titles: vec![],
                year: 2003,
                kind: TitleKind::Movie,
                companies: vec![],
                countries: vec![],
            },
        ];
        let cat = Catalog::from_raw(raw, StopList::builtin()).unwrap();
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.entries()[0].title, "Love Actually");
        assert_eq!(cat.dropped, 2);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let data = b"{\"title\":\"Ok Film\",\"year\":2000,\"kind\":\"movie\"}\nnot json\n";
        match Catalog::ingest_reader(&data[..]) {
            Err(CatalogError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other.map(|c| c.len())),
        }
    }

    #[test]
    fn office_us_disambiguated_by_country_token() {
        let cat = office_catalog();
        let ms = cat.match_text("ch0001", 1, "The Office US S03 720p", DEFAULT_MATCH_THRESHOLD);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].entry_id, "the-office-2005");
        assert!(!ms[0].ambiguous);
    }

    #[test]
    fn office_without_context_ties_both() {
        let cat = office_catalog();
        let ms = cat.match_text("ch0001", 1, "The Office complete", DEFAULT_MATCH_THRESHOLD);
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.ambiguous));
        let ids: Vec<&str> = ms.iter().map(|m| m.entry_id.as_str()).collect();
        assert_eq!(ids, vec!["the-office-2001", "the-office-2005"]);
    }

    #[test]
    fn office_year_token_disambiguates() {
        let cat = office_catalog();
        let ms = cat.match_text("ch0001", 1, "the office 2001 box set", DEFAULT_MATCH_THRESHOLD);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].entry_id, "the-office-2001");
    }

    #[test]
    fn no_title_means_no_match() {
        let cat = fixture::catalog();
        assert!(cat.match_text("ch0001", 1, "no titles here 1080p", 0.8).is_empty());
    }

    #[test]
    fn verbatim_embedding_matches_exactly_one_fixture_entry() {
        let cat = fixture::catalog();
        let ms = cat.match_text(
            "ch0001",
            7,
            "Crimson Harbor (2022) 1080p ready below, enjoy",
            DEFAULT_MATCH_THRESHOLD,
        );
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].entry_id, "crimson-harbor-2022");
        assert_eq!(ms[0].confidence, 1.0);
        assert!(!ms[0].ambiguous);
    }

    #[test]
    fn single_typo_still_matches_multi_token_title() {
        let cat = fixture::catalog();
        let ms = cat.match_text("ch0001", 1, "Crimsom Harbor rip", 0.8);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].entry_id, "crimson-harbor-2022");
        assert!(ms[0].confidence < 1.0);
    }

    #[test]
    fn single_token_titles_require_exact_match() {
        let cat = fixture::catalog();
        let hit = cat.match_text("ch0001", 1, "Penumbra 1995 restored print", 0.8);
        assert_eq!(hit.len(), 1);
        assert_eq!(hit[0].entry_id, "penumbra-1995");
        let miss = cat.match_text("ch0001", 1, "Penumbr 1995 restored print", 0.8);
        assert!(miss.is_empty());
    }

    #[test]
    fn year_must_match_exactly_not_fuzzily() {
        let raw = vec![RawCatalogEntry {
            title: "Sector 2049".into(),
            alt_titles: vec![],
            year: 2017,
            kind: TitleKind::Movie,
            companies: vec![],
            countries: vec![],
        }];
        let cat = Catalog::from_raw(raw, StopList::builtin()).unwrap();
        assert_eq!(cat.match_text("c", 1, "sector 2049 rip", 0.8).len(), 1);
        assert!(cat.match_text("c", 1, "sector 2048 rip", 0.8).is_empty());
    }

    #[test]
    fn fixture_has_five_hundred_conflict_free_entries() {
        let raw = fixture::raw_entries();
        assert_eq!(raw.len(), fixture::FIXTURE_LEN);
        let cat = fixture::catalog();
        // Office pair intentionally shares a name; everything else unique.
        assert_eq!(cat.len(), fixture::FIXTURE_LEN);
    }

    #[test]
    fn matched_tokens_recheck_within_edit_distance_one() {
        // Re-verify the structural invariant on a batch of fixture probes.
        let cat = fixture::catalog();
        let texts = [
            "Glass Orchard complete season 2160p",
            "watch Neon Tide online free",
            "Saffron Causeway hindi dub",
            "Painted Vortex batch all episodes",
        ];
        for text in texts {
            for m in cat.match_text("c", 1, text, 0.8) {
                let entry = cat.entry_by_id(&m.entry_id).unwrap();
                let post_tokens = tokenize(text);
                let ok = std::iter::once(&entry.title)
                    .chain(entry.alt_titles.iter())
                    .any(|v| best_window_score(&post_tokens, &tokenize(v)).is_some());
                assert!(ok, "match for {} fails re-check on {:?}", m.entry_id, text);
            }
        }
    }

    #[test]
    fn results_ordered_by_confidence_then_id() {
        let raw = vec![
            RawCatalogEntry {
                title: "Alpha Canyon".into(),
                alt_titles: vec![],
                year: 2001,
                kind: TitleKind::Movie,
                companies: vec![],
                countries: vec![],
            },
            RawCatalogEntry {
                title: "Beta Canyon Ridge".into(),
                alt_titles: vec![],
                year: 2002,
                kind: TitleKind::Movie,
                companies: vec![],
                countries: vec![],
            },
        ];
        let cat = Catalog::from_raw(raw, StopList::builtin()).unwrap();
        // Typo holds Alpha Canyon below 1.0; Beta scores exact.
        let ms = cat.match_text("c", 1, "alpba canyon and beta canyon ridge", 0.8);
        assert_eq!(ms.len(), 2);
        assert!(ms[0].confidence > ms[1].confidence);
        assert_eq!(ms[0].entry_id, "beta-canyon-ridge-2002");
        // At equal confidence the id breaks the tie.
        let tie = cat.match_text("c", 1, "alpha canyon and beta canyon ridge", 0.8);
        assert_eq!(tie[0].entry_id, "alpha-canyon-2001");
    }
}
