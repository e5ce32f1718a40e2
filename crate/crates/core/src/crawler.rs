//! Discovery crawler: probe candidate handles, gate seeds on recency,
//! extract internal links from post text, and expand breadth-first to a
//! bounded depth.
//!
//! Depth 0 holds entities found by handle synthesis and gated on feed age;
//! deeper entities arrive through links and are kept regardless of age.
//! Bots are terminal for traversal: they expose no public feed to mine.
//! Invite links are recorded but never followed, and each entity's posts
//! are fetched at most once per crawl epoch.

use crate::handles::handle_ok;
use crate::platform::{
    with_retries, ChannelRecord, InternalLink, LinkKind, PlatformClient, PlatformError, PostRecord,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

pub const DEFAULT_WINDOW_DAYS: u32 = 7;
pub const DEFAULT_PROBE_POSTS: usize = 10;
pub const DEFAULT_MAX_DEPTH: u8 = 2;
pub const DEFAULT_RETRY_ATTEMPTS: usize = 3;

#[derive(Debug, Error)]
pub enum CrawlError {
    /// Retry budget exhausted on a platform call.
    #[error("transport failure after retries: {0}")]
    Transport(#[from] PlatformError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlConfig {
    /// Reference wall clock, unix seconds.
    pub now: i64,
    pub window_days: u32,
    pub probe_posts: usize,
    pub max_depth: u8,
    /// Parse @handle mentions in addition to t.me links. Extension over the
    /// source protocol; disable for strict link-only discovery.
    pub parse_mentions: bool,
    pub retry_attempts: usize,
}

impl CrawlConfig {
    pub fn at(now: i64) -> Self {
        CrawlConfig {
            now,
            window_days: DEFAULT_WINDOW_DAYS,
            probe_posts: DEFAULT_PROBE_POSTS,
            max_depth: DEFAULT_MAX_DEPTH,
            parse_mentions: true,
            retry_attempts: DEFAULT_RETRY_ATTEMPTS,
        }
    }
}

/// How an entity entered the frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    HandleSynthesis,
    Link,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredEntity {
    pub record: ChannelRecord,
    pub depth: u8,
    pub origin: Origin,
    /// Id of the entity whose post linked here; None for seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InviteSighting {
    pub src_id: String,
    pub token: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryResult {
    /// Channels sorted by (depth, id). Depth-0 entries all passed the gate.
    pub channels: Vec<DiscoveredEntity>,
    /// Bots sorted by (depth, id).
    pub bots: Vec<DiscoveredEntity>,
    /// Resolved depth-0 candidates whose feed was older than the window.
    pub gated_out: Vec<String>,
    /// Distinct (src, target) link sightings that failed to resolve.
    pub dead_links: usize,
    /// t.me URLs whose handle or token was syntactically invalid.
    pub malformed_links: usize,
    pub invite_links: Vec<InviteSighting>,
    pub candidates_total: usize,
    /// Candidates rejected by handle_ok before any network call.
    pub candidates_rejected: usize,
    pub candidates_probed: usize,
    pub candidates_resolved: usize,
}

impl DiscoveryResult {
    /// All entities merged, sorted by (depth, id).
    pub fn entities(&self) -> Vec<&DiscoveredEntity> {
        let mut all: Vec<&DiscoveredEntity> = self.channels.iter().chain(&self.bots).collect();
        all.sort_by(|a, b| (a.depth, &a.record.id).cmp(&(b.depth, &b.record.id)));
        all
    }

    pub fn contains(&self, id: &str) -> bool {
        self.channels
            .iter()
            .chain(&self.bots)
            .any(|e| e.record.id == id)
    }

    pub fn entity(&self, id: &str) -> Option<&DiscoveredEntity> {
        self.channels
            .iter()
            .chain(&self.bots)
            .find(|e| e.record.id == id)
    }

    pub fn len(&self) -> usize {
        self.channels.len() + self.bots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty() && self.bots.is_empty()
    }
}

/// True iff the channel's earliest post falls within the window (inclusive).
pub fn recency_gate(channel: &ChannelRecord, now: i64, window_days: u32) -> bool {
    now - channel.earliest_post_time <= window_days as i64 * 86_400
}

// ---------------------------------------------------------------------------
// Link extraction.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractedLinks {
    /// First-seen order, deduplicated by target.
    pub links: Vec<InternalLink>,
    /// t.me URLs carrying an invalid handle or empty invite token.
    pub malformed: usize,
}

fn handle_run(text: &str) -> &str {
    let end = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(text.len());
    &text[..end]
}

fn invite_run(text: &str) -> &str {
    let end = text
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
        .unwrap_or(text.len());
    &text[..end]
}

fn infer_kind(handle: &str) -> LinkKind {
    if handle.to_ascii_lowercase().ends_with("bot") {
        LinkKind::Bot
    } else {
        LinkKind::Channel
    }
}

#[derive(Default)]
struct LinkCollector {
    links: Vec<InternalLink>,
    seen_handles: BTreeSet<String>,
    seen_invites: BTreeSet<String>,
    malformed: usize,
}

impl LinkCollector {
    fn push(&mut self, link: InternalLink) {
        let fresh = match link.kind {
            LinkKind::Invite => self.seen_invites.insert(link.target.clone()),
            _ => self.seen_handles.insert(link.target.clone()),
        };
        if fresh {
            self.links.push(link);
        }
    }

    fn scan_text(&mut self, text: &str, parse_mentions: bool) {
        let bytes = text.as_bytes();
        let mut at = 0;
        while let Some(pos) = text[at..].find("t.me/") {
            let start = at + pos;
            at = start + 5;
            // Reject handle-ish prefixes like "xt.me/”; scheme and www are fine.
            if start > 0 && bytes[start - 1].is_ascii_alphanumeric() {
                continue;
            }
            let mut rest = &text[start + 5..];
            if let Some(tok_str) = rest.strip_prefix('+') {
                let token = invite_run(tok_str);
                if token.is_empty() {
                    self.malformed += 1;
                } else {
                    self.push(InternalLink::invite(token));
                }
                continue;
            }
            if let Some(after) = rest.strip_prefix("s/") {
                rest = after;
            }
            let handle = handle_run(rest);
            if handle_ok(handle) {
                let canon = handle.to_ascii_lowercase();
                self.push(InternalLink { kind: infer_kind(&canon), target: canon });
            } else {
                self.malformed += 1;
            }
        }
        if !parse_mentions {
            return;
        }
        let mut at = 0;
        while let Some(pos) = text[at..].find('@') {
            let start = at + pos;
            at = start + 1;
            // Word boundary: emails and mid-token @ are not mentions.
            if start > 0 && bytes[start - 1].is_ascii_alphanumeric() {
                continue;
            }
            let handle = handle_run(&text[start + 1..]);
            if handle_ok(handle) {
                let canon = handle.to_ascii_lowercase();
                self.push(InternalLink { kind: infer_kind(&canon), target: canon });
            }
        }
    }

    fn scan_post(&mut self, post: &PostRecord, parse_mentions: bool) {
        // Structured links first: their kind is authoritative on dedup.
        for l in &post.internal_links {
            let link = match l.kind {
                LinkKind::Invite => l.clone(),
                kind => InternalLink { kind, target: l.target.to_ascii_lowercase() },
            };
            self.push(link);
        }
        self.scan_text(&post.text, parse_mentions);
    }

    fn finish(self) -> ExtractedLinks {
        ExtractedLinks { links: self.links, malformed: self.malformed }
    }
}

/// Links referenced by a batch of posts: structured entries plus t.me URLs
/// and @mentions parsed from text, first-seen order, deduplicated by target.
pub fn extract_internal_links(posts: &[PostRecord], parse_mentions: bool) -> ExtractedLinks {
    let mut c = LinkCollector::default();
    for p in posts {
        c.scan_post(p, parse_mentions);
    }
    c.finish()
}

/// Single-post variant of [`extract_internal_links`].
pub fn extract_post_links(post: &PostRecord, parse_mentions: bool) -> ExtractedLinks {
    extract_internal_links(std::slice::from_ref(post), parse_mentions)
}

// ---------------------------------------------------------------------------
// Probe and expansion.

#[derive(Debug, Clone, Default)]
pub struct ProbeOutcome {
    pub resolved: Vec<ChannelRecord>,
    pub total: usize,
    pub rejected: usize,
    pub probed: usize,
}

/// Resolve candidate handles. Candidates failing `handle_ok` never reach the
/// network; unresolved handles are dropped but counted.
pub fn probe(
    client: &dyn PlatformClient,
    candidates: &[String],
    retry_attempts: usize,
    mut sleeper: impl FnMut(usize),
) -> Result<ProbeOutcome, CrawlError> {
    let mut out = ProbeOutcome::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for cand in candidates {
        let cand = cand.to_ascii_lowercase();
        if !seen.insert(cand.clone()) {
            continue;
        }
        out.total += 1;
        if !handle_ok(&cand) {
            out.rejected += 1;
            continue;
        }
        out.probed += 1;
        if let Some(rec) =
            with_retries(retry_attempts, &mut sleeper, || client.resolve_handle(&cand))?
        {
            out.resolved.push(rec);
        }
    }
    Ok(out)
}

/// Bounded BFS frontier. No entity is enqueued twice and no entry exceeds
/// the depth bound.
#[derive(Debug, Default)]
pub struct CrawlFrontier {
    entries: VecDeque<(String, u8)>,
    visited: BTreeSet<String>,
}

impl CrawlFrontier {
    pub fn enqueue(&mut self, id: impl Into<String>, depth: u8, max_depth: u8) -> bool {
        let id = id.into();
        if depth > max_depth || !self.visited.insert(id.clone()) {
            return false;
        }
        self.entries.push_back((id, depth));
        true
    }

    pub fn pop(&mut self) -> Option<(String, u8)> {
        self.entries.pop_front()
    }

    pub fn visited(&self) -> &BTreeSet<String> {
        &self.visited
    }
}

/// Full crawl: probe, gate, expand. Backoff between retries is injected so
/// tests stay instant.
pub fn crawl_with_sleeper(
    client: &dyn PlatformClient,
    candidates: &[String],
    cfg: &CrawlConfig,
    mut sleeper: impl FnMut(usize),
) -> Result<DiscoveryResult, CrawlError> {
    let mut result = DiscoveryResult::default();

    let probe_out = probe(client, candidates, cfg.retry_attempts, &mut sleeper)?;
    result.candidates_total = probe_out.total;
    result.candidates_rejected = probe_out.rejected;
    result.candidates_probed = probe_out.probed;
    result.candidates_resolved = probe_out.resolved.len();

    // Resolution cache: a handle is resolved at most once per epoch.
    let mut resolution: BTreeMap<String, Option<ChannelRecord>> = BTreeMap::new();
    let mut entities: BTreeMap<String, DiscoveredEntity> = BTreeMap::new();
    let mut frontier = CrawlFrontier::default();

    for rec in probe_out.resolved {
        if let Some(h) = &rec.handle {
            resolution.insert(h.clone(), Some(rec.clone()));
        }
        if !recency_gate(&rec, cfg.now, cfg.window_days) {
            result.gated_out.push(rec.id.clone());
            continue;
        }
        if frontier.enqueue(rec.id.clone(), 0, cfg.max_depth) {
            entities.insert(
                rec.id.clone(),
                DiscoveredEntity { record: rec, depth: 0, origin: Origin::HandleSynthesis, via: None },
            );
        }
    }
    result.gated_out.sort();
    result.gated_out.dedup();

    let mut dead: BTreeSet<(String, String)> = BTreeSet::new();
    let mut invites: BTreeSet<InviteSighting> = BTreeSet::new();
    let mut fetched: BTreeSet<String> = BTreeSet::new();

    while let Some((id, depth)) = frontier.pop() {
        if depth >= cfg.max_depth {
            continue;
        }
        let entity = entities.get(&id).expect("frontier entries are registered").clone();
        if entity.record.is_bot {
            continue;
        }
        assert!(fetched.insert(id.clone()), "one fetch_posts per entity per epoch");
        let posts = match with_retries(cfg.retry_attempts, &mut sleeper, || {
            client.fetch_posts(&id, cfg.probe_posts)
        }) {
            Ok(posts) => posts,
            // The channel vanished mid-crawl: keep the entity, skip its feed.
            Err(PlatformError::ChannelGone(_)) | Err(PlatformError::UnknownEntity(_)) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        let extracted = extract_internal_links(&posts, cfg.parse_mentions);
        result.malformed_links += extracted.malformed;
        for link in extracted.links {
            if link.kind == LinkKind::Invite {
                invites.insert(InviteSighting { src_id: id.clone(), token: link.target });
                continue;
            }
            let resolved = match resolution.get(&link.target) {
                Some(cached) => cached.clone(),
                None => {
                    let r = with_retries(cfg.retry_attempts, &mut sleeper, || {
                        client.resolve_handle(&link.target)
                    })?;
                    resolution.insert(link.target.clone(), r.clone());
                    r
                }
            };
            match resolved {
                None => {
                    dead.insert((id.clone(), link.target));
                }
                Some(rec) => {
                    if frontier.enqueue(rec.id.clone(), depth + 1, cfg.max_depth) {
                        entities.insert(
                            rec.id.clone(),
                            DiscoveredEntity {
                                record: rec,
                                depth: depth + 1,
                                origin: Origin::Link,
                                via: Some(id.clone()),
                            },
                        );
                    }
                }
            }
        }
    }

    result.dead_links = dead.len();
    result.invite_links = invites.into_iter().collect();
    for (_, e) in entities {
        if e.record.is_bot {
            result.bots.push(e);
        } else {
            result.channels.push(e);
        }
    }
    result
        .channels
        .sort_by(|a, b| (a.depth, &a.record.id).cmp(&(b.depth, &b.record.id)));
    result
        .bots
        .sort_by(|a, b| (a.depth, &a.record.id).cmp(&(b.depth, &b.record.id)));
    Ok(result)
}

/// [`crawl_with_sleeper`] with fixed 500 ms-per-attempt backoff.
pub fn crawl(
    client: &dyn PlatformClient,
    candidates: &[String],
    cfg: &CrawlConfig,
) -> Result<DiscoveryResult, CrawlError> {
    crawl_with_sleeper(client, candidates, cfg, |attempt| {
        std::thread::sleep(std::time::Duration::from_millis(500 * (attempt as u64 + 1)))
    })
}
