//! Abuse report assembly and takedown outcome tracking.
//!
//! Reports are built from classified verdicts plus the hydrated post store,
//! addressed either to the platform (all piracy posts per channel) or to a
//! rights holder (only the posts matched to that holder's titles). Nothing is
//! transmitted anywhere: reports land in an outbox directory as JSON plus a
//! rendered plain-text summary, and enforcement outcomes are observed by
//! re-probing entities through the same `PlatformClient` used for crawling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::TitleMatch;
use crate::platform::{
    with_retries, ChannelRecord, LinkKind, PlatformClient, PlatformError, PostRecord,
};
use crate::taxonomy::PostVerdict;

/// How long an entity stays under observation after being reported.
pub const TRACKING_WINDOW_DAYS: u32 = 14;

/// Width of one batching bucket. Detections are coalesced per civil day so a
/// batched report can never span more than 24 hours.
pub const BATCH_WINDOW_SECS: i64 = 86_400;

/// Feed page size used when sampling a channel for removed posts.
pub const TRACK_FETCH_LIMIT: usize = 500;

/// Character budget for the free-text excerpt included with each evidence item.
const EXCERPT_CHARS: usize = 200;

#[derive(Debug, Error)]
pub enum ReportError {
    /// The requested channel contributed no piracy verdicts.
    #[error("channel {0} has no piracy evidence")]
    NoEvidence(String),
}

/// Referential-integrity violation: an evidence item that does not trace back
/// to a piracy verdict in the store it was allegedly built from.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("evidence item {channel_id}/{post_id} does not trace to a piracy verdict")]
pub struct IntegrityError {
    pub channel_id: String,
    pub post_id: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    /// One report per detection.
    Event,
    /// Detections for the same recipient coalesced per 24-hour bucket.
    Batched,
}

impl FromStr for ReportMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "event" => Ok(ReportMode::Event),
            "batched" => Ok(ReportMode::Batched),
            other => Err(format!("unknown report mode {other:?} (want event|batched)")),
        }
    }
}

/// Evidence detail level. Some recipients ask for bare URLs only; the default
/// ships the full context (title, labels, links, excerpt, screenshot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVariant {
    Contextual,
    UrlOnly,
}

impl FromStr for ReportVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contextual" => Ok(ReportVariant::Contextual),
            "url_only" | "url-only" => Ok(ReportVariant::UrlOnly),
            other => Err(format!("unknown report variant {other:?} (want contextual|url_only)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "name")]
pub enum Recipient {
    Platform,
    RightsHolder(String),
}

impl Recipient {
    /// Stable key used for grouping and for the outbox subdirectory.
    pub fn dir_name(&self) -> String {
        match self {
            Recipient::Platform => "platform".to_string(),
            Recipient::RightsHolder(name) => slug(name),
        }
    }

    pub fn display_name(&self) -> &str {
        match self {
            Recipient::Platform => "platform",
            Recipient::RightsHolder(name) => name,
        }
    }
}

impl fmt::Display for Recipient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Filesystem-safe slug: lowercase alphanumerics with single dashes.
fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut dash = true; // suppress a leading dash
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
            dash = false;
        } else if !dash {
            out.push('-');
            dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("unnamed");
    }
    out
}

/// One reported post. In the `UrlOnly` variant everything except the post
/// address is stripped; the identifying pair stays so integrity checks hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub channel_id: String,
    pub post_id: i64,
    pub time: i64,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub internal_links: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_links: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<crate::taxonomy::AssignedLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excerpt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEvidence {
    pub channel: ChannelRecord,
    pub posts: Vec<EvidenceItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbuseReport {
    pub report_id: String,
    pub recipient: Recipient,
    pub created_at: i64,
    pub mode: ReportMode,
    pub variant: ReportVariant,
    pub channels: Vec<ChannelEvidence>,
}

impl AbuseReport {
    pub fn n_items(&self) -> usize {
        self.channels.iter().map(|c| c.posts.len()).sum()
    }

    /// (earliest, latest) evidence timestamp. Reports are never empty.
    pub fn time_span(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for c in &self.channels {
            for p in &c.posts {
                lo = lo.min(p.time);
                hi = hi.max(p.time);
            }
        }
        (lo, hi)
    }
}

/// Company -> abuse-contact name. Ships as a plain JSON object so deployments
/// can maintain their own contact list; companies absent from the map simply
/// get no rights-holder report (the platform report still covers the post).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RightsHolderMap {
    pub contacts: BTreeMap<String, String>,
}

impl RightsHolderMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, company: impl Into<String>, contact: impl Into<String>) {
        self.contacts.insert(company.into(), contact.into());
    }

    pub fn recipient_for(&self, company: &str) -> Option<&str> {
        self.contacts.get(company).map(String::as_str)
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn from_path(path: &Path) -> io::Result<Self> {
        let raw = fs::read_to_string(path)?;
        Self::from_json_str(&raw).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// Output of one assembly run: the reports themselves plus the channels that
/// were requested but contributed nothing (logged, not fatal).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBatch {
    pub reports: Vec<AbuseReport>,
    /// Channel ids with zero piracy posts, skipped.
    pub skipped_no_evidence: Vec<String>,
    /// Matched companies with no configured abuse contact.
    pub unmapped_companies: Vec<String>,
}

struct Detection<'a> {
    verdict: &'a PostVerdict,
    post: &'a PostRecord,
    channel: &'a ChannelRecord,
    best_match: Option<&'a TitleMatch>,
}

/// Assemble abuse reports from classified verdicts.
///
/// The platform recipient receives every piracy post grouped by channel.
/// Rights holders receive only the posts whose best catalog match belongs to
/// one of their production companies (attribution uses the match's first
/// listed company). `Batched` coalesces detections per recipient per civil
/// day; `Event` emits one report per detection per recipient.
pub fn build_reports(
    verdicts: &[PostVerdict],
    posts: &[PostRecord],
    channels: &[ChannelRecord],
    matches: &[TitleMatch],
    rights_holders: &RightsHolderMap,
    mode: ReportMode,
    variant: ReportVariant,
) -> ReportBatch {
    let post_by_key: BTreeMap<(&str, i64), &PostRecord> =
        posts.iter().map(|p| ((p.channel_id.as_str(), p.post_id), p)).collect();
    let channel_by_id: BTreeMap<&str, &ChannelRecord> =
        channels.iter().map(|c| (c.id.as_str(), c)).collect();
    // Matches arrive ordered (confidence desc, id asc); keep the best per post.
    let mut best_match: BTreeMap<(&str, i64), &TitleMatch> = BTreeMap::new();
    for m in matches {
        best_match.entry((m.channel_id.as_str(), m.post_id)).or_insert(m);
    }

    let mut detections: Vec<Detection<'_>> = Vec::new();
    let mut piracy_channels: BTreeSet<&str> = BTreeSet::new();
    for v in verdicts {
        if !v.is_piracy {
            continue;
        }
        let key = (v.channel_id.as_str(), v.post_id);
        // A verdict without a hydrated post cannot be evidenced; the
        // integrity invariant runs the other way (evidence -> verdict).
        let Some(post) = post_by_key.get(&key) else { continue };
        let Some(channel) = channel_by_id.get(v.channel_id.as_str()) else { continue };
        piracy_channels.insert(v.channel_id.as_str());
        detections.push(Detection {
            verdict: v,
            post,
            channel,
            best_match: best_match.get(&key).copied(),
        });
    }
    detections.sort_by(|a, b| {
        (a.post.time, a.post.channel_id.as_str(), a.post.post_id)
            .cmp(&(b.post.time, b.post.channel_id.as_str(), b.post.post_id))
    });

    let skipped_no_evidence: Vec<String> = channels
        .iter()
        .filter(|c| !piracy_channels.contains(c.id.as_str()))
        .map(|c| c.id.clone())
        .collect();

    // Route every detection to the platform, plus to the mapped rights
    // holder when the best match's lead company has a contact.
    let mut unmapped: BTreeSet<String> = BTreeSet::new();
    let mut routed: Vec<(Recipient, usize)> = Vec::new();
    for (i, d) in detections.iter().enumerate() {
        routed.push((Recipient::Platform, i));
        if let Some(m) = d.best_match {
            if let Some(company) = m.companies.first() {
                match rights_holders.recipient_for(company) {
                    Some(contact) => {
                        routed.push((Recipient::RightsHolder(contact.to_string()), i))
                    }
                    None => {
                        unmapped.insert(company.clone());
                    }
                }
            }
        }
    }

    // Group routed detections into report-sized units.
    let mut groups: BTreeMap<(String, i64, Recipient), Vec<usize>> = BTreeMap::new();
    for (recipient, i) in routed {
        let bucket = match mode {
            ReportMode::Batched => detections[i].post.time.div_euclid(BATCH_WINDOW_SECS),
            // Event reports carry exactly one detection: key by index.
            ReportMode::Event => i as i64,
        };
        groups.entry((recipient.dir_name(), bucket, recipient)).or_default().push(i);
    }

    let mut reports: Vec<AbuseReport> = Vec::new();
    for ((_, _, recipient), idxs) in groups {
        let mut by_channel: BTreeMap<&str, Vec<&Detection<'_>>> = BTreeMap::new();
        let mut created_at = i64::MIN;
        for &i in &idxs {
            let d = &detections[i];
            created_at = created_at.max(d.post.time);
            by_channel.entry(d.channel.id.as_str()).or_default().push(d);
        }
        let channels: Vec<ChannelEvidence> = by_channel
            .into_values()
            .map(|ds| {
                let channel = ds[0].channel.clone();
                let mut items: Vec<EvidenceItem> =
                    ds.iter().map(|d| evidence_item(d, variant)).collect();
                items.sort_by_key(|it| (it.time, it.post_id));
                items.dedup_by(|a, b| a.post_id == b.post_id && a.channel_id == b.channel_id);
                ChannelEvidence { channel, posts: items }
            })
            .collect();
        let report_id = report_id(&recipient, mode, variant, created_at, &channels);
        reports.push(AbuseReport { report_id, recipient, created_at, mode, variant, channels });
    }
    reports.sort_by(|a, b| {
        (a.created_at, a.recipient.dir_name(), a.report_id.as_str()).cmp(&(
            b.created_at,
            b.recipient.dir_name(),
            b.report_id.as_str(),
        ))
    });

    ReportBatch {
        reports,
        skipped_no_evidence,
        unmapped_companies: unmapped.into_iter().collect(),
    }
}

/// Platform-recipient report for a single channel, all of its piracy posts.
/// Errors with `NoEvidence` when the channel has none.
pub fn channel_report(
    channel: &ChannelRecord,
    verdicts: &[PostVerdict],
    posts: &[PostRecord],
    matches: &[TitleMatch],
    variant: ReportVariant,
) -> Result<AbuseReport, ReportError> {
    let batch = build_reports(
        verdicts,
        posts,
        std::slice::from_ref(channel),
        matches,
        &RightsHolderMap::new(),
        ReportMode::Batched,
        variant,
    );
    let mut channel_reports: Vec<AbuseReport> = batch
        .reports
        .into_iter()
        .filter(|r| r.recipient == Recipient::Platform)
        .collect();
    if channel_reports.is_empty() {
        return Err(ReportError::NoEvidence(channel.id.clone()));
    }
    // Re-coalesce multi-day evidence into one document for the manual path.
    let mut merged = channel_reports.remove(0);
    for r in channel_reports {
        merged.created_at = merged.created_at.max(r.created_at);
        for ce in r.channels {
            match merged.channels.iter_mut().find(|c| c.channel.id == ce.channel.id) {
                Some(existing) => existing.posts.extend(ce.posts),
                None => merged.channels.push(ce),
            }
        }
    }
    for ce in &mut merged.channels {
        ce.posts.sort_by_key(|it| (it.time, it.post_id));
    }
    merged.report_id =
        report_id(&merged.recipient, merged.mode, merged.variant, merged.created_at, &merged.channels);
    Ok(merged)
}

fn evidence_item(d: &Detection<'_>, variant: ReportVariant) -> EvidenceItem {
    let url = post_url(d.channel, d.post.post_id);
    if variant == ReportVariant::UrlOnly {
        return EvidenceItem {
            channel_id: d.post.channel_id.clone(),
            post_id: d.post.post_id,
            time: d.post.time,
            url,
            title: None,
            title_id: None,
            screenshot_ref: None,
            internal_links: Vec::new(),
            external_links: Vec::new(),
            labels: Vec::new(),
            excerpt: None,
        };
    }
    let internal_links = d.post.internal_links.iter().map(link_url).collect();
    let excerpt: String = d.post.text.chars().take(EXCERPT_CHARS).collect();
    EvidenceItem {
        channel_id: d.post.channel_id.clone(),
        post_id: d.post.post_id,
        time: d.post.time,
        url,
        title: d.best_match.map(|m| format!("{} ({})", m.title, m.year)),
        title_id: d.best_match.map(|m| m.entry_id.clone()),
        screenshot_ref: d.post.screenshot_ref.clone(),
        internal_links,
        external_links: d.post.external_links.clone(),
        labels: d.verdict.labels.clone(),
        excerpt: (!excerpt.is_empty()).then_some(excerpt),
    }
}

fn post_url(channel: &ChannelRecord, post_id: i64) -> String {
    match &channel.handle {
        Some(h) => format!("https://t.me/{h}/{post_id}"),
        None => format!("https://t.me/c/{}/{post_id}", channel.id),
    }
}

fn link_url(link: &crate::platform::InternalLink) -> String {
    match link.kind {
        LinkKind::Invite => format!("https://t.me/+{}", link.target),
        LinkKind::Channel | LinkKind::Bot => format!("https://t.me/{}", link.target),
    }
}

/// Deterministic id: hash of recipient, mode/variant, creation time, and the
/// full sorted evidence key set. Stable across re-runs of the same inputs.
fn report_id(
    recipient: &Recipient,
    mode: ReportMode,
    variant: ReportVariant,
    created_at: i64,
    channels: &[ChannelEvidence],
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(recipient.dir_name().as_bytes());
    hasher.update([0]);
    hasher.update(format!("{mode:?}/{variant:?}/{created_at}").as_bytes());
    for c in channels {
        for p in &c.posts {
            hasher.update([0]);
            hasher.update(p.channel_id.as_bytes());
            hasher.update(p.post_id.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("r{}", &hex[..12])
}

/// Every evidence item must trace back to exactly one piracy verdict.
pub fn verify_integrity(
    reports: &[AbuseReport],
    verdicts: &[PostVerdict],
) -> Result<(), IntegrityError> {
    let store: BTreeSet<(&str, i64)> = verdicts
        .iter()
        .filter(|v| v.is_piracy)
        .map(|v| (v.channel_id.as_str(), v.post_id))
        .collect();
    for r in reports {
        for c in &r.channels {
            for p in &c.posts {
                if !store.contains(&(p.channel_id.as_str(), p.post_id)) {
                    return Err(IntegrityError {
                        channel_id: p.channel_id.clone(),
                        post_id: p.post_id,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Write each report to `outbox/<recipient>/<report_id>.json` plus a rendered
/// `.txt` next to it. Returns the written paths, sorted. Existing files are
/// overwritten, which makes re-runs idempotent.
pub fn write_outbox(reports: &[AbuseReport], outbox: &Path) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in reports {
        let dir = outbox.join(r.recipient.dir_name());
        fs::create_dir_all(&dir)?;
        let json_path = dir.join(format!("{}.json", r.report_id));
        let mut body = serde_json::to_string_pretty(r)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        body.push('\n');
        fs::write(&json_path, body)?;
        let txt_path = dir.join(format!("{}.txt", r.report_id));
        fs::write(&txt_path, render_text(r))?;
        written.push(json_path);
        written.push(txt_path);
    }
    written.sort();
    Ok(written)
}

/// Plain-text rendering of a report, the human-readable half of the outbox.
pub fn render_text(r: &AbuseReport) -> String {
    let mut out = String::new();
    let mode = match r.mode {
        ReportMode::Event => "event",
        ReportMode::Batched => "batched",
    };
    out.push_str(&format!("ABUSE REPORT {}\n", r.report_id));
    out.push_str(&format!("recipient: {}\n", r.recipient.display_name()));
    out.push_str(&format!("created:   {} ({})\n", utc_string(r.created_at), r.created_at));
    out.push_str(&format!("mode:      {mode}\n"));
    out.push_str(&format!(
        "scope:     {} channel(s), {} post(s)\n",
        r.channels.len(),
        r.n_items()
    ));
    for c in &r.channels {
        let handle = c.channel.handle.as_deref().unwrap_or("-");
        out.push_str(&format!(
            "\nchannel {} (@{handle}) {:?}, {} subscribers\n",
            c.channel.id, c.channel.title, c.channel.subscriber_count
        ));
        for p in &c.posts {
            if r.variant == ReportVariant::UrlOnly {
                out.push_str(&format!("  {}\n", p.url));
                continue;
            }
            out.push_str(&format!("  post {} at {}\n", p.post_id, utc_string(p.time)));
            out.push_str(&format!("    url: {}\n", p.url));
            if let Some(t) = &p.title {
                out.push_str(&format!("    title: {t}\n"));
            }
            for l in &p.labels {
                out.push_str(&format!(
                    "    label: {}/{}: {}\n",
                    l.group.wire_name(),
                    l.leaf.wire_name(),
                    l.justification
                ));
            }
            for link in &p.internal_links {
                out.push_str(&format!("    internal: {link}\n"));
            }
            for link in &p.external_links {
                out.push_str(&format!("    external: {link}\n"));
            }
            if let Some(s) = &p.screenshot_ref {
                out.push_str(&format!("    screenshot: {s}\n"));
            }
            if let Some(e) = &p.excerpt {
                out.push_str(&format!("    excerpt: {e}\n"));
            }
        }
    }
    out
}

/// `1767225600` -> `2026-01-01 00:00:00Z`. Days-to-civil conversion per the
/// standard proleptic-Gregorian algorithm; good for any timestamp we emit.
pub fn utc_string(ts: i64) -> String {
    let days = ts.div_euclid(86_400);
    let secs = ts.rem_euclid(86_400);
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!(
        "{:04}-{:02}-{:02} {:02}:{:02}:{:02}Z",
        y,
        m,
        d,
        secs / 3600,
        (secs / 60) % 60,
        secs % 60
    )
}

// ---------------------------------------------------------------------------
// Longitudinal tracking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityStatus {
    Alive,
    Gone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnforcementFeedback {
    Confirmed,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingCheck {
    pub time: i64,
    pub status: EntityStatus,
    /// Reported posts observed removed (missing from the feed or replaced by
    /// a removal marker). For a gone entity this is all of them.
    pub posts_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackingRecord {
    pub entity_id: String,
    pub is_bot: bool,
    pub recipient: Recipient,
    pub report_id: String,
    pub reported_at: i64,
    /// Post ids included in the report, the denominators for partial removal.
    pub reported_posts: Vec<i64>,
    pub window_days: u32,
    pub checks: Vec<TrackingCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforcement_feedback: Option<EnforcementFeedback>,
}

impl TrackingRecord {
    pub fn new(
        entity_id: impl Into<String>,
        is_bot: bool,
        recipient: Recipient,
        report_id: impl Into<String>,
        reported_at: i64,
        reported_posts: Vec<i64>,
    ) -> Self {
        TrackingRecord {
            entity_id: entity_id.into(),
            is_bot,
            recipient,
            report_id: report_id.into(),
            reported_at,
            reported_posts,
            window_days: TRACKING_WINDOW_DAYS,
            checks: Vec::new(),
            enforcement_feedback: None,
        }
    }

    pub fn window_end(&self) -> i64 {
        self.reported_at + i64::from(self.window_days) * 86_400
    }

    pub fn latest(&self) -> Option<&TrackingCheck> {
        self.checks.last()
    }

    /// Gone is sticky, so any gone check means gone.
    pub fn is_gone(&self) -> bool {
        self.checks.iter().any(|c| c.status == EntityStatus::Gone)
    }

    pub fn latest_posts_removed(&self) -> usize {
        self.latest().map_or(0, |c| c.posts_removed)
    }
}

/// Seed tracking records from freshly built reports, one per distinct
/// (entity, recipient) pair. An entity reported twice to the same recipient
/// (e.g. in two daily batches) is merged: earliest report time, union of
/// reported posts.
pub fn tracking_records_for(reports: &[AbuseReport]) -> Vec<TrackingRecord> {
    let mut merged: BTreeMap<(String, Recipient), TrackingRecord> = BTreeMap::new();
    for r in reports {
        for c in &r.channels {
            let key = (c.channel.id.clone(), r.recipient.clone());
            let posts: Vec<i64> = c.posts.iter().map(|p| p.post_id).collect();
            match merged.get_mut(&key) {
                Some(rec) => {
                    if r.created_at < rec.reported_at {
                        rec.reported_at = r.created_at;
                        rec.report_id = r.report_id.clone();
                    }
                    rec.reported_posts.extend(posts);
                }
                None => {
                    merged.insert(
                        key,
                        TrackingRecord::new(
                            c.channel.id.clone(),
                            c.channel.is_bot,
                            r.recipient.clone(),
                            r.report_id.clone(),
                            r.created_at,
                            posts,
                        ),
                    );
                }
            }
        }
    }
    let mut out: Vec<TrackingRecord> = merged.into_values().collect();
    for rec in &mut out {
        rec.reported_posts.sort_unstable();
        rec.reported_posts.dedup();
    }
    out
}

/// Does this post body mark a moderated removal? The platform replaces the
/// body with a bracketed notice and strips links and attachments.
pub fn is_removal_marker(text: &str) -> bool {
    text.trim_start().starts_with("[removed:")
}

/// What one tracking pass did, for logging and tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrackOutcome {
    pub checks_added: usize,
    /// Entities whose probe fell outside [reported_at, reported_at + window].
    pub rejected_outside_window: Vec<String>,
    /// Entities skipped this pass because transport kept failing. No check is
    /// recorded for them; absence of data is not evidence of status.
    pub skipped_transport: Vec<String>,
}

/// Probe each tracked entity once at time `now` and append a check.
///
/// Gone statuses are sticky: once an entity has a gone check, later passes
/// append gone without re-probing. Probes outside the tracking window are
/// rejected. Transport exhaustion skips the entity for this pass.
pub fn track_with_sleeper<C: PlatformClient>(
    client: &C,
    records: &mut [TrackingRecord],
    now: i64,
    retry_attempts: usize,
    mut sleeper: impl FnMut(usize),
) -> TrackOutcome {
    let mut outcome = TrackOutcome::default();
    for rec in records.iter_mut() {
        let stale = rec.latest().is_some_and(|c| c.time > now);
        if now < rec.reported_at || now > rec.window_end() || stale {
            outcome.rejected_outside_window.push(rec.entity_id.clone());
            continue;
        }
        if rec.is_gone() {
            rec.checks.push(TrackingCheck {
                time: now,
                status: EntityStatus::Gone,
                posts_removed: rec.reported_posts.len(),
            });
            outcome.checks_added += 1;
            continue;
        }
        let meta = with_retries(retry_attempts, &mut sleeper, || client.channel_meta(&rec.entity_id));
        let check = match meta {
            Ok(_) => {
                let posts_removed = if rec.is_bot || rec.reported_posts.is_empty() {
                    // Bots have no public feed to sample.
                    0
                } else {
                    let feed = with_retries(retry_attempts, &mut sleeper, || {
                        client.fetch_posts(&rec.entity_id, TRACK_FETCH_LIMIT)
                    });
                    match feed {
                        Ok(posts) => {
                            let live: BTreeMap<i64, &PostRecord> =
                                posts.iter().map(|p| (p.post_id, p)).collect();
                            rec.reported_posts
                                .iter()
                                .filter(|pid| {
                                    live.get(pid).is_none_or(|p| is_removal_marker(&p.text))
                                })
                                .count()
                        }
                        Err(e) if e.is_retryable() => {
                            outcome.skipped_transport.push(rec.entity_id.clone());
                            continue;
                        }
                        // The channel vanished between the two calls.
                        Err(_) => rec.reported_posts.len(),
                    }
                };
                TrackingCheck { time: now, status: EntityStatus::Alive, posts_removed }
            }
            Err(PlatformError::ChannelGone(_)) | Err(PlatformError::UnknownEntity(_)) => {
                TrackingCheck {
                    time: now,
                    status: EntityStatus::Gone,
                    posts_removed: rec.reported_posts.len(),
                }
            }
            Err(_) => {
                outcome.skipped_transport.push(rec.entity_id.clone());
                continue;
            }
        };
        rec.checks.push(check);
        outcome.checks_added += 1;
    }
    outcome
}

/// `track_with_sleeper` with a linear real-time backoff.
pub fn track<C: PlatformClient>(
    client: &C,
    records: &mut [TrackingRecord],
    now: i64,
    retry_attempts: usize,
) -> TrackOutcome {
    track_with_sleeper(client, records, now, retry_attempts, |attempt| {
        std::thread::sleep(std::time::Duration::from_millis(500 * attempt as u64));
    })
}

// ---------------------------------------------------------------------------
// Outcome summary
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemovalRate {
    pub reported: usize,
    pub gone: usize,
    pub rate: f64,
}

impl RemovalRate {
    fn of(reported: usize, gone: usize) -> Self {
        let rate = if reported == 0 { 0.0 } else { gone as f64 / reported as f64 };
        RemovalRate { reported, gone, rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeSummary {
    pub aggregate: RemovalRate,
    pub by_recipient: BTreeMap<String, RemovalRate>,
    pub channels: RemovalRate,
    pub bots: RemovalRate,
    /// Median removed-post count over entities still alive at their last
    /// check (gone entities lose everything by definition).
    pub median_posts_removed: f64,
    /// Same median as a fraction of each entity's reported posts.
    pub median_removed_fraction: f64,
    /// Entities with at least one recorded check.
    pub checked: usize,
}

/// Aggregate enforcement outcomes. Entities reported to several recipients
/// count once in the aggregate and channel/bot splits (gone if any record
/// says gone) and once per recipient in the breakdown.
pub fn outcome_summary(records: &[TrackingRecord]) -> OutcomeSummary {
    // (is_bot, gone, alive posts_removed stats) per distinct entity.
    struct EntityAgg {
        is_bot: bool,
        gone: bool,
        checked: bool,
        posts_removed: usize,
        reported_posts: usize,
    }
    let mut entities: BTreeMap<&str, EntityAgg> = BTreeMap::new();
    for rec in records {
        let e = entities.entry(rec.entity_id.as_str()).or_insert(EntityAgg {
            is_bot: rec.is_bot,
            gone: false,
            checked: false,
            posts_removed: 0,
            reported_posts: 0,
        });
        e.gone |= rec.is_gone();
        e.checked |= !rec.checks.is_empty();
        e.posts_removed = e.posts_removed.max(rec.latest_posts_removed());
        e.reported_posts = e.reported_posts.max(rec.reported_posts.len());
    }

    let total = entities.len();
    let gone = entities.values().filter(|e| e.gone).count();
    let n_channels = entities.values().filter(|e| !e.is_bot).count();
    let gone_channels = entities.values().filter(|e| !e.is_bot && e.gone).count();
    let n_bots = total - n_channels;
    let gone_bots = gone - gone_channels;
    let checked = entities.values().filter(|e| e.checked).count();

    let mut by_recipient: BTreeMap<String, RemovalRate> = BTreeMap::new();
    let mut per_recipient: BTreeMap<String, BTreeMap<&str, bool>> = BTreeMap::new();
    for rec in records {
        let gone_entry = per_recipient
            .entry(rec.recipient.display_name().to_string())
            .or_default()
            .entry(rec.entity_id.as_str())
            .or_insert(false);
        *gone_entry |= rec.is_gone();
    }
    for (recipient, ents) in per_recipient {
        let gone = ents.values().filter(|g| **g).count();
        by_recipient.insert(recipient, RemovalRate::of(ents.len(), gone));
    }

    let mut removed_counts: Vec<f64> = Vec::new();
    let mut removed_fracs: Vec<f64> = Vec::new();
    for e in entities.values() {
        if e.gone || !e.checked || e.reported_posts == 0 {
            continue;
        }
        removed_counts.push(e.posts_removed as f64);
        removed_fracs.push(e.posts_removed as f64 / e.reported_posts as f64);
    }

    OutcomeSummary {
        aggregate: RemovalRate::of(total, gone),
        by_recipient,
        channels: RemovalRate::of(n_channels, gone_channels),
        bots: RemovalRate::of(n_bots, gone_bots),
        median_posts_removed: median(&mut removed_counts),
        median_removed_fraction: median(&mut removed_fracs),
        checked,
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN medians"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

// ---------------------------------------------------------------------------
// tracking.jsonl
// ---------------------------------------------------------------------------

/// Append one snapshot line per record to the append-only tracking log.
pub fn append_tracking(path: &Path, records: &[TrackingRecord]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    for rec in records {
        let line = serde_json::to_string(rec)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        writeln!(file, "{line}")?;
    }
    Ok(())
}

/// Read the tracking log back; the latest snapshot per (entity, recipient)
/// wins, output sorted by that key.
pub fn load_tracking(path: &Path) -> io::Result<Vec<TrackingRecord>> {
    let file = fs::File::open(path)?;
    let mut latest: BTreeMap<(String, String), TrackingRecord> = BTreeMap::new();
    for (lineno, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrackingRecord = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", lineno + 1))
        })?;
        latest.insert((rec.entity_id.clone(), rec.recipient.dir_name()), rec);
    }
    Ok(latest.into_values().collect())
}
