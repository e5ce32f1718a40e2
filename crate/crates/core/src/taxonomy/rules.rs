//! Deterministic rule-based reference classifier.
//!
//! Signals are keyword, host, and attachment patterns keyed to taxonomy
//! leaves. Detection requires at least one signal that is not purely
//! presentational; presentation markers alone count only next to a hard
//! distribution affordance (attachment or file-host/streaming/magnet link).

use crate::platform::{LinkKind, PostRecord};
use crate::taxonomy::labels::{AssignedLabel, Group, Leaf, PostVerdict};
use crate::text::tokenize;
use std::collections::BTreeSet;
use std::sync::OnceLock;
use thiserror::Error;

/// Detector said piracy but no categorization rule fired.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("no taxonomy rule matched post {channel_id}/{post_id}")]
pub struct NoLabelMatch {
    pub channel_id: String,
    pub post_id: i64,
}

/// Host signature lists, loadable from data files. Shipped defaults are
/// embedded at compile time.
#[derive(Debug, Clone)]
pub struct SignatureSet {
    cloud_hosts: Vec<String>,
    streaming_hosts: Vec<String>,
}

fn parse_host_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_ascii_lowercase())
        .collect()
}

impl SignatureSet {
    pub fn from_lists(cloud: &str, streaming: &str) -> Self {
        SignatureSet {
            cloud_hosts: parse_host_list(cloud),
            streaming_hosts: parse_host_list(streaming),
        }
    }

    pub fn from_files(
        cloud_path: &std::path::Path,
        streaming_path: &std::path::Path,
    ) -> std::io::Result<Self> {
        Ok(SignatureSet::from_lists(
            &std::fs::read_to_string(cloud_path)?,
            &std::fs::read_to_string(streaming_path)?,
        ))
    }

    /// Compiled-in default lists.
    pub fn builtin() -> &'static SignatureSet {
        static SET: OnceLock<SignatureSet> = OnceLock::new();
        SET.get_or_init(|| {
            SignatureSet::from_lists(
                include_str!("../../data/cloud_hosts.txt"),
                include_str!("../../data/streaming_hosts.txt"),
            )
        })
    }

    fn cloud_host(&self, host: &str) -> Option<&str> {
        host_in(host, &self.cloud_hosts)
    }

    fn streaming_host(&self, host: &str) -> Option<&str> {
        host_in(host, &self.streaming_hosts)
    }
}

fn host_in<'a>(host: &str, list: &'a [String]) -> Option<&'a str> {
    list.iter()
        .find(|entry| {
            host == entry.as_str()
                || (host.len() > entry.len()
                    && host.ends_with(entry.as_str())
                    && host.as_bytes()[host.len() - entry.len() - 1] == b'.')
        })
        .map(String::as_str)
}

/// Lowercased host portion of a URL, if it parses loosely.
pub fn url_host(url: &str) -> Option<String> {
    let rest = url
        .strip_prefix("https://")
        .or_else(|| url.strip_prefix("http://"))?;
    let end = rest.find(['/', '?', '#', ':']).unwrap_or(rest.len());
    let host = &rest[..end];
    if host.is_empty() {
        None
    } else {
        Some(host.to_ascii_lowercase())
    }
}

const QUALITY_TOKENS: &[&str] = &[
    "480p", "720p", "1080p", "2160p", "4k", "8k", "x264", "x265", "h264", "h265", "hevc",
    "webrip", "web-dl", "webdl", "bluray", "brrip", "hdrip", "camrip", "hdcam", "dvdrip",
    "10bit", "hdr10",
];

const MEDIA_EXTENSIONS: &[&str] =
    &["mkv", "mp4", "avi", "mov", "webm", "flv", "wmv", "m4v", "ts", "zip", "rar", "7z"];

/// True when `phrase` occurs in `text` on token boundaries. Multi-word
/// phrases use plain substring containment; single words additionally
/// require non-alphanumeric neighbors so "vpn" does not match "ovpna".
fn has_phrase(text_lc: &str, phrase: &str) -> bool {
    if phrase.contains(' ') {
        return text_lc.contains(phrase);
    }
    let bytes = text_lc.as_bytes();
    let mut from = 0;
    while let Some(pos) = text_lc[from..].find(phrase) {
        let start = from + pos;
        let end = start + phrase.len();
        let left_ok = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
        let right_ok = end == bytes.len() || !bytes[end].is_ascii_alphanumeric();
        if left_ok && right_ok {
            return true;
        }
        from = end;
    }
    false
}

fn first_phrase<'a>(text_lc: &str, phrases: &[&'a str]) -> Option<&'a str> {
    phrases.iter().copied().find(|p| has_phrase(text_lc, p))
}

fn contains_subsequence(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Rule-based classifier. Pure and thread-safe; all state is immutable
/// after construction.
#[derive(Debug, Clone)]
pub struct RuleClassifier {
    sigs: SignatureSet,
    /// Tokenized known titles; used only for the title+quality signal.
    titles: Vec<Vec<String>>,
    /// Group priority ranks, lower wins. Overridable.
    priority: [usize; 8],
}

impl Default for RuleClassifier {
    fn default() -> Self {
        RuleClassifier::new(SignatureSet::builtin().clone())
    }
}

struct PostFeatures {
    text_lc: String,
    tokens: Vec<String>,
    hosts: Vec<String>,
    has_magnet: bool,
    has_torrent_file: bool,
    channel_links: usize,
    bot_links: usize,
    media_attachment: Option<String>,
}

impl PostFeatures {
    fn extract(post: &PostRecord) -> Self {
        let text_lc = post.text.to_lowercase();
        let mut hosts = Vec::new();
        let mut has_magnet = text_lc.contains("magnet:?xt=");
        let mut has_torrent_file = false;
        let mut scan_url = |url: &str| {
            if url.starts_with("magnet:") {
                has_magnet = true;
                return;
            }
            if let Some(host) = url_host(url) {
                let path = &url[url.find(&host).map(|i| i + host.len()).unwrap_or(url.len())..];
                if path.split(['?', '#']).next().unwrap_or("").ends_with(".torrent") {
                    has_torrent_file = true;
                }
                hosts.push(host);
            }
        };
        for url in &post.external_links {
            scan_url(url);
        }
        // URLs from raw text, for records without structured link lists.
        for piece in post.text.split_whitespace() {
            if piece.starts_with("http://") || piece.starts_with("https://") {
                scan_url(piece.trim_end_matches([',', ';', ')', ']', '.']));
            }
        }
        hosts.sort();
        hosts.dedup();
        let channel_links = post
            .internal_links
            .iter()
            .filter(|l| l.kind == LinkKind::Channel)
            .count();
        let bot_links = post.internal_links.iter().filter(|l| l.kind == LinkKind::Bot).count();
        let media_attachment = post.attachment.as_ref().and_then(|a| {
            let name_lc = a.file_name.to_lowercase();
            let ext = name_lc.rsplit('.').next().unwrap_or("");
            MEDIA_EXTENSIONS.contains(&ext).then(|| a.file_name.clone())
        });
        PostFeatures {
            tokens: tokenize(&text_lc),
            text_lc,
            hosts,
            has_magnet,
            has_torrent_file,
            channel_links,
            bot_links,
            media_attachment,
        }
    }

    fn internal_links(&self) -> usize {
        self.channel_links + self.bot_links
    }
}

const ROUTING_AFFORDANCE: &[&str] = &[
    "download", "get the file", "get file", "full movie", "watch here", "available at",
    "grab it", "use our bot", "send the movie name", "file channel", "files channel",
];
const DEDICATED: &[&str] = &[
    "dedicated to", "this channel is dedicated", "episode archive", "all episodes in one place",
    "only here",
];
const DIRECTORY: &[&str] = &["directory", "index of", "channel list", "full catalog", "browse all"];
const BACKUP: &[&str] = &[
    "backup channel", "backup:", "reserve channel", "in case this channel", "gets banned",
    "if this channel",
];
const INTERMEDIARY: &[&str] =
    &["portal", "gateway", "redirect", "go through", "shortlink", "short link"];
const VPN: &[&str] = &["vpn", "proxy", "mirror site", "mirror link", "unblock"];
const MODDED: &[&str] = &["mod apk", "modded", "cracked", "premium unlocked", "patched version"];
const CREDENTIALS: &[&str] =
    &["user:pass", "login", "password", "accounts", "shared account", "cookies"];
const HOWTO: &[&str] = &["how to", "tutorial", "guide", "step by step"];
const ACCESS_VERB: &[&str] = &["download", "watch", "access", "unblock", "install", "stream"];
const BOT_DELIVERY: &[&str] =
    &["here is your file", "your requested file", "file is ready", "delivering your"];
const BOT_RETRIEVAL: &[&str] = &[
    "send me the name", "send the title", "type a movie name", "search any movie", "type the name",
];
const BOT_PROMOTION: &[&str] =
    &["promote your channel", "get listed", "add your channel", "promotion slot", "cross promo"];
const BOT_INGESTION: &[&str] =
    &["forward me files", "submit your files", "upload to this bot", "send me files"];
const REQUEST: &[&str] = &[
    "requests are open", "request here", "comment the movie", "vote for",
    "what should we upload", "taking requests",
];
const REFERRAL: &[&str] = &[
    "also join", "join our", "check out", "our friends", "partner channel", "our other channel",
    "more channels",
];
const FORCED_JOIN: &[&str] =
    &["must join", "join these channels", "join all channels", "to unlock", "unlock the"];
const CREDIT: &[&str] = &[
    "buy credits", "top up", "purchase credits", "credit balance", "buy coins", "coin balance",
];
const PREMIUM: &[&str] = &[
    "premium plan", "premium tier", "premium membership", "vip plan", "vip membership",
    "upgrade to vip", "premium channel access",
];
const INCENTIVE: &[&str] = &[
    "earn credits", "upload and earn", "rewards for uploading", "invite friends and earn",
    "earn points", "earn coins",
];
const BUNDLE: &[&str] = &[
    "complete season", "complete series", "full season", "all episodes", "all seasons",
    "box set", "bundle", "batch", "collection of", "all parts",
];
const SUBS: &[&str] = &[
    "subtitles", "subbed", "dubbed", "dual audio", "esub", "eng sub", "multi audio", "hindi dub",
    "with subs",
];

impl RuleClassifier {
    pub fn new(sigs: SignatureSet) -> Self {
        let mut priority = [0usize; 8];
        for g in Group::ALL {
            priority[g as usize] = g.default_priority();
        }
        RuleClassifier { sigs, titles: Vec::new(), priority }
    }

    /// Known titles enable the title+quality presentation signal.
    pub fn with_titles<I, S>(mut self, titles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.titles = titles
            .into_iter()
            .map(|t| tokenize(t.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        self
    }

    /// Override the primary-label priority order (full permutation of all
    /// eight groups, highest priority first).
    pub fn with_priority(mut self, order: &[Group]) -> Self {
        assert_eq!(order.len(), 8, "priority order must list all groups");
        for (rank, g) in order.iter().enumerate() {
            self.priority[*g as usize] = rank;
        }
        self
    }

    fn rank(&self, leaf: Leaf) -> (usize, usize) {
        (self.priority[leaf.group() as usize], leaf.index_in_group())
    }

    fn title_mentioned(&self, tokens: &[String]) -> bool {
        self.titles.iter().any(|t| contains_subsequence(tokens, t))
    }

    /// All signals firing on a post, deduplicated by leaf and ordered by
    /// priority. `author_is_bot` admits the bot-category rules.
    pub fn signals(&self, post: &PostRecord, author_is_bot: bool) -> Vec<AssignedLabel> {
        let f = PostFeatures::extract(post);
        let t = f.text_lc.as_str();
        let mut out: Vec<AssignedLabel> = Vec::new();
        let mut push = |leaf: Leaf, why: String| out.push(AssignedLabel::new(leaf, why));

        if let Some(name) = &f.media_attachment {
            push(Leaf::DirectDownload, format!("media attachment '{name}'"));
        }
        if f.internal_links() > 0 {
            if let Some(kw) = first_phrase(t, ROUTING_AFFORDANCE) {
                push(
                    Leaf::ChannelBotRouting,
                    format!("in-platform link with affordance '{kw}'"),
                );
            }
        }
        for host in &f.hosts {
            if let Some(entry) = self.sigs.cloud_host(host) {
                push(Leaf::CloudStorage, format!("file-host link '{entry}'"));
                break;
            }
        }
        let streaming_host = f.hosts.iter().find_map(|h| self.sigs.streaming_host(h));
        if let Some(entry) = streaming_host {
            push(Leaf::StreamingMagnet, format!("streaming-host link '{entry}'"));
        } else if f.has_magnet {
            push(Leaf::StreamingMagnet, "magnet link".to_string());
        } else if f.has_torrent_file {
            push(Leaf::StreamingMagnet, "torrent file link".to_string());
        }
        if let Some(kw) = first_phrase(t, DEDICATED) {
            push(Leaf::DedicatedContentChannel, format!("keyword '{kw}'"));
        }
        if f.channel_links >= 1 {
            if let Some(kw) = first_phrase(t, DIRECTORY) {
                push(Leaf::DirectoryIndexChannel, format!("keyword '{kw}' with channel links"));
            }
        }
        if let Some(kw) = first_phrase(t, BACKUP) {
            push(Leaf::BackupChannel, format!("keyword '{kw}'"));
        }
        if f.internal_links() > 0 {
            if let Some(kw) = first_phrase(t, INTERMEDIARY) {
                push(Leaf::IntermediaryRouting, format!("keyword '{kw}' with in-platform link"));
            }
        }
        if let Some(kw) = first_phrase(t, VPN) {
            push(Leaf::VpnProxyMirror, format!("keyword '{kw}'"));
        }
        if let Some(kw) = first_phrase(t, MODDED) {
            push(Leaf::ModdedApp, format!("keyword '{kw}'"));
        }
        if let Some(kw) = first_phrase(t, CREDENTIALS) {
            push(Leaf::StreamingCredentials, format!("keyword '{kw}'"));
        }
        if let (Some(h), Some(v)) = (first_phrase(t, HOWTO), first_phrase(t, ACCESS_VERB)) {
            push(Leaf::AccessTutorial, format!("keywords '{h}' + '{v}'"));
        }
        if author_is_bot {
            if let Some(kw) = first_phrase(t, BOT_DELIVERY) {
                push(Leaf::ContentDelivery, format!("keyword '{kw}'"));
            }
            if let Some(kw) = first_phrase(t, BOT_RETRIEVAL) {
                push(Leaf::DynamicRetrieval, format!("keyword '{kw}'"));
            }
            if let Some(kw) = first_phrase(t, BOT_PROMOTION) {
                push(Leaf::ChannelPromotion, format!("keyword '{kw}'"));
            }
            if let Some(kw) = first_phrase(t, BOT_INGESTION) {
                push(Leaf::ContentIngestion, format!("keyword '{kw}'"));
            }
        }
        if let Some(kw) = first_phrase(t, REQUEST) {
            push(Leaf::ContentRequest, format!("keyword '{kw}'"));
        }
        if f.internal_links() > 0 {
            if let Some(kw) = first_phrase(t, REFERRAL) {
                push(Leaf::ChannelReferral, format!("keyword '{kw}' with in-platform link"));
            }
        }
        if f.internal_links() > 0 {
            if let Some(kw) = first_phrase(t, FORCED_JOIN) {
                push(Leaf::ForcedJoin, format!("keyword '{kw}' with in-platform link"));
            }
        }
        if let Some(kw) = first_phrase(t, CREDIT) {
            push(Leaf::CreditPurchase, format!("keyword '{kw}'"));
        }
        if let Some(kw) = first_phrase(t, PREMIUM) {
            push(Leaf::PremiumTier, format!("keyword '{kw}'"));
        }
        if let Some(kw) = first_phrase(t, INCENTIVE) {
            push(Leaf::IncentivizedUpload, format!("keyword '{kw}'"));
        }
        if let Some(tok) = first_phrase(t, QUALITY_TOKENS) {
            push(Leaf::ResolutionEncoding, format!("quality marker '{tok}'"));
        } else if self.title_mentioned(&f.tokens)
            && (f.media_attachment.is_some() || !f.hosts.is_empty())
        {
            push(Leaf::ResolutionEncoding, "known title with access context".to_string());
        }
        if let Some(kw) = first_phrase(t, BUNDLE) {
            push(Leaf::BundledCollection, format!("keyword '{kw}'"));
        }
        if let Some(kw) = first_phrase(t, SUBS) {
            push(Leaf::SubtitlesDubs, format!("keyword '{kw}'"));
        }

        let mut seen = BTreeSet::new();
        out.retain(|l| seen.insert(l.leaf));
        out.sort_by_key(|l| self.rank(l.leaf));
        out
    }

    fn detect_inner(&self, post: &PostRecord, author_is_bot: bool) -> bool {
        let signals = self.signals(post, author_is_bot);
        if signals.is_empty() {
            return false;
        }
        let presentation_only = signals
            .iter()
            .all(|l| l.group == Group::PresentationAccessibility);
        if !presentation_only {
            return true;
        }
        // Presentation markers alone need a hard affordance to count.
        let f = PostFeatures::extract(post);
        f.media_attachment.is_some()
            || f.has_magnet
            || f.has_torrent_file
            || f.hosts
                .iter()
                .any(|h| self.sigs.cloud_host(h).is_some() || self.sigs.streaming_host(h).is_some())
    }

    pub fn detect(&self, post: &PostRecord) -> bool {
        self.detect_inner(post, false)
    }

    pub fn categorize(&self, post: &PostRecord) -> Result<PostVerdict, NoLabelMatch> {
        self.categorize_with(post, false)
    }

    /// Categorize with explicit author kind; bot-category leaves only fire
    /// for bot-authored posts.
    pub fn categorize_with(
        &self,
        post: &PostRecord,
        author_is_bot: bool,
    ) -> Result<PostVerdict, NoLabelMatch> {
        if !self.detect_inner(post, author_is_bot) {
            return Err(NoLabelMatch {
                channel_id: post.channel_id.clone(),
                post_id: post.post_id,
            });
        }
        let mut labels = self.signals(post, author_is_bot);
        labels.truncate(3);
        Ok(PostVerdict {
            channel_id: post.channel_id.clone(),
            post_id: post.post_id,
            is_piracy: true,
            labels,
        })
    }

    /// Two-stage driver: detect, then categorize only on positives. A
    /// detector/categorizer disagreement is reported as piracy without
    /// labels rather than dropped.
    pub fn classify(&self, post: &PostRecord, author_is_bot: bool) -> PostVerdict {
        if !self.detect_inner(post, author_is_bot) {
            return PostVerdict::benign(post.channel_id.clone(), post.post_id);
        }
        match self.categorize_with(post, author_is_bot) {
            Ok(v) => v,
            Err(_) => PostVerdict {
                channel_id: post.channel_id.clone(),
                post_id: post.post_id,
                is_piracy: true,
                labels: Vec::new(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::{Attachment, InternalLink};

    fn post(text: &str) -> PostRecord {
        PostRecord::new("ch0001", 1, 1_000, text)
    }

    #[test]
    fn attachment_with_title_is_direct_download() {
        let mut p = post("Crimson Harbor (2022) 1080p ready. enjoy");
        p.attachment = Some(Attachment {
            file_name: "Crimson.Harbor.2022.1080p.mkv".into(),
            file_size_bytes: 2_000_000_000,
        });
        let c = RuleClassifier::default();
        assert!(c.detect(&p));
        let v = c.categorize(&p).unwrap();
        assert_eq!(v.primary(), Some(Leaf::DirectDownload));
        assert!(v.labels.iter().any(|l| l.leaf == Leaf::ResolutionEncoding));
    }

    #[test]
    fn terabox_link_with_quality_tokens() {
        let mut p = post("Silent Meridian full pack 720p and 1080p");
        p.external_links.push("https://terabox.com/s/abc123".into());
        let v = RuleClassifier::default().categorize(&p).unwrap();
        let leaves: Vec<Leaf> = v.labels.iter().map(|l| l.leaf).collect();
        assert_eq!(leaves, vec![Leaf::CloudStorage, Leaf::ResolutionEncoding]);
    }

    #[test]
    fn backup_post_gets_backup_plus_referral() {
        let mut p = post("join our backup channel t.me/films_backup2 in case this channel gets banned");
        p.internal_links.push(InternalLink::channel("films_backup2"));
        let v = RuleClassifier::default().categorize(&p).unwrap();
        let leaves: Vec<Leaf> = v.labels.iter().map(|l| l.leaf).collect();
        assert_eq!(leaves, vec![Leaf::BackupChannel, Leaf::ChannelReferral]);
    }

    #[test]
    fn empty_post_not_detected() {
        assert!(!RuleClassifier::default().detect(&post("")));
    }

    #[test]
    fn benign_news_with_title_not_detected() {
        let c = RuleClassifier::default().with_titles(["Crimson Harbor"]);
        let p = post("Crimson Harbor wins the festival grand prize, cast interview tonight");
        assert!(!c.detect(&p));
    }

    #[test]
    fn quality_token_alone_not_detected() {
        let p = post("the restoration team remastered everything in 4k last year");
        assert!(!RuleClassifier::default().detect(&p));
    }

    #[test]
    fn quality_plus_cloud_link_detected_without_keywords() {
        let mut p = post("2160p");
        p.external_links.push("https://mega.nz/file/xyz".into());
        let c = RuleClassifier::default();
        assert!(c.detect(&p));
    }

    #[test]
    fn known_title_with_file_host_counts_as_presentation_signal() {
        let c = RuleClassifier::default().with_titles(["Silent Meridian"]);
        let mut p = post("Silent Meridian is up");
        p.external_links.push("https://gofile.io/d/abc".into());
        let v = c.categorize(&p).unwrap();
        assert_eq!(v.primary(), Some(Leaf::CloudStorage));
        assert!(v.labels.iter().any(|l| l.leaf == Leaf::ResolutionEncoding));
    }

    #[test]
    fn categorize_on_benign_post_is_no_label_match() {
        let err = RuleClassifier::default().categorize(&post("nice weather")).unwrap_err();
        assert_eq!(err.post_id, 1);
    }

    #[test]
    fn bot_rules_need_bot_author() {
        let c = RuleClassifier::default();
        let p = post("here is your file, fresh from the vault");
        assert!(!c.detect(&p), "channel-authored post must not fire bot rules");
        let v = c.categorize_with(&p, true).unwrap();
        assert_eq!(v.primary(), Some(Leaf::ContentDelivery));
    }

    #[test]
    fn priority_picks_internal_distribution_first() {
        let mut p = post("download Crimson Harbor from our file channel, also join our partner channel");
        p.internal_links.push(InternalLink::channel("main_vault"));
        p.internal_links.push(InternalLink::channel("partner_ch"));
        let v = RuleClassifier::default().categorize(&p).unwrap();
        assert_eq!(v.primary(), Some(Leaf::ChannelBotRouting));
        assert!(v.labels.len() <= 3);
        let mut leaves: Vec<Leaf> = v.labels.iter().map(|l| l.leaf).collect();
        leaves.dedup();
        assert_eq!(leaves.len(), v.labels.len(), "labels must be distinct");
    }

    #[test]
    fn priority_override_reorders_primary() {
        let mut p = post("download it here, also join our partner channel");
        p.internal_links.push(InternalLink::channel("x"));
        let flipped = RuleClassifier::default().with_priority(&[
            Group::CommunityGrowth,
            Group::InternalDistribution,
            Group::ExternalDistribution,
            Group::ResilienceStrategies,
            Group::FacilitatingAccess,
            Group::BotCategories,
            Group::Monetization,
            Group::PresentationAccessibility,
        ]);
        let v = flipped.categorize(&p).unwrap();
        assert_eq!(v.primary(), Some(Leaf::ChannelReferral));
    }

    #[test]
    fn magnet_and_torrent_links_fire_streaming_magnet() {
        let p = post("magnet:?xt=urn:btih:deadbeef full rip");
        let v = RuleClassifier::default().categorize(&p).unwrap();
        assert_eq!(v.primary(), Some(Leaf::StreamingMagnet));

        let mut p2 = post("grab the torrent");
        p2.external_links.push("https://files.example.net/rips/pack.torrent".into());
        let v2 = RuleClassifier::default().categorize(&p2).unwrap();
        assert_eq!(v2.primary(), Some(Leaf::StreamingMagnet));
    }

    #[test]
    fn subdomain_matches_host_list() {
        let mut p = post("mirror");
        p.external_links.push("https://dl.mega.nz/file/1".into());
        assert!(RuleClassifier::default().detect(&p));
        let mut p2 = post("plain");
        p2.external_links.push("https://notmega.nz/file/1".into());
        assert!(!RuleClassifier::default().detect(&p2));
    }

    #[test]
    fn classify_driver_returns_benign_verdict() {
        let v = RuleClassifier::default().classify(&post("hello"), false);
        assert!(!v.is_piracy);
        assert!(v.labels.is_empty());
    }
}
