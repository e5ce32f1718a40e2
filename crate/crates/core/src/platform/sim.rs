//! Deterministic synthetic-ecosystem simulator.
//!
//! `generate` builds a full platform state from an `EcosystemSpec`: channels
//! and bots with handles, layered promotion links, post feeds rendered from
//! behavior templates, and exported ground truth (entity roles, per-post
//! labels, embedded titles) for oracle comparison. Everything is drawn from
//! one seeded stream, so equal specs yield byte-identical states.
//!
//! Entities are wired in layers: emerging discoverable channels form the
//! crawl seeds (layer 0), each deeper layer is covered by a link from the
//! layer above, and layer 3 exists only to sit beyond the depth-2 crawl
//! horizon. Every planted link is embedded in the newest ten posts of its
//! source channel so a ten-post probe sees the full topology.

use crate::catalog::TitleKind;
use crate::handles::handle_ok;
use crate::platform::{
    Attachment, ChannelRecord, InternalLink, LinkKind, PlatformClient, PlatformError, PostRecord,
};
use crate::taxonomy::labels::{AssignedLabel, Leaf, PostVerdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;
use thiserror::Error;

/// Text of a post whose content was removed after an abuse report.
pub const TAKEDOWN_MARKER: &str = "[removed: copyright notice]";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid ecosystem spec: {0}")]
pub struct InvalidSpec(pub String);

/// A plantable title with rights metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TitleSpec {
    pub title: String,
    pub year: u16,
    pub kind: TitleKind,
    pub company: String,
    pub country: String,
}

/// Planted role counts. The super channel's out-degree is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolePlan {
    pub n_super: usize,
    pub super_out_degree: usize,
    pub n_terminal: usize,
}

impl Default for RolePlan {
    fn default() -> Self {
        RolePlan { n_super: 1, super_out_degree: 20, n_terminal: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EcosystemSpec {
    pub seed: u64,
    pub n_channels: usize,
    pub n_bots: usize,
    /// Reference wall clock, unix seconds.
    pub now: i64,
    /// Recency window used to age seed channels.
    pub window_days: u32,
    pub role_plan: RolePlan,
    /// Probability that a non-link post is benign.
    pub benign_fraction: f64,
    /// Probability that a filler link points at an unregistered handle.
    pub dangling_link_rate: f64,
    /// Channels whose outgoing links are exclusively private invites.
    pub invite_only_channels: usize,
    /// Fraction of channels whose handles are synthesizable from `lexicon`.
    pub discoverable_fraction: f64,
    /// Fraction of discoverable channels young enough to pass the gate.
    pub emerging_fraction: f64,
    pub posts_min: usize,
    pub posts_max: usize,
    pub lexicon: Vec<String>,
    pub languages: Vec<String>,
    pub title_pool: Vec<TitleSpec>,
}

impl Default for EcosystemSpec {
    fn default() -> Self {
        EcosystemSpec {
            seed: 42,
            n_channels: 30,
            n_bots: 5,
            now: 1_767_225_600, // 2026-01-01T00:00:00Z
            window_days: 7,
            role_plan: RolePlan::default(),
            benign_fraction: 0.3,
            dangling_link_rate: 0.15,
            invite_only_channels: 0,
            discoverable_fraction: 0.4,
            emerging_fraction: 0.8,
            posts_min: 12,
            posts_max: 30,
            lexicon: default_lexicon(),
            languages: default_languages(),
            title_pool: default_title_pool(),
        }
    }
}

pub fn default_lexicon() -> Vec<String> {
    ["movies", "films", "cinema", "series", "hd", "4k", "rip", "latest", "hub", "vault",
     "zone", "archive"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn default_languages() -> Vec<String> {
    ["en", "fa", "hi", "es", "pt", "ru", "ar", "ko"].iter().map(|s| s.to_string()).collect()
}

/// Curated fixture titles, minus the same-name disambiguation pair.
pub fn default_title_pool() -> Vec<TitleSpec> {
    crate::catalog::fixture::CURATED
        .iter()
        .map(|&(title, year, kind, company, country)| TitleSpec {
            title: title.to_string(),
            year,
            kind,
            company: company.to_string(),
            country: country.to_string(),
        })
        .collect()
}

/// Planted roles recorded in truth (derived roles are left implicit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedRole {
    Super,
    Terminal,
}

/// One planted outgoing link. `target_id` is None for dangling and invite
/// targets, which by design never resolve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedLink {
    pub kind: LinkKind,
    pub target_handle: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTruth {
    pub id: String,
    pub handle: String,
    pub is_bot: bool,
    pub discoverable: bool,
    pub emerging: bool,
    /// Intended minimum crawl depth (0 = seed; 3 = beyond the horizon).
    pub layer: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_role: Option<PlantedRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_category: Option<Leaf>,
    pub invite_only: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub out_links: Vec<PlantedLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostTruth {
    pub channel_id: String,
    pub post_id: i64,
    pub is_piracy: bool,
    /// Primary-first planted labels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<Leaf>,
    /// Titles embedded verbatim in the post text.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub titles: Vec<String>,
}

impl PostTruth {
    /// Truth as a verdict row for the evaluator.
    pub fn as_verdict(&self) -> PostVerdict {
        PostVerdict {
            channel_id: self.channel_id.clone(),
            post_id: self.post_id,
            is_piracy: self.is_piracy,
            labels: self
                .labels
                .iter()
                .map(|&l| AssignedLabel::new(l, "planted"))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TruthRecord {
    Entity(EntityTruth),
    Post(PostTruth),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EcosystemTruth {
    pub entities: Vec<EntityTruth>,
    pub posts: Vec<PostTruth>,
}

impl EcosystemTruth {
    pub fn entity(&self, id: &str) -> Option<&EntityTruth> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn post(&self, channel_id: &str, post_id: i64) -> Option<&PostTruth> {
        self.posts.iter().find(|p| p.channel_id == channel_id && p.post_id == post_id)
    }
}

struct Entity {
    record: ChannelRecord,
    /// Newest first.
    posts: Vec<PostRecord>,
    gone: bool,
}

struct SimState {
    by_id: BTreeMap<String, Entity>,
    by_handle: BTreeMap<String, String>,
    rate_limit_every: Option<u64>,
    calls: u64,
    fetches: BTreeMap<String, u64>,
}

/// In-process platform implementation with scripted-takedown hooks.
pub struct Simulator {
    state: Mutex<SimState>,
    truth: EcosystemTruth,
}

// ---------------------------------------------------------------------------
// Behavior templates. Text wording is keyed to the rule engine's signature
// lists; each template's label set is exactly the set of rules its wording
// trips, primary first.

struct Rendered {
    text: String,
    labels: Vec<Leaf>,
    titles: Vec<String>,
    attachment: Option<Attachment>,
    external_links: Vec<String>,
}

impl Rendered {
    fn plain(text: String, labels: Vec<Leaf>) -> Self {
        Rendered { text, labels, titles: Vec::new(), attachment: None, external_links: Vec::new() }
    }
}

const CLOUD_HOSTS: &[&str] =
    &["mega.nz", "terabox.com", "gofile.io", "mediafire.com", "pixeldrain.com"];
const STREAM_HOSTS: &[&str] = &["streamtape.com", "dood.watch", "mixdrop.co", "filemoon.sx"];
const QUALITIES: &[&str] = &["480p", "720p", "1080p", "2160p"];
const APP_NAMES: &[&str] = &["StreamBox", "VidPlay Pro", "CineCast"];

fn rand_code(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    (0..len).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ContentTemplate {
    Direct,
    DirectBundle,
    DirectSubs,
    Cloud,
    CloudSubs,
    Streaming,
    Magnet,
    Dedicated,
    Vpn,
    Modded,
    Credentials,
    Tutorial,
    Request,
    Credit,
    Premium,
    Incentive,
}

fn render_content(rng: &mut ChaCha8Rng, t: ContentTemplate, titles: &[TitleSpec]) -> Rendered {
    use ContentTemplate::*;
    let title = pick(rng, titles).clone();
    let q = *pick(rng, QUALITIES);
    match t {
        Direct | DirectBundle | DirectSubs => {
            let (extra, labels) = match t {
                DirectBundle => (
                    " complete season inside",
                    vec![Leaf::DirectDownload, Leaf::ResolutionEncoding, Leaf::BundledCollection],
                ),
                DirectSubs => (
                    " dual audio esub",
                    vec![Leaf::DirectDownload, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs],
                ),
                _ => ("", vec![Leaf::DirectDownload, Leaf::ResolutionEncoding]),
            };
            let ext = if t == DirectBundle { "zip" } else { "mkv" };
            let file = format!(
                "{}.{}.{}.{}",
                title.title.replace(' ', "."),
                title.year,
                q,
                ext
            );
            Rendered {
                text: format!("{} ({}) {}{} ready below, enjoy", title.title, title.year, q, extra),
                labels,
                titles: vec![title.title.clone()],
                attachment: Some(Attachment {
                    file_name: file,
                    file_size_bytes: rng.random_range(200_000_000..=2_000_000_000),
                }),
                external_links: Vec::new(),
            }
        }
        Cloud | CloudSubs => {
            let host = *pick(rng, CLOUD_HOSTS);
            let url = format!("https://{}/f/{}", host, rand_code(rng, 8));
            let (extra, labels) = if t == CloudSubs {
                (
                    " with subs",
                    vec![Leaf::CloudStorage, Leaf::ResolutionEncoding, Leaf::SubtitlesDubs],
                )
            } else {
                ("", vec![Leaf::CloudStorage, Leaf::ResolutionEncoding])
            };
            Rendered {
                text: format!("{} {}{} uploaded: {}", title.title, q, extra, url),
                labels,
                titles: vec![title.title.clone()],
                attachment: None,
                external_links: vec![url],
            }
        }
        Streaming => {
            let host = *pick(rng, STREAM_HOSTS);
            let url = format!("https://{}/v/{}", host, rand_code(rng, 8));
            Rendered {
                text: format!("watch {} online free in {}: {}", title.title, q, url),
                labels: vec![Leaf::StreamingMagnet, Leaf::ResolutionEncoding],
                titles: vec![title.title.clone()],
                attachment: None,
                external_links: vec![url],
            }
        }
        Magnet => {
            let hex: String = (0..16)
                .map(|_| char::from_digit(rng.random_range(0..16) as u32, 16).unwrap())
                .collect();
            Rendered {
                text: format!("magnet:?xt=urn:btih:{} {} {} rip", hex, title.title, q),
                labels: vec![Leaf::StreamingMagnet, Leaf::ResolutionEncoding],
                titles: vec![title.title.clone()],
                attachment: None,
                external_links: Vec::new(),
            }
        }
        Dedicated => Rendered {
            text: format!(
                "this channel is dedicated to {}, all episodes in one place",
                title.title
            ),
            labels: vec![Leaf::DedicatedContentChannel, Leaf::BundledCollection],
            titles: vec![title.title.clone()],
            attachment: None,
            external_links: Vec::new(),
        },
        Vpn => {
            let url = format!("https://mirror{}.unblockzone.net", rng.random_range(1..9));
            Rendered {
                text: format!("region blocked? use a vpn or our mirror site {}", url),
                labels: vec![Leaf::VpnProxyMirror],
                titles: Vec::new(),
                attachment: None,
                external_links: vec![url],
            }
        }
        Modded => {
            let app = *pick(rng, APP_NAMES);
            Rendered {
                text: format!("{} mod apk, premium unlocked, installer attached", app),
                labels: vec![Leaf::ModdedApp],
                titles: Vec::new(),
                attachment: Some(Attachment {
                    file_name: format!("{}.apk", app.replace(' ', "_")),
                    file_size_bytes: rng.random_range(10_000_000..=80_000_000),
                }),
                external_links: Vec::new(),
            }
        }
        Credentials => Rendered::plain(
            "fresh streaming accounts inside, user:pass format, grab fast".into(),
            vec![Leaf::StreamingCredentials],
        ),
        Tutorial => Rendered::plain(
            "tutorial: how to download from our cloud links, step by step".into(),
            vec![Leaf::AccessTutorial],
        ),
        Request => Rendered::plain(
            "requests are open, comment the movie you want next".into(),
            vec![Leaf::ContentRequest],
        ),
        Credit => Rendered::plain(
            "each file costs two credits, top up your credit balance first".into(),
            vec![Leaf::CreditPurchase],
        ),
        Premium => Rendered::plain(
            "upgrade to vip plan for early uploads and no ads".into(),
            vec![Leaf::PremiumTier],
        ),
        Incentive => Rendered::plain(
            "upload your rips and earn credits, rewards for uploading weekly".into(),
            vec![Leaf::IncentivizedUpload],
        ),
    }
}

const ARCHETYPES: &[&[ContentTemplate]] = &[
    // distribution-heavy
    &[
        ContentTemplate::Direct,
        ContentTemplate::DirectBundle,
        ContentTemplate::DirectSubs,
        ContentTemplate::Cloud,
        ContentTemplate::CloudSubs,
        ContentTemplate::Streaming,
        ContentTemplate::Magnet,
        ContentTemplate::Request,
    ],
    // dedicated archive
    &[
        ContentTemplate::Dedicated,
        ContentTemplate::Direct,
        ContentTemplate::Cloud,
        ContentTemplate::Streaming,
    ],
    // access facilitation
    &[
        ContentTemplate::Vpn,
        ContentTemplate::Modded,
        ContentTemplate::Credentials,
        ContentTemplate::Tutorial,
    ],
    // monetized
    &[
        ContentTemplate::Credit,
        ContentTemplate::Premium,
        ContentTemplate::Incentive,
        ContentTemplate::Direct,
    ],
    // community-driven
    &[ContentTemplate::Request, ContentTemplate::Cloud, ContentTemplate::Direct],
];

const ARCHETYPE_WEIGHTS: &[u32] = &[55, 15, 10, 12, 8];

fn pick_archetype(rng: &mut ChaCha8Rng) -> usize {
    let total: u32 = ARCHETYPE_WEIGHTS.iter().sum();
    let mut roll = rng.random_range(0..total);
    for (i, w) in ARCHETYPE_WEIGHTS.iter().enumerate() {
        if roll < *w {
            return i;
        }
        roll -= w;
    }
    0
}

fn link_url(link: &InternalLink) -> String {
    match link.kind {
        LinkKind::Invite => format!("https://t.me/+{}", link.target),
        _ => format!("https://t.me/{}", link.target),
    }
}

/// Render a link-bearing post. The template is chosen from those compatible
/// with the batch: invite batches always announce a private backup.
fn render_link_post(
    rng: &mut ChaCha8Rng,
    links: &[InternalLink],
    titles: &[TitleSpec],
) -> Rendered {
    let urls: Vec<String> = links.iter().map(link_url).collect();
    let urls_joined = urls.join(" ");
    if links.iter().all(|l| l.kind == LinkKind::Invite) {
        return Rendered {
            text: format!(
                "backup channel invite, in case this channel gets banned: {}",
                urls_joined
            ),
            labels: vec![Leaf::BackupChannel],
            titles: Vec::new(),
            attachment: None,
            external_links: Vec::new(),
        };
    }
    let has_channel = links.iter().any(|l| l.kind == LinkKind::Channel);
    let mut choices: Vec<u8> = vec![0, 1, 4, 5];
    if has_channel {
        choices.push(2);
        if links.len() >= 2 {
            choices.push(3);
        }
    }
    let choice = *pick(rng, &choices);
    match choice {
        0 => {
            let title = pick(rng, titles).clone();
            let q = *pick(rng, QUALITIES);
            Rendered {
                text: format!(
                    "download {} {} from our file channel: {}",
                    title.title, q, urls_joined
                ),
                labels: vec![Leaf::ChannelBotRouting, Leaf::ResolutionEncoding],
                titles: vec![title.title.clone()],
                attachment: None,
                external_links: Vec::new(),
            }
        }
        1 => Rendered::plain(
            format!("use our bot to get the file, send the movie name: {}", urls_joined),
            vec![Leaf::ChannelBotRouting],
        ),
        2 => Rendered::plain(
            format!(
                "join our backup channel in case this channel gets banned: {}",
                urls_joined
            ),
            vec![Leaf::BackupChannel, Leaf::ChannelReferral],
        ),
        3 => Rendered::plain(
            format!("channel directory, browse all genres here: {}", urls_joined),
            vec![Leaf::DirectoryIndexChannel],
        ),
        4 => Rendered::plain(
            format!("check out our friends channels for more: {}", urls_joined),
            vec![Leaf::ChannelReferral],
        ),
        _ => Rendered::plain(
            format!("main archive moved, go through the portal: {}", urls_joined),
            vec![Leaf::IntermediaryRouting],
        ),
    }
}

fn render_benign(rng: &mut ChaCha8Rng, titles: &[TitleSpec]) -> Rendered {
    let title = pick(rng, titles).clone();
    let variant = rng.random_range(0..6u8);
    let (text, titles) = match variant {
        0 => (
            format!("{} wins best picture at the festival tonight", title.title),
            vec![title.title.clone()],
        ),
        1 => (
            format!("official trailer for {} drops tomorrow on the studio page", title.title),
            vec![title.title.clone()],
        ),
        2 => (
            format!("just finished {}, the cinematography is stunning", title.title),
            vec![title.title.clone()],
        ),
        3 => ("good evening everyone, weekend watchlist thread below".to_string(), vec![]),
        4 => ("our uplink was down yesterday, sorry for the silence".to_string(), vec![]),
        _ => ("big match tonight, predictions in the comments".to_string(), vec![]),
    };
    Rendered { text, labels: Vec::new(), titles, attachment: None, external_links: Vec::new() }
}

const BOT_TEMPLATES: &[(&str, Leaf)] = &[
    ("your requested file is ready, sending now", Leaf::ContentDelivery),
    ("send me the name of any movie and i will find it", Leaf::DynamicRetrieval),
    ("promote your channel here, promotion slot open daily", Leaf::ChannelPromotion),
    ("forward me files to grow the collection, submit your files here", Leaf::ContentIngestion),
];

// ---------------------------------------------------------------------------
// Generation.

fn rand_handle(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>, bot: bool) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    const BODY: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    loop {
        let mut h = String::new();
        h.push(LETTERS[rng.random_range(0..LETTERS.len())] as char);
        let body_len = if bot { 5 } else { 8 };
        for _ in 0..body_len {
            h.push(BODY[rng.random_range(0..BODY.len())] as char);
        }
        if bot {
            h.push_str("bot");
        }
        if handle_ok(&h) && used.insert(h.clone()) {
            return h;
        }
    }
}

fn synth_handle(
    rng: &mut ChaCha8Rng,
    lexicon: &[String],
    used: &mut BTreeSet<String>,
) -> Result<String, InvalidSpec> {
    for _ in 0..10_000 {
        let wi = pick(rng, lexicon).clone();
        let wj = pick(rng, lexicon).clone();
        if wi == wj {
            continue;
        }
        let h = if rng.random_bool(0.5) { format!("{wi}_{wj}") } else { format!("{wi}{wj}") };
        if handle_ok(&h) && used.insert(h.clone()) {
            return Ok(h);
        }
    }
    Err(InvalidSpec("lexicon too small to mint distinct discoverable handles".into()))
}

fn display_title(handle: &str) -> String {
    handle
        .split('_')
        .filter(|p| !p.is_empty())
        .map(|p| {
            let mut cs = p.chars();
            match cs.next() {
                Some(f) => f.to_uppercase().chain(cs).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Plan {
    layer: u8,
    terminal: bool,
    super_: bool,
    invite_only: bool,
}

impl Simulator {
    pub fn generate(spec: &EcosystemSpec) -> Result<Simulator, InvalidSpec> {
        validate(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let n_ch = spec.n_channels;
        let n_bots = spec.n_bots;
        let n_total = n_ch + n_bots;
        let window = spec.window_days as i64 * 86_400;
        let plant_links = spec.benign_fraction < 1.0;

        // Identity: channels first, then bots.
        let ids: Vec<String> = (0..n_ch)
            .map(|i| format!("ch{:04}", i))
            .chain((0..n_bots).map(|i| format!("bt{:04}", i)))
            .collect();
        let n_disc = ((n_ch as f64) * spec.discoverable_fraction).round().min(n_ch as f64) as usize;
        let n_emerging =
            ((n_disc as f64) * spec.emerging_fraction).round().min(n_disc as f64) as usize;

        let mut used_handles: BTreeSet<String> = BTreeSet::new();
        let mut handles: Vec<String> = Vec::with_capacity(n_total);
        for i in 0..n_ch {
            if i < n_disc {
                handles.push(synth_handle(&mut rng, &spec.lexicon, &mut used_handles)?);
            } else {
                handles.push(rand_handle(&mut rng, &mut used_handles, false));
            }
        }
        for _ in 0..n_bots {
            handles.push(rand_handle(&mut rng, &mut used_handles, true));
        }

        // Layer plan. Seeds are the emerging discoverable channels.
        let mut plans: Vec<Plan> = Vec::with_capacity(n_total);
        for i in 0..n_total {
            let is_bot = i >= n_ch;
            let layer = if !is_bot && i < n_emerging {
                0
            } else if is_bot {
                if rng.random_bool(0.5) {
                    1
                } else {
                    2
                }
            } else {
                let roll = rng.random_range(0..100u32);
                if roll < 45 {
                    1
                } else if roll < 80 {
                    2
                } else {
                    3
                }
            };
            plans.push(Plan { layer, terminal: false, super_: false, invite_only: false });
        }

        if plant_links {
            assign_roles(&mut rng, spec, &mut plans, n_ch)?;
        }

        // Link wiring.
        let mut out_links: Vec<Vec<PlantedLink>> = vec![Vec::new(); n_total];
        if plant_links {
            wire_links(&mut rng, spec, &plans, &handles, &mut out_links, &mut used_handles, n_ch)?;
        }

        // Posts and records.
        let handle_to_id: BTreeMap<String, String> = handles
            .iter()
            .cloned()
            .zip(ids.iter().cloned())
            .collect();
        let mut by_id: BTreeMap<String, Entity> = BTreeMap::new();
        let mut truth_entities: Vec<EntityTruth> = Vec::new();
        let mut truth_posts: Vec<PostTruth> = Vec::new();

        for i in 0..n_total {
            let is_bot = i >= n_ch;
            let id = ids[i].clone();
            let handle = handles[i].clone();
            let lang = pick(&mut rng, &spec.languages).clone();
            let mut posts: Vec<PostRecord> = Vec::new();
            let mut earliest = 0i64;

            if !is_bot {
                let n_posts = {
                    let base = rng.random_range(spec.posts_min..=spec.posts_max);
                    if plans[i].super_ {
                        base.max(10)
                    } else {
                        base
                    }
                };
                // Channel age; layer 0 splits into emerging vs stale later,
                // here index order already encodes emerging.
                let span = if i < n_emerging {
                    rng.random_range(window / 4..=window * 19 / 20)
                } else if i < n_disc {
                    rng.random_range(window + 86_400..=window * 4)
                } else {
                    rng.random_range(window..=86_400 * 150)
                };
                let t0 = spec.now - span;
                let avg = (span / n_posts as i64).max(2);
                let mut times = Vec::with_capacity(n_posts);
                let mut t = t0;
                for k in 0..n_posts {
                    if k > 0 {
                        t += rng.random_range(avg / 2..=avg).max(1);
                    }
                    times.push(t);
                }
                earliest = times[0];

                // Distribute planted links over the newest posts, ≤5 each.
                let links = &out_links[i];
                let batches: Vec<&[PlantedLink]> = links.chunks(5).collect();
                assert!(batches.len() <= n_posts.min(10), "planted links exceed probe window");

                let archetype = pick_archetype(&mut rng);
                for j in 0..n_posts {
                    // Newest-first index j; post ids count down from n.
                    let time = times[n_posts - 1 - j];
                    let post_id = (n_posts - j) as i64;
                    let (rendered, internal) = if j < batches.len() {
                        let batch: Vec<InternalLink> = batches[j]
                            .iter()
                            .map(|l| InternalLink { kind: l.kind, target: l.target_handle.clone() })
                            .collect();
                        (render_link_post(&mut rng, &batch, &spec.title_pool), batch)
                    } else if rng.random_bool(spec.benign_fraction.clamp(0.0, 1.0)) {
                        (render_benign(&mut rng, &spec.title_pool), Vec::new())
                    } else {
                        let t = *pick(&mut rng, ARCHETYPES[archetype]);
                        (render_content(&mut rng, t, &spec.title_pool), Vec::new())
                    };
                    let is_piracy = !rendered.labels.is_empty();
                    let view_count = 10f64.powf(rng.random_range(1.0..4.2)) as u64;
                    posts.push(PostRecord {
                        channel_id: id.clone(),
                        post_id,
                        time,
                        text: rendered.text,
                        view_count,
                        internal_links: internal,
                        external_links: rendered.external_links,
                        attachment: rendered.attachment,
                        language_tag: Some(lang.clone()),
                        screenshot_ref: is_piracy
                            .then(|| format!("shots/{}_{}.png", id, post_id)),
                    });
                    truth_posts.push(PostTruth {
                        channel_id: id.clone(),
                        post_id,
                        is_piracy,
                        labels: rendered.labels,
                        titles: rendered.titles,
                    });
                }
            }

            let record = ChannelRecord {
                id: id.clone(),
                handle: Some(handle.clone()),
                title: display_title(&handle),
                subscriber_count: 10f64.powf(rng.random_range(1.5..4.7)) as u64,
                earliest_post_time: earliest,
                is_bot,
            };
            truth_entities.push(EntityTruth {
                id: id.clone(),
                handle: handle.clone(),
                is_bot,
                discoverable: !is_bot && i < n_disc,
                emerging: !is_bot && i < n_emerging,
                layer: plans[i].layer,
                planted_role: if plans[i].super_ {
                    Some(PlantedRole::Super)
                } else if plans[i].terminal {
                    Some(PlantedRole::Terminal)
                } else {
                    None
                },
                bot_category: is_bot.then(|| {
                    let cats = [
                        Leaf::ContentDelivery,
                        Leaf::DynamicRetrieval,
                        Leaf::ChannelPromotion,
                        Leaf::ContentIngestion,
                    ];
                    cats[(i - n_ch) % cats.len()]
                }),
                invite_only: plans[i].invite_only,
                out_links: out_links[i].clone(),
            });
            by_id.insert(id, Entity { record, posts, gone: false });
        }

        let _ = handle_to_id;
        // Resolve truth link target ids now that all handles are assigned.
        let by_handle: BTreeMap<String, String> = handles
            .iter()
            .cloned()
            .zip(ids.iter().cloned())
            .collect();
        for e in &mut truth_entities {
            for l in &mut e.out_links {
                if l.kind != LinkKind::Invite {
                    l.target_id = by_handle.get(&l.target_handle).cloned();
                }
            }
        }

        Ok(Simulator {
            state: Mutex::new(SimState {
                by_id,
                by_handle,
                rate_limit_every: None,
                calls: 0,
                fetches: BTreeMap::new(),
            }),
            truth: EcosystemTruth { entities: truth_entities, posts: truth_posts },
        })
    }

    pub fn truth(&self) -> &EcosystemTruth {
        &self.truth
    }

    /// Every n-th platform call fails with RateLimited; None disables.
    pub fn set_rate_limit_every(&self, every: Option<u64>) {
        self.state.lock().expect("sim mutex").rate_limit_every = every;
    }

    /// fetch_posts calls observed for an entity.
    pub fn fetch_count(&self, id: &str) -> u64 {
        self.state.lock().expect("sim mutex").fetches.get(id).copied().unwrap_or(0)
    }

    pub fn live_entity_ids(&self) -> Vec<String> {
        let st = self.state.lock().expect("sim mutex");
        st.by_id.iter().filter(|(_, e)| !e.gone).map(|(id, _)| id.clone()).collect()
    }

    pub fn handle_of(&self, id: &str) -> Option<String> {
        let st = self.state.lock().expect("sim mutex");
        st.by_id.get(id).and_then(|e| e.record.handle.clone())
    }

    /// Scripted takedown: the entity stops resolving and its feed is gone.
    pub fn remove_channel(&self, id: &str) -> bool {
        let mut st = self.state.lock().expect("sim mutex");
        match st.by_id.get_mut(id) {
            Some(e) if !e.gone => {
                e.gone = true;
                if let Some(h) = e.record.handle.clone() {
                    st.by_handle.remove(&h);
                }
                true
            }
            _ => false,
        }
    }

    /// Scripted partial enforcement: the post stays in the feed but its
    /// content is replaced by a removal notice.
    pub fn remove_post(&self, channel_id: &str, post_id: i64) -> bool {
        let mut st = self.state.lock().expect("sim mutex");
        let Some(e) = st.by_id.get_mut(channel_id) else { return false };
        for p in &mut e.posts {
            if p.post_id == post_id && p.text != TAKEDOWN_MARKER {
                p.text = TAKEDOWN_MARKER.to_string();
                p.internal_links.clear();
                p.external_links.clear();
                p.attachment = None;
                p.screenshot_ref = None;
                return true;
            }
        }
        false
    }

    pub fn save_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let st = self.state.lock().expect("sim mutex");
        let mut channels = std::fs::File::create(dir.join("channels.jsonl"))?;
        let mut posts = std::fs::File::create(dir.join("posts.jsonl"))?;
        for entity in st.by_id.values().filter(|e| !e.gone) {
            writeln!(channels, "{}", serde_json::to_string(&entity.record)?)?;
            for p in &entity.posts {
                writeln!(posts, "{}", serde_json::to_string(p)?)?;
            }
        }
        let mut truth = std::fs::File::create(dir.join("truth.jsonl"))?;
        for e in &self.truth.entities {
            writeln!(truth, "{}", serde_json::to_string(&TruthRecord::Entity(e.clone()))?)?;
        }
        for p in &self.truth.posts {
            writeln!(truth, "{}", serde_json::to_string(&TruthRecord::Post(p.clone()))?)?;
        }
        Ok(())
    }

    pub fn from_dir(dir: &Path) -> std::io::Result<Simulator> {
        let parse_err =
            |e: serde_json::Error| std::io::Error::new(std::io::ErrorKind::InvalidData, e);
        let mut by_id: BTreeMap<String, Entity> = BTreeMap::new();
        let mut by_handle: BTreeMap<String, String> = BTreeMap::new();
        let channels = std::fs::File::open(dir.join("channels.jsonl"))?;
        for line in std::io::BufReader::new(channels).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ChannelRecord = serde_json::from_str(&line).map_err(parse_err)?;
            if let Some(h) = &record.handle {
                by_handle.insert(h.clone(), record.id.clone());
            }
            by_id.insert(record.id.clone(), Entity { record, posts: Vec::new(), gone: false });
        }
        let posts = std::fs::File::open(dir.join("posts.jsonl"))?;
        for line in std::io::BufReader::new(posts).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let post: PostRecord = serde_json::from_str(&line).map_err(parse_err)?;
            if let Some(e) = by_id.get_mut(&post.channel_id) {
                e.posts.push(post);
            }
        }
        for e in by_id.values_mut() {
            e.posts.sort_by_key(|p| std::cmp::Reverse(p.time));
        }
        let mut truth = EcosystemTruth::default();
        let truth_path = dir.join("truth.jsonl");
        if truth_path.exists() {
            for line in std::io::BufReader::new(std::fs::File::open(truth_path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<TruthRecord>(&line).map_err(parse_err)? {
                    TruthRecord::Entity(e) => truth.entities.push(e),
                    TruthRecord::Post(p) => truth.posts.push(p),
                }
            }
        }
        Ok(Simulator {
            state: Mutex::new(SimState {
                by_id,
                by_handle,
                rate_limit_every: None,
                calls: 0,
                fetches: BTreeMap::new(),
            }),
            truth,
        })
    }
}

fn validate(spec: &EcosystemSpec) -> Result<(), InvalidSpec> {
    if !(0.0..=1.0).contains(&spec.benign_fraction) {
        return Err(InvalidSpec("benign_fraction must be in [0,1]".into()));
    }
    for (name, v) in [
        ("dangling_link_rate", spec.dangling_link_rate),
        ("discoverable_fraction", spec.discoverable_fraction),
        ("emerging_fraction", spec.emerging_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(InvalidSpec(format!("{name} must be in [0,1]")));
        }
    }
    if spec.posts_min == 0 || spec.posts_min > spec.posts_max {
        return Err(InvalidSpec("posts_min must be in 1..=posts_max".into()));
    }
    if spec.role_plan.n_super + spec.role_plan.n_terminal > spec.n_channels {
        return Err(InvalidSpec("role plan exceeds channel count".into()));
    }
    if spec.role_plan.n_super > 0 && spec.role_plan.super_out_degree == 0 {
        return Err(InvalidSpec("super_out_degree must be ≥ 1".into()));
    }
    if spec.role_plan.super_out_degree > 50 {
        return Err(InvalidSpec("super_out_degree > 50 cannot fit the probe window".into()));
    }
    if spec.n_channels > 0 && spec.discoverable_fraction > 0.0 {
        let distinct: BTreeSet<&String> = spec.lexicon.iter().collect();
        if distinct.len() < 2 {
            return Err(InvalidSpec("lexicon needs ≥2 distinct terms".into()));
        }
    }
    if spec.n_channels > 0 && spec.title_pool.is_empty() {
        return Err(InvalidSpec("title_pool must not be empty".into()));
    }
    if spec.n_channels > 0 && spec.languages.is_empty() {
        return Err(InvalidSpec("languages must not be empty".into()));
    }
    Ok(())
}

fn assign_roles(
    rng: &mut ChaCha8Rng,
    spec: &EcosystemSpec,
    plans: &mut [Plan],
    n_ch: usize,
) -> Result<(), InvalidSpec> {
    let l1_channels: Vec<usize> = (0..n_ch).filter(|&i| plans[i].layer == 1).collect();
    let l2_channels: Vec<usize> = (0..n_ch).filter(|&i| plans[i].layer == 2).collect();
    let has_l2 = plans.iter().take(n_ch).any(|p| p.layer == 2)
        || plans.iter().skip(n_ch).any(|p| p.layer == 2);
    let has_l3 = plans.iter().take(n_ch).any(|p| p.layer == 3);

    // Reserve one relay channel per populated layer so coverage links have
    // an eligible source.
    let mut reserved: BTreeSet<usize> = BTreeSet::new();
    if has_l2 || has_l3 {
        if let Some(&r) = l1_channels.first() {
            reserved.insert(r);
        }
    }
    if has_l3 {
        if let Some(&r) = l2_channels.first() {
            reserved.insert(r);
        }
    }

    let mut terminal_candidates: Vec<usize> = l1_channels
        .iter()
        .chain(l2_channels.iter())
        .copied()
        .filter(|i| !reserved.contains(i))
        .collect();
    terminal_candidates.shuffle(rng);
    if terminal_candidates.len() < spec.role_plan.n_terminal {
        return Err(InvalidSpec(format!(
            "cannot place {} terminals: only {} mid-layer channels available",
            spec.role_plan.n_terminal,
            terminal_candidates.len()
        )));
    }
    for &i in terminal_candidates.iter().take(spec.role_plan.n_terminal) {
        plans[i].terminal = true;
    }

    let mut invite_candidates: Vec<usize> = l1_channels
        .iter()
        .chain(l2_channels.iter())
        .copied()
        .filter(|i| !reserved.contains(i) && !plans[*i].terminal)
        .collect();
    invite_candidates.shuffle(rng);
    if invite_candidates.len() < spec.invite_only_channels {
        return Err(InvalidSpec(format!(
            "cannot place {} invite-only channels",
            spec.invite_only_channels
        )));
    }
    for &i in invite_candidates.iter().take(spec.invite_only_channels) {
        plans[i].invite_only = true;
    }

    let mut super_candidates: Vec<usize> = (0..n_ch)
        .filter(|&i| {
            (plans[i].layer == 0 || plans[i].layer == 1)
                && !plans[i].terminal
                && !plans[i].invite_only
        })
        .collect();
    super_candidates.shuffle(rng);
    if super_candidates.len() < spec.role_plan.n_super {
        return Err(InvalidSpec(format!(
            "cannot place {} super channels in layers 0-1",
            spec.role_plan.n_super
        )));
    }
    for &i in super_candidates.iter().take(spec.role_plan.n_super) {
        plans[i].super_ = true;
    }
    Ok(())
}

fn wire_links(
    rng: &mut ChaCha8Rng,
    spec: &EcosystemSpec,
    plans: &[Plan],
    handles: &[String],
    out_links: &mut [Vec<PlantedLink>],
    used_handles: &mut BTreeSet<String>,
    n_ch: usize,
) -> Result<(), InvalidSpec> {
    let n_total = plans.len();
    let eligible_src = |layer: u8, plans: &[Plan]| -> Vec<usize> {
        (0..n_ch)
            .filter(|&i| plans[i].layer == layer && !plans[i].terminal && !plans[i].invite_only)
            .collect()
    };
    let add_link = |out: &mut Vec<PlantedLink>, src: usize, target: usize| -> bool {
        if src == target {
            return false;
        }
        let handle = handles[target].clone();
        if out.iter().any(|l| l.target_handle == handle) {
            return false;
        }
        out.push(PlantedLink {
            kind: if target >= n_ch { LinkKind::Bot } else { LinkKind::Channel },
            target_handle: handle,
            target_id: None,
        });
        true
    };

    // Coverage: every layer-k entity is linked from an eligible layer-(k-1)
    // channel, so intended depths are achievable.
    for layer in 1..=3u8 {
        let srcs = eligible_src(layer - 1, plans);
        let targets: Vec<usize> = (0..n_total).filter(|&i| plans[i].layer == layer).collect();
        if targets.is_empty() {
            continue;
        }
        if srcs.is_empty() {
            if layer == 1 && eligible_src(0, plans).is_empty() && !plans.iter().any(|p| p.layer == 0)
            {
                // No seeds at all: nothing is reachable by design.
                continue;
            }
            return Err(InvalidSpec(format!("layer {layer} has no eligible source channels")));
        }
        for t in targets {
            let src = *pick(rng, &srcs);
            add_link(&mut out_links[src], src, t);
        }
    }

    // Invite-only channels carry only invite links.
    for i in 0..n_ch {
        if plans[i].invite_only {
            let n = rng.random_range(1..=2);
            for _ in 0..n {
                let token = rand_code(rng, 16);
                out_links[i].push(PlantedLink {
                    kind: LinkKind::Invite,
                    target_handle: token,
                    target_id: None,
                });
            }
        }
    }

    // Super channels: exact out-degree over distinct non-invite targets,
    // padded with dangling handles when the entity pool runs dry.
    for i in 0..n_ch {
        if !plans[i].super_ {
            continue;
        }
        let want = spec.role_plan.super_out_degree;
        let mut guard = 0;
        while out_links[i].iter().filter(|l| l.kind != LinkKind::Invite).count() < want {
            guard += 1;
            let exhausted = guard > n_total * 4;
            if !exhausted && !rng.random_bool(spec.dangling_link_rate.clamp(0.0, 1.0)) {
                let target = rng.random_range(0..n_total);
                if add_link(&mut out_links[i], i, target) {
                    continue;
                }
            } else {
                let handle = rand_handle(rng, used_handles, false);
                out_links[i].push(PlantedLink {
                    kind: LinkKind::Channel,
                    target_handle: handle,
                    target_id: None,
                });
            }
        }
    }

    // Filler links keep every non-terminal channel an active promoter.
    for i in 0..n_ch {
        if plans[i].terminal || plans[i].invite_only || plans[i].super_ {
            continue;
        }
        let current = out_links[i].len();
        let want = rng.random_range(1..=3usize).max(current.min(4));
        let mut guard = 0;
        while out_links[i].iter().filter(|l| l.kind != LinkKind::Invite).count() < want.min(4) {
            guard += 1;
            if guard > 40 {
                break;
            }
            if rng.random_bool(spec.dangling_link_rate.clamp(0.0, 1.0)) {
                let handle = rand_handle(rng, used_handles, false);
                out_links[i].push(PlantedLink {
                    kind: LinkKind::Channel,
                    target_handle: handle,
                    target_id: None,
                });
            } else {
                let target = rng.random_range(0..n_total);
                add_link(&mut out_links[i], i, target);
            }
        }
        // Occasional invite link alongside public ones.
        if rng.random_bool(0.15) {
            let token = rand_code(rng, 16);
            out_links[i].push(PlantedLink {
                kind: LinkKind::Invite,
                target_handle: token,
                target_id: None,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Platform contract.

impl SimState {
    fn tick(&mut self) -> Result<(), PlatformError> {
        self.calls += 1;
        if let Some(n) = self.rate_limit_every {
            if n > 0 && self.calls % n == 0 {
                return Err(PlatformError::RateLimited);
            }
        }
        Ok(())
    }
}

impl PlatformClient for Simulator {
    fn resolve_handle(&self, handle: &str) -> Result<Option<ChannelRecord>, PlatformError> {
        let mut st = self.state.lock().expect("sim mutex");
        st.tick()?;
        let Some(id) = st.by_handle.get(handle).cloned() else {
            return Ok(None);
        };
        match st.by_id.get(&id) {
            Some(e) if !e.gone => Ok(Some(e.record.clone())),
            _ => Ok(None),
        }
    }

    fn channel_meta(&self, channel_id: &str) -> Result<ChannelRecord, PlatformError> {
        let mut st = self.state.lock().expect("sim mutex");
        st.tick()?;
        match st.by_id.get(channel_id) {
            Some(e) if e.gone => Err(PlatformError::ChannelGone(channel_id.to_string())),
            Some(e) => Ok(e.record.clone()),
            None => Err(PlatformError::UnknownEntity(channel_id.to_string())),
        }
    }

    fn fetch_posts(&self, channel_id: &str, limit: usize) -> Result<Vec<PostRecord>, PlatformError> {
        let mut st = self.state.lock().expect("sim mutex");
        st.tick()?;
        *st.fetches.entry(channel_id.to_string()).or_insert(0) += 1;
        match st.by_id.get(channel_id) {
            Some(e) if e.gone => Err(PlatformError::ChannelGone(channel_id.to_string())),
            Some(e) => Ok(e.posts.iter().take(limit).cloned().collect()),
            None => Err(PlatformError::UnknownEntity(channel_id.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Labeled corpus for classifier evaluation.

/// One evaluation sample: a post, its author kind, and planted truth.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub post: PostRecord,
    pub author_is_bot: bool,
    pub truth: PostVerdict,
}

/// Deterministic labeled corpus drawn from the full template bank,
/// including link-bearing and bot-authored samples.
pub fn labeled_corpus(
    seed: u64,
    n: usize,
    piracy_fraction: f64,
    titles: &[TitleSpec],
) -> Vec<CorpusItem> {
    assert!((0.0..=1.0).contains(&piracy_fraction), "piracy_fraction in [0,1]");
    assert!(!titles.is_empty(), "corpus needs a title pool");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_piracy = ((n as f64) * piracy_fraction).round() as usize;
    let mut flags: Vec<bool> = (0..n).map(|i| i < n_piracy).collect();
    flags.shuffle(&mut rng);

    const ALL_CONTENT: &[ContentTemplate] = &[
        ContentTemplate::Direct,
        ContentTemplate::DirectBundle,
        ContentTemplate::DirectSubs,
        ContentTemplate::Cloud,
        ContentTemplate::CloudSubs,
        ContentTemplate::Streaming,
        ContentTemplate::Magnet,
        ContentTemplate::Dedicated,
        ContentTemplate::Vpn,
        ContentTemplate::Modded,
        ContentTemplate::Credentials,
        ContentTemplate::Tutorial,
        ContentTemplate::Request,
        ContentTemplate::Credit,
        ContentTemplate::Premium,
        ContentTemplate::Incentive,
    ];

    let mut out = Vec::with_capacity(n);
    for (i, piracy) in flags.into_iter().enumerate() {
        let channel_id = format!("cp{:04}", i / 25);
        let post_id = i as i64 + 1;
        let mut author_is_bot = false;
        let rendered = if piracy {
            let kind = rng.random_range(0..10u8);
            if kind < 6 {
                let t = *pick(&mut rng, ALL_CONTENT);
                render_content(&mut rng, t, titles)
            } else if kind < 9 {
                // Link-bearing sample with fabricated targets.
                let n_links = rng.random_range(1..=3usize);
                let links: Vec<InternalLink> = (0..n_links)
                    .map(|k| {
                        let target = format!("cpl{}{}{}", i, k, rand_code(&mut rng, 4));
                        if rng.random_bool(0.25) {
                            InternalLink::bot(format!("{target}bot"))
                        } else {
                            InternalLink::channel(target)
                        }
                    })
                    .collect();
                render_link_post(&mut rng, &links, titles)
            } else {
                author_is_bot = true;
                let (text, leaf) = *pick(&mut rng, BOT_TEMPLATES);
                Rendered::plain(text.to_string(), vec![leaf])
            }
        } else {
            render_benign(&mut rng, titles)
        };
        let mut post = PostRecord::new(channel_id.clone(), post_id, 1_700_000_000 + i as i64, "");
        post.text = rendered.text;
        post.attachment = rendered.attachment;
        post.external_links = rendered.external_links;
        post.view_count = 10f64.powf(rng.random_range(1.0..3.5)) as u64;
        // Link posts carry their structured links too.
        if piracy {
            for url in post
                .text
                .split_whitespace()
                .filter(|w| w.starts_with("https://t.me/"))
            {
                let target = url.trim_start_matches("https://t.me/");
                if let Some(tok) = target.strip_prefix('+') {
                    post.internal_links.push(InternalLink::invite(tok));
                } else if target.to_lowercase().ends_with("bot") {
                    post.internal_links.push(InternalLink::bot(target));
                } else {
                    post.internal_links.push(InternalLink::channel(target));
                }
            }
        }
        out.push(CorpusItem {
            truth: PostVerdict {
                channel_id,
                post_id,
                is_piracy: piracy,
                labels: rendered
                    .labels
                    .iter()
                    .map(|&l| AssignedLabel::new(l, "planted"))
                    .collect(),
            },
            post,
            author_is_bot,
        });
    }
    out
}
