//! Stage orchestration: persistent run state, content-addressed artifacts,
//! and the synth -> track pipeline over a simulated platform.
//!
//! Every stage reads its inputs from the previous stage's artifact files and
//! writes its own, so any stage is restartable from disk and a manual
//! stage-by-stage invocation produces the same bytes as one full run. The
//! clock and all randomness come from the config; nothing consults the real
//! world.

mod config;

pub use config::{ClassifierSpec, ConfigError, PipelineConfig, SimSource};

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::catalog::{Catalog, TitleMatch};
use crate::crawler::{self, CrawlConfig, CrawlError, DiscoveryResult};
use crate::graph;
use crate::handles::{generate_candidates, ObservedHandles, SeedLexicon};
use crate::loss::{self, ExchangeTable, LanguageMap, MatchedView, PricingCatalog};
use crate::platform::sim::{EcosystemSpec, Simulator};
use crate::platform::{with_retries, ChannelRecord, PlatformClient, PlatformError, PostRecord};
use crate::report::{
    self, build_reports, outcome_summary, tracking_records_for, Recipient, RightsHolderMap,
    TrackingRecord,
};
use crate::taxonomy::{
    classify_post, ClassifierAdapter, FallbackClassifier, HttpAdapter, PostVerdict,
    RuleClassifier, SubprocessAdapter, DEFAULT_ADAPTER_TIMEOUT,
};

pub const STATE_FILE: &str = "state.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("missing input for stage {stage}: {path} (run the earlier stages first)")]
    MissingInput { stage: &'static str, path: PathBuf },
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("transport exhausted during {stage}: {message}")]
    Transport { stage: &'static str, message: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl PipelineError {
    /// CLI exit code: 1 usage/config, 2 stage failure, 3 transport exhaustion.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Transport { .. } => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Synth,
    Probe,
    Gate,
    Expand,
    Hydrate,
    Detect,
    Categorize,
    Match,
    Graph,
    Estimate,
    Report,
    Track,
}

impl Stage {
    pub const ALL: [Stage; 12] = [
        Stage::Synth,
        Stage::Probe,
        Stage::Gate,
        Stage::Expand,
        Stage::Hydrate,
        Stage::Detect,
        Stage::Categorize,
        Stage::Match,
        Stage::Graph,
        Stage::Estimate,
        Stage::Report,
        Stage::Track,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Probe => "probe",
            Stage::Gate => "gate",
            Stage::Expand => "expand",
            Stage::Hydrate => "hydrate",
            Stage::Detect => "detect",
            Stage::Categorize => "categorize",
            Stage::Match => "match",
            Stage::Graph => "graph",
            Stage::Estimate => "estimate",
            Stage::Report => "report",
            Stage::Track => "track",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// First line of every artifact file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub run_id: String,
    pub stage: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageMark {
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
    /// Injected clock at completion (not wall time).
    pub at: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunState {
    pub run_id: String,
    pub config_hash: String,
    pub completed: BTreeMap<String, StageMark>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub executed: Vec<String>,
    pub skipped: Vec<String>,
}

/// Artifact file names, relative to the run directory.
mod artifact {
    pub const CANDIDATES: &str = "candidates.jsonl";
    pub const PROBED: &str = "probed.jsonl";
    pub const PROBE_STATS: &str = "probe_stats.jsonl";
    pub const GATED: &str = "gated.jsonl";
    pub const GATED_OUT: &str = "gated_out.jsonl";
    pub const DISCOVERY: &str = "discovery.jsonl";
    pub const CHANNELS: &str = "channels.jsonl";
    pub const POSTS: &str = "posts.jsonl";
    pub const DETECTIONS: &str = "detections.jsonl";
    pub const VERDICTS: &str = "verdicts.jsonl";
    pub const MATCHES: &str = "matches.jsonl";
    pub const EDGES_CSV: &str = "edges.csv";
    pub const ROLES_CSV: &str = "roles.csv";
    pub const GRAPH_DOT: &str = "graph.dot";
    pub const GRAPH_SUMMARY: &str = "graph.jsonl";
    pub const LOSS: &str = "loss.jsonl";
    pub const ROLLUP_CSV: &str = "rollup.csv";
    pub const REPORTS: &str = "reports.jsonl";
    pub const REPORT_META: &str = "report_meta.jsonl";
    pub const TRACKING: &str = "tracking.jsonl";
    pub const OUTCOME: &str = "outcome.jsonl";
    pub const OUTBOX: &str = "outbox";
}

pub struct Pipeline {
    cfg: PipelineConfig,
    run_dir: PathBuf,
    sim: Simulator,
    state: RunState,
}

fn stage_err(stage: &'static str, message: impl std::fmt::Display) -> PipelineError {
    PipelineError::Stage { stage, message: message.to_string() }
}

fn crawl_err(stage: &'static str, e: CrawlError) -> PipelineError {
    match e {
        CrawlError::Transport(inner) if inner.is_retryable() => {
            PipelineError::Transport { stage, message: inner.to_string() }
        }
        other => stage_err(stage, other),
    }
}

fn platform_err(stage: &'static str, e: PlatformError) -> PipelineError {
    if e.is_retryable() {
        PipelineError::Transport { stage, message: e.to_string() }
    } else {
        stage_err(stage, e)
    }
}

/// One term per line; `#` comments and blanks skipped.
pub fn read_lexicon(path: &Path) -> io::Result<Vec<String>> {
    let body = fs::read_to_string(path)?;
    Ok(body
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig) -> Result<Pipeline, PipelineError> {
        cfg.validate_paths()?;
        let run_id = cfg.run_id();
        let run_dir = cfg.out_dir.join(&run_id);
        fs::create_dir_all(&run_dir)?;

        let sim = match &cfg.sim {
            SimSource::Generate => {
                let spec = ecosystem_spec(&cfg)?;
                Simulator::generate(&spec)
                    .map_err(|e| stage_err("init", format!("simulator spec: {e}")))?
            }
            SimSource::Dir(dir) => Simulator::from_dir(dir)?,
        };

        let state_path = run_dir.join(STATE_FILE);
        let state = if state_path.exists() {
            let raw = fs::read_to_string(&state_path)?;
            let state: RunState = serde_json::from_str(&raw)
                .map_err(|e| stage_err("init", format!("corrupt {STATE_FILE}: {e}")))?;
            if state.config_hash != cfg.config_hash() {
                return Err(stage_err(
                    "init",
                    format!("{STATE_FILE} belongs to a different configuration"),
                ));
            }
            state
        } else {
            let state = RunState {
                run_id: run_id.clone(),
                config_hash: cfg.config_hash(),
                completed: BTreeMap::new(),
            };
            write_state(&state_path, &state)?;
            state
        };

        Ok(Pipeline { cfg, run_dir, sim, state })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn run_id(&self) -> &str {
        &self.state.run_id
    }

    pub fn run_dir(&self) -> &Path {
        &self.run_dir
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn stage_done(&self, stage: Stage) -> bool {
        self.state.completed.contains_key(stage.name())
    }

    /// Full pipeline, all stages in order.
    pub fn run(&mut self) -> Result<RunSummary, PipelineError> {
        self.run_stages(&Stage::ALL)
    }

    pub fn run_stages(&mut self, stages: &[Stage]) -> Result<RunSummary, PipelineError> {
        let mut summary = RunSummary {
            run_id: self.state.run_id.clone(),
            executed: Vec::new(),
            skipped: Vec::new(),
        };
        for &st in stages {
            if self.stage_done(st) {
                summary.skipped.push(st.name().to_string());
                continue;
            }
            self.run_stage(st)?;
            summary.executed.push(st.name().to_string());
        }
        Ok(summary)
    }

    /// Execute a single stage (no-op if already completed).
    pub fn run_stage(&mut self, stage: Stage) -> Result<(), PipelineError> {
        if self.stage_done(stage) {
            return Ok(());
        }
        let artifacts = match stage {
            Stage::Synth => self.stage_synth()?,
            Stage::Probe => self.stage_probe()?,
            Stage::Gate => self.stage_gate()?,
            Stage::Expand => self.stage_expand()?,
            Stage::Hydrate => self.stage_hydrate()?,
            Stage::Detect => self.stage_detect()?,
            Stage::Categorize => self.stage_categorize()?,
            Stage::Match => self.stage_match()?,
            Stage::Graph => self.stage_graph()?,
            Stage::Estimate => self.stage_estimate()?,
            Stage::Report => self.stage_report()?,
            Stage::Track => self.stage_track()?,
        };
        self.state
            .completed
            .insert(stage.name().to_string(), StageMark { artifacts, at: self.cfg.now });
        write_state(&self.run_dir.join(STATE_FILE), &self.state)?;
        Ok(())
    }

    // -- artifact plumbing ---------------------------------------------------

    fn header(&self, stage: Stage) -> ArtifactHeader {
        ArtifactHeader {
            run_id: self.state.run_id.clone(),
            stage: stage.name().to_string(),
            config_hash: self.state.config_hash.clone(),
        }
    }

    fn header_line(&self, stage: Stage) -> String {
        serde_json::to_string(&json!({ "artifact_header": self.header(stage) }))
            .expect("header serializes")
    }

    /// JSONL artifact: header line, then one JSON value per line.
    fn write_jsonl<I: IntoIterator<Item = String>>(
        &self,
        stage: Stage,
        name: &str,
        lines: I,
    ) -> Result<(), PipelineError> {
        let mut body = self.header_line(stage);
        body.push('\n');
        for line in lines {
            body.push_str(&line);
            body.push('\n');
        }
        fs::write(self.run_dir.join(name), body)?;
        Ok(())
    }

    /// Text artifact (csv/dot/txt) with a commented header line.
    fn write_text(
        &self,
        stage: Stage,
        name: &str,
        comment: &str,
        body: &str,
    ) -> Result<(), PipelineError> {
        let h = self.header(stage);
        let text = format!(
            "{comment} run_id={} stage={} config_hash={}\n{body}",
            h.run_id, h.stage, h.config_hash
        );
        fs::write(self.run_dir.join(name), text)?;
        Ok(())
    }

    fn require(&self, stage: Stage, name: &str) -> Result<PathBuf, PipelineError> {
        let path = self.run_dir.join(name);
        if !path.exists() {
            return Err(PipelineError::MissingInput { stage: stage.name(), path });
        }
        Ok(path)
    }

    /// Read a JSONL artifact body (header line stripped) into typed records.
    fn read_jsonl<T: serde::de::DeserializeOwned>(
        &self,
        stage: Stage,
        name: &str,
    ) -> Result<Vec<T>, PipelineError> {
        let path = self.require(stage, name)?;
        let file = fs::File::open(&path)?;
        let mut out = Vec::new();
        for (i, line) in io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let value: T = serde_json::from_str(&line).map_err(|e| {
                stage_err(stage.name(), format!("{name} line {}: {e}", i + 1))
            })?;
            out.push(value);
        }
        Ok(out)
    }

    // -- stages ---------------------------------------------------------------

    /// Mint candidate handles from the seed lexicon.
    fn stage_synth(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Synth;
        let terms = read_lexicon(&self.cfg.lexicon)?;
        let lexicon = SeedLexicon::new(terms);
        let observed = ObservedHandles::new(Vec::<String>::new())
            .map_err(|e| stage_err("synth", e))?;
        let set = generate_candidates(&lexicon, &observed, self.cfg.k_higher, self.cfg.seed)
            .map_err(|e| stage_err("synth", e))?;
        self.write_jsonl(
            ST,
            artifact::CANDIDATES,
            set.candidates.iter().map(|h| json!({ "handle": h }).to_string()),
        )?;
        Ok(vec![artifact::CANDIDATES.to_string()])
    }

    fn load_candidates(&self, stage: Stage) -> Result<Vec<String>, PipelineError> {
        #[derive(Deserialize)]
        struct Line {
            handle: String,
        }
        Ok(self
            .read_jsonl::<Line>(stage, artifact::CANDIDATES)?
            .into_iter()
            .map(|l| l.handle)
            .collect())
    }

    /// Resolve candidates against the platform.
    fn stage_probe(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Probe;
        let candidates = self.load_candidates(ST)?;
        let out = crawler::probe(&self.sim, &candidates, self.cfg.retry_attempts, |_| {})
            .map_err(|e| crawl_err("probe", e))?;
        self.write_jsonl(
            ST,
            artifact::PROBED,
            out.resolved.iter().map(|r| serde_json::to_string(r).expect("record serializes")),
        )?;
        let stats = json!({
            "candidates_total": out.total,
            "candidates_rejected": out.rejected,
            "candidates_probed": out.probed,
            "candidates_resolved": out.resolved.len(),
        });
        self.write_jsonl(ST, artifact::PROBE_STATS, [stats.to_string()])?;
        Ok(vec![artifact::PROBED.to_string(), artifact::PROBE_STATS.to_string()])
    }

    /// Split probed seeds by the recency gate.
    fn stage_gate(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Gate;
        let probed: Vec<ChannelRecord> = self.read_jsonl(ST, artifact::PROBED)?;
        let (pass, fail): (Vec<_>, Vec<_>) = probed
            .into_iter()
            .partition(|r| crawler::recency_gate(r, self.cfg.now, self.cfg.window_days));
        self.write_jsonl(
            ST,
            artifact::GATED,
            pass.iter().map(|r| serde_json::to_string(r).expect("record serializes")),
        )?;
        self.write_jsonl(
            ST,
            artifact::GATED_OUT,
            fail.iter().map(|r| json!({ "channel_id": r.id }).to_string()),
        )?;
        Ok(vec![artifact::GATED.to_string(), artifact::GATED_OUT.to_string()])
    }

    /// BFS expansion from gated seeds (full crawl; probe/gate artifacts are
    /// the inspectable intermediates of the same deterministic walk).
    fn stage_expand(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Expand;
        let candidates = self.load_candidates(ST)?;
        let crawl_cfg = self.crawl_config();
        let result = crawler::crawl_with_sleeper(&self.sim, &candidates, &crawl_cfg, |_| {})
            .map_err(|e| crawl_err("expand", e))?;
        let line = serde_json::to_string(&result).expect("discovery serializes");
        self.write_jsonl(ST, artifact::DISCOVERY, [line])?;
        Ok(vec![artifact::DISCOVERY.to_string()])
    }

    fn crawl_config(&self) -> CrawlConfig {
        CrawlConfig {
            now: self.cfg.now,
            window_days: self.cfg.window_days,
            probe_posts: self.cfg.probe_posts,
            max_depth: self.cfg.max_depth,
            parse_mentions: self.cfg.parse_mentions,
            retry_attempts: self.cfg.retry_attempts,
        }
    }

    fn load_discovery(&self, stage: Stage) -> Result<DiscoveryResult, PipelineError> {
        let mut rows: Vec<DiscoveryResult> = self.read_jsonl(stage, artifact::DISCOVERY)?;
        rows.pop()
            .ok_or_else(|| stage_err(stage.name(), "discovery artifact is empty"))
    }

    /// Pull metadata and up to `hydrate_posts` posts for every discovered
    /// entity. Entities that vanished mid-run keep their discovery record.
    fn stage_hydrate(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Hydrate;
        let discovery = self.load_discovery(ST)?;
        let mut channels: Vec<ChannelRecord> = Vec::new();
        let mut posts: Vec<PostRecord> = Vec::new();
        for entity in discovery.entities() {
            let id = entity.record.id.clone();
            let meta = with_retries(self.cfg.retry_attempts, |_| {}, || {
                self.sim.channel_meta(&id)
            });
            let record = match meta {
                Ok(r) => r,
                Err(e) if e.is_retryable() => return Err(platform_err("hydrate", e)),
                Err(_) => entity.record.clone(),
            };
            let is_bot = record.is_bot;
            channels.push(record);
            if is_bot {
                continue;
            }
            let feed = with_retries(self.cfg.retry_attempts, |_| {}, || {
                self.sim.fetch_posts(&id, self.cfg.hydrate_posts)
            });
            match feed {
                Ok(page) => posts.extend(page),
                Err(e) if e.is_retryable() => return Err(platform_err("hydrate", e)),
                Err(_) => {} // gone between meta and fetch: no posts
            }
        }
        self.write_jsonl(
            ST,
            artifact::CHANNELS,
            channels.iter().map(|r| serde_json::to_string(r).expect("record serializes")),
        )?;
        self.write_jsonl(
            ST,
            artifact::POSTS,
            posts.iter().map(|p| serde_json::to_string(p).expect("post serializes")),
        )?;
        Ok(vec![artifact::CHANNELS.to_string(), artifact::POSTS.to_string()])
    }

    fn classifier(&self) -> Result<Box<dyn ClassifierAdapter>, PipelineError> {
        Ok(match &self.cfg.classifier {
            ClassifierSpec::Rules => Box::new(RuleClassifier::default()),
            ClassifierSpec::Subprocess(cmdline) => {
                let mut parts = cmdline.split_whitespace();
                let program = parts.next().ok_or_else(|| {
                    stage_err("classify", "empty adapter command line")
                })?;
                let args: Vec<String> = parts.map(str::to_string).collect();
                let adapter =
                    SubprocessAdapter::spawn(program, &args, DEFAULT_ADAPTER_TIMEOUT)
                        .map_err(|e| stage_err("classify", e))?;
                Box::new(FallbackClassifier::new(adapter, RuleClassifier::default()))
            }
            ClassifierSpec::Http(url) => Box::new(FallbackClassifier::new(
                HttpAdapter::new(url.clone(), DEFAULT_ADAPTER_TIMEOUT),
                RuleClassifier::default(),
            )),
        })
    }

    /// Binary piracy detection per post.
    fn stage_detect(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Detect;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let classifier = self.classifier()?;
        let mut lines = Vec::with_capacity(posts.len());
        for post in &posts {
            let is_piracy = classifier
                .detect(post)
                .map_err(|e| stage_err("detect", e))?;
            lines.push(
                json!({
                    "channel_id": post.channel_id,
                    "post_id": post.post_id,
                    "is_piracy": is_piracy,
                })
                .to_string(),
            );
        }
        self.write_jsonl(ST, artifact::DETECTIONS, lines)?;
        Ok(vec![artifact::DETECTIONS.to_string()])
    }

    /// Full taxonomy verdicts (labels with justifications) per post.
    fn stage_categorize(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Categorize;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let classifier = self.classifier()?;
        let mut lines = Vec::with_capacity(posts.len());
        for post in &posts {
            let verdict = classify_post(classifier.as_ref(), post)
                .map_err(|e| stage_err("categorize", e))?;
            lines.push(serde_json::to_string(&verdict).expect("verdict serializes"));
        }
        self.write_jsonl(ST, artifact::VERDICTS, lines)?;
        Ok(vec![artifact::VERDICTS.to_string()])
    }

    /// Catalog matches for every piracy post.
    fn stage_match(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Match;
        let verdicts: Vec<PostVerdict> = self.read_jsonl(ST, artifact::VERDICTS)?;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let post_by_key: BTreeMap<(&str, i64), &PostRecord> =
            posts.iter().map(|p| ((p.channel_id.as_str(), p.post_id), p)).collect();
        let catalog = Catalog::ingest_path(&self.cfg.catalog)
            .map_err(|e| stage_err("match", e))?;
        let mut lines = Vec::new();
        for v in verdicts.iter().filter(|v| v.is_piracy) {
            let Some(post) = post_by_key.get(&(v.channel_id.as_str(), v.post_id)) else {
                continue;
            };
            for m in catalog.match_post(post, self.cfg.match_threshold) {
                lines.push(serde_json::to_string(&m).expect("match serializes"));
            }
        }
        self.write_jsonl(ST, artifact::MATCHES, lines)?;
        Ok(vec![artifact::MATCHES.to_string()])
    }

    /// Promotion graph: edges, roles, components, exports.
    fn stage_graph(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Graph;
        let discovery = self.load_discovery(ST)?;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let mut sightings: Vec<(String, crate::platform::InternalLink)> = Vec::new();
        for post in &posts {
            let extracted = crawler::extract_post_links(post, self.cfg.parse_mentions);
            for link in extracted.links {
                sightings.push((post.channel_id.clone(), link));
            }
        }
        let g = graph::build_from_discovery(&discovery, &sightings);
        let thresholds = graph::compute_thresholds(&g).map_err(|e| stage_err("graph", e))?;
        let roles = graph::classify_roles(&g, &thresholds);
        let components = graph::components(&g);
        let pairs = graph::transitive_pairs(&g);
        let supers: Vec<&str> = roles
            .iter()
            .filter(|r| r.role == graph::Role::Super)
            .map(|r| r.id.as_str())
            .collect();
        let terminals: Vec<&str> = roles
            .iter()
            .filter(|r| r.role == graph::Role::Terminal)
            .map(|r| r.id.as_str())
            .collect();
        let summary = json!({
            "n_nodes": g.n_nodes(),
            "n_edges": g.n_edges(),
            "invite_only_excluded": g.invite_only_excluded().iter().collect::<Vec<_>>(),
            "thresholds": {
                "mean_outdeg": thresholds.mean_outdeg,
                "median_outdeg": thresholds.median_outdeg,
                "stddev_outdeg": thresholds.stddev_outdeg,
                "super_cutoff": thresholds.super_cutoff,
                "min_super_outdeg": thresholds.min_super_outdeg(),
            },
            "n_components": components.len(),
            "n_transitive_pairs": pairs.len(),
            "supers": supers,
            "terminals": terminals,
        });
        self.write_jsonl(ST, artifact::GRAPH_SUMMARY, [summary.to_string()])?;
        self.write_text(ST, artifact::EDGES_CSV, "#", &graph::edges_csv(&g))?;
        self.write_text(ST, artifact::ROLES_CSV, "#", &graph::roles_csv(&g, &roles))?;
        self.write_text(ST, artifact::GRAPH_DOT, "//", &graph::to_dot(&g, &roles))?;
        Ok(vec![
            artifact::GRAPH_SUMMARY.to_string(),
            artifact::EDGES_CSV.to_string(),
            artifact::ROLES_CSV.to_string(),
            artifact::GRAPH_DOT.to_string(),
        ])
    }

    /// Financial loss lower bound over matched piracy views.
    fn stage_estimate(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Estimate;
        let verdicts: Vec<PostVerdict> = self.read_jsonl(ST, artifact::VERDICTS)?;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let matches: Vec<TitleMatch> = self.read_jsonl(ST, artifact::MATCHES)?;
        let post_by_key: BTreeMap<(&str, i64), &PostRecord> =
            posts.iter().map(|p| ((p.channel_id.as_str(), p.post_id), p)).collect();
        let piracy: BTreeSet<(&str, i64)> = verdicts
            .iter()
            .filter(|v| v.is_piracy)
            .map(|v| (v.channel_id.as_str(), v.post_id))
            .collect();
        // Matches are ordered best-first per post; attribute views to the
        // best match only so a view is never double counted.
        let mut best: BTreeMap<(&str, i64), &TitleMatch> = BTreeMap::new();
        for m in &matches {
            best.entry((m.channel_id.as_str(), m.post_id)).or_insert(m);
        }
        let lang = LanguageMap::builtin();
        let mut views: Vec<MatchedView> = Vec::new();
        for (key, m) in &best {
            if !piracy.contains(key) {
                continue;
            }
            let Some(post) = post_by_key.get(key) else { continue };
            views.push(MatchedView {
                title_id: m.entry_id.clone(),
                region: loss::infer_region(post, lang),
                views: post.view_count,
            });
        }
        let pricing = PricingCatalog::from_path(&self.cfg.pricing)
            .map_err(|e| stage_err("estimate", e))?;
        let fx = ExchangeTable::from_path(&self.cfg.fx)
            .map_err(|e| stage_err("estimate", e))?;
        let estimate = loss::estimate(&views, &pricing, &fx);
        let catalog = Catalog::ingest_path(&self.cfg.catalog)
            .map_err(|e| stage_err("estimate", e))?;
        let rollup = loss::rollup(&estimate, &catalog);
        self.write_jsonl(
            ST,
            artifact::LOSS,
            [serde_json::to_string(&estimate).expect("estimate serializes")],
        )?;
        let mut csv = String::from("country,kind,views,loss_usd\n");
        for row in &rollup {
            csv.push_str(&format!(
                "{},{},{},{:.2}\n",
                row.country, row.kind, row.views, row.loss_usd
            ));
        }
        self.write_text(ST, artifact::ROLLUP_CSV, "#", &csv)?;
        Ok(vec![artifact::LOSS.to_string(), artifact::ROLLUP_CSV.to_string()])
    }

    /// Assemble abuse reports, write the outbox, seed tracking records.
    fn stage_report(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Report;
        let verdicts: Vec<PostVerdict> = self.read_jsonl(ST, artifact::VERDICTS)?;
        let posts: Vec<PostRecord> = self.read_jsonl(ST, artifact::POSTS)?;
        let channels: Vec<ChannelRecord> = self.read_jsonl(ST, artifact::CHANNELS)?;
        let matches: Vec<TitleMatch> = self.read_jsonl(ST, artifact::MATCHES)?;
        let holders = RightsHolderMap::from_path(&self.cfg.rights_holders)
            .map_err(|e| stage_err("report", e))?;

        let report_channels: Vec<ChannelRecord> =
            channels.iter().filter(|c| !c.is_bot).cloned().collect();
        let batch = build_reports(
            &verdicts,
            &posts,
            &report_channels,
            &matches,
            &holders,
            self.cfg.report_mode,
            self.cfg.report_variant,
        );
        report::verify_integrity(&batch.reports, &verdicts)
            .map_err(|e| stage_err("report", e))?;

        // Outbox documents: JSON wrapped with the artifact header, plus the
        // plain-text rendering with a commented header line.
        let outbox = self.run_dir.join(artifact::OUTBOX);
        let h = self.header(ST);
        let mut artifacts = Vec::new();
        for r in &batch.reports {
            let dir = outbox.join(r.recipient.dir_name());
            fs::create_dir_all(&dir)?;
            let mut body = serde_json::to_string_pretty(
                &json!({ "artifact_header": h, "report": r }),
            )
            .expect("report serializes");
            body.push('\n');
            let json_rel = format!(
                "{}/{}/{}.json",
                artifact::OUTBOX,
                r.recipient.dir_name(),
                r.report_id
            );
            fs::write(self.run_dir.join(&json_rel), body)?;
            let txt_rel = format!(
                "{}/{}/{}.txt",
                artifact::OUTBOX,
                r.recipient.dir_name(),
                r.report_id
            );
            let txt = format!(
                "# run_id={} stage={} config_hash={}\n{}",
                h.run_id,
                h.stage,
                h.config_hash,
                report::render_text(r)
            );
            fs::write(self.run_dir.join(&txt_rel), txt)?;
            artifacts.push(json_rel);
            artifacts.push(txt_rel);
        }

        self.write_jsonl(
            ST,
            artifact::REPORTS,
            batch.reports.iter().map(|r| serde_json::to_string(r).expect("report serializes")),
        )?;
        let meta = json!({
            "n_reports": batch.reports.len(),
            "skipped_no_evidence": batch.skipped_no_evidence,
            "unmapped_companies": batch.unmapped_companies,
        });
        self.write_jsonl(ST, artifact::REPORT_META, [meta.to_string()])?;

        // Tracking seeds: reported channels per recipient, anchored to the
        // run clock, plus discovered bots (status-only observation).
        let mut records = tracking_records_for(&batch.reports);
        for rec in &mut records {
            rec.reported_at = self.cfg.now;
            rec.window_days = self.cfg.tracking_window_days;
        }
        for bot in channels.iter().filter(|c| c.is_bot) {
            let mut rec = TrackingRecord::new(
                bot.id.clone(),
                true,
                Recipient::Platform,
                "",
                self.cfg.now,
                Vec::new(),
            );
            rec.window_days = self.cfg.tracking_window_days;
            records.push(rec);
        }
        records.sort_by(|a, b| {
            (a.entity_id.as_str(), a.recipient.dir_name())
                .cmp(&(b.entity_id.as_str(), b.recipient.dir_name()))
        });
        self.write_jsonl(
            ST,
            artifact::TRACKING,
            records.iter().map(|r| serde_json::to_string(r).expect("record serializes")),
        )?;

        artifacts.push(artifact::REPORTS.to_string());
        artifacts.push(artifact::REPORT_META.to_string());
        artifacts.push(artifact::TRACKING.to_string());
        Ok(artifacts)
    }

    fn load_tracking(&self, stage: Stage) -> Result<Vec<TrackingRecord>, PipelineError> {
        let rows: Vec<TrackingRecord> = self.read_jsonl(stage, artifact::TRACKING)?;
        // The log is append-only; the latest snapshot per key wins.
        let mut latest: BTreeMap<(String, String), TrackingRecord> = BTreeMap::new();
        for rec in rows {
            latest.insert((rec.entity_id.clone(), rec.recipient.dir_name()), rec);
        }
        Ok(latest.into_values().collect())
    }

    /// Scripted enforcement plus daily tracking passes, then the summary.
    fn stage_track(&self) -> Result<Vec<String>, PipelineError> {
        const ST: Stage = Stage::Track;
        let mut records = self.load_tracking(ST)?;
        self.apply_scripted_enforcement(&records);

        let tracking_path = self.run_dir.join(artifact::TRACKING);
        for pass in 1..=self.cfg.track_passes {
            let at = self.cfg.now + i64::from(pass) * 86_400;
            let outcome = report::track_with_sleeper(
                &self.sim,
                &mut records,
                at,
                self.cfg.retry_attempts,
                |_| {},
            );
            if !outcome.skipped_transport.is_empty() {
                return Err(PipelineError::Transport {
                    stage: "track",
                    message: format!(
                        "probes kept failing for {} entities",
                        outcome.skipped_transport.len()
                    ),
                });
            }
            report::append_tracking(&tracking_path, &records)?;
        }

        let summary = outcome_summary(&records);
        self.write_jsonl(
            ST,
            artifact::OUTCOME,
            [serde_json::to_string(&summary).expect("summary serializes")],
        )?;
        Ok(vec![artifact::OUTCOME.to_string(), artifact::TRACKING.to_string()])
    }

    /// Simulate the platform acting on reports: delete a configured fraction
    /// of tracked entities, replace a fraction of reported posts in the
    /// survivors with removal markers. Deterministic in the run seed.
    fn apply_scripted_enforcement(&self, records: &[TrackingRecord]) {
        let mut by_entity: BTreeMap<&str, (bool, BTreeSet<i64>)> = BTreeMap::new();
        for rec in records {
            let entry = by_entity.entry(rec.entity_id.as_str()).or_insert((rec.is_bot, BTreeSet::new()));
            entry.1.extend(rec.reported_posts.iter().copied());
        }
        let entities: Vec<&str> = by_entity.keys().copied().collect();
        let mut doomed: BTreeSet<&str> = BTreeSet::new();
        if self.cfg.enforcement_fraction > 0.0 && !entities.is_empty() {
            let k = (self.cfg.enforcement_fraction * entities.len() as f64).round() as usize;
            let mut order = entities.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x5452_4143);
            order.shuffle(&mut rng);
            for id in order.into_iter().take(k) {
                self.sim.remove_channel(id);
                doomed.insert(id);
            }
        }
        if self.cfg.enforcement_post_fraction > 0.0 {
            for (id, (is_bot, posts)) in &by_entity {
                if *is_bot || doomed.contains(id) || posts.is_empty() {
                    continue;
                }
                let k = (self.cfg.enforcement_post_fraction * posts.len() as f64).floor()
                    as usize;
                for pid in posts.iter().take(k) {
                    self.sim.remove_post(id, *pid);
                }
            }
        }
    }
}

fn write_state(path: &Path, state: &RunState) -> Result<(), PipelineError> {
    let mut body = serde_json::to_string_pretty(state).expect("state serializes");
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

/// Map run configuration onto a simulator spec (shared by `Pipeline::new`
/// and the `simulate` subcommand).
pub fn ecosystem_spec(cfg: &PipelineConfig) -> Result<EcosystemSpec, PipelineError> {
    let lexicon = read_lexicon(&cfg.lexicon)?;
    Ok(EcosystemSpec {
        seed: cfg.seed,
        n_channels: cfg.sim_channels,
        n_bots: cfg.sim_bots,
        now: cfg.now,
        window_days: cfg.window_days,
        benign_fraction: cfg.sim_benign_fraction,
        dangling_link_rate: cfg.sim_dangling_rate,
        invite_only_channels: cfg.sim_invite_only,
        discoverable_fraction: cfg.sim_discoverable_fraction,
        emerging_fraction: cfg.sim_emerging_fraction,
        posts_min: cfg.sim_posts_min,
        posts_max: cfg.sim_posts_max,
        lexicon,
        ..EcosystemSpec::default()
    })
}
