//! Run configuration: a flat `key = value` file plus CLI overrides.
//!
//! Every knob has a default; a run is fully described by the resolved set of
//! key/value pairs. The run id is derived from that set minus `out_dir`, so
//! the same run written to two different places gets the same identity.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::{ReportMode, ReportVariant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config line {line}: expected `key = value`, got {got:?}")]
    Syntax { line: usize, got: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
    #[error("configured path {key} = {path} does not exist")]
    MissingPath { key: String, path: PathBuf },
}

/// What backs the platform client.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimSource {
    /// Synthesize an ecosystem from the run seed.
    Generate,
    /// Load a previously saved ecosystem directory.
    Dir(PathBuf),
}

/// Which classifier answers detect/categorize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifierSpec {
    Rules,
    /// External adapter subprocess (command line), rule-engine fallback.
    Subprocess(String),
    /// External adapter over HTTP (endpoint URL), rule-engine fallback.
    Http(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Injected wall clock, unix seconds. Every timestamp in a run derives
    /// from this; nothing reads the real clock.
    pub now: i64,
    pub lexicon: PathBuf,
    pub catalog: PathBuf,
    pub pricing: PathBuf,
    pub fx: PathBuf,
    pub rights_holders: PathBuf,
    pub window_days: u32,
    pub probe_posts: usize,
    pub hydrate_posts: usize,
    pub max_depth: u8,
    pub parse_mentions: bool,
    pub retry_attempts: usize,
    /// Higher-order composites sampled during handle synthesis.
    pub k_higher: usize,
    pub match_threshold: f64,
    pub classifier: ClassifierSpec,
    pub report_mode: ReportMode,
    pub report_variant: ReportVariant,
    /// Reserved; stages currently run sequentially.
    pub parallelism: usize,
    pub tracking_window_days: u32,
    /// Daily tracking probes performed by the track stage.
    pub track_passes: u32,
    /// Scripted simulator enforcement: fraction of tracked entities deleted
    /// before the first tracking pass. 0 disables.
    pub enforcement_fraction: f64,
    /// Scripted partial enforcement: fraction of each surviving channel's
    /// reported posts replaced with removal markers.
    pub enforcement_post_fraction: f64,
    pub sim: SimSource,
    pub sim_channels: usize,
    pub sim_bots: usize,
    pub sim_benign_fraction: f64,
    pub sim_invite_only: usize,
    pub sim_discoverable_fraction: f64,
    pub sim_emerging_fraction: f64,
    pub sim_dangling_rate: f64,
    pub sim_posts_min: usize,
    pub sim_posts_max: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            out_dir: PathBuf::from("runs"),
            seed: 42,
            now: 1_767_225_600,
            lexicon: PathBuf::from("data/lexicon.txt"),
            catalog: PathBuf::from("data/fixture_catalog.jsonl"),
            pricing: PathBuf::from("data/pricing.jsonl"),
            fx: PathBuf::from("data/fx.json"),
            rights_holders: PathBuf::from("data/rights_holders.json"),
            window_days: 7,
            probe_posts: 10,
            hydrate_posts: 500,
            max_depth: 2,
            parse_mentions: true,
            retry_attempts: 3,
            k_higher: 200,
            match_threshold: crate::catalog::DEFAULT_MATCH_THRESHOLD,
            classifier: ClassifierSpec::Rules,
            report_mode: ReportMode::Batched,
            report_variant: ReportVariant::Contextual,
            parallelism: 1,
            tracking_window_days: crate::report::TRACKING_WINDOW_DAYS,
            track_passes: 3,
            enforcement_fraction: 0.0,
            enforcement_post_fraction: 0.0,
            sim: SimSource::Generate,
            sim_channels: 30,
            sim_bots: 5,
            sim_benign_fraction: 0.3,
            sim_invite_only: 0,
            sim_discoverable_fraction: 0.4,
            sim_emerging_fraction: 0.8,
            sim_dangling_rate: 0.15,
            sim_posts_min: 12,
            sim_posts_max: 30,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| ConfigError::Invalid {
        key: key.to_string(),
        message: format!("{e}"),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(ConfigError::Invalid {
            key: key.to_string(),
            message: format!("expected bool, got {other:?}"),
        }),
    }
}

fn parse_fraction(key: &str, value: &str) -> Result<f64, ConfigError> {
    let f: f64 = parse_num(key, value)?;
    if !(0.0..=1.0).contains(&f) {
        return Err(ConfigError::Invalid {
            key: key.to_string(),
            message: format!("{f} outside [0, 1]"),
        });
    }
    Ok(f)
}

impl PipelineConfig {
    /// Apply one `key = value` assignment (file line or CLI override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "out_dir" => self.out_dir = PathBuf::from(v),
            "seed" => self.seed = parse_num(key, v)?,
            "now" => self.now = parse_num(key, v)?,
            "lexicon" => self.lexicon = PathBuf::from(v),
            "catalog" => self.catalog = PathBuf::from(v),
            "pricing" => self.pricing = PathBuf::from(v),
            "fx" => self.fx = PathBuf::from(v),
            "rights_holders" => self.rights_holders = PathBuf::from(v),
            "window_days" => self.window_days = parse_num(key, v)?,
            "probe_posts" => self.probe_posts = parse_num(key, v)?,
            "hydrate_posts" => self.hydrate_posts = parse_num(key, v)?,
            "max_depth" => self.max_depth = parse_num(key, v)?,
            "parse_mentions" => self.parse_mentions = parse_bool(key, v)?,
            "retry_attempts" => self.retry_attempts = parse_num(key, v)?,
            "k_higher" => self.k_higher = parse_num(key, v)?,
            "match_threshold" => self.match_threshold = parse_fraction(key, v)?,
            "classifier" => {
                self.classifier = if v == "rules" {
                    ClassifierSpec::Rules
                } else if let Some(cmd) = v.strip_prefix("adapter:") {
                    ClassifierSpec::Subprocess(cmd.trim().to_string())
                } else if let Some(url) = v.strip_prefix("http:") {
                    ClassifierSpec::Http(format!("http:{}", url.trim()))
                } else {
                    return Err(ConfigError::Invalid {
                        key: key.to_string(),
                        message: format!("{v:?} (want rules | adapter:<cmd> | http://<url>)"),
                    });
                }
            }
            "report_mode" => {
                self.report_mode = v.parse().map_err(|e| ConfigError::Invalid {
                    key: key.to_string(),
                    message: e,
                })?
            }
            "report_variant" => {
                self.report_variant = v.parse().map_err(|e| ConfigError::Invalid {
                    key: key.to_string(),
                    message: e,
                })?
            }
            "parallelism" => {
                self.parallelism = parse_num(key, v)?;
                if self.parallelism == 0 {
                    return Err(ConfigError::Invalid {
                        key: key.to_string(),
                        message: "must be >= 1".into(),
                    });
                }
            }
            "tracking_window_days" => self.tracking_window_days = parse_num(key, v)?,
            "track_passes" => self.track_passes = parse_num(key, v)?,
            "enforcement_fraction" => self.enforcement_fraction = parse_fraction(key, v)?,
            "enforcement_post_fraction" => {
                self.enforcement_post_fraction = parse_fraction(key, v)?
            }
            "sim" => {
                self.sim = if v == "generate" {
                    SimSource::Generate
                } else if let Some(dir) = v.strip_prefix("dir:") {
                    SimSource::Dir(PathBuf::from(dir.trim()))
                } else {
                    return Err(ConfigError::Invalid {
                        key: key.to_string(),
                        message: format!("{v:?} (want generate | dir:<path>)"),
                    });
                }
            }
            "sim_channels" => self.sim_channels = parse_num(key, v)?,
            "sim_bots" => self.sim_bots = parse_num(key, v)?,
            "sim_benign_fraction" => self.sim_benign_fraction = parse_fraction(key, v)?,
            "sim_invite_only" => self.sim_invite_only = parse_num(key, v)?,
            "sim_discoverable_fraction" => {
                self.sim_discoverable_fraction = parse_fraction(key, v)?
            }
            "sim_emerging_fraction" => self.sim_emerging_fraction = parse_fraction(key, v)?,
            "sim_dangling_rate" => self.sim_dangling_rate = parse_fraction(key, v)?,
            "sim_posts_min" => self.sim_posts_min = parse_num(key, v)?,
            "sim_posts_max" => self.sim_posts_max = parse_num(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parse a config file body. Lines are `key = value`; `#` starts a
    /// comment; blank lines are ignored.
    pub fn apply_str(&mut self, body: &str) -> Result<(), ConfigError> {
        for (i, raw) in body.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, got: raw.to_string() });
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Defaults, then the optional file, then overrides in order.
    pub fn load(
        path: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<PipelineConfig, ConfigError> {
        let mut cfg = PipelineConfig::default();
        if let Some(p) = path {
            let body = fs::read_to_string(p)
                .map_err(|source| ConfigError::Io { path: p.to_path_buf(), source })?;
            cfg.apply_str(&body)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Resolved key/value pairs, sorted by key. This is the canonical form
    /// everything else (hash, run id, artifact headers) derives from.
    pub fn entries(&self) -> Vec<(String, String)> {
        let classifier = match &self.classifier {
            ClassifierSpec::Rules => "rules".to_string(),
            ClassifierSpec::Subprocess(cmd) => format!("adapter:{cmd}"),
            ClassifierSpec::Http(url) => url.clone(),
        };
        let report_mode = match self.report_mode {
            ReportMode::Event => "event",
            ReportMode::Batched => "batched",
        };
        let report_variant = match self.report_variant {
            ReportVariant::Contextual => "contextual",
            ReportVariant::UrlOnly => "url_only",
        };
        let sim = match &self.sim {
            SimSource::Generate => "generate".to_string(),
            SimSource::Dir(d) => format!("dir:{}", d.display()),
        };
        let mut out: Vec<(String, String)> = vec![
            ("out_dir", self.out_dir.display().to_string()),
            ("seed", self.seed.to_string()),
            ("now", self.now.to_string()),
            ("lexicon", self.lexicon.display().to_string()),
            ("catalog", self.catalog.display().to_string()),
            ("pricing", self.pricing.display().to_string()),
            ("fx", self.fx.display().to_string()),
            ("rights_holders", self.rights_holders.display().to_string()),
            ("window_days", self.window_days.to_string()),
            ("probe_posts", self.probe_posts.to_string()),
            ("hydrate_posts", self.hydrate_posts.to_string()),
            ("max_depth", self.max_depth.to_string()),
            ("parse_mentions", self.parse_mentions.to_string()),
            ("retry_attempts", self.retry_attempts.to_string()),
            ("k_higher", self.k_higher.to_string()),
            ("match_threshold", self.match_threshold.to_string()),
            ("classifier", classifier),
            ("report_mode", report_mode.to_string()),
            ("report_variant", report_variant.to_string()),
            ("parallelism", self.parallelism.to_string()),
            ("tracking_window_days", self.tracking_window_days.to_string()),
            ("track_passes", self.track_passes.to_string()),
            ("enforcement_fraction", self.enforcement_fraction.to_string()),
            ("enforcement_post_fraction", self.enforcement_post_fraction.to_string()),
            ("sim", sim),
            ("sim_channels", self.sim_channels.to_string()),
            ("sim_bots", self.sim_bots.to_string()),
            ("sim_benign_fraction", self.sim_benign_fraction.to_string()),
            ("sim_invite_only", self.sim_invite_only.to_string()),
            ("sim_discoverable_fraction", self.sim_discoverable_fraction.to_string()),
            ("sim_emerging_fraction", self.sim_emerging_fraction.to_string()),
            ("sim_dangling_rate", self.sim_dangling_rate.to_string()),
            ("sim_posts_min", self.sim_posts_min.to_string()),
            ("sim_posts_max", self.sim_posts_max.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        out.sort();
        out
    }

    /// Canonical text of the run identity: every entry except `out_dir`, so
    /// identical runs written to different places share an id.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            if k == "out_dir" {
                continue;
            }
            s.push_str(&k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_id(&self) -> String {
        self.config_hash()[..12].to_string()
    }

    /// The input paths every full run needs; checked at pipeline start.
    pub fn validate_paths(&self) -> Result<(), ConfigError> {
        let mut required: Vec<(&str, &Path)> = vec![
            ("lexicon", &self.lexicon),
            ("catalog", &self.catalog),
            ("pricing", &self.pricing),
            ("fx", &self.fx),
            ("rights_holders", &self.rights_holders),
        ];
        if let SimSource::Dir(d) = &self.sim {
            required.push(("sim", d));
        }
        for (key, path) in required {
            if !path.exists() {
                return Err(ConfigError::MissingPath {
                    key: key.to_string(),
                    path: path.to_path_buf(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for (k, _) in self.entries() {
            assert!(seen.insert(k), "duplicate config key");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_published_values() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.window_days, 7);
        assert_eq!(cfg.probe_posts, 10);
        assert_eq!(cfg.hydrate_posts, 500);
        assert_eq!(cfg.max_depth, 2);
        assert_eq!(cfg.tracking_window_days, 14);
        assert_eq!(cfg.classifier, ClassifierSpec::Rules);
        assert_eq!(cfg.report_mode, ReportMode::Batched);
    }

    #[test]
    fn file_then_overrides_win_in_order() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_str(
            "# demo config\n\
             seed = 7\n\
             window_days = 3   # trailing comment\n\
             classifier = adapter: my-model --fast\n\
             sim = dir: /tmp/eco\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.window_days, 3);
        assert_eq!(cfg.classifier, ClassifierSpec::Subprocess("my-model --fast".into()));
        assert_eq!(cfg.sim, SimSource::Dir(PathBuf::from("/tmp/eco")));
        cfg.set("seed", "9").unwrap();
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_keys_and_bad_values_error() {
        let mut cfg = PipelineConfig::default();
        assert!(matches!(cfg.set("sed", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(cfg.set("seed", "x"), Err(ConfigError::Invalid { .. })));
        assert!(matches!(
            cfg.set("enforcement_fraction", "1.5"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(
            cfg.apply_str("probe_posts 10\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(cfg.set("parallelism", "0"), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn run_id_ignores_out_dir_but_tracks_everything_else() {
        let mut a = PipelineConfig::default();
        let mut b = PipelineConfig::default();
        b.set("out_dir", "elsewhere").unwrap();
        assert_eq!(a.run_id(), b.run_id());
        assert_eq!(a.run_id().len(), 12);
        a.set("seed", "43").unwrap();
        assert_ne!(a.run_id(), b.run_id());
        b.set("seed", "43").unwrap();
        assert_eq!(a.run_id(), b.run_id());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn validate_paths_reports_the_missing_one() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::default();
        for key in ["lexicon", "catalog", "pricing", "fx", "rights_holders"] {
            let p = dir.path().join(key);
            std::fs::write(&p, "x").unwrap();
            cfg.set(key, p.to_str().unwrap()).unwrap();
        }
        cfg.validate_paths().unwrap();
        cfg.set("pricing", dir.path().join("nope").to_str().unwrap()).unwrap();
        match cfg.validate_paths() {
            Err(ConfigError::MissingPath { key, .. }) => assert_eq!(key, "pricing"),
            other => panic!("expected MissingPath, got {other:?}"),
        }
    }
}
