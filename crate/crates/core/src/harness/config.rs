use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::DirectionPolicy;
use crate::neuralnet::AdamConfig;
use crate::representations::{CharConfig, PositionChannel};

use super::HarnessError;

/// One channel of a stack as written in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Pretrained text-format table.
    Static { path: PathBuf },
    /// Random vectors for the training vocabulary, uniform(-0.25, 0.25).
    RandomStatic { dim: usize, seed: u64 },
    /// CTXV1 sidecar.
    Contextual { path: PathBuf },
    Position {
        #[serde(default = "default_max_dist")]
        max_dist: usize,
        #[serde(default = "default_pos_dim")]
        dim: usize,
    },
    /// One-hot POS tags from the `pos_tags` sidecar.
    Pos {
        #[serde(default)]
        tagset: Option<Vec<String>>,
    },
    Char {
        #[serde(default)]
        char_dim: Option<usize>,
        #[serde(default)]
        conv_width: Option<usize>,
        #[serde(default)]
        out_dim: Option<usize>,
    },
}

fn default_max_dist() -> usize {
    PositionChannel::default().max_dist
}

fn default_pos_dim() -> usize {
    PositionChannel::default().dim_per_nominal
}

impl ChannelSpec {
    pub fn char_config(&self) -> Option<CharConfig> {
        match *self {
            ChannelSpec::Char { char_dim, conv_width, out_dim } => {
                let d = CharConfig::default();
                Some(CharConfig {
                    char_dim: char_dim.unwrap_or(d.char_dim),
                    conv_width: conv_width.unwrap_or(d.conv_width),
                    out_dim: out_dim.unwrap_or(d.out_dim),
                })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub name: String,
    pub channels: Vec<ChannelSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnOverrides {
    pub filter_widths: Option<Vec<usize>>,
    pub filters_per_width: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub dropout_rate: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub batch_size: Option<usize>,
    /// Unset: 70 for stacks with a contextual channel, 120 otherwise.
    pub epochs: Option<usize>,
    pub shuffle_each_epoch: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    /// Explicit dev set; when absent, dev is split off train.
    pub dev: Option<PathBuf>,
    pub pos_tags: Option<PathBuf>,
    pub dev_fraction: f64,
    pub split_seed: u64,
    pub direction_policy: DirectionPolicy,
    pub keep_other: bool,
    pub sentence_len: usize,
    pub oov_seed: u64,
    pub stacks: Vec<StackSpec>,
    pub cnn: CnnOverrides,
    pub adam: AdamConfig,
    pub training: TrainOverrides,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: PathBuf::new(),
            test: PathBuf::new(),
            dev: None,
            pos_tags: None,
            dev_fraction: 0.1,
            split_seed: 0,
            direction_policy: DirectionPolicy::Collapse,
            keep_other: true,
            sentence_len: 100,
            oov_seed: 0,
            stacks: Vec::new(),
            cnn: CnnOverrides::default(),
            adam: AdamConfig::default(),
            training: TrainOverrides::default(),
            seeds: (1..=10).collect(),
            out: PathBuf::from("runs"),
            workers: None,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.as_os_str().is_empty() || p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Load a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        self.train = resolve(base, &self.train);
        self.test = resolve(base, &self.test);
        self.dev = self.dev.as_ref().map(|p| resolve(base, p));
        self.pos_tags = self.pos_tags.as_ref().map(|p| resolve(base, p));
        self.out = resolve(base, &self.out);
        for stack in &mut self.stacks {
            for ch in &mut stack.channels {
                match ch {
                    ChannelSpec::Static { path } | ChannelSpec::Contextual { path } => *path = resolve(base, path),
                    _ => {}
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return bad(format!("duplicate seed {s}"));
        }
        if self.stacks.is_empty() {
            return bad("at least one stack is required".into());
        }
        let mut names = std::collections::HashSet::new();
        for s in &self.stacks {
            if s.channels.is_empty() {
                return bad(format!("stack {:?} has no channels", s.name));
            }
            if s.name.is_empty() || s.name.contains([',', '/', '\\', '\n']) {
                return bad(format!("stack name {:?} must be non-empty without , / \\", s.name));
            }
            if !names.insert(&s.name) {
                return bad(format!("duplicate stack name {:?}", s.name));
            }
        }
        if self.sentence_len == 0 {
            return bad("sentence_len must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }

    pub fn stack(&self, name: Option<&str>) -> Result<usize, HarnessError> {
        match name {
            None => Ok(0),
            Some(n) => self
                .stacks
                .iter()
                .position(|s| s.name == n)
                .ok_or_else(|| HarnessError::Config(format!("no stack named {n:?}"))),
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring `out` and `workers`,
    /// which do not change results.
    pub fn digest(&self) -> String {
        let canonical = RunConfig { out: PathBuf::new(), workers: None, ..self.clone() };
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
