use crate::error::{PolicyError, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const HEADS: usize = 4;
pub const LAYERS: usize = 3;

/// Which attention weights the decoder recomputes after each action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    /// Unlabeled neighbours of the last labeled node.
    #[default]
    Local,
    /// Nothing after the first step.
    Static,
    /// Every unlabeled node.
    Global,
}

impl DecodeMode {
    pub const ALL: [DecodeMode; 3] = [DecodeMode::Local, DecodeMode::Static, DecodeMode::Global];

    pub fn name(&self) -> &'static str {
        match self {
            DecodeMode::Local => "local",
            DecodeMode::Static => "static",
            DecodeMode::Global => "global",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecodeMode {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self> {
        DecodeMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| PolicyError::Usage(format!("unknown decode mode `{s}`")))
    }
}

fn default_d() -> usize {
    64
}
fn default_d_in() -> usize {
    nodelab_core::features::DEFAULT_FEATURE_DIM
}
fn default_context() -> usize {
    1
}
fn default_clip() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_d_in")]
    pub d_in: usize,
    /// Number of recent steps in the context embedding.
    #[serde(default = "default_context")]
    pub context_size: usize,
    /// Attention weights lie in `[-clip, clip]`.
    #[serde(default = "default_clip")]
    pub clip: f64,
    #[serde(default)]
    pub decode_mode: DecodeMode,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            d: default_d(),
            d_in: default_d_in(),
            context_size: default_context(),
            clip: default_clip(),
            decode_mode: DecodeMode::Local,
        }
    }
}

impl Hyper {
    pub fn with_dim(d: usize) -> Self {
        Hyper { d, ..Hyper::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d % HEADS != 0 {
            return Err(PolicyError::Config(format!("d must be a positive multiple of {HEADS}, got {}", self.d)));
        }
        if self.d_in == 0 || self.d_in % 2 != 0 {
            return Err(PolicyError::Config(format!("d_in must be positive and even, got {}", self.d_in)));
        }
        if self.context_size == 0 {
            return Err(PolicyError::Config("context size must be at least 1".into()));
        }
        if !(self.clip > 0.0) {
            return Err(PolicyError::Config("clip must be positive".into()));
        }
        Ok(())
    }

    /// Width of the context embedding, `(2K + 1) d`.
    pub fn context_width(&self) -> usize {
        (2 * self.context_size + 1) * self.d
    }
}
