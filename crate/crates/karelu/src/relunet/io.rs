//! Network file format.
//!
//! Top-level JSON object:
//! - `architecture`: integer list (p_0, ..., p_{L+1})
//! - `layers`: array of `{ "weights": [[...]], "bias": [...], "activation": "relu"|"identity" }`
//!   with `weights` row-major (one row per output unit)
//! - `meta`: `{ "function", "d", "k", "p", "beta", "q", "r", "builder_version", "seed" }`
//!
//! Binary64 values are written as shortest round-trip decimals, so a
//! save/load cycle is bit-exact.

use super::{Activation, Layer, NetError, ReluNetwork};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

/// Network files written by older builder versions are rejected on load.
pub const BUILDER_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum NetIoError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid json in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("unknown activation {0:?}")]
    UnknownActivation(String),
    #[error("stored architecture {stored:?} does not match layers {actual:?}")]
    ArchitectureMismatch {
        stored: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("unsupported builder version {0:?}")]
    BuilderVersion(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Provenance of a built network: enough to rebuild it bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub function: String,
    pub d: usize,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub r: i32,
    pub builder_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct FileLayer {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: String,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    architecture: Vec<usize>,
    layers: Vec<FileLayer>,
    meta: NetworkMeta,
}

pub fn save_network(
    path: impl AsRef<Path>,
    net: &ReluNetwork,
    meta: &NetworkMeta,
) -> Result<(), NetIoError> {
    let path = path.as_ref();
    let file = NetworkFile {
        architecture: net.architecture().widths,
        layers: net
            .layers()
            .iter()
            .map(|l| FileLayer {
                weights: l.weights.clone(),
                bias: l.bias.clone(),
                activation: match l.activation {
                    Activation::Relu => "relu".to_string(),
                    Activation::Identity => "identity".to_string(),
                },
            })
            .collect(),
        meta: meta.clone(),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|source| NetIoError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, json).map_err(|source| NetIoError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_network(path: impl AsRef<Path>) -> Result<(ReluNetwork, NetworkMeta), NetIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| NetIoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: NetworkFile = serde_json::from_str(&text).map_err(|source| NetIoError::Json {
        path: path.display().to_string(),
        source,
    })?;
    if file.meta.builder_version != BUILDER_VERSION {
        return Err(NetIoError::BuilderVersion(file.meta.builder_version));
    }
    let layers = file
        .layers
        .into_iter()
        .map(|l| {
            let activation = match l.activation.as_str() {
                "relu" => Activation::Relu,
                "identity" => Activation::Identity,
                other => return Err(NetIoError::UnknownActivation(other.to_string())),
            };
            Ok(Layer {
                weights: l.weights,
                bias: l.bias,
                activation,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let input_width = *file.architecture.first().unwrap_or(&0);
    let net = ReluNetwork::new(input_width, layers)?;
    let actual = net.architecture().widths;
    if actual != file.architecture {
        return Err(NetIoError::ArchitectureMismatch {
            stored: file.architecture,
            actual,
        });
    }
    Ok((net, file.meta))
}
