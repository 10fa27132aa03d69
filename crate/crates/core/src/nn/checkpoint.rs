//! Lossless text checkpoints: configuration plus every parameter tensor,
//! values written as hexadecimal IEEE-754 bit patterns.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::NetConfig;
use super::net::{MultiTaskNet, TargetScaler};
use super::tensor::Tensor;
use crate::spectral::HksConfig;
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ParamRecord {
    name: String,
    shape: Vec<usize>,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ScalerRecord {
    mean: String,
    std: String,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    format_version: u32,
    config: NetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hks: Option<HksConfig>,
    scalers: Vec<ScalerRecord>,
    params: Vec<ParamRecord>,
}

fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn unhex(s: &str) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|e| Error::Data(format!("bad float bit pattern {s:?}: {e}")))
}

/// Serializes `net` and the featurization it expects.
pub fn checkpoint_to_string(net: &MultiTaskNet, hks: Option<&HksConfig>) -> String {
    let doc = CheckpointDoc {
        format_version: CHECKPOINT_FORMAT_VERSION,
        config: net.config().clone(),
        hks: hks.copied(),
        scalers: net
            .scalers()
            .iter()
            .map(|s| ScalerRecord {
                mean: hex(s.mean),
                std: hex(s.std),
            })
            .collect(),
        params: net
            .param_names()
            .iter()
            .zip(net.params())
            .map(|(name, t)| ParamRecord {
                name: name.clone(),
                shape: t.shape().to_vec(),
                values: t.data().iter().map(|&x| hex(x)).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("checkpoint serializes")
}

pub fn checkpoint_from_str(text: &str) -> Result<(MultiTaskNet, Option<HksConfig>)> {
    let doc: CheckpointDoc =
        serde_json::from_str(text).map_err(|e| Error::Data(format!("malformed checkpoint: {e}")))?;
    if doc.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Data(format!(
            "unsupported checkpoint version {}",
            doc.format_version
        )));
    }
    let fresh = MultiTaskNet::new(doc.config.clone())?;
    if doc.params.len() != fresh.param_names().len() {
        return Err(Error::Data(format!(
            "checkpoint has {} tensors, configuration needs {}",
            doc.params.len(),
            fresh.param_names().len()
        )));
    }
    let mut params = Vec::with_capacity(doc.params.len());
    for (record, expected) in doc.params.iter().zip(fresh.param_names()) {
        if &record.name != expected {
            return Err(Error::Data(format!(
                "tensor {} found where {expected} was expected",
                record.name
            )));
        }
        let values = record.values.iter().map(|s| unhex(s)).collect::<Result<Vec<_>>>()?;
        params.push(Tensor::from_vec(&record.shape, values)?);
    }
    let scalers = doc
        .scalers
        .iter()
        .map(|s| Ok(TargetScaler { mean: unhex(&s.mean)?, std: unhex(&s.std)? }))
        .collect::<Result<Vec<_>>>()?;
    let net = MultiTaskNet::from_parts(doc.config, params, scalers)?;
    Ok((net, doc.hks))
}

pub fn save_checkpoint(net: &MultiTaskNet, hks: Option<&HksConfig>, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(net, hks)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(MultiTaskNet, Option<HksConfig>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text)
}
