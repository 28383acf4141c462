//! Versioned JSON dump of a network. Floats are written in shortest
//! round-trip form, so a reloaded network reproduces outputs bit-for-bit.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::network::{DenseLayer, DenseNetwork, OutputActivation};

const FORMAT: &str = "mcmo-dense-network";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerDump {
    fan_in: usize,
    fan_out: usize,
    /// Row-major `(fan_in, fan_out)`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDump {
    format: String,
    version: u32,
    widths: Vec<usize>,
    leaky_slope: f64,
    output: OutputActivation,
    layers: Vec<LayerDump>,
}

pub fn to_json(net: &DenseNetwork) -> String {
    let dump = NetworkDump {
        format: FORMAT.into(),
        version: VERSION,
        widths: net.widths().to_vec(),
        leaky_slope: net.leaky_slope(),
        output: net.output_activation(),
        layers: net
            .layers()
            .iter()
            .map(|l| LayerDump {
                fan_in: l.weights.nrows(),
                fan_out: l.weights.ncols(),
                weights: l.weights.iter().copied().collect(),
                bias: l.bias.to_vec(),
            })
            .collect(),
    };
    serde_json::to_string(&dump).expect("network dump is plain data")
}

pub fn from_json(text: &str) -> Result<DenseNetwork> {
    let dump: NetworkDump = serde_json::from_str(text).map_err(|source| Error::Json {
        context: "network checkpoint".into(),
        source,
    })?;
    if dump.format != FORMAT || dump.version != VERSION {
        return Err(Error::Config(format!(
            "unsupported checkpoint {} v{}",
            dump.format, dump.version
        )));
    }
    let layers = dump
        .layers
        .into_iter()
        .map(|l| {
            let weights = Array2::from_shape_vec((l.fan_in, l.fan_out), l.weights)
                .map_err(|e| Error::Config(format!("checkpoint layer shape: {e}")))?;
            Ok(DenseLayer {
                weights,
                bias: Array1::from_vec(l.bias),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DenseNetwork::from_parts(dump.widths, layers, dump.leaky_slope, dump.output)
}

pub fn save(net: &DenseNetwork, path: &Path) -> Result<()> {
    fs::write(path, to_json(net)).map_err(|e| Error::io(format!("write {}", path.display()), e))
}

pub fn load(path: &Path) -> Result<DenseNetwork> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(format!("read {}", path.display()), e))?;
    from_json(&text)
}
