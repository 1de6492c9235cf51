//! Plain-text model files. Floats are written in shortest round-trip form,
//! so a saved model reloads bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{Architecture, ModelSpec, Network, NeuralError, ParamSet, Tensor};

const MAGIC: &str = "cognate-model 1";

pub fn to_checkpoint_text(net: &Network) -> String {
    let s = net.spec();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "architecture {}", s.architecture.name());
    let _ = writeln!(out, "conv_filters {}", s.conv_filters);
    let _ = writeln!(out, "kernel {} {}", s.kernel.0, s.kernel.1);
    let _ = writeln!(out, "pool {} {}", s.pool.0, s.pool.1);
    let _ = writeln!(out, "fc_units {}", s.fc_units);
    let _ = writeln!(out, "dropout_rate {:?}", s.dropout_rate);
    let _ = writeln!(out, "pad_len {}", s.pad_len);
    for (name, t) in net.params().iter() {
        let dims: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "tensor {name} {}", dims.join(" "));
        let vals: Vec<String> = t.data().iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    out
}

pub fn save_checkpoint(net: &Network, path: &Path) -> Result<(), NeuralError> {
    std::fs::write(path, to_checkpoint_text(net)).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))
}

pub fn load_checkpoint(path: &Path) -> Result<Network, NeuralError> {
    let text = std::fs::read_to_string(path).map_err(|e| NeuralError::Io(format!("{}: {e}", path.display())))?;
    parse_checkpoint(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, reason: impl Into<String>) -> NeuralError {
        NeuralError::Checkpoint {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next_line(&mut self) -> Option<&'a str> {
        let (i, l) = self.inner.next()?;
        self.line = i + 1;
        Some(l)
    }

    fn field(&mut self, key: &str) -> Result<Vec<&'a str>, NeuralError> {
        let l = self.next_line().ok_or_else(|| self.err(format!("missing `{key}`")))?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(parts.collect())
    }

    fn usizes<const N: usize>(&mut self, key: &str) -> Result<[usize; N], NeuralError> {
        let vals = self.field(key)?;
        let parsed: Result<Vec<usize>, _> = vals.iter().map(|v| v.parse()).collect();
        match parsed {
            Ok(v) if v.len() == N => Ok(v.try_into().expect("length checked")),
            _ => Err(self.err(format!("`{key}` needs {N} integer(s)"))),
        }
    }
}

pub fn parse_checkpoint(text: &str) -> Result<Network, NeuralError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    if lines.next_line() != Some(MAGIC) {
        return Err(lines.err("not a model file"));
    }
    let arch = lines.field("architecture")?;
    let architecture = arch
        .first()
        .and_then(|a| Architecture::from_name(a))
        .ok_or_else(|| lines.err("unknown architecture"))?;
    let [conv_filters] = lines.usizes("conv_filters")?;
    let kernel = lines.usizes::<2>("kernel")?;
    let pool = lines.usizes::<2>("pool")?;
    let [fc_units] = lines.usizes("fc_units")?;
    let dropout_rate = lines
        .field("dropout_rate")?
        .first()
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| lines.err("bad dropout_rate"))?;
    let [pad_len] = lines.usizes("pad_len")?;
    let spec = ModelSpec {
        architecture,
        conv_filters,
        kernel: (kernel[0], kernel[1]),
        pool: (pool[0], pool[1]),
        fc_units,
        dropout_rate,
        pad_len,
    };
    let mut entries = Vec::new();
    while let Some(header) = lines.next_line() {
        if header.trim().is_empty() {
            continue;
        }
        let mut parts = header.split_whitespace();
        if parts.next() != Some("tensor") {
            return Err(lines.err("expected `tensor`"));
        }
        let name = parts.next().ok_or_else(|| lines.err("tensor without a name"))?.to_string();
        let shape: Vec<usize> = parts
            .map(|d| d.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| lines.err("bad tensor shape"))?;
        let body = lines.next_line().ok_or_else(|| lines.err("missing tensor values"))?;
        let values: Vec<f64> = body
            .split_whitespace()
            .map(|v| v.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| lines.err("bad tensor value"))?;
        let t = Tensor::from_vec(&shape, values).map_err(|e| lines.err(e.to_string()))?;
        entries.push((name, t));
    }
    Network::from_params(spec, ParamSet::new(entries))
}
