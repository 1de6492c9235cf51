//! `key = value` settings grouped by `[section]`, with defaults and
//! command-line overrides.

use std::collections::BTreeMap;

use cognate::data::{PairOptions, SplitMode, SplitSpec};
use cognate::eval::Combine;
use cognate::experiment::{ExperimentConfig, System};
use cognate::neural::{AdadeltaConfig, ModelSpec, TrainConfig};
use cognate::pmi::PmiConfig;
use cognate::svm::SvmConfig;

use crate::CliError;

/// Every recognized key and its default; `None` means required.
const KEYS: &[(&str, Option<&str>)] = &[
    ("eval.combine", Some("weighted")),
    ("model.conv_filters", Some("10")),
    ("model.dropout_rate", Some("0.5")),
    ("model.fc_units", Some("8")),
    ("model.kernel", Some("2x3")),
    ("model.pad_len", Some("10")),
    ("model.pool", Some("2x2")),
    ("pmi.cutoff", Some("0.5")),
    ("pmi.gap", Some("-2.5")),
    ("pmi.max_iterations", Some("10")),
    ("pmi.pseudocount", Some("1")),
    ("pmi.tolerance", Some("1e-4")),
    ("run.seed", None),
    ("run.system", Some("MANHATTAN")),
    ("split.include_same_language", Some("false")),
    ("split.mode", Some("cross-concept")),
    ("split.test_families", Some("")),
    ("split.train_families", Some("")),
    ("split.train_fraction", Some("0.7")),
    ("svm.c_grid", Some("0.01,0.1,1,10,100")),
    ("svm.folds", Some("10")),
    ("svm.iterations", Some("2000")),
    ("train.batch_size", Some("128")),
    ("train.epochs", Some("20")),
    ("train.margin", Some("1.0")),
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Settings {
    /// Reads an INI-like file: `[section]` headers, `key = value` lines,
    /// `#` or `;` comments.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected `key = value`", i + 1)))?;
            if section.is_empty() {
                return Err(usage(format!("config line {}: key outside a [section]", i + 1)));
            }
            settings.set(&format!("{section}.{}", key.trim()), value.trim())?;
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !known(key) {
            return Err(usage(format!("unknown setting `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("override `{pair}` is not section.key=value")))?;
        self.set(k.trim(), v.trim())
    }

    fn get(&self, key: &str) -> Result<&str, CliError> {
        if let Some(v) = self.values.get(key) {
            return Ok(v);
        }
        match KEYS.iter().find(|(k, _)| *k == key) {
            Some((_, Some(default))) => Ok(default),
            _ => Err(usage(format!("missing required setting `{key}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| usage(format!("invalid value `{raw}` for `{key}`")))
    }

    fn pair(&self, key: &str) -> Result<(usize, usize), CliError> {
        let raw = self.get(key)?;
        let bad = || usage(format!("`{key}` must look like 2x3, got `{raw}`"));
        let (a, b) = raw.split_once('x').ok_or_else(bad)?;
        Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
    }

    fn list(&self, key: &str) -> Result<Vec<String>, CliError> {
        Ok(self
            .get(key)?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect())
    }

    /// All settings with defaults filled in, one `key = value` per line.
    pub fn resolved(&self) -> String {
        KEYS.iter()
            .map(|(k, _)| format!("{k} = {}\n", self.get(k).unwrap_or("<unset>")))
            .collect()
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parsed("run.seed")
    }

    pub fn system(&self) -> Result<System, CliError> {
        let raw = self.get("run.system")?;
        System::from_name(raw).ok_or_else(|| usage(format!("unknown system `{raw}`")))
    }

    pub fn pmi(&self) -> Result<PmiConfig, CliError> {
        Ok(PmiConfig {
            initial_cutoff: self.parsed("pmi.cutoff")?,
            max_iterations: self.parsed("pmi.max_iterations")?,
            convergence_tol: self.parsed("pmi.tolerance")?,
            pseudocount: self.parsed("pmi.pseudocount")?,
            gap_penalty: self.parsed("pmi.gap")?,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let seed = self.seed()?;
        let system = self.system()?;
        let mode = match self.get("split.mode")? {
            "cross-concept" => SplitMode::CrossConcept,
            "cross-family" => SplitMode::CrossFamily,
            other => return Err(usage(format!("unknown split mode `{other}`"))),
        };
        let combine = match self.get("eval.combine")? {
            "weighted" => Combine::SupportWeighted,
            "unweighted" => Combine::Unweighted,
            other => return Err(usage(format!("unknown combine rule `{other}`"))),
        };
        let c_grid = self
            .list("svm.c_grid")?
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| usage(format!("invalid C value `{c}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut config = ExperimentConfig::new(system, seed);
        config.split = SplitSpec {
            mode,
            train_fraction: self.parsed("split.train_fraction")?,
            seed,
        };
        config.train_families = self.list("split.train_families")?;
        config.test_families = self.list("split.test_families")?;
        config.pairs = PairOptions {
            include_same_language: self.parsed("split.include_same_language")?,
        };
        config.c_grid = c_grid;
        config.combine = combine;
        config.folds = self.parsed("svm.folds")?;
        config.svm = SvmConfig {
            iterations: self.parsed("svm.iterations")?,
            ..SvmConfig::default()
        };
        config.pmi = self.pmi()?;
        config.model = ModelSpec {
            architecture: config.model.architecture,
            conv_filters: self.parsed("model.conv_filters")?,
            kernel: self.pair("model.kernel")?,
            pool: self.pair("model.pool")?,
            fc_units: self.parsed("model.fc_units")?,
            dropout_rate: self.parsed("model.dropout_rate")?,
            pad_len: self.parsed("model.pad_len")?,
        };
        config.model.plan().map_err(|e| usage(e.to_string()))?;
        config.train = TrainConfig {
            epochs: self.parsed("train.epochs")?,
            batch_size: self.parsed("train.batch_size")?,
            margin: self.parsed("train.margin")?,
            seed,
            optimizer: AdadeltaConfig::default(),
        };
        config.pmi.validate().map_err(|e| usage(e.to_string()))?;
        if config.train.batch_size == 0 {
            return Err(usage("train.batch_size must be positive"));
        }
        Ok(config)
    }
}
