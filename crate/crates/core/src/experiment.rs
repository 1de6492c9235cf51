//! End-to-end runs: split a word list, train one system, score held-out
//! pairs and evaluate.

use crate::data::{self, DataError, Lexeme, PairOptions, SplitSpec, WordPair};
use crate::eval::{self, Combine, EvalError, EvalReport};
use crate::neural::{self, Architecture, ModelSpec, Network, NeuralError, Sample, TrainConfig, TrainReport};
use crate::phoneme::word_to_matrix;
use crate::pmi::{estimate_pmi, pmi_features, PmiConfig, PmiError, PmiEstimate, PmiMatrix};
use crate::similarity::{extract_features, SchemeSet};
use crate::svm::{self, GridSearchResult, LinearModel, SvmConfig, SvmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    OrthoSvm,
    PmiSvm,
    Manhattan,
    TwoChannel,
    SiameseEuclid,
}

impl System {
    pub const ALL: [System; 5] = [
        System::OrthoSvm,
        System::PmiSvm,
        System::Manhattan,
        System::TwoChannel,
        System::SiameseEuclid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            System::OrthoSvm => "ORTHO_SVM",
            System::PmiSvm => "PMI_SVM",
            System::Manhattan => "MANHATTAN",
            System::TwoChannel => "TWO_CHANNEL",
            System::SiameseEuclid => "SIAMESE_EUCLID",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let norm = name.to_ascii_uppercase().replace('-', "_");
        System::ALL.into_iter().find(|s| s.name() == norm)
    }

    pub fn architecture(self) -> Option<Architecture> {
        match self {
            System::Manhattan => Some(Architecture::Manhattan),
            System::TwoChannel => Some(Architecture::TwoChannel),
            System::SiameseEuclid => Some(Architecture::SiameseEuclid),
            _ => None,
        }
    }

    /// Score at or above which a pair is called cognate.
    pub fn threshold(self) -> f64 {
        if self.architecture().is_some() {
            0.5
        } else {
            0.0
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Pmi(#[from] PmiError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: System,
    pub split: SplitSpec,
    pub train_families: Vec<String>,
    pub test_families: Vec<String>,
    pub pairs: PairOptions,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub svm: SvmConfig,
    pub pmi: PmiConfig,
    /// Architecture is taken from `system`.
    pub model: ModelSpec,
    pub train: TrainConfig,
    pub combine: Combine,
}

impl ExperimentConfig {
    pub fn new(system: System, seed: u64) -> Self {
        ExperimentConfig {
            system,
            split: SplitSpec::cross_concept(seed),
            train_families: Vec::new(),
            test_families: Vec::new(),
            pairs: PairOptions::default(),
            c_grid: svm::DEFAULT_C_GRID.to_vec(),
            folds: svm::DEFAULT_FOLDS,
            svm: SvmConfig::default(),
            pmi: PmiConfig::default(),
            model: ModelSpec::new(system.architecture().unwrap_or(Architecture::Manhattan)),
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            combine: Combine::SupportWeighted,
        }
    }

    pub fn seed(&self) -> u64 {
        self.split.seed
    }
}

#[derive(Debug, Clone)]
pub enum Trained {
    Svm {
        system: System,
        model: LinearModel,
        /// Present for PMI_SVM.
        pmi: Option<PmiMatrix>,
        /// Present when the model was trained in this run.
        grid: Option<GridSearchResult>,
    },
    Neural {
        network: Network,
        report: TrainReport,
    },
}

impl Trained {
    pub fn system(&self) -> System {
        match self {
            Trained::Svm { system, .. } => *system,
            Trained::Neural { network, .. } => match network.spec().architecture {
                Architecture::Manhattan => System::Manhattan,
                Architecture::TwoChannel => System::TwoChannel,
                Architecture::SiameseEuclid => System::SiameseEuclid,
            },
        }
    }
}

/// SVM feature rows for `pairs`: the 33 string-similarity features, or the
/// four PMI features when a matrix is given.
pub fn featurize(pairs: &[WordPair], pmi: Option<&PmiMatrix>) -> Vec<Vec<f64>> {
    let schemes = SchemeSet::default();
    pairs
        .iter()
        .map(|p| match pmi {
            Some(m) => pmi_features(&p.a.form, &p.b.form, m).to_vec(),
            None => extract_features(&p.a.form, &p.b.form, &schemes).to_vec(),
        })
        .collect()
}

pub fn samples(pairs: &[WordPair], pad_len: usize) -> Vec<Sample> {
    pairs
        .iter()
        .map(|p| Sample::from_matrices(&word_to_matrix(&p.a.form, pad_len), &word_to_matrix(&p.b.form, pad_len), p.label))
        .collect()
}

pub fn labels(pairs: &[WordPair]) -> Vec<u8> {
    pairs.iter().map(|p| p.label).collect()
}

pub fn estimate_pmi_from_pairs(pairs: &[WordPair], config: &PmiConfig) -> Result<PmiEstimate, PmiError> {
    let words: Vec<_> = pairs.iter().map(|p| (p.a.form.clone(), p.b.form.clone())).collect();
    estimate_pmi(&words, config)
}

pub fn train_system(train: &[WordPair], config: &ExperimentConfig) -> Result<Trained, ExperimentError> {
    let system = config.system;
    match system.architecture() {
        None => {
            let pmi = match system {
                System::PmiSvm => {
                    let est = estimate_pmi_from_pairs(train, &config.pmi)?;
                    log::info!(
                        "PMI from {} seed pairs: {} iterations, converged {}",
                        est.seed_pairs,
                        est.iterations,
                        est.converged
                    );
                    Some(est.matrix)
                }
                _ => None,
            };
            let x = featurize(train, pmi.as_ref());
            let y = labels(train);
            let grid = svm::grid_search_cv(&x, &y, &config.c_grid, config.folds, config.seed(), &config.svm)?;
            let model = svm::fit(&x, &y, grid.best_c, &config.svm)?;
            Ok(Trained::Svm {
                system,
                model,
                pmi,
                grid: Some(grid),
            })
        }
        Some(architecture) => {
            let spec = ModelSpec {
                architecture,
                ..config.model
            };
            let mut network = Network::new(spec, config.seed())?;
            let report = neural::train(&mut network, &samples(train, spec.pad_len), &config.train)?;
            Ok(Trained::Neural { network, report })
        }
    }
}

/// Raw scores: SVM decision values or network predictions.
pub fn score(trained: &Trained, pairs: &[WordPair]) -> Result<Vec<f64>, ExperimentError> {
    match trained {
        Trained::Svm { model, pmi, .. } => {
            let x = featurize(pairs, pmi.as_ref());
            Ok(x.iter().map(|row| model.decision_function(row)).collect::<Result<_, _>>()?)
        }
        Trained::Neural { network, .. } => {
            let s = samples(pairs, network.spec().pad_len);
            Ok(s.iter().map(|s| network.predict(&s.a, &s.b)).collect::<Result<_, _>>()?)
        }
    }
}

pub fn evaluate_pairs(trained: &Trained, pairs: &[WordPair], combine: Combine) -> Result<(EvalReport, Vec<f64>), ExperimentError> {
    let scores = score(trained, pairs)?;
    let report = eval::evaluate(&labels(pairs), &scores, trained.system().threshold(), combine)?;
    Ok((report, scores))
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub trained: Trained,
    pub report: EvalReport,
    pub scores: Vec<f64>,
    /// Share of the majority label among test pairs.
    pub majority_rate: f64,
}

pub fn split_pairs(lexemes: &[Lexeme], config: &ExperimentConfig) -> Result<data::Split, DataError> {
    let pairs = data::generate_pairs(lexemes, config.pairs);
    data::split(&pairs, lexemes, &config.split, &config.train_families, &config.test_families)
}

pub fn run_pipeline(lexemes: &[Lexeme], config: &ExperimentConfig) -> Result<PipelineResult, ExperimentError> {
    let (train, test) = split_pairs(lexemes, config)?;
    log::info!("{}: {} train pairs, {} test pairs", config.system.name(), train.len(), test.len());
    let trained = train_system(&train, config)?;
    let (report, scores) = evaluate_pairs(&trained, &test, config.combine)?;
    let positives = test.iter().filter(|p| p.label == 1).count() as f64 / test.len() as f64;
    Ok(PipelineResult {
        train_pairs: train.len(),
        test_pairs: test.len(),
        trained,
        report,
        scores,
        majority_rate: positives.max(1.0 - positives),
    })
}
