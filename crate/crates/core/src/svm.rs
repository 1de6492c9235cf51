//! Linear SVM trained on the primal hinge objective, with stratified
//! cross-validated grid search over `C`.
//!
//! The objective is `½‖w‖² + C · mean_i max(0, 1 − yᵢ(w·xᵢ + b))` on
//! standardized features, with `yᵢ ∈ {−1, +1}` and an unregularized bias.
//! Minimization is full-batch subgradient descent on `w` with step `1/(λt)`,
//! `λ = 1/C`; after every step the bias is set to its exact minimizer for
//! the current `w`. The best iterate seen is returned.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvmError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty training set")]
    EmptyInput,
    #[error("non-finite feature value at row {0}")]
    NonFinite(usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Number of full-batch subgradient iterations.
    pub iterations: usize,
    /// Objective is recorded every this many iterations.
    pub checkpoint_every: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            iterations: 2000,
            checkpoint_every: 100,
        }
    }
}

/// Per-feature standardization fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in x {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub scaler: Scaler,
    /// Best objective value at each checkpoint, starting from `w = 0`.
    pub objective_history: Vec<f64>,
}

fn check_rows(x: &[Vec<f64>]) -> Result<usize, SvmError> {
    let d = x.first().ok_or(SvmError::EmptyInput)?.len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(SvmError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::NonFinite(i));
        }
    }
    Ok(d)
}

fn signed(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `½‖w‖² + C · mean hinge` on already-standardized rows.
pub fn objective(z: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, c: f64) -> f64 {
    let hinge: f64 = z
        .iter()
        .zip(y)
        .map(|(row, &l)| (1.0 - signed(l) * (dot(w, row) + b)).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * hinge / z.len() as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn fit(x: &[Vec<f64>], y: &[u8], c: f64, config: &SvmConfig) -> Result<LinearModel, SvmError> {
    let d = check_rows(x)?;
    if y.len() != x.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SvmError::InvalidConfig(format!("C must be positive, got {c}")));
    }
    if config.iterations == 0 || config.checkpoint_every == 0 {
        return Err(SvmError::InvalidConfig("iterations and checkpoint_every must be positive".into()));
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(SvmError::SingleClass);
    }
    let scaler = Scaler::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.transform(r)).collect();
    let n = z.len() as f64;
    let lambda = 1.0 / c;

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut best = (objective(&z, y, &w, b, c), w.clone(), b);
    let mut history = vec![best.0];
    let mut gw = vec![0.0; d];
    for t in 1..=config.iterations {
        // Subgradient of J/C = λ/2‖w‖² + mean hinge.
        gw.iter_mut().zip(&w).for_each(|(g, wi)| *g = lambda * wi);
        for (row, &l) in z.iter().zip(y) {
            let s = signed(l);
            if s * (dot(&w, row) + b) < 1.0 {
                for (g, v) in gw.iter_mut().zip(row) {
                    *g -= s * v / n;
                }
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= eta * g);
        b = best_bias(&z, y, &w);
        let obj = objective(&z, y, &w, b, c);
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
        if t % config.checkpoint_every == 0 || t == config.iterations {
            history.push(best.0);
        }
    }
    let (_, weights, bias) = best;
    Ok(LinearModel {
        weights,
        bias,
        c,
        scaler,
        objective_history: history,
    })
}

/// Exact minimizer over `b` of the summed hinge for fixed `w`.
///
/// Each term `max(0, 1 − s(m + b))` bends at `b = s − m` and every bend
/// raises the slope by one, starting from minus the number of positives.
/// When the slope is exactly zero between two bends the midpoint is taken.
fn best_bias(z: &[Vec<f64>], y: &[u8], w: &[f64]) -> f64 {
    let mut knots: Vec<f64> = z.iter().zip(y).map(|(row, &l)| signed(l) - dot(w, row)).collect();
    knots.sort_by(f64::total_cmp);
    let positives = y.iter().filter(|&&l| l == 1).count();
    match (positives.checked_sub(1).map(|i| knots[i]), knots.get(positives)) {
        (Some(lo), Some(&hi)) => 0.5 * (lo + hi),
        (Some(lo), None) => lo,
        (None, Some(&hi)) => hi,
        (None, None) => 0.0,
    }
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_function(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(dot(&self.weights, &self.scaler.transform(x)) + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8, SvmError> {
        Ok((self.decision_function(x)? >= 0.0) as u8)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "cognate-svm 1");
        let _ = writeln!(out, "dim {}", self.dim());
        let _ = writeln!(out, "C {:?}", self.c);
        let _ = writeln!(out, "mean {}", join(&self.scaler.mean));
        let _ = writeln!(out, "std {}", join(&self.scaler.std));
        let _ = writeln!(out, "bias {:?}", self.bias);
        let _ = writeln!(out, "weights {}", join(&self.weights));
        let _ = writeln!(out, "objective {}", join(&self.objective_history));
        out
    }

    pub fn parse(text: &str) -> Result<Self, SvmError> {
        let mut lines = text.lines();
        let mut line_no = 0;
        let mut next = |key: &str| -> Result<(usize, Vec<f64>), SvmError> {
            line_no += 1;
            let err = |reason: String| SvmError::Format { line: line_no, reason };
            let l = lines.next().ok_or_else(|| err(format!("missing `{key}`")))?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(err(format!("expected `{key}`")));
            }
            let vals = parts
                .map(|p| p.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(e.to_string()))?;
            Ok((line_no, vals))
        };
        let (_, magic) = next("cognate-svm")?;
        if magic != [1.0] {
            return Err(SvmError::Format { line: 1, reason: "unsupported version".into() });
        }
        let (_, dim) = next("dim")?;
        let dim = match dim.as_slice() {
            [d] if *d >= 1.0 && d.fract() == 0.0 => *d as usize,
            _ => return Err(SvmError::Format { line: 2, reason: "bad dimension".into() }),
        };
        let scalar = |(line, v): (usize, Vec<f64>)| match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(SvmError::Format { line, reason: "expected one value".into() }),
        };
        let vector = |(line, v): (usize, Vec<f64>)| {
            if v.len() == dim {
                Ok(v)
            } else {
                Err(SvmError::Format { line, reason: format!("expected {dim} values") })
            }
        };
        let c = scalar(next("C")?)?;
        let mean = vector(next("mean")?)?;
        let std = vector(next("std")?)?;
        let bias = scalar(next("bias")?)?;
        let weights = vector(next("weights")?)?;
        let (_, objective_history) = next("objective")?;
        Ok(LinearModel {
            weights,
            bias,
            c,
            scaler: Scaler { mean, std },
            objective_history,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), SvmError> {
        std::fs::write(path, self.to_text()).map_err(|e| SvmError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SvmError> {
        let text = std::fs::read_to_string(path).map_err(|e| SvmError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Stratified fold index per sample: each class is shuffled and dealt out
/// round-robin, continuing the rotation across classes.
pub fn stratified_folds(y: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; y.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best_c: f64,
    /// `(C, mean validation accuracy)` in ascending `C` order.
    pub cv_scores: Vec<(f64, f64)>,
    pub folds: usize,
}

pub fn grid_search_cv(
    x: &[Vec<f64>],
    y: &[u8],
    grid: &[f64],
    folds: usize,
    seed: u64,
    config: &SvmConfig,
) -> Result<GridSearchResult, SvmError> {
    check_rows(x)?;
    if grid.is_empty() || folds < 2 {
        return Err(SvmError::InvalidConfig("need a nonempty grid and at least 2 folds".into()));
    }
    if x.len() < folds {
        return Err(SvmError::TooFewSamples { needed: folds, got: x.len() });
    }
    for class in [0u8, 1] {
        let count = y.iter().filter(|&&l| l == class).count();
        if count < 2 {
            return Err(SvmError::TooFewSamples { needed: 2, got: count });
        }
    }
    let assignment = stratified_folds(y, folds, seed);
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut cv_scores = Vec::with_capacity(grid.len());
    for &c in &grid {
        let mut total = 0.0;
        for fold in 0..folds {
            let (mut tx, mut ty, mut vx, mut vy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..x.len() {
                if assignment[i] == fold {
                    vx.push(x[i].clone());
                    vy.push(y[i]);
                } else {
                    tx.push(x[i].clone());
                    ty.push(y[i]);
                }
            }
            let model = fit(&tx, &ty, c, config)?;
            let correct = vx
                .iter()
                .zip(&vy)
                .filter(|(row, &l)| model.predict(row).map(|p| p == l).unwrap_or(false))
                .count();
            total += correct as f64 / vx.len() as f64;
        }
        cv_scores.push((c, total / folds as f64));
    }
    let mut best = cv_scores[0];
    for &(c, score) in &cv_scores[1..] {
        if score > best.1 {
            best = (c, score);
        }
    }
    log::debug!("grid search: {cv_scores:?}, best C {}", best.0);
    Ok(GridSearchResult {
        best_c: best.0,
        cv_scores,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn accuracy(m: &LinearModel, x: &[Vec<f64>], y: &[u8]) -> f64 {
        let ok = x.iter().zip(y).filter(|(r, &l)| m.predict(r).unwrap() == l).count();
        ok as f64 / x.len() as f64
    }

    #[test]
    fn two_points_are_separated() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = [0, 1];
        let m = fit(&x, &y, 1.0, &SvmConfig::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [0, 0, 1, 1];
        for c in DEFAULT_C_GRID {
            let m = fit(&x, &y, c, &SvmConfig::default()).unwrap();
            assert!(accuracy(&m, &x, &y) <= 0.75);
        }
    }

    #[test]
    fn duplicated_rows_give_the_same_predictions() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y: Vec<u8> = (0..12).map(|i| (i >= 6) as u8).collect();
        let m = fit(&x, &y, 1.0, &SvmConfig::default()).unwrap();
        let x2: Vec<Vec<f64>> = x.iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        let y2: Vec<u8> = y.iter().flat_map(|&l| [l, l]).collect();
        let m2 = fit(&x2, &y2, 1.0, &SvmConfig::default()).unwrap();
        for probe in (0..40).map(|i| vec![i as f64 * 0.3, (i % 4) as f64]) {
            assert_eq!(m.predict(&probe).unwrap(), m2.predict(&probe).unwrap());
            assert!((m.decision_function(&probe).unwrap() - m2.decision_function(&probe).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn error_paths() {
        let x = vec![vec![0.0], vec![1.0]];
        assert_eq!(fit(&x, &[1, 1], 1.0, &SvmConfig::default()), Err(SvmError::SingleClass));
        assert!(matches!(
            fit(&[vec![0.0], vec![1.0, 2.0]], &[0, 1], 1.0, &SvmConfig::default()),
            Err(SvmError::DimensionMismatch { .. })
        ));
        let m = fit(&x, &[0, 1], 1.0, &SvmConfig::default()).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(SvmError::DimensionMismatch { .. })));
        assert_eq!(
            grid_search_cv(&x, &[0, 1], &[1.0], 10, 0, &SvmConfig::default()),
            Err(SvmError::TooFewSamples { needed: 10, got: 2 })
        );
    }

    #[test]
    fn scaler_standardizes_and_neutralizes_constants() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 3.0 + 1.0, 5.0, ((i * i) % 7) as f64]).collect();
        let y: Vec<u8> = (0..20).map(|i| (i % 3 == 0) as u8).collect();
        let m = fit(&x, &y, 1.0, &SvmConfig::default()).unwrap();
        assert_eq!(m.scaler.std[1], 1.0);
        let z: Vec<Vec<f64>> = x.iter().map(|r| m.scaler.transform(r)).collect();
        for j in [0, 2] {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / 20.0;
            let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 20.0;
            assert!(mean.abs() < 1e-9);
            assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.weights[1], 0.0);
        let mut probe = x[4].clone();
        let before = m.decision_function(&probe).unwrap();
        probe[1] = -17.0;
        assert_eq!(m.decision_function(&probe).unwrap(), before);
    }

    #[test]
    fn objective_history_is_monotone_and_beats_zero() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 10) as f64, (i / 3) as f64]).collect();
        let y: Vec<u8> = (0..30).map(|i| ((i % 10) + i / 3 > 8) as u8).collect();
        let m = fit(&x, &y, 10.0, &SvmConfig::default()).unwrap();
        let h = &m.objective_history;
        assert_eq!(h[0], 10.0);
        for pair in h.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-6));
        }
        assert!(h.last().unwrap() < &h[0]);
    }

    #[test]
    fn centroid_of_negatives_is_negative() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![4.0, 4.0], vec![5.0, 4.0], vec![4.0, 5.0]];
        let y = [0, 0, 0, 1, 1, 1];
        let m = fit(&x, &y, 1.0, &SvmConfig::default()).unwrap();
        assert_eq!(m.predict(&[1.0 / 3.0, 1.0 / 3.0]).unwrap(), 0);
        let d = m.decision_function(&[13.0 / 3.0, 13.0 / 3.0]).unwrap();
        assert_eq!(m.predict(&[13.0 / 3.0, 13.0 / 3.0]).unwrap(), (d >= 0.0) as u8);
    }

    #[test]
    fn model_text_round_trips() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 3.0, 1.0]).collect();
        let y: Vec<u8> = (0..10).map(|i| (i > 4) as u8).collect();
        let m = fit(&x, &y, 0.1, &SvmConfig::default()).unwrap();
        assert_eq!(LinearModel::parse(&m.to_text()).unwrap(), m);
        assert!(matches!(LinearModel::parse("junk"), Err(SvmError::Format { line: 1, .. })));
    }

    #[test]
    fn folds_partition_and_stratify() {
        let y: Vec<u8> = (0..53).map(|i| (i % 4 == 0) as u8).collect();
        let f = stratified_folds(&y, 10, 3);
        for fold in 0..10 {
            let members: Vec<usize> = (0..53).filter(|&i| f[i] == fold).collect();
            assert!(!members.is_empty());
            let pos = members.iter().filter(|&&i| y[i] == 1).count();
            assert!(pos <= 2);
        }
        assert_eq!(f, stratified_folds(&y, 10, 3));
    }
}
