//! Pointwise mutual information scoring of ASJP symbol correspondences.
//!
//! The matrix is learned in an EM-like loop: word pairs that are close in
//! normalized edit distance are aligned, aligned symbol pairs are counted,
//! the PMI matrix is computed from the counts, and the same pairs are then
//! realigned under the new matrix until the scores stop changing.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::phoneme::{AsjpSymbol, Word, INVENTORY_SIZE};
use crate::similarity::{align, align_score, normalized_edit_distance, AlignMode, Column, MatchMismatch, ScoringScheme};

const CELLS: usize = INVENTORY_SIZE * INVENTORY_SIZE;

#[derive(Debug, Error)]
pub enum PmiError {
    #[error("no word pairs supplied")]
    EmptyPairs,
    #[error("no pair passes the normalized edit distance cutoff {0}")]
    EmptySeedSet(f64),
    #[error("invalid PMI configuration: {0}")]
    InvalidConfig(String),
    #[error("PMI matrix file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmiConfig {
    /// Maximum normalized edit distance for a pair to enter the seed set.
    pub initial_cutoff: f64,
    pub max_iterations: usize,
    /// Stop once the largest absolute score change falls below this.
    pub convergence_tol: f64,
    pub pseudocount: f64,
    pub gap_penalty: f64,
}

impl Default for PmiConfig {
    fn default() -> Self {
        PmiConfig {
            initial_cutoff: 0.5,
            max_iterations: 10,
            convergence_tol: 1e-4,
            pseudocount: 1.0,
            gap_penalty: -2.5,
        }
    }
}

impl PmiConfig {
    pub fn validate(&self) -> Result<(), PmiError> {
        let bad = |m: &str| Err(PmiError::InvalidConfig(m.to_string()));
        if !(self.initial_cutoff > 0.0 && self.initial_cutoff <= 1.0) {
            return bad("initial_cutoff must lie in (0, 1]");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.convergence_tol > 0.0) {
            return bad("convergence_tol must be positive");
        }
        if !(self.pseudocount > 0.0) {
            return bad("pseudocount must be positive");
        }
        if !(self.gap_penalty < 0.0) {
            return bad("gap_penalty must be negative");
        }
        Ok(())
    }
}

/// Symmetric log-odds scores for every pair of ASJP symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PmiMatrix {
    scores: Vec<f64>,
    gap_penalty: f64,
}

impl PmiMatrix {
    /// Builds a matrix from a `35 × 35` row-major score table.
    pub fn from_scores(scores: Vec<f64>, gap_penalty: f64) -> Self {
        assert_eq!(scores.len(), CELLS, "PMI matrix must be {INVENTORY_SIZE}x{INVENTORY_SIZE}");
        PmiMatrix { scores, gap_penalty }
    }

    pub fn score(&self, x: AsjpSymbol, y: AsjpSymbol) -> f64 {
        self.scores[x.index() * INVENTORY_SIZE + y.index()]
    }

    pub fn gap_penalty(&self) -> f64 {
        self.gap_penalty
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn is_symmetric(&self) -> bool {
        (0..INVENTORY_SIZE).all(|i| {
            (0..INVENTORY_SIZE).all(|j| {
                self.scores[i * INVENTORY_SIZE + j].to_bits()
                    == self.scores[j * INVENTORY_SIZE + i].to_bits()
            })
        })
    }

    fn max_abs_diff(&self, other: &PmiMatrix) -> f64 {
        self.scores
            .iter()
            .zip(&other.scores)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Serializes the matrix: a header of the 35 symbols, 35 rows of
    /// tab-separated scores at 12 significant digits, then `GAP<TAB>value`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = AsjpSymbol::all().map(|s| s.to_string()).collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        for row in self.scores.chunks(INVENTORY_SIZE) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        let _ = writeln!(out, "GAP\t{:.11e}", self.gap_penalty);
        out
    }

    pub fn parse(text: &str) -> Result<Self, PmiError> {
        let err = |line: usize, reason: &str| PmiError::Format {
            line,
            reason: reason.to_string(),
        };
        let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
        if lines.len() < INVENTORY_SIZE + 2 {
            return Err(err(lines.len().max(1), "truncated matrix file"));
        }
        let header: Vec<&str> = lines[0].split('\t').collect();
        let expected: Vec<String> = AsjpSymbol::all().map(|s| s.to_string()).collect();
        if header != expected {
            return Err(err(1, "header must list the 35 ASJP symbols in table order"));
        }
        let mut scores = Vec::with_capacity(CELLS);
        for (r, line) in lines[1..=INVENTORY_SIZE].iter().enumerate() {
            let row: Vec<f64> = line
                .split('\t')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err(r + 2, "unparseable score"))?;
            if row.len() != INVENTORY_SIZE {
                return Err(err(r + 2, "expected 35 scores"));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(err(r + 2, "non-finite score"));
            }
            scores.extend(row);
        }
        let gap_line = INVENTORY_SIZE + 2;
        let gap = lines[INVENTORY_SIZE + 1]
            .strip_prefix("GAP\t")
            .ok_or_else(|| err(gap_line, "expected GAP<TAB>value"))?
            .trim()
            .parse::<f64>()
            .map_err(|_| err(gap_line, "unparseable gap penalty"))?;
        if lines[INVENTORY_SIZE + 2..].iter().any(|l| !l.trim().is_empty()) {
            return Err(err(gap_line + 1, "trailing content"));
        }
        Ok(PmiMatrix::from_scores(scores, gap))
    }

    pub fn save(&self, path: &Path) -> Result<(), PmiError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PmiError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl ScoringScheme<AsjpSymbol> for PmiMatrix {
    fn substitution(&self, a: AsjpSymbol, b: AsjpSymbol) -> f64 {
        self.score(a, b)
    }

    fn gap(&self) -> f64 {
        self.gap_penalty
    }
}

/// Outcome of [`estimate_pmi`] with convergence bookkeeping.
#[derive(Debug, Clone)]
pub struct PmiEstimate {
    pub matrix: PmiMatrix,
    /// Realign-and-recount rounds performed after the initial count.
    pub iterations: usize,
    /// Largest absolute score change in the last round.
    pub final_delta: f64,
    pub converged: bool,
    pub seed_pairs: usize,
}

/// PMI from symmetrized counts of aligned (non-gap) symbol pairs.
///
/// Every cell receives `pseudocount`, so joint and marginal probabilities are
/// strictly positive and all scores are finite.
fn pmi_from_alignments<'a>(
    alignments: impl Iterator<Item = &'a [Column<AsjpSymbol>]>,
    cfg: &PmiConfig,
) -> PmiMatrix {
    let mut counts = vec![0.0f64; CELLS];
    for columns in alignments {
        for col in columns {
            if let (Some(x), Some(y)) = *col {
                counts[x.index() * INVENTORY_SIZE + y.index()] += 1.0;
                counts[y.index() * INVENTORY_SIZE + x.index()] += 1.0;
            }
        }
    }
    let total: f64 = counts.iter().map(|c| c + cfg.pseudocount).sum();
    let joint: Vec<f64> = counts.iter().map(|c| (c + cfg.pseudocount) / total).collect();
    let marginal: Vec<f64> = joint.chunks(INVENTORY_SIZE).map(|row| row.iter().sum()).collect();
    let mut scores = vec![0.0; CELLS];
    for x in 0..INVENTORY_SIZE {
        for y in x..INVENTORY_SIZE {
            let v = joint[x * INVENTORY_SIZE + y].log2() - (marginal[x] * marginal[y]).log2();
            scores[x * INVENTORY_SIZE + y] = v;
            scores[y * INVENTORY_SIZE + x] = v;
        }
    }
    PmiMatrix::from_scores(scores, cfg.gap_penalty)
}

pub fn estimate_pmi(pairs: &[(Word, Word)], cfg: &PmiConfig) -> Result<PmiEstimate, PmiError> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(PmiError::EmptyPairs);
    }
    let seeds: Vec<(&[AsjpSymbol], &[AsjpSymbol])> = pairs
        .iter()
        .map(|(a, b)| (a.symbols(), b.symbols()))
        .filter(|(a, b)| normalized_edit_distance(a, b) <= cfg.initial_cutoff)
        .collect();
    if seeds.is_empty() {
        return Err(PmiError::EmptySeedSet(cfg.initial_cutoff));
    }

    // unit-cost edit alignment: match 0, mismatch -1, gap -1
    let edit_scheme = MatchMismatch::new(0.0, -1.0, -1.0);
    let alignments: Vec<Vec<Column<AsjpSymbol>>> = seeds
        .iter()
        .map(|(a, b)| align(a, b, &edit_scheme, AlignMode::Global).columns)
        .collect();
    let mut matrix = pmi_from_alignments(alignments.iter().map(Vec::as_slice), cfg);

    let mut iterations = 0;
    let mut final_delta = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let realigned: Vec<Vec<Column<AsjpSymbol>>> = seeds
            .iter()
            .map(|(a, b)| align(a, b, &matrix, AlignMode::Global).columns)
            .collect();
        let next = pmi_from_alignments(realigned.iter().map(Vec::as_slice), cfg);
        final_delta = next.max_abs_diff(&matrix);
        matrix = next;
        iterations += 1;
        log::debug!("pmi iteration {iterations}: max delta {final_delta:.3e}");
        if final_delta < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("PMI estimation hit the iteration cap ({}) with delta {final_delta:.3e}", cfg.max_iterations);
    }
    Ok(PmiEstimate {
        matrix,
        iterations,
        final_delta,
        converged,
        seed_pairs: seeds.len(),
    })
}

/// Global alignment score of two words under `m`.
pub fn pmi_score(a: &Word, b: &Word, m: &PmiMatrix) -> f64 {
    align_score(a.symbols(), b.symbols(), m, AlignMode::Global)
}

/// Dimension of [`pmi_features`].
pub const PMI_FEATURE_DIM: usize = 4;

/// `[pmi_score, len(a), len(b), |len(a) - len(b)|]`.
pub fn pmi_features(a: &Word, b: &Word, m: &PmiMatrix) -> [f64; PMI_FEATURE_DIM] {
    [
        pmi_score(a, b, m),
        a.len() as f64,
        b.len() as f64,
        a.len().abs_diff(b.len()) as f64,
    ]
}
