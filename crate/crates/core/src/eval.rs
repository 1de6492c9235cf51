//! Accuracy, class-wise F-scores and average precision.

use std::fmt::Write as _;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("length mismatch: {labels} labels, {other} predictions")]
    LengthMismatch { labels: usize, other: usize },
    #[error("labels contain a single class")]
    SingleClassLabels,
    #[error("no positive labels")]
    NoPositives,
    #[error("empty input")]
    Empty,
}

/// How the two class F1 values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// Mean weighted by each class's share of the labels.
    #[default]
    SupportWeighted,
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(labels: &[u8], predictions: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&l, &p) in labels.iter().zip(predictions) {
            match (l == 1, p == 1) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if tp == 0 || denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn check(labels: &[u8], other: usize) -> Result<(), EvalError> {
    if labels.len() != other {
        return Err(EvalError::LengthMismatch {
            labels: labels.len(),
            other,
        });
    }
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// `(f_negative, f_positive, f_combined)`.
pub fn f_scores(labels: &[u8], predictions: &[u8], combine: Combine) -> Result<(f64, f64, f64), EvalError> {
    check(labels, predictions.len())?;
    let c = Confusion::from_predictions(labels, predictions);
    let positives = c.tp + c.fn_;
    if positives == 0 || positives == c.total() {
        return Err(EvalError::SingleClassLabels);
    }
    Ok(combine_f(&c, combine))
}

fn combine_f(c: &Confusion, combine: Combine) -> (f64, f64, f64) {
    let f_pos = f1(c.tp, c.fp, c.fn_);
    let f_neg = f1(c.tn, c.fn_, c.fp);
    let combined = match combine {
        Combine::SupportWeighted => {
            let w_pos = (c.tp + c.fn_) as f64 / c.total() as f64;
            w_pos * f_pos + (1.0 - w_pos) * f_neg
        }
        Combine::Unweighted => 0.5 * (f_pos + f_neg),
    };
    (f_neg, f_pos, combined)
}

/// Non-interpolated average precision: `Σ (R_n − R_{n−1}) · P_n` over the
/// ranking by descending score, ties kept in input order.
pub fn average_precision(labels: &[u8], scores: &[f64]) -> Result<f64, EvalError> {
    check(labels, scores.len())?;
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] == 1 {
            hits += 1;
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(ap / positives as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub f_negative: f64,
    pub f_positive: f64,
    pub f_combined: f64,
    pub average_precision: f64,
    pub n_test: usize,
    pub confusion: Confusion,
}

/// Thresholded metrics (`score ≥ threshold` predicts cognate) plus AP on
/// the raw scores.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64, combine: Combine) -> Result<EvalReport, EvalError> {
    check(labels, scores.len())?;
    let predictions: Vec<u8> = scores.iter().map(|&s| (s >= threshold) as u8).collect();
    let confusion = Confusion::from_predictions(labels, &predictions);
    let (f_negative, f_positive, f_combined) = f_scores(labels, &predictions, combine)?;
    Ok(EvalReport {
        accuracy: confusion.accuracy(),
        f_negative,
        f_positive,
        f_combined,
        average_precision: average_precision(labels, scores)?,
        n_test: labels.len(),
        confusion,
    })
}

impl EvalReport {
    const ROWS: [&'static str; 5] = ["Accuracy", "F (negative)", "F (positive)", "F (combined)", "Average precision"];

    fn values(&self) -> [f64; 5] {
        [self.accuracy, self.f_negative, self.f_positive, self.f_combined, self.average_precision]
    }

    /// One `metric<TAB>value` line per row, then the counts.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        for (name, v) in Self::ROWS.iter().zip(self.values()) {
            let _ = writeln!(out, "{name}\t{v:.6}");
        }
        let c = &self.confusion;
        let _ = writeln!(out, "n_test\t{}", self.n_test);
        let _ = writeln!(out, "tp\t{}\nfp\t{}\ntn\t{}\nfn\t{}", c.tp, c.fp, c.tn, c.fn_);
        out
    }
}

/// Plain-text table with one column per system.
pub fn render_table(title: &str, systems: &[(&str, &EvalReport)]) -> String {
    let width = systems.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<18}", "");
    for (name, _) in systems {
        let _ = write!(out, "  {name:>width$}");
    }
    out.push('\n');
    for (i, row) in EvalReport::ROWS.iter().enumerate() {
        let _ = write!(out, "{row:<18}");
        for (_, r) in systems {
            let _ = write!(out, "  {:>width$.4}", r.values()[i]);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let y = [1, 0, 1, 0];
        assert_eq!(f_scores(&y, &y, Combine::SupportWeighted).unwrap(), (1.0, 1.0, 1.0));
        let r = evaluate(&y, &[0.9, 0.1, 0.8, 0.2], 0.5, Combine::SupportWeighted).unwrap();
        assert_eq!((r.accuracy, r.average_precision), (1.0, 1.0));
    }

    #[test]
    fn hand_checked_f_scores() {
        let (neg, pos, comb) = f_scores(&[1, 1, 0, 0], &[1, 0, 0, 0], Combine::SupportWeighted).unwrap();
        assert!((pos - 2.0 / 3.0).abs() < 1e-12);
        assert!((neg - 0.8).abs() < 1e-12);
        assert!((comb - 0.7333333333333333).abs() < 1e-12);
        let (_, _, unweighted) = f_scores(&[1, 1, 0, 0, 0, 0], &[1, 0, 0, 0, 0, 0], Combine::Unweighted).unwrap();
        let (n2, p2, _) = f_scores(&[1, 1, 0, 0, 0, 0], &[1, 0, 0, 0, 0, 0], Combine::SupportWeighted).unwrap();
        assert_eq!(unweighted, 0.5 * (n2 + p2));
    }

    #[test]
    fn all_negative_predictions() {
        let (_, pos, _) = f_scores(&[1, 0, 1, 0], &[0; 4], Combine::SupportWeighted).unwrap();
        assert_eq!(pos, 0.0);
    }

    #[test]
    fn hand_checked_average_precision() {
        let ap = average_precision(&[1, 0, 1], &[0.9, 0.8, 0.7]).unwrap();
        assert!((ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(average_precision(&[0, 1, 1, 0], &[0.1, 0.9, 0.8, 0.3]).unwrap(), 1.0);
    }

    #[test]
    fn ties_keep_input_order() {
        assert_eq!(average_precision(&[1, 0], &[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(average_precision(&[0, 1], &[0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn error_paths() {
        assert_eq!(average_precision(&[0, 0], &[0.1, 0.2]), Err(EvalError::NoPositives));
        assert!(matches!(f_scores(&[1, 0], &[1], Combine::SupportWeighted), Err(EvalError::LengthMismatch { .. })));
        assert_eq!(f_scores(&[1, 1], &[1, 0], Combine::SupportWeighted), Err(EvalError::SingleClassLabels));
    }

    #[test]
    fn constant_scores_give_majority_accuracy() {
        let y = [0, 0, 0, 1];
        let r = evaluate(&y, &[0.2; 4], 0.5, Combine::SupportWeighted).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.confusion, Confusion { tp: 0, fp: 0, tn: 3, fn_: 1 });
        assert_eq!(r.confusion.total(), r.n_test);
    }

    #[test]
    fn reports_render() {
        let r = evaluate(&[1, 0, 1, 0], &[0.9, 0.4, 0.3, 0.1], 0.5, Combine::SupportWeighted).unwrap();
        let tsv = r.to_tsv();
        assert!(tsv.starts_with("metric\tvalue\nAccuracy\t0.750000\n"));
        let table = render_table("Synthetic", &[("MANHATTAN", &r)]);
        assert!(table.contains("Average precision"));
        assert_eq!(table.lines().count(), 7);
    }
}
