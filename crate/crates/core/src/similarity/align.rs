//! Global, local and semi-global pairwise alignment with linear gaps.

/// Substitution scores and a linear gap penalty.
pub trait ScoringScheme<T> {
    fn substitution(&self, a: T, b: T) -> f64;
    /// Cost of aligning one symbol against a gap; expected to be `<= 0`.
    fn gap(&self) -> f64;
}

/// Constant match / mismatch scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchMismatch {
    pub matched: f64,
    pub mismatched: f64,
    pub gap: f64,
}

impl MatchMismatch {
    pub const fn new(matched: f64, mismatched: f64, gap: f64) -> Self {
        MatchMismatch {
            matched,
            mismatched,
            gap,
        }
    }
}

/// +1 / -1 / -1, used for the orthographic alignment features.
impl Default for MatchMismatch {
    fn default() -> Self {
        MatchMismatch::new(1.0, -1.0, -1.0)
    }
}

impl<T: PartialEq> ScoringScheme<T> for MatchMismatch {
    fn substitution(&self, a: T, b: T) -> f64 {
        if a == b {
            self.matched
        } else {
            self.mismatched
        }
    }

    fn gap(&self) -> f64 {
        self.gap
    }
}

impl<T, S: ScoringScheme<T> + ?Sized> ScoringScheme<T> for &S {
    fn substitution(&self, a: T, b: T) -> f64 {
        (**self).substitution(a, b)
    }

    fn gap(&self) -> f64 {
        (**self).gap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlignMode {
    /// Needleman-Wunsch over both full strings.
    Global,
    /// Smith-Waterman; the score is never negative.
    Local,
    /// Global recurrence with free leading and trailing gaps.
    SemiGlobal,
}

/// One alignment column. `None` marks a gap.
pub type Column<T> = (Option<T>, Option<T>);

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    pub score: f64,
    /// For `Local`, only the aligned region. For `Global` and `SemiGlobal`,
    /// every symbol of both strings appears exactly once.
    pub columns: Vec<Column<T>>,
}

struct Matrix {
    cols: usize,
    cells: Vec<f64>,
}

impl Matrix {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols + j]
    }
}

fn fill<T: Copy, S: ScoringScheme<T>>(a: &[T], b: &[T], scheme: &S, mode: AlignMode) -> Matrix {
    let (n, m) = (a.len(), b.len());
    let cols = m + 1;
    let gap = scheme.gap();
    let mut cells = vec![0.0; (n + 1) * cols];
    if mode == AlignMode::Global {
        for i in 1..=n {
            cells[i * cols] = i as f64 * gap;
        }
        for j in 1..=m {
            cells[j] = j as f64 * gap;
        }
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = cells[(i - 1) * cols + j - 1] + scheme.substitution(a[i - 1], b[j - 1]);
            let up = cells[(i - 1) * cols + j] + gap;
            let left = cells[i * cols + j - 1] + gap;
            let mut best = diag.max(up).max(left);
            if mode == AlignMode::Local {
                best = best.max(0.0);
            }
            cells[i * cols + j] = best;
        }
    }
    Matrix { cols, cells }
}

fn end_cell(mx: &Matrix, n: usize, m: usize, mode: AlignMode) -> (usize, usize) {
    match mode {
        AlignMode::Global => (n, m),
        AlignMode::SemiGlobal => {
            let mut best = (n, m);
            for j in (0..m).rev() {
                if mx.at(n, j) > mx.at(best.0, best.1) {
                    best = (n, j);
                }
            }
            for i in (0..n).rev() {
                if mx.at(i, m) > mx.at(best.0, best.1) {
                    best = (i, m);
                }
            }
            best
        }
        AlignMode::Local => {
            let mut best = (0, 0);
            for i in 0..=n {
                for j in 0..=m {
                    if mx.at(i, j) > mx.at(best.0, best.1) {
                        best = (i, j);
                    }
                }
            }
            best
        }
    }
}

/// Aligns `a` against `b`. Traceback prefers substitution, then deletion
/// (symbol of `a` against a gap), then insertion.
pub fn align<T: Copy, S: ScoringScheme<T>>(
    a: &[T],
    b: &[T],
    scheme: &S,
    mode: AlignMode,
) -> Alignment<T> {
    let (n, m) = (a.len(), b.len());
    let mx = fill(a, b, scheme, mode);
    let (end_i, end_j) = end_cell(&mx, n, m, mode);
    let score = mx.at(end_i, end_j);
    let gap = scheme.gap();

    let mut columns = Vec::with_capacity(n + m);
    if mode == AlignMode::SemiGlobal {
        // free trailing gaps, emitted in reverse like the rest of the traceback
        for jj in (end_j..m).rev() {
            columns.push((None, Some(b[jj])));
        }
        for ii in (end_i..n).rev() {
            columns.push((Some(a[ii]), None));
        }
    }
    let (mut i, mut j) = (end_i, end_j);
    loop {
        if mode == AlignMode::Local && mx.at(i, j) == 0.0 {
            break;
        }
        if i == 0 || j == 0 {
            if mode == AlignMode::Local {
                break;
            }
            while i > 0 {
                i -= 1;
                columns.push((Some(a[i]), None));
            }
            while j > 0 {
                j -= 1;
                columns.push((None, Some(b[j])));
            }
            break;
        }
        let here = mx.at(i, j);
        if here == mx.at(i - 1, j - 1) + scheme.substitution(a[i - 1], b[j - 1]) {
            columns.push((Some(a[i - 1]), Some(b[j - 1])));
            i -= 1;
            j -= 1;
        } else if here == mx.at(i - 1, j) + gap {
            columns.push((Some(a[i - 1]), None));
            i -= 1;
        } else {
            columns.push((None, Some(b[j - 1])));
            j -= 1;
        }
    }
    columns.reverse();
    Alignment { score, columns }
}

/// Alignment score without traceback.
pub fn align_score<T: Copy, S: ScoringScheme<T>>(
    a: &[T],
    b: &[T],
    scheme: &S,
    mode: AlignMode,
) -> f64 {
    let mx = fill(a, b, scheme, mode);
    let (i, j) = end_cell(&mx, a.len(), b.len(), mode);
    mx.at(i, j)
}

/// Scores a given alignment under the rules of `mode`.
///
/// For `SemiGlobal`, a leading run and a trailing run of gap columns are free
/// as long as each run puts its gaps in one string only.
pub fn score_columns<T: Copy, S: ScoringScheme<T>>(
    columns: &[Column<T>],
    scheme: &S,
    mode: AlignMode,
) -> f64 {
    let kind = |c: &Column<T>| match c {
        (Some(_), None) => 1u8,
        (None, Some(_)) => 2,
        _ => 0,
    };
    let (mut lo, mut hi) = (0, columns.len());
    if mode == AlignMode::SemiGlobal {
        if let Some(first) = columns.first().map(kind).filter(|&k| k != 0) {
            while lo < hi && kind(&columns[lo]) == first {
                lo += 1;
            }
        }
        if let Some(last) = columns[lo..].last().map(kind).filter(|&k| k != 0) {
            while hi > lo && kind(&columns[hi - 1]) == last {
                hi -= 1;
            }
        }
    }
    columns[lo..hi]
        .iter()
        .map(|c| match *c {
            (Some(x), Some(y)) => scheme.substitution(x, y),
            (None, None) => 0.0,
            _ => scheme.gap(),
        })
        .sum()
}
