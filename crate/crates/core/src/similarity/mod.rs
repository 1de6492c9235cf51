//! Orthographic similarity measures over symbol strings.
//!
//! All measures are generic over the symbol type so they apply equally to
//! ASJP symbols and to sound-class strings.

mod align;

pub use align::{
    align, align_score, score_columns, AlignMode, Alignment, Column, MatchMismatch, ScoringScheme,
};

use crate::phoneme::{to_sound_class, SchemeId, SoundClassScheme, Word};

/// Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer length; 0 for two empty strings.
pub fn normalized_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        0.0
    } else {
        edit_distance(a, b) as f64 / longest as f64
    }
}

fn ngram_overlap<T: Ord>(a: &[T], b: &[T], n: usize) -> usize {
    let mut xs: Vec<&[T]> = a.windows(n).collect();
    let mut ys: Vec<&[T]> = b.windows(n).collect();
    xs.sort_unstable();
    ys.sort_unstable();
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared
}

/// Size of the multiset intersection of contiguous bigrams.
pub fn common_bigrams<T: Ord>(a: &[T], b: &[T]) -> usize {
    ngram_overlap(a, b, 2)
}

/// Size of the multiset intersection of contiguous trigrams.
pub fn common_trigrams<T: Ord>(a: &[T], b: &[T]) -> usize {
    ngram_overlap(a, b, 3)
}

pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn lcp_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Extended bigrams: each trigram with its middle symbol removed, tagged
/// with its start position.
fn extended_bigrams<T: Copy>(s: &[T]) -> Vec<((T, T), usize)> {
    s.windows(3).enumerate().map(|(i, w)| ((w[0], w[2]), i)).collect()
}

/// Pairs up equal extended bigrams. Repeated bigrams are matched in order of
/// occurrence; each match yields the position difference.
fn matched_extended_bigrams<T: Copy + Ord>(a: &[T], b: &[T]) -> (Vec<usize>, usize) {
    let mut xa = extended_bigrams(a);
    let mut xb = extended_bigrams(b);
    let total = xa.len() + xb.len();
    xa.sort_unstable();
    xb.sort_unstable();
    let (mut i, mut j) = (0, 0);
    let mut offsets = Vec::new();
    while i < xa.len() && j < xb.len() {
        match xa[i].0.cmp(&xb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                offsets.push(xa[i].1.abs_diff(xb[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    (offsets, total)
}

/// Dice coefficient over extended bigrams.
pub fn xdice<T: Copy + Ord>(a: &[T], b: &[T]) -> f64 {
    let (offsets, total) = matched_extended_bigrams(a, b);
    if total == 0 {
        return 0.0;
    }
    2.0 * offsets.len() as f64 / total as f64
}

/// XDICE where each shared extended bigram counts `1 / (1 + Δpos²)`.
pub fn xxdice<T: Copy + Ord>(a: &[T], b: &[T]) -> f64 {
    let (offsets, total) = matched_extended_bigrams(a, b);
    if total == 0 {
        return 0.0;
    }
    let weighted: f64 = offsets
        .iter()
        .map(|&d| 1.0 / (1.0 + (d * d) as f64))
        .sum();
    2.0 * weighted / total as f64
}

/// Number of per-alphabet measures.
pub const MEASURE_COUNT: usize = 10;

/// Total feature dimension: 10 measures × 3 alphabets + 3 length features.
pub const FEATURE_DIM: usize = MEASURE_COUNT * 3 + 3;

pub const MEASURE_NAMES: [&str; MEASURE_COUNT] = [
    "edit",
    "bigram",
    "lcs",
    "lcp",
    "trigram",
    "global",
    "local",
    "semiglobal",
    "xdice",
    "xxdice",
];

/// The three alphabets used for feature extraction, in feature order.
#[derive(Debug, Clone)]
pub struct SchemeSet {
    pub schemes: [SoundClassScheme; 3],
}

impl Default for SchemeSet {
    fn default() -> Self {
        SchemeSet {
            schemes: SchemeId::ALL.map(SoundClassScheme::builtin),
        }
    }
}

/// The orthographic feature vector of a word pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityFeatures {
    /// Measure-major: `measures[m * 3 + s]` is measure `m` on alphabet `s`.
    pub measures: [f64; MEASURE_COUNT * 3],
    pub len_a: usize,
    pub len_b: usize,
    pub abs_len_diff: usize,
}

impl SimilarityFeatures {
    pub fn measure(&self, measure: usize, scheme: usize) -> f64 {
        self.measures[measure * 3 + scheme]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.measures.to_vec();
        v.extend([self.len_a as f64, self.len_b as f64, self.abs_len_diff as f64]);
        v
    }

    /// Column names matching [`Self::to_vec`].
    pub fn names() -> Vec<String> {
        let mut names = Vec::with_capacity(FEATURE_DIM);
        for m in MEASURE_NAMES {
            for s in SchemeId::ALL {
                names.push(format!("{m}_{}", s.name().to_lowercase()));
            }
        }
        names.extend(["len_a", "len_b", "abs_len_diff"].map(String::from));
        names
    }
}

fn measures_for(a: &[char], b: &[char]) -> [f64; MEASURE_COUNT] {
    let scheme = MatchMismatch::default();
    [
        edit_distance(a, b) as f64,
        common_bigrams(a, b) as f64,
        lcs_length(a, b) as f64,
        lcp_length(a, b) as f64,
        common_trigrams(a, b) as f64,
        align_score(a, b, &scheme, AlignMode::Global),
        align_score(a, b, &scheme, AlignMode::Local),
        align_score(a, b, &scheme, AlignMode::SemiGlobal),
        xdice(a, b),
        xxdice(a, b),
    ]
}

pub fn extract_features(a: &Word, b: &Word, schemes: &SchemeSet) -> SimilarityFeatures {
    let mut measures = [0.0; MEASURE_COUNT * 3];
    for (s, scheme) in schemes.schemes.iter().enumerate() {
        let xa: Vec<char> = to_sound_class(a, scheme).chars().collect();
        let xb: Vec<char> = to_sound_class(b, scheme).chars().collect();
        for (m, value) in measures_for(&xa, &xb).into_iter().enumerate() {
            measures[m * 3 + s] = value;
        }
    }
    SimilarityFeatures {
        measures,
        len_a: a.len(),
        len_b: b.len(),
        abs_len_diff: a.len().abs_diff(b.len()),
    }
}
