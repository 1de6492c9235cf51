//! ASJP symbol inventory, binary phonetic features and sound-class alphabets.
//!
//! Every consonant of the ASJP alphabet is encoded as a 16-bit feature vector.
//! All vowels collapse onto the single symbol `V`, which only carries the
//! voicing feature. A word is rendered as a `pad_len × 16` binary matrix with
//! one row per symbol and trailing zero rows.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

/// Number of symbols in the inventory (34 consonants plus `V`).
pub const INVENTORY_SIZE: usize = 35;

/// Number of binary phonetic features per symbol.
pub const FEATURE_COUNT: usize = 16;

/// Default padded word length of a [`WordMatrix`].
pub const DEFAULT_PAD_LEN: usize = 10;

/// ASJP vowel letters, all mapped to `V`.
pub const VOWELS: [char; 7] = ['i', 'e', 'E', '3', 'a', 'u', 'o'];

/// ASJP modifier and juncture characters removed before parsing.
pub const MODIFIERS: [char; 7] = ['~', '$', '"', '*', '-', ' ', '_'];

/// Names of the feature columns, in bit order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "Voiced",
    "Labial",
    "Dental",
    "Alveolar",
    "Palatal/Post-alveolar",
    "Velar",
    "Uvular",
    "Glottal",
    "Stop",
    "Fricative",
    "Affricate",
    "Nasal",
    "Click",
    "Approximant",
    "Lateral",
    "Rhotic",
];

const SYMBOLS: [char; INVENTORY_SIZE] = [
    'p', 'b', 'f', 'v', 'm', '8', '4', 't', 'd', 's', 'z', 'c', 'n', 'S', 'Z', 'C', 'j', 'T', '5',
    'k', 'g', 'x', 'N', 'q', 'G', 'X', '7', 'h', 'l', 'L', 'w', 'y', 'r', '!', 'V',
];

#[rustfmt::skip]
const FEATURES: [[u8; FEATURE_COUNT]; INVENTORY_SIZE] = [
    [0,1,0,0,0,0,0,0,1,1,0,0,0,0,0,0], // p
    [1,1,0,0,0,0,0,0,1,1,0,0,0,0,0,0], // b
    [0,1,1,0,0,0,0,0,0,1,0,0,0,0,0,0], // f
    [1,1,1,0,0,0,0,0,0,1,0,0,0,0,0,0], // v
    [1,1,0,0,0,0,0,0,0,0,0,1,0,0,0,0], // m
    [1,0,1,0,0,0,0,0,0,1,0,0,0,0,0,0], // 8
    [1,0,1,0,0,0,0,0,0,0,0,1,0,0,0,0], // 4
    [0,0,0,1,0,0,0,0,1,0,0,0,0,0,0,0], // t
    [1,0,0,1,0,0,0,0,1,0,0,0,0,0,0,0], // d
    [0,0,0,1,0,0,0,0,0,1,0,0,0,0,0,0], // s
    [1,0,0,1,0,0,0,0,0,1,0,0,0,0,0,0], // z
    [1,0,0,1,0,0,0,0,0,0,1,0,0,0,0,0], // c
    [1,0,0,1,0,0,0,0,0,0,0,1,0,0,0,0], // n
    [0,0,0,0,1,0,0,0,0,1,0,0,0,0,0,0], // S
    [1,0,0,0,1,0,0,0,0,1,0,0,0,0,0,0], // Z
    [0,0,0,0,1,0,0,0,0,0,1,0,0,0,0,0], // C
    [1,0,0,0,1,0,0,0,0,0,1,0,0,0,0,0], // j
    [1,0,0,0,1,0,0,0,1,0,0,0,0,0,0,0], // T
    [0,0,0,0,1,0,0,0,0,0,0,1,0,0,0,0], // 5
    [0,0,0,0,0,1,0,0,1,0,0,0,0,0,0,0], // k
    [1,0,0,0,0,1,0,0,1,0,0,0,0,0,0,0], // g
    [1,0,0,0,0,1,0,0,0,1,0,0,0,0,0,0], // x
    [1,0,0,0,0,1,0,0,0,0,0,1,0,0,0,0], // N
    [0,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0], // q
    [1,0,0,0,0,0,1,0,1,0,0,0,0,0,0,0], // G
    [1,0,0,0,0,0,1,0,0,1,0,0,0,0,0,0], // X
    [0,0,0,0,0,0,0,1,1,0,0,0,0,0,0,0], // 7
    [1,0,0,0,0,0,0,1,0,1,0,0,0,0,0,0], // h
    [1,0,0,0,0,0,0,0,0,0,0,0,0,1,1,0], // l
    [1,0,0,0,0,0,0,0,0,0,0,0,0,0,1,0], // L
    [1,1,0,0,0,1,0,0,0,0,0,0,0,1,0,0], // w
    [1,0,0,0,1,0,0,0,0,0,0,0,0,1,0,0], // y
    [1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1], // r
    [1,0,0,0,0,0,0,0,0,0,0,0,1,0,0,0], // !
    [1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0], // V
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhonemeError {
    #[error("unknown symbol {0:?} at position {1}")]
    UnknownSymbol(char, usize),
    #[error("empty transcription")]
    EmptyTranscription,
    #[error("sound-class table line {line}: {reason}")]
    MalformedTable { line: usize, reason: String },
    #[error("sound-class table has no label for symbol {0:?}")]
    IncompleteTable(char),
    #[error("reading sound-class table: {0}")]
    Io(String),
}

/// One symbol of the collapsed ASJP inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AsjpSymbol(u8);

impl AsjpSymbol {
    /// The collapsed vowel.
    pub const VOWEL: AsjpSymbol = AsjpSymbol((INVENTORY_SIZE - 1) as u8);

    /// Looks up a consonant or `V`. Raw vowel letters are not accepted here.
    pub fn from_char(c: char) -> Option<Self> {
        SYMBOLS.iter().position(|&s| s == c).map(|i| AsjpSymbol(i as u8))
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < INVENTORY_SIZE).then_some(AsjpSymbol(index as u8))
    }

    /// Dense index in `0..INVENTORY_SIZE`, in table order.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn as_char(self) -> char {
        SYMBOLS[self.index()]
    }

    pub fn is_vowel(self) -> bool {
        self == Self::VOWEL
    }

    /// All 35 symbols in table order.
    pub fn all() -> impl Iterator<Item = AsjpSymbol> {
        (0..INVENTORY_SIZE).map(|i| AsjpSymbol(i as u8))
    }
}

impl fmt::Display for AsjpSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Sixteen binary phonetic features packed into the low bits of a `u16`.
/// Bit `i` holds feature `FEATURE_NAMES[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FeatureVector(u16);

impl FeatureVector {
    pub const ZERO: FeatureVector = FeatureVector(0);

    pub fn from_bits(bits: [u8; FEATURE_COUNT]) -> Self {
        let packed = bits
            .iter()
            .enumerate()
            .fold(0u16, |acc, (i, &b)| acc | (((b != 0) as u16) << i));
        FeatureVector(packed)
    }

    pub fn get(self, feature: usize) -> bool {
        feature < FEATURE_COUNT && (self.0 >> feature) & 1 == 1
    }

    pub fn bits(self) -> [u8; FEATURE_COUNT] {
        let mut out = [0u8; FEATURE_COUNT];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.get(i) as u8;
        }
        out
    }

    pub fn raw(self) -> u16 {
        self.0
    }
}

/// Feature vector of a symbol.
pub fn binarize(s: AsjpSymbol) -> FeatureVector {
    FeatureVector::from_bits(FEATURES[s.index()])
}

/// A nonempty sequence of ASJP symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<AsjpSymbol>);

impl Word {
    pub fn new(symbols: Vec<AsjpSymbol>) -> Result<Self, PhonemeError> {
        if symbols.is_empty() {
            return Err(PhonemeError::EmptyTranscription);
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[AsjpSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn chars(&self) -> Vec<char> {
        self.0.iter().map(|s| s.as_char()).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Word {
    type Err = PhonemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_word(s)
    }
}

/// Result of parsing with modifier bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedWord {
    pub word: Word,
    /// Number of modifier or juncture characters removed.
    pub stripped: usize,
}

/// Parses an ASJP transcription, collapsing vowels and dropping modifiers.
///
/// Positions in [`PhonemeError::UnknownSymbol`] are character offsets in the
/// original text.
pub fn parse_word_counted(transcription: &str) -> Result<ParsedWord, PhonemeError> {
    let mut symbols = Vec::with_capacity(transcription.len());
    let mut stripped = 0;
    for (pos, c) in transcription.chars().enumerate() {
        if MODIFIERS.contains(&c) {
            stripped += 1;
        } else if VOWELS.contains(&c) {
            symbols.push(AsjpSymbol::VOWEL);
        } else {
            symbols.push(AsjpSymbol::from_char(c).ok_or(PhonemeError::UnknownSymbol(c, pos))?);
        }
    }
    Ok(ParsedWord {
        word: Word::new(symbols)?,
        stripped,
    })
}

pub fn parse_word(transcription: &str) -> Result<Word, PhonemeError> {
    let parsed = parse_word_counted(transcription)?;
    if parsed.stripped > 0 {
        log::debug!("stripped {} modifier(s) from {transcription:?}", parsed.stripped);
    }
    Ok(parsed.word)
}

/// A word rendered as a zero-padded `pad_len × 16` binary matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordMatrix {
    rows: Vec<FeatureVector>,
    true_len: usize,
    truncated: bool,
}

impl WordMatrix {
    pub fn pad_len(&self) -> usize {
        self.rows.len()
    }

    /// Number of non-padding rows.
    pub fn true_len(&self) -> usize {
        self.true_len
    }

    /// Whether symbols were dropped to fit `pad_len`.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn row(&self, r: usize) -> FeatureVector {
        self.rows[r]
    }

    pub fn get(&self, r: usize, feature: usize) -> bool {
        self.rows[r].get(feature)
    }

    /// Row-major `pad_len × 16` values in `{0.0, 1.0}`.
    pub fn to_f64(&self) -> Vec<f64> {
        self.rows
            .iter()
            .flat_map(|fv| (0..FEATURE_COUNT).map(move |i| fv.get(i) as u8 as f64))
            .collect()
    }
}

pub fn word_to_matrix(w: &Word, pad_len: usize) -> WordMatrix {
    assert!(pad_len >= 1, "pad_len must be positive");
    let true_len = w.len().min(pad_len);
    let truncated = w.len() > pad_len;
    if truncated {
        log::warn!("word {w} has {} symbols, truncated to {pad_len}", w.len());
    }
    let mut rows = vec![FeatureVector::ZERO; pad_len];
    for (row, &s) in rows.iter_mut().zip(w.symbols()) {
        *row = binarize(s);
    }
    WordMatrix {
        rows,
        true_len,
        truncated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Asjp,
    Dolgo,
    Sca,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Asjp, SchemeId::Dolgo, SchemeId::Sca];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Asjp => "ASJP",
            SchemeId::Dolgo => "DOLGO",
            SchemeId::Sca => "SCA",
        }
    }
}

/// A total mapping from the ASJP inventory to single-character class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundClassScheme {
    id: SchemeId,
    labels: [char; INVENTORY_SIZE],
}

const DOLGO_TABLE: &str = include_str!("../data/dolgo.tsv");
const SCA_TABLE: &str = include_str!("../data/sca.tsv");

impl SoundClassScheme {
    /// Identity scheme: each symbol is its own class.
    pub fn asjp() -> Self {
        SoundClassScheme {
            id: SchemeId::Asjp,
            labels: SYMBOLS,
        }
    }

    pub fn dolgo() -> &'static Self {
        static SCHEME: OnceLock<SoundClassScheme> = OnceLock::new();
        SCHEME.get_or_init(|| {
            Self::parse(SchemeId::Dolgo, DOLGO_TABLE).expect("bundled Dolgopolsky table is total")
        })
    }

    pub fn sca() -> &'static Self {
        static SCHEME: OnceLock<SoundClassScheme> = OnceLock::new();
        SCHEME.get_or_init(|| {
            Self::parse(SchemeId::Sca, SCA_TABLE).expect("bundled SCA table is total")
        })
    }

    pub fn builtin(id: SchemeId) -> Self {
        match id {
            SchemeId::Asjp => Self::asjp(),
            SchemeId::Dolgo => Self::dolgo().clone(),
            SchemeId::Sca => Self::sca().clone(),
        }
    }

    /// Parses a `symbol<TAB>label` table. Every inventory symbol must be
    /// labelled exactly once and labels must be single characters.
    pub fn parse(id: SchemeId, text: &str) -> Result<Self, PhonemeError> {
        let mut labels: [Option<char>; INVENTORY_SIZE] = [None; INVENTORY_SIZE];
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| PhonemeError::MalformedTable {
                line: line_no,
                reason: reason.to_string(),
            };
            let (sym, label) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected symbol<TAB>label"))?;
            let mut sym_chars = sym.trim().chars();
            let (Some(sym), None) = (sym_chars.next(), sym_chars.next()) else {
                return Err(malformed("symbol must be a single character"));
            };
            let mut label_chars = label.trim().chars();
            let (Some(label), None) = (label_chars.next(), label_chars.next()) else {
                return Err(malformed("label must be a single character"));
            };
            let symbol = AsjpSymbol::from_char(sym).ok_or_else(|| malformed("unknown symbol"))?;
            if labels[symbol.index()].replace(label).is_some() {
                return Err(malformed("duplicate symbol"));
            }
        }
        let mut out = [' '; INVENTORY_SIZE];
        for s in AsjpSymbol::all() {
            out[s.index()] = labels[s.index()].ok_or(PhonemeError::IncompleteTable(s.as_char()))?;
        }
        Ok(SoundClassScheme { id, labels: out })
    }

    pub fn load(id: SchemeId, path: &Path) -> Result<Self, PhonemeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PhonemeError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(id, &text)
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    pub fn label(&self, s: AsjpSymbol) -> char {
        self.labels[s.index()]
    }

    /// Number of distinct class labels.
    pub fn class_count(&self) -> usize {
        let mut seen: Vec<char> = self.labels.to_vec();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Renders `w` in the class alphabet of `scheme`.
pub fn to_sound_class(w: &Word, scheme: &SoundClassScheme) -> String {
    w.symbols().iter().map(|&s| scheme.label(s)).collect()
}
