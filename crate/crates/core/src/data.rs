//! Word lists, within-concept pair generation and train/test splits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::phoneme::{parse_word, Word};

pub const HEADER: [&str; 5] = ["family", "language", "concept", "asjp_form", "cognate_class"];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DataError {
    #[error("{0}")]
    File(String),
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("families on both sides of the split: {}", .0.join(", "))]
    OverlappingFamilies(Vec<String>),
    #[error("the {0} side of the split is empty")]
    EmptySide(&'static str),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lexeme {
    pub family: String,
    pub language: String,
    pub concept: String,
    pub form: Word,
    pub cognate_class: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wordlist {
    pub lexemes: Vec<Lexeme>,
    /// Rows whose form did not parse as ASJP.
    pub skipped: usize,
    /// Exact repeats of an earlier row.
    pub duplicates: usize,
}

pub fn parse_wordlist(text: &str) -> Result<Wordlist, DataError> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (line, header) = rows.next().ok_or(DataError::Schema {
        line: 1,
        reason: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split('\t').map(str::trim).collect();
    if fields != HEADER {
        return Err(DataError::Schema {
            line,
            reason: format!("expected header `{}`", HEADER.join("\\t")),
        });
    }
    let mut seen = BTreeSet::new();
    let mut out = Wordlist {
        lexemes: Vec::new(),
        skipped: 0,
        duplicates: 0,
    };
    for (line, row) in rows {
        let fields: Vec<&str> = row.split('\t').map(str::trim).collect();
        if fields.len() != HEADER.len() {
            return Err(DataError::Schema {
                line,
                reason: format!("expected {} fields, got {}", HEADER.len(), fields.len()),
            });
        }
        if let Some(i) = fields.iter().position(|f| f.is_empty()) {
            return Err(DataError::Schema {
                line,
                reason: format!("empty `{}`", HEADER[i]),
            });
        }
        let form = match parse_word(fields[3]) {
            Ok(w) => w,
            Err(e) => {
                log::warn!("line {line}: skipping form {:?}: {e}", fields[3]);
                out.skipped += 1;
                continue;
            }
        };
        let lexeme = Lexeme {
            family: fields[0].to_string(),
            language: fields[1].to_string(),
            concept: fields[2].to_string(),
            form,
            cognate_class: fields[4].to_string(),
        };
        if !seen.insert(lexeme.clone()) {
            out.duplicates += 1;
            continue;
        }
        out.lexemes.push(lexeme);
    }
    Ok(out)
}

pub fn load_wordlist(path: &Path) -> Result<Wordlist, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::File(format!("{}: {e}", path.display())))?;
    parse_wordlist(&text)
}

pub fn wordlist_to_tsv(lexemes: &[Lexeme]) -> String {
    let mut out = HEADER.join("\t");
    out.push('\n');
    for l in lexemes {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", l.family, l.language, l.concept, l.form, l.cognate_class);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub a: Lexeme,
    pub b: Lexeme,
    pub label: u8,
    pub concept: String,
}

impl WordPair {
    pub fn family(&self) -> &str {
        &self.a.family
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairOptions {
    /// Also pair two forms of the same language (synonyms).
    pub include_same_language: bool,
}

/// All unordered pairs within each (family, concept) group, in a fixed
/// order. Within a pair, `a` sorts before `b` by (language, form).
pub fn generate_pairs(lexemes: &[Lexeme], options: PairOptions) -> Vec<WordPair> {
    let mut groups: BTreeMap<(&str, &str), Vec<&Lexeme>> = BTreeMap::new();
    for l in lexemes {
        groups.entry((&l.family, &l.concept)).or_default().push(l);
    }
    let mut pairs = Vec::new();
    for members in groups.values_mut() {
        members.sort_by(|x, y| {
            (&x.language, x.form.to_string(), &x.cognate_class).cmp(&(&y.language, y.form.to_string(), &y.cognate_class))
        });
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (a, b) = (members[i], members[j]);
                if a.language == b.language && !options.include_same_language {
                    continue;
                }
                pairs.push(WordPair {
                    a: a.clone(),
                    b: b.clone(),
                    label: (a.cognate_class == b.cognate_class) as u8,
                    concept: a.concept.clone(),
                });
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    CrossConcept,
    CrossFamily,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn cross_concept(seed: u64) -> Self {
        SplitSpec {
            mode: SplitMode::CrossConcept,
            train_fraction: 0.7,
            seed,
        }
    }

    pub fn cross_family(seed: u64) -> Self {
        SplitSpec {
            mode: SplitMode::CrossFamily,
            train_fraction: 0.7,
            seed,
        }
    }
}

/// Sorted concept ids shuffled by `seed` and cut at `round(fraction · n)`,
/// keeping at least one concept per side.
pub fn split_concepts(lexemes: &[Lexeme], fraction: f64, seed: u64) -> Result<(Vec<String>, Vec<String>), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::InvalidSplit(format!("train fraction {fraction} outside (0, 1)")));
    }
    let mut concepts: Vec<String> = lexemes
        .iter()
        .map(|l| l.concept.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if concepts.len() < 2 {
        return Err(DataError::EmptySide(if concepts.is_empty() { "train" } else { "test" }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    concepts.shuffle(&mut rng);
    let n = concepts.len();
    let n_train = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let test = concepts.split_off(n_train);
    Ok((concepts, test))
}

pub type Split = (Vec<WordPair>, Vec<WordPair>);

pub fn split(
    pairs: &[WordPair],
    lexemes: &[Lexeme],
    spec: &SplitSpec,
    train_families: &[String],
    test_families: &[String],
) -> Result<Split, DataError> {
    let (train, test): Split = match spec.mode {
        SplitMode::CrossConcept => {
            let (train_c, _) = split_concepts(lexemes, spec.train_fraction, spec.seed)?;
            let train_c: BTreeSet<&str> = train_c.iter().map(String::as_str).collect();
            pairs.iter().cloned().partition(|p| train_c.contains(p.concept.as_str()))
        }
        SplitMode::CrossFamily => {
            let train_f: BTreeSet<&str> = train_families.iter().map(String::as_str).collect();
            let test_f: BTreeSet<&str> = test_families.iter().map(String::as_str).collect();
            let shared: Vec<String> = train_f.intersection(&test_f).map(|s| s.to_string()).collect();
            if !shared.is_empty() {
                return Err(DataError::OverlappingFamilies(shared));
            }
            let train = pairs.iter().filter(|p| train_f.contains(p.family())).cloned().collect();
            let test = pairs.iter().filter(|p| test_f.contains(p.family())).cloned().collect();
            (train, test)
        }
    };
    if train.is_empty() {
        return Err(DataError::EmptySide("train"));
    }
    if test.is_empty() {
        return Err(DataError::EmptySide("test"));
    }
    Ok((train, test))
}

/// Keeps the lexemes of `n` languages drawn by `seed` from the sorted
/// language ids; all lexemes when there are at most `n` languages.
pub fn subset_languages(lexemes: &[Lexeme], n: usize, seed: u64) -> Vec<Lexeme> {
    let mut languages: Vec<&str> = lexemes
        .iter()
        .map(|l| l.language.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if languages.len() > n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        languages.shuffle(&mut rng);
        languages.truncate(n);
    }
    let keep: BTreeSet<&str> = languages.into_iter().collect();
    lexemes.iter().filter(|l| keep.contains(l.language.as_str())).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(family: &str, language: &str, concept: &str, form: &str, class: &str) -> Lexeme {
        Lexeme {
            family: family.into(),
            language: language.into(),
            concept: concept.into(),
            form: parse_word(form).unwrap(),
            cognate_class: class.into(),
        }
    }

    #[test]
    fn parses_rows_and_skips_bad_forms() {
        let text = "# comment\nfamily\tlanguage\tconcept\tasjp_form\tcognate_class\n\
                    IE\tEnglish\thand\thEnd\t1\nIE\tGerman\thand\thant\t1\nIE\tFrench\thand\tmE\t2\n";
        let wl = parse_wordlist(text).unwrap();
        assert_eq!(wl.lexemes.len(), 3);
        assert_eq!(wl.skipped, 0);
        let bad = format!("{text}IE\tDutch\thand\tf@t\t1\nIE\tGerman\thand\thant\t1\n");
        let wl = parse_wordlist(&bad).unwrap();
        assert_eq!((wl.lexemes.len(), wl.skipped, wl.duplicates), (3, 1, 1));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_wordlist(""), Err(DataError::Schema { .. })));
        assert!(matches!(parse_wordlist("a\tb\n"), Err(DataError::Schema { line: 1, .. })));
        let short = "family\tlanguage\tconcept\tasjp_form\tcognate_class\nIE\tEnglish\thand\n";
        assert!(matches!(parse_wordlist(short), Err(DataError::Schema { line: 2, .. })));
    }

    #[test]
    fn pairs_within_a_concept() {
        let lexemes = vec![
            lex("F", "L1", "c", "abu", "A"),
            lex("F", "L2", "c", "apu", "A"),
            lex("F", "L3", "c", "tiko", "B"),
        ];
        let pairs = generate_pairs(&lexemes, PairOptions::default());
        assert_eq!(pairs.len(), 3);
        let pos: Vec<_> = pairs.iter().filter(|p| p.label == 1).map(|p| (&p.a.language[..], &p.b.language[..])).collect();
        assert_eq!(pos, vec![("L1", "L2")]);
        assert_eq!(pairs.iter().filter(|p| p.label == 0).count(), 2);
    }

    #[test]
    fn same_language_pairs_need_the_flag() {
        let lexemes = vec![lex("F", "L1", "c", "abu", "A"), lex("F", "L1", "c", "mana", "B")];
        assert!(generate_pairs(&lexemes, PairOptions::default()).is_empty());
        let opts = PairOptions { include_same_language: true };
        assert_eq!(generate_pairs(&lexemes, opts).len(), 1);
    }

    #[test]
    fn no_pairs_across_concepts_or_families() {
        let lexemes = vec![
            lex("F", "L1", "c", "abu", "A"),
            lex("G", "L2", "c", "abu", "A"),
            lex("F", "L3", "d", "abu", "A"),
        ];
        assert!(generate_pairs(&lexemes, PairOptions::default()).is_empty());
    }

    fn ten_concepts() -> Vec<Lexeme> {
        let mut out = Vec::new();
        for c in 0..10 {
            for l in 0..3 {
                out.push(lex("F", &format!("L{l}"), &format!("c{c}"), "pata", &format!("{}", l % 2)));
            }
        }
        out
    }

    #[test]
    fn cross_concept_split_partitions_concepts() {
        let lexemes = ten_concepts();
        let pairs = generate_pairs(&lexemes, PairOptions::default());
        let spec = SplitSpec::cross_concept(7);
        let (train, test) = split(&pairs, &lexemes, &spec, &[], &[]).unwrap();
        let tc: BTreeSet<_> = train.iter().map(|p| p.concept.clone()).collect();
        let sc: BTreeSet<_> = test.iter().map(|p| p.concept.clone()).collect();
        assert_eq!((tc.len(), sc.len()), (7, 3));
        assert!(tc.is_disjoint(&sc));
        assert_eq!(split(&pairs, &lexemes, &spec, &[], &[]).unwrap(), (train, test));
    }

    #[test]
    fn cross_family_rejects_overlap() {
        let lexemes = ten_concepts();
        let pairs = generate_pairs(&lexemes, PairOptions::default());
        let spec = SplitSpec::cross_family(0);
        let train = vec!["F".to_string(), "Mayan".to_string()];
        let test = vec!["F".to_string()];
        assert_eq!(
            split(&pairs, &lexemes, &spec, &train, &test),
            Err(DataError::OverlappingFamilies(vec!["F".into()]))
        );
        let test = vec!["IE".to_string()];
        assert_eq!(split(&pairs, &lexemes, &spec, &train, &test), Err(DataError::EmptySide("test")));
    }

    #[test]
    fn fraction_rounds_and_clamps() {
        let lexemes = ten_concepts();
        let (train, test) = split_concepts(&lexemes, 0.01, 1).unwrap();
        assert_eq!((train.len(), test.len()), (1, 9));
        let (train, test) = split_concepts(&lexemes, 0.99, 1).unwrap();
        assert_eq!((train.len(), test.len()), (9, 1));
        assert!(split_concepts(&lexemes, 1.0, 1).is_err());
    }

    #[test]
    fn language_subset_is_seeded() {
        let lexemes = ten_concepts();
        let sub = subset_languages(&lexemes, 2, 3);
        let langs: BTreeSet<_> = sub.iter().map(|l| l.language.clone()).collect();
        assert_eq!(langs.len(), 2);
        assert_eq!(sub, subset_languages(&lexemes, 2, 3));
        assert_eq!(subset_languages(&lexemes, 5, 3).len(), lexemes.len());
    }

    #[test]
    fn tsv_round_trip() {
        let lexemes = ten_concepts();
        assert_eq!(parse_wordlist(&wordlist_to_tsv(&lexemes)).unwrap().lexemes, lexemes);
    }
}
