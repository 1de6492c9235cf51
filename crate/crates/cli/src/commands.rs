use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use cognate::data::{self, Lexeme, WordPair};
use cognate::eval::{render_table, EvalReport};
use cognate::experiment::{self, ExperimentConfig, System, Trained};
use cognate::neural::{parse_checkpoint, to_checkpoint_text};
use cognate::pmi::PmiMatrix;
use cognate::similarity::SimilarityFeatures;
use cognate::svm::LinearModel;

use crate::config::Settings;
use crate::CliError;

const MODEL_FILE: &str = "model.txt";
const PMI_FILE: &str = "pmi.txt";

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects written files and records them, with the inputs and resolved
/// settings, in `manifest.txt`.
struct Run {
    command: &'static str,
    out: PathBuf,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

impl Run {
    fn start(command: &'static str, out: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
        Ok(Run {
            command,
            out: out.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push((path.display().to_string(), digest(&bytes)));
        String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{} is not UTF-8", path.display())))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push((name.to_string(), digest(contents.as_bytes())));
        Ok(())
    }

    fn finish(mut self, settings: &Settings) -> Result<(), CliError> {
        self.outputs.sort();
        let mut m = String::new();
        let _ = writeln!(m, "command = {}", self.command);
        let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(m, "\n[settings]");
        m.push_str(&settings.resolved());
        let _ = writeln!(m, "\n[inputs]");
        for (path, d) in &self.inputs {
            let _ = writeln!(m, "{d}  {path}");
        }
        let _ = writeln!(m, "\n[outputs]");
        for (name, d) in &self.outputs {
            let _ = writeln!(m, "{d}  {name}");
        }
        let path = self.out.join("manifest.txt");
        fs::write(&path, m).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }
}

fn load_lexemes(run: &mut Run, path: &Path) -> Result<Vec<Lexeme>, CliError> {
    let text = run.read(path)?;
    let wl = data::parse_wordlist(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if wl.skipped > 0 {
        log::warn!("{}: skipped {} rows with unparseable forms", path.display(), wl.skipped);
    }
    if wl.duplicates > 0 {
        log::info!("{}: dropped {} duplicate rows", path.display(), wl.duplicates);
    }
    if wl.lexemes.is_empty() {
        return Err(CliError::Data(format!("{}: no usable rows", path.display())));
    }
    Ok(wl.lexemes)
}

fn pair_prefix(p: &WordPair) -> String {
    format!("{}\t{}\t{}\t{}\t{}\t{}", p.concept, p.a.language, p.a.form, p.b.language, p.b.form, p.label)
}

const PAIR_HEADER: &str = "concept\tlanguage_a\tform_a\tlanguage_b\tform_b\tlabel";

pub fn featurize(settings: &Settings, data: &Path, out: &Path, pmi: Option<&Path>) -> Result<(), CliError> {
    let mut run = Run::start("featurize", out)?;
    let lexemes = load_lexemes(&mut run, data)?;
    let config = settings.experiment()?;
    let matrix = match pmi {
        Some(p) => Some(PmiMatrix::parse(&run.read(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let pairs = data::generate_pairs(&lexemes, config.pairs);
    let names: Vec<String> = match matrix {
        Some(_) => ["pmi_score", "len_a", "len_b", "abs_len_diff"].map(String::from).to_vec(),
        None => SimilarityFeatures::names(),
    };
    let rows = experiment::featurize(&pairs, matrix.as_ref());
    let mut tsv = format!("{PAIR_HEADER}\t{}\n", names.join("\t"));
    for (p, row) in pairs.iter().zip(&rows) {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(tsv, "{}\t{}", pair_prefix(p), vals.join("\t"));
    }
    run.write("features.tsv", &tsv)?;
    println!("{} pairs, {} features", pairs.len(), names.len());
    run.finish(settings)
}

pub fn pmi_train(settings: &Settings, data: &Path, out: &Path) -> Result<(), CliError> {
    let mut run = Run::start("pmi-train", out)?;
    let lexemes = load_lexemes(&mut run, data)?;
    let config = settings.experiment()?;
    let pairs = data::generate_pairs(&lexemes, config.pairs);
    let est = experiment::estimate_pmi_from_pairs(&pairs, &config.pmi).map_err(data_err)?;
    run.write(PMI_FILE, &est.matrix.to_text())?;
    println!(
        "{} seed pairs, {} iterations, converged: {}, final change {:e}",
        est.seed_pairs, est.iterations, est.converged, est.final_delta
    );
    run.finish(settings)
}

fn history(trained: &Trained) -> String {
    let mut s = String::new();
    match trained {
        Trained::Svm { grid: Some(g), model, .. } => {
            s.push_str("C\tcv_accuracy\n");
            for (c, acc) in &g.cv_scores {
                let _ = writeln!(s, "{c:?}\t{acc:.6}");
            }
            let _ = writeln!(s, "best_C\t{:?}", g.best_c);
            let _ = writeln!(s, "final_objective\t{:?}", model.objective_history.last().copied().unwrap_or(f64::NAN));
        }
        Trained::Svm { grid: None, .. } => {}
        Trained::Neural { report, .. } => {
            s.push_str("epoch\tloss\n");
            for (i, l) in report.epoch_loss.iter().enumerate() {
                let _ = writeln!(s, "{}\t{l:?}", i + 1);
            }
        }
    }
    s
}

fn save_trained(run: &mut Run, trained: &Trained) -> Result<(), CliError> {
    match trained {
        Trained::Svm { model, pmi, .. } => {
            run.write(MODEL_FILE, &model.to_text())?;
            if let Some(m) = pmi {
                run.write(PMI_FILE, &m.to_text())?;
            }
        }
        Trained::Neural { network, .. } => run.write(MODEL_FILE, &to_checkpoint_text(network))?,
    }
    run.write("history.tsv", &history(trained))
}

fn load_trained(run: &mut Run, dir: &Path) -> Result<Trained, CliError> {
    let text = run.read(&dir.join(MODEL_FILE))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Data(format!("{}: {e}", dir.join(MODEL_FILE).display()));
    if text.starts_with("cognate-svm") {
        let model = LinearModel::parse(&text).map_err(|e| bad(&e))?;
        let pmi_path = dir.join(PMI_FILE);
        let pmi = if pmi_path.exists() {
            Some(PmiMatrix::parse(&run.read(&pmi_path)?).map_err(|e| bad(&e))?)
        } else {
            None
        };
        let system = if pmi.is_some() { System::PmiSvm } else { System::OrthoSvm };
        Ok(Trained::Svm {
            system,
            model,
            pmi,
            grid: None,
        })
    } else {
        let network = parse_checkpoint(&text).map_err(|e| bad(&e))?;
        Ok(Trained::Neural {
            network,
            report: Default::default(),
        })
    }
}

fn select_pairs(lexemes: &[Lexeme], config: &ExperimentConfig, split: bool, train_side: bool) -> Result<Vec<WordPair>, CliError> {
    if split {
        let (train, test) = experiment::split_pairs(lexemes, config).map_err(data_err)?;
        Ok(if train_side { train } else { test })
    } else {
        Ok(data::generate_pairs(lexemes, config.pairs))
    }
}

pub fn train(settings: &Settings, data: &Path, out: &Path, split: bool) -> Result<(), CliError> {
    let mut run = Run::start("train", out)?;
    let lexemes = load_lexemes(&mut run, data)?;
    let config = settings.experiment()?;
    let pairs = select_pairs(&lexemes, &config, split, true)?;
    let trained = experiment::train_system(&pairs, &config).map_err(data_err)?;
    save_trained(&mut run, &trained)?;
    println!("trained {} on {} pairs", config.system.name(), pairs.len());
    run.finish(settings)
}

fn write_report(run: &mut Run, title: &str, system: System, report: &EvalReport) -> Result<String, CliError> {
    let table = render_table(title, &[(system.name(), report)]);
    run.write("report.tsv", &report.to_tsv())?;
    run.write("table.txt", &table)?;
    Ok(table)
}

pub fn evaluate(settings: &Settings, data: &Path, model: &Path, out: &Path, split: bool) -> Result<(), CliError> {
    let mut run = Run::start("evaluate", out)?;
    let lexemes = load_lexemes(&mut run, data)?;
    let config = settings.experiment()?;
    let trained = load_trained(&mut run, model)?;
    let pairs = select_pairs(&lexemes, &config, split, false)?;
    let (report, scores) = experiment::evaluate_pairs(&trained, &pairs, config.combine).map_err(data_err)?;
    let mut tsv = format!("{PAIR_HEADER}\tscore\n");
    for (p, s) in pairs.iter().zip(&scores) {
        let _ = writeln!(tsv, "{}\t{s:?}", pair_prefix(p));
    }
    run.write("scores.tsv", &tsv)?;
    let table = write_report(&mut run, &format!("{} pairs", pairs.len()), trained.system(), &report)?;
    print!("{table}");
    run.finish(settings)
}

pub fn pipeline(settings: &Settings, data: &Path, out: &Path) -> Result<(), CliError> {
    let mut run = Run::start("pipeline", out)?;
    let lexemes = load_lexemes(&mut run, data)?;
    let config = settings.experiment()?;
    let result = experiment::run_pipeline(&lexemes, &config).map_err(data_err)?;
    save_trained(&mut run, &result.trained)?;
    let title = format!(
        "{:?} split: {} train pairs, {} test pairs, majority rate {:.4}",
        config.split.mode, result.train_pairs, result.test_pairs, result.majority_rate
    );
    let table = write_report(&mut run, &title, config.system, &result.report)?;
    print!("{table}");
    run.finish(settings)
}
