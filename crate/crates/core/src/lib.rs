pub mod phoneme;
pub mod similarity;
pub mod pmi;
pub mod neural;
pub mod svm;
pub mod data;
pub mod eval;
pub mod synth;
pub mod experiment;
