use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ops;
use super::{Adadelta, AdadeltaConfig, Network, NeuralError, Sample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Contrastive-loss margin; unused by the sigmoid heads.
    pub margin: f64,
    pub seed: u64,
    pub optimizer: AdadeltaConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 128,
            margin: 1.0,
            seed: 0,
            optimizer: AdadeltaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean training loss per epoch, measured with dropout active.
    pub epoch_loss: Vec<f64>,
    pub steps: usize,
}

/// Mini-batch training. Samples are shuffled every epoch and each sample
/// draws a fresh dropout mask, all from one generator seeded by
/// `config.seed`, so identical inputs give identical weights.
pub fn train(net: &mut Network, samples: &[Sample], config: &TrainConfig) -> Result<TrainReport, NeuralError> {
    if config.batch_size == 0 {
        return Err(NeuralError::InvalidConfig("batch_size must be positive".into()));
    }
    if !(config.margin > 0.0) {
        return Err(NeuralError::InvalidConfig(format!("margin {} must be positive", config.margin)));
    }
    let mut report = TrainReport::default();
    if config.epochs == 0 {
        return Ok(report);
    }
    if samples.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut opt = Adadelta::new(config.optimizer, net.params().scalar_count());
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let rate = net.spec().dropout_rate;
    let mask_len = net.dropout_len();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = net.params().zeros_like();
            for &i in batch {
                let mask = (mask_len > 0).then(|| ops::dropout_mask(mask_len, rate, &mut rng));
                let (loss, g) = net.loss_and_grad(&samples[i], mask.as_deref(), config.margin)?;
                total += loss;
                grad.add_assign(&g);
            }
            grad.scale(1.0 / batch.len() as f64);
            opt.step(net.params_mut(), &grad);
            report.steps += 1;
        }
        let mean = total / samples.len() as f64;
        log::debug!("epoch {} loss {mean:.6}", epoch + 1);
        report.epoch_loss.push(mean);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{Architecture, ModelSpec};

    fn toy() -> Vec<Sample> {
        let mut out = Vec::new();
        for k in 0..8 {
            let mut a = vec![0.0; 160];
            for j in 0..16 {
                a[(k % 10) * 16 + j] = ((j + k) % 3 == 0) as u8 as f64;
            }
            let mut far = vec![0.0; 160];
            for (j, v) in far.iter_mut().enumerate() {
                *v = ((j + k) % 2) as f64;
            }
            out.push(Sample { a: a.clone(), b: a.clone(), label: 1 });
            out.push(Sample { a, b: far, label: 0 });
        }
        out
    }

    #[test]
    fn zero_epochs_leaves_weights() {
        let mut net = Network::new(ModelSpec::new(Architecture::Manhattan), 1).unwrap();
        let before = net.clone();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        let report = train(&mut net, &toy(), &cfg).unwrap();
        assert!(report.epoch_loss.is_empty());
        assert_eq!(net, before);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let mut net = Network::new(ModelSpec::new(Architecture::Manhattan), 1).unwrap();
        assert!(matches!(train(&mut net, &[], &TrainConfig::default()), Err(NeuralError::EmptyDataset)));
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let cfg = TrainConfig { epochs: 3, batch_size: 4, seed: 9, ..Default::default() };
        let run = || {
            let mut net = Network::new(ModelSpec::new(Architecture::TwoChannel), 5).unwrap();
            let r = train(&mut net, &toy(), &cfg).unwrap();
            (net, r)
        };
        assert_eq!(run(), run());
    }
}
