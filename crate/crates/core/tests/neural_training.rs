use cognate::neural::ops::{dropout, dropout_mask};
use cognate::neural::{
    load_checkpoint, save_checkpoint, train, Architecture, ModelSpec, Network, Sample, TrainConfig,
};
use cognate::phoneme::{parse_word, word_to_matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_samples() -> Vec<Sample> {
    let words = ["pater", "fada", "mama", "nana", "kanis", "hund", "tri", "drei", "lupus", "volk"];
    let mats: Vec<_> = words
        .iter()
        .map(|w| word_to_matrix(&parse_word(w).unwrap(), 10))
        .collect();
    let mut out = Vec::new();
    for (i, a) in mats.iter().enumerate() {
        out.push(Sample::from_matrices(a, a, 1));
        let b = &mats[(i + 3) % mats.len()];
        out.push(Sample::from_matrices(a, b, 0));
    }
    out
}

fn accuracy(net: &Network, samples: &[Sample]) -> f64 {
    let correct = samples
        .iter()
        .filter(|s| (net.predict(&s.a, &s.b).unwrap() >= 0.5) == (s.label == 1))
        .count();
    correct as f64 / samples.len() as f64
}

#[test]
fn sigmoid_heads_fit_a_toy_set() {
    let samples = toy_samples();
    for arch in [Architecture::Manhattan, Architecture::TwoChannel] {
        let mut net = Network::new(ModelSpec::new(arch), 3).unwrap();
        let cfg = TrainConfig { epochs: 50, batch_size: 4, seed: 1, ..Default::default() };
        let report = train(&mut net, &samples, &cfg).unwrap();
        assert_eq!(report.epoch_loss.len(), 50);
        assert!(report.epoch_loss.iter().all(|l| l.is_finite()));
        assert!(report.epoch_loss.last().unwrap() < &report.epoch_loss[0], "{arch:?}");
        assert_eq!(accuracy(&net, &samples), 1.0, "{arch:?}");
        for s in samples.iter().filter(|s| s.label == 0) {
            assert!(net.predict(&s.a, &s.a).unwrap() >= net.predict(&s.a, &s.b).unwrap());
        }
    }
}

#[test]
fn a_different_shuffle_seed_changes_history_but_still_fits() {
    let samples = toy_samples();
    let run = |seed| {
        let mut net = Network::new(ModelSpec::new(Architecture::Manhattan), 3).unwrap();
        let cfg = TrainConfig { epochs: 50, batch_size: 4, seed, ..Default::default() };
        let report = train(&mut net, &samples, &cfg).unwrap();
        (accuracy(&net, &samples), report.epoch_loss)
    };
    let (acc1, h1) = run(1);
    let (acc2, h2) = run(2);
    assert_ne!(h1, h2);
    assert_eq!(acc1, 1.0);
    assert_eq!(acc2, 1.0);
    assert_eq!(run(2).1, h2);
}

#[test]
fn siamese_separates_identical_pairs() {
    let samples = toy_samples();
    let mut net = Network::new(ModelSpec::new(Architecture::SiameseEuclid), 3).unwrap();
    let cfg = TrainConfig { epochs: 200, batch_size: 8, seed: 1, ..Default::default() };
    train(&mut net, &samples, &cfg).unwrap();
    for s in &samples {
        let d = net.output(&s.a, &s.b).unwrap();
        if s.label == 0 {
            assert!(d > 0.5, "negative pair at distance {d}");
        } else {
            assert_eq!(d, 0.0);
        }
    }
}

#[test]
fn dropout_output_mean_matches_inference() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..8).map(|i| 0.25 + i as f64 * 0.5).collect();
    let (inference, _) = dropout(&x, 0.5, false, &mut rng);
    assert_eq!(inference, x);
    let trials = 20_000;
    let mut sum = vec![0.0; x.len()];
    for _ in 0..trials {
        let (out, _) = dropout(&x, 0.5, true, &mut rng);
        for (s, v) in sum.iter_mut().zip(out) {
            *s += v;
        }
    }
    for (s, v) in sum.iter().zip(&x) {
        let mean = s / trials as f64;
        assert!((mean - v).abs() <= 0.02 * v, "{mean} vs {v}");
    }
}

#[test]
fn dropout_mask_preserves_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mask = dropout_mask(n, 0.5, &mut rng);
    let mean = mask.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 0.01, "{mean}");
    assert!(mask.iter().all(|&m| m == 0.0 || m == 2.0));
}

#[test]
fn trained_model_round_trips_through_a_file() {
    let samples = toy_samples();
    let mut net = Network::new(ModelSpec::new(Architecture::Manhattan), 8).unwrap();
    train(&mut net, &samples, &TrainConfig { epochs: 2, ..Default::default() }).unwrap();
    let dir = std::env::temp_dir().join(format!("cognate-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.txt");
    save_checkpoint(&net, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(back, net);
    for s in &samples {
        assert_eq!(back.predict(&s.a, &s.b).unwrap().to_bits(), net.predict(&s.a, &s.b).unwrap().to_bits());
    }
}

#[test]
fn weights_are_tied_across_branches() {
    let mut net = Network::new(ModelSpec::new(Architecture::Manhattan), 2).unwrap();
    for (i, v) in net.params_mut().get_mut("conv1.kernel").unwrap().data_mut().iter_mut().enumerate() {
        *v += 0.01 * i as f64;
    }
    let s = &toy_samples()[0];
    let (left, right) = (net.branch_output(&s.a).unwrap(), net.branch_output(&s.b).unwrap());
    assert_eq!(left, right);
    assert_eq!(net.predict(&s.a, &s.b).unwrap(), net.predict(&s.a, &s.a).unwrap());
    let s = &toy_samples()[1];
    let swapped = Sample { a: s.b.clone(), b: s.a.clone(), label: s.label };
    assert_eq!(net.predict(&s.a, &s.b).unwrap(), net.predict(&swapped.a, &swapped.b).unwrap());
    assert_eq!(net.branch_output(&s.a).unwrap().len(), 240);
}

mod losses {
    use cognate::neural::ops::{contrastive_loss, log_loss};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn losses_are_nonnegative(d in 0.0f64..10.0, p in 0.0f64..=1.0, margin in 0.01f64..5.0, label in 0u8..2) {
            prop_assert!(contrastive_loss(d, label, margin) >= 0.0);
            prop_assert!(log_loss(p, label) >= 0.0);
            prop_assert!(log_loss(p, label).is_finite());
        }
    }
}
