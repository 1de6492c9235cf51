//! Central-difference gradient checks.
//!
//! A coordinate is compared only when the discrete activation pattern (ReLU
//! activity, pooling winners, signs) is identical at `x - h`, `x` and `x + h`;
//! otherwise it straddles a kink and is counted as skipped.

use cognate::neural::ops;
use cognate::neural::{Architecture, ModelSpec, Network, Sample, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, Default)]
pub struct GradStats {
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_err: f64,
}

impl GradStats {
    pub fn merge(&mut self, other: GradStats) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.max_rel_err < TOLERANCE && self.skipped * 10 <= self.checked + self.skipped
    }
}

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-4)
}

/// Checks `analytic` against differences of `f`, which returns the loss and
/// the activation signature at a point.
pub fn check<F>(x: &[f64], analytic: &[f64], mut f: F) -> GradStats
where
    F: FnMut(&[f64]) -> (f64, Vec<i64>),
{
    assert_eq!(x.len(), analytic.len());
    let (_, base_sig) = f(x);
    let mut stats = GradStats::default();
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + STEP;
        let (lp, sp) = f(&probe);
        probe[i] = x[i] - STEP;
        let (lm, sm) = f(&probe);
        probe[i] = x[i];
        if sp != base_sig || sm != base_sig {
            stats.skipped += 1;
            continue;
        }
        let numeric = (lp - lm) / (2.0 * STEP);
        stats.checked += 1;
        stats.max_rel_err = stats.max_rel_err.max(rel_err(analytic[i], numeric));
    }
    stats
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_vec(shape, uniform(rng, shape.iter().product())).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn conv2d_case(rng: &mut ChaCha8Rng) -> GradStats {
    let (kh, kw) = (rng.gen_range(1..4), rng.gen_range(1..4));
    let (h, w) = (kh + rng.gen_range(0..4), kw + rng.gen_range(0..4));
    let (c, f) = (rng.gen_range(1..4), rng.gen_range(1..4));
    let input = tensor(rng, &[h, w, c]);
    let kernels = tensor(rng, &[kh, kw, c, f]);
    let bias = tensor(rng, &[f]);
    let out_shape = [h - kh + 1, w - kw + 1, f];
    let r = tensor(rng, &out_shape);
    let g = ops::conv2d_backward(&input, &kernels, &r).unwrap();
    let loss = |i: &Tensor, k: &Tensor, b: &Tensor| dot(ops::conv2d(i, k, b).unwrap().data(), r.data());
    let mut stats = check(input.data(), g.input.data(), |x| {
        (loss(&Tensor::from_vec(input.shape(), x.to_vec()).unwrap(), &kernels, &bias), vec![])
    });
    stats.merge(check(kernels.data(), g.kernels.data(), |x| {
        (loss(&input, &Tensor::from_vec(kernels.shape(), x.to_vec()).unwrap(), &bias), vec![])
    }));
    stats.merge(check(bias.data(), g.bias.data(), |x| {
        (loss(&input, &kernels, &Tensor::from_vec(bias.shape(), x.to_vec()).unwrap()), vec![])
    }));
    stats
}

pub fn relu_case(rng: &mut ChaCha8Rng) -> GradStats {
    let shape = [rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..4)];
    let x = tensor(rng, &shape);
    let r = tensor(rng, &shape);
    let g = ops::relu_backward(&x, &r).unwrap();
    check(x.data(), g.data(), |v| {
        let t = Tensor::from_vec(&shape, v.to_vec()).unwrap();
        let sig = v.iter().map(|z| (*z > 0.0) as i64).collect();
        (dot(ops::relu(&t).data(), r.data()), sig)
    })
}

pub fn maxpool_case(rng: &mut ChaCha8Rng) -> GradStats {
    let window = (rng.gen_range(1..3), rng.gen_range(1..3));
    let shape = [window.0 * rng.gen_range(1..4) + rng.gen_range(0..2), window.1 * rng.gen_range(1..4), rng.gen_range(1..4)];
    let x = tensor(rng, &shape);
    let (pooled, argmax) = ops::maxpool(&x, window).unwrap();
    let r = tensor(rng, pooled.shape());
    let g = ops::maxpool_backward(&shape, &argmax, &r).unwrap();
    check(x.data(), g.data(), |v| {
        let (p, am) = ops::maxpool(&Tensor::from_vec(&shape, v.to_vec()).unwrap(), window).unwrap();
        (dot(p.data(), r.data()), am.iter().map(|&i| i as i64).collect())
    })
}

pub fn dense_case(rng: &mut ChaCha8Rng) -> GradStats {
    let (n, m) = (rng.gen_range(1..12), rng.gen_range(1..6));
    let x = uniform(rng, n);
    let w = tensor(rng, &[n, m]);
    let b = tensor(rng, &[m]);
    let r = uniform(rng, m);
    let g = ops::dense_backward(&x, &w, &r).unwrap();
    let loss = |x: &[f64], w: &Tensor, b: &Tensor| dot(&ops::dense(x, w, b).unwrap(), &r);
    let mut stats = check(&x, &g.input, |v| (loss(v, &w, &b), vec![]));
    stats.merge(check(w.data(), g.weights.data(), |v| {
        (loss(&x, &Tensor::from_vec(&[n, m], v.to_vec()).unwrap(), &b), vec![])
    }));
    stats.merge(check(b.data(), g.bias.data(), |v| {
        (loss(&x, &w, &Tensor::from_vec(&[m], v.to_vec()).unwrap()), vec![])
    }));
    stats
}

pub fn abs_diff_case(rng: &mut ChaCha8Rng) -> GradStats {
    let n = rng.gen_range(1..12);
    let (u, v) = (uniform(rng, n), uniform(rng, n));
    let r = uniform(rng, n);
    let (gu, gv) = ops::abs_diff_backward(&u, &v, &r);
    let sig = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).signum() as i64).collect();
    let mut stats = check(&u, &gu, |x| (dot(&ops::abs_diff(x, &v).unwrap(), &r), sig(x, &v)));
    stats.merge(check(&v, &gv, |x| (dot(&ops::abs_diff(&u, x).unwrap(), &r), sig(&u, x))));
    stats
}

pub fn euclid_case(rng: &mut ChaCha8Rng) -> GradStats {
    let n = rng.gen_range(1..12);
    let (u, v) = (uniform(rng, n), uniform(rng, n));
    let scale = rng.gen_range(-2.0..2.0);
    let d = ops::euclid(&u, &v).unwrap();
    let (gu, gv) = ops::euclid_backward(&u, &v, d, scale);
    let mut stats = check(&u, &gu, |x| (scale * ops::euclid(x, &v).unwrap(), vec![]));
    stats.merge(check(&v, &gv, |x| (scale * ops::euclid(&u, x).unwrap(), vec![])));
    stats
}

pub fn sigmoid_log_loss_case(rng: &mut ChaCha8Rng) -> GradStats {
    let z = rng.gen_range(-6.0..6.0);
    let label = rng.gen_range(0..2u8);
    let p = ops::sigmoid(z);
    let analytic = ops::log_loss_grad(p, label) * p * (1.0 - p);
    check(&[z], &[analytic], |x| (ops::log_loss(ops::sigmoid(x[0]), label), vec![]))
}

pub fn contrastive_case(rng: &mut ChaCha8Rng) -> GradStats {
    let margin: f64 = rng.gen_range(0.5..2.0);
    let mut d: f64 = rng.gen_range(0.0..3.0);
    if (d - margin).abs() < 1e-3 {
        d += 0.1;
    }
    let label = rng.gen_range(0..2u8);
    let analytic = ops::contrastive_loss_grad(d, label, margin);
    check(&[d], &[analytic], |x| {
        (ops::contrastive_loss(x[0], label, margin), vec![(x[0] < margin) as i64])
    })
}

pub type LayerCase = fn(&mut ChaCha8Rng) -> GradStats;

pub const LAYERS: [(&str, LayerCase); 8] = [
    ("conv2d", conv2d_case),
    ("relu", relu_case),
    ("maxpool", maxpool_case),
    ("dense", dense_case),
    ("abs_diff", abs_diff_case),
    ("euclid", euclid_case),
    ("sigmoid+log_loss", sigmoid_log_loss_case),
    ("contrastive", contrastive_case),
];

pub fn layer_stats(case: LayerCase, shapes: usize, seed: u64) -> GradStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = GradStats::default();
    for _ in 0..shapes {
        total.merge(case(&mut rng));
    }
    total
}

pub fn random_spec(rng: &mut ChaCha8Rng, architecture: Architecture) -> ModelSpec {
    loop {
        let spec = ModelSpec {
            architecture,
            conv_filters: rng.gen_range(2..5),
            kernel: (rng.gen_range(1..4), rng.gen_range(1..4)),
            pool: (rng.gen_range(1..3), rng.gen_range(1..3)),
            fc_units: rng.gen_range(2..6),
            dropout_rate: 0.5,
            pad_len: rng.gen_range(4..8),
        };
        if spec.plan().is_ok() {
            return spec;
        }
    }
}

/// Full-network check on one random spec, sample and dropout mask.
pub fn network_case(rng: &mut ChaCha8Rng, spec: ModelSpec) -> GradStats {
    let mut net = Network::new(spec, rng.gen()).unwrap();
    for t in net.params_mut().tensors_mut() {
        for v in t.data_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
    }
    let n = spec.pad_len * 16;
    let sample = Sample {
        a: uniform(rng, n),
        b: uniform(rng, n),
        label: rng.gen_range(0..2),
    };
    let mask_len = net.dropout_len();
    let mask = (mask_len > 0).then(|| ops::dropout_mask(mask_len, 0.5, rng));
    let margin = 1.0 + rng.gen_range(0.0..4.0);
    let (_, grads) = net.loss_and_grad(&sample, mask.as_deref(), margin).unwrap();
    let theta = net.params().flatten();
    let mut probe = net.clone();
    check(&theta, &grads.flatten(), |x| {
        probe.params_mut().assign_flat(x);
        let loss = probe.loss(&sample, mask.as_deref(), margin).unwrap();
        let sig = probe.activation_signature(&sample, mask.as_deref(), margin).unwrap();
        (loss, sig)
    })
}

pub fn network_stats(architecture: Architecture, trials: usize, seed: u64) -> GradStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = GradStats::default();
    for _ in 0..trials {
        let spec = random_spec(&mut rng, architecture);
        total.merge(network_case(&mut rng, spec));
    }
    total
}
