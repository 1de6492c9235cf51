//! The three pair-classification architectures.
//!
//! All of them share the same convolutional trunk:
//! `conv → ReLU → conv → ReLU → maxpool → flatten`.
//!
//! * `SiameseEuclid`: the trunk runs on each word with tied weights and the
//!   Euclidean distance of the two embeddings is trained with a contrastive
//!   loss.
//! * `Manhattan`: tied trunks, element-wise absolute difference, then
//!   `dense → ReLU → dropout → dense(1) → sigmoid` with log loss.
//! * `TwoChannel`: the two word matrices are stacked as channels of a single
//!   input; one trunk, then the same dense head.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ops::{self, DenseGrads};
use super::{NeuralError, Tensor};
use crate::phoneme::{WordMatrix, DEFAULT_PAD_LEN, FEATURE_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    SiameseEuclid,
    Manhattan,
    TwoChannel,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::SiameseEuclid => "SIAMESE_EUCLID",
            Architecture::Manhattan => "MANHATTAN",
            Architecture::TwoChannel => "TWO_CHANNEL",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().replace('-', "_").as_str() {
            "SIAMESE_EUCLID" => Some(Architecture::SiameseEuclid),
            "MANHATTAN" => Some(Architecture::Manhattan),
            "TWO_CHANNEL" => Some(Architecture::TwoChannel),
            _ => None,
        }
    }

    pub fn loss(self) -> LossKind {
        match self {
            Architecture::SiameseEuclid => LossKind::Contrastive,
            _ => LossKind::Log,
        }
    }

    fn input_channels(self) -> usize {
        match self {
            Architecture::TwoChannel => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Contrastive,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub architecture: Architecture,
    pub conv_filters: usize,
    /// (rows over phoneme positions, columns over features)
    pub kernel: (usize, usize),
    /// Max-pool window; (2, 2) halves both axes, (2, 1) only positions.
    pub pool: (usize, usize),
    pub fc_units: usize,
    pub dropout_rate: f64,
    pub pad_len: usize,
}

impl ModelSpec {
    pub fn new(architecture: Architecture) -> Self {
        ModelSpec {
            architecture,
            conv_filters: 10,
            kernel: (2, 3),
            pool: (2, 2),
            fc_units: 8,
            dropout_rate: 0.5,
            pad_len: DEFAULT_PAD_LEN,
        }
    }

    /// Checks the spec and returns the spatial shape after each stage.
    pub fn plan(&self) -> Result<ShapePlan, NeuralError> {
        let invalid = |m: String| Err(NeuralError::InvalidSpec(m));
        if self.conv_filters == 0 || self.fc_units == 0 || self.pad_len == 0 {
            return invalid("conv_filters, fc_units and pad_len must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return invalid(format!("dropout rate {} outside [0, 1)", self.dropout_rate));
        }
        let (kh, kw) = self.kernel;
        let (ph, pw) = self.pool;
        if kh == 0 || kw == 0 || ph == 0 || pw == 0 {
            return invalid("kernel and pool dimensions must be positive".into());
        }
        let input = (self.pad_len, FEATURE_COUNT);
        let shrink = |(h, w): (usize, usize)| -> Option<(usize, usize)> {
            (kh <= h && kw <= w).then(|| (h - kh + 1, w - kw + 1))
        };
        let Some(conv1) = shrink(input) else {
            return invalid(format!("kernel {kh}x{kw} exceeds input {}x{}", input.0, input.1));
        };
        let Some(conv2) = shrink(conv1) else {
            return invalid(format!("kernel {kh}x{kw} exceeds first conv output {}x{}", conv1.0, conv1.1));
        };
        let pooled = (conv2.0 / ph, conv2.1 / pw);
        if pooled.0 == 0 || pooled.1 == 0 {
            return invalid(format!("pool {ph}x{pw} exceeds second conv output {}x{}", conv2.0, conv2.1));
        }
        Ok(ShapePlan {
            input,
            input_channels: self.architecture.input_channels(),
            conv1,
            conv2,
            pooled,
            filters: self.conv_filters,
            flat: pooled.0 * pooled.1 * self.conv_filters,
            fc_units: self.fc_units,
        })
    }
}

/// Spatial sizes through the trunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapePlan {
    pub input: (usize, usize),
    pub input_channels: usize,
    pub conv1: (usize, usize),
    pub conv2: (usize, usize),
    pub pooled: (usize, usize),
    pub filters: usize,
    pub flat: usize,
    pub fc_units: usize,
}

/// Named trainable tensors. Siamese branches read the same entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new(entries: Vec<(String, Tensor)>) -> Self {
        ParamSet { entries }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries.iter_mut().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn at(&self, i: usize) -> &Tensor {
        &self.entries[i].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn zeros_like(&self) -> Self {
        ParamSet {
            entries: self.entries.iter().map(|(n, t)| (n.clone(), t.zeros_like())).collect(),
        }
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|(_, t)| t.data().iter().copied()).collect()
    }

    /// Overwrites all values from a flat vector in entry order.
    pub fn assign_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.scalar_count());
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
    }

    pub(crate) fn add_assign(&mut self, other: &ParamSet) {
        for ((_, a), (_, b)) in self.entries.iter_mut().zip(&other.entries) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

const CONV1_K: usize = 0;
const CONV1_B: usize = 1;
const CONV2_K: usize = 2;
const CONV2_B: usize = 3;
const DENSE_W: usize = 4;
const DENSE_B: usize = 5;
const OUT_W: usize = 6;
const OUT_B: usize = 7;

fn param_shapes(spec: &ModelSpec, plan: &ShapePlan) -> Vec<(&'static str, Vec<usize>)> {
    let (kh, kw) = spec.kernel;
    let f = spec.conv_filters;
    let mut shapes = vec![
        ("conv1.kernel", vec![kh, kw, plan.input_channels, f]),
        ("conv1.bias", vec![f]),
        ("conv2.kernel", vec![kh, kw, f, f]),
        ("conv2.bias", vec![f]),
    ];
    if spec.architecture != Architecture::SiameseEuclid {
        shapes.extend([
            ("dense.weight", vec![plan.flat, spec.fc_units]),
            ("dense.bias", vec![spec.fc_units]),
            ("output.weight", vec![spec.fc_units, 1]),
            ("output.bias", vec![1]),
        ]);
    }
    shapes
}

/// One training example: two `pad_len × 16` word matrices and a label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub label: u8,
}

impl Sample {
    pub fn from_matrices(a: &WordMatrix, b: &WordMatrix, label: u8) -> Self {
        Sample {
            a: a.to_f64(),
            b: b.to_f64(),
            label,
        }
    }
}

struct TrunkCache {
    input: Tensor,
    z1: Tensor,
    a1: Tensor,
    z2: Tensor,
    a2: Tensor,
    argmax: Vec<usize>,
    out: Vec<f64>,
}

struct HeadCache {
    features: Vec<f64>,
    hidden_pre: Vec<f64>,
    hidden: Vec<f64>,
    mask: Vec<f64>,
    dropped: Vec<f64>,
    prob: f64,
}

enum Cache {
    Siamese {
        a: TrunkCache,
        b: TrunkCache,
        distance: f64,
    },
    Manhattan {
        a: TrunkCache,
        b: TrunkCache,
        head: HeadCache,
    },
    TwoChannel {
        trunk: TrunkCache,
        head: HeadCache,
    },
}

impl Cache {
    /// Probability for sigmoid heads, distance for the Siamese head.
    fn output(&self) -> f64 {
        match self {
            Cache::Siamese { distance, .. } => *distance,
            Cache::Manhattan { head, .. } | Cache::TwoChannel { head, .. } => head.prob,
        }
    }
}

/// A model instance: a spec and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: ModelSpec,
    plan: ShapePlan,
    params: ParamSet,
}

impl Network {
    /// Glorot-uniform kernels and weights, zero biases.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self, NeuralError> {
        let plan = spec.plan()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = param_shapes(&spec, &plan)
            .into_iter()
            .map(|(name, shape)| {
                let mut t = Tensor::zeros(&shape);
                if shape.len() > 1 {
                    let (fan_in, fan_out) = match shape.len() {
                        4 => (shape[0] * shape[1] * shape[2], shape[0] * shape[1] * shape[3]),
                        _ => (shape[0], shape[1]),
                    };
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    for v in t.data_mut() {
                        *v = rng.gen_range(-limit..limit);
                    }
                }
                (name.to_string(), t)
            })
            .collect();
        Ok(Network {
            spec,
            plan,
            params: ParamSet::new(entries),
        })
    }

    /// Wraps existing parameters, checking names and shapes.
    pub fn from_params(spec: ModelSpec, params: ParamSet) -> Result<Self, NeuralError> {
        let plan = spec.plan()?;
        let expected = param_shapes(&spec, &plan);
        if expected.len() != params.len() {
            return Err(NeuralError::InvalidSpec(format!(
                "expected {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for ((name, shape), (got_name, t)) in expected.iter().zip(params.iter()) {
            if *name != got_name || shape.as_slice() != t.shape() {
                return Err(NeuralError::ShapeMismatch {
                    op: "parameter",
                    expected: shape.clone(),
                    got: t.shape().to_vec(),
                });
            }
        }
        Ok(Network { spec, plan, params })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn plan(&self) -> &ShapePlan {
        &self.plan
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Size of the dropout mask consumed by one training forward pass.
    pub fn dropout_len(&self) -> usize {
        match self.spec.architecture {
            Architecture::SiameseEuclid => 0,
            _ => self.spec.fc_units,
        }
    }

    fn word_len(&self) -> usize {
        self.plan.input.0 * self.plan.input.1
    }

    fn check_sample(&self, a: &[f64], b: &[f64]) -> Result<(), NeuralError> {
        let n = self.word_len();
        if a.len() != n || b.len() != n {
            return Err(NeuralError::ShapeMismatch {
                op: "sample",
                expected: vec![self.plan.input.0, self.plan.input.1],
                got: vec![a.len(), b.len()],
            });
        }
        Ok(())
    }

    fn trunk(&self, input: Tensor) -> Result<TrunkCache, NeuralError> {
        let p = &self.params;
        let z1 = ops::conv2d(&input, p.at(CONV1_K), p.at(CONV1_B))?;
        let a1 = ops::relu(&z1);
        let z2 = ops::conv2d(&a1, p.at(CONV2_K), p.at(CONV2_B))?;
        let a2 = ops::relu(&z2);
        let (pooled, argmax) = ops::maxpool(&a2, self.spec.pool)?;
        Ok(TrunkCache {
            input,
            z1,
            a1,
            z2,
            a2,
            argmax,
            out: pooled.into_data(),
        })
    }

    fn trunk_backward(&self, cache: &TrunkCache, grad_flat: &[f64], grads: &mut ParamSet) -> Result<(), NeuralError> {
        let p = &self.params;
        let (ph, pw) = self.plan.pooled;
        let g_pool = Tensor::from_vec(&[ph, pw, self.plan.filters], grad_flat.to_vec())?;
        let g_a2 = ops::maxpool_backward(cache.a2.shape(), &cache.argmax, &g_pool)?;
        let g_z2 = ops::relu_backward(&cache.z2, &g_a2)?;
        let c2 = ops::conv2d_backward(&cache.a1, p.at(CONV2_K), &g_z2)?;
        let g_z1 = ops::relu_backward(&cache.z1, &c2.input)?;
        let c1 = ops::conv2d_backward(&cache.input, p.at(CONV1_K), &g_z1)?;
        accumulate(grads, CONV1_K, &c1.kernels);
        accumulate(grads, CONV1_B, &c1.bias);
        accumulate(grads, CONV2_K, &c2.kernels);
        accumulate(grads, CONV2_B, &c2.bias);
        Ok(())
    }

    fn head(&self, features: Vec<f64>, mask: Option<&[f64]>) -> Result<HeadCache, NeuralError> {
        let p = &self.params;
        let hidden_pre = ops::dense(&features, p.at(DENSE_W), p.at(DENSE_B))?;
        let hidden: Vec<f64> = hidden_pre.iter().map(|v| v.max(0.0)).collect();
        let mask = match mask {
            Some(m) if m.len() != hidden.len() => {
                return Err(NeuralError::ShapeMismatch {
                    op: "dropout mask",
                    expected: vec![hidden.len()],
                    got: vec![m.len()],
                })
            }
            Some(m) => m.to_vec(),
            None => vec![1.0; hidden.len()],
        };
        let dropped = ops::apply_mask(&hidden, &mask);
        let logit = ops::dense(&dropped, p.at(OUT_W), p.at(OUT_B))?[0];
        Ok(HeadCache {
            features,
            hidden_pre,
            hidden,
            mask,
            dropped,

            prob: ops::sigmoid(logit),
        })
    }

    /// Backpropagates d(loss)/d(prob); returns the gradient on the head input.
    fn head_backward(&self, cache: &HeadCache, grad_prob: f64, grads: &mut ParamSet) -> Result<Vec<f64>, NeuralError> {
        let p = &self.params;
        let grad_logit = grad_prob * cache.prob * (1.0 - cache.prob);
        let out: DenseGrads = ops::dense_backward(&cache.dropped, p.at(OUT_W), &[grad_logit])?;
        accumulate(grads, OUT_W, &out.weights);
        accumulate(grads, OUT_B, &out.bias);
        let g_hidden: Vec<f64> = out
            .input
            .iter()
            .zip(&cache.mask)
            .zip(&cache.hidden_pre)
            .map(|((g, m), z)| if *z > 0.0 { g * m } else { 0.0 })
            .collect();
        let dense = ops::dense_backward(&cache.features, p.at(DENSE_W), &g_hidden)?;
        accumulate(grads, DENSE_W, &dense.weights);
        accumulate(grads, DENSE_B, &dense.bias);
        debug_assert_eq!(cache.hidden.len(), g_hidden.len());
        Ok(dense.input)
    }

    fn single_input(&self, x: &[f64]) -> Result<Tensor, NeuralError> {
        Tensor::from_vec(&[self.plan.input.0, self.plan.input.1, 1], x.to_vec())
    }

    fn stacked_input(&self, a: &[f64], b: &[f64]) -> Result<Tensor, NeuralError> {
        let data = a.iter().zip(b).flat_map(|(x, y)| [*x, *y]).collect();
        Tensor::from_vec(&[self.plan.input.0, self.plan.input.1, 2], data)
    }

    fn run(&self, a: &[f64], b: &[f64], mask: Option<&[f64]>) -> Result<Cache, NeuralError> {
        self.check_sample(a, b)?;
        Ok(match self.spec.architecture {
            Architecture::SiameseEuclid => {
                let ta = self.trunk(self.single_input(a)?)?;
                let tb = self.trunk(self.single_input(b)?)?;
                let distance = ops::euclid(&ta.out, &tb.out)?;
                Cache::Siamese { a: ta, b: tb, distance }
            }
            Architecture::Manhattan => {
                let ta = self.trunk(self.single_input(a)?)?;
                let tb = self.trunk(self.single_input(b)?)?;
                let diff = ops::abs_diff(&ta.out, &tb.out)?;
                let head = self.head(diff, mask)?;
                Cache::Manhattan { a: ta, b: tb, head }
            }
            Architecture::TwoChannel => {
                let trunk = self.trunk(self.stacked_input(a, b)?)?;
                let head = self.head(trunk.out.clone(), mask)?;
                Cache::TwoChannel { trunk, head }
            }
        })
    }

    /// Flattened trunk output for one word (single-channel architectures).
    pub fn branch_output(&self, word: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if self.spec.architecture == Architecture::TwoChannel {
            return Err(NeuralError::InvalidSpec("TWO_CHANNEL has no per-word branch".into()));
        }
        Ok(self.trunk(self.single_input(word)?)?.out)
    }

    /// Raw network output with dropout disabled: the sigmoid probability, or
    /// the embedding distance for `SiameseEuclid`.
    pub fn output(&self, a: &[f64], b: &[f64]) -> Result<f64, NeuralError> {
        Ok(self.run(a, b, None)?.output())
    }

    /// Cognacy score in `[0, 1]`. For `SiameseEuclid` this is `exp(-D)`,
    /// monotone in similarity but not a calibrated probability.
    pub fn predict(&self, a: &[f64], b: &[f64]) -> Result<f64, NeuralError> {
        let out = self.output(a, b)?;
        Ok(match self.spec.architecture {
            Architecture::SiameseEuclid => (-out).exp(),
            _ => out,
        })
    }

    fn loss_of(&self, cache: &Cache, label: u8, margin: f64) -> f64 {
        match cache {
            Cache::Siamese { distance, .. } => ops::contrastive_loss(*distance, label, margin),
            _ => ops::log_loss(cache.output(), label),
        }
    }

    /// Training loss for one sample under a fixed dropout mask (`None` means
    /// no dropout), with `margin` used by the contrastive loss.
    pub fn loss(&self, sample: &Sample, mask: Option<&[f64]>, margin: f64) -> Result<f64, NeuralError> {
        let cache = self.run(&sample.a, &sample.b, mask)?;
        Ok(self.loss_of(&cache, sample.label, margin))
    }

    /// Loss and exact parameter gradient for one sample.
    pub fn loss_and_grad(&self, sample: &Sample, mask: Option<&[f64]>, margin: f64) -> Result<(f64, ParamSet), NeuralError> {
        let cache = self.run(&sample.a, &sample.b, mask)?;
        let loss = self.loss_of(&cache, sample.label, margin);
        let mut grads = self.params.zeros_like();
        match &cache {
            Cache::Siamese { a, b, distance } => {
                let g = ops::contrastive_loss_grad(*distance, sample.label, margin);
                let (ga, gb) = ops::euclid_backward(&a.out, &b.out, *distance, g);
                self.trunk_backward(a, &ga, &mut grads)?;
                self.trunk_backward(b, &gb, &mut grads)?;
            }
            Cache::Manhattan { a, b, head } => {
                let g_prob = ops::log_loss_grad(head.prob, sample.label);
                let g_diff = self.head_backward(head, g_prob, &mut grads)?;
                let (ga, gb) = ops::abs_diff_backward(&a.out, &b.out, &g_diff);
                self.trunk_backward(a, &ga, &mut grads)?;
                self.trunk_backward(b, &gb, &mut grads)?;
            }
            Cache::TwoChannel { trunk, head } => {
                let g_prob = ops::log_loss_grad(head.prob, sample.label);
                let g_feat = self.head_backward(head, g_prob, &mut grads)?;
                self.trunk_backward(trunk, &g_feat, &mut grads)?;
            }
        }
        Ok((loss, grads))
    }

    /// Discrete state of every piecewise-linear unit for one forward pass:
    /// ReLU activity, pooling winners, absolute-difference signs and
    /// clipping. Two parameter settings with the same signature lie on the
    /// same linear piece, which is what finite-difference checks rely on.
    pub fn activation_signature(&self, sample: &Sample, mask: Option<&[f64]>, margin: f64) -> Result<Vec<i64>, NeuralError> {
        let cache = self.run(&sample.a, &sample.b, mask)?;
        let mut sig = Vec::new();
        let trunk_sig = |t: &TrunkCache, sig: &mut Vec<i64>| {
            sig.extend(t.z1.data().iter().map(|v| (*v > 0.0) as i64));
            sig.extend(t.z2.data().iter().map(|v| (*v > 0.0) as i64));
            sig.extend(t.argmax.iter().map(|&i| i as i64));
        };
        let head_sig = |h: &HeadCache, sig: &mut Vec<i64>| {
            sig.extend(h.hidden_pre.iter().map(|v| (*v > 0.0) as i64));
            let p = h.prob;
            sig.push((ops::LOG_LOSS_CLIP..=1.0 - ops::LOG_LOSS_CLIP).contains(&p) as i64);
        };
        match &cache {
            Cache::Siamese { a, b, distance } => {
                trunk_sig(a, &mut sig);
                trunk_sig(b, &mut sig);
                sig.push((*distance < margin) as i64);
                sig.push((*distance == 0.0) as i64);
            }
            Cache::Manhattan { a, b, head } => {
                trunk_sig(a, &mut sig);
                trunk_sig(b, &mut sig);
                sig.extend(a.out.iter().zip(&b.out).map(|(x, y)| (x - y).signum() as i64));
                head_sig(head, &mut sig);
            }
            Cache::TwoChannel { trunk, head } => {
                trunk_sig(trunk, &mut sig);
                head_sig(head, &mut sig);
            }
        }
        Ok(sig)
    }
}

fn accumulate(grads: &mut ParamSet, index: usize, g: &Tensor) {
    for (x, y) in grads.entries[index].1.data_mut().iter_mut().zip(g.data()) {
        *x += y;
    }
}
