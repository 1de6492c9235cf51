//! Layer primitives and their exact backward passes.
//!
//! Feature maps are `[H, W, C]` tensors; convolution kernels are
//! `[kh, kw, C, F]`; dense weights are `[inputs, units]`.

use rand::Rng;

use super::{NeuralError, Tensor};

fn mismatch(op: &'static str, expected: &[usize], got: &[usize]) -> NeuralError {
    NeuralError::ShapeMismatch {
        op,
        expected: expected.to_vec(),
        got: got.to_vec(),
    }
}

/// Valid (unpadded) 2-D convolution, stride 1.
pub fn conv2d(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor, NeuralError> {
    input.expect_rank("conv2d input", 3)?;
    kernels.expect_rank("conv2d kernels", 4)?;
    let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (kh, kw, kc, f) = (kernels.shape()[0], kernels.shape()[1], kernels.shape()[2], kernels.shape()[3]);
    if kc != c || kh > h || kw > w {
        return Err(mismatch("conv2d", &[h, w, c], kernels.shape()));
    }
    if bias.shape() != [f] {
        return Err(mismatch("conv2d bias", &[f], bias.shape()));
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let x = input.data();
    let k = kernels.data();
    let mut out = vec![0.0; oh * ow * f];
    for i in 0..oh {
        for j in 0..ow {
            let o = &mut out[(i * ow + j) * f..(i * ow + j + 1) * f];
            o.copy_from_slice(bias.data());
            for a in 0..kh {
                for b in 0..kw {
                    for ch in 0..c {
                        let xv = x[((i + a) * w + j + b) * c + ch];
                        if xv == 0.0 {
                            continue;
                        }
                        let kr = &k[((a * kw + b) * c + ch) * f..((a * kw + b) * c + ch + 1) * f];
                        for (ov, kv) in o.iter_mut().zip(kr) {
                            *ov += xv * kv;
                        }
                    }
                }
            }
        }
    }
    Tensor::from_vec(&[oh, ow, f], out)
}

pub struct ConvGrads {
    pub input: Tensor,
    pub kernels: Tensor,
    pub bias: Tensor,
}

pub fn conv2d_backward(input: &Tensor, kernels: &Tensor, grad_out: &Tensor) -> Result<ConvGrads, NeuralError> {
    let (h, w, c) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (kh, kw, f) = (kernels.shape()[0], kernels.shape()[1], kernels.shape()[3]);
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    if grad_out.shape() != [oh, ow, f] {
        return Err(mismatch("conv2d backward", &[oh, ow, f], grad_out.shape()));
    }
    let x = input.data();
    let k = kernels.data();
    let g = grad_out.data();
    let mut gx = vec![0.0; x.len()];
    let mut gk = vec![0.0; k.len()];
    let mut gb = vec![0.0; f];
    for i in 0..oh {
        for j in 0..ow {
            let go = &g[(i * ow + j) * f..(i * ow + j + 1) * f];
            for (b, gv) in gb.iter_mut().zip(go) {
                *b += gv;
            }
            for a in 0..kh {
                for b in 0..kw {
                    for ch in 0..c {
                        let xi = ((i + a) * w + j + b) * c + ch;
                        let ko = ((a * kw + b) * c + ch) * f;
                        let xv = x[xi];
                        let mut acc = 0.0;
                        for ff in 0..f {
                            gk[ko + ff] += xv * go[ff];
                            acc += k[ko + ff] * go[ff];
                        }
                        gx[xi] += acc;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: Tensor::from_vec(input.shape(), gx)?,
        kernels: Tensor::from_vec(kernels.shape(), gk)?,
        bias: Tensor::from_vec(&[f], gb)?,
    })
}

pub fn relu(t: &Tensor) -> Tensor {
    let data = t.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_vec(t.shape(), data).expect("same shape")
}

/// Gradient passes where the forward input was strictly positive.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Result<Tensor, NeuralError> {
    if input.shape() != grad_out.shape() {
        return Err(mismatch("relu backward", input.shape(), grad_out.shape()));
    }
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(input.shape(), data)
}

/// Max pooling over non-overlapping `ph × pw` windows; leftover rows and
/// columns are dropped. Returns the output and, per output cell, the flat
/// index of the winning input (first maximum in scan order).
pub fn maxpool(t: &Tensor, window: (usize, usize)) -> Result<(Tensor, Vec<usize>), NeuralError> {
    t.expect_rank("maxpool", 3)?;
    let (h, w, c) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let (ph, pw) = window;
    if ph == 0 || pw == 0 || h / ph == 0 || w / pw == 0 {
        return Err(mismatch("maxpool", &[ph, pw], t.shape()));
    }
    let (oh, ow) = (h / ph, w / pw);
    let x = t.data();
    let mut out = vec![0.0; oh * ow * c];
    let mut arg = vec![0usize; oh * ow * c];
    for i in 0..oh {
        for j in 0..ow {
            for ch in 0..c {
                let mut best = usize::MAX;
                for a in 0..ph {
                    for b in 0..pw {
                        let idx = ((i * ph + a) * w + j * pw + b) * c + ch;
                        if best == usize::MAX || x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                out[(i * ow + j) * c + ch] = x[best];
                arg[(i * ow + j) * c + ch] = best;
            }
        }
    }
    Ok((Tensor::from_vec(&[oh, ow, c], out)?, arg))
}

/// 2×2 max pooling with stride 2.
pub fn maxpool2(t: &Tensor) -> Result<Tensor, NeuralError> {
    maxpool(t, (2, 2)).map(|(out, _)| out)
}

pub fn maxpool_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Result<Tensor, NeuralError> {
    if argmax.len() != grad_out.len() {
        return Err(mismatch("maxpool backward", &[argmax.len()], grad_out.shape()));
    }
    let mut gx = Tensor::zeros(input_shape);
    let data = gx.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        data[idx] += g;
    }
    Ok(gx)
}

/// `y = x · W + b` for a flat input.
pub fn dense(x: &[f64], weights: &Tensor, bias: &Tensor) -> Result<Vec<f64>, NeuralError> {
    weights.expect_rank("dense weights", 2)?;
    let (n, u) = (weights.shape()[0], weights.shape()[1]);
    if x.len() != n {
        return Err(mismatch("dense", &[n], &[x.len()]));
    }
    if bias.shape() != [u] {
        return Err(mismatch("dense bias", &[u], bias.shape()));
    }
    let mut out = bias.data().to_vec();
    for (xv, row) in x.iter().zip(weights.data().chunks(u)) {
        if *xv == 0.0 {
            continue;
        }
        for (o, wv) in out.iter_mut().zip(row) {
            *o += xv * wv;
        }
    }
    Ok(out)
}

pub struct DenseGrads {
    pub input: Vec<f64>,
    pub weights: Tensor,
    pub bias: Tensor,
}

pub fn dense_backward(x: &[f64], weights: &Tensor, grad_out: &[f64]) -> Result<DenseGrads, NeuralError> {
    let (n, u) = (weights.shape()[0], weights.shape()[1]);
    if x.len() != n || grad_out.len() != u {
        return Err(mismatch("dense backward", &[n, u], &[x.len(), grad_out.len()]));
    }
    let mut gx = vec![0.0; n];
    let mut gw = vec![0.0; n * u];
    for (i, (xv, row)) in x.iter().zip(weights.data().chunks(u)).enumerate() {
        let gw_row = &mut gw[i * u..(i + 1) * u];
        let mut acc = 0.0;
        for ((gwv, wv), gv) in gw_row.iter_mut().zip(row).zip(grad_out) {
            *gwv = xv * gv;
            acc += wv * gv;
        }
        gx[i] = acc;
    }
    Ok(DenseGrads {
        input: gx,
        weights: Tensor::from_vec(&[n, u], gw)?,
        bias: Tensor::from_vec(&[u], grad_out.to_vec())?,
    })
}

/// Inverted-dropout multipliers: 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect()
}

/// Applies dropout. At inference (`training == false`) this is the identity.
/// Returns the output together with the mask used, for the backward pass.
pub fn dropout<R: Rng + ?Sized>(x: &[f64], rate: f64, training: bool, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    if !training || rate == 0.0 {
        return (x.to_vec(), vec![1.0; x.len()]);
    }
    let mask = dropout_mask(x.len(), rate, rng);
    (apply_mask(x, &mask), mask)
}

pub fn apply_mask(x: &[f64], mask: &[f64]) -> Vec<f64> {
    x.iter().zip(mask).map(|(v, m)| v * m).collect()
}

/// Element-wise `|u - v|`.
pub fn abs_diff(u: &[f64], v: &[f64]) -> Result<Vec<f64>, NeuralError> {
    if u.len() != v.len() {
        return Err(mismatch("abs_diff", &[u.len()], &[v.len()]));
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b).abs()).collect())
}

/// Gradients with respect to `u` and `v`; the subgradient at `u == v` is 0.
pub fn abs_diff_backward(u: &[f64], v: &[f64], grad_out: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let gu: Vec<f64> = u
        .iter()
        .zip(v)
        .zip(grad_out)
        .map(|((a, b), g)| {
            let d = a - b;
            if d > 0.0 {
                *g
            } else if d < 0.0 {
                -g
            } else {
                0.0
            }
        })
        .collect();
    let gv = gu.iter().map(|g| -g).collect();
    (gu, gv)
}

pub fn euclid(u: &[f64], v: &[f64]) -> Result<f64, NeuralError> {
    if u.len() != v.len() {
        return Err(mismatch("euclid", &[u.len()], &[v.len()]));
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Gradients of `D = ‖u − v‖` scaled by `grad_d`; zero when `D == 0`.
pub fn euclid_backward(u: &[f64], v: &[f64], distance: f64, grad_d: f64) -> (Vec<f64>, Vec<f64>) {
    if distance == 0.0 {
        return (vec![0.0; u.len()], vec![0.0; v.len()]);
    }
    let gu: Vec<f64> = u.iter().zip(v).map(|(a, b)| grad_d * (a - b) / distance).collect();
    let gv = gu.iter().map(|g| -g).collect();
    (gu, gv)
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `y·D + (1 − y)·max(0, m − D)`.
pub fn contrastive_loss(distance: f64, label: u8, margin: f64) -> f64 {
    if label == 1 {
        distance
    } else {
        (margin - distance).max(0.0)
    }
}

/// d(contrastive)/dD; the subgradient at `D == m` for negatives is 0.
pub fn contrastive_loss_grad(distance: f64, label: u8, margin: f64) -> f64 {
    if label == 1 {
        1.0
    } else if distance < margin {
        -1.0
    } else {
        0.0
    }
}

pub const LOG_LOSS_CLIP: f64 = 1e-7;

fn clip(p: f64) -> f64 {
    p.clamp(LOG_LOSS_CLIP, 1.0 - LOG_LOSS_CLIP)
}

/// Binary cross-entropy with `p` clipped to `[1e-7, 1 − 1e-7]`.
pub fn log_loss(p: f64, label: u8) -> f64 {
    let p = clip(p);
    if label == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// d(log_loss)/dp; zero where clipping is active.
pub fn log_loss_grad(p: f64, label: u8) -> f64 {
    if !(LOG_LOSS_CLIP..=1.0 - LOG_LOSS_CLIP).contains(&p) {
        return 0.0;
    }
    if label == 1 {
        -1.0 / p
    } else {
        1.0 / (1.0 - p)
    }
}
