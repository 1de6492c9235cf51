use super::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdadeltaConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        AdadeltaConfig {
            learning_rate: 1.0,
            rho: 0.95,
            epsilon: 1e-6,
        }
    }
}

/// Adadelta with running averages of squared gradients and squared updates.
#[derive(Debug, Clone)]
pub struct Adadelta {
    config: AdadeltaConfig,
    grad_sq: Vec<f64>,
    update_sq: Vec<f64>,
}

impl Adadelta {
    pub fn new(config: AdadeltaConfig, param_count: usize) -> Self {
        Adadelta {
            config,
            grad_sq: vec![0.0; param_count],
            update_sq: vec![0.0; param_count],
        }
    }

    pub fn config(&self) -> &AdadeltaConfig {
        &self.config
    }

    /// Running averages of squared gradients and squared updates.
    pub fn accumulators(&self) -> (&[f64], &[f64]) {
        (&self.grad_sq, &self.update_sq)
    }

    /// Updates a flat parameter slice in place.
    pub fn step_slice(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.grad_sq.len());
        update(&self.config, &mut self.grad_sq, &mut self.update_sq, params, grads);
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) {
        assert_eq!(params.scalar_count(), self.grad_sq.len());
        let mut offset = 0;
        for (t, (_, g)) in params.tensors_mut().zip(grads.iter()) {
            let n = t.len();
            let range = offset..offset + n;
            update(
                &self.config,
                &mut self.grad_sq[range.clone()],
                &mut self.update_sq[range],
                t.data_mut(),
                g.data(),
            );
            offset += n;
        }
    }
}

fn update(config: &AdadeltaConfig, grad_sq: &mut [f64], update_sq: &mut [f64], params: &mut [f64], grads: &[f64]) {
    assert_eq!(grads.len(), params.len());
    let AdadeltaConfig {
        learning_rate,
        rho,
        epsilon,
    } = *config;
    for i in 0..params.len() {
        let g = grads[i];
        grad_sq[i] = rho * grad_sq[i] + (1.0 - rho) * g * g;
        let delta = -((update_sq[i] + epsilon).sqrt() / (grad_sq[i] + epsilon).sqrt()) * g;
        update_sq[i] = rho * update_sq[i] + (1.0 - rho) * delta * delta;
        params[i] += learning_rate * delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_with_unit_gradient() {
        let mut opt = Adadelta::new(AdadeltaConfig::default(), 1);
        let mut p = [0.0];
        opt.step_slice(&mut p, &[1.0]);
        let expected = -(1e-6f64).sqrt() / (0.05f64 + 1e-6).sqrt();
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.0044721).abs() < 1e-7);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut opt = Adadelta::new(AdadeltaConfig::default(), 3);
        let mut p = [1.0, -2.0, 3.0];
        opt.step_slice(&mut p.clone(), &[0.0; 3]);
        assert_eq!(opt.accumulators().0, &[0.0; 3]);
        opt.step_slice(&mut p, &[1.0, 0.0, 2.0]);
        let before = opt.accumulators().0.to_vec();
        let q = p;
        opt.step_slice(&mut p, &[0.0; 3]);
        assert_eq!(p, q);
        for (after, b) in opt.accumulators().0.iter().zip(&before) {
            assert_eq!(*after, 0.95 * b);
        }
    }
}
