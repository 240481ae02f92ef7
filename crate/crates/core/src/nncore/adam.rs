use ndarray::{Array1, Array2, Zip};

use super::net::{DenseNet, GradientSet, Layer};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamConfig<T> {
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        Self {
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
        }
    }
}

/// First and second moment accumulators, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig<T>,
    pub step: u64,
    pub m_weights: Vec<Array2<T>>,
    pub m_biases: Vec<Array1<T>>,
    pub v_weights: Vec<Array2<T>>,
    pub v_biases: Vec<Array1<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub(crate) fn for_layers(layers: &[Layer<T>], config: AdamConfig<T>) -> Self {
        let zw = || layers.iter().map(|l| Array2::zeros(l.weight.dim())).collect();
        let zb = || layers.iter().map(|l| Array1::zeros(l.bias.len())).collect();
        Self {
            config,
            step: 0,
            m_weights: zw(),
            m_biases: zb(),
            v_weights: zw(),
            v_biases: zb(),
        }
    }
}

impl<T: Scalar> DenseNet<T> {
    /// One bias-corrected Adam update. Rejects non-finite gradients without
    /// touching the network.
    pub fn adam_step(&mut self, grads: &GradientSet<T>, learning_rate: T) -> Result<()> {
        if !(learning_rate > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        check_len("gradient layer count", self.layers().len(), grads.weights.len())?;
        check_len("gradient layer count", self.layers().len(), grads.biases.len())?;
        for (l, (gw, gb)) in self.layers().iter().zip(grads.weights.iter().zip(&grads.biases)) {
            check_len("weight gradient size", l.weight.len(), gw.len())?;
            check_len("bias gradient size", l.bias.len(), gb.len())?;
            if l.weight.dim() != gw.dim() {
                return Err(Error::Shape {
                    context: "weight gradient rows",
                    expected: l.weight.nrows(),
                    got: gw.nrows(),
                });
            }
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradients passed to adam_step".into()));
        }

        let mut state = std::mem::replace(&mut self.adam, AdamState::for_layers(&[], AdamConfig::default()));
        state.step += 1;
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = state.config.clone();
        let t = state.step as i32;
        let bc1 = T::one() - beta1.powi(t);
        let bc2 = T::one() - beta2.powi(t);
        let update = |p: &mut T, m: &mut T, v: &mut T, &g: &T| {
            *m = beta1 * *m + (T::one() - beta1) * g;
            *v = beta2 * *v + (T::one() - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };
        for (i, layer) in self.layers_mut().iter_mut().enumerate() {
            Zip::from(&mut layer.weight)
                .and(&mut state.m_weights[i])
                .and(&mut state.v_weights[i])
                .and(&grads.weights[i])
                .for_each(update);
            Zip::from(&mut layer.bias)
                .and(&mut state.m_biases[i])
                .and(&mut state.v_biases[i])
                .and(&grads.biases[i])
                .for_each(update);
        }
        self.adam = state;
        if !self.is_finite() {
            return Err(Error::NonFinite("parameters after adam_step".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::OutputActivation;
    use ndarray::array;

    fn scalar_net(w: f64) -> DenseNet<f64> {
        let layer = Layer {
            weight: array![[w]],
            bias: array![0.0],
        };
        DenseNet::from_layers(vec![layer], OutputActivation::Identity).unwrap()
    }

    fn grads(gw: f64, gb: f64) -> GradientSet<f64> {
        GradientSet {
            weights: vec![array![[gw]]],
            biases: vec![array![gb]],
            input: Array2::zeros((1, 1)),
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut net = scalar_net(0.7);
        let before = net.clone();
        net.adam_step(&grads(0.0, 0.0), 1e-3).unwrap();
        assert!(net.same_params(&before));
        assert_eq!(net.optimizer_steps(), 1);
    }

    #[test]
    fn hand_stepped_reference() {
        // Independent Adam recurrence written out for one scalar.
        let (b1, b2, eps, lr, g) = (0.9f64, 0.999f64, 1e-8f64, 0.1f64, 1.0f64);
        let m = (1.0 - b1) * g;
        let v = (1.0 - b2) * g * g;
        let m_hat = m / (1.0 - b1);
        let v_hat = v / (1.0 - b2);
        let expected = 0.0 - lr * m_hat / (v_hat.sqrt() + eps);
        // First step moves by almost exactly lr.
        assert!((expected + 0.1).abs() < 1e-8);

        let mut net = scalar_net(0.0);
        net.adam_step(&grads(1.0, 0.0), 0.1).unwrap();
        assert!((net.layers()[0].weight[[0, 0]] - expected).abs() < 1e-15);
    }

    #[test]
    fn constant_positive_gradient_descends_monotonically() {
        let mut net = scalar_net(1.0);
        let mut prev = 1.0;
        for _ in 0..200 {
            net.adam_step(&grads(0.5, 0.0), 0.01).unwrap();
            let w = net.layers()[0].weight[[0, 0]];
            assert!(w < prev);
            prev = w;
        }
        assert_eq!(net.optimizer_steps(), 200);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut net = scalar_net(1.0);
        let before = net.clone();
        assert!(matches!(net.adam_step(&grads(f64::NAN, 0.0), 0.01), Err(Error::NonFinite(_))));
        assert!(matches!(net.adam_step(&grads(0.0, f64::INFINITY), 0.01), Err(Error::NonFinite(_))));
        assert!(net.same_params(&before));
        assert_eq!(net.optimizer_steps(), 0);
    }

    #[test]
    fn mismatched_gradient_rejected() {
        let mut net = scalar_net(1.0);
        let g = GradientSet {
            weights: vec![array![[1.0, 2.0]]],
            biases: vec![array![0.0]],
            input: Array2::zeros((1, 1)),
        };
        assert!(matches!(net.adam_step(&g, 0.01), Err(Error::Shape { .. })));
        assert!(net.adam_step(&grads(1.0, 1.0), 0.0).is_err());
    }
}
