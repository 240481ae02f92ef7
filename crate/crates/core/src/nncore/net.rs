use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use super::adam::{AdamConfig, AdamState};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Activation applied to the last layer. Hidden layers are always ReLU.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputActivation<T> {
    Identity,
    Tanh,
    /// `tanh` followed by a per-component affine map of `[-1, 1]` onto `[low, high]`.
    Squashed { low: Vec<T>, high: Vec<T> },
}

impl<T: Scalar> OutputActivation<T> {
    fn check(&self, width: usize) -> Result<()> {
        if let OutputActivation::Squashed { low, high } = self {
            check_len("squashed output low bounds", width, low.len())?;
            check_len("squashed output high bounds", width, high.len())?;
            if low.iter().zip(high).any(|(l, h)| !(l <= h)) {
                return Err(Error::InvalidArgument(
                    "squashed output requires low <= high per component".into(),
                ));
            }
        }
        Ok(())
    }

    fn apply(&self, z: &Array2<T>) -> Array2<T> {
        match self {
            OutputActivation::Identity => z.clone(),
            OutputActivation::Tanh => z.mapv(T::tanh),
            OutputActivation::Squashed { low, high } => {
                let half = T::of(0.5);
                let mut y = z.mapv(T::tanh);
                for mut row in y.rows_mut() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = low[j] + (*v + T::one()) * half * (high[j] - low[j]);
                    }
                }
                y
            }
        }
    }

    /// Multiply `dy` in place by the activation derivative at pre-activation `z`.
    fn chain(&self, z: &Array2<T>, dy: &mut Array2<T>) {
        match self {
            OutputActivation::Identity => {}
            OutputActivation::Tanh => Zip::from(dy).and(z).for_each(|g, &z| {
                let t = z.tanh();
                *g *= T::one() - t * t;
            }),
            OutputActivation::Squashed { low, high } => {
                let half = T::of(0.5);
                for (mut grow, zrow) in dy.rows_mut().into_iter().zip(z.rows()) {
                    for (j, (g, &z)) in grow.iter_mut().zip(zrow.iter()).enumerate() {
                        let t = z.tanh();
                        *g *= (T::one() - t * t) * half * (high[j] - low[j]);
                    }
                }
            }
        }
    }
}

/// One affine layer. `weight` is stored input-major: shape `(fan_in, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.ncols()
    }
}

/// Gradients of a scalar loss with respect to every parameter of a [`DenseNet`],
/// summed over the batch, plus the gradient with respect to the network input.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet<T> {
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
    /// Shape `(batch, input_width)`.
    pub input: Array2<T>,
}

impl<T: Scalar> GradientSet<T> {
    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_zero()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_zero()))
    }
}

/// Intermediate values of a batched forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    /// `inputs[l]` is the input to layer `l`; `inputs[0]` is the network input.
    inputs: Vec<Array2<T>>,
    /// Pre-activation of the output layer.
    output_pre: Array2<T>,
    pub output: Array2<T>,
}

/// Fully connected feed-forward network with its own Adam state.
#[derive(Debug, Clone)]
pub struct DenseNet<T> {
    layers: Vec<Layer<T>>,
    output_activation: OutputActivation<T>,
    pub(super) adam: AdamState<T>,
}

impl<T: Scalar> DenseNet<T> {
    /// Random network with weights and biases drawn uniformly from
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        output_activation: OutputActivation<T>,
        rng: &mut R,
    ) -> Result<Self> {
        validate_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let mut draw = || T::of(rng.random_range(-bound..=bound));
                let weight = Array2::from_shape_simple_fn((fan_in, fan_out), &mut draw);
                let bias = Array1::from_shape_simple_fn(fan_out, &mut draw);
                Layer { weight, bias }
            })
            .collect();
        Self::from_layers(layers, output_activation)
    }

    /// Assemble a network from explicit layers.
    pub fn from_layers(layers: Vec<Layer<T>>, output_activation: OutputActivation<T>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            check_len("layer bias width", l.fan_out(), l.bias.len())?;
            if l.fan_in() == 0 || l.fan_out() == 0 {
                return Err(Error::InvalidArgument(format!("layer {i} has a zero dimension")));
            }
            if i > 0 {
                check_len("consecutive layer widths", layers[i - 1].fan_out(), l.fan_in())?;
            }
        }
        let out = layers.last().unwrap().fan_out();
        output_activation.check(out)?;
        let adam = AdamState::for_layers(&layers, AdamConfig::default());
        let net = Self {
            layers,
            output_activation,
            adam,
        };
        if !net.is_finite() {
            return Err(Error::NonFinite("initial parameters".into()));
        }
        Ok(net)
    }

    pub fn with_adam_config(mut self, config: AdamConfig<T>) -> Self {
        self.adam.config = config;
        self
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_width()];
        sizes.extend(self.layers.iter().map(Layer::fan_out));
        sizes
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().fan_out()
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    /// Direct parameter access. Shapes must not be changed.
    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn output_activation(&self) -> &OutputActivation<T> {
        &self.output_activation
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Number of Adam steps taken so far.
    pub fn optimizer_steps(&self) -> u64 {
        self.adam.step
    }

    pub fn adam_config(&self) -> &AdamConfig<T> {
        &self.adam.config
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Whether two networks have the same architecture.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weight.dim() == b.weight.dim())
    }

    pub fn same_params(&self, other: &Self) -> bool {
        self.layers == other.layers
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    /// Batched forward pass; rows are samples.
    pub fn forward_batch(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        check_len("network input", self.input_width(), x.ncols())?;
        let last = self.layers.len() - 1;
        let mut a = x.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight);
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(relu);
                a = z;
            } else {
                return Ok(self.output_activation.apply(&z));
            }
        }
        unreachable!()
    }

    /// Batched forward pass that keeps the activations needed by [`Self::backward_trace`].
    pub fn forward_trace(&self, x: ArrayView2<T>) -> Result<ForwardTrace<T>> {
        check_len("network input", self.input_width(), x.ncols())?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        inputs.push(x.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = inputs[i].dot(&layer.weight);
            z += &layer.bias;
            if i < last {
                z.mapv_inplace(relu);
                inputs.push(z);
            } else {
                let output = self.output_activation.apply(&z);
                return Ok(ForwardTrace {
                    inputs,
                    output_pre: z,
                    output,
                });
            }
        }
        unreachable!()
    }

    /// Backpropagate `output_grad` (shape `(batch, output_width)`) through a trace
    /// produced by this network. Parameter gradients are summed over the batch.
    pub fn backward_trace(
        &self,
        trace: &ForwardTrace<T>,
        output_grad: ArrayView2<T>,
    ) -> Result<GradientSet<T>> {
        check_len("output gradient width", self.output_width(), output_grad.ncols())?;
        check_len("output gradient batch", trace.output.nrows(), output_grad.nrows())?;
        check_len("trace depth", self.layers.len(), trace.inputs.len())?;

        let n = self.layers.len();
        let mut weights = vec![Array2::zeros((0, 0)); n];
        let mut biases = vec![Array1::zeros(0); n];

        let mut dz = output_grad.to_owned();
        self.output_activation.chain(&trace.output_pre, &mut dz);
        for l in (0..n).rev() {
            let a = &trace.inputs[l];
            weights[l] = a.t().dot(&dz);
            biases[l] = dz.sum_axis(Axis(0));
            let mut da = dz.dot(&self.layers[l].weight.t());
            if l == 0 {
                return Ok(GradientSet {
                    weights,
                    biases,
                    input: da,
                });
            }
            Zip::from(&mut da).and(a).for_each(|g, &act| {
                if act <= T::zero() {
                    *g = T::zero();
                }
            });
            dz = da;
        }
        unreachable!()
    }

    /// Single-sample backward pass, recomputing the forward activations.
    pub fn backward(&self, input: &[T], output_grad: &[T]) -> Result<GradientSet<T>> {
        check_len("output gradient width", self.output_width(), output_grad.len())?;
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let g = ArrayView2::from_shape((1, output_grad.len()), output_grad)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let trace = self.forward_trace(x)?;
        self.backward_trace(&trace, g)
    }

    /// Polyak blend `self <- tau * source + (1 - tau) * self`, elementwise.
    pub fn soft_update(&mut self, source: &Self, tau: T) -> Result<()> {
        if !(tau >= T::zero() && tau <= T::one()) {
            return Err(Error::InvalidArgument(format!("tau must lie in [0, 1], got {tau}")));
        }
        if !self.same_shape(source) {
            return Err(Error::Shape {
                context: "soft update parameter count",
                expected: self.param_count(),
                got: source.param_count(),
            });
        }
        if tau.is_zero() {
            return Ok(());
        }
        if tau == T::one() {
            for (t, s) in self.layers.iter_mut().zip(&source.layers) {
                t.weight.assign(&s.weight);
                t.bias.assign(&s.bias);
            }
            return Ok(());
        }
        let keep = T::one() - tau;
        let blend = |t: &mut T, &s: &T| *t = tau * s + keep * *t;
        for (t, s) in self.layers.iter_mut().zip(&source.layers) {
            Zip::from(&mut t.weight).and(&s.weight).for_each(blend);
            Zip::from(&mut t.bias).and(&s.bias).for_each(blend);
        }
        Ok(())
    }

    /// Parameter-identical copy with fresh optimizer state.
    pub fn clone_into_target(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            output_activation: self.output_activation.clone(),
            adam: AdamState::for_layers(&self.layers, self.adam.config.clone()),
        }
    }
}

#[inline]
fn relu<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument(
            "layer sizes need at least input and output widths".into(),
        ));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArgument("layer widths must be positive".into()));
    }
    Ok(())
}

/// Concatenate two row-aligned matrices column-wise.
pub fn hstack<T: Scalar>(a: ArrayView2<T>, b: ArrayView2<T>) -> Result<Array2<T>> {
    check_len("hstack rows", a.nrows(), b.nrows())?;
    let mut out = Array2::zeros((a.nrows(), a.ncols() + b.ncols()));
    out.slice_mut(s![.., ..a.ncols()]).assign(&a);
    out.slice_mut(s![.., a.ncols()..]).assign(&b);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn zero_net_gives_zero_output() {
        let layers = vec![Layer::<f64>::zeros(3, 4), Layer::zeros(4, 2)];
        let net = DenseNet::from_layers(layers, OutputActivation::Identity).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input() {
        let layer = Layer {
            weight: Array2::<f64>::eye(3),
            bias: Array1::zeros(3),
        };
        let net = DenseNet::from_layers(vec![layer], OutputActivation::Identity).unwrap();
        let x = [0.5, -1.25, 7.0];
        assert_eq!(net.forward(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn shape_errors() {
        let net = DenseNet::<f64>::new(&[4, 8, 2], OutputActivation::Identity, &mut rng()).unwrap();
        assert!(matches!(net.forward(&[1.0; 3]), Err(Error::Shape { .. })));
        assert!(matches!(net.backward(&[1.0; 4], &[1.0; 3]), Err(Error::Shape { .. })));
        assert!(DenseNet::<f64>::new(&[4], OutputActivation::Identity, &mut rng()).is_err());
        assert!(DenseNet::<f64>::new(&[4, 0, 2], OutputActivation::Identity, &mut rng()).is_err());
        let bad = vec![Layer::<f64>::zeros(3, 4), Layer::zeros(5, 2)];
        assert!(DenseNet::from_layers(bad, OutputActivation::Identity).is_err());
    }

    #[test]
    fn init_is_within_fan_in_bound() {
        let net = DenseNet::<f64>::new(&[16, 9, 3], OutputActivation::Identity, &mut rng()).unwrap();
        for l in net.layers() {
            let bound = 1.0 / (l.fan_in() as f64).sqrt();
            assert!(l.weight.iter().chain(l.bias.iter()).all(|v| v.abs() <= bound));
        }
        assert_eq!(net.layer_sizes(), vec![16, 9, 3]);
        assert_eq!(net.param_count(), 16 * 9 + 9 + 9 * 3 + 3);
    }

    #[test]
    fn zero_upstream_gradient() {
        let net = DenseNet::<f64>::new(&[5, 7, 3], OutputActivation::Tanh, &mut rng()).unwrap();
        let g = net.backward(&[0.1, 0.2, -0.3, 0.4, 0.5], &[0.0; 3]).unwrap();
        assert!(g.is_zero());
        assert!(g.input.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_neuron_chain_rule() {
        let layer = Layer {
            weight: array![[1.7]],
            bias: array![-0.4],
        };
        let net = DenseNet::from_layers(vec![layer], OutputActivation::Identity).unwrap();
        let (x, g) = (2.5, -0.75);
        let grads = net.backward(&[x], &[g]).unwrap();
        assert_eq!(grads.weights[0][[0, 0]], g * x);
        assert_eq!(grads.biases[0][0], g);
        assert_eq!(grads.input[[0, 0]], g * 1.7);
    }

    #[test]
    fn squashed_output_respects_bounds() {
        let act = OutputActivation::Squashed {
            low: vec![0.0, -0.25],
            high: vec![0.25, 0.25],
        };
        let mut r = rng();
        let mut net = DenseNet::<f64>::new(&[3, 8, 2], act, &mut r).unwrap();
        for l in net.layers_mut() {
            l.weight.mapv_inplace(|w| w * 50.0);
        }
        for i in 0..200 {
            let x = [i as f64 - 100.0, (i as f64).sin() * 40.0, 3.0];
            let y = net.forward(&x).unwrap();
            assert!((0.0..=0.25).contains(&y[0]));
            assert!((-0.25..=0.25).contains(&y[1]));
        }
    }

    #[test]
    fn soft_update_edge_cases() {
        let mut r = rng();
        let src = DenseNet::<f64>::new(&[3, 4, 2], OutputActivation::Identity, &mut r).unwrap();
        let orig = DenseNet::<f64>::new(&[3, 4, 2], OutputActivation::Identity, &mut r).unwrap();

        let mut t = orig.clone();
        t.soft_update(&src, 0.0).unwrap();
        assert!(t.same_params(&orig));

        t.soft_update(&src, 1.0).unwrap();
        assert!(t.same_params(&src));

        assert!(t.soft_update(&src, 1.5).is_err());
        assert!(t.soft_update(&src, -0.1).is_err());
        assert!(t.soft_update(&src, f64::NAN).is_err());

        let other = DenseNet::<f64>::new(&[3, 5, 2], OutputActivation::Identity, &mut r).unwrap();
        assert!(matches!(t.soft_update(&other, 0.5), Err(Error::Shape { .. })));
    }

    #[test]
    fn soft_update_scalar_arithmetic() {
        let one = |v: f64| Layer {
            weight: array![[v]],
            bias: array![v],
        };
        let mut target = DenseNet::from_layers(vec![one(2.0)], OutputActivation::Identity).unwrap();
        let source = DenseNet::from_layers(vec![one(4.0)], OutputActivation::Identity).unwrap();
        target.soft_update(&source, 0.25).unwrap();
        assert_eq!(target.layers()[0].weight[[0, 0]], 2.5);
        assert_eq!(target.layers()[0].bias[0], 2.5);
    }

    #[test]
    fn clone_into_target_is_independent() {
        let mut r = rng();
        let mut src = DenseNet::<f64>::new(&[4, 6, 2], OutputActivation::Tanh, &mut r).unwrap();
        let clone = src.clone_into_target();
        let clone2 = clone.clone_into_target();
        assert!(clone2.same_params(&src));
        for i in 0..100 {
            let x: Vec<f64> = (0..4).map(|k| ((i * 7 + k) as f64).sin()).collect();
            assert_eq!(src.forward(&x).unwrap(), clone.forward(&x).unwrap());
        }
        src.layers_mut()[0].weight[[0, 0]] += 1.0;
        assert!(!clone.same_params(&src));
        assert_eq!(clone.optimizer_steps(), 0);
    }

    #[test]
    fn forward_is_pure() {
        let net = DenseNet::<f32>::new(&[4, 8, 2], OutputActivation::Identity, &mut rng()).unwrap();
        let x = [0.3f32, -0.2, 0.9, 1.1];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
    }

    #[test]
    fn hstack_columns() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let b = array![[5.0], [6.0]];
        assert_eq!(hstack(a.view(), b.view()).unwrap(), array![[1.0, 2.0, 5.0], [3.0, 4.0, 6.0]]);
    }
}
