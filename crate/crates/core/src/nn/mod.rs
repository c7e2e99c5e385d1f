//! Dense-network substrate: layers, activations, losses, backprop, Adam.
//!
//! Everything is `f64` and single-threaded. Forward, backward and the
//! optimizer step are pure functions of their inputs, so repeated calls are
//! bit-identical — training determinism rests on that.

mod adam;
mod loss;

pub use adam::Adam;
pub use loss::{binary_cross_entropy, bce_gradient, mse, mse_gradient, BCE_EPSILON};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// Element-wise activation applied after the affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
}

/// Largest f64 strictly below 1.0.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Dot product with four independent accumulators; the fixed summation
/// order keeps results bit-deterministic while breaking the dependency
/// chain that would otherwise serialize the loop.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut sums = [0.0f64; 4];
    let mut a_chunks = a.chunks_exact(4);
    let mut b_chunks = b.chunks_exact(4);
    for (ca, cb) in (&mut a_chunks).zip(&mut b_chunks) {
        sums[0] += ca[0] * cb[0];
        sums[1] += ca[1] * cb[1];
        sums[2] += ca[2] * cb[2];
        sums[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (&x, &y) in a_chunks.remainder().iter().zip(b_chunks.remainder()) {
        tail += x * y;
    }
    (sums[0] + sums[1]) + (sums[2] + sums[3]) + tail
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            // Clamped into the open interval so saturated units still report
            // a value strictly inside (0, 1).
            Activation::Sigmoid => (1.0 / (1.0 + (-z).exp())).clamp(f64::MIN_POSITIVE, ONE_BELOW),
        }
    }

    /// Derivative expressed through the post-activation value `a`.
    ///
    /// ReLU uses zero at the kink (`a == 0`), sigmoid uses `a (1 - a)`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// A dense layer `y = activation(W x + b)`.
///
/// Weights are row-major with shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    activation: Activation,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::domain("layer dimensions must be positive"));
        }
        if weights.len() != in_dim * out_dim {
            return Err(Error::shape("layer weights", in_dim * out_dim, weights.len()));
        }
        if bias.len() != out_dim {
            return Err(Error::shape("layer bias", out_dim, bias.len()));
        }
        if !weights.iter().chain(bias.iter()).all(|v| v.is_finite()) {
            return Err(Error::numeric("layer parameters must be finite"));
        }
        Ok(Self {
            in_dim,
            out_dim,
            activation,
            weights,
            bias,
        })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::domain("layer dimensions must be positive"));
        }
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self::new(in_dim, out_dim, activation, weights, vec![0.0; out_dim])
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    #[inline]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.in_dim {
            return Err(Error::shape("layer input", self.in_dim, x.len()));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::numeric("layer input contains a non-finite value"));
        }
        Ok(())
    }

    /// `activation(W x + b)`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.out_dim];
        self.affine_into(x, &mut out);
        for v in &mut out {
            *v = self.activation.apply(*v);
        }
        Ok(out)
    }

    /// Writes `W x + b` into `pre` (length `out_dim`). No activation.
    #[inline]
    fn affine_into(&self, x: &[f64], pre: &mut [f64]) {
        for (row, out) in self.weights.chunks_exact(self.in_dim).zip(pre.iter_mut()) {
            *out = dot(row, x);
        }
        for (out, &b) in pre.iter_mut().zip(self.bias.iter()) {
            *out += b;
        }
    }
}

/// An ordered stack of dense layers with chaining dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::domain("a network needs at least one layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::shape(
                    format!("layer {} input", k + 1),
                    pair[0].out_dim,
                    pair[1].in_dim,
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Seeded Glorot-uniform initialization of the stack
    /// `dims[0] -> dims[1] -> ... -> dims[n]` with one activation per layer.
    pub fn init(dims: &[usize], activations: &[Activation], seed: u64, stream: Stream) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::domain("need at least an input and an output dimension"));
        }
        if activations.len() != dims.len() - 1 {
            return Err(Error::shape("activations", dims.len() - 1, activations.len()));
        }
        let mut rng = rng_for(seed, stream);
        let layers = dims
            .windows(2)
            .zip(activations.iter())
            .map(|(pair, &act)| DenseLayer::glorot(pair[0], pair[1], act, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Widest layer output; sizes scratch buffers.
    pub fn max_dim(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.out_dim)
            .max()
            .unwrap()
            .max(self.in_dim())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut current = self.layers[0].forward(x)?;
        for layer in &self.layers[1..] {
            current = layer.forward(&current)?;
        }
        Ok(current)
    }

    /// Forward pass that keeps per-layer pre/post activations for `backward`.
    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        self.layers[0].check_input(x)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut current = x;
        for layer in &self.layers {
            let mut z = vec![0.0; layer.out_dim];
            layer.affine_into(current, &mut z);
            let a: Vec<f64> = z.iter().map(|&v| layer.activation.apply(v)).collect();
            pre.push(z);
            post.push(a);
            current = post.last().unwrap();
        }
        Ok(ForwardCache {
            input: x.to_vec(),
            pre,
            post,
        })
    }

    /// Allocation-free forward for the scoring hot path. `buf` must come from
    /// [`Scratch::for_nets`] (or be at least `max_dim` long on both sides).
    /// Returns the number of valid output values in `buf.a`.
    pub fn forward_into<'a>(&self, x: &[f64], scratch: &'a mut Scratch) -> Result<&'a [f64]> {
        self.layers[0].check_input(x)?;
        let (a, b) = (&mut scratch.a, &mut scratch.b);
        {
            let dst = &mut a[..self.layers[0].out_dim];
            self.layers[0].affine_into(x, dst);
            for v in dst.iter_mut() {
                *v = self.layers[0].activation.apply(*v);
            }
        }
        let mut src_is_a = true;
        for layer in &self.layers[1..] {
            let (src, dst) = if src_is_a {
                (&a[..layer.in_dim], &mut b[..layer.out_dim])
            } else {
                (&b[..layer.in_dim], &mut a[..layer.out_dim])
            };
            layer.affine_into(src, dst);
            for v in dst.iter_mut() {
                *v = layer.activation.apply(*v);
            }
            src_is_a = !src_is_a;
        }
        let out_dim = self.out_dim();
        Ok(if src_is_a {
            &scratch.a[..out_dim]
        } else {
            &scratch.b[..out_dim]
        })
    }

    /// Backpropagates `d loss / d output` through the cached forward pass.
    /// Returns the parameter gradients; the loss gradient with respect to
    /// the network input is available via [`Network::backward_accumulate`].
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_accumulate(cache, output_grad, 1.0, &mut grads)?;
        Ok(grads)
    }

    /// Adds `scale ×` the sample gradients into `grads` and returns
    /// `scale × d loss / d input`, so a downstream network's gradient can be
    /// chained into the one feeding it. Used to fold a mini-batch into one
    /// gradient set without intermediate allocations.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<Vec<f64>> {
        if cache.pre.len() != self.layers.len() {
            return Err(Error::shape("forward cache layers", self.layers.len(), cache.pre.len()));
        }
        if cache.input.len() != self.in_dim() {
            return Err(Error::shape("forward cache input", self.in_dim(), cache.input.len()));
        }
        if output_grad.len() != self.out_dim() {
            return Err(Error::shape("output gradient", self.out_dim(), output_grad.len()));
        }
        if grads.weights.len() != self.layers.len() {
            return Err(Error::shape("gradient set layers", self.layers.len(), grads.weights.len()));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if cache.pre[k].len() != layer.out_dim || cache.post[k].len() != layer.out_dim {
                return Err(Error::shape(format!("forward cache layer {k}"), layer.out_dim, cache.pre[k].len()));
            }
            if grads.weights[k].len() != layer.weights.len() || grads.bias[k].len() != layer.bias.len() {
                return Err(Error::shape(format!("gradient set layer {k}"), layer.weights.len(), grads.weights[k].len()));
            }
        }

        // d loss / d pre-activation of the layer being processed.
        let last = self.layers.len() - 1;
        let mut dz: Vec<f64> = output_grad
            .iter()
            .zip(cache.post[last].iter())
            .map(|(&g, &a)| g * self.layers[last].activation.derivative_from_output(a))
            .collect();

        let mut input_grad = Vec::new();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let layer_input: &[f64] = if k == 0 { &cache.input } else { &cache.post[k - 1] };

            let gw = &mut grads.weights[k];
            for (o, &dzo) in dz.iter().enumerate() {
                let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                let c = scale * dzo;
                for (g, &xi) in row.iter_mut().zip(layer_input.iter()) {
                    *g += c * xi;
                }
            }
            for (g, &dzo) in grads.bias[k].iter_mut().zip(dz.iter()) {
                *g += scale * dzo;
            }

            // d loss / d layer-input = W^T dz.
            let mut dx = vec![0.0; layer.in_dim];
            for (o, &dzo) in dz.iter().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (d, &w) in dx.iter_mut().zip(row.iter()) {
                    *d += w * dzo;
                }
            }
            if k > 0 {
                let prev = &self.layers[k - 1];
                dz = dx
                    .iter()
                    .zip(cache.post[k - 1].iter())
                    .map(|(&g, &a)| g * prev.activation.derivative_from_output(a))
                    .collect();
            } else {
                for d in &mut dx {
                    *d *= scale;
                }
                input_grad = dx;
            }
        }
        Ok(input_grad)
    }

    /// Canonical little-endian byte image of all parameters, in layer order.
    /// Two networks are parameter-identical iff these bytes are equal.
    pub fn param_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for &w in &layer.weights {
                out.extend_from_slice(&w.to_le_bytes());
            }
            for &b in &layer.bias {
                out.extend_from_slice(&b.to_le_bytes());
            }
        }
        out
    }

    pub(crate) fn apply_update(&mut self, layer: usize, weight_delta: &[f64], bias_delta: &[f64]) {
        let l = &mut self.layers[layer];
        for (w, &d) in l.weights.iter_mut().zip(weight_delta.iter()) {
            *w += d;
        }
        for (b, &d) in l.bias.iter_mut().zip(bias_delta.iter()) {
            *b += d;
        }
    }

    /// Post-deserialization validation; `context` names the owning field.
    pub(crate) fn validate(&self, context: &str) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::format(format!("{context}: empty layer list")));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.in_dim == 0 || layer.out_dim == 0 {
                return Err(Error::format(format!("{context}: layer {k} has a zero dimension")));
            }
            if layer.weights.len() != layer.in_dim * layer.out_dim {
                return Err(Error::format(format!(
                    "{context}: layer {k} weights length {} does not match {}x{}",
                    layer.weights.len(),
                    layer.out_dim,
                    layer.in_dim
                )));
            }
            if layer.bias.len() != layer.out_dim {
                return Err(Error::format(format!(
                    "{context}: layer {k} bias length {} does not match out_dim {}",
                    layer.bias.len(),
                    layer.out_dim
                )));
            }
            if !layer.weights.iter().chain(layer.bias.iter()).all(|v| v.is_finite()) {
                return Err(Error::format(format!("{context}: layer {k} has a non-finite parameter")));
            }
        }
        for (k, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::format(format!(
                    "{context}: layer {} in_dim {} does not chain from out_dim {}",
                    k + 1,
                    pair[1].in_dim,
                    pair[0].out_dim
                )));
            }
        }
        Ok(())
    }
}

/// Per-layer pre/post activations from [`Network::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.post.last().unwrap()
    }

    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

/// Reusable ping-pong buffers for [`Network::forward_into`].
#[derive(Debug, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Scratch {
    pub fn for_nets(nets: &[&Network]) -> Self {
        let dim = nets.iter().map(|n| n.max_dim()).max().unwrap_or(1);
        Scratch {
            a: vec![0.0; dim],
            b: vec![0.0; dim],
        }
    }
}

/// Loss gradients for every parameter of a [`Network`], same shapes.
#[derive(Debug, Clone)]
pub struct Gradients {
    weights: Vec<Vec<f64>>,
    bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.bias {
            b.fill(0.0);
        }
    }

    pub fn layer_weights(&self, layer: usize) -> &[f64] {
        &self.weights[layer]
    }

    pub fn layer_bias(&self, layer: usize) -> &[f64] {
        &self.bias[layer]
    }

    pub fn is_finite(&self) -> bool {
        self.iter_all().all(|v| v.iter().all(|x| x.is_finite()))
    }

    fn iter_all(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.weights.iter().chain(self.bias.iter())
    }

    #[cfg(test)]
    pub(crate) fn set_all(&mut self, value: f64) {
        for v in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            v.fill(value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(w: Vec<f64>, b: Vec<f64>, in_dim: usize, out_dim: usize, act: Activation) -> DenseLayer {
        DenseLayer::new(in_dim, out_dim, act, w, b).unwrap()
    }

    #[test]
    fn identity_relu_clamps_negative() {
        let l = layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2, Activation::Relu);
        assert_eq!(l.forward(&[1.0, -1.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn sigmoid_single_unit_matches_scalar_evaluation() {
        let l = layer(vec![2.0], vec![1.0], 1, 1, Activation::Sigmoid);
        let out = l.forward(&[0.0]).unwrap();
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((out[0] - expected).abs() < 1e-12);
        assert!((out[0] - 0.7310585786).abs() < 1e-9);
    }

    #[test]
    fn zero_weights_ignore_input() {
        let l = layer(vec![0.0; 6], vec![0.5; 3], 2, 3, Activation::Sigmoid);
        let s = Activation::Sigmoid.apply(0.5);
        let out = l.forward(&[123.0, -9.0]).unwrap();
        assert_eq!(out, vec![s, s, s]);
    }

    #[test]
    fn forward_rejects_bad_shape_and_non_finite() {
        let l = layer(vec![1.0], vec![0.0], 1, 1, Activation::Relu);
        assert!(matches!(l.forward(&[1.0, 2.0]), Err(Error::Shape { .. })));
        assert!(matches!(l.forward(&[f64::NAN]), Err(Error::Numeric(_))));
    }

    #[test]
    fn single_layer_network_equals_layer_forward() {
        let l = layer(vec![0.3, -0.2, 0.5, 0.9], vec![0.1, -0.4], 2, 2, Activation::Sigmoid);
        let net = Network::new(vec![l.clone()]).unwrap();
        let x = [0.7, 0.2];
        assert_eq!(net.forward(&x).unwrap(), l.forward(&x).unwrap());
    }

    #[test]
    fn two_identity_relu_layers_preserve_nonnegative_input() {
        let id = layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2, Activation::Relu);
        let net = Network::new(vec![id.clone(), id]).unwrap();
        assert_eq!(net.forward(&[0.25, 3.0]).unwrap(), vec![0.25, 3.0]);
    }

    #[test]
    fn network_rejects_non_chaining_dims() {
        let a = layer(vec![0.0; 6], vec![0.0; 3], 2, 3, Activation::Relu);
        let b = layer(vec![0.0; 4], vec![0.0; 2], 2, 2, Activation::Relu);
        assert!(matches!(Network::new(vec![a, b]), Err(Error::Shape { .. })));
    }

    #[test]
    fn init_is_seed_deterministic_and_shaped() {
        let n1 = Network::init(&[21, 64], &[Activation::Relu], 9, Stream::EncoderInit).unwrap();
        let n2 = Network::init(&[21, 64], &[Activation::Relu], 9, Stream::EncoderInit).unwrap();
        assert_eq!(n1.param_bytes(), n2.param_bytes());
        let l = &n1.layers()[0];
        assert_eq!(l.weights().len(), 64 * 21);
        assert_eq!(l.bias().len(), 64);
        assert!(l.bias().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn glorot_bound_holds_over_many_draws() {
        let limit = (6.0 / 85.0f64).sqrt();
        let mut count = 0usize;
        for seed in 0..8 {
            let net = Network::init(&[21, 64], &[Activation::Relu], seed, Stream::EncoderInit).unwrap();
            for &w in net.layers()[0].weights() {
                assert!(w.abs() <= limit, "weight {w} outside ±{limit}");
                count += 1;
            }
        }
        assert!(count >= 10_000);
    }

    #[test]
    fn init_rejects_zero_dims() {
        assert!(Network::init(&[21, 0], &[Activation::Relu], 1, Stream::EncoderInit).is_err());
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let net = Network::init(&[3, 4, 2], &[Activation::Relu, Activation::Sigmoid], 5, Stream::EncoderInit).unwrap();
        let cache = net.forward_cached(&[0.1, 0.5, 0.9]).unwrap();
        let grads = net.backward(&cache, &[0.0, 0.0]).unwrap();
        assert!(grads.iter_all().all(|v| v.iter().all(|&g| g == 0.0)));
    }

    #[test]
    fn linear_relu_layer_matches_least_squares_gradient() {
        // One 2x2 relu layer kept on positive pre-activations acts linearly;
        // for L = mse(target, a) the gradient is dW = (2/n) (a - t) x^T.
        let l = layer(vec![0.8, 0.1, 0.2, 0.7], vec![0.05, 0.05], 2, 2, Activation::Relu);
        let net = Network::new(vec![l]).unwrap();
        let x = [0.6, 0.9];
        let target = [0.2, 0.4];
        let cache = net.forward_cached(&x).unwrap();
        let a = cache.output().to_vec();
        assert!(cache.pre_activations()[0].iter().all(|&z| z > 0.0));

        let up = mse_gradient(&target, &a).unwrap();
        let grads = net.backward(&cache, &up).unwrap();

        for o in 0..2 {
            let dzo = 2.0 / 2.0 * (a[o] - target[o]);
            for i in 0..2 {
                let expected = dzo * x[i];
                let got = grads.layer_weights(0)[o * 2 + i];
                assert!((got - expected).abs() < 1e-12, "dW[{o}][{i}]: {got} vs {expected}");
            }
            assert!((grads.layer_bias(0)[o] - dzo).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_rejects_mismatched_cache() {
        let small = Network::init(&[2, 2], &[Activation::Relu], 1, Stream::EncoderInit).unwrap();
        let big = Network::init(&[2, 3, 2], &[Activation::Relu, Activation::Relu], 1, Stream::EncoderInit).unwrap();
        let cache = small.forward_cached(&[0.4, 0.6]).unwrap();
        assert!(matches!(big.backward(&cache, &[0.0, 0.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn forward_is_pure() {
        let net = Network::init(&[4, 5, 3], &[Activation::Relu, Activation::Sigmoid], 42, Stream::DecoderInit).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn forward_into_agrees_with_forward() {
        let net = Network::init(
            &[5, 8, 3, 4],
            &[Activation::Relu, Activation::Sigmoid, Activation::Relu],
            11,
            Stream::ClassifierInit,
        )
        .unwrap();
        let x = [0.9, -0.3, 0.0, 0.7, 0.2];
        let expected = net.forward(&x).unwrap();
        let mut scratch = Scratch::for_nets(&[&net]);
        let got = net.forward_into(&x, &mut scratch).unwrap();
        assert_eq!(got, expected.as_slice());
    }

    #[test]
    fn sigmoid_stays_in_open_unit_interval_and_relu_nonnegative() {
        for z in [-745.0, -30.0, -1.0, 0.0, 1.0, 30.0, 745.0] {
            let s = Activation::Sigmoid.apply(z);
            assert!(s > 0.0 && s < 1.0, "sigmoid({z}) = {s}");
            assert!(Activation::Relu.apply(z) >= 0.0);
        }
    }
}
