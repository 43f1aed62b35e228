use ndarray::{Array1, Array2, Axis};
use vgdf_core::SeededRng;

/// Hidden-layer activation. Output layers are always linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Self-gated `z * sigmoid(z)`, used by the dynamics models.
    Swish,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Swish => z * sigmoid(z),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Swish => {
                let s = sigmoid(z);
                s * (1.0 + z * (1.0 - s))
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug)]
pub struct Linear {
    /// `(fan_in, fan_out)`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    fn new(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Self {
            w: Array2::from_shape_fn((fan_in, fan_out), |_| rng.uniform_in(-bound, bound)),
            b: Array1::from_shape_fn(fan_out, |_| rng.uniform_in(-bound, bound)),
        }
    }
}

/// Fully-connected network with a fixed hidden activation and a linear head.
#[derive(Clone, Debug)]
pub struct FeedForwardNet {
    pub layers: Vec<Linear>,
    pub activation: Activation,
    sizes: Vec<usize>,
}

/// Per-layer inputs and pre-activations recorded during a cached forward
/// pass; consumed by `backward`.
pub struct ForwardCache {
    /// Input to each layer, length `L`.
    pub inputs: Vec<Array2<f64>>,
    /// Pre-activation `z = x W + b` of each layer, length `L`.
    pub pre: Vec<Array2<f64>>,
}

/// Parameter gradients aligned with `FeedForwardNet::layers`.
pub struct NetGrads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl FeedForwardNet {
    /// `sizes` lists every layer width, input first, output last.
    pub fn new(sizes: &[usize], activation: Activation, rng: &mut SeededRng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| Linear::new(w[0], w[1], rng))
            .collect();
        Self {
            layers,
            activation,
            sizes: sizes.to_vec(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(x.ncols(), self.input_dim(), "input dimension mismatch");
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = h.dot(&layer.w);
            z += &layer.b;
            h = if i + 1 < self.layers.len() {
                z.mapv(|v| self.activation.apply(v))
            } else {
                z
            };
        }
        h
    }

    /// Forward pass over a single input vector.
    pub fn forward_one(&self, x: &[f64]) -> Vec<f64> {
        let x = Array2::from_shape_vec((1, x.len()), x.to_vec()).unwrap();
        self.forward(&x).row(0).to_vec()
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, ForwardCache) {
        assert_eq!(x.ncols(), self.input_dim(), "input dimension mismatch");
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(h.clone());
            let mut z = h.dot(&layer.w);
            z += &layer.b;
            pre.push(z.clone());
            h = if i + 1 < self.layers.len() {
                z.mapv(|v| self.activation.apply(v))
            } else {
                z
            };
        }
        (h, ForwardCache { inputs, pre })
    }

    /// Backpropagates `grad_out` (dL/d output) through the cached pass,
    /// returning parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> (NetGrads, Array2<f64>) {
        let (grads, dx) = self.backward_impl(cache, grad_out, true);
        (grads.unwrap(), dx)
    }

    /// Input gradient only; skips the weight-gradient products.
    pub fn backward_input_only(&self, cache: &ForwardCache, grad_out: &Array2<f64>) -> Array2<f64> {
        self.backward_impl(cache, grad_out, false).1
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        grad_out: &Array2<f64>,
        want_params: bool,
    ) -> (Option<NetGrads>, Array2<f64>) {
        let n_layers = self.layers.len();
        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(n_layers);
        let mut d = grad_out.clone();
        for i in (0..n_layers).rev() {
            if i + 1 < n_layers {
                // d currently holds dL/dh for the activation output of layer i.
                d.zip_mut_with(&cache.pre[i], |g, &z| *g *= self.activation.derivative(z));
            }
            if want_params {
                let dw = cache.inputs[i].t().dot(&d);
                let db = d.sum_axis(Axis(0));
                grads.push((dw, db));
            }
            d = d.dot(&self.layers[i].w.t());
        }
        if want_params {
            grads.reverse();
            (Some(NetGrads { layers: grads }), d)
        } else {
            (None, d)
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.w.len() + l.b.len())
            .sum()
    }

    /// Flattened parameter vector (layer order, weights row-major then bias).
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut offset = 0;
        for l in self.layers.iter_mut() {
            for w in l.w.iter_mut() {
                *w = params[offset];
                offset += 1;
            }
            for b in l.b.iter_mut() {
                *b = params[offset];
                offset += 1;
            }
        }
    }

    pub fn grads_flat(grads: &NetGrads) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &grads.layers {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}
