use ndarray::{Array1, Array2};

use crate::net::{FeedForwardNet, NetGrads};

/// Adam with bias correction. The update is a pure function of the gradients
/// and the accumulated moment state.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Adam {
    pub fn new(net: &FeedForwardNet, lr: f64) -> Self {
        let zeros = |net: &FeedForwardNet| {
            net.layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect::<Vec<_>>()
        };
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zeros(net),
            v: zeros(net),
        }
    }

    pub fn step(&mut self, net: &mut FeedForwardNet, grads: &NetGrads) {
        assert_eq!(grads.layers.len(), net.layers.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, (gw, gb)) in grads.layers.iter().enumerate() {
            let (mw, mb) = &mut self.m[i];
            let (vw, vb) = &mut self.v[i];
            mw.zip_mut_with(gw, |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            vw.zip_mut_with(gw, |v, &g| *v = self.beta2 * *v + (1.0 - self.beta2) * g * g);
            mb.zip_mut_with(gb, |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            vb.zip_mut_with(gb, |v, &g| *v = self.beta2 * *v + (1.0 - self.beta2) * g * g);

            let layer = &mut net.layers[i];
            for ((w, &m), &v) in layer.w.iter_mut().zip(mw.iter()).zip(vw.iter()) {
                *w -= self.lr * (m / bc1) / ((v / bc2).sqrt() + self.eps);
            }
            for ((b, &m), &v) in layer.b.iter_mut().zip(mb.iter()).zip(vb.iter()) {
                *b -= self.lr * (m / bc1) / ((v / bc2).sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Activation;
    use ndarray::Array2;
    use vgdf_core::SeededRng;

    #[test]
    fn adam_descends_a_quadratic() {
        let mut rng = SeededRng::new(1);
        let mut net = FeedForwardNet::new(&[2, 1], Activation::Relu, &mut rng);
        let mut opt = Adam::new(&net, 1e-2);
        let x = Array2::from_shape_fn((16, 2), |_| rng.uniform_in(-1.0, 1.0));
        let target = x.map_axis(ndarray::Axis(1), |r| 0.5 * r[0] - 0.3 * r[1]);

        let loss = |net: &FeedForwardNet| {
            let out = net.forward(&x);
            out.column(0)
                .iter()
                .zip(&target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>()
                / 16.0
        };
        let before = loss(&net);
        for _ in 0..500 {
            let (out, cache) = net.forward_cached(&x);
            let mut grad = Array2::zeros((16, 1));
            for i in 0..16 {
                grad[(i, 0)] = 2.0 * (out[(i, 0)] - target[i]) / 16.0;
            }
            let (grads, _) = net.backward(&cache, &grad);
            opt.step(&mut net, &grads);
        }
        let after = loss(&net);
        assert!(after < before * 0.01, "loss {before} -> {after}");
    }

    #[test]
    fn update_is_deterministic_given_state() {
        let mut rng = SeededRng::new(2);
        let net = FeedForwardNet::new(&[2, 4, 1], Activation::Relu, &mut rng);
        let x = Array2::from_shape_fn((4, 2), |_| rng.uniform_in(-1.0, 1.0));

        let run = || {
            let mut n = net.clone();
            let mut opt = Adam::new(&n, 3e-4);
            for _ in 0..5 {
                let (out, cache) = n.forward_cached(&x);
                let grad = out.mapv(|v| 2.0 * v / 4.0);
                let (grads, _) = n.backward(&cache, &grad);
                opt.step(&mut n, &grads);
            }
            n.params_flat()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }
}
