use ndarray::{s, Array1, Array2};
use vgdf_core::SeededRng;

use crate::adam::Adam;
use crate::batch::concat_columns;
use crate::critic::CriticPair;
use crate::net::{Activation, FeedForwardNet};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Keeps the tanh change-of-variables log-density finite at saturation.
const TANH_EPS: f64 = 1e-6;

/// Squashed-Gaussian policy: the net emits per-dimension mean and log-std,
/// actions are `tanh(mean + std * eps)` in `(-1, 1)`.
#[derive(Clone, Debug)]
pub struct StochasticPolicy {
    pub net: FeedForwardNet,
    pub action_dim: usize,
}

/// Reparameterized draw with everything the gradient path needs.
pub struct PolicySample {
    pub actions: Array2<f64>,
    pub log_probs: Array1<f64>,
    pub pre_tanh: Array2<f64>,
    pub eps: Array2<f64>,
    pub mean: Array2<f64>,
    pub log_std: Array2<f64>,
}

impl StochasticPolicy {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut SeededRng) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * action_dim);
        Self {
            net: FeedForwardNet::new(&sizes, Activation::Relu, rng),
            action_dim,
        }
    }

    fn split_heads(&self, out: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let mean = out.slice(s![.., ..self.action_dim]).to_owned();
        let log_std = out
            .slice(s![.., self.action_dim..])
            .mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
        (mean, log_std)
    }

    /// Samples actions for a batch of states.
    pub fn sample(&self, states: &Array2<f64>, rng: &mut SeededRng) -> PolicySample {
        let out = self.net.forward(states);
        let (mean, log_std) = self.split_heads(&out);
        let eps = Array2::from_shape_fn(mean.dim(), |_| rng.normal());
        let pre_tanh = &mean + &(log_std.mapv(f64::exp) * &eps);
        let actions = pre_tanh.mapv(f64::tanh);
        let log_probs = squashed_log_prob(&actions, &eps, &log_std);
        PolicySample {
            actions,
            log_probs,
            pre_tanh,
            eps,
            mean,
            log_std,
        }
    }

    /// Deterministic action (tanh of the mean), used for evaluation.
    pub fn mean_actions(&self, states: &Array2<f64>) -> Array2<f64> {
        let out = self.net.forward(states);
        out.slice(s![.., ..self.action_dim]).mapv(f64::tanh)
    }

    pub fn act(&self, state: &[f64], rng: &mut SeededRng) -> Vec<f64> {
        let states = Array2::from_shape_vec((1, state.len()), state.to_vec()).unwrap();
        self.sample(&states, rng).actions.row(0).to_vec()
    }

    pub fn act_mean(&self, state: &[f64]) -> Vec<f64> {
        let states = Array2::from_shape_vec((1, state.len()), state.to_vec()).unwrap();
        self.mean_actions(&states).row(0).to_vec()
    }
}

/// `log pi(a|s)` for a reparameterized draw: per-dimension Gaussian
/// log-density in pre-tanh space minus the tanh log-Jacobian.
fn squashed_log_prob(actions: &Array2<f64>, eps: &Array2<f64>, log_std: &Array2<f64>) -> Array1<f64> {
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let n = actions.nrows();
    let mut out = Array1::zeros(n);
    for i in 0..n {
        let mut lp = 0.0;
        for d in 0..actions.ncols() {
            let e = eps[(i, d)];
            let a = actions[(i, d)];
            lp += -0.5 * e * e - log_std[(i, d)] - half_ln_2pi - (1.0 - a * a + TANH_EPS).ln();
        }
        out[i] = lp;
    }
    out
}

/// Which head of the twin critics drives the policy objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QObjective {
    /// `min(Q1, Q2)`: the main policy.
    Pessimistic,
    /// `max(Q1, Q2)`: the optimistic exploration policy.
    Optimistic,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PolicyUpdateStats {
    pub q_mean: f64,
    pub entropy: f64,
}

/// One ascent step on `E[Q(s, a) + temperature * H]` with reparameterized
/// actions; `objective` selects min or max over the twin critics. Gradients
/// flow through the critic's action input, never into the critic weights.
pub fn policy_update(
    policy: &mut StochasticPolicy,
    opt: &mut Adam,
    critics: &CriticPair,
    states: &Array2<f64>,
    temperature: f64,
    objective: QObjective,
    rng: &mut SeededRng,
) -> PolicyUpdateStats {
    let n = states.nrows();
    let d = policy.action_dim;
    let scale = 1.0 / n as f64;

    let (out, cache) = policy.net.forward_cached(states);
    let mean = out.slice(s![.., ..d]).to_owned();
    let log_std_raw = out.slice(s![.., d..]).to_owned();
    let log_std = log_std_raw.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    let std = log_std.mapv(f64::exp);
    let eps = Array2::from_shape_fn((n, d), |_| rng.normal());
    let pre_tanh = &mean + &(&std * &eps);
    let actions = pre_tanh.mapv(f64::tanh);
    let log_probs = squashed_log_prob(&actions, &eps, &log_std);

    let sa = concat_columns(states, &actions);
    let (q1, c1) = critics.q1.forward_cached(&sa);
    let (q2, c2) = critics.q2.forward_cached(&sa);

    // Per-sample selected critic; loss L = mean(temperature * log_pi - q_sel).
    let mut g1 = Array2::zeros((n, 1));
    let mut g2 = Array2::zeros((n, 1));
    let mut q_sum = 0.0;
    for i in 0..n {
        let (a, b) = (q1[(i, 0)], q2[(i, 0)]);
        let pick_first = match objective {
            QObjective::Pessimistic => a <= b,
            QObjective::Optimistic => a >= b,
        };
        q_sum += if pick_first { a } else { b };
        if pick_first {
            g1[(i, 0)] = -scale;
        } else {
            g2[(i, 0)] = -scale;
        }
    }
    let dsa1 = critics.q1.backward_input_only(&c1, &g1);
    let dsa2 = critics.q2.backward_input_only(&c2, &g2);
    // dL/da from the critic path.
    let mut da = dsa1.slice(s![.., states.ncols()..]).to_owned();
    da += &dsa2.slice(s![.., states.ncols()..]);

    // dL/du and dL/dlog_std accumulators.
    let mut du = Array2::zeros((n, d));
    let mut dlog_std = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            let a = actions[(i, j)];
            let dtanh = 1.0 - a * a;
            // Critic path through a = tanh(u).
            let mut g_u = da[(i, j)] * dtanh;
            // Entropy path: d(temperature * log_pi)/du via the tanh
            // log-Jacobian, plus the explicit -log_std term.
            g_u += scale * temperature * 2.0 * a * dtanh / (dtanh + TANH_EPS);
            du[(i, j)] = g_u;
            dlog_std[(i, j)] = g_u * std[(i, j)] * eps[(i, j)] - scale * temperature;
        }
    }

    // Map back to the raw heads; clamped log-std entries get zero gradient.
    let mut grad_out = Array2::zeros((n, 2 * d));
    for i in 0..n {
        for j in 0..d {
            grad_out[(i, j)] = du[(i, j)];
            let raw = log_std_raw[(i, j)];
            grad_out[(i, d + j)] = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                dlog_std[(i, j)]
            } else {
                0.0
            };
        }
    }
    let (grads, _) = policy.net.backward(&cache, &grad_out);
    opt.step(&mut policy.net, &grads);

    PolicyUpdateStats {
        q_mean: q_sum / n as f64,
        entropy: -log_probs.mean().unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vgdf_core::SeededRng;

    #[test]
    fn log_prob_is_finite_at_saturation() {
        let mut rng = SeededRng::new(1);
        let policy = StochasticPolicy::new(2, 1, &[8], &mut rng);
        let states = Array2::from_shape_fn((4, 2), |_| rng.uniform_in(-50.0, 50.0));
        let sample = policy.sample(&states, &mut rng);
        assert!(sample.log_probs.iter().all(|lp| lp.is_finite()));
    }

    #[test]
    fn sampling_is_deterministic_given_rng() {
        let mut rng = SeededRng::new(2);
        let policy = StochasticPolicy::new(3, 2, &[16], &mut rng);
        let states = Array2::from_shape_fn((5, 3), |_| rng.uniform_in(-1.0, 1.0));
        let a = policy.sample(&states, &mut SeededRng::new(9)).actions;
        let b = policy.sample(&states, &mut SeededRng::new(9)).actions;
        assert_eq!(a, b);
    }

    #[test]
    fn squashed_entropy_matches_numeric_integration() {
        // 1-D action: compare E[-log pi] against quadrature over the
        // pre-tanh space, H = H_gauss + E[ln(1 - tanh(u)^2)].
        let mut rng = SeededRng::new(3);
        let policy = StochasticPolicy::new(2, 1, &[16, 16], &mut rng);
        let state = Array2::from_shape_vec((1, 2), vec![0.3, -0.4]).unwrap();

        let out = policy.net.forward(&state);
        let mu = out[(0, 0)];
        let log_std = out[(0, 1)].clamp(LOG_STD_MIN, LOG_STD_MAX);
        let std = log_std.exp();

        // Quadrature over u on mu +/- 10 std.
        let m = 20_000;
        let lo = mu - 10.0 * std;
        let hi = mu + 10.0 * std;
        let dx = (hi - lo) / m as f64;
        let mut entropy = 0.0;
        for k in 0..m {
            let u = lo + (k as f64 + 0.5) * dx;
            let z = (u - mu) / std;
            let pdf_u = (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt());
            let a = u.tanh();
            // p_a(a) = p_u(u) / (1 - a^2); -ln p_a integrated under p_u.
            let log_pa = pdf_u.ln() - (1.0 - a * a + TANH_EPS).ln();
            entropy += pdf_u * (-log_pa) * dx;
        }

        let mut sum = 0.0;
        let n = 200_000;
        let mut srng = SeededRng::new(4);
        let states = Array2::from_shape_vec((1, 2), vec![0.3, -0.4]).unwrap();
        for _ in 0..n / 1000 {
            let big = Array2::from_shape_fn((1000, 2), |(_, c)| states[(0, c)]);
            let s = policy.sample(&big, &mut srng);
            sum += s.log_probs.iter().map(|lp| -lp).sum::<f64>();
        }
        let estimate = sum / n as f64;
        assert!(
            (estimate - entropy).abs() < 1e-2,
            "estimate {estimate} vs quadrature {entropy}"
        );
    }
}
