use nalgebra::{DMatrix, DVector};
use vgdf_core::TabularMdp;

use crate::error::TheoryError;
use crate::policy::TabularPolicy;

const SOLVE_TOL: f64 = 1e-10;

/// Exact evaluation of a policy: unnormalized state values `V`, state-action
/// values `Q`, and the normalized performance `eta = (1 - gamma) rho0' V`,
/// which lies in `[0, r_max]` for rewards in `[0, r_max]`.
#[derive(Clone, Debug)]
pub struct ValueTriple {
    pub v: Vec<f64>,
    /// Row-major `[s][a]`.
    pub q: Vec<f64>,
    pub eta: f64,
    /// Unnormalized expected return `rho0' V = eta / (1 - gamma)`.
    pub expected_return: f64,
}

impl ValueTriple {
    pub fn q_at(&self, s: usize, a: usize, n_actions: usize) -> f64 {
        self.q[s * n_actions + a]
    }
}

/// Discounted, normalized state and state-action visitation.
#[derive(Clone, Debug)]
pub struct OccupancyMeasure {
    /// `nu[s]`, sums to 1.
    pub nu: Vec<f64>,
    /// `rho[s][a] = nu[s] * pi(a|s)`, row-major.
    pub rho: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn rho_at(&self, s: usize, a: usize, n_actions: usize) -> f64 {
        self.rho[s * n_actions + a]
    }
}

fn policy_transition(m: &TabularMdp, pi: &TabularPolicy) -> DMatrix<f64> {
    let n = m.n_states();
    DMatrix::from_fn(n, n, |s, s2| {
        (0..m.n_actions())
            .map(|a| pi.prob(s, a) * m.p(s, a, s2))
            .sum()
    })
}

fn policy_reward(m: &TabularMdp, pi: &TabularPolicy) -> DVector<f64> {
    DVector::from_fn(m.n_states(), |s, _| {
        (0..m.n_actions())
            .map(|a| pi.prob(s, a) * m.reward(s, a))
            .sum()
    })
}

fn check_compatible(m: &TabularMdp, pi: &TabularPolicy) -> Result<(), TheoryError> {
    if pi.n_states() != m.n_states() || pi.n_actions() != m.n_actions() {
        return Err(TheoryError::PolicyShape(format!(
            "policy is {}x{}, MDP is {}x{}",
            pi.n_states(),
            pi.n_actions(),
            m.n_states(),
            m.n_actions()
        )));
    }
    Ok(())
}

/// Solves the Bellman evaluation equation `V = r_pi + gamma P_pi V` by a
/// direct LU solve and verifies the fixed-point residual.
pub fn exact_values(m: &TabularMdp, pi: &TabularPolicy) -> Result<ValueTriple, TheoryError> {
    check_compatible(m, pi)?;
    let n = m.n_states();
    let gamma = m.discount();
    let p_pi = policy_transition(m, pi);
    let r_pi = policy_reward(m, pi);
    let system = DMatrix::identity(n, n) - gamma * &p_pi;
    let v = system
        .lu()
        .solve(&r_pi)
        .ok_or(TheoryError::SolverResidual {
            residual: f64::INFINITY,
            tol: SOLVE_TOL,
        })?;

    let residual = (&r_pi + gamma * &p_pi * &v - &v).abs().max();
    if residual > SOLVE_TOL {
        return Err(TheoryError::SolverResidual {
            residual,
            tol: SOLVE_TOL,
        });
    }

    let mut q = vec![0.0; n * m.n_actions()];
    for s in 0..n {
        for a in 0..m.n_actions() {
            let next: f64 = m.row(s, a).iter().zip(v.iter()).map(|(p, vs)| p * vs).sum();
            q[s * m.n_actions() + a] = m.reward(s, a) + gamma * next;
        }
    }

    let expected_return: f64 = m
        .initial_dist()
        .iter()
        .zip(v.iter())
        .map(|(rho, vs)| rho * vs)
        .sum();
    Ok(ValueTriple {
        v: v.iter().copied().collect(),
        q,
        eta: (1.0 - gamma) * expected_return,
        expected_return,
    })
}

/// Solves `nu = (1 - gamma) rho0 + gamma P_pi' nu` exactly.
pub fn occupancy(m: &TabularMdp, pi: &TabularPolicy) -> Result<OccupancyMeasure, TheoryError> {
    check_compatible(m, pi)?;
    let n = m.n_states();
    let gamma = m.discount();
    let p_pi = policy_transition(m, pi);
    let rho0 = DVector::from_iterator(n, m.initial_dist().iter().copied());
    let system = DMatrix::identity(n, n) - gamma * p_pi.transpose();
    let nu = system
        .lu()
        .solve(&((1.0 - gamma) * rho0))
        .ok_or(TheoryError::SolverResidual {
            residual: f64::INFINITY,
            tol: SOLVE_TOL,
        })?;

    let mut rho = vec![0.0; n * m.n_actions()];
    for s in 0..n {
        for a in 0..m.n_actions() {
            rho[s * m.n_actions() + a] = nu[s] * pi.prob(s, a);
        }
    }
    Ok(OccupancyMeasure {
        nu: nu.iter().copied().collect(),
        rho,
    })
}

/// Iterative policy evaluation, kept as an independent cross-check for the
/// direct solve.
pub fn policy_evaluation_iterative(m: &TabularMdp, pi: &TabularPolicy, tol: f64) -> Vec<f64> {
    let n = m.n_states();
    let gamma = m.discount();
    let mut v = vec![0.0; n];
    loop {
        let mut next = vec![0.0; n];
        for s in 0..n {
            let mut acc = 0.0;
            for a in 0..m.n_actions() {
                let exp_next: f64 = m.row(s, a).iter().zip(&v).map(|(p, vs)| p * vs).sum();
                acc += pi.prob(s, a) * (m.reward(s, a) + gamma * exp_next);
            }
            next[s] = acc;
        }
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < tol {
            return v;
        }
    }
}

/// Optimal value iteration; returns `(V*, Q*)` run to the given contraction
/// tolerance.
pub fn value_iteration_optimal(m: &TabularMdp, tol: f64) -> (Vec<f64>, Vec<f64>) {
    let n = m.n_states();
    let gamma = m.discount();
    let mut v = vec![0.0; n];
    loop {
        let mut next = vec![0.0; n];
        for s in 0..n {
            let best = (0..m.n_actions())
                .map(|a| {
                    let exp_next: f64 = m.row(s, a).iter().zip(&v).map(|(p, vs)| p * vs).sum();
                    m.reward(s, a) + gamma * exp_next
                })
                .fold(f64::NEG_INFINITY, f64::max);
            next[s] = best;
        }
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < tol {
            break;
        }
    }
    let mut q = vec![0.0; n * m.n_actions()];
    for s in 0..n {
        for a in 0..m.n_actions() {
            let exp_next: f64 = m.row(s, a).iter().zip(&v).map(|(p, vs)| p * vs).sum();
            q[s * m.n_actions() + a] = m.reward(s, a) + gamma * exp_next;
        }
    }
    (v, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use vgdf_core::SeededRng;

    fn single_state(reward: f64, gamma: f64) -> TabularMdp {
        TabularMdp::new(1, 1, vec![1.0], vec![reward], gamma, vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn constant_reward_one_gives_eta_one() {
        for gamma in [0.0, 0.5, 0.9, 0.99] {
            let m = single_state(1.0, gamma);
            let pi = TabularPolicy::uniform(1, 1);
            let vt = exact_values(&m, &pi).unwrap();
            assert_abs_diff_eq!(vt.eta, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_reward_gives_zero_values() {
        let m = single_state(0.0, 0.9);
        let pi = TabularPolicy::uniform(1, 1);
        let vt = exact_values(&m, &pi).unwrap();
        assert_eq!(vt.eta, 0.0);
        assert!(vt.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn v_is_policy_average_of_q() {
        let mut rng = SeededRng::new(4);
        let m = TabularMdp::random(5, 3, 0.9, &mut rng);
        let pi = TabularPolicy::random(5, 3, &mut rng);
        let vt = exact_values(&m, &pi).unwrap();
        for s in 0..5 {
            let avg: f64 = (0..3).map(|a| pi.prob(s, a) * vt.q_at(s, a, 3)).sum();
            assert_abs_diff_eq!(vt.v[s], avg, epsilon = 1e-10);
        }
    }

    #[test]
    fn eta_matches_monte_carlo_on_random_mdp() {
        // Independent oracle: truncated Monte-Carlo rollouts.
        let mut rng = SeededRng::new(7);
        let gamma = 0.9;
        let m = TabularMdp::random(4, 3, gamma, &mut rng);
        let pi = TabularPolicy::random(4, 3, &mut rng);
        let vt = exact_values(&m, &pi).unwrap();

        let n_rollouts = 100_000;
        let horizon = 200;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n_rollouts {
            let mut s = m.sample_initial(&mut rng);
            let mut ret = 0.0;
            let mut disc = 1.0;
            for _ in 0..horizon {
                let a = pi.sample(s, &mut rng);
                ret += disc * m.reward(s, a);
                disc *= gamma;
                s = m.sample_next(s, a, &mut rng);
            }
            let ret = (1.0 - gamma) * ret;
            sum += ret;
            sum_sq += ret * ret;
        }
        let mean = sum / n_rollouts as f64;
        let var = (sum_sq / n_rollouts as f64 - mean * mean).max(0.0);
        let se = (var / n_rollouts as f64).sqrt();
        assert!(
            (vt.eta - mean).abs() <= 3.0 * se,
            "eta {} vs MC {} (3 se = {})",
            vt.eta,
            mean,
            3.0 * se
        );
    }

    #[test]
    fn exact_values_agree_with_iterative_evaluation() {
        let mut rng = SeededRng::new(12);
        for _ in 0..10 {
            let m = TabularMdp::random(6, 4, 0.95, &mut rng);
            let pi = TabularPolicy::random(6, 4, &mut rng);
            let vt = exact_values(&m, &pi).unwrap();
            let v_iter = policy_evaluation_iterative(&m, &pi, 1e-12);
            for s in 0..6 {
                assert_abs_diff_eq!(vt.v[s], v_iter[s], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn absorbing_single_state_occupancy_is_initial_dist() {
        let m = single_state(0.3, 0.8);
        let pi = TabularPolicy::uniform(1, 1);
        let occ = occupancy(&m, &pi).unwrap();
        assert_abs_diff_eq!(occ.nu[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_state_cycle_occupancy_matches_closed_form() {
        // Deterministic cycle 0 -> 1 -> 0 with rho0 = (1, 0), gamma = 0.5:
        // nu(0) = (1-g)(1 + g^2 + ...) = 2/3, nu(1) = 1/3.
        let p = vec![0.0, 1.0, 1.0, 0.0];
        let m = TabularMdp::new(2, 1, p, vec![0.0, 0.0], 0.5, vec![1.0, 0.0], 1.0).unwrap();
        let pi = TabularPolicy::uniform(2, 1);
        let occ = occupancy(&m, &pi).unwrap();
        assert_abs_diff_eq!(occ.nu[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(occ.nu[1], 1.0 / 3.0, epsilon = 1e-12);

        // Power-iteration cross-check of the same fixed point.
        let mut nu = vec![0.0, 0.0];
        for _ in 0..200 {
            let next = vec![
                0.5 * 1.0 + 0.5 * nu[1],
                0.5 * 0.0 + 0.5 * nu[0],
            ];
            nu = next;
        }
        assert_abs_diff_eq!(occ.nu[0], nu[0], epsilon = 1e-10);
        assert_abs_diff_eq!(occ.nu[1], nu[1], epsilon = 1e-10);
    }

    #[test]
    fn occupancy_weighted_reward_equals_eta() {
        let mut rng = SeededRng::new(21);
        for _ in 0..50 {
            let m = TabularMdp::random(5, 3, 0.6 + 0.39 * rng.uniform(), &mut rng);
            let pi = TabularPolicy::random(5, 3, &mut rng);
            let vt = exact_values(&m, &pi).unwrap();
            let occ = occupancy(&m, &pi).unwrap();
            let eta_occ: f64 = (0..5)
                .flat_map(|s| (0..3).map(move |a| (s, a)))
                .map(|(s, a)| occ.rho_at(s, a, 3) * m.reward(s, a))
                .sum();
            assert_abs_diff_eq!(eta_occ, vt.eta, epsilon = 1e-9);
        }
    }

    #[test]
    fn nu_sums_to_one() {
        let mut rng = SeededRng::new(30);
        let m = TabularMdp::random(6, 2, 0.97, &mut rng);
        let pi = TabularPolicy::random(6, 2, &mut rng);
        let occ = occupancy(&m, &pi).unwrap();
        let total: f64 = occ.nu.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }
}
