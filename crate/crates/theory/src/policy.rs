use vgdf_core::SeededRng;

use crate::error::TheoryError;

const ROW_TOL: f64 = 1e-12;

/// Stochastic tabular policy: `probs[s * n_actions + a] = pi(a | s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TabularPolicy {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self, TheoryError> {
        if probs.len() != n_states * n_actions {
            return Err(TheoryError::PolicyShape(format!(
                "expected {} entries, got {}",
                n_states * n_actions,
                probs.len()
            )));
        }
        for s in 0..n_states {
            let row = &probs[s * n_actions..(s + 1) * n_actions];
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL {
                return Err(TheoryError::PolicyShape(format!(
                    "row {s} sums to {sum}"
                )));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(TheoryError::PolicyShape(format!(
                    "row {s} has a negative entry"
                )));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// Deterministic policy selecting `actions[s]` in state `s`.
    pub fn deterministic(n_states: usize, n_actions: usize, actions: &[usize]) -> Self {
        assert_eq!(actions.len(), n_states);
        let mut probs = vec![0.0; n_states * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            probs[s * n_actions + a] = 1.0;
        }
        Self {
            n_states,
            n_actions,
            probs,
        }
    }

    /// Random full-support policy.
    pub fn random(n_states: usize, n_actions: usize, rng: &mut SeededRng) -> Self {
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for _ in 0..n_states {
            let mut row: Vec<f64> = (0..n_actions)
                .map(|_| -rng.uniform().max(1e-300).ln())
                .collect();
            let sum: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= sum;
            }
            probs.extend(row);
        }
        Self {
            n_states,
            n_actions,
            probs,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn sample(&self, s: usize, rng: &mut SeededRng) -> usize {
        let mut u = rng.uniform();
        for (a, &p) in self.row(s).iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return a;
            }
        }
        self.n_actions - 1
    }

    /// Total variation distance between the action distributions of two
    /// policies at state `s`.
    pub fn tv_distance_at(&self, other: &TabularPolicy, s: usize) -> f64 {
        0.5 * self
            .row(s)
            .iter()
            .zip(other.row(s))
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }
}
