use crate::error::MdpError;
use crate::rng::SeededRng;

pub const ROW_SUM_TOL: f64 = 1e-12;

/// Explicit finite MDP: transition tensor `P[s][a][s']`, reward matrix
/// `R[s][a]` bounded by `r_max`, discount, and initial distribution.
#[derive(Clone, Debug)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    /// Row-major `[s][a][s']`.
    transition: Vec<f64>,
    /// Row-major `[s][a]`.
    reward: Vec<f64>,
    discount: f64,
    initial_dist: Vec<f64>,
    r_max: f64,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        discount: f64,
        initial_dist: Vec<f64>,
        r_max: f64,
    ) -> Result<Self, MdpError> {
        if n_states == 0 || n_actions == 0 {
            return Err(MdpError::EmptySpace);
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(MdpError::Discount(discount));
        }
        let want = n_states * n_actions * n_states;
        if transition.len() != want {
            return Err(MdpError::TransitionShape {
                expected: want,
                got: transition.len(),
            });
        }
        if reward.len() != n_states * n_actions {
            return Err(MdpError::RewardShape {
                expected: n_states * n_actions,
                got: reward.len(),
            });
        }
        if initial_dist.len() != n_states {
            return Err(MdpError::InitialShape {
                expected: n_states,
                got: initial_dist.len(),
            });
        }
        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            discount,
            initial_dist,
            r_max,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    pub fn p(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + s2]
    }

    /// Transition row `P[s][a][·]`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    pub fn set_reward(&mut self, s: usize, a: usize, r: f64) {
        self.reward[s * self.n_actions + a] = r;
    }

    pub fn set_row(&mut self, s: usize, a: usize, row: &[f64]) {
        assert_eq!(row.len(), self.n_states);
        let base = (s * self.n_actions + a) * self.n_states;
        self.transition[base..base + self.n_states].copy_from_slice(row);
    }

    /// Checks every structural invariant and returns the full violation list.
    pub fn validate(&self) -> MdpReport {
        let mut violations = Vec::new();
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.row(s, a);
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    violations.push(MdpViolation::RowSum { s, a, sum });
                }
                for (s2, &p) in row.iter().enumerate() {
                    if p < 0.0 {
                        violations.push(MdpViolation::NegativeProbability { s, a, s2, p });
                    }
                }
                let r = self.reward(s, a);
                if r < 0.0 || r > self.r_max {
                    violations.push(MdpViolation::RewardOutOfRange { s, a, r });
                }
            }
        }
        let rho_sum: f64 = self.initial_dist.iter().sum();
        if (rho_sum - 1.0).abs() > 1e-9 {
            violations.push(MdpViolation::InitialDistSum { sum: rho_sum });
        }
        for (s, &p) in self.initial_dist.iter().enumerate() {
            if p < 0.0 {
                violations.push(MdpViolation::NegativeInitial { s, p });
            }
        }
        MdpReport { violations }
    }

    /// Samples a next state for `(s, a)`.
    pub fn sample_next(&self, s: usize, a: usize, rng: &mut SeededRng) -> usize {
        let row = self.row(s, a);
        let mut u = rng.uniform();
        for (s2, &p) in row.iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return s2;
            }
        }
        self.n_states - 1
    }

    pub fn sample_initial(&self, rng: &mut SeededRng) -> usize {
        let mut u = rng.uniform();
        for (s, &p) in self.initial_dist.iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return s;
            }
        }
        self.n_states - 1
    }

    /// Random MDP with dense (full-support) dynamics, rewards in
    /// `[0, r_max]`, and a random initial distribution.
    pub fn random(n_states: usize, n_actions: usize, discount: f64, rng: &mut SeededRng) -> Self {
        let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
        for _ in 0..n_states * n_actions {
            transition.extend(random_simplex(n_states, rng));
        }
        let reward = (0..n_states * n_actions).map(|_| rng.uniform()).collect();
        let initial_dist = random_simplex(n_states, rng);
        Self::new(
            n_states, n_actions, transition, reward, discount, initial_dist, 1.0,
        )
        .expect("random MDP construction is shape-correct")
    }

    /// Clone with a perturbed transition tensor; shares `S`, `A`, `r`, gamma,
    /// and the initial distribution, so the pair is a valid domain pair.
    pub fn perturb_dynamics(&self, strength: f64, rng: &mut SeededRng) -> Self {
        let mut out = self.clone();
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let mut row: Vec<f64> = self.row(s, a).to_vec();
                for p in row.iter_mut() {
                    *p = (*p + strength * rng.uniform()).max(1e-12);
                }
                let sum: f64 = row.iter().sum();
                for p in row.iter_mut() {
                    *p /= sum;
                }
                out.set_row(s, a, &row);
            }
        }
        out
    }
}

fn random_simplex(n: usize, rng: &mut SeededRng) -> Vec<f64> {
    // Exponential draws normalized to the simplex (flat Dirichlet).
    let mut v: Vec<f64> = (0..n).map(|_| -rng.uniform().max(1e-300).ln()).collect();
    let sum: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= sum;
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub enum MdpViolation {
    RowSum { s: usize, a: usize, sum: f64 },
    NegativeProbability { s: usize, a: usize, s2: usize, p: f64 },
    RewardOutOfRange { s: usize, a: usize, r: f64 },
    InitialDistSum { sum: f64 },
    NegativeInitial { s: usize, p: f64 },
}

impl std::fmt::Display for MdpViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MdpViolation::RowSum { s, a, sum } => {
                write!(f, "P[{s}][{a}][.] sums to {sum}, expected 1")
            }
            MdpViolation::NegativeProbability { s, a, s2, p } => {
                write!(f, "P[{s}][{a}][{s2}] = {p} is negative")
            }
            MdpViolation::RewardOutOfRange { s, a, r } => {
                write!(f, "R[{s}][{a}] = {r} outside [0, r_max]")
            }
            MdpViolation::InitialDistSum { sum } => {
                write!(f, "initial distribution sums to {sum}, expected 1")
            }
            MdpViolation::NegativeInitial { s, p } => {
                write!(f, "initial_dist[{s}] = {p} is negative")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct MdpReport {
    pub violations: Vec<MdpViolation>,
}

impl MdpReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_mdp(n: usize, gamma: f64) -> TabularMdp {
        let mut p = vec![0.0; n * n];
        for s in 0..n {
            p[s * n + s] = 1.0;
        }
        let mut rho = vec![0.0; n];
        rho[0] = 1.0;
        TabularMdp::new(n, 1, p, vec![1.0; n], gamma, rho, 1.0).unwrap()
    }

    #[test]
    fn identity_mdp_validates() {
        assert!(identity_mdp(3, 0.9).validate().is_ok());
    }

    #[test]
    fn bad_row_sum_is_reported_with_indices() {
        let mut m = identity_mdp(3, 0.9);
        m.set_row(1, 0, &[0.45, 0.45, 0.0]);
        let report = m.validate();
        assert!(!report.is_ok());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, MdpViolation::RowSum { s: 1, a: 0, .. })));
    }

    #[test]
    fn negative_reward_is_reported() {
        let mut m = identity_mdp(2, 0.9);
        m.set_reward(0, 0, -0.5);
        let report = m.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, MdpViolation::RewardOutOfRange { s: 0, a: 0, .. })));
    }

    #[test]
    fn random_mdps_are_valid() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let m = TabularMdp::random(5, 3, 0.9, &mut rng);
            assert!(m.validate().is_ok());
            let t = m.perturb_dynamics(0.3, &mut rng);
            assert!(t.validate().is_ok());
        }
    }
}
