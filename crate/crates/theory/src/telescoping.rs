use vgdf_core::TabularMdp;

use crate::bounds::check_domain_pair;
use crate::error::TheoryError;
use crate::policy::TabularPolicy;
use crate::values::{exact_values, occupancy};
use crate::EQUALITY_TOL;

/// Which candidate constant turns the telescoping identity into an equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TelescopingConstant {
    /// `1 / (1 - gamma)` as stated for the two-policy lemma.
    Stated,
    /// `gamma / (1 - gamma)` as the proof derives.
    Proof,
    /// Neither constant alone closes the gap (two-policy case with an
    /// initial-state policy mismatch).
    Neither,
}

/// Both sides of the telescoping decomposition, evaluated exactly.
///
/// `delta` is the unnormalized return gap `J_{M1}(pi1) - J_{M2}(pi2)` and
/// `expectation` is `E_{rho^{pi1}_{M1}}[G]` under the normalized occupancy.
/// The decomposition closes exactly as
/// `delta = gamma/(1-gamma) * expectation + boundary_term`, where the
/// boundary term charges the policy mismatch at initial states; it vanishes
/// when `pi1 = pi2`, collapsing to the single-policy lemma.
#[derive(Clone, Debug)]
pub struct TelescopingReport {
    pub delta: f64,
    pub expectation: f64,
    pub boundary_term: f64,
    pub residual_stated: f64,
    pub residual_proof: f64,
    pub residual_corrected: f64,
    pub constant: TelescopingConstant,
    pub same_policy: bool,
}

fn policies_equal(a: &TabularPolicy, b: &TabularPolicy) -> bool {
    (0..a.n_states()).all(|s| {
        a.row(s)
            .iter()
            .zip(b.row(s))
            .all(|(p, q)| (p - q).abs() <= 1e-15)
    })
}

/// Per-(s,a) value gap between executing `(P1, pi1)` and `(P2, pi2)` for one
/// step, both continued with `Q^{pi2}_{M2}`.
fn g_term(
    m1: &TabularMdp,
    m2: &TabularMdp,
    pi1: &TabularPolicy,
    pi2: &TabularPolicy,
    q2: &[f64],
    s: usize,
    a: usize,
) -> f64 {
    let n_actions = m1.n_actions();
    let lead: f64 = m1
        .row(s, a)
        .iter()
        .enumerate()
        .map(|(s2, p)| {
            p * (0..n_actions)
                .map(|a2| pi1.prob(s2, a2) * q2[s2 * n_actions + a2])
                .sum::<f64>()
        })
        .sum();
    let follow: f64 = m2
        .row(s, a)
        .iter()
        .enumerate()
        .map(|(s2, p)| {
            p * (0..n_actions)
                .map(|a2| pi2.prob(s2, a2) * q2[s2 * n_actions + a2])
                .sum::<f64>()
        })
        .sum();
    lead - follow
}

/// Evaluates the telescoping identity exactly and determines empirically
/// which constant (if either) closes it without correction.
pub fn check_telescoping(
    m1: &TabularMdp,
    m2: &TabularMdp,
    pi1: &TabularPolicy,
    pi2: &TabularPolicy,
) -> Result<TelescopingReport, TheoryError> {
    check_domain_pair(m1, m2)?;
    let gamma = m1.discount();
    let n_actions = m1.n_actions();

    let v1 = exact_values(m1, pi1)?;
    let v2 = exact_values(m2, pi2)?;
    let delta = v1.expected_return - v2.expected_return;

    let occ1 = occupancy(m1, pi1)?;
    let mut expectation = 0.0;
    for s in 0..m1.n_states() {
        for a in 0..n_actions {
            let rho = occ1.rho_at(s, a, n_actions);
            if rho != 0.0 {
                expectation += rho * g_term(m1, m2, pi1, pi2, &v2.q, s, a);
            }
        }
    }

    // Initial-state correction: E_{rho0}[ <pi1 - pi2, Q^{pi2}_{M2}(s, .)> ].
    let mut boundary_term = 0.0;
    for (s, &rho0) in m1.initial_dist().iter().enumerate() {
        if rho0 != 0.0 {
            let gap: f64 = (0..n_actions)
                .map(|a| (pi1.prob(s, a) - pi2.prob(s, a)) * v2.q[s * n_actions + a])
                .sum();
            boundary_term += rho0 * gap;
        }
    }

    let stated = 1.0 / (1.0 - gamma);
    let proof = gamma / (1.0 - gamma);
    let residual_stated = (delta - stated * expectation).abs();
    let residual_proof = (delta - proof * expectation).abs();
    let residual_corrected = (delta - proof * expectation - boundary_term).abs();

    let constant = if residual_proof <= EQUALITY_TOL {
        TelescopingConstant::Proof
    } else if residual_stated <= EQUALITY_TOL {
        TelescopingConstant::Stated
    } else {
        TelescopingConstant::Neither
    };

    Ok(TelescopingReport {
        delta,
        expectation,
        boundary_term,
        residual_stated,
        residual_proof,
        residual_corrected,
        constant,
        same_policy: policies_equal(pi1, pi2),
    })
}

/// Pointwise bound on the telescoping term:
/// `G(s,a) <= (2 r_max / (1-gamma)) E_{P1}[D_TV(pi1 || pi2)] + |value part|`.
#[derive(Clone, Debug)]
pub struct GBoundReport {
    /// Minimum of `bound - G` over all state-action pairs.
    pub min_margin: f64,
    pub satisfied: bool,
}

pub fn check_g_bound(
    m1: &TabularMdp,
    m2: &TabularMdp,
    pi1: &TabularPolicy,
    pi2: &TabularPolicy,
) -> Result<GBoundReport, TheoryError> {
    check_domain_pair(m1, m2)?;
    let gamma = m1.discount();
    let n_actions = m1.n_actions();
    let v2 = exact_values(m2, pi2)?;

    let mut min_margin = f64::INFINITY;
    for s in 0..m1.n_states() {
        for a in 0..n_actions {
            let g = g_term(m1, m2, pi1, pi2, &v2.q, s, a);

            let policy_part: f64 = m1
                .row(s, a)
                .iter()
                .enumerate()
                .map(|(s2, p)| p * pi1.tv_distance_at(pi2, s2))
                .sum();
            let value_part: f64 = m1
                .row(s, a)
                .iter()
                .zip(m2.row(s, a))
                .zip(&v2.v)
                .map(|((p1, p2), v)| (p1 - p2) * v)
                .sum();
            let bound = 2.0 * m1.r_max() / (1.0 - gamma) * policy_part + value_part.abs();
            min_margin = min_margin.min(bound - g);
        }
    }
    Ok(GBoundReport {
        min_margin,
        satisfied: min_margin >= -crate::BOUND_TOL,
    })
}
