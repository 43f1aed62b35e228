use std::io::Write;
use std::path::Path;

use vgdf_core::{Domain, SeededRng, TabularMdp, Transition};

use crate::bounds::{check_dynamics_bound, check_offline_bound, check_value_bound, BehaviorSpec};
use crate::error::TheoryError;
use crate::policy::TabularPolicy;
use crate::telescoping::{check_g_bound, check_telescoping, TelescopingConstant};
use crate::EQUALITY_TOL;

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub trials: usize,
    pub max_states: usize,
    pub max_actions: usize,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            max_states: 6,
            max_actions: 4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditRow {
    pub trial: usize,
    pub bound_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
}

fn random_instance(
    cfg: &AuditConfig,
    rng: &mut SeededRng,
) -> (TabularMdp, TabularMdp, TabularPolicy) {
    let n_states = 2 + rng.index(cfg.max_states - 1);
    let n_actions = 2 + rng.index(cfg.max_actions.saturating_sub(1).max(1));
    let gamma = 0.5 + 0.49 * rng.uniform();
    let src = TabularMdp::random(n_states, n_actions, gamma, rng);
    // Alternate mild perturbations with fully independent target dynamics.
    let tar = if rng.uniform() < 0.25 {
        let mut tar = src.clone();
        let fresh = TabularMdp::random(n_states, n_actions, gamma, rng);
        for s in 0..n_states {
            for a in 0..n_actions {
                tar.set_row(s, a, fresh.row(s, a));
            }
        }
        tar
    } else {
        src.perturb_dynamics(0.1 + 2.0 * rng.uniform(), rng)
    };
    let pi = TabularPolicy::random(n_states, n_actions, rng);
    (src, tar, pi)
}

fn rollout_dataset(
    m: &TabularMdp,
    pi: &TabularPolicy,
    steps: usize,
    rng: &mut SeededRng,
) -> Vec<Transition> {
    let mut out = Vec::with_capacity(steps);
    let mut s = m.sample_initial(rng);
    for t in 0..steps {
        let a = pi.sample(s, rng);
        let s2 = m.sample_next(s, a, rng);
        out.push(Transition::tabular(
            s,
            a,
            m.reward(s, a),
            s2,
            false,
            Domain::Source,
        ));
        // Occasional resets keep the initial distribution represented.
        s = if t % 40 == 39 {
            m.sample_initial(rng)
        } else {
            s2
        };
    }
    out
}

/// Randomized audit of every theorem the oracle verifies. Each trial draws
/// an MDP pair, a policy, and a behavior policy (with a dataset-driven
/// variant every third trial) and appends one row per check.
pub fn run_bound_audit(cfg: &AuditConfig) -> Result<Vec<AuditRow>, TheoryError> {
    let mut rng = SeededRng::new(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.trials * 5);
    for trial in 0..cfg.trials {
        let (src, tar, pi) = random_instance(cfg, &mut rng);
        let pi_d = TabularPolicy::random(src.n_states(), src.n_actions(), &mut rng);

        let d = check_dynamics_bound(&src, &tar, &pi)?;
        rows.push(AuditRow {
            trial,
            bound_name: "thm_dynamics".into(),
            lhs: d.lhs,
            rhs: d.rhs,
            slack: d.slack,
            satisfied: d.satisfied,
        });

        let v = check_value_bound(&src, &tar, &pi)?;
        rows.push(AuditRow {
            trial,
            bound_name: "thm_value".into(),
            lhs: v.lhs,
            rhs: v.rhs,
            slack: v.slack,
            satisfied: v.satisfied,
        });

        let offline = if trial % 3 == 2 {
            let dataset = rollout_dataset(&src, &pi_d, 400, &mut rng);
            check_offline_bound(&src, &tar, BehaviorSpec::Dataset(&dataset), &pi)?
        } else {
            check_offline_bound(&src, &tar, BehaviorSpec::Exact(&pi_d), &pi)?
        };
        rows.push(AuditRow {
            trial,
            bound_name: "thm_offline".into(),
            lhs: offline.lhs,
            rhs: offline.rhs,
            slack: offline.slack,
            satisfied: offline.satisfied,
        });

        // Telescoping equalities: the same-policy lemma must close with the
        // proof constant; the two-policy extension with the initial-state
        // correction term included.
        let tele_same = check_telescoping(&src, &tar, &pi, &pi)?;
        rows.push(AuditRow {
            trial,
            bound_name: "lemma_telescoping_same_policy".into(),
            lhs: tele_same.delta,
            rhs: tele_same.delta - tele_same.residual_proof,
            slack: -tele_same.residual_proof,
            satisfied: tele_same.constant == TelescopingConstant::Proof,
        });

        let tele_two = check_telescoping(&src, &tar, &pi_d, &pi)?;
        rows.push(AuditRow {
            trial,
            bound_name: "lemma_telescoping_two_policy".into(),
            lhs: tele_two.delta,
            rhs: tele_two.delta - tele_two.residual_corrected,
            slack: -tele_two.residual_corrected,
            satisfied: tele_two.residual_corrected <= EQUALITY_TOL,
        });

        let g = check_g_bound(&src, &tar, &pi_d, &pi)?;
        rows.push(AuditRow {
            trial,
            bound_name: "lemma_g_bound".into(),
            lhs: g.min_margin,
            rhs: 0.0,
            slack: g.min_margin,
            satisfied: g.satisfied,
        });
    }
    Ok(rows)
}

pub fn write_audit_csv(path: &Path, rows: &[AuditRow]) -> Result<(), std::io::Error> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "trial,bound_name,lhs,rhs,slack,satisfied")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.trial, r.bound_name, r.lhs, r.rhs, r.slack, r.satisfied
        )?;
    }
    Ok(())
}
