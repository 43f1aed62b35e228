use ndarray::{Array1, Array2};
use vgdf_core::Transition;

/// Dense views of a continuous-control minibatch.
#[derive(Clone, Debug)]
pub struct TransitionBatch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    /// 1.0 where the transition terminated the episode.
    pub terminals: Array1<f64>,
}

impl TransitionBatch {
    pub fn from_transitions(batch: &[Transition]) -> Self {
        assert!(!batch.is_empty(), "cannot build an empty batch");
        let obs_dim = batch[0].state.dim();
        let act_dim = batch[0].action.dim();
        let n = batch.len();
        let mut states = Array2::zeros((n, obs_dim));
        let mut actions = Array2::zeros((n, act_dim));
        let mut rewards = Array1::zeros(n);
        let mut next_states = Array2::zeros((n, obs_dim));
        let mut terminals = Array1::zeros(n);
        for (i, t) in batch.iter().enumerate() {
            states.row_mut(i).assign(
                &Array1::from_iter(t.state.vector().iter().copied()),
            );
            actions
                .row_mut(i)
                .assign(&Array1::from_iter(t.action.vector().iter().copied()));
            rewards[i] = t.reward;
            next_states
                .row_mut(i)
                .assign(&Array1::from_iter(t.next_state.vector().iter().copied()));
            terminals[i] = f64::from(t.terminal);
        }
        Self {
            states,
            actions,
            rewards,
            next_states,
            terminals,
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// `[state | action]` matrix for critic inputs.
    pub fn state_action(&self) -> Array2<f64> {
        concat_columns(&self.states, &self.actions)
    }
}

pub fn concat_columns(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), a.ncols() + b.ncols()));
    out.slice_mut(ndarray::s![.., ..a.ncols()]).assign(a);
    out.slice_mut(ndarray::s![.., a.ncols()..]).assign(b);
    out
}
