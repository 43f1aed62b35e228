use crate::rng::SeededRng;

/// Result of one environment step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// True only for genuine termination (e.g. a goal state). Horizon
    /// truncation is handled by the training loop and still bootstraps.
    pub terminal: bool,
}

/// Continuous-control environment with actions in `[-1, 1]^action_dim` and
/// rewards in `[0, r_max]`.
pub trait ContinuousEnv {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn horizon(&self) -> usize;
    fn r_max(&self) -> f64;
    fn reset(&mut self, rng: &mut SeededRng) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> StepOutcome;
}
