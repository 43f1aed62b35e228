//! Differentiable building blocks sized for this project: feed-forward
//! networks with hand-written backprop, an Adam optimizer, the
//! squashed-Gaussian policy, twin critics with slow-moving targets, and a
//! flat binary checkpoint format. No general autodiff; gradients cover
//! exactly the shapes the algorithms use and are finite-difference checked.

pub mod adam;
pub mod batch;
pub mod checkpoint;
pub mod critic;
pub mod net;
pub mod policy;

pub use adam::Adam;
pub use batch::TransitionBatch;
pub use checkpoint::Checkpoint;
pub use critic::{critic_targets, weighted_td_step, CriticPair, TdStepResult};
pub use net::{Activation, FeedForwardNet, ForwardCache, Linear, NetGrads};
pub use policy::{
    policy_update, PolicySample, PolicyUpdateStats, QObjective, StochasticPolicy, LOG_STD_MAX,
    LOG_STD_MIN,
};
