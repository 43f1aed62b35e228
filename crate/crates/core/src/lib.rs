//! Foundational types shared by the whole toolkit: transitions, replay
//! buffers, explicit tabular MDPs, environment traits, and seeded RNG
//! streams for fully deterministic runs.

pub mod buffer;
pub mod env;
pub mod error;
pub mod io;
pub mod rng;
pub mod tabular;
pub mod transition;

pub use buffer::ReplayBuffer;
pub use env::{ContinuousEnv, StepOutcome};
pub use error::{BufferError, CsvError, MdpError};
pub use rng::SeededRng;
pub use tabular::{MdpReport, MdpViolation, TabularMdp};
pub use transition::{Domain, Repr, Transition};
