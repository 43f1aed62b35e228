use std::collections::VecDeque;

use crate::error::BufferError;
use crate::rng::SeededRng;
use crate::transition::{ReprShape, Transition};

pub const DEFAULT_CAPACITY: usize = 1_000_000;

/// FIFO replay buffer with uniform sampling (with replacement).
///
/// The first pushed transition fixes the state/action shapes; every later
/// push is checked against them.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: VecDeque<Transition>,
    shape: Option<(ReprShape, ReprShape)>,
}

impl Default for ReplayBuffer {
    fn default() -> Self {
        Self::new(DEFAULT_CAPACITY)
    }
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            capacity,
            storage: VecDeque::new(),
            shape: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends a transition, evicting the oldest entry once full.
    pub fn push(&mut self, t: Transition) -> Result<(), BufferError> {
        let state = t.state.shape();
        let next = t.next_state.shape();
        if state != next {
            return Err(BufferError::StatePairMismatch {
                state,
                next_state: next,
            });
        }
        let action = t.action.shape();
        match self.shape {
            None => self.shape = Some((state, action)),
            Some((s, a)) => {
                if s != state {
                    return Err(BufferError::ShapeMismatch {
                        field: "state",
                        expected: s,
                        got: state,
                    });
                }
                if a != action {
                    return Err(BufferError::ShapeMismatch {
                        field: "action",
                        expected: a,
                        got: action,
                    });
                }
            }
        }
        if self.storage.len() == self.capacity {
            self.storage.pop_front();
        }
        self.storage.push_back(t);
        Ok(())
    }

    /// Uniform sample of `batch` transitions with replacement.
    pub fn sample(&self, batch: usize, rng: &mut SeededRng) -> Result<Vec<Transition>, BufferError> {
        if batch == 0 {
            return Err(BufferError::ZeroBatch);
        }
        if self.storage.is_empty() {
            return Err(BufferError::Empty);
        }
        Ok((0..batch)
            .map(|_| self.storage[rng.index(self.storage.len())].clone())
            .collect())
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.storage.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.storage.iter()
    }
}
