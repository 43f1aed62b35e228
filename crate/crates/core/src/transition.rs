/// Which domain an experience came from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn tag(&self) -> &'static str {
        match self {
            Domain::Source => "src",
            Domain::Target => "tar",
        }
    }
}

/// A state or action value: a discrete index for tabular environments or a
/// fixed-length real vector for continuous ones. One representation keeps
/// the buffer logic shared across both experiment tracks.
#[derive(Clone, PartialEq, Debug)]
pub enum Repr {
    Index(usize),
    Vector(Vec<f64>),
}

impl Repr {
    pub fn dim(&self) -> usize {
        match self {
            Repr::Index(_) => 1,
            Repr::Vector(v) => v.len(),
        }
    }

    /// Shape descriptor used for buffer compatibility checks.
    pub fn shape(&self) -> ReprShape {
        match self {
            Repr::Index(_) => ReprShape::Index,
            Repr::Vector(v) => ReprShape::Vector(v.len()),
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Repr::Index(i) => Some(*i),
            Repr::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Repr::Index(_) => None,
            Repr::Vector(v) => Some(v),
        }
    }

    /// Index of a tabular value; panics on continuous data.
    pub fn index(&self) -> usize {
        self.as_index().expect("expected a discrete index")
    }

    /// Slice view of a continuous value; panics on tabular data.
    pub fn vector(&self) -> &[f64] {
        self.as_vector().expect("expected a real vector")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReprShape {
    Index,
    Vector(usize),
}

impl std::fmt::Display for ReprShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReprShape::Index => write!(f, "index"),
            ReprShape::Vector(d) => write!(f, "vector[{d}]"),
        }
    }
}

/// One environment step.
#[derive(Clone, PartialEq, Debug)]
pub struct Transition {
    pub state: Repr,
    pub action: Repr,
    pub reward: f64,
    pub next_state: Repr,
    pub terminal: bool,
    pub domain: Domain,
}

impl Transition {
    pub fn tabular(
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        terminal: bool,
        domain: Domain,
    ) -> Self {
        Self {
            state: Repr::Index(state),
            action: Repr::Index(action),
            reward,
            next_state: Repr::Index(next_state),
            terminal,
            domain,
        }
    }

    pub fn continuous(
        state: Vec<f64>,
        action: Vec<f64>,
        reward: f64,
        next_state: Vec<f64>,
        terminal: bool,
        domain: Domain,
    ) -> Self {
        Self {
            state: Repr::Vector(state),
            action: Repr::Vector(action),
            reward,
            next_state: Repr::Vector(next_state),
            terminal,
            domain,
        }
    }
}
