use thiserror::Error;

#[derive(Error, Debug)]
pub enum TheoryError {
    #[error("policy rows must be valid distributions: {0}")]
    PolicyShape(String),
    #[error("MDP failed validation: {0}")]
    InvalidMdp(String),
    #[error("domain pair mismatch: {0}")]
    DomainMismatch(String),
    #[error("linear solve residual {residual} exceeds tolerance {tol}")]
    SolverResidual { residual: f64, tol: f64 },
    #[error("offline dataset is empty")]
    EmptyDataset,
    #[error("offline dataset must contain tabular source-domain transitions")]
    InvalidDataset,
}
