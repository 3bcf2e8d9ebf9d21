use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An exact enumeration would visit more configurations than allowed.
    #[error("{what}: {required} configurations exceed the enumeration budget of {budget}")]
    Budget {
        what: &'static str,
        required: f64,
        budget: usize,
    },

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("invalid Markov tree spec: {0}")]
    Spec(String),

    #[error("invalid order: {0}")]
    Order(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Domain of a table does not contain the vertices an operation needs.
    #[error("domain mismatch: {0}")]
    Domain(String),

    /// All kernel weights vanished or became non-finite.
    #[error("degenerate kernel: normalizing constant is not finite")]
    Degenerate,

    /// A criterion that presumes attractiveness was handed a non-attractive model.
    #[error("model is not attractive at vertex {vertex}")]
    NotAttractive { vertex: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
