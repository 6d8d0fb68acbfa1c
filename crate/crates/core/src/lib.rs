pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod linker;
pub mod pipeline;
pub mod prompting;
mod transport;

pub use error::{Error, Result};
pub use transport::{RetryPolicy, API_KEY_ENV};
