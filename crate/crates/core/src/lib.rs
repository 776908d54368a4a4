//! Automatic Gaussian mixture modeling.
//!
//! Fits mixtures over a grid of initializations, covariance constraints and
//! component counts, retrying singular fits with a fixed ladder of diagonal
//! regularization, and keeps the model with the best information criterion.
//! [`hgmm`] applies the same search recursively to build a cluster dendrogram.

pub mod data;
pub mod error;
pub mod gmm;
pub mod hgmm;
pub mod init;
pub mod io;
pub mod metrics;
pub mod search;
pub mod seed;

pub use data::DataMatrix;
pub use error::{Error, Result};
