//! Construction and verification of standard universal R-matrices for
//! generalized quantum groups, over exact rational functions in the formal
//! pairing parameters q_{ij}.

pub mod algebra;
pub mod deformation;
pub mod error;
pub mod exact;
pub mod freealg;
pub mod hopf;
pub mod linalg;
pub mod qdiff;
pub mod quotient;
pub mod report;
pub mod rmatrix;
pub mod scalars;
pub mod specfile;
pub mod yangbaxter;

pub use error::{Error, Result};
pub use scalars::Scalar;
