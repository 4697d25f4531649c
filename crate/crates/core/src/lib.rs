pub mod apps;
pub mod error;
pub mod extract;
pub mod instance;
pub mod pipeline;
pub mod poly;
pub mod qsdp;
pub mod quaternion;
pub mod realize;
pub mod relax;
pub mod sdp;
pub mod words;

pub use error::{Error, Result};
pub use poly::{RealPoly, SymPoly};
pub use quaternion::{HermitianQMatrix, QMatrix, Quaternion};
pub use words::{BasisKind, Letter, Word};
