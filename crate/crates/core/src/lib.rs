pub mod condsym;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod liesys;
pub mod linalg;
pub mod multiindex;
pub mod par;
pub mod random;

pub use error::{Error, Result};
pub use multiindex::MultiIndex;
