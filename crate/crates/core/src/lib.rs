pub mod error;
pub mod geometry;
pub mod immersion;
pub mod jet;
pub mod jetmat;
pub mod meron;
pub mod model;
pub mod poly;
pub mod quadrature;
pub mod verify;

pub use error::{CoreError, Result};
pub use jet::{BiJet, JetOp, Wirtinger};
pub use jetmat::{JetMatrix, JetVector};
pub use model::{Chirality, HolomorphicVectorSpec, Solution};
pub use num_complex::Complex64;
pub use poly::{Poly, RationalFunction};
