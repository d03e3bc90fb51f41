//! Even Clifford algebras of rational quadratic forms, their classification
//! as matrix algebras over quaternion algebras, and the Kuga-Satake weight
//! one Hodge structure attached to a weight two Hodge structure with
//! h^{2,0} = 1.

pub mod arith;
pub mod brauer;
pub mod clifford;
pub mod error;
pub mod hodge;
pub mod kugasatake;
pub mod linalg;
pub mod qform;
pub mod report;
pub mod scalar;
pub mod selftest;

pub use error::{Error, Result};
