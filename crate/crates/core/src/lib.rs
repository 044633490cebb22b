//! Exact invariants of quadratic forms and of quaternion algebras with
//! involution over ℚ, plus an executable check that products of four
//! quaternion algebras with involution are Pfister algebras with involution.

pub mod arith;
pub mod csa;
pub mod linalg;
pub mod qform;
pub mod quat;
pub mod shapiro4;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
