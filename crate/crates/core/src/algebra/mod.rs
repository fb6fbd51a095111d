//! Linear-algebra protocols: matrix-vector products with a space tradeoff,
//! the LP on top of them, eigenpairs, effective resistance, and diameter via
//! matrix powers.

pub mod diameter;
pub mod eigen;
pub mod exact;
pub mod lde;
pub mod lp_tradeoff;
pub mod matvec;
pub mod resistance;
