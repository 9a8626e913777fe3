//! Exact Clebsch-Gordan series and scalar factors for the spin-flavor
//! reduction chains SU(8) > SU(4) x SU(2), SU(6) > SU(3) x SU(2),
//! SU(4) > SU(3) x U(1) and SU(3) > SU(2) x U(1).

pub mod exact_arith;
pub mod sparse_linalg;
pub mod irrep_catalog;
pub mod tensor_rep;
pub mod decomposer;
pub mod scalar_factors;
pub mod table_cli;
