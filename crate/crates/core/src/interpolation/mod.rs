//! K-functional, `L^p_*` quadrature and real interpolation norms.

pub mod characterization;
pub mod checks;
pub mod couple;
pub mod kfunctional;
pub mod lpstar;
pub mod norms;

pub use characterization::{interp_norm_star, proof_decomposition, psi, trinomial_split, RayResolvents, StarNorm};
pub use checks::{intermediate_constants, k_swap_identity_check, operator_interpolation_check};
pub use couple::{Couple, CoupleNorm, NormTerm};
pub use kfunctional::{k_functional, KEstimate, KSolver, KSolverOptions};
pub use lpstar::{lp_star_norm, lp_star_quadrature_error, LogGrid, LpExponent, Tails};
pub use norms::{interp_norm, interp_norm_on, InterpNorm, KProfile};
