//! Quaternionic operator toolkit: pseudo S-resolvents, S-spectra,
//! K-functionals and real interpolation norms, with numerical checks of the
//! norm inequalities that relate them on finite-dimensional models.

pub mod bounds;
pub mod error;
pub mod interpolation;
pub mod qlinalg;
pub mod quaternion;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use interpolation::{LogGrid, LpExponent};
pub use qlinalg::{ComplexAdjoint, QMatrix, QVector};
pub use quaternion::{ray_point, ImaginaryUnit, Quaternion, Sphere};
pub use report::VerificationReport;
pub use spectral::{graph_norm, sectorial_scan, OperatorModel, SectorialProfile};
