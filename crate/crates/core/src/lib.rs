//! Conjugation interpolation for commuting normal matrices.
//!
//! Decides and constructs conjugations `C` (antilinear, isometric,
//! involutive) with `C x_i = y_i` and `C N_k C = N_k*` or `C N C = -N*`,
//! solves pointwise unitary field equations over discrete measures, and
//! emits certificates that can be re-checked from the problem alone.

pub mod antilinear;
pub mod commands;
pub mod error;
pub mod format;
pub mod generate;
pub mod interpolation;
pub mod linalg;
pub mod mu_field;
pub mod spectral;

pub use antilinear::{AntilinearMap, Conjugation, ConjugationReport, RelationResiduals, ZhuLiOutcome};
pub use error::{Error, Result};
pub use interpolation::{Certificate, Feasibility, InterpolationProblem, Mode, PartialIsometryWitness, Violation};
pub use linalg::{CMatrix, CVector, Tolerances};
pub use mu_field::{DiscreteMeasure, FieldOutcome, FunctionTable, UField};
pub use num_complex::Complex64;
pub use spectral::{BorelSelector, JointSpectralDecomp, SkewDecision, SpectralDecomp};
