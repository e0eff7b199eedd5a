//! Numerical verification of level-k central-extension structures on the
//! loop group of SU(2).
//!
//! The library builds, at desk scale, the objects behind the level-k
//! extensions of the loop group: the Lie algebra cocycle omega and its
//! periods, the cocycle kappa_k on the based path group, the Cech transition
//! data of twisted groups, the action groupoid of the filling-class group on
//! U(1) x P_e(Omega K), and the principal-2-bundle structure of its
//! section-wise replacement.  Every identity is turned into a residual that
//! a check suite evaluates against grid-tied tolerances.
//!
//! Modules follow the pipeline: `algebra` (SU(2)/su(2)/circle arithmetic),
//! `maps` (sampled mapping spaces), `forms` (omega, pullback integrals,
//! calibration), `cocycle` (group-cocycle algebra and kappa), `groupoid`
//! (the level-k action groupoid and the band), `bundle` (the structure
//! 2-group, atlas, and trivialisations), `verifier` (check suites, reports,
//! and the CLI surface).

pub mod algebra;
pub mod bundle;
pub mod cocycle;
pub mod degree;
pub mod error;
pub mod fixtures;
pub mod forms;
pub mod groupoid;
pub mod maps;
pub mod numeric;
pub mod serial;
pub mod verifier;

pub use error::{Error, Result};
