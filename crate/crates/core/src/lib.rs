//! Isogeometric free-vibration analysis of straight Timoshenko beams.
//!
//! The beam axis is a NURBS curve; the axial displacement, transverse
//! displacement and cross-section rotation are interpolated with the same
//! basis. Refinement, element integration, assembly and the dense
//! generalized eigensolution are all exposed, together with closed-form
//! reference frequencies and a driver that reproduces the benchmark tables.

// `!(x > 0.0)` is used deliberately so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod csv;
pub mod eigen;
pub mod nurbs;
pub mod oracle;
pub mod quadrature;
pub mod reference;

mod error;

pub use assembly::{BoundaryCondition, GlobalSystem, Section};
pub use config::{AnalysisConfig, Refinement};
pub use eigen::{ModeKind, Spectrum};
pub use error::Error;
pub use nurbs::{BasisEval, Curve, KnotVector};
pub use quadrature::QuadratureRule;
