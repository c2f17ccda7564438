//! Closed-form reference frequencies used as independent ground truth.
//!
//! All values are reported as the frequency parameter `lambda`, the square
//! root of the non-dimensional frequency `w L^2 sqrt(rho A / EI)`. Classical
//! (Euler–Bernoulli) pinned–pinned values are `n pi`; clamped–clamped values
//! are the roots of `cos(l) cosh(l) = 1`.
//!
//! The pinned–pinned Timoshenko frequencies come from substituting
//! `v = V sin(k x)`, `phi = P cos(k x)` with `k = n pi / L` into
//!
//! ```text
//! rho A v''  = kGA (v'' + phi')
//! rho I phi'' = EI phi'' - kGA (v' + phi)
//! ```
//!
//! which leaves a quadratic in `w^2` per wavenumber. The smaller root is the
//! flexural branch and the larger one the thickness-shear branch.

use std::f64::consts::PI;

use thiserror::Error;

use crate::assembly::BoundaryCondition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no classical closed form for boundary condition {0}")]
    UnsupportedBoundary(BoundaryCondition),
    #[error("mode numbers start at 1")]
    ZeroMode,
    #[error("thickness ratio {0} outside (0, 0.5]")]
    BadRatio(f64),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// A classical frequency parameter together with its boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalRoot {
    pub bc: BoundaryCondition,
    pub mode: usize,
    pub lambda: f64,
}

/// `cos(l) - sech(l)`: zero exactly where `cos(l) cosh(l) = 1`, without
/// overflow for large `l`.
pub fn clamped_residual(lambda: f64) -> f64 {
    lambda.cos() - 1.0 / lambda.cosh()
}

fn clamped_root(mode: usize) -> f64 {
    // exactly one sign change of cos(l) - sech(l) on [n pi, (n + 1) pi]
    let (mut a, mut b) = (mode as f64 * PI, (mode as f64 + 1.0) * PI);
    let fa = clamped_residual(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (clamped_residual(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..3 {
        let sech = 1.0 / x.cosh();
        let df = -x.sin() + sech * x.tanh();
        let step = clamped_residual(x) / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Classical beam frequency parameter `lambda_n`.
pub fn clt_frequency(bc: BoundaryCondition, mode: usize) -> Result<f64> {
    if mode == 0 {
        return Err(OracleError::ZeroMode);
    }
    match bc {
        BoundaryCondition::PinnedPinned => Ok(mode as f64 * PI),
        BoundaryCondition::ClampedClamped => Ok(clamped_root(mode)),
        other => Err(OracleError::UnsupportedBoundary(other)),
    }
}

pub fn classical_root(bc: BoundaryCondition, mode: usize) -> Result<ClassicalRoot> {
    Ok(ClassicalRoot {
        bc,
        mode,
        lambda: clt_frequency(bc, mode)?,
    })
}

/// Unit beam (`E = rho = L = b = 1`) of thickness `h`.
struct UnitBeam {
    rho_a: f64,
    rho_i: f64,
    ei: f64,
    kga: f64,
}

impl UnitBeam {
    fn new(h_over_l: f64, nu: f64, kappa: f64) -> Result<Self> {
        if !(h_over_l > 0.0 && h_over_l <= 0.5) {
            return Err(OracleError::BadRatio(h_over_l));
        }
        let area = h_over_l;
        let inertia = h_over_l.powi(3) / 12.0;
        Ok(Self {
            rho_a: area,
            rho_i: inertia,
            ei: inertia,
            kga: kappa * area / (2.0 * (1.0 + nu)),
        })
    }

    /// Squared frequency to tabulated `lambda`.
    fn lambda(&self, omega_sq: f64) -> f64 {
        (omega_sq.sqrt() * (self.rho_a / self.ei).sqrt()).sqrt()
    }

    /// Both roots `(flexural, shear)` of the quadratic in `w^2` for
    /// wavenumber `k`.
    fn branches(&self, k: f64) -> (f64, f64) {
        let a11 = self.kga * k * k;
        let a22 = self.ei * k * k + self.kga;
        let qa = self.rho_a * self.rho_i;
        let qb = a11 * self.rho_i + a22 * self.rho_a;
        let qc = self.kga * self.ei * k.powi(4);
        let upper = (qb + (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa);
        (qc / (qa * upper), upper)
    }
}

/// Flexural-branch pinned–pinned Timoshenko frequency parameter for mode `n`.
pub fn timoshenko_pinned(h_over_l: f64, nu: f64, kappa: f64, mode: usize) -> Result<f64> {
    timoshenko_pinned_branches(h_over_l, nu, kappa, mode).map(|(b, _)| b)
}

/// `(flexural, thickness-shear)` frequency parameters for wavenumber `n pi`.
pub fn timoshenko_pinned_branches(
    h_over_l: f64,
    nu: f64,
    kappa: f64,
    mode: usize,
) -> Result<(f64, f64)> {
    if mode == 0 {
        return Err(OracleError::ZeroMode);
    }
    let beam = UnitBeam::new(h_over_l, nu, kappa)?;
    let (lo, hi) = beam.branches(mode as f64 * PI);
    Ok((beam.lambda(lo), beam.lambda(hi)))
}

/// The `count` lowest transverse pinned–pinned frequency parameters,
/// merging both branches and the uniform thickness-shear mode
/// (`v = 0`, `phi` constant).
pub fn timoshenko_pinned_spectrum(
    h_over_l: f64,
    nu: f64,
    kappa: f64,
    count: usize,
) -> Result<Vec<f64>> {
    let beam = UnitBeam::new(h_over_l, nu, kappa)?;
    let mut all = vec![beam.lambda(beam.kga / beam.rho_i)];
    for n in 1..=count {
        let (lo, hi) = beam.branches(n as f64 * PI);
        all.push(beam.lambda(lo));
        all.push(beam.lambda(hi));
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    Ok(all)
}

/// Axial (rod) frequency parameter of a beam with both ends axially fixed.
pub fn axial_fixed_fixed(h_over_l: f64, mode: usize) -> Result<f64> {
    if mode == 0 {
        return Err(OracleError::ZeroMode);
    }
    if !(h_over_l > 0.0 && h_over_l <= 0.5) {
        return Err(OracleError::BadRatio(h_over_l));
    }
    // w = n pi sqrt(E / rho) / L; w L^2 sqrt(rho A / EI) = n pi sqrt(12) / (h / L)
    Ok((mode as f64 * PI * 12f64.sqrt() / h_over_l).sqrt())
}
