//! Timoshenko beam element matrices built from NURBS basis data, global
//! assembly over the patch and boundary-condition elimination.
//!
//! Every control point carries three degrees of freedom ordered
//! `(u, v, phi)`: axial displacement, transverse displacement and
//! cross-section rotation. The global numbering is control-point major,
//! so DOF `3 * i + c` belongs to control point `i` and component `c`.
//!
//! Strains for the straight isotropic beam are
//!
//! ```text
//! axial     e  = u'
//! bending   k  = phi'
//! shear     g  = v' + phi
//! ```
//!
//! and the stiffness is `EA e e + EI k k + kappa G A g g` integrated over the
//! span. The consistent mass carries `rho A` on `u` and `v` and the rotary
//! inertia `rho I` on `phi`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::nurbs::{BasisEval, Curve, NurbsError};
use crate::quadrature::{QuadratureError, QuadratureRule};

pub const DOFS_PER_POINT: usize = 3;
pub const U: usize = 0;
pub const V: usize = 1;
pub const PHI: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("invalid section: {0}")]
    InvalidSection(String),
    #[error("knot span {0} is not an element (zero length)")]
    DegenerateSpan(usize),
    #[error("non-positive Jacobian {0}")]
    NonPositiveJacobian(f64),
    #[error("unknown boundary condition '{0}' (expected pp, cc, cf or ff)")]
    UnknownBoundaryCondition(String),
    #[error(transparent)]
    Nurbs(#[from] NurbsError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub type Result<T> = std::result::Result<T, AssemblyError>;

/// Isotropic rectangular cross-section and material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    /// Young's modulus.
    pub e: f64,
    /// Poisson's ratio.
    pub nu: f64,
    /// Density.
    pub rho: f64,
    /// Shear correction factor.
    pub kappa: f64,
    /// Breadth.
    pub b: f64,
    /// Thickness.
    pub h: f64,
    /// Span.
    pub length: f64,
}

impl Section {
    pub fn new(e: f64, nu: f64, rho: f64, kappa: f64, b: f64, h: f64, length: f64) -> Result<Self> {
        let s = Self {
            e,
            nu,
            rho,
            kappa,
            b,
            h,
            length,
        };
        let positive = [
            ("E", e),
            ("rho", rho),
            ("kappa", kappa),
            ("b", b),
            ("h", h),
            ("L", length),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(AssemblyError::InvalidSection(format!("{name} must be positive, got {v}")));
        }
        if !(nu > 0.0 && nu < 0.5) {
            return Err(AssemblyError::InvalidSection(format!("nu must lie in (0, 0.5), got {nu}")));
        }
        Ok(s)
    }

    /// Unit section used for the benchmark tables: `E = rho = L = b = 1`,
    /// `h = h_over_l`. Non-dimensional frequencies do not depend on the
    /// remaining dimensional choices.
    pub fn normalized(h_over_l: f64, nu: f64, kappa: f64) -> Result<Self> {
        Self::new(1.0, nu, 1.0, kappa, 1.0, h_over_l, 1.0)
    }

    pub fn area(&self) -> f64 {
        self.b * self.h
    }

    pub fn inertia(&self) -> f64 {
        self.b * self.h.powi(3) / 12.0
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn axial_rigidity(&self) -> f64 {
        self.e * self.area()
    }

    pub fn bending_rigidity(&self) -> f64 {
        self.e * self.inertia()
    }

    pub fn shear_rigidity(&self) -> f64 {
        self.kappa * self.shear_modulus() * self.area()
    }

    pub fn mass_per_length(&self) -> f64 {
        self.rho * self.area()
    }

    pub fn rotary_inertia(&self) -> f64 {
        self.rho * self.inertia()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndSupport {
    Free,
    Pinned,
    Clamped,
}

impl EndSupport {
    /// Constrained components at this end.
    pub fn constrained(self) -> &'static [usize] {
        match self {
            EndSupport::Free => &[],
            EndSupport::Pinned => &[U, V],
            EndSupport::Clamped => &[U, V, PHI],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    PinnedPinned,
    ClampedClamped,
    ClampedFree,
    FreeFree,
}

impl BoundaryCondition {
    pub fn ends(self) -> (EndSupport, EndSupport) {
        use EndSupport::*;
        match self {
            BoundaryCondition::PinnedPinned => (Pinned, Pinned),
            BoundaryCondition::ClampedClamped => (Clamped, Clamped),
            BoundaryCondition::ClampedFree => (Clamped, Free),
            BoundaryCondition::FreeFree => (Free, Free),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            BoundaryCondition::PinnedPinned => "pp",
            BoundaryCondition::ClampedClamped => "cc",
            BoundaryCondition::ClampedFree => "cf",
            BoundaryCondition::FreeFree => "ff",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for BoundaryCondition {
    type Err = AssemblyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pp" | "pinned-pinned" => Ok(Self::PinnedPinned),
            "cc" | "clamped-clamped" => Ok(Self::ClampedClamped),
            "cf" | "clamped-free" => Ok(Self::ClampedFree),
            "ff" | "free-free" => Ok(Self::FreeFree),
            _ => Err(AssemblyError::UnknownBoundaryCondition(s.to_string())),
        }
    }
}

/// Strain-displacement rows at one point, each of length `3 (p + 1)` in
/// element-local `(u, v, phi)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainDisplacement {
    pub membrane: Vec<f64>,
    pub bending: Vec<f64>,
    pub shear: Vec<f64>,
}

/// Builds the axial, bending and shear strain-displacement rows.
pub fn b_matrices(basis: &BasisEval, jacobian: f64) -> Result<StrainDisplacement> {
    if !(jacobian > 0.0) {
        return Err(AssemblyError::NonPositiveJacobian(jacobian));
    }
    let len = DOFS_PER_POINT * basis.values.len();
    let mut b = StrainDisplacement {
        membrane: vec![0.0; len],
        bending: vec![0.0; len],
        shear: vec![0.0; len],
    };
    for (k, (&n, &dn)) in basis.values.iter().zip(&basis.derivs).enumerate() {
        let dndx = dn / jacobian;
        let base = DOFS_PER_POINT * k;
        b.membrane[base + U] = dndx;
        b.bending[base + PHI] = dndx;
        b.shear[base + V] = dndx;
        b.shear[base + PHI] = n;
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub dof_indices: Vec<usize>,
}

fn element_bounds(curve: &Curve, span: usize) -> Result<(f64, f64)> {
    let knots = curve.knot_vector().knots();
    let p = curve.degree();
    if span < p || span + 1 >= knots.len() - p || knots[span] >= knots[span + 1] {
        return Err(AssemblyError::DegenerateSpan(span));
    }
    Ok((knots[span], knots[span + 1]))
}

/// Calls `f(basis, jacobian, weight)` at every quadrature point of the
/// element, where `weight` already includes `J` (integration in `dx`).
fn for_each_point(
    curve: &Curve,
    span: usize,
    rule: &QuadratureRule,
    mut f: impl FnMut(&BasisEval, f64, f64) -> Result<()>,
) -> Result<()> {
    let (a, b) = element_bounds(curve, span)?;
    for (xi, w) in rule.map_to_span(a, b)? {
        let basis = curve.eval_nurbs(xi)?;
        debug_assert_eq!(basis.span, span);
        let g = curve.map_with(&basis, xi)?;
        f(&basis, g.jacobian, w * g.jacobian)?;
    }
    Ok(())
}

fn add_outer(mat: &mut DMatrix<f64>, row: &[f64], scale: f64) {
    for (i, &ri) in row.iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        let s = scale * ri;
        for (j, &rj) in row.iter().enumerate() {
            mat[(i, j)] += s * rj;
        }
    }
}

/// Element stiffness `sum_g (EA Bm'Bm + EI Bf'Bf + kGA Bc'Bc) J w_g`.
pub fn element_stiffness(
    section: &Section,
    curve: &Curve,
    span: usize,
    rule: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    let size = DOFS_PER_POINT * (curve.degree() + 1);
    let mut k = DMatrix::zeros(size, size);
    let (ea, ei, kga) = (
        section.axial_rigidity(),
        section.bending_rigidity(),
        section.shear_rigidity(),
    );
    for_each_point(curve, span, rule, |basis, jac, w| {
        let b = b_matrices(basis, jac)?;
        add_outer(&mut k, &b.membrane, ea * w);
        add_outer(&mut k, &b.bending, ei * w);
        add_outer(&mut k, &b.shear, kga * w);
        Ok(())
    })?;
    Ok(k)
}

/// Consistent element mass `sum_g N' diag(rho A, rho A, rho I) N J w_g`.
pub fn element_mass(
    section: &Section,
    curve: &Curve,
    span: usize,
    rule: &QuadratureRule,
) -> Result<DMatrix<f64>> {
    let nb = curve.degree() + 1;
    let size = DOFS_PER_POINT * nb;
    let mut m = DMatrix::zeros(size, size);
    let density = [section.mass_per_length(), section.mass_per_length(), section.rotary_inertia()];
    for_each_point(curve, span, rule, |basis, _, w| {
        for a in 0..nb {
            for b in 0..nb {
                let nn = basis.values[a] * basis.values[b] * w;
                for (c, rho) in density.iter().enumerate() {
                    m[(DOFS_PER_POINT * a + c, DOFS_PER_POINT * b + c)] += rho * nn;
                }
            }
        }
        Ok(())
    })?;
    Ok(m)
}

/// Stiffness, mass and global DOF indices of one element (knot span).
pub fn element_matrices(
    section: &Section,
    curve: &Curve,
    span: usize,
    rule: &QuadratureRule,
) -> Result<ElementMatrices> {
    let first = span - curve.degree();
    let dof_indices = (first..=span)
        .flat_map(|cp| (0..DOFS_PER_POINT).map(move |c| DOFS_PER_POINT * cp + c))
        .collect();
    Ok(ElementMatrices {
        k: element_stiffness(section, curve, span, rule)?,
        m: element_mass(section, curve, span, rule)?,
        dof_indices,
    })
}

/// Assembled, unconstrained stiffness and mass over the whole patch.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub num_control_points: usize,
    /// Physical control abscissae, used to build rigid-body motions.
    pub control_x: Vec<f64>,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        DOFS_PER_POINT * self.num_control_points
    }

    pub fn dof(control_point: usize, component: usize) -> usize {
        DOFS_PER_POINT * control_point + component
    }

    /// The three rigid-body motions in full numbering: axial translation,
    /// transverse translation and rotation about `x = 0` (`v = -x`,
    /// `phi = 1`, so `v' + phi = 0`). Linear fields are reproduced exactly
    /// by control values at the control abscissae.
    pub fn rigid_body_modes(&self) -> [DVector<f64>; 3] {
        let n = self.num_dofs();
        let mut axial = DVector::zeros(n);
        let mut transverse = DVector::zeros(n);
        let mut rotation = DVector::zeros(n);
        for (i, &x) in self.control_x.iter().enumerate() {
            axial[Self::dof(i, U)] = 1.0;
            transverse[Self::dof(i, V)] = 1.0;
            rotation[Self::dof(i, V)] = -x;
            rotation[Self::dof(i, PHI)] = 1.0;
        }
        [axial, transverse, rotation]
    }

    /// Constrained DOFs for `bc`, ascending.
    pub fn constrained_dofs(&self, bc: BoundaryCondition) -> Vec<usize> {
        let (left, right) = bc.ends();
        let last = self.num_control_points - 1;
        let mut dofs: Vec<usize> = left
            .constrained()
            .iter()
            .map(|&c| Self::dof(0, c))
            .chain(right.constrained().iter().map(|&c| Self::dof(last, c)))
            .collect();
        dofs.sort_unstable();
        dofs.dedup();
        dofs
    }

    /// Deletes constrained rows and columns. Open knot vectors make the end
    /// control points interpolatory, so their DOFs are true end values.
    pub fn apply_bc(&self, bc: BoundaryCondition) -> ConstrainedSystem {
        let constrained = self.constrained_dofs(bc);
        let free: Vec<usize> = (0..self.num_dofs())
            .filter(|d| constrained.binary_search(d).is_err())
            .collect();
        let nf = free.len();
        let k = DMatrix::from_fn(nf, nf, |i, j| self.k[(free[i], free[j])]);
        let m = DMatrix::from_fn(nf, nf, |i, j| self.m[(free[i], free[j])]);
        let rigid = admissible_rigid_modes(&self.rigid_body_modes(), &constrained);
        ConstrainedSystem {
            k,
            m,
            free,
            constrained,
            num_dofs: self.num_dofs(),
            bc,
            rigid,
        }
    }
}

/// Reduced system after boundary-condition elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSystem {
    pub k: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Retained global DOFs, ascending; row `i` of the reduced matrices is
    /// global DOF `free[i]`.
    pub free: Vec<usize>,
    pub constrained: Vec<usize>,
    pub num_dofs: usize,
    pub bc: BoundaryCondition,
    /// Rigid-body motions compatible with the constraints, full numbering.
    pub rigid: Vec<DVector<f64>>,
}

/// Combinations of the rigid-body motions that vanish on every constrained
/// DOF (null space of the constrained rows).
fn admissible_rigid_modes(modes: &[DVector<f64>; 3], constrained: &[usize]) -> Vec<DVector<f64>> {
    let rows = DMatrix::from_fn(constrained.len(), 3, |i, j| modes[j][constrained[i]]);
    let gram = rows.transpose() * &rows;
    let eig = gram.symmetric_eigen();
    let scale = modes.iter().map(|m| m.amax()).fold(1.0, f64::max).powi(2);
    (0..3)
        .filter(|&c| eig.eigenvalues[c].abs() <= 1e-12 * scale)
        .map(|c| {
            let w = eig.eigenvectors.column(c);
            &modes[0] * w[0] + &modes[1] * w[1] + &modes[2] * w[2]
        })
        .collect()
}

impl ConstrainedSystem {
    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Zero-fills constrained DOFs to return a full-numbering vector.
    pub fn expand(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.num_dofs);
        for (i, &d) in self.free.iter().enumerate() {
            full[d] = reduced[i];
        }
        full
    }
}

/// Scatter-adds every element into the global matrices.
pub fn assemble(section: &Section, curve: &Curve, rule: &QuadratureRule) -> Result<GlobalSystem> {
    let ncp = curve.num_control_points();
    let n = DOFS_PER_POINT * ncp;
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for span in curve.knot_vector().element_spans() {
        let em = element_matrices(section, curve, span, rule)?;
        for (a, &ga) in em.dof_indices.iter().enumerate() {
            for (b, &gb) in em.dof_indices.iter().enumerate() {
                k[(ga, gb)] += em.k[(a, b)];
                m[(ga, gb)] += em.m[(a, b)];
            }
        }
    }
    Ok(GlobalSystem {
        k,
        m,
        num_control_points: ncp,
        control_x: curve.control_x().to_vec(),
    })
}
