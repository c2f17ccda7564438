//! Dense generalized symmetric-definite eigenproblem `K d = w^2 M d`,
//! frequency non-dimensionalization and mode classification.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};
use thiserror::Error;

use crate::assembly::{ConstrainedSystem, GlobalSystem, Section, DOFS_PER_POINT, PHI, U, V};
use crate::nurbs::{Curve, NurbsError};

/// Off-diagonal convergence tolerance handed to the symmetric QR iteration.
const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 100_000;
/// Negative squared frequencies within this fraction of the spectral radius
/// are round-off and clamp to zero.
const NEGATIVE_SLACK: f64 = 1e-8;
/// Modal-mass fraction required to call a mode axial or bending.
const DOMINANT_FRACTION: f64 = 0.99;
/// A mode is also rigid when its non-dimensional frequency is below this
/// fraction of the first elastic one.
const RIGID_FRACTION: f64 = 1e-6;
/// Fraction of a vector's M-norm that must survive orthogonalization
/// against the already polished modes.
const ORTHO_SURVIVAL: f64 = 1e-6;
/// Squared frequencies below this fraction of the spectral radius are
/// numerically zero.
const ZERO_FRACTION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix dimensions differ: K is {0}x{0}, M is {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("mass matrix is not positive definite")]
    IndefiniteMass,
    #[error("symmetric eigensolver did not converge")]
    NoConvergence,
    #[error("negative squared frequency {0} beyond round-off")]
    NegativeEigenvalue(f64),
    #[error("mode {index} is mixed (axial fraction {axial:.4}); expected decoupled axial/transverse modes")]
    MixedMode { index: usize, axial: f64 },
    #[error("mode vector has {got} entries, expected {expected}")]
    ModeLength { got: usize, expected: usize },
    #[error(transparent)]
    Nurbs(#[from] NurbsError),
}

pub type Result<T> = std::result::Result<T, EigenError>;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Squared circular frequency, clamped at zero.
    pub omega_sq: f64,
    /// M-orthonormal eigenvector.
    pub vector: DVector<f64>,
}

/// Standard-form reduction of a pencil: the symmetric eigendecomposition of
/// `C^-1 K C^-T` with `M = C C'`, after symmetric diagonal scaling to a unit
/// mass diagonal.
struct Reduction {
    scale: DVector<f64>,
    l: DMatrix<f64>,
    eig: SymmetricEigen<f64, Dyn>,
    /// Eigenvalue indices in ascending order.
    order: Vec<usize>,
    radius: f64,
}

impl Reduction {
    fn new(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n || m.nrows() != m.ncols() || m.nrows() != n {
            return Err(EigenError::DimensionMismatch(n, m.nrows()));
        }
        if m.diagonal().iter().any(|d| !(*d > 0.0)) {
            return Err(EigenError::IndefiniteMass);
        }
        let scale = m.diagonal().map(|d| 1.0 / d.sqrt());
        let ks = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * scale[i] * scale[j]);
        let ms = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * scale[i] * scale[j]);
        let l = ms.cholesky().ok_or(EigenError::IndefiniteMass)?.unpack();
        let y = l
            .solve_lower_triangular(&ks)
            .ok_or(EigenError::IndefiniteMass)?;
        let mut a = l
            .solve_lower_triangular(&y.transpose())
            .ok_or(EigenError::IndefiniteMass)?;
        a = (&a + a.transpose()) * 0.5;
        let eig = a
            .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
            .ok_or(EigenError::NoConvergence)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let radius = eig.eigenvalues.amax().max(1.0);
        Ok(Self {
            scale,
            l,
            eig,
            order,
            radius,
        })
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    /// Ascending squared frequencies, round-off negatives clamped to zero.
    fn omega_sq(&self) -> Result<Vec<f64>> {
        self.order
            .iter()
            .map(|&i| clamp_negative(self.eig.eigenvalues[i], self.radius))
            .collect()
    }

    /// M-orthonormal eigenvector of the `rank`-th smallest eigenvalue.
    fn vector(&self, rank: usize) -> Result<DVector<f64>> {
        let col = self.eig.eigenvectors.column(self.order[rank]).into_owned();
        Ok(self
            .l
            .transpose()
            .solve_upper_triangular(&col)
            .ok_or(EigenError::IndefiniteMass)?
            .component_mul(&self.scale))
    }
}

fn clamp_negative(w2: f64, radius: f64) -> Result<f64> {
    if w2 >= 0.0 {
        Ok(w2)
    } else if w2 >= -NEGATIVE_SLACK * radius {
        Ok(0.0)
    } else {
        Err(EigenError::NegativeEigenvalue(w2))
    }
}

/// Polishes approximate low eigenpairs: one step of inverse iteration
/// shifted to each current estimate, then a Rayleigh–Ritz projection onto the
/// improved vectors, which restores M-orthonormality inside clusters.
///
/// The standard-form reduction only resolves a low eigenvalue to about
/// `eps * w_max^2` absolutely; for thin beams `w_max^2 / w_1^2` is large
/// enough that this step is what brings the residual to round-off level.
fn polish(k: &DMatrix<f64>, m: &DMatrix<f64>, pairs: Vec<EigenPair>, radius: f64) -> Result<Vec<EigenPair>> {
    let q = pairs.len();
    if q == 0 {
        return Ok(pairs);
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(q);
    for pair in &pairs {
        let shifted = k - m * pair.omega_sq;
        let improved = shifted
            .lu()
            .solve(&(m * &pair.vector))
            .filter(|x| x.iter().all(|v| v.is_finite()));
        // Inverse iteration near a cluster can collapse onto directions
        // already in the basis; fall back to the unpolished vector then.
        let next = improved
            .and_then(|x| m_orthonormalize(&x, &basis, m))
            .or_else(|| m_orthonormalize(&pair.vector, &basis, m));
        match next {
            Some(v) => basis.push(v),
            None => return Ok(pairs),
        }
    }
    // The vectors are M-orthonormal, so each Rayleigh quotient is accurate
    // relative to its own eigenvalue. A Rayleigh-Ritz step on the whole
    // kept set would reintroduce an absolute error of order eps * w2_max.
    let mut polished = basis
        .into_iter()
        .map(|vector| {
            let w2 = clamp_negative(vector.dot(&(k * &vector)), radius)?;
            Ok(EigenPair { omega_sq: w2, vector })
        })
        .collect::<Result<Vec<_>>>()?;
    polished.sort_by(|a, b| a.omega_sq.total_cmp(&b.omega_sq));
    Ok(polished)
}

/// `x` made M-orthogonal to the M-orthonormal `basis` (two Gram–Schmidt
/// passes) and M-normalized; `None` when little of `x` survives.
fn m_orthonormalize(x: &DVector<f64>, basis: &[DVector<f64>], m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let norm = |v: &DVector<f64>| v.dot(&(m * v)).max(0.0).sqrt();
    let start = norm(x);
    if !(start > 0.0) {
        return None;
    }
    let mut v = x / start;
    for _ in 0..2 {
        let mv = m * &v;
        for b in basis {
            v -= b * b.dot(&mv);
        }
    }
    let left = norm(&v);
    (left > ORTHO_SURVIVAL).then(|| v / left)
}

/// Solves `K d = w^2 M d` through the Cholesky factor `M = C C'` and the
/// standard symmetric problem on `C^-1 K C^-T`, then polishes the returned
/// pairs. Returns the `n_modes` smallest pairs in ascending order.
pub fn solve_generalized(k: &DMatrix<f64>, m: &DMatrix<f64>, n_modes: usize) -> Result<Vec<EigenPair>> {
    if k.is_empty() && m.is_empty() {
        return Ok(Vec::new());
    }
    let red = Reduction::new(k, m)?;
    let omega_sq = red.omega_sq()?;
    let pairs = (0..n_modes.min(red.len()))
        .map(|i| {
            Ok(EigenPair {
                omega_sq: omega_sq[i],
                vector: red.vector(i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    polish(k, m, pairs, red.radius)
}

/// `w L^2 sqrt(rho A / (E I))`.
pub fn nondimensionalize(omega: f64, section: &Section) -> f64 {
    omega * section.length.powi(2) * (section.mass_per_length() / section.bending_rigidity()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    /// Transverse `(v, phi)` mode, either flexural or thickness-shear branch.
    Bending,
    Axial,
    Rigid,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Bending => "bending",
            ModeKind::Axial => "axial",
            ModeKind::Rigid => "rigid",
        }
    }
}

/// Ascending spectrum with modes in full DOF numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega_sq: Vec<f64>,
    /// Non-dimensional frequency `w L^2 sqrt(rho A / EI)`.
    pub omega_nd: Vec<f64>,
    pub modes: Vec<DVector<f64>>,
    pub kinds: Vec<ModeKind>,
    /// Largest squared frequency of the full discrete pencil.
    pub spectral_radius: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.omega_nd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_nd.is_empty()
    }

    /// Tabulated frequency parameter, `sqrt(omega_nd)`.
    pub fn lambda(&self, i: usize) -> f64 {
        self.omega_nd[i].sqrt()
    }

    /// Indices of the modes of `kind`, ascending.
    pub fn indices_of(&self, kind: ModeKind) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.kinds[i] == kind).collect()
    }
}

/// Fraction of the M-weighted norm carried by the axial DOFs.
pub fn axial_fraction(mode: &DVector<f64>, m: &DMatrix<f64>) -> f64 {
    let total = mode.dot(&(m * mode));
    let axial_dofs: Vec<usize> = (U..mode.len()).step_by(DOFS_PER_POINT).collect();
    let axial: f64 = axial_dofs
        .iter()
        .map(|&i| mode[i] * axial_dofs.iter().map(|&j| m[(i, j)] * mode[j]).sum::<f64>())
        .sum();
    if total > 0.0 {
        axial / total
    } else {
        0.0
    }
}

/// Non-dimensional frequency of the first elastic mode; squared
/// frequencies below `ZERO_FRACTION` of the spectral radius count as zero.
fn first_elastic(omega_sq: &[f64], omega_nd: &[f64], spectral_radius: f64) -> f64 {
    let zero = ZERO_FRACTION * spectral_radius;
    omega_sq
        .iter()
        .zip(omega_nd)
        .find(|(w2, _)| **w2 > zero)
        .map(|(_, w)| *w)
        .unwrap_or(f64::INFINITY)
}

/// Fraction of the M-norm of `mode` lying in the span of `rigid`
/// (M-orthogonal projection).
pub fn rigid_fraction(mode: &DVector<f64>, rigid: &[DVector<f64>], m: &DMatrix<f64>) -> f64 {
    if rigid.is_empty() {
        return 0.0;
    }
    let m_mode = m * mode;
    let total = mode.dot(&m_mode);
    let r = rigid.len();
    let m_rigid: Vec<DVector<f64>> = rigid.iter().map(|v| m * v).collect();
    let gram = DMatrix::from_fn(r, r, |i, j| rigid[i].dot(&m_rigid[j]));
    let rhs = DVector::from_fn(r, |i, _| rigid[i].dot(&m_mode));
    match gram.cholesky() {
        Some(ch) if total > 0.0 => rhs.dot(&ch.solve(&rhs)) / total,
        _ => 0.0,
    }
}

fn classify_one(
    index: usize,
    omega_nd: f64,
    first_elastic: f64,
    mode: &DVector<f64>,
    rigid: &[DVector<f64>],
    m: &DMatrix<f64>,
) -> Result<ModeKind> {
    if omega_nd < RIGID_FRACTION * first_elastic || rigid_fraction(mode, rigid, m) > DOMINANT_FRACTION {
        return Ok(ModeKind::Rigid);
    }
    let axial = axial_fraction(mode, m);
    if axial > DOMINANT_FRACTION {
        Ok(ModeKind::Axial)
    } else if 1.0 - axial > DOMINANT_FRACTION {
        Ok(ModeKind::Bending)
    } else {
        Err(EigenError::MixedMode { index, axial })
    }
}

/// Tags every mode of `spectrum` as rigid, axial or bending.
///
/// A mode is rigid when it lies in the span of the admissible rigid-body
/// motions or sits far below the first elastic frequency; the rest split by
/// the share of their modal mass carried by the axial DOFs. For a straight
/// beam the axial and transverse blocks decouple, so a mode that is neither
/// is reported as an error.
pub fn classify_modes(
    spectrum: &Spectrum,
    system: &GlobalSystem,
    constrained: &ConstrainedSystem,
) -> Result<Vec<ModeKind>> {
    let first = first_elastic(&spectrum.omega_sq, &spectrum.omega_nd, spectrum.spectral_radius);
    spectrum
        .omega_nd
        .iter()
        .zip(&spectrum.modes)
        .enumerate()
        .map(|(i, (&w, mode))| classify_one(i, w, first, mode, &constrained.rigid, &system.m))
        .collect()
}

/// Solves the constrained system and keeps the lowest modes, classified,
/// until `enough` holds for the kinds collected so far (or the spectrum
/// runs out). Only the kept modes are polished.
pub fn solve_spectrum_until(
    system: &GlobalSystem,
    constrained: &ConstrainedSystem,
    section: &Section,
    enough: impl Fn(&[ModeKind]) -> bool,
) -> Result<Spectrum> {
    let (k, m) = (&constrained.k, &constrained.m);
    if constrained.num_free() == 0 {
        return Ok(Spectrum {
            omega_sq: Vec::new(),
            omega_nd: Vec::new(),
            modes: Vec::new(),
            kinds: Vec::new(),
            spectral_radius: 0.0,
        });
    }
    let red = Reduction::new(k, m)?;
    let all_sq = red.omega_sq()?;
    let spectral_radius = all_sq.last().copied().unwrap_or(0.0);
    let nd = |w2: f64| nondimensionalize(w2.sqrt(), section);
    let all_nd: Vec<f64> = all_sq.iter().map(|&w2| nd(w2)).collect();
    let first = first_elastic(&all_sq, &all_nd, spectral_radius);
    let classify = |i: usize, w_nd: f64, reduced: &DVector<f64>| {
        let mode = constrained.expand(reduced);
        classify_one(i, w_nd, first, &mode, &constrained.rigid, &system.m).map(|kind| (kind, mode))
    };

    let mut kinds = Vec::new();
    let mut pairs = Vec::new();
    for (i, &w2) in all_sq.iter().enumerate() {
        if enough(&kinds) {
            break;
        }
        let vector = red.vector(i)?;
        kinds.push(classify(i, all_nd[i], &vector)?.0);
        pairs.push(EigenPair { omega_sq: w2, vector });
    }

    let mut spectrum = Spectrum {
        omega_sq: Vec::with_capacity(pairs.len()),
        omega_nd: Vec::with_capacity(pairs.len()),
        modes: Vec::with_capacity(pairs.len()),
        kinds: Vec::with_capacity(pairs.len()),
        spectral_radius,
    };
    for (i, pair) in polish(k, m, pairs, red.radius)?.into_iter().enumerate() {
        let w_nd = nd(pair.omega_sq);
        let (kind, mode) = classify(i, w_nd, &pair.vector)?;
        spectrum.omega_sq.push(pair.omega_sq);
        spectrum.omega_nd.push(w_nd);
        spectrum.modes.push(mode);
        spectrum.kinds.push(kind);
    }
    Ok(spectrum)
}

/// The `n_modes` lowest modes, expanded to full numbering and classified.
pub fn solve_spectrum(
    system: &GlobalSystem,
    constrained: &ConstrainedSystem,
    section: &Section,
    n_modes: usize,
) -> Result<Spectrum> {
    solve_spectrum_until(system, constrained, section, |k| k.len() >= n_modes)
}

/// Lowest modes up to and including the `n_bending`-th transverse one.
pub fn solve_bending(
    system: &GlobalSystem,
    constrained: &ConstrainedSystem,
    section: &Section,
    n_bending: usize,
) -> Result<Spectrum> {
    solve_spectrum_until(system, constrained, section, |k| {
        k.iter().filter(|&&m| m == ModeKind::Bending).count() >= n_bending
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    pub phi: f64,
}

/// Evaluates `(u, v, phi)` of a full-numbering mode vector at `n_points`
/// uniform parameter values. The result is scaled so the largest `|v|`
/// (or `|u|` for a mode without transverse content) equals one and is
/// positive.
pub fn sample_mode(curve: &Curve, mode: &DVector<f64>, n_points: usize) -> Result<Vec<ModeSample>> {
    let expected = DOFS_PER_POINT * curve.num_control_points();
    if mode.len() != expected {
        return Err(EigenError::ModeLength {
            got: mode.len(),
            expected,
        });
    }
    let (a, b) = (curve.knot_vector().first(), curve.knot_vector().last());
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let xi = if n_points == 1 {
            a
        } else if i + 1 == n_points {
            b
        } else {
            a + (b - a) * i as f64 / (n_points - 1) as f64
        };
        let basis = curve.eval_nurbs(xi)?;
        let g = curve.geometry_map(xi)?;
        let mut s = ModeSample {
            x: g.x,
            u: 0.0,
            v: 0.0,
            phi: 0.0,
        };
        for (k, r) in basis.values.iter().enumerate() {
            let cp = basis.first_index() + k;
            s.u += r * mode[DOFS_PER_POINT * cp + U];
            s.v += r * mode[DOFS_PER_POINT * cp + V];
            s.phi += r * mode[DOFS_PER_POINT * cp + PHI];
        }
        out.push(s);
    }
    let pick = |f: fn(&ModeSample) -> f64| {
        out.iter()
            .map(f)
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc })
    };
    let mut peak = pick(|s| s.v);
    if peak.abs() < 1e-12 * pick(|s| s.u).abs() || peak == 0.0 {
        peak = pick(|s| s.u);
    }
    if peak != 0.0 {
        for s in &mut out {
            s.u /= peak;
            s.v /= peak;
            s.phi /= peak;
        }
    }
    Ok(out)
}
