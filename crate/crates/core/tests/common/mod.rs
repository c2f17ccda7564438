//! Strategies, check functions and an independent eigenvalue oracle shared by
//! the property suites and the acceptance runner.
#![allow(dead_code)]

use iga_timoshenko::assembly::GlobalSystem;
use iga_timoshenko::config::Refinement;
use iga_timoshenko::eigen::{solve_spectrum, ModeKind};
use iga_timoshenko::quadrature::gauss_legendre;
use iga_timoshenko::{analysis, AnalysisConfig, BoundaryCondition, Curve, KnotVector};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

pub const ALL_BCS: [BoundaryCondition; 4] = [
    BoundaryCondition::PinnedPinned,
    BoundaryCondition::ClampedClamped,
    BoundaryCondition::ClampedFree,
    BoundaryCondition::FreeFree,
];

// ---------------------------------------------------------------- strategies

/// Open knot vector on [0, 1] with random interior breakpoints and
/// multiplicities up to the degree.
pub fn arb_knot_vector() -> impl Strategy<Value = KnotVector> {
    (1usize..=5)
        .prop_flat_map(|p| {
            (
                Just(p),
                prop::collection::vec((0.02..0.98f64, 1usize..=p), 0..6),
            )
        })
        .prop_map(|(p, interior)| {
            let mut breaks: Vec<(f64, usize)> = Vec::new();
            let mut sorted = interior;
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (x, m) in sorted {
                if breaks.last().is_none_or(|(y, _)| x - y > 1e-3) {
                    breaks.push((x, m));
                }
            }
            let mut knots = vec![0.0; p + 1];
            for (x, m) in breaks {
                knots.extend(std::iter::repeat_n(x, m));
            }
            knots.extend(std::iter::repeat_n(1.0, p + 1));
            KnotVector::new(knots, p).expect("valid knot vector")
        })
}

fn curve_on(kv: KnotVector) -> impl Strategy<Value = Curve> {
    let n = kv.num_basis();
    (
        prop::collection::vec(0.01..1.0f64, n),
        prop::collection::vec(0.5..2.0f64, n),
    )
        .prop_map(move |(steps, weights)| {
            let mut x = 0.0;
            let control_x = steps
                .iter()
                .map(|s| {
                    x += s;
                    x
                })
                .collect();
            Curve::new(control_x, weights, kv.clone()).expect("valid curve")
        })
}

/// Rational curve with increasing control abscissae and random weights.
pub fn arb_curve() -> impl Strategy<Value = Curve> {
    arb_knot_vector().prop_flat_map(curve_on)
}

/// Single-element rational curve, the starting point for k-refinement.
pub fn arb_coarse_curve() -> impl Strategy<Value = Curve> {
    (1usize..=3).prop_flat_map(|p| curve_on(KnotVector::open_uniform(p, 1).unwrap()))
}

/// Parameter values in the closed parameter range, ends included.
pub fn arb_xi() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]
}

pub fn arb_bc() -> impl Strategy<Value = BoundaryCondition> {
    prop::sample::select(ALL_BCS.to_vec())
}

pub fn arb_refinement() -> impl Strategy<Value = Refinement> {
    prop_oneof![Just(Refinement::K), Just(Refinement::H)]
}

/// Beam configurations over moderate thickness ratios.
pub fn arb_beam() -> impl Strategy<Value = AnalysisConfig> {
    arb_beam_in(0.01, 0.5)
}

pub fn arb_beam_in(h_min: f64, h_max: f64) -> impl Strategy<Value = AnalysisConfig> {
    (arb_bc(), h_min..h_max, 1usize..=4, 1usize..=24, arb_refinement()).prop_map(
        |(bc, h_over_l, degree, elements, refinement)| AnalysisConfig {
            bc,
            h_over_l,
            degree,
            elements,
            refinement,
            ..AnalysisConfig::default()
        },
    )
}

/// Random symmetric positive definite `n x n` matrix `B'B + n I / 4`.
pub fn arb_spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
        let b = DMatrix::from_vec(n, n, v);
        b.transpose() * &b + DMatrix::identity(n, n) * (n as f64 / 4.0)
    })
}

pub fn arb_pencil(n: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (arb_spd(n), arb_spd(n))
}

// -------------------------------------------------------------------- oracle

/// Eigenvalues of `K - lambda M` below `lambda`: the number of negative
/// pivots of unpivoted symmetric elimination, i.e. the sign changes in the
/// sequence of leading principal minors of `det(K - lambda M)`.
pub fn count_below(k: &DMatrix<f64>, m: &DMatrix<f64>, lambda: f64) -> usize {
    let mut a = k - m * lambda;
    let n = a.nrows();
    let mut negative = 0;
    for c in 0..n {
        let pivot = a[(c, c)];
        if pivot < 0.0 {
            negative += 1;
        }
        for r in c + 1..n {
            let f = a[(r, c)] / pivot;
            for j in c..n {
                a[(r, j)] -= f * a[(c, j)];
            }
        }
    }
    negative
}

/// All eigenvalues of an SPD pencil by bisection on the sign-change count.
pub fn bisection_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let n = k.nrows();
    let mut upper = 1.0;
    while count_below(k, m, upper) < n {
        upper *= 2.0;
    }
    (1..=n)
        .map(|i| {
            let (mut lo, mut hi) = (0.0, upper);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(k, m, mid) >= i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

// -------------------------------------------------------------------- checks

pub fn check_basis_partition(kv: &KnotVector, xi: f64) -> Check {
    let be = kv.eval_basis(xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let p = kv.degree();
    prop_assert_eq!(be.values.len(), p + 1);
    prop_assert!((be.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    prop_assert!(be.derivs.iter().sum::<f64>().abs() <= 1e-10);
    prop_assert!(be.values.iter().all(|&v| v >= -1e-15));
    Ok(())
}

/// Away from knots every active function is strictly positive, so exactly
/// `p + 1` functions are non-zero.
pub fn check_local_support(kv: &KnotVector, xi: f64) -> Check {
    let near_knot = kv.knots().iter().any(|k| (k - xi).abs() < 1e-9);
    if near_knot {
        return Ok(());
    }
    let be = kv.eval_basis(xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(be.values.iter().all(|&v| v > 0.0));
    prop_assert!(be.span >= kv.degree() && be.span < kv.num_basis());
    Ok(())
}

pub fn check_rational_partition(curve: &Curve, xi: f64) -> Check {
    let be = curve.eval_nurbs(xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!((be.values.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    prop_assert!(be.derivs.iter().sum::<f64>().abs() <= 1e-10);
    prop_assert!(be.values.iter().all(|&v| v >= -1e-15));
    Ok(())
}

/// Analytic derivatives against central differences with step 1e-6, taken
/// only where both stencil points share the span of `xi`.
pub fn check_fd_derivative(curve: &Curve, xi: f64) -> Check {
    const STEP: f64 = 1e-6;
    let kv = curve.knot_vector();
    let clear = kv.knots().iter().all(|k| (k - xi).abs() > 10.0 * STEP);
    if !clear {
        return Ok(());
    }
    let at = |x: f64| curve.eval_nurbs(x).map_err(|e| TestCaseError::fail(e.to_string()));
    let (c, lo, hi) = (at(xi)?, at(xi - STEP)?, at(xi + STEP)?);
    prop_assert_eq!(lo.span, c.span);
    prop_assert_eq!(hi.span, c.span);
    for i in 0..c.values.len() {
        let fd = (hi.values[i] - lo.values[i]) / (2.0 * STEP);
        let d = c.derivs[i];
        prop_assert!(
            (fd - d).abs() <= 1e-5 * d.abs().max(1.0),
            "basis {}: analytic {} vs difference {}",
            i,
            d,
            fd
        );
    }
    Ok(())
}

pub fn check_knot_count(curve: &Curve) -> Check {
    let kv = curve.knot_vector();
    prop_assert_eq!(kv.knots().len(), kv.num_basis() + kv.degree() + 1);
    prop_assert_eq!(curve.num_control_points(), kv.num_basis());
    Ok(())
}

/// `x(xi)` agrees at 100 uniform samples within 1e-10.
pub fn check_same_geometry(before: &Curve, after: &Curve) -> Check {
    for i in 0..100 {
        let xi = i as f64 / 99.0;
        let a = before.geometry_map(xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = after.geometry_map(xi).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((a.x - b.x).abs() <= 1e-10, "xi = {}: {} vs {}", xi, a.x, b.x);
    }
    Ok(())
}

/// Monomials `x^k`, `k <= 2n - 1`, integrate exactly on [-1, 1].
pub fn check_quadrature_exact(n: usize) -> Check {
    let rule = gauss_legendre(n).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for k in 0..2 * n {
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k + 1) as f64 };
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(k as i32))
            .sum();
        prop_assert!((got - exact).abs() <= 1e-12, "n = {}, x^{}: {} vs {}", n, k, got, exact);
    }
    Ok(())
}

pub fn check_symmetric(system: &GlobalSystem) -> Check {
    for (name, a) in [("K", &system.k), ("M", &system.m)] {
        let scale = a.amax();
        let asym = (a - a.transpose()).amax();
        prop_assert!(asym <= 1e-12 * scale, "{} asymmetry {} (max entry {})", name, asym, scale);
    }
    Ok(())
}

/// The unconstrained stiffness annihilates the three rigid-body motions and
/// has exactly three eigenvalues at or below `cutoff` times its largest.
///
/// The first flexural eigenvalue of `K` scales like `(h/L)^2`; below
/// `h/L = 0.02` it drops under 1e-8 of the largest, so thinner beams need a
/// tighter cutoff (rigid eigenvalues sit at round-off, ~1e-16).
pub fn check_rigid_nullity(system: &GlobalSystem, cutoff: f64) -> Check {
    let k_norm = system.k.norm();
    for (i, r) in system.rigid_body_modes().iter().enumerate() {
        let kr = (&system.k * r).norm();
        prop_assert!(kr <= 1e-10 * k_norm * r.norm(), "rigid motion {}: |K r| = {}", i, kr);
    }
    let eig = system.k.clone().symmetric_eigen().eigenvalues;
    let max = eig.amax();
    let nullity = eig.iter().filter(|&&l| l.abs() <= cutoff * max).count();
    prop_assert_eq!(nullity, 3);
    Ok(())
}

fn restrict(full: &DVector<f64>, free: &[usize]) -> DVector<f64> {
    DVector::from_iterator(free.len(), free.iter().map(|&i| full[i]))
}

/// Spectrum invariants on the constrained pencil for the lowest `n_modes`:
/// ascending, non-negative, relative residual and M-orthonormality.
/// Residuals are skipped for rigid modes, whose `K d` is pure round-off.
pub fn check_spectrum(cfg: &AnalysisConfig, n_modes: usize, residual_tol: f64) -> Check {
    let model = analysis::build_model(cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let c = &model.constrained;
    let n_modes = n_modes.min(c.num_free());
    let sp = solve_spectrum(&model.system, c, &model.section, n_modes)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(sp.omega_nd.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)));
    prop_assert!(sp.omega_sq.iter().all(|&w| w >= -1e-8));
    let reduced: Vec<DVector<f64>> = sp.modes.iter().map(|d| restrict(d, &c.free)).collect();
    for (i, d) in reduced.iter().enumerate() {
        let md = &c.m * d;
        for (j, e) in reduced.iter().enumerate() {
            let g = e.dot(&md);
            let target = if i == j { 1.0 } else { 0.0 };
            prop_assert!((g - target).abs() <= 1e-8, "modes {},{}: d'Md = {}", i, j, g);
        }
        if sp.kinds[i] == ModeKind::Rigid {
            continue;
        }
        let kd = &c.k * d;
        let res = (&kd - md * sp.omega_sq[i]).norm() / kd.norm();
        prop_assert!(res <= residual_tol, "mode {}: residual {}", i, res);
        // constrained DOFs stay exactly zero in full numbering
        prop_assert!(c.constrained.iter().all(|&dof| sp.modes[i][dof] == 0.0));
    }
    Ok(())
}

/// Rounding floor of the relative residual of an exact eigenvector:
/// `eps |K| |d| / |K d|`, the cancellation incurred by forming `K d`.
pub fn residual_floor(k: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    f64::EPSILON * (k.abs() * d.abs()).norm() / (k * d).norm()
}

/// Frequencies are non-increasing along nested refinements.
pub fn check_monotone(base: &AnalysisConfig, levels: &[usize], n_modes: usize) -> Check {
    prop_assert!(analysis::is_nested(base.refinement, levels));
    let cfg = AnalysisConfig {
        n_modes,
        ..*base
    };
    let study = analysis::convergence_study(&cfg, levels, true)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    for pair in study.rows.windows(2) {
        for (i, (c, f)) in pair[0].lambdas.iter().zip(&pair[1].lambdas).enumerate() {
            prop_assert!(
                *f <= *c * (1.0 + 1e-12),
                "mode {} rose from {} ({} el) to {} ({} el)",
                i + 1,
                c,
                pair[0].elements,
                f,
                pair[1].elements
            );
        }
    }
    Ok(())
}

pub fn check_pencil(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Check {
    let n = k.nrows();
    let pairs = iga_timoshenko::eigen::solve_generalized(k, m, n)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let oracle = bisection_eigenvalues(k, m);
    for (p, o) in pairs.iter().zip(&oracle) {
        prop_assert!(
            (p.omega_sq - o).abs() <= 1e-9 * o.abs(),
            "solver {} vs bisection {}",
            p.omega_sq,
            o
        );
    }
    Ok(())
}

/// Assembles a configuration without constraining it.
pub fn assembled(cfg: &AnalysisConfig) -> Result<GlobalSystem, TestCaseError> {
    analysis::build_model(cfg)
        .map(|model| model.system)
        .map_err(|e| TestCaseError::fail(e.to_string()))
}
