//! End-to-end analyses through the library API.

use iga_timoshenko::analysis::{
    convergence_study, export_modes, mode_tables, reproduce_table, run_analysis, table_config,
};
use iga_timoshenko::eigen::{sample_mode, ModeKind};
use iga_timoshenko::oracle::{axial_fixed_fixed, timoshenko_pinned};
use iga_timoshenko::reference::{Table, RATIOS};
use iga_timoshenko::{AnalysisConfig, BoundaryCondition, Refinement};
use std::f64::consts::PI;

fn cfg(bc: BoundaryCondition, h_over_l: f64) -> AnalysisConfig {
    AnalysisConfig {
        bc,
        h_over_l,
        ..AnalysisConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn thin_pinned_first_mode() {
    let report = run_analysis(&cfg(BoundaryCondition::PinnedPinned, 0.002)).unwrap();
    assert_eq!(report.lambdas().len(), 10);
    assert!(rel(report.lambdas()[0], std::f64::consts::PI) < 1e-4);
    assert!(rel(report.lambdas()[0], 3.1417) < 1e-3);
}

#[test]
fn thick_clamped_first_mode() {
    let report = run_analysis(&cfg(BoundaryCondition::ClampedClamped, 0.2)).unwrap();
    assert!(rel(report.lambdas()[0], 4.24201) < 1e-4);
}

#[test]
fn cantilever_tends_to_classical_roots() {
    let report = run_analysis(&cfg(BoundaryCondition::ClampedFree, 0.002)).unwrap();
    for (got, classical) in report.lambdas().iter().zip([1.8751041, 4.6940911, 7.8547574]) {
        assert!(rel(*got, classical) < 2e-3, "{got} vs {classical}");
    }
}

#[test]
fn lambdas_ascend_and_omega_is_their_square() {
    for bc in [BoundaryCondition::PinnedPinned, BoundaryCondition::ClampedFree, BoundaryCondition::FreeFree] {
        let report = run_analysis(&cfg(bc, 0.05)).unwrap();
        let l = report.lambdas();
        assert!(l.windows(2).all(|w| w[0] <= w[1]), "{bc}");
        for (lam, w) in l.iter().zip(report.omega_nd()) {
            assert!(rel(lam * lam, w) < 1e-14);
        }
    }
}

/// The axial modes that fall among the lowest transverse ones are tagged
/// axial and sit at the rod frequencies.
#[test]
fn thick_pinned_axial_modes_classified() {
    let report = run_analysis(&cfg(BoundaryCondition::PinnedPinned, 0.2)).unwrap();
    let axial = report.spectrum.indices_of(ModeKind::Axial);
    assert!(!axial.is_empty());
    for (n, &i) in axial.iter().enumerate() {
        let exact = axial_fixed_fixed(0.2, n + 1).unwrap();
        assert!(rel(report.spectrum.lambda(i), exact) < 1e-6);
    }
    assert_eq!(report.bending.len(), 10);
    for &i in &axial {
        assert!(report.bending.iter().all(|&b| b != i));
    }
}

#[test]
fn table_entries_from_examples() {
    let t1 = reproduce_table(Table::One, &table_config(), true).unwrap();
    let row = t1.get(1, 0.1).unwrap();
    assert!(rel(row.lambda, 3.1157) < 1e-3);
    assert_eq!(t1.rows.len(), 70);
    let t2 = reproduce_table(Table::Two, &AnalysisConfig { bc: BoundaryCondition::ClampedClamped, ..table_config() }, false).unwrap();
    let row = t2.get(5, 0.05).unwrap();
    assert!(rel(row.lambda, 16.1602) < 1e-3);
    // thin limit within 0.5% of the classical column
    for mode in 1..=10 {
        let r = t1.get(mode, RATIOS[0]).unwrap();
        assert!(rel(r.lambda, r.clt) < 5e-3);
    }
}

#[test]
fn parallel_and_serial_tables_agree() {
    let base = table_config();
    let serial = reproduce_table(Table::One, &base, true).unwrap();
    let parallel = reproduce_table(Table::One, &base, false).unwrap();
    assert_eq!(serial.to_csv().render(), parallel.to_csv().render());
}

#[test]
fn convergence_toward_oracle() {
    let base = AnalysisConfig {
        h_over_l: 0.01,
        n_modes: 3,
        ..AnalysisConfig::default()
    };
    let study = convergence_study(&base, &[4, 8, 16, 32, 64], true).unwrap();
    assert!(study.nested);
    let exact = timoshenko_pinned(0.01, 0.3, 5.0 / 6.0, 1).unwrap();
    let first: Vec<f64> = study.rows.iter().map(|r| r.lambdas[0]).collect();
    assert!(first.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{first:?}");
    assert!(rel(*first.last().unwrap(), exact) < 1e-8);
    for r in &study.rows {
        assert_eq!(r.monotone, Some(true));
        // DOF column: 3 (elements + p) minus the four pinned constraints
        assert_eq!(r.dofs, 3 * (r.elements + 3) - 4);
        assert!(r.ratios.as_ref().unwrap().iter().all(|&q| q >= 1.0 - 1e-10));
    }
    let csv = study.to_csv().render();
    assert!(csv.starts_with("level,degree,elements,dofs,lambda_1,lambda_2,lambda_3,ratio_1,ratio_2,ratio_3,monotone\n"));
}

#[test]
fn non_nested_sweep_omits_monotone_column() {
    let base = AnalysisConfig { n_modes: 2, ..AnalysisConfig::default() };
    let study = convergence_study(&base, &[4, 6, 9], true).unwrap();
    assert!(!study.nested);
    assert!(study.rows.iter().all(|r| r.monotone.is_none()));
    assert!(!study.to_csv().render().contains("monotone"));
}

#[test]
fn degree_sweep() {
    let base = AnalysisConfig {
        refinement: Refinement::P,
        elements: 8,
        h_over_l: 0.05,
        n_modes: 2,
        ..AnalysisConfig::default()
    };
    let study = convergence_study(&base, &[1, 2, 3, 4], true).unwrap();
    assert_eq!(study.rows.iter().map(|r| r.degree).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(study.rows.windows(2).all(|w| w[1].lambdas[0] <= w[0].lambdas[0] * (1.0 + 1e-12)));
}

/// Linear elements lock in thin beams; cubic ones do not.
#[test]
fn linear_elements_lock() {
    let exact = timoshenko_pinned(0.002, 0.3, 5.0 / 6.0, 1).unwrap();
    let err = |degree| {
        let c = AnalysisConfig { h_over_l: 0.002, elements: 16, degree, n_modes: 1, ..AnalysisConfig::default() };
        rel(run_analysis(&c).unwrap().lambdas()[0], exact)
    };
    assert!(err(1) >= 10.0 * err(3));
}

fn samples(bc: BoundaryCondition, mode: usize, points: usize) -> Vec<iga_timoshenko::eigen::ModeSample> {
    let c = AnalysisConfig { h_over_l: 0.01, n_modes: mode, bc, ..AnalysisConfig::default() };
    let report = run_analysis(&c).unwrap();
    sample_mode(&report.curve, &report.spectrum.modes[report.bending[mode - 1]], points).unwrap()
}

#[test]
fn pinned_first_mode_is_a_half_sine() {
    let s = samples(BoundaryCondition::PinnedPinned, 1, 101);
    for p in &s {
        assert!((p.v - (PI * p.x).sin()).abs() <= 0.01, "x = {}: {}", p.x, p.v);
    }
    assert!(s[0].v.abs() <= 1e-12 && s[100].v.abs() <= 1e-12);
    assert!(s.iter().all(|p| p.u.abs() <= 1e-10));
    let peak = s.iter().map(|p| p.v.abs()).fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-15);
}

#[test]
fn mode_symmetry_about_midspan() {
    let sym = samples(BoundaryCondition::PinnedPinned, 1, 101);
    let anti = samples(BoundaryCondition::ClampedClamped, 2, 101);
    for i in 0..101 {
        assert!((sym[i].v - sym[100 - i].v).abs() <= 1e-8, "pp mode 1 at {i}");
        assert!((anti[i].v + anti[100 - i].v).abs() <= 1e-8, "cc mode 2 at {i}");
    }
}

#[test]
fn essential_conditions_hold_at_the_ends() {
    let cc = samples(BoundaryCondition::ClampedClamped, 1, 51);
    for p in [&cc[0], &cc[50]] {
        assert!(p.v.abs() <= 1e-12 && p.phi.abs() <= 1e-12 && p.u.abs() <= 1e-12);
    }
    let cf = samples(BoundaryCondition::ClampedFree, 1, 51);
    assert!(cf[0].v.abs() <= 1e-12 && cf[0].phi.abs() <= 1e-12);
    assert!(cf[50].v.abs() > 0.5);
}

#[test]
fn exported_mode_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = AnalysisConfig { n_modes: 2, ..AnalysisConfig::default() };
    let paths = export_modes(&c, &[1, 2], 11, dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    let text = std::fs::read_to_string(&paths[1]).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,u,v,phi");
    assert_eq!(lines.len(), 12);
    assert!(!text.contains('\r'));
    assert!(mode_tables(&c, &[0], 11).is_err());
    assert!(mode_tables(&c, &[500], 11).is_err());
}
