//! End-to-end analyses: single runs, benchmark table reproduction,
//! convergence sweeps and mode-shape export.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::assembly::{assemble, BoundaryCondition, ConstrainedSystem, GlobalSystem, Section};
use crate::config::{AnalysisConfig, Refinement};
use crate::csv::{Cell, CsvTable};
use crate::eigen::{sample_mode, solve_bending, ModeKind, Spectrum};
use crate::error::Error;
use crate::nurbs::Curve;
use crate::oracle::{clt_frequency, timoshenko_pinned_spectrum};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::reference::{Table, MODES, RATIOS};

pub type Result<T> = std::result::Result<T, Error>;

/// Relative slack allowed when checking that frequencies do not increase
/// under nested refinement.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Discretized beam ready to solve.
#[derive(Debug, Clone)]
pub struct Model {
    pub section: Section,
    pub curve: Curve,
    pub rule: QuadratureRule,
    pub system: GlobalSystem,
    pub constrained: ConstrainedSystem,
}

/// Refines the unit-length linear beam to the configured degree and
/// element count.
pub fn build_curve(cfg: &AnalysisConfig) -> Result<Curve> {
    let coarse = Curve::straight(1.0)?;
    let curve = match cfg.refinement {
        Refinement::K => coarse.k_refine(cfg.degree, cfg.elements)?,
        Refinement::H | Refinement::P => coarse.insert_then_elevate(cfg.degree, cfg.elements)?,
    };
    Ok(curve)
}

pub fn build_model(cfg: &AnalysisConfig) -> Result<Model> {
    cfg.validate()?;
    let section = Section::normalized(cfg.h_over_l, cfg.nu, cfg.kappa)?;
    let curve = build_curve(cfg)?;
    let rule = gauss_legendre(cfg.quadrature_points())?;
    let system = assemble(&section, &curve, &rule)?;
    let constrained = system.apply_bc(cfg.bc);
    Ok(Model {
        section,
        curve,
        rule,
        system,
        constrained,
    })
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub num_dofs: usize,
    pub num_free: usize,
    /// Lowest modes up to the last requested transverse mode, including any
    /// interleaved axial and rigid modes.
    pub spectrum: Spectrum,
    /// Spectrum indices of the transverse modes, ascending; mode numbering
    /// follows this list.
    pub bending: Vec<usize>,
    pub curve: Curve,
}

impl AnalysisReport {
    /// Frequency parameters `lambda = sqrt(omega_nd)` of the transverse modes.
    pub fn lambdas(&self) -> Vec<f64> {
        self.bending.iter().map(|&i| self.spectrum.lambda(i)).collect()
    }

    pub fn omega_nd(&self) -> Vec<f64> {
        self.bending.iter().map(|&i| self.spectrum.omega_nd[i]).collect()
    }

    pub fn rigid_count(&self) -> usize {
        self.spectrum.indices_of(ModeKind::Rigid).len()
    }

    /// Rigid modes report zero frequency; their computed values are
    /// round-off.
    fn omega_nd_reported(&self, i: usize) -> f64 {
        match self.spectrum.kinds[i] {
            ModeKind::Rigid => 0.0,
            _ => self.spectrum.omega_nd[i],
        }
    }

    fn lambda_reported(&self, i: usize) -> f64 {
        self.omega_nd_reported(i).sqrt()
    }

    /// One row per solved mode; transverse modes carry their mode number.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["index", "kind", "mode", "lambda", "omega_nd"]);
        for i in 0..self.spectrum.len() {
            let mode = self.bending.iter().position(|&b| b == i).map(|p| p + 1);
            t.push(vec![
                (i + 1).into(),
                self.spectrum.kinds[i].as_str().into(),
                mode.into(),
                self.lambda_reported(i).into(),
                self.omega_nd_reported(i).into(),
            ]);
        }
        t
    }
}

/// Builds, constrains and solves one configuration; returns the first
/// `n_modes` transverse modes with everything below them.
pub fn run_analysis(cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    let ctx = || {
        format!(
            "{} beam, h/L = {}, p = {}, {} elements",
            cfg.bc, cfg.h_over_l, cfg.degree, cfg.elements
        )
    };
    let model = build_model(cfg).map_err(|e| e.context(ctx()))?;
    let spectrum = solve_bending(&model.system, &model.constrained, &model.section, cfg.n_modes)
        .map_err(|e| Error::from(e).context(ctx()))?;
    let bending = spectrum.indices_of(ModeKind::Bending);
    Ok(AnalysisReport {
        config: *cfg,
        num_dofs: model.system.num_dofs(),
        num_free: model.constrained.num_free(),
        spectrum,
        bending,
        curve: model.curve,
    })
}

/// Default converged discretization for the benchmark tables.
pub fn table_config() -> AnalysisConfig {
    AnalysisConfig {
        degree: 3,
        elements: 64,
        refinement: Refinement::K,
        n_modes: MODES,
        ..AnalysisConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub mode: usize,
    pub clt: f64,
    pub h_over_l: f64,
    pub lambda: f64,
    pub omega_nd: f64,
    pub reference: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableResult {
    pub table: Table,
    /// Ordered by ratio, then mode.
    pub rows: Vec<TableRow>,
}

impl TableResult {
    pub fn get(&self, mode: usize, h_over_l: f64) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.mode == mode && r.h_over_l == h_over_l)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "h_over_l", "mode", "clt", "lambda", "omega_nd", "reference", "rel_dev",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.h_over_l.into(),
                r.mode.into(),
                r.clt.into(),
                r.lambda.into(),
                r.omega_nd.into(),
                r.reference.into(),
                r.rel_dev.into(),
            ]);
        }
        t
    }
}

fn map_ordered<T, R, F>(items: &[T], serial: bool, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    if serial {
        items.iter().map(f).collect()
    } else {
        items.par_iter().map(f).collect()
    }
}

/// Runs the ten-mode, seven-ratio benchmark grid with the discretization of
/// `template` (its boundary condition and ratio are overridden).
pub fn reproduce_table(table: Table, template: &AnalysisConfig, serial: bool) -> Result<TableResult> {
    let bc = table.bc();
    let clt: Vec<f64> = (1..=MODES)
        .map(|n| clt_frequency(bc, n))
        .collect::<std::result::Result<_, _>>()?;
    let columns: Vec<(usize, f64)> = RATIOS.iter().copied().enumerate().collect();
    let per_ratio = map_ordered(&columns, serial, |&(col, ratio)| {
        let cfg = AnalysisConfig {
            bc,
            h_over_l: ratio,
            n_modes: MODES,
            ..*template
        };
        let report = run_analysis(&cfg)?;
        let (lambdas, nds) = (report.lambdas(), report.omega_nd());
        if lambdas.len() < MODES {
            return Err(Error::Input(format!(
                "only {} transverse modes available at h/L = {ratio}",
                lambdas.len()
            )));
        }
        Ok((0..MODES)
            .map(|m| {
                let reference = table.value(m + 1, col);
                TableRow {
                    mode: m + 1,
                    clt: clt[m],
                    h_over_l: ratio,
                    lambda: lambdas[m],
                    omega_nd: nds[m],
                    reference,
                    rel_dev: (lambdas[m] - reference) / reference,
                }
            })
            .collect::<Vec<_>>())
    })?;
    Ok(TableResult {
        table,
        rows: per_ratio.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub degree: usize,
    pub elements: usize,
    pub dofs: usize,
    pub lambdas: Vec<f64>,
    /// `lambda / exact` for pinned–pinned beams.
    pub ratios: Option<Vec<f64>>,
    /// Whether no frequency rose relative to the previous level.
    pub monotone: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub refinement: Refinement,
    pub nested: bool,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> CsvTable {
        let k = self.rows.first().map_or(0, |r| r.lambdas.len());
        let with_ratio = self.rows.iter().all(|r| r.ratios.is_some());
        let mut header = vec![
            "level".to_string(),
            "degree".into(),
            "elements".into(),
            "dofs".into(),
        ];
        header.extend((1..=k).map(|i| format!("lambda_{i}")));
        if with_ratio {
            header.extend((1..=k).map(|i| format!("ratio_{i}")));
        }
        if self.nested {
            header.push("monotone".into());
        }
        let mut t = CsvTable::new(header);
        for r in &self.rows {
            let mut row: Vec<Cell> = vec![
                r.level.into(),
                r.degree.into(),
                r.elements.into(),
                r.dofs.into(),
            ];
            row.extend(r.lambdas.iter().map(|&l| Cell::from(l)));
            if with_ratio {
                row.extend(r.ratios.iter().flatten().map(|&l| Cell::from(l)));
            }
            if self.nested {
                row.push(r.monotone.map(|m| if m { "true" } else { "false" }).into());
            }
            t.push(row);
        }
        t
    }
}

/// Whether the discretization sequence produces nested spaces.
pub fn is_nested(refinement: Refinement, levels: &[usize]) -> bool {
    levels.windows(2).all(|w| match refinement {
        Refinement::H | Refinement::K => w[1] > w[0] && w[1] % w[0] == 0,
        Refinement::P => w[1] > w[0],
    })
}

/// Sweeps element counts (h, k) or degrees (p) from `base`.
pub fn convergence_study(base: &AnalysisConfig, levels: &[usize], serial: bool) -> Result<ConvergenceStudy> {
    if levels.is_empty() {
        return Err(Error::Input("convergence study needs at least one level".into()));
    }
    let nested = is_nested(base.refinement, levels);
    let exact = match base.bc {
        BoundaryCondition::PinnedPinned => Some(timoshenko_pinned_spectrum(
            base.h_over_l,
            base.nu,
            base.kappa,
            base.n_modes,
        )?),
        _ => None,
    };
    let configs: Vec<AnalysisConfig> = levels
        .iter()
        .map(|&level| match base.refinement {
            Refinement::P => AnalysisConfig {
                degree: level,
                ..*base
            },
            _ => AnalysisConfig {
                elements: level,
                ..*base
            },
        })
        .collect();
    let reports = map_ordered(&configs, serial, run_analysis)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for ((&level, cfg), report) in levels.iter().zip(&configs).zip(&reports) {
        let lambdas = report.lambdas();
        let ratios = exact
            .as_ref()
            .map(|e| lambdas.iter().zip(e).map(|(l, x)| l / x).collect());
        let monotone = nested.then(|| {
            rows.last().is_none_or(|prev| {
                prev.lambdas
                    .iter()
                    .zip(&lambdas)
                    .all(|(p, c)| *c <= *p * (1.0 + MONOTONE_SLACK))
            })
        });
        rows.push(ConvergenceRow {
            level,
            degree: cfg.degree,
            elements: cfg.elements,
            dofs: report.num_free,
            lambdas,
            ratios,
            monotone,
        });
    }
    Ok(ConvergenceStudy {
        refinement: base.refinement,
        nested,
        rows,
    })
}

/// Samples transverse modes (1-based numbering) at `n_points` uniform
/// parameter values. Returns `(mode, csv)` pairs.
pub fn mode_tables(cfg: &AnalysisConfig, modes: &[usize], n_points: usize) -> Result<Vec<(usize, CsvTable)>> {
    let max = modes.iter().copied().max().unwrap_or(0);
    if modes.contains(&0) {
        return Err(Error::Input("mode numbers start at 1".into()));
    }
    if n_points < 2 {
        return Err(Error::Input("need at least two sample points".into()));
    }
    let cfg = AnalysisConfig {
        n_modes: max.max(1),
        ..*cfg
    };
    let report = run_analysis(&cfg)?;
    modes
        .iter()
        .map(|&m| {
            let idx = *report.bending.get(m - 1).ok_or_else(|| {
                Error::Input(format!(
                    "mode {m} outside the solved range ({} transverse modes)",
                    report.bending.len()
                ))
            })?;
            let samples = sample_mode(&report.curve, &report.spectrum.modes[idx], n_points)?;
            let mut t = CsvTable::new(["x", "u", "v", "phi"]);
            for s in samples {
                t.push(vec![s.x.into(), s.u.into(), s.v.into(), s.phi.into()]);
            }
            Ok((m, t))
        })
        .collect()
}

/// Writes one `mode_<n>.csv` per requested mode into `dir`.
pub fn export_modes(cfg: &AnalysisConfig, modes: &[usize], n_points: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let tables = mode_tables(cfg, modes, n_points)?;
    fs::create_dir_all(dir).map_err(|e| Error::from(e).context(format!("{}", dir.display())))?;
    tables
        .into_iter()
        .map(|(m, t)| {
            let path = dir.join(format!("mode_{m}.csv"));
            fs::write(&path, t.render())
                .map_err(|e| Error::from(e).context(format!("{}", path.display())))?;
            Ok(path)
        })
        .collect()
}
