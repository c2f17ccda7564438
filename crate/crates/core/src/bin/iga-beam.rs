use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iga_timoshenko::analysis::{self, table_config};
use iga_timoshenko::config::AnalysisConfig;
use iga_timoshenko::reference::Table;
use iga_timoshenko::{BoundaryCondition, Error, Refinement};

#[derive(Parser)]
#[command(name = "iga-beam", version, about = "Isogeometric free vibration of Timoshenko beams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print its lowest modes.
    Analyze(Common),
    /// Reproduce a benchmark table (1: pinned-pinned, 2: clamped-clamped).
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Frequencies over a sequence of discretizations.
    Converge {
        /// Element counts (h, k refinement) or degrees (p refinement).
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
        levels: Vec<usize>,
        /// Refinement kind controlling construction and the swept parameter.
        #[arg(long)]
        refinement: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Export sampled mode shapes, one CSV per mode.
    Modes {
        /// Transverse mode numbers to export.
        #[arg(long = "mode-list", value_delimiter = ',', default_value = "1")]
        mode_list: Vec<usize>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Boundary condition: pp, cc, cf or ff.
    #[arg(long)]
    bc: Option<String>,
    #[arg(long = "h-over-l")]
    h_over_l: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    elements: Option<usize>,
    /// Number of transverse modes.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Gauss points per element (default: degree + 1).
    #[arg(long)]
    quad: Option<usize>,
    /// Output file (directory for `modes`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run analyses one after another on the calling thread.
    #[arg(long)]
    serial: bool,
}

impl Common {
    fn resolve(&self, base: AnalysisConfig) -> Result<AnalysisConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::from(e).context(path.display().to_string()))?;
                AnalysisConfig::parse(&text)?
            }
            None => base,
        };
        if let Some(bc) = &self.bc {
            cfg.bc = bc.parse::<BoundaryCondition>()?;
        }
        if let Some(v) = self.h_over_l {
            cfg.h_over_l = v;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = self.elements {
            cfg.elements = v;
        }
        if let Some(v) = self.modes {
            cfg.n_modes = v;
        }
        if let Some(v) = self.nu {
            cfg.nu = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if self.quad.is_some() {
            cfg.quadrature_points = self.quad;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| Error::from(e).context(path.display().to_string())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze(common) => {
            let cfg = common.resolve(AnalysisConfig::default())?;
            let report = analysis::run_analysis(&cfg)?;
            eprintln!(
                "{} DOFs ({} free), {} rigid mode(s)",
                report.num_dofs,
                report.num_free,
                report.rigid_count()
            );
            common.emit(&report.to_csv().render())
        }
        Command::Table { which, common } => {
            let table = Table::from_number(which).ok_or_else(|| Error::Input(format!("no table {which}")))?;
            let template = AnalysisConfig {
                bc: table.bc(),
                ..table_config()
            };
            let cfg = common.resolve(template)?;
            let result = analysis::reproduce_table(table, &cfg, common.serial)?;
            common.emit(&result.to_csv().render())
        }
        Command::Converge {
            levels,
            refinement,
            common,
        } => {
            let mut cfg = common.resolve(AnalysisConfig::default())?;
            if let Some(r) = refinement {
                cfg.refinement = r.parse::<Refinement>()?;
            }
            let study = analysis::convergence_study(&cfg, &levels, common.serial)?;
            if !study.nested {
                eprintln!("levels are not nested; monotonicity column omitted");
            }
            common.emit(&study.to_csv().render())
        }
        Command::Modes {
            mode_list,
            points,
            common,
        } => {
            let cfg = common.resolve(AnalysisConfig::default())?;
            match &common.out {
                Some(dir) => {
                    for path in analysis::export_modes(&cfg, &mode_list, points, dir)? {
                        eprintln!("wrote {}", path.display());
                    }
                }
                None => {
                    for (m, table) in analysis::mode_tables(&cfg, &mode_list, points)? {
                        println!("# mode {m}");
                        print!("{}", table.render());
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
