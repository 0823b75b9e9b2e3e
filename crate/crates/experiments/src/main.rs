use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsfem::{Diffusion, MethodKind};
use gsfem_experiments::config::{ExperimentConfig, OutputFormat, Overrides, ParamValue, ProblemKind};
use gsfem_experiments::presets::{REFERENCE_DEGREE, REFERENCE_ELEMENTS};
use gsfem_experiments::runner::{self, reference_file_name};
use gsfem_experiments::tables::{reproduce_table, TableId, TableOptions};
use gsfem_experiments::{ExperimentError, Result};

#[derive(Parser)]
#[command(name = "gsfem", version, about = "Spectral experiments with Galerkin and soft finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full spectra per method, with errors against exact or reference values.
    Spectrum(Common),
    /// First-eigenvalue errors over the config's `n_list`, plus fitted orders.
    Converge(Common),
    /// Recompute a published table and compare every cell.
    Table {
        /// superconv, condnum_t2, condnum_t4, ratios_t2, ratios_t4 or variable_kappa
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Reference eigenvalues for a variable diffusion coefficient.
    Reference(Common),
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    /// number or fraction such as 1/12
    #[arg(long = "eta-k", allow_hyphen_values = true)]
    eta_k: Option<String>,
    #[arg(long = "eta-m", allow_hyphen_values = true)]
    eta_m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// diffusion expression id: constant, exp_x_plus_x2, exp_x_minus_x2
    #[arg(long)]
    kappa: Option<String>,
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        let method = self
            .method
            .as_deref()
            .map(|m| m.parse::<MethodKind>().map_err(|e| ExperimentError::Config(e.to_string())))
            .transpose()?;
        Ok(Overrides {
            out: self.out.clone(),
            p: self.p,
            n: self.n,
            method,
            eta_k: self.eta_k.clone().map(ParamValue::Text),
            eta_m: self.eta_m.clone().map(ParamValue::Text),
            alpha: self.alpha.clone().map(ParamValue::Text),
            format: self.format,
            kappa: self.kappa.clone(),
        })
    }

    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        self.overrides()?.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(common) => {
            let cfg = common.load()?;
            if let Some(summary) = runner::run_spectrum(&cfg)? {
                for m in &summary.methods {
                    println!(
                        "{:<48} lambda_min {:.6e}  lambda_max {:.6e}  sigma {:.6e}  rho {:.4}",
                        m.label, m.lambda_min, m.lambda_max, m.sigma, m.rho
                    );
                }
                println!("wrote {}", cfg.outputs.dir.display());
            }
            Ok(())
        }
        Command::Converge(common) => {
            let cfg = common.load()?;
            if let Some(table) = runner::run_convergence(&cfg)? {
                for c in &table.columns {
                    let order = c.order.map_or("-".to_string(), |o| format!("{o:.3}"));
                    println!("{:<48} order {order}", c.label);
                }
                println!("wrote {}", cfg.outputs.dir.display());
            }
            Ok(())
        }
        Command::Table { id, common } => {
            let id: TableId = id.parse()?;
            let cfg = common.load()?;
            let kappa = match (cfg.problem, id) {
                (ProblemKind::VariableKappa, _) => cfg.diffusion()?,
                _ => Diffusion::ExpXPlusXSquared,
            };
            let opts = TableOptions {
                tolerances: cfg.tolerances,
                reference: cfg.reference.path.clone().unwrap_or_else(|| cfg.outputs.dir.clone()),
                generate_reference: cfg.reference.generate,
                kappa,
                n: common.n.unwrap_or(TableOptions::default().n),
            };
            let report = reproduce_table(id, &opts)?;
            print!("{report}");
            for format in &cfg.outputs.formats {
                match format {
                    OutputFormat::Csv => report.write_csv(&cfg.outputs.dir.join(format!("table_{id}.csv")))?,
                    OutputFormat::Json => report.write_json(&cfg.outputs.dir.join(format!("table_{id}.json")))?,
                }
            }
            let failed = report.failures().count();
            if failed > 0 {
                return Err(ExperimentError::Acceptance {
                    failed,
                    total: report.cells.len(),
                });
            }
            Ok(())
        }
        Command::Reference(common) => {
            let cfg = common.load()?;
            let kappa = match cfg.problem {
                ProblemKind::VariableKappa => cfg.diffusion()?,
                _ => Diffusion::ExpXPlusXSquared,
            };
            let degree = common.p.unwrap_or(REFERENCE_DEGREE);
            let n = common.n.unwrap_or(REFERENCE_ELEMENTS);
            let reference = runner::generate_reference(kappa, degree, n)?;
            let path = match &cfg.reference.path {
                Some(p) => runner::reference_path(p, &kappa),
                None => cfg.outputs.dir.join(reference_file_name(&kappa, degree, n)),
            };
            runner::write_reference(&path, &reference)?;
            println!(
                "{} eigenvalues, lambda_1 = {:.10e}, wrote {}",
                reference.eigenvalues.len(),
                reference.eigenvalues[0],
                path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
