use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rte_pml_cli::config::{PrecondName, RunConfig};
use rte_pml_cli::run::write_study_table;
use rte_pml_cli::{convergence_study, solve_all, CliError};

#[derive(Parser)]
#[command(name = "rte-pml", version, about = "PML vacuum boundaries for PN finite element transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the PCG relative tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Override the preconditioner (`jacobi` or `block_spatial`).
    #[arg(long, global = true)]
    precond: Option<String>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for every entry of `pml.targets` / `pml.a`.
    Solve { config: PathBuf },
    /// Run the `[study]` sweep and write the error table.
    Study { config: PathBuf },
    /// Solve the first PML entry and export its angular mean.
    Export { config: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(tol) = cli.tol {
        cfg.solver.tol = tol;
    }
    if let Some(p) = &cli.precond {
        let kind: rte_pml::solver::PreconditionerKind = p.parse().map_err(|e| CliError::Config(format!("--precond: {e}")))?;
        cfg.solver.preconditioner = PrecondName::from(kind);
    }
    if let Some(dir) = &cli.out_dir {
        cfg.outputs.dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match &cli.command {
        Command::Solve { config } => {
            let cfg = load(cli, config)?;
            for (solved, mesh) in solve_all(&cfg)? {
                let r = &solved.report;
                println!(
                    "h={} N={} a={} iterations={} residual={:.3e} dofs_even={} dofs_odd={} seconds={:.3}",
                    mesh.h(),
                    solved.basis.order(),
                    r.params.iter().find(|(k, _)| k == "a").map_or("", |(_, v)| v.as_str()),
                    r.iterations,
                    r.final_residual(),
                    r.dofs_even,
                    r.dofs_odd,
                    r.seconds
                );
            }
            println!("report: {}", cfg.outputs.dir.join(&cfg.outputs.report).display());
        }
        Command::Study { config } => {
            let cfg = load(cli, config)?;
            let rows = convergence_study(&cfg)?;
            let path = cfg.outputs.dir.join(&cfg.outputs.table);
            write_study_table(&rows, &path)?;
            println!("N,h,exp_al,e_h,iters");
            for r in &rows {
                println!("{},{},{},{:.4e},{}", r.order, r.h, r.exp_al, r.e_h, r.iters);
            }
            println!("table: {}", path.display());
        }
        Command::Export { config } => {
            let mut cfg = load(cli, config)?;
            cfg.outputs.field.get_or_insert_with(|| "field".into());
            if cfg.pml.a.is_empty() {
                cfg.pml.targets.truncate(1);
            } else {
                cfg.pml.a.truncate(1);
            }
            solve_all(&cfg)?;
            println!("field: {}", cfg.outputs.dir.join(cfg.outputs.field.as_deref().unwrap()).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
