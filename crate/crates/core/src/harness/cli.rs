//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration or usage errors, 2 for
//! numerical failures such as a singular solve.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::exec::Exec;
use crate::mesh::MeshPair;
use crate::{Error, Result};

use super::cfgfile::load_config;
use super::study::{convergence_study, run_once, truncation_study, write_csv, StudyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dtnfem", version, about = "DtN finite element solver for fluid-solid scattering")]
struct Cli {
    /// Key-value configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Wave number (replaces any k list).
    #[arg(long, global = true)]
    k: Option<f64>,
    /// DtN truncation order.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Radius of the artificial boundary.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Angular resolution of the coarse mesh.
    #[arg(long, global = true)]
    n_angular: Option<usize>,
    /// Number of series modes of the reference solution.
    #[arg(long, global = true)]
    modes: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One solve on a given refinement level; writes a single CSV row.
    Solve {
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Also write the assembled system in coordinate format.
        #[arg(long)]
        dump_system: Option<PathBuf>,
    },
    /// Refinement sweep with fitted orders.
    Convergence {
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Truncation-order sweep on each mesh level.
    Truncation {
        #[arg(long)]
        levels: Option<usize>,
        /// Comma-separated truncation orders.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Evaluate the series solution at a point.
    Oracle {
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        point: Vec<f64>,
    },
    /// Write a mesh in text format.
    MeshDump {
        #[arg(long, value_enum, default_value_t = Part::Annulus)]
        part: Part,
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Part {
    Disc,
    Annulus,
}

fn study_config(cli: &Cli) -> Result<StudyConfig> {
    let base = StudyConfig { exec: Exec::from_env(), ..StudyConfig::default() };
    let mut cfg = match &cli.config {
        Some(path) => load_config(path, base)?,
        None => base,
    };
    if let Some(k) = cli.k {
        cfg.physical.k = k;
        cfg.k_list = vec![k];
    }
    if let Some(n) = cli.n {
        cfg.physical.n_trunc = n;
    }
    if let Some(r) = cli.r {
        cfg.physical.r = r;
    }
    if let Some(a) = cli.n_angular {
        cfg.n_angular = a;
    }
    if let Some(m) = cli.modes {
        cfg.modes = Some(m);
    }
    if let Some(o) = &cli.output {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => f(stdout)?,
    }
    Ok(())
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12e}{:+.12e}i", z.re, z.im)
}

fn execute(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<()> {
    let mut cfg = study_config(cli)?;
    match &cli.command {
        Command::Solve { level, dump_system } => {
            cfg.levels = level + 1;
            cfg.validate()?;
            let pair = cfg.mesh_levels()?.pop().ok_or(Error::Config("no mesh level".into()))?;
            let phys = cfg.physical;
            let exact = cfg.exact_for(phys.k)?;
            if let Some(path) = dump_system {
                let system = crate::assembly::assemble_system(&pair, &phys, cfg.exec)?;
                with_output(Some(path), out, |w| system.write_coordinate(w))?;
            }
            let (report, sol) = run_once(pair, &phys, &exact, cfg.exec)?;
            with_output(cfg.output.as_deref(), out, |w| write_csv(w, &[report], &[]))?;
            writeln!(
                log,
                "solve: k={} N={} h={:.4} dofs={} err_h0={:.4e} err_h1={:.4e} residual={:.2e}",
                report.k,
                report.n_trunc,
                report.h,
                report.dofs,
                report.err_h0,
                report.err_h1,
                sol.relative_residual()
            )?;
        }
        Command::Convergence { levels } => {
            if let Some(l) = levels {
                cfg.levels = *l;
            }
            let table = convergence_study(&cfg)?;
            with_output(cfg.output.as_deref(), out, |w| write_csv(w, &table.rows, &table.footer()))?;
            for r in &table.rows {
                writeln!(log, "convergence: k={} h={:.4} err_h0={:.4e} err_h1={:.4e}", r.k, r.h, r.err_h0, r.err_h1)?;
            }
        }
        Command::Truncation { levels, n_list } => {
            if let Some(l) = levels {
                cfg.levels = *l;
            }
            if let Some(list) = n_list {
                cfg.n_list = list.clone();
            }
            let table = truncation_study(&cfg)?;
            with_output(cfg.output.as_deref(), out, |w| write_csv(w, &table.rows(), &table.footer()))?;
            for c in &table.curves {
                writeln!(log, "truncation: k={} h={:.4} N*={} plateau={:.4e}", c.k, c.h, c.n_star, c.plateau())?;
            }
        }
        Command::Oracle { point } => {
            cfg.validate()?;
            let exact = cfg.exact_for(cfg.physical.k)?;
            let x = [point[0], point[1]];
            let r = x[0].hypot(x[1]);
            let theta = x[1].atan2(x[0]);
            let r0 = cfg.physical.r0;
            let mut text = String::new();
            if r >= r0 {
                let p = exact.eval_pressure(r, theta, false)?.value;
                text += &format!("p({}, {}) = {}\n", x[0], x[1], fmt_c(p));
            }
            if r <= r0 {
                let u = exact.eval_displacement(r, theta, false)?.value;
                text += &format!("u({}, {}) = ({}, {})\n", x[0], x[1], fmt_c(u[0]), fmt_c(u[1]));
            }
            with_output(cfg.output.as_deref(), out, |w| w.write_all(text.as_bytes()))?;
        }
        Command::MeshDump { part, level } => {
            cfg.levels = level + 1;
            cfg.validate()?;
            let pair: Arc<MeshPair> = cfg.mesh_levels()?.pop().ok_or(Error::Config("no mesh level".into()))?;
            let mesh = match part {
                Part::Disc => &pair.disc,
                Part::Annulus => &pair.annulus,
            };
            with_output(cfg.output.as_deref(), out, |w| mesh.write_text(w))?;
            writeln!(
                log,
                "mesh-dump: {} nodes, {} triangles, h={:.4}",
                mesh.num_nodes(),
                mesh.num_triangles(),
                mesh.h()
            )?;
        }
    }
    Ok(())
}

/// Run the CLI with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(log, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    match execute(&cli, out, log) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_CONFIG
            }
        }
    }
}

/// Entry point of the binary.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    crate::exec::init_global_pool();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
