//! Mesh-refinement and truncation-order sweeps.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::analytic::{default_mode_budget, SeriesSolution};
use crate::assembly::{assemble_parts, system_from_parts, DofMap};
use crate::config::PhysicalConfig;
use crate::dtn::{fit_slope, DtnOperator};
use crate::exec::Exec;
use crate::mesh::{MeshPair, Tag, DEFAULT_N_ANGULAR};
use crate::solve::{solve, FieldSolution};
use crate::{Error, Result};

use super::norms::{error_norms, ErrorReport};

/// Largest number of uniform refinements a study may request.
pub const MAX_REFINEMENTS: usize = 7;

/// Relative distance to the last error that counts as the plateau.
pub const PLATEAU_TOL: f64 = 0.05;

pub const CSV_HEADER: &str = "h,N,k,dofs,err_h0,err_h1,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub physical: PhysicalConfig,
    /// Number of mesh levels; level 0 is the coarse mesh.
    pub levels: usize,
    /// Truncation orders of the truncation sweep.
    pub n_list: Vec<usize>,
    pub k_list: Vec<f64>,
    pub n_angular: usize,
    /// Mode budget of the series solution (default from the wave number).
    pub modes: Option<usize>,
    pub output: Option<PathBuf>,
    pub exec: Exec,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            physical: PhysicalConfig::reference(1.0),
            levels: 3,
            n_list: (1..=20).collect(),
            k_list: vec![1.0],
            n_angular: DEFAULT_N_ANGULAR,
            modes: None,
            output: None,
            exec: Exec::Sequential,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if self.levels - 1 > MAX_REFINEMENTS {
            return Err(Error::Config(format!(
                "{} refinements requested, at most {MAX_REFINEMENTS} allowed",
                self.levels - 1
            )));
        }
        if self.n_list.is_empty() || self.k_list.is_empty() {
            return Err(Error::Config("sweep lists must not be empty".into()));
        }
        for &k in &self.k_list {
            self.physical_for(k).validate()?;
        }
        Ok(())
    }

    pub fn physical_for(&self, k: f64) -> PhysicalConfig {
        PhysicalConfig { k, ..self.physical }
    }

    pub fn exact_for(&self, k: f64) -> Result<SeriesSolution> {
        let cfg = self.physical_for(k);
        SeriesSolution::solve_modes(&cfg, self.modes.unwrap_or_else(|| default_mode_budget(&cfg)))
    }

    pub fn mesh_levels(&self) -> Result<Vec<Arc<MeshPair>>> {
        let mut pair = MeshPair::build(self.physical.r0, self.physical.r, self.n_angular)?;
        let mut out = Vec::with_capacity(self.levels);
        for level in 0..self.levels {
            if level > 0 {
                pair = pair.refine();
            }
            out.push(Arc::new(pair.clone()));
        }
        Ok(out)
    }
}

/// Assemble, solve and measure one configuration.
pub fn run_once(
    pair: Arc<MeshPair>,
    cfg: &PhysicalConfig,
    exact: &SeriesSolution,
    exec: Exec,
) -> Result<(ErrorReport, FieldSolution)> {
    let start = Instant::now();
    let sol = crate::solve::solve_problem(pair, cfg, exec)?;
    let mut report = error_norms(&sol, exact, exec)?;
    report.seconds = start.elapsed().as_secs_f64();
    Ok((report, sol))
}

/// Observed orders between successive rows and the least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub k: f64,
    pub orders_h0: Vec<f64>,
    pub orders_h1: Vec<f64>,
    pub fitted_h0: Option<f64>,
    pub fitted_h1: Option<f64>,
}

impl ConvergenceFit {
    pub fn from_rows(k: f64, rows: &[ErrorReport]) -> Self {
        let successive = |e: fn(&ErrorReport) -> f64| {
            rows.windows(2)
                .map(|w| (e(&w[0]) / e(&w[1])).ln() / (w[0].h / w[1].h).ln())
                .collect::<Vec<_>>()
        };
        let fit = |e: fn(&ErrorReport) -> f64| {
            if rows.len() < 2 {
                return None;
            }
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.ln(), e(r).ln())).collect();
            fit_slope(&pts)
        };
        Self {
            k,
            orders_h0: successive(|r| r.err_h0),
            orders_h1: successive(|r| r.err_h1),
            fitted_h0: fit(|r| r.err_h0),
            fitted_h1: fit(|r| r.err_h1),
        }
    }

    fn footer(&self) -> Vec<String> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        vec![
            format!("# k={} orders_h0: {}", self.k, list(&self.orders_h0)),
            format!("# k={} orders_h1: {}", self.k, list(&self.orders_h1)),
            format!("# k={} fitted_order_h0={} fitted_order_h1={}", self.k, opt(self.fitted_h0), opt(self.fitted_h1)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
    pub fits: Vec<ConvergenceFit>,
    pub max_relative_residual: f64,
}

impl ConvergenceTable {
    pub fn footer(&self) -> Vec<String> {
        self.fits.iter().flat_map(ConvergenceFit::footer).collect()
    }
}

/// Refinement sweep at the configured truncation order, for every `k`.
pub fn convergence_study(cfg: &StudyConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let meshes = cfg.mesh_levels()?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut max_res = 0.0f64;
    for &k in &cfg.k_list {
        let phys = cfg.physical_for(k);
        let exact = cfg.exact_for(k)?;
        let mut these = Vec::with_capacity(meshes.len());
        for pair in &meshes {
            let (report, sol) = run_once(Arc::clone(pair), &phys, &exact, cfg.exec)?;
            max_res = max_res.max(sol.relative_residual());
            these.push(report);
        }
        fits.push(ConvergenceFit::from_rows(k, &these));
        rows.extend(these);
    }
    Ok(ConvergenceTable { rows, fits, max_relative_residual: max_res })
}

/// `L2` error against truncation order on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCurve {
    pub k: f64,
    pub level: usize,
    pub h: f64,
    pub rows: Vec<ErrorReport>,
    /// Smallest `N` whose error is within 5% of the error at the largest `N`.
    pub n_star: usize,
}

impl TruncationCurve {
    pub fn errors(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n_trunc, r.err_h0)).collect()
    }

    pub fn plateau(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.err_h0)
    }
}

pub fn plateau_onset(errors: &[(usize, f64)]) -> usize {
    let Some(&(n_last, last)) = errors.last() else {
        return 0;
    };
    errors
        .iter()
        .find(|(_, e)| (e - last).abs() <= PLATEAU_TOL * last)
        .map_or(n_last, |&(n, _)| n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationTable {
    pub curves: Vec<TruncationCurve>,
    pub max_relative_residual: f64,
}

impl TruncationTable {
    pub fn rows(&self) -> Vec<ErrorReport> {
        self.curves.iter().flat_map(|c| c.rows.iter().copied()).collect()
    }

    pub fn footer(&self) -> Vec<String> {
        self.curves
            .iter()
            .map(|c| format!("# k={} h={:.4} N*={} plateau_h0={:.6e}", c.k, c.h, c.n_star, c.plateau()))
            .collect()
    }
}

/// Truncation sweep over `n_list` for every `k` and mesh level. The
/// truncation-independent blocks are assembled once per mesh.
pub fn truncation_study(cfg: &StudyConfig) -> Result<TruncationTable> {
    cfg.validate()?;
    let meshes = cfg.mesh_levels()?;
    let mut curves = Vec::new();
    let mut max_res = 0.0f64;
    for &k in &cfg.k_list {
        let exact = cfg.exact_for(k)?;
        for (level, pair) in meshes.iter().enumerate() {
            let base = cfg.physical_for(k);
            let mut parts = assemble_parts(pair, &base, cfg.exec)?;
            let trace = pair.annulus.boundary_trace(Tag::GammaR)?;
            let radius = pair.annulus.radius(Tag::GammaR).ok_or(Error::MissingTag(Tag::GammaR))?;
            let mut rows = Vec::with_capacity(cfg.n_list.len());
            for &n in &cfg.n_list {
                let start = Instant::now();
                let phys = base.with_truncation(n);
                phys.validate()?;
                parts.dtn = DtnOperator::new(&trace, k, radius, n)?.matrix();
                let system = system_from_parts(&parts, DofMap::new(pair));
                let x = solve(&system)?;
                max_res = max_res.max(x.relative_residual);
                let sol = FieldSolution::from_system(Arc::clone(pair), phys, system.dofs, &x)?;
                let mut report = error_norms(&sol, &exact, cfg.exec)?;
                report.seconds = start.elapsed().as_secs_f64();
                rows.push(report);
            }
            let errors: Vec<(usize, f64)> = rows.iter().map(|r| (r.n_trunc, r.err_h0)).collect();
            curves.push(TruncationCurve {
                k,
                level,
                h: pair.h(),
                n_star: plateau_onset(&errors),
                rows,
            });
        }
    }
    Ok(TruncationTable { curves, max_relative_residual: max_res })
}

pub fn write_csv<W: Write>(mut w: W, rows: &[ErrorReport], footer: &[String]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:.6},{},{},{},{:.12e},{:.12e},{:.6}",
            r.h, r.n_trunc, r.k, r.dofs, r.err_h0, r.err_h1, r.seconds
        )?;
    }
    for line in footer {
        writeln!(w, "{line}")?;
    }
    Ok(())
}
