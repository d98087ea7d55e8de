mod common;

use std::f64::consts::TAU;
use std::sync::Arc;

use common::gauss_on;
use dtnfem::analytic::SeriesSolution;
use dtnfem::config::PhysicalConfig;
use dtnfem::exec::Exec;
use dtnfem::harness::cli::{run, EXIT_CONFIG, EXIT_OK};
use dtnfem::harness::norms::squared_error_parts;
use dtnfem::harness::study::{plateau_onset, ConvergenceFit, CSV_HEADER, MAX_REFINEMENTS};
use dtnfem::harness::*;
use dtnfem::mesh::{MeshPair, Point};
use dtnfem::{Complex64, Error, Result};

/// Integrals of `|u|^2`, `|grad u|^2`, `|p|^2`, `|grad p|^2` over the
/// polygonal disc and annulus, in polar coordinates sector by sector.
fn polar_norms(exact: &SeriesSolution, inner_sides: usize, outer_sides: usize) -> [f64; 4] {
    let cfg = exact.config();
    // chord of the regular polygon: r(theta) = apothem / cos(theta - mid)
    let chord = |radius: f64, sides: usize, theta: f64| {
        let d = TAU / sides as f64;
        let mid = (theta / d).floor() * d + 0.5 * d;
        radius * (0.5 * d).cos() / (theta - mid).cos()
    };
    // split at the vertices of both polygons so every piece is smooth
    let mut cuts: Vec<f64> = (0..=inner_sides).map(|j| TAU * j as f64 / inner_sides as f64).collect();
    cuts.extend((0..=outer_sides).map(|j| TAU * j as f64 / outer_sides as f64));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut out = [0.0; 4];
    for w in cuts.windows(2) {
        for (th, wt) in gauss_on(12, w[0], w[1]) {
            let (c, s) = (th.cos(), th.sin());
            let at = |r: f64| -> Point { [r * c, r * s] };
            let r_in = chord(cfg.r0, inner_sides, th);
            let r_out = chord(cfg.r, outer_sides, th);
            for (r, wr) in gauss_on(20, 0.0, r_in) {
                let (u, j) = exact.displacement_at(at(r)).unwrap();
                out[0] += wt * wr * r * (u[0].norm_sqr() + u[1].norm_sqr());
                out[1] += wt * wr * r * j.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
            }
            for (r, wr) in gauss_on(20, r_in, r_out) {
                let (p, g) = exact.pressure_at(at(r)).unwrap();
                out[2] += wt * wr * r * p.norm_sqr();
                out[3] += wt * wr * r * (g[0].norm_sqr() + g[1].norm_sqr());
            }
        }
    }
    out
}

#[test]
fn zero_solution_norm_matches_polar_quadrature() {
    let cfg = PhysicalConfig::reference(1.0);
    let exact = SeriesSolution::solve_modes(&cfg, 40).unwrap();
    let pair = Arc::new(MeshPair::at_level(1.0, 2.0, 34, 2).unwrap());
    let sides = pair.disc.boundary_trace(dtnfem::mesh::Tag::Gamma).unwrap().len();
    let outer = pair.annulus.boundary_trace(dtnfem::mesh::Tag::GammaR).unwrap().len();
    let zero = zero_solution(pair, &cfg).unwrap();
    let parts = squared_error_parts(&zero, &exact, Exec::Sequential).unwrap();
    let oracle = polar_norms(&exact, sides, outer);
    let got = [parts.disc_l2, parts.disc_grad, parts.annulus_l2, parts.annulus_grad];
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-6 * o, "{g} vs {o}");
    }
    let h0 = (oracle[0] + oracle[2]).sqrt();
    let h1 = oracle.iter().sum::<f64>().sqrt();
    let report = error_norms(&zero, &exact, Exec::Sequential).unwrap();
    assert!((report.err_h0 - h0).abs() < 1e-6 * h0);
    assert!((report.err_h1 - h1).abs() < 1e-6 * h1);
}

#[test]
fn interpolation_error_orders() {
    let cfg = PhysicalConfig::reference(1.0);
    let exact = SeriesSolution::solve_modes(&cfg, 40).unwrap();
    let mut pair = MeshPair::build(1.0, 2.0, 34).unwrap();
    let mut rows = Vec::new();
    for _ in 0..4 {
        let interp = interpolate_exact(Arc::new(pair.clone()), &exact, Exec::Sequential).unwrap();
        rows.push(error_norms(&interp, &exact, Exec::Sequential).unwrap());
        pair = pair.refine();
    }
    let fit = ConvergenceFit::from_rows(1.0, &rows);
    let (h0, h1) = (fit.fitted_h0.unwrap(), fit.fitted_h1.unwrap());
    assert!((h0 - 2.0).abs() < 0.15, "{h0}");
    assert!((h1 - 1.0).abs() < 0.1, "{h1}");
}

/// Linear displacement and pressure fields.
struct Linear(PhysicalConfig);

impl ReferenceField for Linear {
    fn config(&self) -> &PhysicalConfig {
        &self.0
    }

    fn displacement_at(&self, x: Point) -> Result<([Complex64; 2], [[Complex64; 2]; 2])> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let jac = [[c(1.0, 0.5), c(-2.0, 0.0)], [c(0.0, 3.0), c(0.25, 0.0)]];
        let u = [c(0.1, 0.0) + jac[0][0] * x[0] + jac[0][1] * x[1], c(0.0, -0.2) + jac[1][0] * x[0] + jac[1][1] * x[1]];
        Ok((u, jac))
    }

    fn pressure_at(&self, x: Point) -> Result<(Complex64, [Complex64; 2])> {
        let g = [Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.0)];
        Ok((Complex64::new(1.0, 1.0) + g[0] * x[0] + g[1] * x[1], g))
    }
}

#[test]
fn linear_fields_have_no_error() {
    let linear = Linear(PhysicalConfig::reference(1.0));
    let pair = Arc::new(MeshPair::build(1.0, 2.0, 8).unwrap());
    let interp = interpolate_exact(pair, &linear, Exec::Sequential).unwrap();
    let r = error_norms(&interp, &linear, Exec::Sequential).unwrap();
    assert!(r.err_h0 < 1e-13 && r.err_h1 < 1e-13, "{r:?}");
}

#[test]
fn mismatched_physics_is_rejected() {
    let exact = SeriesSolution::solve_modes(&PhysicalConfig::reference(2.0), 30).unwrap();
    let pair = Arc::new(MeshPair::build(1.0, 2.0, 8).unwrap());
    let zero = zero_solution(pair, &PhysicalConfig::reference(1.0)).unwrap();
    assert!(matches!(error_norms(&zero, &exact, Exec::Sequential), Err(Error::Config(_))));
}

#[test]
fn reruns_are_reproducible() {
    let cfg = StudyConfig { levels: 2, ..StudyConfig::default() };
    let a = convergence_study(&cfg).unwrap();
    let b = convergence_study(&StudyConfig { exec: Exec::Parallel, ..cfg }).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.err_h0 - y.err_h0).abs() <= 1e-12 * x.err_h0);
        assert!((x.err_h1 - y.err_h1).abs() <= 1e-12 * x.err_h1);
        assert_eq!((x.h, x.dofs, x.n_trunc), (y.h, y.dofs, y.n_trunc));
    }
}

#[test]
fn study_config_limits() {
    let ok = StudyConfig::default();
    assert!(ok.validate().is_ok());
    let deep = StudyConfig { levels: MAX_REFINEMENTS + 2, ..StudyConfig::default() };
    assert!(matches!(deep.validate(), Err(Error::Config(_))));
    for bad in [
        StudyConfig { levels: 0, ..StudyConfig::default() },
        StudyConfig { n_list: vec![], ..StudyConfig::default() },
        StudyConfig { k_list: vec![], ..StudyConfig::default() },
        StudyConfig { k_list: vec![-1.0], ..StudyConfig::default() },
    ] {
        assert!(bad.validate().is_err());
    }
    assert_eq!(ok.mesh_levels().unwrap().len(), 3);
}

#[test]
fn plateau_onset_rules() {
    assert_eq!(plateau_onset(&[]), 0);
    assert_eq!(plateau_onset(&[(1, 1.0), (2, 0.5), (3, 0.104), (4, 0.1)]), 3);
    assert_eq!(plateau_onset(&[(1, 1.0), (2, 0.5), (3, 0.11), (4, 0.1)]), 4);
    assert_eq!(plateau_onset(&[(1, 0.1), (2, 0.1)]), 1);
    assert_eq!(plateau_onset(&[(5, 0.3)]), 5);
}

#[test]
fn csv_layout() {
    let row = ErrorReport { h: 0.5, n_trunc: 3, k: 2.0, err_h0: 0.25, err_h1: 1.5, dofs: 10, seconds: 0.1 };
    let mut buf = Vec::new();
    write_csv(&mut buf, &[row], &["# note".to_string()]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 7);
    assert_eq!(fields[1], "3");
    assert_eq!(fields[4].parse::<f64>().unwrap(), 0.25);
    assert_eq!(lines[2], "# note");
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut log = Vec::new();
    let mut full = vec!["dtnfem"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut log);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(log).unwrap())
}

#[test]
fn cli_convergence_table() {
    let (code, out, log) = cli(&["convergence", "--k", "1", "--levels", "3"]);
    assert_eq!(code, EXIT_OK, "{log}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(out.contains("fitted_order_h0="));
    assert_eq!(log.lines().filter(|l| l.starts_with("convergence:")).count(), 3);
}

#[test]
fn cli_oracle_prints_values() {
    let (code, out, _) = cli(&["oracle", "--point", "1.5", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("p(1.5, 0) = "), "{out}");
    let exact = SeriesSolution::solve_modes(&PhysicalConfig::reference(1.0), 30).unwrap();
    let p = exact.eval_pressure(1.5, 0.0, false).unwrap().value;
    assert!(out.contains(&format!("{:.12e}", p.re)));
    let (code, out, _) = cli(&["oracle", "--point", "-0.5", "0.2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("u(-0.5, 0.2) = ("));
}

#[test]
fn cli_reports_configuration_errors() {
    let missing = "/nonexistent/dtnfem/run.cfg";
    let (code, _, log) = cli(&["--config", missing, "solve"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(log.contains(missing), "{log}");
    let (code, _, _) = cli(&["solve", "--bogus"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = cli(&["convergence", "--levels", "20"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("truncation"));
}

#[test]
fn cli_config_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let csv = dir.path().join("out.csv");
    std::fs::write(&cfg_path, format!("# small run\nk = 2\nn_angular = 16\noutput = {}\n", csv.display())).unwrap();
    let (code, out, log) = cli(&["--config", cfg_path.to_str().unwrap(), "solve", "--level", "0"]);
    assert_eq!(code, EXIT_OK, "{log}");
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().contains(",20,2,"));

    let dump = dir.path().join("system.txt");
    let (code, _, _) = cli(&["--n-angular", "8", "solve", "--dump-system", dump.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&dump).unwrap();
    let header: Vec<usize> = text.lines().next().unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(text.lines().count(), header[1] + 1);

    let (code, out, _) = cli(&["--n-angular", "8", "mesh-dump", "--part", "disc"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("nodes "));
}

#[test]
fn cli_truncation_table() {
    let (code, out, log) = cli(&["--n-angular", "16", "truncation", "--levels", "2", "--n-list", "1,2,4"]);
    assert_eq!(code, EXIT_OK, "{log}");
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
    assert_eq!(out.lines().filter(|l| l.contains("N*=")).count(), 2);
}
