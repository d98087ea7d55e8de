//! Error norms of a discrete solution against the series solution.

use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic::SeriesSolution;
use crate::assembly::p1_gradients;
use crate::config::PhysicalConfig;
use crate::exec::Exec;
use crate::mesh::{Mesh, MeshPair, Point};
use crate::quadrature::TRIANGLE7;
use crate::solve::FieldSolution;
use crate::{Error, Result};

/// Errors of one run. `err_h0` is the `L2` error over both fields and both
/// regions; `err_h1` adds the gradient seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub n_trunc: usize,
    pub k: f64,
    pub err_h0: f64,
    pub err_h1: f64,
    pub dofs: usize,
    pub seconds: f64,
}

/// Squared `L2` and gradient contributions of each region.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SquaredParts {
    pub disc_l2: f64,
    pub disc_grad: f64,
    pub annulus_l2: f64,
    pub annulus_grad: f64,
}

impl SquaredParts {
    pub fn h0(&self) -> f64 {
        (self.disc_l2 + self.annulus_l2).sqrt()
    }

    pub fn h1(&self) -> f64 {
        (self.disc_l2 + self.annulus_l2 + self.disc_grad + self.annulus_grad).sqrt()
    }
}

/// A known field pair to measure discrete solutions against.
pub trait ReferenceField: Sync {
    fn config(&self) -> &PhysicalConfig;
    /// Displacement and Jacobian `[i][j] = d_j u_i`.
    fn displacement_at(&self, x: Point) -> Result<([Complex64; 2], [[Complex64; 2]; 2])>;
    /// Pressure and Cartesian gradient.
    fn pressure_at(&self, x: Point) -> Result<(Complex64, [Complex64; 2])>;
}

impl ReferenceField for SeriesSolution {
    fn config(&self) -> &PhysicalConfig {
        SeriesSolution::config(self)
    }

    fn displacement_at(&self, x: Point) -> Result<([Complex64; 2], [[Complex64; 2]; 2])> {
        SeriesSolution::displacement_at(self, x)
    }

    fn pressure_at(&self, x: Point) -> Result<(Complex64, [Complex64; 2])> {
        SeriesSolution::pressure_at(self, x)
    }
}

fn same_physics(a: &PhysicalConfig, b: &PhysicalConfig) -> bool {
    a.lambda == b.lambda
        && a.mu == b.mu
        && a.rho == b.rho
        && a.rho_f == b.rho_f
        && a.omega == b.omega
        && a.k == b.k
        && a.r0 == b.r0
        && a.direction == b.direction
}

fn quadrature_point(p: [Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

/// Sum per-triangle pairs in mesh order.
fn accumulate(parts: Vec<Result<(f64, f64)>>) -> Result<(f64, f64)> {
    let mut acc = (0.0, 0.0);
    for p in parts {
        let (a, b) = p?;
        acc.0 += a;
        acc.1 += b;
    }
    Ok(acc)
}

fn disc_parts<F: ReferenceField>(mesh: &Mesh, u: &[[Complex64; 2]], exact: &F, exec: Exec) -> Result<(f64, f64)> {
    accumulate(exec.map_range(mesh.num_triangles(), |t| {
        let tri = mesh.triangles()[t];
        let p = mesh.triangle_points(t);
        let (g, area) = p1_gradients(p);
        let mut grad_h = [[Complex64::default(); 2]; 2];
        for (a, &node) in tri.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    grad_h[i][j] += u[node][i] * g[a][j];
                }
            }
        }
        let (mut l2, mut semi) = (0.0, 0.0);
        for &(l, w) in &TRIANGLE7 {
            let (ue, je) = exact.displacement_at(quadrature_point(p, l))?;
            for i in 0..2 {
                let uh: Complex64 = (0..3).map(|a| u[tri[a]][i] * l[a]).sum();
                l2 += w * (uh - ue[i]).norm_sqr();
                for j in 0..2 {
                    semi += w * (grad_h[i][j] - je[i][j]).norm_sqr();
                }
            }
        }
        Ok((area * l2, area * semi))
    }))
}

fn annulus_parts<F: ReferenceField>(mesh: &Mesh, p_nodal: &[Complex64], exact: &F, exec: Exec) -> Result<(f64, f64)> {
    accumulate(exec.map_range(mesh.num_triangles(), |t| {
        let tri = mesh.triangles()[t];
        let p = mesh.triangle_points(t);
        let (g, area) = p1_gradients(p);
        let mut grad_h = [Complex64::default(); 2];
        for (a, &node) in tri.iter().enumerate() {
            grad_h[0] += p_nodal[node] * g[a][0];
            grad_h[1] += p_nodal[node] * g[a][1];
        }
        let (mut l2, mut semi) = (0.0, 0.0);
        for &(l, w) in &TRIANGLE7 {
            let (pe, ge) = exact.pressure_at(quadrature_point(p, l))?;
            let ph: Complex64 = (0..3).map(|a| p_nodal[tri[a]] * l[a]).sum();
            l2 += w * (ph - pe).norm_sqr();
            semi += w * ((grad_h[0] - ge[0]).norm_sqr() + (grad_h[1] - ge[1]).norm_sqr());
        }
        Ok((area * l2, area * semi))
    }))
}

/// Region-wise squared error contributions with the 7-point rule.
pub fn squared_error_parts<F: ReferenceField>(sol: &FieldSolution, exact: &F, exec: Exec) -> Result<SquaredParts> {
    if !same_physics(sol.config(), exact.config()) {
        return Err(Error::Config("discrete and exact solutions use different parameters".into()));
    }
    let pair = sol.pair();
    let (disc_l2, disc_grad) = disc_parts(&pair.disc, sol.u_nodal(), exact, exec)?;
    let (annulus_l2, annulus_grad) = annulus_parts(&pair.annulus, sol.p_nodal(), exact, exec)?;
    Ok(SquaredParts { disc_l2, disc_grad, annulus_l2, annulus_grad })
}

pub fn error_norms<F: ReferenceField>(sol: &FieldSolution, exact: &F, exec: Exec) -> Result<ErrorReport> {
    let parts = squared_error_parts(sol, exact, exec)?;
    Ok(ErrorReport {
        h: sol.pair().h(),
        n_trunc: sol.config().n_trunc,
        k: sol.config().k,
        err_h0: parts.h0(),
        err_h1: parts.h1(),
        dofs: sol.dofs(),
        seconds: 0.0,
    })
}

/// Nodal interpolant of the series solution on a mesh pair.
pub fn interpolate_exact<F: ReferenceField>(pair: Arc<MeshPair>, exact: &F, exec: Exec) -> Result<FieldSolution> {
    let u = exec
        .map(pair.disc.nodes(), |&x| exact.displacement_at(x).map(|(u, _)| u))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let p = exec
        .map(pair.annulus.nodes(), |&x| exact.pressure_at(x).map(|(p, _)| p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    FieldSolution::from_nodal(pair, *exact.config(), u, p)
}

/// Zero discrete fields on the mesh pair.
pub fn zero_solution(pair: Arc<MeshPair>, cfg: &PhysicalConfig) -> Result<FieldSolution> {
    let u = vec![[Complex64::default(); 2]; pair.disc.num_nodes()];
    let p = vec![Complex64::default(); pair.annulus.num_nodes()];
    FieldSolution::from_nodal(pair, *cfg, u, p)
}
