//! Direct sparse solve of the coupled system and P1 field evaluation.

use std::collections::HashMap;
use std::sync::Arc;

use faer::linalg::solvers::SolveCore;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use num_complex::Complex64;

use crate::assembly::{assemble_system, DofMap, FemSystem};
use crate::config::PhysicalConfig;
use crate::exec::Exec;
use crate::mesh::{signed_area, Mesh, MeshPair, Point};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Bound on `|A x - b| / |b|` checked after every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Barycentric slack when deciding whether a point lies in a triangle.
pub const LOCATE_TOL: f64 = 1e-10;

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solution vector with its relative residual.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub values: Vec<Complex64>,
    pub relative_residual: f64,
}

/// Solve `A x = b` by sparse LU with partial pivoting.
pub fn solve_linear(matrix: &CsrMatrix<Complex64>, rhs: &[Complex64]) -> Result<LinearSolution> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Dimension { expected: n, got: matrix.ncols() });
    }
    if rhs.len() != n {
        return Err(Error::Dimension { expected: n, got: rhs.len() });
    }
    if n == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    let triplets: Vec<Triplet<usize, usize, Complex64>> = matrix
        .iter()
        .map(|(row, col, val)| Triplet { row, col, val })
        .collect();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Singular(format!("cannot build sparse matrix: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::Singular(format!("{e:?}")))?;
    let mut x = Mat::<Complex64>::from_fn(n, 1, |i, _| rhs[i]);
    lu.solve_in_place_with_conj(Conj::No, x.as_mut());
    let values: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular("solution has non-finite entries".into()));
    }
    let ax = matrix.mul_vec(&values);
    let r: Vec<Complex64> = ax.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let b = norm2(rhs);
    let relative_residual = if b > 0.0 { norm2(&r) / b } else { norm2(&r) };
    if relative_residual > RESIDUAL_TOL {
        return Err(Error::Residual { residual: relative_residual, tolerance: RESIDUAL_TOL });
    }
    Ok(LinearSolution { values, relative_residual })
}

pub fn solve(system: &FemSystem) -> Result<LinearSolution> {
    solve_linear(&system.matrix, &system.rhs)
}

/// Triangle adjacency for walking point location.
#[derive(Debug, Clone)]
pub struct Locator {
    /// `neighbors[t][i]` shares the edge opposite local vertex `i`.
    neighbors: Vec<[Option<usize>; 3]>,
}

impl Locator {
    pub fn new(mesh: &Mesh) -> Self {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut neighbors = vec![[None; 3]; mesh.num_triangles()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some((s, j)) = owner.remove(&key) {
                    neighbors[t][i] = Some(s);
                    neighbors[s][j] = Some(t);
                } else {
                    owner.insert(key, (t, i));
                }
            }
        }
        Self { neighbors }
    }

    /// Containing triangle and barycentric coordinates. Walks from `start`,
    /// falling back to an exhaustive search.
    pub fn locate(&self, mesh: &Mesh, x: Point, start: usize) -> Option<(usize, [f64; 3])> {
        let nt = mesh.num_triangles();
        if nt == 0 {
            return None;
        }
        let mut t = start.min(nt - 1);
        for _ in 0..nt.min(4096) {
            let l = barycentric(mesh.triangle_points(t), x);
            let (worst, value) = (0..3)
                .map(|i| (i, l[i]))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, 0.0));
            if value >= -LOCATE_TOL {
                return Some((t, l));
            }
            match self.neighbors[t][worst] {
                Some(next) => t = next,
                None => break,
            }
        }
        (0..nt)
            .map(|t| (t, barycentric(mesh.triangle_points(t), x)))
            .max_by(|a, b| min3(a.1).total_cmp(&min3(b.1)))
            .filter(|(_, l)| min3(*l) >= -LOCATE_TOL)
    }
}

fn min3(l: [f64; 3]) -> f64 {
    l[0].min(l[1]).min(l[2])
}

/// Barycentric coordinates of `x` in triangle `p`.
pub fn barycentric(p: [Point; 3], x: Point) -> [f64; 3] {
    let a = signed_area(p);
    [
        signed_area([x, p[1], p[2]]) / a,
        signed_area([p[0], x, p[2]]) / a,
        signed_area([p[0], p[1], x]) / a,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Displacement,
    Pressure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue {
    Displacement([Complex64; 2]),
    Pressure(Complex64),
}

/// Nodal displacement on the disc and scattered pressure on the annulus.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pair: Arc<MeshPair>,
    config: PhysicalConfig,
    u: Vec<[Complex64; 2]>,
    p: Vec<Complex64>,
    relative_residual: f64,
    disc_locator: Arc<Locator>,
    annulus_locator: Arc<Locator>,
}

impl FieldSolution {
    /// Wrap nodal values; also used for interpolants of known fields.
    pub fn from_nodal(
        pair: Arc<MeshPair>,
        config: PhysicalConfig,
        u: Vec<[Complex64; 2]>,
        p: Vec<Complex64>,
    ) -> Result<Self> {
        if u.len() != pair.disc.num_nodes() {
            return Err(Error::Dimension { expected: pair.disc.num_nodes(), got: u.len() });
        }
        if p.len() != pair.annulus.num_nodes() {
            return Err(Error::Dimension { expected: pair.annulus.num_nodes(), got: p.len() });
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !u.iter().flatten().all(finite) || !p.iter().all(finite) {
            return Err(Error::Singular("non-finite nodal values".into()));
        }
        Ok(Self {
            disc_locator: Arc::new(Locator::new(&pair.disc)),
            annulus_locator: Arc::new(Locator::new(&pair.annulus)),
            pair,
            config,
            u,
            p,
            relative_residual: 0.0,
        })
    }

    /// Split a solved system vector into fields.
    pub fn from_system(
        pair: Arc<MeshPair>,
        config: PhysicalConfig,
        dofs: DofMap,
        solution: &LinearSolution,
    ) -> Result<Self> {
        if dofs != DofMap::new(&pair) || solution.values.len() != dofs.total() {
            return Err(Error::Dimension { expected: dofs.total(), got: solution.values.len() });
        }
        let v = &solution.values;
        let u = (0..dofs.disc_nodes).map(|i| [v[dofs.ux(i)], v[dofs.uy(i)]]).collect();
        let p = (0..dofs.annulus_nodes).map(|j| v[dofs.p(j)]).collect();
        let mut s = Self::from_nodal(pair, config, u, p)?;
        s.relative_residual = solution.relative_residual;
        Ok(s)
    }

    pub fn pair(&self) -> &MeshPair {
        &self.pair
    }

    pub fn shared_pair(&self) -> Arc<MeshPair> {
        Arc::clone(&self.pair)
    }

    pub fn config(&self) -> &PhysicalConfig {
        &self.config
    }

    pub fn u_nodal(&self) -> &[[Complex64; 2]] {
        &self.u
    }

    pub fn p_nodal(&self) -> &[Complex64] {
        &self.p
    }

    pub fn dofs(&self) -> usize {
        2 * self.u.len() + self.p.len()
    }

    /// Relative residual of the solve (0 for nodal wraps).
    pub fn relative_residual(&self) -> f64 {
        self.relative_residual
    }

    pub fn displacement_at(&self, x: Point) -> Result<[Complex64; 2]> {
        let mesh = &self.pair.disc;
        let (t, l) = self
            .disc_locator
            .locate(mesh, x, 0)
            .ok_or(Error::OutsideRegion { x: x[0], y: x[1], region: "disc" })?;
        let tri = mesh.triangles()[t];
        let mut out = [Complex64::default(); 2];
        for (i, &node) in tri.iter().enumerate() {
            out[0] += self.u[node][0] * l[i];
            out[1] += self.u[node][1] * l[i];
        }
        Ok(out)
    }

    pub fn pressure_at(&self, x: Point) -> Result<Complex64> {
        let mesh = &self.pair.annulus;
        let (t, l) = self
            .annulus_locator
            .locate(mesh, x, 0)
            .ok_or(Error::OutsideRegion { x: x[0], y: x[1], region: "annulus" })?;
        Ok(mesh.triangles()[t].iter().zip(l).map(|(&n, w)| self.p[n] * w).sum())
    }
}

pub fn evaluate_field(sol: &FieldSolution, point: Point, which: Which) -> Result<FieldValue> {
    Ok(match which {
        Which::Displacement => FieldValue::Displacement(sol.displacement_at(point)?),
        Which::Pressure => FieldValue::Pressure(sol.pressure_at(point)?),
    })
}

/// Assemble and solve on a mesh pair.
pub fn solve_problem(pair: Arc<MeshPair>, cfg: &PhysicalConfig, exec: Exec) -> Result<FieldSolution> {
    let system = assemble_system(&pair, cfg, exec)?;
    let x = solve(&system)?;
    FieldSolution::from_system(pair, *cfg, system.dofs, &x)
}
