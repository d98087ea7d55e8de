//! P1 assembly of the truncated coupled problem.
//!
//! Unknowns are the two displacement components on every disc node followed
//! by the scattered pressure on every annulus node. Interface nodes carry
//! both, one copy from each mesh, and the two fields only meet through the
//! interface integrals:
//!
//! ```text
//! [ A1   C4      ] [u]   [l_u]
//! [ C3   A2 - B  ] [p] = [l_p]
//! ```
//!
//! `A1` is the elastic form, `A2` the Helmholtz form, `C3`/`C4` the normal
//! velocity and pressure-load couplings on the interface, and `B` the
//! truncated DtN matrix on the outer trace. `n` is the outward normal of the
//! disc, taken edge by edge on the polygonal interface.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;

use crate::config::PhysicalConfig;
use crate::dtn::{DtnMatrix, DtnOperator};
use crate::exec::Exec;
use crate::mesh::{signed_area, Mesh, MeshPair, Point, Region, Tag};
use crate::quadrature::GAUSS3_EDGE;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

const CONFORMITY_TOL: f64 = 1e-12;

/// Global numbering of the coupled unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub disc_nodes: usize,
    pub annulus_nodes: usize,
}

impl DofMap {
    pub fn new(pair: &MeshPair) -> Self {
        Self {
            disc_nodes: pair.disc.num_nodes(),
            annulus_nodes: pair.annulus.num_nodes(),
        }
    }

    pub fn ux(&self, node: usize) -> usize {
        2 * node
    }

    pub fn uy(&self, node: usize) -> usize {
        2 * node + 1
    }

    pub fn p(&self, node: usize) -> usize {
        2 * self.disc_nodes + node
    }

    pub fn displacement_dofs(&self) -> usize {
        2 * self.disc_nodes
    }

    pub fn total(&self) -> usize {
        2 * self.disc_nodes + self.annulus_nodes
    }
}

/// Gradients of the three P1 hat functions and the triangle area.
pub(crate) fn p1_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = signed_area(p);
    let inv = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) * inv, (p[k][0] - p[j][0]) * inv];
    }
    (g, area)
}

fn check_area(index: usize, p: [Point; 3]) -> Result<()> {
    let area = signed_area(p);
    if area > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateTriangle { index, area })
    }
}

/// Element matrix of the elastic form for local dofs
/// `(ux0, uy0, ux1, uy1, ux2, uy2)`: plane-strain stiffness
/// `area * B^T D B` minus `rho omega^2` times the exact P1 mass.
pub fn elastic_element(p: [Point; 3], cfg: &PhysicalConfig) -> [[f64; 6]; 6] {
    let (g, area) = p1_gradients(p);
    let (lam, mu) = (cfg.lambda, cfg.mu);
    let d = [[lam + 2.0 * mu, lam, 0.0], [lam, lam + 2.0 * mu, 0.0], [0.0, 0.0, mu]];
    // strain-displacement rows: eps_xx, eps_yy, gamma_xy
    let mut b = [[0.0; 6]; 3];
    for i in 0..3 {
        b[0][2 * i] = g[i][0];
        b[1][2 * i + 1] = g[i][1];
        b[2][2 * i] = g[i][1];
        b[2][2 * i + 1] = g[i][0];
    }
    let mass = cfg.rho * cfg.omega * cfg.omega * area / 12.0;
    let mut ke = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in r..6 {
            let mut s = 0.0;
            for a in 0..3 {
                for e in 0..3 {
                    s += b[a][r] * d[a][e] * b[e][c];
                }
            }
            ke[r][c] = area * s;
            if r % 2 == c % 2 {
                ke[r][c] -= mass * if r == c { 2.0 } else { 1.0 };
            }
            ke[c][r] = ke[r][c];
        }
    }
    ke
}

/// Element matrix of `grad p . grad q - k^2 p q`.
pub fn helmholtz_element(p: [Point; 3], k: f64) -> [[f64; 3]; 3] {
    let (g, area) = p1_gradients(p);
    let mass = k * k * area / 12.0;
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])
                - mass * if i == j { 2.0 } else { 1.0 };
        }
    }
    ke
}

/// Elastic block over the disc mesh, indexed by displacement dofs
/// `2 * node + component`.
pub fn assemble_elastic(disc: &Mesh, cfg: &PhysicalConfig, exec: Exec) -> Result<CsrMatrix<f64>> {
    let locals = exec.map_range(disc.num_triangles(), |t| {
        let p = disc.triangle_points(t);
        check_area(t, p).map(|_| elastic_element(p, cfg))
    });
    let mut triplets = Vec::with_capacity(36 * locals.len());
    for (t, ke) in locals.into_iter().enumerate() {
        let ke = ke?;
        let tri = disc.triangles()[t];
        for r in 0..6 {
            for c in 0..6 {
                triplets.push((2 * tri[r / 2] + r % 2, 2 * tri[c / 2] + c % 2, ke[r][c]));
            }
        }
    }
    let n = 2 * disc.num_nodes();
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

/// Helmholtz block over the annulus mesh, indexed by node.
pub fn assemble_helmholtz(annulus: &Mesh, cfg: &PhysicalConfig, exec: Exec) -> Result<CsrMatrix<f64>> {
    assemble_scalar(annulus, exec, |p| helmholtz_element(p, cfg.k))
}

/// P1 mass matrix `int p q`.
pub fn assemble_mass(mesh: &Mesh, exec: Exec) -> Result<CsrMatrix<f64>> {
    assemble_scalar(mesh, exec, |p| {
        let area = signed_area(p);
        let mut m = [[area / 12.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = area / 6.0;
        }
        m
    })
}

/// P1 stiffness matrix `int grad p . grad q`.
pub fn assemble_stiffness(mesh: &Mesh, exec: Exec) -> Result<CsrMatrix<f64>> {
    assemble_scalar(mesh, exec, |p| helmholtz_element(p, 0.0))
}

fn assemble_scalar<F>(mesh: &Mesh, exec: Exec, element: F) -> Result<CsrMatrix<f64>>
where
    F: Fn([Point; 3]) -> [[f64; 3]; 3] + Sync + Send,
{
    let locals = exec.map_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        check_area(t, p).map(|_| element(p))
    });
    let mut triplets = Vec::with_capacity(9 * locals.len());
    for (t, ke) in locals.into_iter().enumerate() {
        let ke = ke?;
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((tri[i], tri[j], ke[i][j]));
            }
        }
    }
    let n = mesh.num_nodes();
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

/// Interface edge of the disc with the matching annulus nodes.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceEdge {
    pub disc: [usize; 2],
    pub annulus: [usize; 2],
    pub length: f64,
    /// Outward unit normal of the disc.
    pub normal: [f64; 2],
}

/// Pair the interface nodes of both meshes and list the interface edges.
pub fn interface_edges(disc: &Mesh, annulus: &Mesh) -> Result<Vec<InterfaceEdge>> {
    if disc.region() != Region::Disc || annulus.region() != Region::Annulus {
        return Err(Error::NonConforming("expected a disc mesh and an annulus mesh".into()));
    }
    let td = disc.boundary_trace(Tag::Gamma)?;
    let ta = annulus.boundary_trace(Tag::Gamma)?;
    if td.len() != ta.len() {
        return Err(Error::NonConforming(format!(
            "{} disc interface nodes vs {} annulus interface nodes",
            td.len(),
            ta.len()
        )));
    }
    let scale = td.radius.max(1.0);
    let mut to_annulus = HashMap::with_capacity(td.len());
    for (&i, &j) in td.node_indices.iter().zip(&ta.node_indices) {
        let (p, q) = (disc.nodes()[i], annulus.nodes()[j]);
        if (p[0] - q[0]).abs().max((p[1] - q[1]).abs()) > CONFORMITY_TOL * scale {
            return Err(Error::NonConforming(format!(
                "disc node {i} at {p:?} vs annulus node {j} at {q:?}"
            )));
        }
        to_annulus.insert(i, j);
    }
    disc.boundary_edges()
        .iter()
        .filter(|e| e.tag == Tag::Gamma)
        .map(|e| {
            let [a, b] = e.nodes;
            let (pa, pb) = (disc.nodes()[a], disc.nodes()[b]);
            let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
            let length = dx.hypot(dy);
            let mut normal = [dy / length, -dx / length];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            if normal[0] * mid[0] + normal[1] * mid[1] < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            Ok(InterfaceEdge {
                disc: [a, b],
                annulus: [to_annulus[&a], to_annulus[&b]],
                length,
                normal,
            })
        })
        .collect()
}

/// Interface coupling blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingBlocks {
    /// Rows: pressure nodes; columns: displacement dofs. Discretises
    /// `rho_f omega^2 int (u . n) q`.
    pub c3: CsrMatrix<f64>,
    /// Rows: displacement dofs; columns: pressure nodes. Discretises
    /// `int (n p) . v`.
    pub c4: CsrMatrix<f64>,
}

pub fn assemble_coupling(disc: &Mesh, annulus: &Mesh, cfg: &PhysicalConfig) -> Result<CouplingBlocks> {
    let edges = interface_edges(disc, annulus)?;
    let mut triplets = Vec::with_capacity(8 * edges.len());
    for e in &edges {
        for (a, &da) in e.disc.iter().enumerate() {
            for (b, &pb) in e.annulus.iter().enumerate() {
                let m = e.length / if a == b { 3.0 } else { 6.0 };
                triplets.push((2 * da, pb, e.normal[0] * m));
                triplets.push((2 * da + 1, pb, e.normal[1] * m));
            }
        }
    }
    let c4 = CsrMatrix::from_triplets(2 * disc.num_nodes(), annulus.num_nodes(), &triplets);
    let c3 = c4.transpose().scale(cfg.rho_f * cfg.omega * cfg.omega);
    Ok(CouplingBlocks { c3, c4 })
}

/// Incident-wave load, split by field.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    /// `-int n p_inc . v` on displacement dofs.
    pub u: Vec<Complex64>,
    /// `int (d p_inc / dn) q` on pressure nodes.
    pub p: Vec<Complex64>,
}

/// Plane wave `e^{i k x . d}` and its derivative along `normal`.
pub fn incident(cfg: &PhysicalConfig, x: Point, normal: [f64; 2]) -> (Complex64, Complex64) {
    let d = cfg.direction;
    let value = Complex64::from_polar(1.0, cfg.k * (x[0] * d[0] + x[1] * d[1]));
    let dn = Complex64::new(0.0, cfg.k * (d[0] * normal[0] + d[1] * normal[1])) * value;
    (value, dn)
}

/// Load with 3-point Gauss quadrature on every interface edge.
pub fn assemble_load(disc: &Mesh, annulus: &Mesh, cfg: &PhysicalConfig) -> Result<LoadVector> {
    let edges = interface_edges(disc, annulus)?;
    let mut u = vec![Complex64::default(); 2 * disc.num_nodes()];
    let mut p = vec![Complex64::default(); annulus.num_nodes()];
    for e in &edges {
        let (pa, pb) = (disc.nodes()[e.disc[0]], disc.nodes()[e.disc[1]]);
        for &(t, w) in &GAUSS3_EDGE {
            let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
            let (value, dn) = incident(cfg, x, e.normal);
            for (shape, (&dn_node, &pn_node)) in [1.0 - t, t].into_iter().zip(e.disc.iter().zip(&e.annulus)) {
                let wl = w * e.length * shape;
                p[pn_node] += dn * wl;
                u[2 * dn_node] -= value * (wl * e.normal[0]);
                u[2 * dn_node + 1] -= value * (wl * e.normal[1]);
            }
        }
    }
    Ok(LoadVector { u, p })
}

/// Assembled coupled system.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub matrix: CsrMatrix<Complex64>,
    pub rhs: Vec<Complex64>,
    pub dofs: DofMap,
}

impl FemSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Coordinate dump: header `dim nnz`, then `i j re im` per entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.dim(), self.matrix.nnz())?;
        for (i, j, v) in self.matrix.iter() {
            writeln!(w, "{i} {j} {:.16e} {:.16e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// All pieces of the coupled system, kept for inspection.
#[derive(Debug, Clone)]
pub struct SystemParts {
    pub elastic: CsrMatrix<f64>,
    pub helmholtz: CsrMatrix<f64>,
    pub coupling: CouplingBlocks,
    pub dtn: DtnMatrix,
    /// Annulus node of every outer-trace entry of `dtn`.
    pub dtn_nodes: Vec<usize>,
    pub load: LoadVector,
}

pub fn assemble_parts(pair: &MeshPair, cfg: &PhysicalConfig, exec: Exec) -> Result<SystemParts> {
    cfg.validate()?;
    let trace = pair.annulus.boundary_trace(Tag::GammaR)?;
    let radius = pair.annulus.radius(Tag::GammaR).ok_or(Error::MissingTag(Tag::GammaR))?;
    let dtn = DtnOperator::new(&trace, cfg.k, radius, cfg.n_trunc)?.matrix();
    Ok(SystemParts {
        elastic: assemble_elastic(&pair.disc, cfg, exec)?,
        helmholtz: assemble_helmholtz(&pair.annulus, cfg, exec)?,
        coupling: assemble_coupling(&pair.disc, &pair.annulus, cfg)?,
        dtn,
        dtn_nodes: trace.node_indices,
        load: assemble_load(&pair.disc, &pair.annulus, cfg)?,
    })
}

/// Assemble the full complex system for the mesh pair.
pub fn assemble_system(pair: &MeshPair, cfg: &PhysicalConfig, exec: Exec) -> Result<FemSystem> {
    let parts = assemble_parts(pair, cfg, exec)?;
    Ok(system_from_parts(&parts, DofMap::new(pair)))
}

pub fn system_from_parts(parts: &SystemParts, dofs: DofMap) -> FemSystem {
    let off = dofs.displacement_dofs();
    let m = parts.dtn.dim();
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(
        parts.elastic.nnz()
            + parts.helmholtz.nnz()
            + parts.coupling.c3.nnz()
            + parts.coupling.c4.nnz()
            + m * m,
    );
    let re = |v: f64| Complex64::new(v, 0.0);
    triplets.extend(parts.elastic.iter().map(|(r, c, v)| (r, c, re(v))));
    triplets.extend(parts.coupling.c4.iter().map(|(r, c, v)| (r, off + c, re(v))));
    triplets.extend(parts.coupling.c3.iter().map(|(r, c, v)| (off + r, c, re(v))));
    triplets.extend(parts.helmholtz.iter().map(|(r, c, v)| (off + r, off + c, re(v))));
    for (i, &ni) in parts.dtn_nodes.iter().enumerate() {
        for (j, &nj) in parts.dtn_nodes.iter().enumerate() {
            triplets.push((off + ni, off + nj, -parts.dtn.get(i, j)));
        }
    }
    let n = dofs.total();
    let mut rhs = parts.load.u.clone();
    rhs.extend_from_slice(&parts.load.p);
    FemSystem {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
        rhs,
        dofs,
    }
}
