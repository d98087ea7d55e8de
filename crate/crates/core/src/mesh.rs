//! Structured polar triangulations of the solid disc and the fluid annulus.
//!
//! Both meshes are built from concentric rings of nodes; consecutive rings
//! are stitched by walking both rings in angle. The disc uses ring node
//! counts proportional to the radius so element sizes stay even; the annulus
//! keeps the interface count on every ring, so each ring pair becomes a band
//! of quadrilaterals split in two. Boundary nodes always lie on their circle,
//! and the interface nodes of a disc/annulus pair built with the same
//! angular resolution have bit-identical coordinates.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Default interface resolution for the coarse `R0 = 1`, `R = 2` pair
/// (mesh size close to 0.43).
pub const DEFAULT_N_ANGULAR: usize = 34;

const ON_CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    /// Solid-fluid interface `|x| = R0`.
    Gamma,
    /// Artificial boundary `|x| = R`.
    GammaR,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Gamma => "GAMMA",
            Tag::GammaR => "GAMMA_R",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "GAMMA" => Some(Tag::Gamma),
            "GAMMA_R" => Some(Tag::GammaR),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Disc,
    Annulus,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Disc => "disc",
            Region::Annulus => "annulus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    region: Region,
    gamma_radius: f64,
    gamma_r_radius: Option<f64>,
}

/// Counts used for the conformity and Euler checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCensus {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub interior_edges: usize,
    pub boundary_edges: usize,
    /// Edges touched by a number of triangles other than 1 or 2.
    pub bad_edges: usize,
}

impl EdgeCensus {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.triangles as i64
    }
}

impl Mesh {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Radius of the circle carrying the edges tagged `tag`.
    pub fn radius(&self, tag: Tag) -> Option<f64> {
        match tag {
            Tag::Gamma => Some(self.gamma_radius),
            Tag::GammaR => self.gamma_r_radius,
        }
    }

    pub fn has_tag(&self, tag: Tag) -> bool {
        self.boundary_edges.iter().any(|e| e.tag == tag)
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        signed_area(self.triangle_points(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Mesh size: the longest triangle edge.
    pub fn h(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Total length of the boundary loop tagged `tag`.
    pub fn perimeter(&self, tag: Tag) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| dist(self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]))
            .sum()
    }

    pub fn edge_census(&self) -> EdgeCensus {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &self.triangles {
            for (p, q) in [(a, b), (b, c), (c, a)] {
                *count.entry(edge_key(p, q)).or_default() += 1;
            }
        }
        let interior_edges = count.values().filter(|&&c| c == 2).count();
        let boundary_edges = count.values().filter(|&&c| c == 1).count();
        EdgeCensus {
            vertices: self.nodes.len(),
            edges: count.len(),
            triangles: self.triangles.len(),
            interior_edges,
            boundary_edges,
            bad_edges: count.len() - interior_edges - boundary_edges,
        }
    }

    /// Check every structural invariant: orientation, boundary placement,
    /// closed boundary loops and conformity.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            let area = self.signed_area(t);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
        }
        for e in &self.boundary_edges {
            let radius = self
                .radius(e.tag)
                .ok_or(Error::MissingTag(e.tag))?;
            for &n in &e.nodes {
                let r = norm(self.nodes[n]);
                if (r - radius).abs() > ON_CIRCLE_TOL * radius {
                    return Err(Error::BadTrace(format!(
                        "node {n} of a {} edge has radius {r}, expected {radius}",
                        e.tag.as_str()
                    )));
                }
            }
        }
        for tag in [Tag::Gamma, Tag::GammaR] {
            let mut degree: HashMap<usize, usize> = HashMap::new();
            for e in self.boundary_edges.iter().filter(|e| e.tag == tag) {
                for &n in &e.nodes {
                    *degree.entry(n).or_default() += 1;
                }
            }
            if degree.values().any(|&d| d != 2) {
                return Err(Error::BadTrace(format!(
                    "{} edges do not form closed loops",
                    tag.as_str()
                )));
            }
        }
        let census = self.edge_census();
        if census.bad_edges > 0 || census.boundary_edges != self.boundary_edges.len() {
            return Err(Error::BadTrace(format!(
                "non-conforming mesh: {} edges with >2 triangles, {} open edges vs {} tagged",
                census.bad_edges,
                census.boundary_edges,
                self.boundary_edges.len()
            )));
        }
        Ok(())
    }

    /// Ordered trace of the boundary loop tagged `tag`, counter-clockwise
    /// from angle 0.
    pub fn boundary_trace(&self, tag: Tag) -> Result<BoundaryTrace> {
        let edges: Vec<_> = self.boundary_edges.iter().filter(|e| e.tag == tag).collect();
        if edges.is_empty() {
            return Err(Error::MissingTag(tag));
        }
        let mut nodes: Vec<usize> = edges.iter().flat_map(|e| e.nodes).collect();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() != edges.len() {
            return Err(Error::BadTrace(format!(
                "{} nodes on {} {} edges",
                nodes.len(),
                edges.len(),
                tag.as_str()
            )));
        }
        let mut entries: Vec<(f64, usize)> = nodes
            .into_iter()
            .map(|n| (polar_angle(self.nodes[n]), n))
            .collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0));
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::BadTrace("repeated angle on trace".into()));
        }
        let radius = entries.iter().map(|&(_, n)| norm(self.nodes[n])).sum::<f64>()
            / entries.len() as f64;
        Ok(BoundaryTrace {
            node_indices: entries.iter().map(|e| e.1).collect(),
            angles: entries.iter().map(|e| e.0).collect(),
            radius,
        })
    }

    /// Uniform red refinement: every triangle becomes four. Midpoints of
    /// boundary edges are pushed out onto their circle.
    pub fn refine(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut snap: HashMap<(usize, usize), f64> = HashMap::new();
        for e in &self.boundary_edges {
            let r = self.radius(e.tag).expect("tagged edge has a radius");
            snap.insert(edge_key(e.nodes[0], e.nodes[1]), r);
        }
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            let key = edge_key(a, b);
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (nodes[key.0], nodes[key.1]);
                let mut m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if let Some(&r) = snap.get(&key) {
                    let s = r / norm(m);
                    m = [m[0] * s, m[1] * s];
                }
                nodes.push(m);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = mid(e.nodes[0], e.nodes[1], &mut nodes);
            boundary_edges.push(BoundaryEdge { nodes: [e.nodes[0], m], tag: e.tag });
            boundary_edges.push(BoundaryEdge { nodes: [m, e.nodes[1]], tag: e.tag });
        }
        Mesh {
            nodes,
            triangles,
            boundary_edges,
            region: self.region,
            gamma_radius: self.gamma_radius,
            gamma_r_radius: self.gamma_r_radius,
        }
    }

    /// Plain-text export: `nodes V triangles T edges E`, then node
    /// coordinates, triangles and tagged boundary edges (0-based).
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "nodes {} triangles {} edges {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )?;
        for p in &self.nodes {
            writeln!(w, "{:.16e} {:.16e}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {} {}", e.nodes[0], e.nodes[1], e.tag.as_str())?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Mesh> {
        let mut lines = r.lines().map(|l| l.map_err(Error::Write));
        let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (nv, nt, ne) = match h.as_slice() {
            ["nodes", v, "triangles", t, "edges", e] => (
                parse_usize(v)?,
                parse_usize(t)?,
                parse_usize(e)?,
            ),
            _ => return Err(Error::Parse(format!("bad mesh header `{header}`"))),
        };
        let mut next_fields = |what: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what} line")))??;
            Ok(line.split_whitespace().map(str::to_owned).collect())
        };
        let mut nodes = Vec::with_capacity(nv);
        for _ in 0..nv {
            let f = next_fields("node")?;
            if f.len() != 2 {
                return Err(Error::Parse(format!("bad node line {f:?}")));
            }
            nodes.push([parse_f64(&f[0])?, parse_f64(&f[1])?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f = next_fields("triangle")?;
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad triangle line {f:?}")));
            }
            let t = [parse_usize(&f[0])?, parse_usize(&f[1])?, parse_usize(&f[2])?];
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::Parse(format!("triangle {t:?} references a missing node")));
            }
            triangles.push(t);
        }
        let mut boundary_edges = Vec::with_capacity(ne);
        for _ in 0..ne {
            let f = next_fields("edge")?;
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad edge line {f:?}")));
            }
            let tag = Tag::parse(&f[2])
                .ok_or_else(|| Error::Parse(format!("unknown boundary tag `{}`", f[2])))?;
            let e = [parse_usize(&f[0])?, parse_usize(&f[1])?];
            if e.iter().any(|&i| i >= nv) {
                return Err(Error::Parse(format!("edge {e:?} references a missing node")));
            }
            boundary_edges.push(BoundaryEdge { nodes: e, tag });
        }
        let mean_radius = |tag: Tag| -> Option<f64> {
            let rs: Vec<f64> = boundary_edges
                .iter()
                .filter(|e| e.tag == tag)
                .flat_map(|e| e.nodes)
                .map(|n| norm(nodes[n]))
                .collect();
            (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64)
        };
        let gamma_radius =
            mean_radius(Tag::Gamma).ok_or_else(|| Error::Parse("mesh has no GAMMA edges".into()))?;
        let gamma_r_radius = mean_radius(Tag::GammaR);
        let region = if gamma_r_radius.is_some() {
            Region::Annulus
        } else {
            Region::Disc
        };
        let mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            region,
            gamma_radius,
            gamma_r_radius,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Nodes of one boundary loop sorted by polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub node_indices: Vec<usize>,
    pub angles: Vec<f64>,
    pub radius: f64,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.node_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_indices.is_empty()
    }

    /// Angular spacing `2 pi / m` of a uniform trace.
    pub fn spacing(&self) -> f64 {
        TAU / self.len() as f64
    }

    /// Whether the angles are `j * 2pi/m` to within `tol`.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let d = self.spacing();
        self.angles
            .iter()
            .enumerate()
            .all(|(j, &a)| (a - j as f64 * d).abs() <= tol)
    }
}

/// Disc mesh and annulus mesh sharing the interface nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshPair {
    pub disc: Mesh,
    pub annulus: Mesh,
}

impl MeshPair {
    pub fn build(r0: f64, r: f64, n_angular: usize) -> Result<Self> {
        Ok(Self {
            disc: build_disc_mesh(r0, n_angular)?,
            annulus: build_annulus_mesh(r0, r, n_angular)?,
        })
    }

    /// Coarse pair refined `level` times.
    pub fn at_level(r0: f64, r: f64, n_angular: usize, level: usize) -> Result<Self> {
        let mut pair = Self::build(r0, r, n_angular)?;
        for _ in 0..level {
            pair = pair.refine();
        }
        Ok(pair)
    }

    pub fn refine(&self) -> Self {
        Self {
            disc: self.disc.refine(),
            annulus: self.annulus.refine(),
        }
    }

    pub fn h(&self) -> f64 {
        self.disc.h().max(self.annulus.h())
    }
}

fn check_resolution(n_angular: usize) -> Result<()> {
    if n_angular < 8 || n_angular % 2 == 1 {
        Err(Error::Resolution(n_angular))
    } else {
        Ok(())
    }
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {r}")))
    }
}

/// Structured polar mesh of the disc `|x| <= r0` with `n_angular` nodes on
/// its boundary.
pub fn build_disc_mesh(r0: f64, n_angular: usize) -> Result<Mesh> {
    check_radius("R0", r0)?;
    check_resolution(n_angular)?;
    let spacing = TAU * r0 / n_angular as f64;
    let rings = ((r0 / spacing).round() as usize).max(1);

    let mut nodes = vec![[0.0, 0.0]];
    let mut ring_nodes: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..=rings {
        let count = if j == rings {
            n_angular
        } else {
            ((n_angular * j) as f64 / rings as f64).round().max(6.0) as usize
        };
        let radius = if j == rings { r0 } else { r0 * j as f64 / rings as f64 };
        ring_nodes.push(push_ring(&mut nodes, radius, count));
    }
    let mut triangles = Vec::new();
    for pair in ring_nodes.windows(2) {
        stitch(&nodes, &pair[0], &pair[1], &mut triangles);
    }
    let boundary_edges = loop_edges(ring_nodes.last().unwrap(), Tag::Gamma);
    let mesh = Mesh {
        nodes,
        triangles,
        boundary_edges,
        region: Region::Disc,
        gamma_radius: r0,
        gamma_r_radius: None,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Structured polar mesh of the annulus `r0 <= |x| <= r`, `n_angular`
/// sectors on every ring.
pub fn build_annulus_mesh(r0: f64, r: f64, n_angular: usize) -> Result<Mesh> {
    check_radius("R0", r0)?;
    check_radius("R", r)?;
    if r <= r0 {
        return Err(Error::Radii { inner: r0, outer: r });
    }
    check_resolution(n_angular)?;
    let mid_spacing = TAU * 0.5 * (r0 + r) / n_angular as f64;
    let layers = (((r - r0) / mid_spacing).round() as usize).max(1);

    let mut nodes = Vec::new();
    let mut ring_nodes = Vec::with_capacity(layers + 1);
    for j in 0..=layers {
        let radius = match j {
            0 => r0,
            j if j == layers => r,
            j => r0 + (r - r0) * j as f64 / layers as f64,
        };
        ring_nodes.push(push_ring(&mut nodes, radius, n_angular));
    }
    let mut triangles = Vec::new();
    for pair in ring_nodes.windows(2) {
        stitch(&nodes, &pair[0], &pair[1], &mut triangles);
    }
    let mut boundary_edges = loop_edges(&ring_nodes[0], Tag::Gamma);
    boundary_edges.extend(loop_edges(&ring_nodes[layers], Tag::GammaR));
    let mesh = Mesh {
        nodes,
        triangles,
        boundary_edges,
        region: Region::Annulus,
        gamma_radius: r0,
        gamma_r_radius: Some(r),
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Uniform red refinement of `mesh`.
pub fn refine(mesh: &Mesh) -> Mesh {
    mesh.refine()
}

/// Ordered trace of the loop tagged `tag`.
pub fn boundary_trace(mesh: &Mesh, tag: Tag) -> Result<BoundaryTrace> {
    mesh.boundary_trace(tag)
}

fn push_ring(nodes: &mut Vec<Point>, radius: f64, count: usize) -> Vec<usize> {
    (0..count)
        .map(|i| {
            let theta = TAU * i as f64 / count as f64;
            nodes.push([radius * theta.cos(), radius * theta.sin()]);
            nodes.len() - 1
        })
        .collect()
}

fn loop_edges(ring: &[usize], tag: Tag) -> Vec<BoundaryEdge> {
    (0..ring.len())
        .map(|i| BoundaryEdge {
            nodes: [ring[i], ring[(i + 1) % ring.len()]],
            tag,
        })
        .collect()
}

/// Triangulate the band between two rings whose nodes start at angle 0 and
/// are evenly spaced. A single-node inner ring gives a fan.
fn stitch(nodes: &[Point], inner: &[usize], outer: &[usize], out: &mut Vec<[usize; 3]>) {
    let (ni, no) = (inner.len(), outer.len());
    let mut push = |tri: [usize; 3]| {
        if signed_area([nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]) < 0.0 {
            out.push([tri[0], tri[2], tri[1]]);
        } else {
            out.push(tri);
        }
    };
    if ni == 1 {
        for o in 0..no {
            push([inner[0], outer[o], outer[(o + 1) % no]]);
        }
        return;
    }
    let (mut i, mut o) = (0, 0);
    while i < ni || o < no {
        // compare the next angles (i+1)/ni and (o+1)/no exactly
        let advance_outer = o < no && (i == ni || (o + 1) * ni <= (i + 1) * no);
        if advance_outer {
            push([inner[i % ni], outer[o], outer[(o + 1) % no]]);
            o += 1;
        } else {
            push([inner[i], outer[o % no], inner[(i + 1) % ni]]);
            i += 1;
        }
    }
}

pub(crate) fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

/// Angle in `[0, 2pi)`.
pub(crate) fn polar_angle(p: Point) -> f64 {
    let a = p[1].atan2(p[0]).rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected an index, got `{s}`")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("expected a number, got `{s}`")))
}
