//! Truncated Dirichlet-to-Neumann operator on the artificial circle.
//!
//! On `|x| = R` the exact condition reads `dp/dr = S p` with
//! `S p = sum_n z_n p_n e^{i n theta}`, `z_n = k H_n'(kR)/H_n(kR)`, and the
//! truncated operator keeps `|n| <= N`. In the Galerkin system the trace
//! basis is the family of angular hat functions on the uniform trace, so
//! `B[i][j] = int (S^N zeta_j) zeta_i ds` factors through the Fourier
//! moments of the hats:
//!
//! ```text
//! B[i][j] = R/(2 pi) * sum_{|n| <= N} z_|n| M[j][n] conj(M[i][n])
//! M[j][n] = int_0^{2 pi} zeta_j(phi) e^{-i n phi} dphi
//! ```
//!
//! which has rank at most `2N + 1`.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use faer::Mat;
use num_complex::Complex64;

use crate::mesh::BoundaryTrace;
use crate::special::{self, MAX_ORDER};
use crate::{Error, Result};

const UNIFORM_TOL: f64 = 1e-10;

/// Fourier moment of the angular hat centred at `trace.angles[j]` against
/// `e^{-i n phi}` on a uniform trace.
pub fn fourier_moment(trace: &BoundaryTrace, j: usize, n: i64) -> Complex64 {
    hat_moment(trace.spacing(), trace.angles[j], n)
}

fn hat_moment(spacing: f64, center: f64, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(spacing, 0.0);
    }
    let nf = n as f64;
    let s = (0.5 * nf * spacing).sin();
    let magnitude = 4.0 * s * s / (nf * nf * spacing);
    Complex64::from_polar(magnitude, -nf * center)
}

/// The real profile `(4/(n^2 D)) sin^2(nD/2)` shared by all hats of a
/// uniform trace with spacing `D`.
fn hat_profile(spacing: f64, n: usize) -> f64 {
    hat_moment(spacing, 0.0, n as i64).re
}

/// Truncated DtN operator in factored form.
#[derive(Debug, Clone)]
pub struct DtnOperator {
    n_trunc: usize,
    k: f64,
    radius: f64,
    coefficients: Vec<Complex64>,
    angles: Vec<f64>,
    spacing: f64,
    /// Row-major `m x (2N+1)`, column `n + N`.
    moments: Vec<Complex64>,
}

impl DtnOperator {
    pub fn new(trace: &BoundaryTrace, k: f64, radius: f64, n_trunc: usize) -> Result<Self> {
        if trace.len() < 3 || !trace.is_uniform(UNIFORM_TOL) {
            return Err(Error::BadTrace(
                "DtN assembly needs a uniform trace starting at angle 0".into(),
            ));
        }
        special::check_order(n_trunc, MAX_ORDER)?;
        let coefficients = special::dtn_coefficients(n_trunc, k, radius)?;
        let spacing = trace.spacing();
        let width = 2 * n_trunc + 1;
        let mut moments = Vec::with_capacity(trace.len() * width);
        for &a in &trace.angles {
            for n in -(n_trunc as i64)..=n_trunc as i64 {
                moments.push(hat_moment(spacing, a, n));
            }
        }
        Ok(Self {
            n_trunc,
            k,
            radius,
            coefficients,
            angles: trace.angles.clone(),
            spacing,
            moments,
        })
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn trace_len(&self) -> usize {
        self.angles.len()
    }

    /// `z_0..z_N`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn moment(&self, j: usize, n: i64) -> Complex64 {
        let width = 2 * self.n_trunc + 1;
        self.moments[j * width + (n + self.n_trunc as i64) as usize]
    }

    /// `c_n = (1/2pi) int v e^{-i n theta}` of the piecewise linear trace
    /// function with nodal values `v`, for `|n| <= N`.
    pub fn project(&self, v: &[Complex64]) -> ModalCoefficients {
        let width = 2 * self.n_trunc + 1;
        let mut c = vec![Complex64::default(); width];
        for (j, &vj) in v.iter().enumerate() {
            for (slot, m) in c.iter_mut().zip(&self.moments[j * width..(j + 1) * width]) {
                *slot += vj * m;
            }
        }
        for slot in &mut c {
            *slot /= TAU;
        }
        ModalCoefficients::new(c)
    }

    /// `B v` through the factorisation: project, scale by `z_|n|`, test
    /// against every hat. Costs `O(m N)`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let c = self.project(v);
        let width = 2 * self.n_trunc + 1;
        let scaled: Vec<Complex64> = (-(self.n_trunc as i64)..=self.n_trunc as i64)
            .map(|n| self.coefficients[n.unsigned_abs() as usize] * c.get(n))
            .collect();
        (0..self.angles.len())
            .map(|i| {
                let row = &self.moments[i * width..(i + 1) * width];
                let acc: Complex64 = row.iter().zip(&scaled).map(|(m, s)| m.conj() * s).sum();
                acc * self.radius
            })
            .collect()
    }

    /// Dense matrix from the cosine form
    /// `R/(2pi) [z_0 D^2 + 2 sum_{n>=1} z_n s_n^2 cos(n (theta_i - theta_j))]`,
    /// filled symmetrically.
    pub fn matrix(&self) -> DtnMatrix {
        let m = self.angles.len();
        let profiles: Vec<f64> = (0..=self.n_trunc).map(|n| hat_profile(self.spacing, n)).collect();
        let weights: Vec<Complex64> = self
            .coefficients
            .iter()
            .zip(&profiles)
            .enumerate()
            .map(|(n, (z, s))| {
                let w = *z * (s * s) * self.radius / TAU;
                if n == 0 {
                    w
                } else {
                    2.0 * w
                }
            })
            .collect();
        let mut entries = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in i..m {
                // uniform trace: theta_i - theta_j = (i - j) * spacing
                let offset = (i as f64 - j as f64) * self.spacing;
                let mut acc = Complex64::default();
                for (n, w) in weights.iter().enumerate() {
                    acc += w * (n as f64 * offset).cos();
                }
                entries[i * m + j] = acc;
                entries[j * m + i] = acc;
            }
        }
        DtnMatrix { dim: m, entries }
    }
}

/// Dense `m x m` matrix of `int (S^N zeta_j) zeta_i ds` over the trace nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DtnMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let a = Mat::<Complex64>::from_fn(self.dim, self.dim, |i, j| self.get(i, j));
        let sv = a.singular_values().expect("dense SVD converges");
        let top = sv.iter().copied().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > rel_tol * top).count()
    }
}

/// Build the dense boundary matrix for a uniform trace.
pub fn assemble_dtn_matrix(
    trace: &BoundaryTrace,
    k: f64,
    radius: f64,
    n_trunc: usize,
) -> Result<DtnMatrix> {
    Ok(DtnOperator::new(trace, k, radius, n_trunc)?.matrix())
}

/// Exponential Fourier coefficients `c_n`, `n = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoefficients {
    values: Vec<Complex64>,
}

impl ModalCoefficients {
    /// `values[n + M]` holds `c_n`; the length must be odd.
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(values.len() % 2 == 1, "modal vector needs 2M+1 entries");
        Self { values }
    }

    pub fn zeros(max_mode: usize) -> Self {
        Self::new(vec![Complex64::default(); 2 * max_mode + 1])
    }

    pub fn from_fn(max_mode: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let m = max_mode as i64;
        Self::new((-m..=m).map(f).collect())
    }

    pub fn max_mode(&self) -> usize {
        self.values.len() / 2
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let m = self.max_mode() as i64;
        if n.abs() > m {
            Complex64::default()
        } else {
            self.values[(n + m) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.max_mode() as i64;
        self.values.iter().enumerate().map(move |(i, &c)| (i as i64 - m, c))
    }

    /// `(sum (1+n^2)^{-1/2} |c_n|^2)^{1/2}`, the mode-space `H^{-1/2}` norm.
    pub fn h_minus_half_norm(&self) -> f64 {
        self.iter()
            .map(|(n, c)| c.norm_sqr() / (1.0 + (n * n) as f64).sqrt())
            .sum::<f64>()
            .sqrt()
    }
}

/// Mode-space action of `S^N`: multiply by `z_|n|` for `|n| <= N`, zero
/// above. Requires `coefficients` to hold at least `z_0..z_min(N, M)`.
pub fn apply_modal_dtn(
    p: &ModalCoefficients,
    n_trunc: usize,
    coefficients: &[Complex64],
) -> ModalCoefficients {
    ModalCoefficients::from_fn(p.max_mode(), |n| {
        let a = n.unsigned_abs() as usize;
        if a <= n_trunc {
            coefficients[a] * p.get(n)
        } else {
            Complex64::default()
        }
    })
}

/// Tail norms `||(S - S^N) p||` over a range of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<(usize, f64)>,
    /// Least-squares geometric ratio fitted to the non-negligible tails.
    pub fitted_ratio: Option<f64>,
}

impl DecayTable {
    /// Successive ratios `tail(N+1)/tail(N)` where both are non-zero.
    pub fn successive_ratios(&self) -> Vec<(usize, f64)> {
        self.rows
            .windows(2)
            .filter(|w| w[0].1 > 0.0 && w[1].1 > 0.0)
            .map(|w| (w[1].0, w[1].1 / w[0].1))
            .collect()
    }
}

/// Tail of the DtN series in the mode-space `H^{-1/2}` norm for the
/// Dirichlet data `p` on `|x| = radius`.
pub fn truncation_decay_check(
    k: f64,
    radius: f64,
    p: &ModalCoefficients,
    n_range: RangeInclusive<usize>,
) -> Result<DecayTable> {
    let m = p.max_mode();
    let z = special::dtn_coefficients(m, k, radius)?;
    let full = apply_modal_dtn(p, m, &z);
    let rows: Vec<(usize, f64)> = n_range
        .map(|n| {
            let tail: f64 = full
                .iter()
                .filter(|(mode, _)| mode.unsigned_abs() as usize > n)
                .map(|(mode, c)| c.norm_sqr() / (1.0 + (mode * mode) as f64).sqrt())
                .sum();
            (n, tail.sqrt())
        })
        .collect();
    let head = rows.first().map(|r| r.1).unwrap_or(0.0);
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 1e-13 * head && r.1 > 0.0)
        .map(|&(n, t)| (n as f64, t.ln()))
        .collect();
    let fitted_ratio = fit_slope(&usable).map(f64::exp);
    Ok(DecayTable { rows, fitted_ratio })
}

/// Least-squares slope of `y` against `x`; needs two distinct abscissae.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Laplace-limit coefficient `n/R` that `-Re z_n` approaches.
pub fn laplace_limit(n: usize, radius: f64) -> f64 {
    n as f64 / radius
}
