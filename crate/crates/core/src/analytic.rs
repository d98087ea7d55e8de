//! Modal series solution of plane-wave scattering by an elastic disc.
//!
//! ```text
//! p   = sum_n A_n H_n(k r) cos(n theta)
//! phi = sum_n B_n J_n(k_p r) cos(n theta)
//! psi = sum_n C_n J_n(k_s r) sin(n theta)
//! u   = grad phi + (d_y psi, -d_x psi)
//! ```
//!
//! The angle is measured from the incident direction. Each mode solves a 3x3
//! system whose rows are the normal-velocity, tangential-traction and
//! normal-traction conditions on the interface.
//!
//! Fields are evaluated through expansions in `Z_m(kappa r) e^{i m theta}`,
//! on which `d_x +- i d_y` act as order shifts. Gradients therefore need no
//! division by `r` and stay exact at the origin.

use std::f64::consts::E;

use num_complex::Complex64;

use crate::config::PhysicalConfig;
use crate::dtn::ModalCoefficients;
use crate::mesh::Point;
use crate::special::{bessel_j_upto, BesselTable};
use crate::{Error, Result};

/// Relative size below which trailing modes are dropped.
pub const SERIES_TAIL: f64 = 1e-16;

/// Per-mode residual bound of the 3x3 solves.
pub const MODAL_RESIDUAL_TOL: f64 = 1e-12;

/// Pressure may be evaluated down to this fraction of `R0`; the series
/// continues the exterior field analytically across the interface.
pub const CONTINUATION_RADIUS: f64 = 0.9;

const RADIUS_SLACK: f64 = 1e-12;

/// `max(30, ceil(k R0) + 25)`.
pub fn default_mode_budget(cfg: &PhysicalConfig) -> usize {
    30.max((cfg.k * cfg.r0).ceil() as usize + 25)
}

/// Smallest budget whose tail is negligible: `ceil(e k R0 / 2) + 10`.
pub fn minimum_mode_budget(cfg: &PhysicalConfig) -> usize {
    (E * cfg.k * cfg.r0 / 2.0).ceil() as usize + 10
}

fn neumann(n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        2.0
    }
}

fn i_pow(n: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][n % 4]
}

/// `c_{n-1}` with `c_{-1} = -c_1`.
fn below(c: &[f64], n: usize) -> f64 {
    if n == 0 {
        -c[1]
    } else {
        c[n - 1]
    }
}

/// Modal matrix `E_n` and right-hand side `e_n` for unit incident amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalSystem {
    pub matrix: [[Complex64; 3]; 3],
    pub rhs: [Complex64; 3],
}

pub fn modal_system(n: usize, cfg: &PhysicalConfig) -> Result<ModalSystem> {
    let (k, kp, ks, r0, mu) = (cfg.k, cfg.k_p(), cfg.k_s(), cfg.r0, cfg.mu);
    let h = BesselTable::new(n + 1, k * r0)?;
    let jk: Vec<f64> = (0..=n + 1).map(|m| h.j(m)).collect();
    let jp = bessel_j_upto(n + 1, kp * r0)?;
    let js = bessel_j_upto(n + 1, ks * r0)?;
    let hank = |m: usize| h.hankel(m);
    let h_below = if n == 0 { -hank(1) } else { hank(n - 1) };
    let nf = n as f64;
    let rf = cfg.rho_f * cfg.omega * cfg.omega;
    let c = |x: f64| Complex64::new(x, 0.0);
    let shear = 2.0 * mu * (nf * nf + nf) - mu * ks * ks * r0 * r0;

    let e11 = -h_below + hank(n) * (nf / (k * r0));
    let e12 = rf * kp / k * (below(&jp, n) - nf / (kp * r0) * jp[n]);
    let e13 = rf * nf / (k * r0) * js[n];
    let e22 = 2.0 * mu * nf * kp / r0 * below(&jp, n) - 2.0 * mu * (nf * nf + nf) / (r0 * r0) * jp[n];
    let e23 = shear / (r0 * r0) * js[n] - 2.0 * mu * ks / r0 * below(&js, n);
    let e31 = hank(n);
    let e32 = shear / (r0 * r0) * jp[n] - 2.0 * mu * kp / r0 * below(&jp, n);
    let e33 = 2.0 * mu * nf * ks / r0 * below(&js, n) - 2.0 * mu * (nf * nf + nf) / (r0 * r0) * js[n];

    let w = i_pow(n) * neumann(n);
    Ok(ModalSystem {
        matrix: [
            [e11, c(e12), c(e13)],
            [c(0.0), c(e22), c(e23)],
            [e31, c(e32), c(e33)],
        ],
        rhs: [
            w * (below(&jk, n) - nf / (k * r0) * jk[n]),
            c(0.0),
            -w * jk[n],
        ],
    })
}

impl ModalSystem {
    /// `max_i |(E x - e)_i|`.
    pub fn residual(&self, x: &[Complex64; 3]) -> f64 {
        (0..3)
            .map(|i| {
                let ex: Complex64 = (0..3).map(|j| self.matrix[i][j] * x[j]).sum();
                (ex - self.rhs[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Solve a 3x3 complex system by column equilibration and partial pivoting,
/// with one step of iterative refinement.
pub fn solve3(m: &[[Complex64; 3]; 3], b: &[Complex64; 3]) -> Result<[Complex64; 3]> {
    let mut scale = [0.0f64; 3];
    for j in 0..3 {
        scale[j] = (0..3).map(|i| m[i][j].norm()).fold(0.0, f64::max);
        if scale[j] == 0.0 || !scale[j].is_finite() {
            return Err(Error::Singular(format!("modal matrix column {j} is {}", scale[j])));
        }
    }
    let scaled: [[Complex64; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] / scale[j]));
    let lu = |rhs: &[Complex64; 3]| -> Result<[Complex64; 3]> {
        let mut a = scaled;
        let mut y = *rhs;
        for col in 0..3 {
            let piv = (col..3)
                .max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()))
                .unwrap_or(col);
            if a[piv][col].norm() < 1e-13 {
                return Err(Error::Singular(format!(
                    "modal matrix pivot {:e} in column {col}",
                    a[piv][col].norm()
                )));
            }
            a.swap(col, piv);
            y.swap(col, piv);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for j in col..3 {
                    let v = a[col][j];
                    a[row][j] -= f * v;
                }
                let v = y[col];
                y[row] -= f * v;
            }
        }
        let mut x = [Complex64::default(); 3];
        for i in (0..3).rev() {
            let s: Complex64 = (i + 1..3).map(|j| a[i][j] * x[j]).sum();
            x[i] = (y[i] - s) / a[i][i];
        }
        Ok(x)
    };
    let mut x = lu(b)?;
    let r: [Complex64; 3] =
        std::array::from_fn(|i| b[i] - (0..3).map(|j| scaled[i][j] * x[j]).sum::<Complex64>());
    let dx = lu(&r)?;
    for j in 0..3 {
        x[j] += dx[j];
    }
    Ok(std::array::from_fn(|j| x[j] / scale[j]))
}

/// Coefficients `sum_m c_m Z_m(kappa r) e^{i m theta}` over `|m| <= half`,
/// for a cylinder function family with `Z_{-m} = (-1)^m Z_m`.
#[derive(Debug, Clone)]
struct Expansion {
    kappa: f64,
    half: usize,
    c: Vec<Complex64>,
}

impl Expansion {
    fn zeros(kappa: f64, half: usize) -> Self {
        Self {
            kappa,
            half,
            c: vec![Complex64::default(); 2 * half + 1],
        }
    }

    /// `sum_n a_n Z_n cos(n theta)`.
    fn cosine(kappa: f64, a: &[Complex64]) -> Self {
        let mut e = Self::zeros(kappa, a.len().saturating_sub(1));
        for (n, &an) in a.iter().enumerate() {
            if n == 0 {
                e.add(0, an);
            } else {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                e.add(n as i64, an * 0.5);
                e.add(-(n as i64), an * (0.5 * sign));
            }
        }
        e
    }

    /// `sum_n a_n Z_n sin(n theta)`.
    fn sine(kappa: f64, a: &[Complex64]) -> Self {
        let mut e = Self::zeros(kappa, a.len().saturating_sub(1));
        let half_over_i = Complex64::new(0.0, -0.5);
        for (n, &an) in a.iter().enumerate().skip(1) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            e.add(n as i64, an * half_over_i);
            e.add(-(n as i64), -an * half_over_i * sign);
        }
        e
    }

    fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.half {
            Complex64::default()
        } else {
            self.c[(m + self.half as i64) as usize]
        }
    }

    fn add(&mut self, m: i64, v: Complex64) {
        let idx = (m + self.half as i64) as usize;
        self.c[idx] += v;
    }

    /// `d_x Z_m e^{im theta} = kappa/2 (Z_{m-1} e^{i(m-1)theta} - Z_{m+1} e^{i(m+1)theta})`.
    fn dx(&self) -> Self {
        let mut out = Self::zeros(self.kappa, self.half + 1);
        let h = out.half as i64;
        for j in -h..=h {
            let v = (self.get(j + 1) - self.get(j - 1)) * (0.5 * self.kappa);
            out.add(j, v);
        }
        out
    }

    /// `d_y Z_m e^{im theta} = i kappa/2 (Z_{m-1} e^{i(m-1)theta} + Z_{m+1} e^{i(m+1)theta})`.
    fn dy(&self) -> Self {
        let mut out = Self::zeros(self.kappa, self.half + 1);
        let h = out.half as i64;
        let f = Complex64::new(0.0, 0.5 * self.kappa);
        for j in -h..=h {
            let v = (self.get(j + 1) + self.get(j - 1)) * f;
            out.add(j, v);
        }
        out
    }

    fn negated(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.c {
            *v = -*v;
        }
        out
    }

    /// `z[m]` holds `Z_m(kappa r)`, `phase = e^{i theta}`.
    fn eval(&self, z: &[Complex64], phase: Complex64) -> Complex64 {
        let mut acc = self.get(0) * z[0];
        let mut pw = Complex64::new(1.0, 0.0);
        for m in 1..=self.half {
            pw *= phase;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += z[m] * (self.get(m as i64) * pw + self.get(-(m as i64)) * pw.conj() * sign);
        }
        acc
    }
}

/// A displacement-type field: compressional part plus shear part.
#[derive(Debug, Clone)]
struct SolidField {
    p: Expansion,
    s: Expansion,
}

impl SolidField {
    fn eval(&self, zp: &[Complex64], zs: &[Complex64], phase: Complex64) -> Complex64 {
        self.p.eval(zp, phase) + self.s.eval(zs, phase)
    }
}

#[derive(Debug, Clone)]
struct FieldExpansions {
    p: Expansion,
    dp: [Expansion; 2],
    u: [SolidField; 2],
    /// `du[i][j] = d_j u_i`.
    du: [[SolidField; 2]; 2],
}

impl FieldExpansions {
    fn new(cfg: &PhysicalConfig, coeffs: &[[Complex64; 3]]) -> Self {
        let col = |c: usize| coeffs.iter().map(|x| x[c]).collect::<Vec<_>>();
        let p = Expansion::cosine(cfg.k, &col(0));
        let phi = Expansion::cosine(cfg.k_p(), &col(1));
        let psi = Expansion::sine(cfg.k_s(), &col(2));
        let (px, py) = (phi.dx(), phi.dy());
        let (sx, sy) = (psi.dx(), psi.dy());
        let field = |p: Expansion, s: Expansion| SolidField { p, s };
        let u = [field(px.clone(), sy.clone()), field(py.clone(), sx.negated())];
        let (pxx, pxy, pyy) = (px.dx(), px.dy(), py.dy());
        let (sxx, sxy, syy) = (sx.dx(), sx.dy(), sy.dy());
        let du = [
            [field(pxx.clone(), sxy.clone()), field(pxy.clone(), syy)],
            [field(pxy, sxx.negated()), field(pyy, sxy.negated())],
        ];
        Self {
            dp: [p.dx(), p.dy()],
            p,
            u,
            du,
        }
    }
}

/// Pressure value with its optional polar gradient `(d_r p, d_theta p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureEval {
    pub value: Complex64,
    pub gradient: Option<[Complex64; 2]>,
}

/// Cartesian displacement and optional Jacobian `gradient[i][j] = d_j u_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementEval {
    pub value: [Complex64; 2],
    pub gradient: Option<[[Complex64; 2]; 2]>,
}

/// Scattered pressure and displacement of the disc problem.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    config: PhysicalConfig,
    amplitude: Complex64,
    /// `(A_n, B_n, C_n)` for `n = 0..n_modes`.
    coeffs: Vec<[Complex64; 3]>,
    residuals: Vec<f64>,
    fields: FieldExpansions,
}

impl SeriesSolution {
    /// Unit-amplitude plane wave, modes `0..=budget`.
    pub fn solve_modes(cfg: &PhysicalConfig, budget: usize) -> Result<Self> {
        Self::solve_modes_with_amplitude(cfg, budget, Complex64::new(1.0, 0.0))
    }

    pub fn solve_modes_with_amplitude(
        cfg: &PhysicalConfig,
        budget: usize,
        amplitude: Complex64,
    ) -> Result<Self> {
        cfg.validate()?;
        let peak = cfg.k.max(cfg.k_p()).max(cfg.k_s()) * cfg.r0;
        let hk = BesselTable::new(budget, cfg.k * cfg.r0)?;
        let jp = bessel_j_upto(budget, cfg.k_p() * cfg.r0)?;
        let js = bessel_j_upto(budget, cfg.k_s() * cfg.r0)?;
        let mut coeffs = Vec::with_capacity(budget + 1);
        let mut residuals = Vec::with_capacity(budget + 1);
        let mut largest = 0.0f64;
        for n in 0..=budget {
            let mut sys = modal_system(n, cfg)?;
            for v in &mut sys.rhs {
                *v *= amplitude;
            }
            let x = solve3(&sys.matrix, &sys.rhs)?;
            let res = sys.residual(&x);
            let scale = sys.rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if res > MODAL_RESIDUAL_TOL * scale {
                return Err(Error::Residual {
                    residual: res / scale,
                    tolerance: MODAL_RESIDUAL_TOL,
                });
            }
            // raw B_n, C_n grow with n; compare the mode's size on the interface
            let size = (x[0] * hk.hankel(n)).norm() + (x[1] * jp[n]).norm() + (x[2] * js[n]).norm();
            if n as f64 > peak && size < SERIES_TAIL * largest {
                break;
            }
            largest = largest.max(size);
            coeffs.push(x);
            residuals.push(if scale > 0.0 { res / scale } else { 0.0 });
        }
        let fields = FieldExpansions::new(cfg, &coeffs);
        Ok(Self {
            config: *cfg,
            amplitude,
            coeffs,
            residuals,
            fields,
        })
    }

    pub fn config(&self) -> &PhysicalConfig {
        &self.config
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    /// Number of retained modes `n = 0..n_modes()`.
    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn a(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).map_or(Complex64::default(), |x| x[0])
    }

    pub fn b(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).map_or(Complex64::default(), |x| x[1])
    }

    pub fn c(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).map_or(Complex64::default(), |x| x[2])
    }

    /// Largest relative residual `|E_n X_n - e_n| / |e_n|` over the modes.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    fn top_order(&self) -> usize {
        self.n_modes() + 2
    }

    fn direction(&self) -> (f64, f64) {
        let [dx, dy] = self.config.direction;
        let n = dx.hypot(dy);
        (dx / n, dy / n)
    }

    /// Point in the frame aligned with the incident direction: `(r, e^{i theta})`.
    fn local_polar(&self, x: Point) -> (f64, Complex64) {
        let (c, s) = self.direction();
        let xl = [c * x[0] + s * x[1], -s * x[0] + c * x[1]];
        let r = xl[0].hypot(xl[1]);
        let phase = if r > 0.0 {
            Complex64::new(xl[0] / r, xl[1] / r)
        } else {
            Complex64::new(1.0, 0.0)
        };
        (r, phase)
    }

    fn to_global(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let (c, s) = self.direction();
        [v[0] * c - v[1] * s, v[0] * s + v[1] * c]
    }

    fn pressure_unchecked(&self, x: Point) -> Result<(Complex64, [Complex64; 2])> {
        let (r, phase) = self.local_polar(x);
        let t = BesselTable::new(self.top_order(), self.config.k * r)?;
        let z: Vec<Complex64> = (0..=self.top_order()).map(|m| t.hankel(m)).collect();
        let f = &self.fields;
        let g = [f.dp[0].eval(&z, phase), f.dp[1].eval(&z, phase)];
        Ok((f.p.eval(&z, phase), self.to_global(g)))
    }

    fn displacement_unchecked(&self, x: Point, with_gradient: bool) -> Result<DisplacementEval> {
        let (r, phase) = self.local_polar(x);
        let real = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        let zp = real(bessel_j_upto(self.top_order(), self.config.k_p() * r)?);
        let zs = real(bessel_j_upto(self.top_order(), self.config.k_s() * r)?);
        let f = &self.fields;
        let u = [f.u[0].eval(&zp, &zs, phase), f.u[1].eval(&zp, &zs, phase)];
        let gradient = with_gradient.then(|| {
            let jl: [[Complex64; 2]; 2] =
                std::array::from_fn(|i| std::array::from_fn(|j| f.du[i][j].eval(&zp, &zs, phase)));
            let (c, s) = self.direction();
            let q = [[c, -s], [s, c]];
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut acc = Complex64::default();
                    for a in 0..2 {
                        for b in 0..2 {
                            acc += jl[a][b] * (q[i][a] * q[j][b]);
                        }
                    }
                    acc
                })
            })
        });
        Ok(DisplacementEval {
            value: self.to_global(u),
            gradient,
        })
    }

    /// Scattered pressure at polar point `(r, theta)`, `r >= R0`.
    pub fn eval_pressure(&self, r: f64, theta: f64, with_gradient: bool) -> Result<PressureEval> {
        if !(r >= self.config.r0 * (1.0 - RADIUS_SLACK)) || !r.is_finite() {
            return Err(Error::OutsideSeries { r, what: "pressure needs r >= R0" });
        }
        let (s, c) = theta.sin_cos();
        let (value, g) = self.pressure_unchecked([r * c, r * s])?;
        Ok(PressureEval {
            value,
            gradient: with_gradient.then(|| [c * g[0] + s * g[1], r * (c * g[1] - s * g[0])]),
        })
    }

    /// Displacement at polar point `(r, theta)`, `r <= R0`, in Cartesian components.
    pub fn eval_displacement(&self, r: f64, theta: f64, with_gradient: bool) -> Result<DisplacementEval> {
        if !(r >= 0.0 && r <= self.config.r0 * (1.0 + RADIUS_SLACK)) {
            return Err(Error::OutsideSeries { r, what: "displacement needs 0 <= r <= R0" });
        }
        let (s, c) = theta.sin_cos();
        self.displacement_unchecked([r * c, r * s], with_gradient)
    }

    /// Pressure and Cartesian gradient at `x`. Accepts points down to
    /// `CONTINUATION_RADIUS * R0`, so inner polygonal boundaries are covered.
    pub fn pressure_at(&self, x: Point) -> Result<(Complex64, [Complex64; 2])> {
        let r = x[0].hypot(x[1]);
        if !(r >= CONTINUATION_RADIUS * self.config.r0) || !r.is_finite() {
            return Err(Error::OutsideSeries { r, what: "pressure continuation" });
        }
        self.pressure_unchecked(x)
    }

    /// Displacement and Cartesian Jacobian at `x`.
    pub fn displacement_at(&self, x: Point) -> Result<([Complex64; 2], [[Complex64; 2]; 2])> {
        let r = x[0].hypot(x[1]);
        if !(r <= self.config.r0 * (1.0 + RADIUS_SLACK)) {
            return Err(Error::OutsideSeries { r, what: "displacement needs r <= R0" });
        }
        let d = self.displacement_unchecked(x, true)?;
        Ok((d.value, d.gradient.unwrap_or_default()))
    }

    /// Incident pressure `amplitude * e^{i k x.d}` and its gradient.
    pub fn incident_at(&self, x: Point) -> (Complex64, [Complex64; 2]) {
        let (c, s) = self.direction();
        let k = self.config.k;
        let v = self.amplitude * Complex64::from_polar(1.0, k * (c * x[0] + s * x[1]));
        let ik = Complex64::new(0.0, k);
        (v, [ik * c * v, ik * s * v])
    }

    /// Exponential Fourier coefficients of `p` on the circle of the given radius.
    pub fn boundary_modes(&self, radius: f64) -> Result<ModalCoefficients> {
        self.circle_modes(radius, |t, n| t.hankel(n))
    }

    /// Exponential Fourier coefficients of `d_r p` on the circle.
    pub fn boundary_derivative_modes(&self, radius: f64) -> Result<ModalCoefficients> {
        let k = self.config.k;
        self.circle_modes(radius, |t, n| t.hankel_derivative(n) * k)
    }

    fn circle_modes(
        &self,
        radius: f64,
        radial: impl Fn(&BesselTable, usize) -> Complex64,
    ) -> Result<ModalCoefficients> {
        if !(radius >= self.config.r0) {
            return Err(Error::OutsideSeries { r: radius, what: "pressure needs r >= R0" });
        }
        let m = self.n_modes() - 1;
        let t = BesselTable::new(m + 1, self.config.k * radius)?;
        let (c, s) = self.direction();
        let theta_d = s.atan2(c);
        Ok(ModalCoefficients::from_fn(m, |n| {
            let a = n.unsigned_abs() as usize;
            let v = self.coeffs[a][0] * radial(&t, a);
            if a == 0 {
                v
            } else {
                v * 0.5 * Complex64::from_polar(1.0, -(n as f64) * theta_d)
            }
        }))
    }

    /// Net outward power flux `Im int conj(p) d_r p ds` through the circle.
    pub fn radiated_power(&self, radius: f64) -> Result<f64> {
        let p = self.boundary_modes(radius)?;
        let dp = self.boundary_derivative_modes(radius)?;
        let s: f64 = p.iter().zip(dp.iter()).map(|((_, a), (_, b))| (a.conj() * b).im).sum();
        Ok(std::f64::consts::TAU * radius * s)
    }
}
