//! Integer-order Bessel functions of real argument and the first-kind Hankel
//! function built from them.
//!
//! `J_n` comes from Miller's backward recurrence, normalised with
//! `J_0 + 2 sum J_{2m} = 1`. `Y_0` and `Y_1` come from the Neumann series in
//! the even-order `J`s of the same run, and `Y_n` follows by forward
//! recurrence, which is the stable direction for the second kind.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use thiserror::Error;

/// Largest order any routine in this module accepts.
pub const MAX_ORDER: usize = 500;

/// Safety margin added on top of twice the larger of the truncation order
/// and the modal budget.
pub const ORDER_SAFETY: usize = 20;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{what} requires {requirement}, got x = {x}")]
    Domain {
        what: &'static str,
        requirement: &'static str,
        x: f64,
    },
    #[error("order {n} exceeds the cap {cap}")]
    OrderTooLarge { n: usize, cap: usize },
    #[error("{what}({n}, {x}) overflows f64")]
    Overflow { what: &'static str, n: usize, x: f64 },
}

pub type Result<T> = std::result::Result<T, SpecialError>;

/// Highest Bessel order a run with truncation order `trunc` and modal budget
/// `modes` may request.
pub fn order_cap(trunc: usize, modes: usize) -> usize {
    2 * trunc.max(modes) + ORDER_SAFETY
}

/// Check `n` against a cap produced by [`order_cap`] (and the global one).
pub fn check_order(n: usize, cap: usize) -> Result<()> {
    let cap = cap.min(MAX_ORDER);
    if n > cap {
        Err(SpecialError::OrderTooLarge { n, cap })
    } else {
        Ok(())
    }
}

/// One evaluation of the pair `(J_n(x), Y_n(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEval {
    pub order: usize,
    pub argument: f64,
    pub j: f64,
    pub y: f64,
}

impl BesselEval {
    pub fn new(order: usize, argument: f64) -> Result<Self> {
        let table = BesselTable::new(order, argument)?;
        Ok(Self {
            order,
            argument,
            j: table.j(order),
            y: table.y(order),
        })
    }

    /// Relative defect of `J_n Y_n' - J_n' Y_n = 2/(pi x)`.
    pub fn wronskian_residual(&self) -> Result<f64> {
        let n = self.order;
        let x = self.argument;
        let table = BesselTable::new(n + 1, x)?;
        let w = table.j(n) * table.y_derivative(n) - table.j_derivative(n) * table.y(n);
        let exact = FRAC_2_PI / x;
        Ok(((w - exact) / exact).abs())
    }
}

/// `J_k(x)` and `Y_k(x)` for `k = 0..=nmax` at one argument.
#[derive(Debug, Clone)]
pub struct BesselTable {
    x: f64,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl BesselTable {
    /// Requires `x > 0` because `Y_n` is singular at the origin.
    pub fn new(nmax: usize, x: f64) -> Result<Self> {
        check_order(nmax, MAX_ORDER)?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(SpecialError::Domain {
                what: "Y_n",
                requirement: "finite x > 0",
                x,
            });
        }
        let full = miller_sequence(nmax, x);
        let y = y_sequence(nmax, x, &full)?;
        let mut j = full;
        j.truncate(nmax + 1);
        Ok(Self { x, j, y })
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn max_order(&self) -> usize {
        self.j.len() - 1
    }

    pub fn j(&self, n: usize) -> f64 {
        self.j[n]
    }

    pub fn y(&self, n: usize) -> f64 {
        self.y[n]
    }

    pub fn j_derivative(&self, n: usize) -> f64 {
        derivative(&self.j, n, self.x)
    }

    pub fn y_derivative(&self, n: usize) -> f64 {
        derivative(&self.y, n, self.x)
    }

    pub fn hankel(&self, n: usize) -> Complex64 {
        Complex64::new(self.j[n], self.y[n])
    }

    /// `H_n' = H_{n-1} - (n/x) H_n`, and `H_0' = -H_1` (needs order 1 in the table).
    pub fn hankel_derivative(&self, n: usize) -> Complex64 {
        Complex64::new(self.j_derivative(n), self.y_derivative(n))
    }
}

fn derivative(c: &[f64], n: usize, x: f64) -> f64 {
    if n == 0 {
        -c[1]
    } else {
        c[n - 1] - (n as f64 / x) * c[n]
    }
}

/// `J_n(x)`; `x = 0` is handled exactly.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_upto(n, x)?[n])
}

/// `J_0(x), ..., J_nmax(x)`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(nmax, MAX_ORDER)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain {
            what: "J_n",
            requirement: "finite x >= 0",
            x,
        });
    }
    if x == 0.0 {
        let mut j = vec![0.0; nmax + 1];
        j[0] = 1.0;
        return Ok(j);
    }
    let mut j = miller_sequence(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `Y_n(x)` for `x > 0`.
pub fn bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(BesselTable::new(n, x)?.y(n))
}

/// `H_n^(1)(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: usize, x: f64) -> Result<Complex64> {
    Ok(BesselTable::new(n, x)?.hankel(n))
}

/// Derivative of `H_n^(1)` with respect to its argument.
pub fn hankel1_derivative(n: usize, x: f64) -> Result<Complex64> {
    Ok(BesselTable::new(n.max(1), x)?.hankel_derivative(n))
}

/// DtN mode coefficient `z_n = k H_n'(kR) / H_n(kR)`.
pub fn dtn_coefficient(n: usize, k: f64, radius: f64) -> Result<Complex64> {
    Ok(dtn_coefficients(n, k, radius)?[n])
}

/// `z_0, ..., z_nmax` for wave number `k` on the circle of radius `radius`.
///
/// Uses the ratio `rho_n = H_{n-1}/H_n`, which obeys
/// `rho_{n+1} = 1 / (2n/x - rho_n)`, so no Hankel value is ever formed at
/// high order and nothing overflows.
pub fn dtn_coefficients(nmax: usize, k: f64, radius: f64) -> Result<Vec<Complex64>> {
    check_order(nmax, MAX_ORDER)?;
    for (what, v) in [("wave number", k), ("radius", radius)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(SpecialError::Domain {
                what,
                requirement: "a finite positive value",
                x: v,
            });
        }
    }
    let x = k * radius;
    let table = BesselTable::new(1, x)?;
    let mut rho = table.hankel(0) / table.hankel(1);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(-k / rho);
    for n in 1..=nmax {
        out.push(k * (rho - n as f64 / x));
        rho = Complex64::new(1.0, 0.0) / (2.0 * n as f64 / x - rho);
    }
    Ok(out)
}

/// Backward recurrence for `J_0..J_m` with `m` well past both `nmax` and `x`.
/// Requires `x > 0`.
fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    let big = (nmax as f64).max(x);
    let mut m = (big + 30.0 + 6.0 * big.sqrt()).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut j = vec![0.0; m + 1];
    let mut above = 0.0;
    let mut current = 1e-30;
    j[m] = current;
    let mut even_sum = 0.0;
    for k in (1..=m).rev() {
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        j[k - 1] = current;
        if (k - 1) % 2 == 0 && k > 1 {
            even_sum += current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            for v in &mut j[k - 1..] {
                *v *= RESCALE_BY;
            }
        }
    }
    let norm = j[0] + 2.0 * even_sum;
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// Second-kind sequence from the Neumann series for `Y_0`, `Y_1`, then
/// forward recurrence. `j` must hold the full Miller run at `x`.
fn y_sequence(nmax: usize, x: f64, j: &[f64]) -> Result<Vec<f64>> {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (log_term * j[1] - j[0] / x + s1);

    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let next = (2.0 * n as f64 / x) * y[n] - y[n - 1];
        if !next.is_finite() {
            return Err(SpecialError::Overflow {
                what: "Y",
                n: n + 1,
                x,
            });
        }
        y.push(next);
    }
    Ok(y)
}

/// Leading large-order magnitude `sqrt(2/(pi n)) (2n/(e x))^n` of `|H_n(x)|`.
pub fn hankel_large_order_magnitude(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    (2.0 / (PI * nf)).sqrt() * (2.0 * nf / (std::f64::consts::E * x)).powf(nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_y(0, 0.0).is_err());
        assert!(bessel_y(3, -2.0).is_err());
    }

    #[test]
    fn small_argument_blow_up_of_y5() {
        let y = bessel_y(5, 0.1).unwrap();
        assert!(y < 0.0 && y.abs() > 1e5);
        // leading term -(n-1)! (2/x)^n / pi
        let lead = -24.0 * 20f64.powi(5) / PI;
        assert!(rel(y, lead) < 1e-3);
    }

    #[test]
    fn y1_known_value() {
        // Y_1(1) from standard tables
        assert!(rel(bessel_y(1, 1.0).unwrap(), -0.781_212_821_300_288_7) < 1e-13);
    }

    #[test]
    fn hankel_imaginary_part_is_y() {
        for &(n, x) in &[(0, 0.3), (3, 2.5), (17, 9.0)] {
            let h = hankel1(n, x).unwrap();
            assert_eq!(h.im, bessel_y(n, x).unwrap());
            assert_eq!(h.re, bessel_j(n, x).unwrap());
        }
    }

    #[test]
    fn hankel_derivative_identities() {
        let x = 2.0;
        let d0 = hankel1_derivative(0, x).unwrap();
        assert!((d0 + hankel1(1, x).unwrap()).norm() < 1e-15);
        let d1 = hankel1_derivative(1, x).unwrap();
        let expect = hankel1(0, x).unwrap() - 0.5 * hankel1(1, x).unwrap();
        assert!((d1 - expect).norm() < 1e-15);
    }

    #[test]
    fn dtn_coefficient_zero_mode_reduction() {
        let z0 = dtn_coefficient(0, 1.0, 2.0).unwrap();
        let expect = -hankel1(1, 2.0).unwrap() / hankel1(0, 2.0).unwrap();
        assert!((z0 - expect).norm() < 1e-14);
        assert!(z0.im > 0.0);
    }

    #[test]
    fn dtn_ratio_recurrence_matches_direct_quotient() {
        let (k, r) = (1.0, 2.0);
        let zs = dtn_coefficients(30, k, r).unwrap();
        let table = BesselTable::new(30, k * r).unwrap();
        for n in 0..=30 {
            let direct = k * table.hankel_derivative(n) / table.hankel(n);
            assert!((zs[n] - direct).norm() <= 1e-12 * direct.norm(), "n = {n}");
        }
    }

    #[test]
    fn dtn_coefficient_large_order_limit() {
        let z = dtn_coefficient(80, 1.0, 2.0).unwrap();
        assert!(rel(z.re, -40.0) < 0.05);
        let zs = dtn_coefficients(200, 1.0, 2.0).unwrap();
        let gaps: Vec<f64> = (0..=200).map(|n| (zs[n] + n as f64 / 2.0).norm()).collect();
        // monotone decay of |z_n + n/R| past a few modes
        assert!(gaps[10..].windows(2).all(|w| w[1] <= w[0]));
        assert!(gaps[200] < 1e-2);
        assert!(zs.iter().all(|z| z.im >= 0.0));
        // Im z_n = 2 / (pi R |H_n|^2) from the Wronskian, while representable
        for n in 0..=60 {
            let h = hankel1(n, 2.0).unwrap();
            let expected = 2.0 / (PI * 2.0 * h.norm_sqr());
            assert!(rel(zs[n].im, expected) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn order_cap_is_enforced() {
        assert_eq!(order_cap(20, 40), 100);
        assert!(check_order(101, order_cap(20, 40)).is_err());
        assert!(matches!(
            bessel_j(MAX_ORDER + 1, 1.0),
            Err(SpecialError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn overflow_is_reported_not_returned() {
        assert!(matches!(
            bessel_y(400, 0.01),
            Err(SpecialError::Overflow { .. })
        ));
    }
}
