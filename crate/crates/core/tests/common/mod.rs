//! Shared oracles for the integration tests.
#![allow(dead_code)]

use twofloat::{consts, TwoFloat};

/// Euler's constant split into a double-double.
fn euler_gamma() -> TwoFloat {
    TwoFloat::new_add(0.577_215_664_901_532_9, -4.942_915_152_430_645e-18)
}

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

/// `J_n(x)` from its power series in double-double arithmetic.
pub fn dd_bessel_j(n: usize, x: f64) -> f64 {
    to_f64(dd_j(n, dd(x)))
}

fn dd_j(n: usize, x: TwoFloat) -> TwoFloat {
    let half = x / 2.0;
    let q = -(half * half);
    let mut term = dd(1.0);
    for i in 1..=n {
        term = term * half / (i as f64);
    }
    let mut sum = term;
    let mut k = 1usize;
    loop {
        term = term * q / ((k * (k + n)) as f64);
        sum += term;
        if to_f64(term).abs() < 1e-34 * to_f64(sum).abs().max(1e-300) || k > 500 {
            break;
        }
        k += 1;
    }
    sum
}

/// `Y_n(x)` from the standard series (finite part, logarithmic part, digamma sum).
pub fn dd_bessel_y(n: usize, x: f64) -> f64 {
    let x = dd(x);
    let half = x / 2.0;
    let pi = consts::PI;
    let gamma = euler_gamma();
    let log_half = x.ln() - consts::LN_2;

    // -(1/pi) sum_{k<n} (n-k-1)!/k! (x/2)^{2k-n}
    let mut finite = dd(0.0);
    for k in 0..n {
        let mut c = dd(1.0);
        for i in 1..(n - k) {
            c *= i as f64;
        }
        for i in 1..=k {
            c /= i as f64;
        }
        finite += c * half.powi(2 * k as i32 - n as i32);
    }

    // digamma(m + 1) = -gamma + H_m
    let harmonic = |m: usize| (1..=m).fold(dd(0.0), |acc, i| acc + dd(1.0) / (i as f64));
    let q = -(half * half);
    let mut term = dd(1.0);
    for i in 1..=n {
        term = term * half / (i as f64);
    }
    let mut series = term * (harmonic(0) + harmonic(n) - gamma * 2.0);
    let mut k = 1usize;
    loop {
        term = term * q / ((k * (k + n)) as f64);
        let add = term * (harmonic(k) + harmonic(n + k) - gamma * 2.0);
        series += add;
        if to_f64(term).abs() < 1e-34 * to_f64(series).abs().max(1e-300) || k > 500 {
            break;
        }
        k += 1;
    }
    let y = (dd_j(n, x) * log_half * 2.0 - finite - series) / pi;
    to_f64(y)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=m {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_on(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    gauss_legendre(m)
        .into_iter()
        .map(|(t, w)| (0.5 * (a + b) + 0.5 * (b - a) * t, 0.5 * (b - a) * w))
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Collapsed tensor Gauss rule on a triangle, exact for degree `2m - 2`.
pub fn triangle_rule(m: usize, p: [[f64; 2]; 3]) -> Vec<([f64; 2], f64)> {
    let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let g = gauss_on(m, 0.0, 1.0);
    let mut out = Vec::with_capacity(m * m);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            // (s, t) in the square to barycentric (1 - s, s (1 - t), s t)
            let (b1, b2) = (s * (1.0 - t), s * t);
            let b0 = 1.0 - b1 - b2;
            let x = [
                b0 * p[0][0] + b1 * p[1][0] + b2 * p[2][0],
                b0 * p[0][1] + b1 * p[1][1] + b2 * p[2][1],
            ];
            out.push((x, ws * wt * s * area2.abs()));
        }
    }
    out
}

/// Barycentric coordinates of `x` in the triangle `p`.
pub fn bary(p: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (x[1] - p[0][1])) / det;
    let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (x[0] - p[0][0]) * (p[1][1] - p[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

