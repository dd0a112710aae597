//! Numerical integration and 1-D minimization.
//!
//! Globally adaptive Gauss–Kronrod (7/15) with bisection of the worst
//! interval, fixed Gauss–Legendre rules for inner loops, and golden-section
//! search. Singular endpoints are handled by the callers through variable
//! maps; nothing here knows about the physics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 4000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    Segment { a, b, value, error }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], tol)
}

/// Integrate over consecutive panels `[breaks[i], breaks[i+1]]`, refining globally.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1]));
            evaluations += 15;
        }
    }
    loop {
        let (value, error): (f64, f64) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                wanted: 0.0,
            });
        }
        let wanted = tol.target(value);
        if error <= wanted {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                wanted,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution; accept what we have
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&mut f, worst.a, mid));
        heap.push(gk15(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

/// ∫_a^∞ f, with `f(r) ~ r^{-1-decay}` at infinity (decay > 0).
///
/// Maps r = a·v^{-1/decay}, which turns the leading power tail into a
/// constant on v ∈ (0, 1].
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    decay: f64,
    tol: Tolerance,
) -> Result<QuadResult> {
    assert!(a > 0.0 && decay > 0.0);
    let inv = 1.0 / decay;
    integrate(
        |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let r = a * v.powf(-inv);
            let jac = a * inv * v.powf(-inv - 1.0);
            let val = f(r) * jac;
            if val.is_finite() {
                val
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫_a^b f where `f(r) ~ |r - c|^{power}` near the endpoint `c` (either `a` or `b`), power > -1.
///
/// Uses r - c = ±(b - a)·v^{1/(1+power)}; the algebraic singularity becomes regular.
pub fn integrate_endpoint_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    singular_at_a: bool,
    power: f64,
    tol: Tolerance,
) -> Result<QuadResult> {
    assert!(power > -1.0);
    let q = 1.0 / (1.0 + power);
    let len = b - a;
    integrate(
        |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let off = len * v.powf(q);
            let r = if singular_at_a { a + off } else { b - off };
            let jac = len * q * v.powf(q - 1.0);
            let val = f(r) * jac;
            if val.is_finite() {
                val
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
///
/// Stops when the bracket is narrower than `width`. Returns (x, f(x)).
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > width {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::rel(1e-14)).unwrap();
        assert_relative_eq!(r.value, 0.0, epsilon = 1e-14);
        let r = integrate(|x| x.powi(6), -1.0, 1.0, Tolerance::rel(1e-14)).unwrap();
        assert_relative_eq!(r.value, 2.0 / 7.0, max_relative = 1e-14);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 -ln x dx = 1
        let r = integrate(|x| -x.ln(), 0.0, 1.0, Tolerance::rel(1e-12)).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn mapped_algebraic_singularity() {
        // ∫_0^1 x^{-0.9} dx = 10
        let r =
            integrate_endpoint_singular(|x| x.powf(-0.9), 0.0, 1.0, true, -0.9, Tolerance::rel(1e-13))
                .unwrap();
        assert_relative_eq!(r.value, 10.0, max_relative = 1e-12);
        let r =
            integrate_endpoint_singular(|x| (1.0 - x).powf(-0.5), 0.0, 1.0, false, -0.5, Tolerance::rel(1e-13))
                .unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn power_tail() {
        // ∫_1^∞ r^{-1.05} dr = 20, with a correction term
        let r = integrate_power_tail(|r| r.powf(-1.05) + r.powi(-3), 1.0, 0.05, Tolerance::rel(1e-12))
            .unwrap();
        assert_relative_eq!(r.value, 20.5, max_relative = 1e-10);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-14);
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(m, 2.0 / (deg as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn golden_section() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-18);
        // boundary minimum
        let (x, _) = golden_min(|x| x, 0.5, 1.0, 1e-10);
        assert!((x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let err = integrate(|x| (1.0 / x).sin() / x, 1e-12, 1.0, Tolerance::rel(1e-14).with_max_intervals(20))
            .unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
