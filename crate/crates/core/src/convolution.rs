//! Quadrature of Riesz-kernel convolutions of radial functions,
//! `∫_{R^d} |p - q|^{-(d-2s)} f(|q|) dq`, for d ∈ {1, 2, 3}.
//!
//! The integral is split into a radial part and the angular average
//! `A_d(p, r) = ∫_{S^{d-1}} |p e - r ω|^{-(d-2s)} dω`. For d = 1 and d = 3 the
//! angular average is elementary; for d = 2 it is computed by composite
//! Gauss–Legendre panels that refine geometrically toward the near-diagonal
//! peak. The radial integral is split at r = p (where A_d is singular for
//! s ≤ 1/2) and at any extra scales of `f`, with variable maps for the
//! r → 0 and r → ∞ power behaviors.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad::{self, QuadResult, Tolerance};

const PANEL_ORDER: usize = 20;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| quad::gauss_legendre(PANEL_ORDER))
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = panel_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// expm1(εx)/ε, continuous at ε = 0.
fn expm1_over(eps: f64, x: f64) -> f64 {
    if eps == 0.0 {
        x
    } else {
        (eps * x).exp_m1() / eps
    }
}

/// Angular average `A_d(p, r)` of the Riesz kernel |·|^{-(d-2s)}, p, r > 0, r ≠ p.
pub fn angular_average(d: u32, s: f64, p: f64, r: f64) -> f64 {
    let diff = (p - r).abs();
    let sum = p + r;
    match d {
        1 => diff.powf(2.0 * s - 1.0) + sum.powf(2.0 * s - 1.0),
        3 => {
            // 2π/(pr) · (sum^ε - diff^ε)/ε with ε = 2s-1
            let eps = 2.0 * s - 1.0;
            2.0 * PI / (p * r) * diff.powf(eps) * expm1_over(eps, (sum / diff).ln())
        }
        2 => angular_average_2d(s, p, r),
        _ => f64::NAN,
    }
}

/// 2∫_0^π (p² + r² - 2pr cos φ)^{-(1-s)} dφ.
fn angular_average_2d(s: f64, p: f64, r: f64) -> f64 {
    let nu = 1.0 - s;
    let gap2 = (p - r) * (p - r);
    let four_pr = 4.0 * p * r;
    // φ ∈ [0, π/2] through u = sin(φ/2): dφ = 2du/√(1-u²), base = (p-r)² + 4pr u²
    let near = |u: f64| (gap2 + four_pr * u * u).powf(-nu) * 2.0 / (1.0 - u * u).sqrt();
    let u_end = std::f64::consts::FRAC_1_SQRT_2;
    let w = (p - r).abs() / four_pr.sqrt();
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = w.min(u_end);
    if hi <= 0.0 {
        hi = u_end * 1e-300;
    }
    loop {
        total += gl_panel(&near, lo, hi);
        if hi >= u_end {
            break;
        }
        lo = hi;
        hi = (hi * 2.0).min(u_end);
    }
    // φ ∈ [π/2, π] is smooth
    let far = |phi: f64| (p * p + r * r - 2.0 * p * r * phi.cos()).powf(-nu);
    let half = 0.5 * PI;
    total += gl_panel(&far, half, 0.75 * PI) + gl_panel(&far, 0.75 * PI, PI);
    2.0 * total
}

/// Radial weight `f` with its power behavior at both ends.
///
/// `f(r) ~ r^{-head_decay}` as r → 0 and `f(r) ~ r^{-tail_decay}` as r → ∞;
/// `scales` lists radii where `f` changes regime.
pub struct RadialWeight<F> {
    pub f: F,
    pub head_decay: f64,
    pub tail_decay: f64,
    pub scales: Vec<f64>,
}

/// The pure power weight `r^{-α}`.
pub fn power_weight(alpha: f64) -> RadialWeight<impl Fn(f64) -> f64> {
    RadialWeight {
        f: move |r: f64| r.powf(-alpha),
        head_decay: alpha,
        tail_decay: alpha,
        scales: Vec::new(),
    }
}

/// `∫_{R^d} |p - q|^{-(d-2s)} f(|q|) dq` for momentum magnitude `p > 0`.
pub fn riesz_convolution<F: Fn(f64) -> f64>(
    d: u32,
    s: f64,
    p: f64,
    weight: &RadialWeight<F>,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(1..=3).contains(&d) {
        return Err(Error::param(format!("convolution quadrature supports d <= 3, got {d}")));
    }
    let df = d as f64;
    if !(s > 0.0 && s < df / 2.0) || !(p > 0.0) {
        return Err(Error::param(format!("bad convolution arguments s = {s}, p = {p}")));
    }
    let head = df - 1.0 - weight.head_decay;
    let tail = weight.tail_decay - 2.0 * s;
    if head <= -1.0 || tail <= 0.0 {
        return Err(Error::param(format!(
            "radial weight not integrable: head exponent {head}, tail decay {tail}"
        )));
    }
    let integrand = |r: f64| {
        if r <= 0.0 || r == p {
            return 0.0;
        }
        (weight.f)(r) * r.powf(df - 1.0) * angular_average(d, s, p, r)
    };

    let mut points = vec![0.5 * p, p, 2.0 * p];
    points.extend(weight.scales.iter().copied().filter(|c| *c > 0.0));
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let r_head = 0.5 * points[0];
    let r_tail = 2.0 * points[points.len() - 1];
    let mut nodes = vec![r_head];
    nodes.extend(points.iter().copied());
    nodes.push(r_tail);

    let singular_power = if s < 0.5 { 2.0 * s - 1.0 } else { -0.5 };
    let tol = Tolerance::rel(rel_tol).with_max_intervals(2000);

    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    let mut add = |r: QuadResult| {
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
    };

    add(quad::integrate_endpoint_singular(&integrand, 0.0, r_head, true, head, tol)?);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let r = if b == p {
            quad::integrate_endpoint_singular(&integrand, a, b, false, singular_power, tol)?
        } else if a == p {
            quad::integrate_endpoint_singular(&integrand, a, b, true, singular_power, tol)?
        } else {
            // log variable: power laws become smooth exponentials
            let (la, lb) = (a.ln(), b.ln());
            quad::integrate(
                |x: f64| {
                    let r = x.exp();
                    integrand(r) * r
                },
                la,
                lb,
                tol,
            )?
        };
        add(r);
    }
    add(quad::integrate_power_tail(&integrand, r_tail, tail, tol)?);
    Ok(total)
}
