//! Gamma-family functions and the Legendre functions of the second kind.
//!
//! All routines take real positive arguments. Small arguments are shifted
//! upward with the functional equation until the asymptotic (Stirling /
//! Bernoulli) series reaches full double precision, so there are no fitted
//! coefficient tables to trust.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Value together with a bound on its absolute evaluation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValue {
    pub value: f64,
    pub abs_error_estimate: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Threshold above which the asymptotic series are used directly.
const ASYMPTOTIC_MIN: f64 = 12.0;

fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("argument must be positive and finite, got {x}")))
    }
}

/// Stirling series for ln Γ(y), y ≥ 12.
fn ln_gamma_asymptotic(y: f64) -> f64 {
    // B_{2k} / (2k (2k-1)) for k = 1..7
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    (y - 0.5) * y.ln() - y + LN_SQRT_2PI + series * inv
}

/// Shift `x` up to the asymptotic region; returns (y, product of the skipped factors).
fn shift_up(x: f64) -> (f64, f64) {
    let mut y = x;
    let mut prod = 1.0;
    while y < ASYMPTOTIC_MIN {
        prod *= y;
        y += 1.0;
    }
    (y, prod)
}

pub(crate) fn ln_gamma_raw(x: f64) -> f64 {
    let (y, prod) = shift_up(x);
    ln_gamma_asymptotic(y) - prod.ln()
}

/// Natural logarithm of Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<SpecialValue> {
    check_positive("log_gamma", x)?;
    let (y, prod) = shift_up(x);
    let head = ln_gamma_asymptotic(y);
    let tail = prod.ln();
    let value = head - tail;
    // rounding in each of the two large terms plus the log of a product of at most 12 factors
    let scale = (y - 0.5) * y.ln().abs() + y + tail.abs() + 1.0;
    Ok(SpecialValue {
        value,
        abs_error_estimate: 16.0 * f64::EPSILON * scale,
    })
}

/// Γ(a) / Γ(b) evaluated in log space.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    check_positive("gamma_ratio", a)?;
    check_positive("gamma_ratio", b)?;
    Ok((ln_gamma_raw(a) - ln_gamma_raw(b)).exp())
}

/// Γ(x) for x > 0 (overflows to +inf above ~171.6).
pub fn gamma(x: f64) -> Result<f64> {
    check_positive("gamma", x)?;
    Ok(ln_gamma_raw(x).exp())
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    let mut y = x;
    let mut acc = 0.0;
    while y < ASYMPTOTIC_MIN {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // B_{2k} / (2k) for k = 1..7
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    Ok(acc + y.ln() - 0.5 / y - series * inv2)
}

/// Trigamma ψ'(x).
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    let mut y = x;
    let mut acc = 0.0;
    while y < ASYMPTOTIC_MIN {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    // B_{2k} for k = 1..7
    const C: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    Ok(acc + inv + 0.5 * inv2 + series * inv2 * inv)
}

/// Legendre function of the second kind Q_l(t), l ∈ {0, 1}, t > 1.
pub fn legendre_q(l: u32, t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::domain("legendre_q", format!("need t > 1, got {t}")));
    }
    legendre_q_excess(l, t - 1.0)
}

/// Q_l(1 + excess), for callers that know `t - 1` more accurately than `t`.
///
/// Kernels sampled near the diagonal (t = cosh u with small u) lose all their
/// digits if `t - 1` is recomputed from `t`.
pub fn legendre_q_excess(l: u32, excess: f64) -> Result<f64> {
    if !(excess > 0.0) || !excess.is_finite() {
        return Err(Error::domain(
            "legendre_q",
            format!("need t - 1 > 0, got {excess}"),
        ));
    }
    let q0 = 0.5 * (2.0 / excess).ln_1p();
    match l {
        0 => Ok(q0),
        1 => {
            let t = 1.0 + excess;
            if t > 4.0 {
                // t·artanh(1/t) - 1 = Σ_{k≥1} t^{-2k} / (2k+1)
                let z = 1.0 / (t * t);
                let mut term = z;
                let mut sum: f64 = 0.0;
                let mut k = 1.0;
                while term > 1e-18 * sum.max(f64::MIN_POSITIVE) {
                    sum += term / (2.0 * k + 1.0);
                    term *= z;
                    k += 1.0;
                }
                Ok(sum)
            } else {
                Ok(t * q0 - 1.0)
            }
        }
        _ => Err(Error::domain("legendre_q", format!("only l = 0, 1 supported, got {l}"))),
    }
}

/// ln(π / sin πx), the right side of the reflection formula; used by tests.
pub fn reflection_rhs(x: f64) -> f64 {
    (PI / (PI * x).sin()).ln()
}
