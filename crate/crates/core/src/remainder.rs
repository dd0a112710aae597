//! Explicit constants for the Hardy remainder inequality
//!
//! ```text
//! (-Δ)^s - C_{s,d}|x|^{-2s} ≥ K l^{-2(s-t)} (-Δ)^t - l^{-2s},   l > 0,
//! h_s[u]^θ ‖u‖^{2(1-θ)} ≥ κ ‖(-Δ)^{t/2} u‖²,                    θ = t/s,
//! ```
//!
//! built from the trial weight `h(p) = (|p|^{(d+2s)/2} + l^{β-(d+2s)/2}|p|^β)^{-1}`
//! with `β = 2t + (d-2s)/2`. Everything is evaluated at `l = 1`; other
//! values of `l` follow by scaling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolution::{riesz_convolution, RadialWeight};
use crate::error::{Error, Result};
use crate::hardy_constants::{psi_function, DimParams};
use crate::verdict::Verdict;

/// Slack used when comparing β against the closed window endpoint at t = 2s/3.
const WINDOW_SLACK: f64 = 1e-12;

/// Admissible `t` range of the remainder construction for given `(d, s)`.
///
/// `t ≥ 2s/3` keeps the last exponent of the expansion non-negative; the
/// Ψ-arguments stay inside (2s, d) only for `t > (10s - d)/8`, which is the
/// binding constraint when `s > 3d/14`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TWindow {
    pub lower: f64,
    pub lower_closed: bool,
    pub upper: f64,
}

impl TWindow {
    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lower_closed {
            t >= self.lower - WINDOW_SLACK
        } else {
            t > self.lower
        };
        above && t < self.upper
    }
}

pub fn t_window(d: u32, s: f64) -> TWindow {
    let df = d as f64;
    let two_thirds = 2.0 * s / 3.0;
    let finiteness = (10.0 * s - df) / 8.0;
    if finiteness >= two_thirds {
        TWindow {
            lower: finiteness,
            lower_closed: false,
            upper: s,
        }
    } else {
        TWindow {
            lower: two_thirds,
            lower_closed: true,
            upper: s,
        }
    }
}

/// β = 2t + (d-2s)/2, with every window condition checked.
pub fn beta_of(p: &DimParams) -> Result<f64> {
    let t = p.t()?;
    let d = p.dim();
    let s = p.s;
    if t < 2.0 * s / 3.0 - WINDOW_SLACK {
        return Err(Error::param(format!(
            "t = {t} below 2s/3 = {}: the remainder construction needs 2s/3 <= t < s",
            2.0 * s / 3.0
        )));
    }
    let beta = 2.0 * t + (d - 2.0 * s) / 2.0;
    let lower_finite = (d + 6.0 * s) / 4.0;
    let upper_finite = (3.0 * d + 2.0 * s) / 4.0;
    let mid = (d + 2.0 * s) / 2.0;
    let nonneg = (3.0 * d + 2.0 * s) / 6.0;
    if !(beta > lower_finite) {
        return Err(Error::param(format!(
            "beta = {beta} <= (d+6s)/4 = {lower_finite}; need t > (10s-d)/8 = {}",
            (10.0 * s - d) / 8.0
        )));
    }
    if !(beta < upper_finite) {
        return Err(Error::param(format!("beta = {beta} >= (3d+2s)/4 = {upper_finite}")));
    }
    if !(beta <= mid) || beta == mid {
        return Err(Error::param(format!("beta = {beta} must stay below (d+2s)/2 = {mid}")));
    }
    if beta < nonneg - WINDOW_SLACK {
        return Err(Error::param(format!("beta = {beta} < (3d+2s)/6 = {nonneg}")));
    }
    Ok(beta)
}

/// Coefficients of |p|^{2s}, |p|^{2t}, |p|^{2β-d}, |p|^{3β-3d/2-s} in the bound on t_h at l = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    pub beta: f64,
    pub c_lead: f64,
    /// subtracted coefficient, Ψ(d+2s-β) - Ψ((d+2s)/2) > 0
    pub c_neg: f64,
    pub c_mid: f64,
    pub c_far: f64,
}

pub fn expansion_coeffs(p: &DimParams) -> Result<ExpansionCoeffs> {
    let beta = beta_of(p)?;
    let d = p.dim();
    let s = p.s;
    let mid = (d + 2.0 * s) / 2.0;
    let psi_mid = psi_function(p, mid)?;
    let psi_reflect = psi_function(p, d + 2.0 * s - beta)?;
    let psi_far = psi_function(p, 3.0 * mid - 2.0 * beta)?;
    Ok(ExpansionCoeffs {
        beta,
        c_lead: psi_mid,
        c_neg: psi_reflect - psi_mid,
        c_mid: psi_far - psi_reflect,
        c_far: psi_far,
    })
}

/// Sharp Young-type split `r^a ≤ ε r^b + C ε^{exponent}` for all r ≥ 0, ε > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub a: f64,
    pub b: f64,
    pub eps_exponent: f64,
    pub constant: f64,
}

impl PowerSplit {
    /// C ε^{exponent}, the constant left after absorbing `ε r^b`.
    pub fn remainder(&self, eps: f64) -> f64 {
        self.constant * eps.powf(self.eps_exponent)
    }

    pub fn ln_remainder(&self, eps: f64) -> f64 {
        self.constant.ln() + self.eps_exponent * eps.ln()
    }
}

/// Returns `C = (a/b)^{a/(b-a)} (b-a)/b` and exponent `-a/(b-a)`; needs `0 ≤ a < b`.
pub fn power_split(a: f64, b: f64) -> Result<PowerSplit> {
    if !(a >= 0.0 && a < b) || !b.is_finite() {
        return Err(Error::param(format!("power_split needs 0 <= a < b, got a = {a}, b = {b}")));
    }
    let gap = b - a;
    let constant = if a == 0.0 {
        1.0
    } else {
        (a / b).powf(a / gap) * gap / b
    };
    Ok(PowerSplit {
        a,
        b,
        eps_exponent: -a / gap,
        constant,
    })
}

/// The pointwise bound `t_h(p) ≤ c_lead|p|^{2s} - A|p|^{2t} + B` at l = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBound {
    pub coeffs: ExpansionCoeffs,
    pub eps: f64,
    pub mid_split: PowerSplit,
    pub far_split: PowerSplit,
    /// coefficient of |p|^{2t} absorbed from the two split terms
    pub absorbed: f64,
    pub a: f64,
    /// may overflow to +inf as t → s; `ln_b` stays finite
    pub b: f64,
    pub ln_b: f64,
}

impl TBound {
    pub fn upper(&self, momentum: f64, s: f64, t: f64) -> f64 {
        self.coeffs.c_lead * momentum.powf(2.0 * s) - self.a * momentum.powf(2.0 * t) + self.b
    }

    /// The three-term bound before the ε-splits (exact convolution of the alternating expansion).
    pub fn unsplit_upper(&self, momentum: f64, p: &DimParams) -> f64 {
        let c = &self.coeffs;
        let d = p.dim();
        let s = p.s;
        let beta = c.beta;
        c.c_lead * momentum.powf(2.0 * s) - c.c_neg * momentum.powf(beta - (d - 2.0 * s) / 2.0)
            + c.c_mid * momentum.powf(2.0 * beta - d)
            + c.c_far * momentum.powf(3.0 * beta - 1.5 * d - s)
    }
}

/// Absorb half of `c_neg` into the two lower-order terms and collect the constants.
pub fn assemble_tbound(p: &DimParams) -> Result<TBound> {
    let coeffs = expansion_coeffs(p)?;
    let t = p.t()?;
    let d = p.dim();
    let s = p.s;
    let beta = coeffs.beta;
    let target = 2.0 * t;
    let mid_split = power_split((2.0 * beta - d).max(0.0), target)?;
    let far_split = power_split((3.0 * beta - 1.5 * d - s).max(0.0), target)?;

    let mid_weight = coeffs.c_mid.max(0.0);
    let absorbed = 0.5 * coeffs.c_neg;
    let eps = absorbed / (mid_weight + coeffs.c_far);
    let ln_terms = [
        mid_weight.ln() + mid_split.ln_remainder(eps),
        coeffs.c_far.ln() + far_split.ln_remainder(eps),
    ];
    let top = ln_terms[0].max(ln_terms[1]);
    let ln_b = top + ln_terms.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    let b = ln_b.exp();
    let a = coeffs.c_neg - absorbed;
    Ok(TBound {
        coeffs,
        eps,
        mid_split,
        far_split,
        absorbed,
        a,
        b,
        ln_b,
    })
}

/// Full set of constants for the remainder inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderCertificate {
    pub d: u32,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    pub beta: f64,
    pub c_lead: f64,
    pub c_neg: f64,
    pub c_mid: f64,
    pub c_far: f64,
    pub eps: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub ln_b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub kappa: f64,
    /// ε-exponent of the |p|^{2β-d} split, -2(2β-d)/(d+2s-2β)
    pub mid_split_exponent: f64,
    /// the same exponent with 2β+d in the numerator, kept for comparison only
    pub mid_split_exponent_plus_variant: f64,
    pub far_split_exponent: f64,
    pub notes: Vec<String>,
}

/// θ^θ (1-θ)^{1-θ}: the factor between K and κ under optimization over l.
pub fn k_kappa_factor(theta: f64) -> f64 {
    theta.powf(theta) * (1.0 - theta).powf(1.0 - theta)
}

/// Convert the t_h bound into `K_{d,s,t}` and `κ_{d,s,t}`.
///
/// Dividing the bound by `c_lead = Ψ((d+2s)/2)` gives
/// `h_s ≥ (A/c_lead)(-Δ)^t - B/c_lead` at l = 1; rescaling l normalizes the
/// constant term to `l^{-2s}`. Optimizing the resulting family over l gives
/// `κ = K θ^θ (1-θ)^{1-θ}`.
pub fn hardyrem_constants(p: &DimParams) -> Result<RemainderCertificate> {
    let tb = assemble_tbound(p)?;
    let t = p.t()?;
    let s = p.s;
    let d = p.dim();
    let theta = t / s;
    let lead = tb.coeffs.c_lead;
    let k = (tb.a / lead) * (-(s - t) / s * (tb.ln_b - lead.ln())).exp();
    let kappa = k * k_kappa_factor(theta);
    let beta = tb.coeffs.beta;
    let denom = d + 2.0 * s - 2.0 * beta;
    let notes = vec![
        "epsilon = c_neg / (2 (max(c_mid, 0) + c_far)), so A = c_neg / 2".to_string(),
        format!(
            "|p|^(2beta-d) split uses exponent -2(2beta-d)/(d+2s-2beta) = {:.12}; the 2beta+d variant ({:.12}) is not a valid Young exponent",
            tb.mid_split.eps_exponent,
            -2.0 * (2.0 * beta + d) / denom
        ),
    ];
    Ok(RemainderCertificate {
        d: p.d,
        s,
        t,
        theta,
        beta,
        c_lead: lead,
        c_neg: tb.coeffs.c_neg,
        c_mid: tb.coeffs.c_mid,
        c_far: tb.coeffs.c_far,
        eps: tb.eps,
        a: tb.a,
        b: tb.b,
        ln_b: tb.ln_b,
        k,
        kappa,
        mid_split_exponent: tb.mid_split.eps_exponent,
        mid_split_exponent_plus_variant: -2.0 * (2.0 * beta + d) / denom,
        far_split_exponent: tb.far_split.eps_exponent,
        notes,
    })
}

impl RemainderCertificate {
    /// Relative defect of `K = κ / (θ^θ (1-θ)^{1-θ})`.
    pub fn k_kappa_relation_error(&self) -> f64 {
        let implied = self.kappa / k_kappa_factor(self.theta);
        (implied - self.k).abs() / self.k.abs()
    }

    pub fn all_positive(&self) -> bool {
        self.a > 0.0 && self.ln_b.is_finite() && self.k > 0.0 && self.kappa > 0.0 && self.c_neg > 0.0
    }
}

/// t_h(p) = h(p)^{-1} ∫ h(q) |p-q|^{-(d-2s)} dq by quadrature, relative accuracy `rel_tol`.
pub fn th_quadrature(p: &DimParams, momentum: f64, l: f64) -> Result<f64> {
    th_quadrature_tol(p, momentum, l, 1e-5)
}

pub fn th_quadrature_tol(p: &DimParams, momentum: f64, l: f64, rel_tol: f64) -> Result<f64> {
    if !(1..=3).contains(&p.d) {
        return Err(Error::param(format!("th_quadrature supports d <= 3, got {}", p.d)));
    }
    if !(momentum > 0.0 && l > 0.0) {
        return Err(Error::param("momentum and l must be positive"));
    }
    let beta = beta_of(p)?;
    let d = p.dim();
    let m = (d + 2.0 * p.s) / 2.0;
    let c = l.powf(beta - m);
    let weight = RadialWeight {
        f: move |r: f64| 1.0 / (r.powf(m) + c * r.powf(beta)),
        head_decay: beta,
        tail_decay: m,
        scales: vec![1.0 / l],
    };
    let inner_tol = (rel_tol * 0.1).max(1e-11);
    let r = riesz_convolution(p.d, p.s, momentum, &weight, inner_tol)?;
    if r.error > rel_tol * r.value.abs() {
        return Err(Error::Quadrature {
            estimate: r.value,
            error: r.error,
            wanted: rel_tol * r.value.abs(),
        });
    }
    Ok(r.value * (momentum.powf(m) + c * momentum.powf(beta)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TBoundRow {
    pub momentum: f64,
    pub th: f64,
    pub upper: f64,
    pub unsplit: f64,
    pub slack: f64,
    /// -1e-6 c_lead |p|^{2s}
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TBoundCheck {
    pub d: u32,
    pub s: f64,
    pub t: f64,
    pub rows: Vec<TBoundRow>,
    /// min over rows of slack / (c_lead |p|^{2s})
    pub worst_relative_slack: f64,
    pub verdict: Verdict,
}

/// `t_h(p) ≤ c_lead|p|^{2s} - A|p|^{2t} + B` on `points` log-spaced momenta in [p_min, p_max],
/// against the quadrature oracle for t_h.
pub fn tbound_check(p: &DimParams, p_min: f64, p_max: f64, points: usize) -> Result<TBoundCheck> {
    if !(p_min > 0.0 && p_max > p_min && points >= 2) {
        return Err(Error::param("tbound_check needs 0 < p_min < p_max and at least 2 points"));
    }
    let tb = assemble_tbound(p)?;
    let (s, t) = (p.s, p.t()?);
    let ratio = (p_max / p_min).ln() / (points - 1) as f64;
    let rows = (0..points)
        .into_par_iter()
        .map(|i| {
            let momentum = p_min * (ratio * i as f64).exp();
            let th = th_quadrature(p, momentum, 1.0)?;
            let upper = tb.upper(momentum, s, t);
            Ok(TBoundRow {
                momentum,
                th,
                upper,
                unsplit: tb.unsplit_upper(momentum, p),
                slack: upper - th,
                floor: -1e-6 * tb.coeffs.c_lead * momentum.powf(2.0 * s),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_relative_slack = rows
        .iter()
        .map(|r| r.slack / (tb.coeffs.c_lead * r.momentum.powf(2.0 * s)))
        .fold(f64::INFINITY, f64::min);
    let verdict = Verdict::assert(
        "tbound",
        "t_h(p) <= c_lead |p|^{2s} - A |p|^{2t} + B",
        worst_relative_slack,
        1e-6,
    )
    .with_detail(format!("d = {}, s = {s}, t = {t}, {points} momenta", p.d));
    Ok(TBoundCheck {
        d: p.d,
        s,
        t,
        rows,
        worst_relative_slack,
        verdict,
    })
}
