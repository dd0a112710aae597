//! Hardy–Lieb–Thirring constants
//!
//! ```text
//! tr((-Δ)^s - C_{s,d}|x|^{-2s} - V)_-^γ ≤ L ∫ V^{γ + d/2s} dx
//! ```
//!
//! assembled from the remainder constant `K_t`, a CLR constant `L0` for
//! `(-Δ)^t`, and a split parameter σ, then optimized over σ (in closed form)
//! and over t (numerically).

use std::f64::consts::{E, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy_constants::DimParams;
use crate::quad::{self, Tolerance};
use crate::remainder;
use crate::specfun::{self, ln_gamma_raw};

pub const DEFAULT_T_GRID: usize = 64;
pub const GOLDEN_WIDTH: f64 = 1e-10;

/// κ₀ = d(s-t)/(2st), the power of σ in the counting bound.
pub fn kappa0(d: f64, s: f64, t: f64) -> f64 {
    d * (s - t) / (2.0 * s * t)
}

fn validated(p: &DimParams) -> Result<(f64, f64, f64, f64)> {
    let gamma = p.gamma()?;
    let t = p.t()?;
    let d = p.dim();
    let s = p.s;
    let k0 = kappa0(d, s, t);
    if !(gamma - k0 > 0.0) {
        return Err(Error::param(format!(
            "t = {t} must exceed ds/(2γs+d) = {} (Γ(γ - κ₀) has a pole there)",
            d * s / (2.0 * gamma * s + d)
        )));
    }
    Ok((d, s, t, gamma))
}

fn check_sigma_inputs(sigma: f64, l0: f64, k: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::param(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    if !(l0 > 0.0 && l0.is_finite()) {
        return Err(Error::param(format!("L0 must be positive, got {l0}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param(format!("K must be positive, got {k}")));
    }
    Ok(())
}

/// ln of the bound `γ L0 K^{-d/2t} σ^{-κ₀} (1-σ)^{-γ+κ₀} Γ(γ-κ₀) Γ(d/2t+1) / Γ(γ+d/2s+1)`.
pub fn ln_hlt_constant_at(p: &DimParams, sigma: f64, l0: f64, k: f64) -> Result<f64> {
    let (d, s, t, gamma) = validated(p)?;
    check_sigma_inputs(sigma, l0, k)?;
    let k0 = kappa0(d, s, t);
    Ok(gamma.ln() + l0.ln() - d / (2.0 * t) * k.ln() - k0 * sigma.ln()
        + (k0 - gamma) * (-sigma).ln_1p()
        + ln_gamma_raw(gamma - k0)
        + ln_gamma_raw(d / (2.0 * t) + 1.0)
        - ln_gamma_raw(gamma + d / (2.0 * s) + 1.0))
}

pub fn hlt_constant_at(p: &DimParams, sigma: f64, l0: f64, k: f64) -> Result<f64> {
    let v = ln_hlt_constant_at(p, sigma, l0, k)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(format!("HLT constant overflows (ln value exceeds f64 range) at sigma = {sigma}")))
    }
}

/// The same expression evaluated term by term; overflows where the log form does not.
pub fn hlt_constant_at_naive(p: &DimParams, sigma: f64, l0: f64, k: f64) -> Result<f64> {
    let (d, s, t, gamma) = validated(p)?;
    check_sigma_inputs(sigma, l0, k)?;
    let k0 = kappa0(d, s, t);
    Ok(gamma
        * l0
        * k.powf(-d / (2.0 * t))
        * sigma.powf(-k0)
        * (1.0 - sigma).powf(k0 - gamma)
        * specfun::gamma(gamma - k0)?
        * specfun::gamma(d / (2.0 * t) + 1.0)?
        / specfun::gamma(gamma + d / (2.0 * s) + 1.0)?)
}

/// σ* = d(s-t)/(2γst), the minimizer of the bound over σ.
pub fn optimize_sigma(p: &DimParams) -> Result<f64> {
    let gamma = p.gamma()?;
    let t = p.t()?;
    let sigma = kappa0(p.dim(), p.s, t) / gamma;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::param(format!(
            "optimal sigma = {sigma} outside (0, 1); need t > ds/(2γs+d)"
        )));
    }
    Ok(sigma)
}

/// `γ ∫_0^∞ τ^{γ-1-κ₀} (v - (1-σ)τ)_+^{d/2t} dτ` in closed form.
pub fn tau_integral_closed_form(p: &DimParams, sigma: f64, v: f64) -> Result<f64> {
    let (d, s, t, gamma) = validated(p)?;
    if !(sigma > 0.0 && sigma < 1.0 && v > 0.0) {
        return Err(Error::param("need 0 < sigma < 1 and v > 0"));
    }
    let k0 = kappa0(d, s, t);
    let ln = gamma.ln() + (k0 - gamma) * (-sigma).ln_1p() + (gamma + d / (2.0 * s)) * v.ln()
        + ln_gamma_raw(gamma - k0)
        + ln_gamma_raw(d / (2.0 * t) + 1.0)
        - ln_gamma_raw(gamma + d / (2.0 * s) + 1.0);
    Ok(ln.exp())
}

/// The τ-integral by adaptive quadrature, split at the midpoint of its support.
pub fn tau_integral_quadrature(p: &DimParams, sigma: f64, v: f64, rel_tol: f64) -> Result<f64> {
    let (d, s, t, gamma) = validated(p)?;
    if !(sigma > 0.0 && sigma < 1.0 && v > 0.0) {
        return Err(Error::param("need 0 < sigma < 1 and v > 0"));
    }
    let k0 = kappa0(d, s, t);
    let end = v / (1.0 - sigma);
    let power = d / (2.0 * t);
    let f = |tau: f64| tau.powf(gamma - 1.0 - k0) * (v - (1.0 - sigma) * tau).max(0.0).powf(power);
    let tol = Tolerance::rel(rel_tol);
    let half = 0.5 * end;
    let left = quad::integrate_endpoint_singular(f, 0.0, half, true, gamma - 1.0 - k0, tol)?;
    let right = quad::integrate_endpoint_singular(f, half, end, false, power, tol)?;
    Ok(gamma * (left.value + right.value))
}

/// Source of the CLR constant `L_{0,d,t}` for `(-Δ)^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum L0Provider {
    Constant { value: f64, provenance: String },
    /// Phase-space volume `|B_1|/(2π)^d` times a multiplier ≥ 1.
    Semiclassical { multiplier: f64 },
    /// Values at tabulated t, linearly interpolated; t outside the table is an error.
    Table { points: Vec<(f64, f64)>, provenance: String },
}

/// `|B_1| / (2π)^d`, the semiclassical CLR constant (independent of t).
pub fn semiclassical_l0(d: u32) -> f64 {
    let df = d as f64;
    (0.5 * df * PI.ln() - ln_gamma_raw(0.5 * df + 1.0) - df * (2.0 * PI).ln()).exp()
}

impl L0Provider {
    pub fn l0(&self, d: u32, t: f64) -> Result<f64> {
        let v = match self {
            L0Provider::Constant { value, .. } => *value,
            L0Provider::Semiclassical { multiplier } => multiplier * semiclassical_l0(d),
            L0Provider::Table { points, .. } => {
                let mut pts = points.clone();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let (first, last) = match (pts.first(), pts.last()) {
                    (Some(f), Some(l)) => (*f, *l),
                    _ => return Err(Error::param("empty L0 table")),
                };
                if t < first.0 || t > last.0 {
                    return Err(Error::param(format!(
                        "t = {t} outside the L0 table range [{}, {}]",
                        first.0, last.0
                    )));
                }
                let i = pts.partition_point(|q| q.0 <= t).clamp(1, pts.len().max(2) - 1);
                if pts.len() == 1 {
                    first.1
                } else {
                    let (a, b) = (pts[i - 1], pts[i]);
                    let w = if b.0 > a.0 { (t - a.0) / (b.0 - a.0) } else { 0.0 };
                    a.1 + w * (b.1 - a.1)
                }
            }
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(format!("L0 must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn provenance(&self) -> String {
        match self {
            L0Provider::Constant { value, provenance } => format!("constant {value}: {provenance}"),
            L0Provider::Semiclassical { multiplier } => {
                format!("semiclassical |B_1|/(2pi)^d times multiplier {multiplier}")
            }
            L0Provider::Table { points, provenance } => {
                format!("table with {} points: {provenance}", points.len())
            }
        }
    }
}

/// Open t-interval on which the pipeline certifies the bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TInterval {
    pub lower: f64,
    pub upper: f64,
}

pub fn admissible_interval(p: &DimParams) -> Result<TInterval> {
    let gamma = p.gamma()?;
    let d = p.dim();
    let s = p.s;
    let window = remainder::t_window(p.d, s);
    let pole = d * s / (2.0 * gamma * s + d);
    let lower = window.lower.max(pole);
    if !(lower < s) {
        return Err(Error::param(format!(
            "empty admissible t-interval ({lower}, {s}); the bound holds but this pipeline cannot certify it"
        )));
    }
    Ok(TInterval { lower, upper: s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HltConstant {
    pub gamma: f64,
    pub d: u32,
    pub s: f64,
    pub t_star: f64,
    pub sigma_star: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "K_t")]
    pub k_t: f64,
    pub value: f64,
    pub magnetic_value: f64,
    pub p_moment: f64,
    pub interval: TInterval,
    pub grid: usize,
    pub l0_provenance: String,
}

/// σ-optimized bound at one t, with its ingredients.
pub fn hlt_at_t<K>(p: &DimParams, provider: &L0Provider, k_of: &K, t: f64) -> Result<(f64, f64, f64, f64)>
where
    K: Fn(f64) -> Result<f64>,
{
    let pt = p.with_t(t)?;
    let sigma = optimize_sigma(&pt)?;
    let l0 = provider.l0(p.d, t)?;
    let k = k_of(t)?;
    let v = hlt_constant_at(&pt, sigma, l0, k)?;
    Ok((v, sigma, l0, k))
}

/// Minimize over t with `K_t` from the remainder pipeline.
pub fn optimize_t(p: &DimParams, provider: &L0Provider, grid: usize) -> Result<HltConstant> {
    let base = *p;
    optimize_t_with(p, provider, grid, &|t| Ok(remainder::hardyrem_constants(&base.with_t(t)?)?.k))
}

/// Minimize over t for an arbitrary remainder constant `t ↦ K_t`.
///
/// A coarse grid (evaluated in parallel, reduced by value then by smaller t)
/// seeds golden-section search on the two neighbouring cells.
pub fn optimize_t_with<K>(p: &DimParams, provider: &L0Provider, grid: usize, k_of: &K) -> Result<HltConstant>
where
    K: Fn(f64) -> Result<f64> + Sync,
{
    let gamma = p.gamma()?;
    if grid < 3 {
        return Err(Error::param("t-grid needs at least 3 points"));
    }
    let iv = admissible_interval(p)?;
    let step = (iv.upper - iv.lower) / (grid + 1) as f64;
    let nodes: Vec<f64> = (1..=grid).map(|i| iv.lower + i as f64 * step).collect();
    let objective = |t: f64| match hlt_at_t(p, provider, k_of, t) {
        Ok((v, ..)) => v.ln(),
        Err(_) => f64::INFINITY,
    };
    let values: Vec<f64> = nodes.par_iter().map(|&t| objective(t)).collect();
    let best = (0..grid)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("grid is nonempty");
    if !values[best].is_finite() {
        return Err(Error::param("HLT bound is infinite on the whole t-grid"));
    }
    let lo = if best == 0 { iv.lower } else { nodes[best - 1] };
    let hi = if best + 1 == grid { iv.upper } else { nodes[best + 1] };
    let (t_star, ln_v) = quad::golden_min(objective, lo, hi, GOLDEN_WIDTH);
    let (t_star, _) = if ln_v <= values[best] {
        (t_star, ln_v)
    } else {
        (nodes[best], values[best])
    };
    let (value, sigma_star, l0, k_t) = hlt_at_t(p, provider, k_of, t_star)?;
    let p_moment = gamma + p.dim() / (2.0 * p.s);
    Ok(HltConstant {
        gamma,
        d: p.d,
        s: p.s,
        t_star,
        sigma_star,
        l0,
        k_t,
        value,
        magnetic_value: value * magnetic_factor(p_moment)?,
        p_moment,
        interval: iv,
        grid,
        l0_provenance: provider.provenance(),
    })
}

/// (e/p)^p Γ(p+1): the price of the diamagnetic transfer.
pub fn magnetic_factor(p_moment: f64) -> Result<f64> {
    if !(p_moment > 0.0 && p_moment.is_finite()) {
        return Err(Error::domain("magnetic_factor", format!("need p > 0, got {p_moment}")));
    }
    Ok((p_moment * (1.0 - p_moment.ln()) + ln_gamma_raw(p_moment + 1.0)).exp())
}

/// t^{-p} e^t Γ(p+1), minimized over t > 0 at t = p.
pub fn magnetic_factor_at(p_moment: f64, t: f64) -> Result<f64> {
    if !(p_moment > 0.0) || !(t > 0.0) {
        return Err(Error::domain("magnetic_factor_at", format!("need p, t > 0, got {p_moment}, {t}")));
    }
    Ok((t - p_moment * t.ln() + ln_gamma_raw(p_moment + 1.0)).exp())
}

/// L (e/p)^p Γ(p+1), the magnetic constant implied by a non-magnetic constant L.
pub fn transfer_bound(l: f64, gamma: f64, p_moment: f64) -> Result<f64> {
    if !(l >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::domain("transfer_bound", format!("need L, gamma >= 0, got {l}, {gamma}")));
    }
    Ok(l * magnetic_factor(p_moment)?)
}

/// e, the factor at p = 1.
pub const MAGNETIC_FACTOR_AT_ONE: f64 = E;
