//! Pseudo-relativistic spin model: the sharp constant C̃, the partial-wave
//! ground-state-representation forms with kernels k = Q_0 and
//! k̃ = (Q_0 + Q_1)/2, the ratio band they imply, and the HLT constant.
//!
//! In log variables x = ln p, y = ln q the forms read
//! `(c/2π) ∬ |G(x) − G(y)|² k(cosh(x − y)) dx dy = (c/π) ∫_0^∞ K(u) D(u) du`
//! with `D(u) = ∫ |G(x+u) − G(x)|² dx`. D vanishes like u² on the diagonal,
//! so product integration (hat functions in u against the exact kernel)
//! absorbs the logarithmic singularity of Q_0.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy_constants::{hardy_constant, DimParams};
use crate::lt_bounds::{self, HltConstant, L0Provider};
use crate::quad::gauss_legendre;
use crate::remainder;
use crate::specfun::legendre_q_excess;
use crate::verdict::Verdict;

/// Default C̃′ as a multiple of C̃; only existence of some C̃′ > C̃ is known.
pub const DEFAULT_C_TILDE_PRIME_FACTOR: f64 = 1.05;
/// Reduction to the j = 1/2 channel costs a factor 4 in the eigenvalue count.
pub const COUNTING_FACTOR: f64 = 4.0;
/// Spinor degeneracy m = ±1/2, kept as bookkeeping only.
pub const SPIN_MULTIPLICITY: u32 = 2;
/// Kernels decay like e^{-u}; the lag integral stops here.
const U_MAX: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TildeHardy {
    pub c_tilde: f64,
    pub c: f64,
    /// C̃/C = 2/(1 + (2/π)²)
    pub ratio: f64,
}

/// C̃ = 2/(2/π + π/2) = 4π/(4 + π²) alongside C = C_{1/2,3} = 2/π.
pub fn tilde_hardy_constant() -> TildeHardy {
    let c_tilde = 4.0 * PI / (4.0 + PI * PI);
    let c = hardy_constant(&DimParams::new(3, 0.5).expect("(3, 1/2) is valid")).expect("finite");
    TildeHardy {
        c_tilde,
        c,
        ratio: c_tilde / c,
    }
}

/// [1/(1+(2/π)²), 2/(1+(2/π)²)]
pub fn comp_band() -> (f64, f64) {
    let lower = 1.0 / (1.0 + (2.0 / PI).powi(2));
    (lower, 2.0 * lower)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// k̃ = (Q_0 + Q_1)/2 with c = C̃
    Tilde,
    /// k = Q_0 with c = C
    Reference,
}

impl Kernel {
    /// k(t) for t = cosh u, evaluated through t - 1 = 2 sinh²(u/2) to keep the diagonal accurate.
    pub fn at_lag(self, u: f64) -> Result<f64> {
        let excess = 2.0 * (0.5 * u).sinh().powi(2);
        let q0 = legendre_q_excess(0, excess)?;
        Ok(match self {
            Kernel::Reference => q0,
            Kernel::Tilde => 0.5 * (q0 + legendre_q_excess(1, excess)?),
        })
    }

    pub fn prefactor(self) -> f64 {
        let th = tilde_hardy_constant();
        match self {
            Kernel::Tilde => th.c_tilde,
            Kernel::Reference => th.c,
        }
    }
}

/// Q_0(t) - Q_1(t) and Q_1(t) at each t > 1; both must be ≥ 0.
pub fn kernel_sandwich(ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| {
            let e = t - 1.0;
            let (q0, q1) = (legendre_q_excess(0, e)?, legendre_q_excess(1, e)?);
            Ok((q0 - q1, q1))
        })
        .collect()
}

/// g sampled on a uniform grid in ln p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub label: String,
    pub log_p_min: f64,
    pub log_step: f64,
    pub values: Vec<f64>,
    /// |g| at the ends is below DECAY_TOL·max|g|
    pub decays_low: bool,
    pub decays_high: bool,
}

const DECAY_TOL: f64 = 1e-8;

impl RadialProfile {
    pub fn new(label: &str, log_p_min: f64, log_step: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::param("radial profile needs at least 8 samples"));
        }
        if !(log_step > 0.0 && log_step.is_finite() && log_p_min.is_finite()) {
            return Err(Error::param(format!("bad log grid: min {log_p_min}, step {log_step}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!("profile {label} has non-finite samples")));
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let end = |v: f64| v.abs() <= DECAY_TOL * peak;
        Ok(RadialProfile {
            label: label.to_string(),
            log_p_min,
            log_step,
            decays_low: end(values[0]),
            decays_high: end(values[values.len() - 1]),
            values,
        })
    }

    pub fn from_fn(label: &str, f: impl Fn(f64) -> f64, grid: &ProfileGrid) -> Result<Self> {
        let n = grid.points()?;
        let values = (0..n)
            .map(|i| f((grid.log_p_min + i as f64 * grid.log_step).exp()))
            .collect();
        Self::new(label, grid.log_p_min, grid.log_step, values)
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| (self.log_p_min + i as f64 * self.log_step).exp())
            .collect()
    }

    /// Σ|g|²/p · Δ(ln p)
    pub fn weighted_norm(&self) -> f64 {
        self.momenta()
            .iter()
            .zip(&self.values)
            .map(|(p, g)| g * g / p)
            .sum::<f64>()
            * self.log_step
    }

    /// Every other sample: the same profile at twice the step.
    pub fn coarsened(&self) -> RadialProfile {
        let values: Vec<f64> = self.values.iter().step_by(2).copied().collect();
        RadialProfile {
            values,
            log_step: 2.0 * self.log_step,
            ..self.clone()
        }
    }

    /// D(kh) for k = 0..=lags, with g continued by its edge values.
    fn lag_energies(&self, lags: usize) -> Vec<f64> {
        let g = &self.values;
        let n = g.len() as isize;
        let at = |i: isize| g[i.clamp(0, n - 1) as usize];
        (0..=lags)
            .into_par_iter()
            .map(|k| {
                let k = k as isize;
                (-k..n)
                    .map(|i| {
                        let d = at(i + k) - at(i);
                        d * d
                    })
                    .sum::<f64>()
                    * self.log_step
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub log_p_min: f64,
    pub log_p_max: f64,
    pub log_step: f64,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        ProfileGrid {
            log_p_min: -40.0,
            log_p_max: 12.0,
            log_step: 0.01,
        }
    }
}

impl ProfileGrid {
    pub fn points(&self) -> Result<usize> {
        let span = self.log_p_max - self.log_p_min;
        if !(span > 0.0 && self.log_step > 0.0) {
            return Err(Error::param("profile grid needs log_p_max > log_p_min and step > 0"));
        }
        Ok((span / self.log_step).round() as usize + 1)
    }
}

/// Named profile families, reachable from configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    /// p^a e^{-p}
    PowerExp { a: f64 },
    /// p^a e^{-p²}
    Gaussian { a: f64 },
    /// p^a / (1 + p)^b, b > a
    Rational { a: f64, b: f64 },
    /// exp(-(ln p - mu)²/(2 w²))
    LogNormal { mu: f64, w: f64 },
    /// p e^{-p} - c p² e^{-p²}: changes sign
    TwoScale { c: f64 },
}

impl ProfileFamily {
    pub fn label(&self) -> String {
        match self {
            ProfileFamily::PowerExp { a } => format!("p^{a} e^-p"),
            ProfileFamily::Gaussian { a } => format!("p^{a} e^-p^2"),
            ProfileFamily::Rational { a, b } => format!("p^{a}/(1+p)^{b}"),
            ProfileFamily::LogNormal { mu, w } => format!("lognormal({mu},{w})"),
            ProfileFamily::TwoScale { c } => format!("p e^-p - {c} p^2 e^-p^2"),
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        match *self {
            ProfileFamily::PowerExp { a } => p.powf(a) * (-p).exp(),
            ProfileFamily::Gaussian { a } => p.powf(a) * (-p * p).exp(),
            ProfileFamily::Rational { a, b } => p.powf(a) / (1.0 + p).powf(b),
            ProfileFamily::LogNormal { mu, w } => (-(p.ln() - mu).powi(2) / (2.0 * w * w)).exp(),
            ProfileFamily::TwoScale { c } => p * (-p).exp() - c * p * p * (-p * p).exp(),
        }
    }

    /// Profile dilated by λ: g(λp).
    pub fn sample(&self, grid: &ProfileGrid, dilation: f64) -> Result<RadialProfile> {
        RadialProfile::from_fn(&self.label(), |p| self.eval(dilation * p), grid)
    }

    /// Five families with different small- and large-momentum behaviour.
    pub fn standard_set() -> Vec<ProfileFamily> {
        vec![
            ProfileFamily::PowerExp { a: 0.5 },
            ProfileFamily::PowerExp { a: 1.0 },
            ProfileFamily::PowerExp { a: 2.0 },
            ProfileFamily::Gaussian { a: 1.5 },
            ProfileFamily::Rational { a: 1.0, b: 3.0 },
            ProfileFamily::LogNormal { mu: 0.5, w: 0.7 },
            ProfileFamily::TwoScale { c: 2.0 },
        ]
    }
}

/// Product-integration weights w_k = ∫_0^{U} K(u) φ_k(u) du for hat functions on u = kh.
fn lag_weights(kernel: Kernel, h: f64, lags: usize) -> Result<Vec<f64>> {
    let (nodes, gw) = gauss_legendre(12);
    let cells: Vec<(f64, f64)> = (0..lags)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64)> {
            let a = k as f64 * h;
            let (mut left, mut right) = (0.0, 0.0);
            for (x, w) in nodes.iter().zip(&gw) {
                // first cell: u = h v² removes the log singularity at u = 0
                let (v, jac) = if k == 0 {
                    let v = 0.5 * (x + 1.0);
                    (h * v * v, h * v)
                } else {
                    (a + 0.5 * h * (x + 1.0), 0.5 * h)
                };
                let kv = kernel.at_lag(v)? * w * jac;
                let frac = (v - a) / h;
                left += kv * (1.0 - frac);
                right += kv * frac;
            }
            Ok((left, right))
        })
        .collect::<Result<_>>()?;
    let mut weights = vec![0.0; lags + 1];
    for (k, (l, r)) in cells.into_iter().enumerate() {
        weights[k] += l;
        weights[k + 1] += r;
    }
    Ok(weights)
}

fn raw_form(profile: &RadialProfile, kernel: Kernel) -> Result<f64> {
    let h = profile.log_step;
    let lags = (U_MAX / h).ceil() as usize;
    let d = profile.lag_energies(lags);
    let w = lag_weights(kernel, h, lags)?;
    let integral: f64 = d.iter().zip(&w).map(|(a, b)| a * b).sum();
    Ok(kernel.prefactor() / PI * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: f64,
    /// |F_h - F_2h| / 3: the O(h²) estimate of the discretization error
    pub error: f64,
}

/// (c/2π)∬|g(p) − g(q)|² k(½(p/q + q/p)) dp/p dq/q.
pub fn channel_form(profile: &RadialProfile, kernel: Kernel, rel_tol: f64) -> Result<FormValue> {
    let fine = raw_form(profile, kernel)?;
    let coarse = raw_form(&profile.coarsened(), kernel)?;
    let error = (fine - coarse).abs() / 3.0;
    if error > rel_tol * fine.abs() && error > 1e-300 {
        return Err(Error::Quadrature {
            estimate: fine,
            error,
            wanted: rel_tol,
        });
    }
    Ok(FormValue { value: fine, error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrChannelForm {
    pub label: String,
    /// partial wave of the reference kernel; k̃ mixes l = 0 and l = 1
    pub channel: u32,
    pub spin_multiplicity: u32,
    pub tilde_form: f64,
    pub tilde_error: f64,
    pub reference_form: f64,
    pub reference_error: f64,
    pub ratio: f64,
    /// relative uncertainty of the ratio from both quadratures
    pub ratio_error: f64,
}

pub fn channel_forms(profile: &RadialProfile, rel_tol: f64) -> Result<BrChannelForm> {
    let tilde = channel_form(profile, Kernel::Tilde, rel_tol)?;
    let reference = channel_form(profile, Kernel::Reference, rel_tol)?;
    if !(reference.value > 0.0) {
        return Err(Error::param(format!(
            "profile {} has zero reference form; the ratio is undefined",
            profile.label
        )));
    }
    let ratio = tilde.value / reference.value;
    Ok(BrChannelForm {
        label: profile.label.clone(),
        channel: 0,
        spin_multiplicity: SPIN_MULTIPLICITY,
        tilde_form: tilde.value,
        tilde_error: tilde.error,
        reference_form: reference.value,
        reference_error: reference.error,
        ratio,
        ratio_error: ratio * (tilde.error / tilde.value + reference.error / reference.value),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompReport {
    pub lower: f64,
    pub upper: f64,
    pub tol_q: f64,
    pub forms: Vec<BrChannelForm>,
    pub verdicts: Vec<Verdict>,
}

impl CompReport {
    pub fn passed(&self) -> bool {
        crate::verdict::all_passed(&self.verdicts)
    }
}

/// Ratio C̃·F[k̃]/(C·F[k]) against the band, per profile, at quadrature budget tol_q.
pub fn comp_ratio_check(profiles: &[RadialProfile], tol_q: f64) -> Result<CompReport> {
    if profiles.is_empty() {
        return Err(Error::param("comp_ratio_check needs at least one profile"));
    }
    if !(tol_q > 0.0 && tol_q < 1.0) {
        return Err(Error::param(format!("tol_q must lie in (0, 1), got {tol_q}")));
    }
    let (lower, upper) = comp_band();
    // the forms themselves are held to a tenth of the ratio budget
    let forms: Vec<BrChannelForm> = profiles
        .par_iter()
        .map(|p| channel_forms(p, 0.1 * tol_q))
        .collect::<Result<_>>()?;
    let mut verdicts = Vec::new();
    for f in &forms {
        verdicts.push(
            Verdict::assert("comp_lower", "ratio >= 1/(1+(2/pi)^2) - tol_q", f.ratio - lower, tol_q)
                .with_detail(f.label.clone()),
        );
        verdicts.push(
            Verdict::assert("comp_upper", "ratio <= 2/(1+(2/pi)^2) + tol_q", upper - f.ratio, tol_q)
                .with_detail(f.label.clone()),
        );
    }
    Ok(CompReport {
        lower,
        upper,
        tol_q,
        forms,
        verdicts,
    })
}

/// r - [(1/2t) l^{2t-1} r^{2t} - ((1-2t)/2t) l^{-1}] ≥ 0, with equality at r = 1/l.
pub fn complement_power_slack(t: f64, l: f64, r: f64) -> f64 {
    let lower = l.powf(2.0 * t - 1.0) * r.powf(2.0 * t) / (2.0 * t) - (1.0 - 2.0 * t) / (2.0 * t * l);
    r - lower
}

fn check_br_t(t: f64) -> Result<()> {
    let window = remainder::t_window(3, 0.5);
    if !(t > 0.0 && t < 0.5 && window.contains(t)) {
        return Err(Error::param(format!(
            "t = {t} is outside (0, 1/2) intersected with the remainder window [{}, {})",
            window.lower, window.upper
        )));
    }
    Ok(())
}

/// K̃_t = min(K_t/(1+(2/π)²), ((C̃′−C̃)/C̃′)/(2t)).
pub fn br_remainder_constants(t: f64, k_t: f64, c_tilde_prime: f64) -> Result<f64> {
    check_br_t(t)?;
    let c_tilde = tilde_hardy_constant().c_tilde;
    if !(c_tilde_prime > c_tilde && c_tilde_prime.is_finite()) {
        return Err(Error::param(format!("need C~' > C~ = {c_tilde}, got {c_tilde_prime}")));
    }
    if !(k_t > 0.0 && k_t.is_finite()) {
        return Err(Error::param(format!("K_t must be positive, got {k_t}")));
    }
    let channel = k_t / (1.0 + (2.0 / PI).powi(2));
    let complement = (c_tilde_prime - c_tilde) / c_tilde_prime / (2.0 * t);
    Ok(channel.min(complement))
}

/// K̃_t with K_t from the remainder pipeline at d = 3, s = 1/2.
pub fn br_remainder_at(t: f64, c_tilde_prime: f64) -> Result<f64> {
    check_br_t(t)?;
    let k_t = remainder::hardyrem_constants(&DimParams::new(3, 0.5)?.with_t(t)?)?.k;
    br_remainder_constants(t, k_t, c_tilde_prime)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrHltConstant {
    pub gamma: f64,
    pub c_tilde: f64,
    pub c_tilde_prime: f64,
    pub c_tilde_prime_provenance: String,
    /// pipeline constant with K̃_t, before the counting factor
    pub pipeline: HltConstant,
    pub counting_factor: f64,
    pub counting_note: String,
    pub value: f64,
}

/// L̃^HLT_γ = 4 × (HLT pipeline at d = 3, s = 1/2 with K̃_t in place of K_t).
pub fn br_hlt_constant(
    gamma: f64,
    provider: &L0Provider,
    c_tilde_prime: f64,
    provenance: &str,
    grid: usize,
) -> Result<BrHltConstant> {
    let p = DimParams::new(3, 0.5)?.with_gamma(gamma)?;
    let pipeline = lt_bounds::optimize_t_with(&p, provider, grid, &|t| br_remainder_at(t, c_tilde_prime))?;
    Ok(BrHltConstant {
        gamma,
        c_tilde: tilde_hardy_constant().c_tilde,
        c_tilde_prime,
        c_tilde_prime_provenance: provenance.to_string(),
        value: COUNTING_FACTOR * pipeline.value,
        pipeline,
        counting_factor: COUNTING_FACTOR,
        counting_note: "eigenvalue count of the projected spin operator bounded by 4 N(-tau, H) of the scalar \
                        operator with the channel remainder"
            .into(),
    })
}
