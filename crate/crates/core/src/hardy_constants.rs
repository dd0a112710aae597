//! The sharp Hardy constant, the Riesz-kernel normalization `b_α`, and the
//! convolution function Ψ together with certificates of its shape.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::specfun::{self, ln_gamma_raw};

/// Dimension and exponents `(d, s, t, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimParams {
    pub d: u32,
    pub s: f64,
    pub t: Option<f64>,
    pub gamma: Option<f64>,
}

impl DimParams {
    /// Requires `d ≥ 1` and `0 < s < d/2`.
    pub fn new(d: u32, s: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        if !(s > 0.0 && s < d as f64 / 2.0) {
            return Err(Error::param(format!("need 0 < s < d/2, got s = {s}, d = {d}")));
        }
        Ok(DimParams {
            d,
            s,
            t: None,
            gamma: None,
        })
    }

    /// Attach `t` with `0 < t < s`.
    pub fn with_t(mut self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < self.s) {
            return Err(Error::param(format!("need 0 < t < s = {}, got t = {t}", self.s)));
        }
        self.t = Some(t);
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param(format!("need gamma > 0, got {gamma}")));
        }
        self.gamma = Some(gamma);
        Ok(self)
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn t(&self) -> Result<f64> {
        self.t.ok_or_else(|| Error::param("t is required here"))
    }

    pub fn gamma(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::param("gamma is required here"))
    }

    /// θ = t/s.
    pub fn theta(&self) -> Result<f64> {
        Ok(self.t()? / self.s)
    }

    /// (d + 2s)/2, the symmetry point of Ψ.
    pub fn midpoint(&self) -> f64 {
        (self.dim() + 2.0 * self.s) / 2.0
    }
}

/// C_{s,d} = 2^{2s} Γ((d+2s)/4)² / Γ((d-2s)/4)².
pub fn hardy_constant(p: &DimParams) -> Result<f64> {
    let d = p.dim();
    let s = p.s;
    if !(s > 0.0 && s < d / 2.0) {
        return Err(Error::domain("hardy_constant", format!("s = {s} outside (0, d/2)")));
    }
    let ln = 2.0 * s * 2f64.ln() + 2.0 * (ln_gamma_raw((d + 2.0 * s) / 4.0) - ln_gamma_raw((d - 2.0 * s) / 4.0));
    Ok(ln.exp())
}

/// b_α = 2^{α/2} Γ(α/2), the constant in the Fourier transform of |x|^{-d+α}; needs 0 < α < d.
pub fn b_const(d: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < d as f64) {
        return Err(Error::domain("b_const", format!("alpha = {alpha} outside (0, {d})")));
    }
    Ok(2f64.powf(alpha / 2.0) * specfun::gamma(alpha / 2.0)?)
}

fn check_psi_arg(p: &DimParams, alpha: f64) -> Result<()> {
    if !(alpha > 2.0 * p.s && alpha < p.dim()) {
        return Err(Error::domain(
            "psi_function",
            format!("alpha = {alpha} outside (2s, d) = ({}, {})", 2.0 * p.s, p.d),
        ));
    }
    Ok(())
}

/// Ψ_{s,d}(α) on 2s < α < d, so that ∫|p-q|^{-(d-2s)}|q|^{-α} dq = Ψ(α)|p|^{2s-α}.
pub fn psi_function(p: &DimParams, alpha: f64) -> Result<f64> {
    check_psi_arg(p, alpha)?;
    let d = p.dim();
    let s = p.s;
    let ln = 0.5 * d * PI.ln() + ln_gamma_raw(s) - ln_gamma_raw((d - 2.0 * s) / 2.0)
        + ln_gamma_raw((alpha - 2.0 * s) / 2.0)
        + ln_gamma_raw((d - alpha) / 2.0)
        - ln_gamma_raw((d - alpha + 2.0 * s) / 2.0)
        - ln_gamma_raw(alpha / 2.0);
    Ok(ln.exp())
}

/// The same Ψ written through the b-constants: (2π)^{d/2} b_{2s} b_{α-2s} b_{d-α} / (b_{d-2s} b_{d-α+2s} b_α).
pub fn psi_function_b_form(p: &DimParams, alpha: f64) -> Result<f64> {
    check_psi_arg(p, alpha)?;
    let d = p.d;
    let df = p.dim();
    let s = p.s;
    let num = b_const(d, 2.0 * s)? * b_const(d, alpha - 2.0 * s)? * b_const(d, df - alpha)?;
    let den = b_const(d, df - 2.0 * s)? * b_const(d, df - alpha + 2.0 * s)? * b_const(d, alpha)?;
    Ok((2.0 * PI).powf(df / 2.0) * num / den)
}

/// Right side of the midpoint identity: (2π)^{d/2} b_{2s} / (b_{d-2s} C_{s,d}).
pub fn psi_midpoint_identity(p: &DimParams) -> Result<f64> {
    let df = p.dim();
    Ok((2.0 * PI).powf(df / 2.0) * b_const(p.d, 2.0 * p.s)? / b_const(p.d, df - 2.0 * p.s)?
        / hardy_constant(p)?)
}

/// Ψ sampled on a grid symmetric about (d+2s)/2, with shape certificates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiProfile {
    pub alpha_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub midpoint: f64,
    pub midpoint_value: f64,
    /// max relative gap between Ψ(α) and Ψ(d+2s-α) over the grid
    pub evenness_error: f64,
    pub even: bool,
    /// relative gap between Ψ at the midpoint and the Hardy-constant identity
    pub midpoint_identity_error: f64,
    pub midpoint_identity: bool,
    pub decreasing_left: bool,
    pub increasing_right: bool,
    /// smallest ∫_t^{t+s} h(τ) dτ over the left half of the grid
    pub min_witness_integral: f64,
    pub witness_positive: bool,
}

impl PsiProfile {
    pub fn all_certified(&self) -> bool {
        self.even
            && self.midpoint_identity
            && self.decreasing_left
            && self.increasing_right
            && self.witness_positive
    }
}

pub const PSI_EVENNESS_TOL: f64 = 1e-10;
pub const PSI_MIDPOINT_TOL: f64 = 1e-10;

/// Evaluate Ψ on an `n`-point grid in (2s, d), symmetric about the midpoint.
pub fn psi_profile(p: &DimParams, n: usize) -> Result<PsiProfile> {
    if n < 16 {
        return Err(Error::param(format!("psi_profile needs n >= 16, got {n}")));
    }
    let lo = 2.0 * p.s;
    let width = p.dim() - lo;
    let alpha_grid: Vec<f64> = (0..n)
        .map(|i| lo + width * (i as f64 + 0.5) / n as f64)
        .collect();
    let values = alpha_grid
        .par_iter()
        .map(|&a| psi_function(p, a))
        .collect::<Result<Vec<_>>>()?;

    let midpoint = p.midpoint();
    let midpoint_value = psi_function(p, midpoint)?;

    let evenness_error = (0..n / 2)
        .map(|i| {
            let (a, b) = (values[i], values[n - 1 - i]);
            (a - b).abs() / a.abs().max(b.abs())
        })
        .fold(0.0, f64::max);

    let identity = psi_midpoint_identity(p)?;
    let midpoint_identity_error = (midpoint_value - identity).abs() / identity.abs();

    let half = n / 2;
    let decreasing_left = values[..half].windows(2).all(|w| w[1] < w[0])
        && values[half - 1] > midpoint_value;
    let right_start = n - half;
    let increasing_right = values[right_start..].windows(2).all(|w| w[1] > w[0])
        && values[right_start] > midpoint_value;

    // ∫_t^{t+s} h > 0 for t = (α-2s)/2 on the left half
    let witness = alpha_grid[..half]
        .par_iter()
        .map(|&a| witness_integral(p, (a - 2.0 * p.s) / 2.0))
        .collect::<Result<Vec<_>>>()?;
    let min_witness_integral = witness.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(PsiProfile {
        alpha_grid,
        values,
        midpoint,
        midpoint_value,
        evenness_error,
        even: evenness_error <= PSI_EVENNESS_TOL,
        midpoint_identity_error,
        midpoint_identity: midpoint_identity_error <= PSI_MIDPOINT_TOL,
        decreasing_left,
        increasing_right,
        min_witness_integral,
        witness_positive: min_witness_integral > 0.0,
    })
}

fn witness_h(capital_t: f64, s: f64, tau: f64) -> Result<f64> {
    Ok(specfun::trigamma(tau)? - specfun::trigamma(capital_t + s - tau)?)
}

/// h(τ) = ψ'(τ) - ψ'(T+s-τ), T = (d-2s)/2, on a grid inside (0, T+s).
pub fn monotonicity_witness(p: &DimParams, tau_grid: &[f64]) -> Result<Vec<f64>> {
    let capital_t = (p.dim() - 2.0 * p.s) / 2.0;
    let end = capital_t + p.s;
    tau_grid
        .iter()
        .map(|&tau| {
            if !(tau > 0.0 && tau < end) {
                return Err(Error::domain(
                    "monotonicity_witness",
                    format!("tau = {tau} outside (0, {end})"),
                ));
            }
            witness_h(capital_t, p.s, tau)
        })
        .collect()
}

/// ∫_t^{t+s} h(τ) dτ by quadrature of the trigamma difference.
pub fn witness_integral(p: &DimParams, t: f64) -> Result<f64> {
    let capital_t = (p.dim() - 2.0 * p.s) / 2.0;
    let s = p.s;
    if !(t > 0.0 && t + s < capital_t + s) {
        return Err(Error::domain("witness_integral", format!("t = {t} outside (0, T)")));
    }
    let mut failure = None;
    let r = quad::integrate(
        |tau| match witness_h(capital_t, s, tau) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        t,
        t + s,
        Tolerance::rel(1e-12).with_abs(1e-300),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hardy_constant_known_values() {
        let p = DimParams::new(3, 0.5).unwrap();
        assert!((hardy_constant(&p).unwrap() - 2.0 / PI).abs() < 1e-12);
        let p = DimParams::new(3, 1.0).unwrap();
        assert!((hardy_constant(&p).unwrap() - 0.25).abs() < 1e-12);
        // multiprecision: sqrt(2) Γ(3/8)² / Γ(1/8)²
        let p = DimParams::new(1, 0.25).unwrap();
        assert_relative_eq!(hardy_constant(&p).unwrap(), 0.139_999_677_452_482_63, max_relative = 1e-13);
    }

    #[test]
    fn dim_params_validation() {
        assert!(DimParams::new(3, 1.5).is_err());
        assert!(DimParams::new(3, 0.0).is_err());
        assert!(DimParams::new(0, 0.1).is_err());
        let p = DimParams::new(3, 0.5).unwrap();
        assert!(p.with_t(0.5).is_err());
        assert!(p.with_gamma(0.0).is_err());
        assert_relative_eq!(p.with_t(0.4).unwrap().theta().unwrap(), 0.8);
    }

    #[test]
    fn b_const_values() {
        assert_relative_eq!(b_const(3, 2.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(b_const(3, 1.0).unwrap(), (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b_const(3, 2.6).unwrap(), 2.209_832_067_796_490_3, max_relative = 1e-13);
        assert!(b_const(3, 3.0).is_err());
        assert!(b_const(3, 0.0).is_err());
    }

    #[test]
    fn psi_reference_values() {
        let p = DimParams::new(3, 0.5).unwrap();
        assert_relative_eq!(psi_function(&p, 2.0).unwrap(), PI.powi(3), max_relative = 1e-13);
        assert_relative_eq!(psi_function(&p, 2.25).unwrap(), 32.704_991_985_507_2, max_relative = 1e-13);
        assert_relative_eq!(psi_function(&p, 2.5).unwrap(), 39.478_417_604_357_43, max_relative = 1e-13);
        assert!(psi_function(&p, 1.0).is_err());
        assert!(psi_function(&p, 3.0).is_err());
    }

    #[test]
    fn psi_forms_agree_and_are_even() {
        for (d, s) in [(1, 0.2), (2, 0.7), (3, 0.5), (3, 1.2), (5, 2.0)] {
            let p = DimParams::new(d, s).unwrap();
            for k in 1..10 {
                let a = 2.0 * s + (d as f64 - 2.0 * s) * k as f64 / 10.0;
                let g = psi_function(&p, a).unwrap();
                let b = psi_function_b_form(&p, a).unwrap();
                assert!((g - b).abs() <= 1e-11 * g, "forms at d={d} s={s} a={a}");
                let mirror = psi_function(&p, d as f64 + 2.0 * s - a).unwrap();
                assert!((g - mirror).abs() <= 1e-10 * g);
            }
        }
    }

    #[test]
    fn profile_flags() {
        let p = DimParams::new(3, 0.5).unwrap();
        let prof = psi_profile(&p, 17).unwrap();
        assert!(prof.all_certified(), "{prof:?}");
        assert_relative_eq!(prof.midpoint_value, PI.powi(3), max_relative = 1e-13);
        let p = DimParams::new(2, 0.4).unwrap();
        let prof = psi_profile(&p, 64).unwrap();
        assert!(prof.decreasing_left && prof.increasing_right);
        assert!(psi_profile(&p, 8).is_err());
    }

    #[test]
    fn witness_structure() {
        let p = DimParams::new(3, 0.5).unwrap();
        let cap_t = 1.0;
        let center = (cap_t + 0.5) / 2.0;
        assert!(monotonicity_witness(&p, &[center]).unwrap()[0].abs() < 1e-14);
        let taus: Vec<f64> = (1..30).map(|i| 1.5 * i as f64 / 30.0).collect();
        let h = monotonicity_witness(&p, &taus).unwrap();
        let mirrored: Vec<f64> = taus.iter().map(|t| 1.5 - t).collect();
        let hm = monotonicity_witness(&p, &mirrored).unwrap();
        for ((tau, a), b) in taus.iter().zip(&h).zip(&hm) {
            assert!((a + b).abs() <= 1e-12 * a.abs().max(1.0));
            if *tau < center - 1e-12 {
                assert!(*a > 0.0);
            }
        }
        assert!(monotonicity_witness(&p, &[1.5]).is_err());
        assert!(monotonicity_witness(&p, &[0.0]).is_err());
    }
}
