//! Birman–Schwinger counting: for V ≥ 0 and τ > -inf spec(H0),
//! `N(-τ, H0 - V) = #{μ > 1 : μ ∈ spec(V^{1/2}(H0 + τ)^{-1}V^{1/2})}`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::eigen::{dense_eigen, dense_eigenvalues};
use super::operator::DiscreteOperator;
use crate::error::{Error, Result};

/// Eigenvalues this close to a threshold make the integer count ambiguous.
pub const THRESHOLD_GAP: f64 = 1e-9;

/// H0 + τ must clear zero by this much (relative to ‖H0‖) to count as invertible.
pub const SHIFT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsResult {
    pub count: usize,
    /// spectrum of K_τ, descending
    pub bs_eigenvalues: Vec<f64>,
    /// some μ lies within THRESHOLD_GAP of 1
    pub near_threshold: bool,
}

/// H0 diagonalized once, reused for many fields V and shifts τ.
#[derive(Debug, Clone)]
pub struct BsSolver {
    values: Vec<f64>,
    vectors: Mat<f64>,
}

impl BsSolver {
    pub fn from_matrix(h0: &Mat<f64>) -> Result<Self> {
        let (values, vectors) = dense_eigen(h0)?;
        Ok(BsSolver { values, vectors })
    }

    pub fn new(op0: &DiscreteOperator) -> Result<Self> {
        Self::from_matrix(&op0.stripped().dense())
    }

    pub fn lowest(&self) -> f64 {
        self.values[0]
    }

    /// Spectrum of K_τ (descending). Only sites with V > 0 contribute.
    pub fn bs_spectrum(&self, v: &[f64], tau: f64) -> Result<Vec<f64>> {
        let dim = self.values.len();
        if v.len() != dim {
            return Err(Error::Grid("field length does not match operator".into()));
        }
        if v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::param("Birman-Schwinger needs V >= 0"));
        }
        let scale = self.values.iter().map(|l| l.abs()).fold(0.0, f64::max).max(1.0);
        if !(self.lowest() + tau > SHIFT_MARGIN * scale) {
            return Err(Error::SingularShift {
                tau,
                lowest: self.lowest(),
            });
        }
        let support: Vec<usize> = (0..dim).filter(|&j| v[j] > 0.0).collect();
        let m = support.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        let inv_sqrt: Vec<f64> = self.values.iter().map(|l| (l + tau).sqrt().recip()).collect();
        let b = Mat::from_fn(m, dim, |a, k| v[support[a]].sqrt() * self.vectors[(support[a], k)] * inv_sqrt[k]);
        let kmat = &b * b.transpose();
        let mut mu = dense_eigenvalues(&kmat)?;
        mu.reverse();
        Ok(mu)
    }

    pub fn count(&self, v: &[f64], tau: f64) -> Result<BsResult> {
        let mu = self.bs_spectrum(v, tau)?;
        Ok(BsResult {
            count: mu.iter().filter(|&&x| x > 1.0).count(),
            near_threshold: mu.iter().any(|x| (x - 1.0).abs() < THRESHOLD_GAP),
            bs_eigenvalues: mu,
        })
    }
}

/// BS count for a single field; `op0` has its V ignored.
pub fn birman_schwinger_count(op0: &DiscreteOperator, v: &[f64], tau: f64) -> Result<BsResult> {
    BsSolver::new(op0)?.count(v, tau)
}

/// #{λ < -τ} for the dense matrix; also reports whether -τ is (numerically) an eigenvalue.
pub fn direct_count_matrix(h: &Mat<f64>, tau: f64) -> Result<(usize, bool)> {
    let vals = dense_eigenvalues(h)?;
    let count = vals.iter().filter(|&&l| l < -tau).count();
    let on_threshold = vals.iter().any(|l| (l + tau).abs() < THRESHOLD_GAP * (1.0 + tau.abs()));
    Ok((count, on_threshold))
}

/// N(-τ, H) by direct diagonalization of the full operator (V included).
pub fn direct_count(op: &DiscreteOperator, tau: f64) -> Result<(usize, bool)> {
    direct_count_matrix(&op.dense(), tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;
    use crate::spectral::operator::build_operator;
    use crate::spectral::potential::Potential;

    #[test]
    fn square_well_counts_agree() {
        let g = GridSpec::staggered(1, 64, 10.0).unwrap();
        let v = Potential::SquareWell { radius: 2.0, depth: 3.0 }.sample(&g);
        let op0 = build_operator(g, 1.0, 0.0, &vec![0.0; 64]).unwrap();
        let op = op0.with_v(&v).unwrap();
        let tau = 0.1;
        let bs = birman_schwinger_count(&op0, &v, tau).unwrap();
        let (direct, ambiguous) = direct_count(&op, tau).unwrap();
        assert!(!ambiguous && !bs.near_threshold);
        assert!(direct > 0);
        assert_eq!(bs.count, direct);
    }

    #[test]
    fn count_monotone_in_tau_and_zero_field() {
        let g = GridSpec::staggered(1, 32, 6.0).unwrap();
        let v = Potential::SquareWell { radius: 1.5, depth: 4.0 }.sample(&g);
        let op0 = build_operator(g, 0.5, 0.0, &vec![0.0; 32]).unwrap();
        let solver = BsSolver::new(&op0).unwrap();
        let counts: Vec<usize> = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|&t| solver.count(&v, t).unwrap().count)
            .collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
        let empty = solver.count(&vec![0.0; 32], 0.1).unwrap();
        assert_eq!(empty.count, 0);
        assert!(empty.bs_eigenvalues.is_empty());
    }

    #[test]
    fn singular_shift_rejected() {
        let g = GridSpec::staggered(1, 16, 3.0).unwrap();
        let op0 = build_operator(g, 0.5, 0.0, &[0.0; 16]).unwrap();
        // the zero mode makes τ = 0 singular
        let err = birman_schwinger_count(&op0, &[1.0; 16], 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularShift { .. }));
    }
}
