use serde::{Deserialize, Serialize};

use super::eigen::{self, EigenResult, SolverKind, SolverSettings, DENSE_LIMIT};
use super::operator::DiscreteOperator;
use crate::error::{Error, Result};

/// N(-τ) = `count` for τ in [tau_from, tau_to).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStep {
    pub tau_from: f64,
    pub tau_to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// ascending, with multiplicity
    pub negative_eigenvalues: Vec<f64>,
    pub gamma: f64,
    /// Σ |λ_j|^γ
    pub moment: f64,
    pub counting: Vec<CountStep>,
    /// relative gap between `moment` and γ∫N(-τ)τ^{γ-1}dτ
    pub layer_cake_error: f64,
    pub max_residual: f64,
    pub solver: SolverKind,
}

pub const LAYER_CAKE_TOL: f64 = 1e-10;

impl SpectrumResult {
    pub fn from_eigenvalues(mut negative: Vec<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::param(format!("gamma must be positive, got {gamma}")));
        }
        negative.retain(|&x| x < 0.0);
        negative.sort_by(f64::total_cmp);
        let moment: f64 = negative.iter().map(|l| (-l).powf(gamma)).sum();
        // |λ| descending: N(-τ) = k on [|λ_{k+1}|, |λ_k|)
        let mags: Vec<f64> = negative.iter().map(|l| -l).collect();
        let mut counting = Vec::with_capacity(mags.len());
        for k in (1..=mags.len()).rev() {
            let hi = mags[k - 1];
            let lo = if k < mags.len() { mags[k] } else { 0.0 };
            if hi > lo {
                counting.push(CountStep {
                    tau_from: lo,
                    tau_to: hi,
                    count: k,
                });
            }
        }
        let cake: f64 = counting
            .iter()
            .map(|st| st.count as f64 * (st.tau_to.powf(gamma) - st.tau_from.powf(gamma)))
            .sum();
        let layer_cake_error = if moment > 0.0 {
            (cake - moment).abs() / moment
        } else {
            cake.abs()
        };
        Ok(SpectrumResult {
            negative_eigenvalues: negative,
            gamma,
            moment,
            counting,
            layer_cake_error,
            max_residual: 0.0,
            solver: SolverKind::Auto,
        })
    }

    /// N(-τ) = #{λ < -τ}.
    pub fn count_below(&self, tau: f64) -> usize {
        self.negative_eigenvalues.iter().filter(|&&l| l < -tau).count()
    }
}

/// Negative eigenvalues of the operator by the configured solver.
pub fn negative_eigenvalues(op: &DiscreteOperator, settings: &SolverSettings) -> Result<EigenResult> {
    let dim = op.matrix_dim();
    let apply = |u: &[f64]| op.apply(u);
    let use_dense = match settings.kind {
        SolverKind::Dense => true,
        SolverKind::Lanczos => false,
        SolverKind::Auto => dim <= DENSE_LIMIT,
    };
    if use_dense {
        eigen::dense_negative(&op.dense(), &apply)
    } else {
        let kin = op.kinetic_multiplier.iter().cloned().fold(0.0, f64::max);
        let pot = op.potential().iter().map(|w| w.abs()).fold(0.0, f64::max);
        eigen::lanczos_negative(&apply, dim, kin + pot, settings)
    }
}

pub fn negative_spectrum(op: &DiscreteOperator, gamma: f64, settings: &SolverSettings) -> Result<SpectrumResult> {
    let eig = negative_eigenvalues(op, settings)?;
    let mut res = SpectrumResult::from_eigenvalues(eig.values, gamma)?;
    res.max_residual = eig.max_residual;
    res.solver = eig.solver;
    if res.layer_cake_error > LAYER_CAKE_TOL {
        return Err(Error::Convergence {
            detail: "layer-cake identity failed on the computed spectrum".into(),
            residual: res.layer_cake_error,
        });
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::GridSpec;
    use crate::spectral::operator::build_operator;
    use crate::spectral::potential::Potential;

    #[test]
    fn zero_potential_has_no_negative_spectrum() {
        let g = GridSpec::staggered(2, 16, 5.0).unwrap();
        let op = build_operator(g, 0.5, 0.0, &vec![0.0; g.dim()]).unwrap();
        let r = negative_spectrum(&op, 1.0, &SolverSettings::default()).unwrap();
        assert!(r.negative_eigenvalues.is_empty());
        assert_eq!(r.moment, 0.0);
        assert!(r.counting.is_empty());
    }

    #[test]
    fn layer_cake_on_step_data() {
        let r = SpectrumResult::from_eigenvalues(vec![-3.0, -1.0, -1.0, -0.25, 2.0], 1.5).unwrap();
        let want = 3f64.powf(1.5) + 2.0 + 0.25f64.powf(1.5);
        assert!((r.moment - want).abs() < 1e-14);
        assert!(r.layer_cake_error < 1e-14);
        assert_eq!(r.count_below(0.5), 3);
        assert_eq!(r.count_below(1.0), 1);
        assert_eq!(r.count_below(0.0), 4);
        // non-increasing in τ
        let counts: Vec<usize> = (0..40).map(|i| r.count_below(i as f64 * 0.1)).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn ground_state_converges_under_refinement() {
        // d = 1, s = 1/2, Gaussian well: n = 128 vs n = 256 on the same torus
        let pot = Potential::Gaussians {
            bumps: vec![crate::spectral::potential::Bump {
                center: vec![0.0],
                width: 1.5,
                depth: 2.0,
            }],
        };
        let mut ground = Vec::new();
        for n in [128, 256] {
            let g = GridSpec::staggered(1, n, 40.0).unwrap();
            let op = build_operator(g, 0.5, 0.0, &pot.sample(&g)).unwrap();
            let r = negative_spectrum(&op, 1.0, &SolverSettings::default()).unwrap();
            ground.push(r.negative_eigenvalues[0]);
        }
        assert!(ground[0] < -0.5);
        assert!((ground[0] - ground[1]).abs() < 1e-3 * ground[1].abs(), "{ground:?}");
    }

    #[test]
    fn lanczos_and_dense_moments_agree() {
        let g = GridSpec::staggered(2, 48, 12.0).unwrap();
        let ens = crate::spectral::potential::EnsembleSpec::new(2, 3, 11);
        for pot in crate::spectral::potential::gaussian_ensemble(&ens) {
            let op = build_operator(g, 0.5, 0.0, &pot.sample(&g)).unwrap();
            let dense = negative_spectrum(&op, 1.0, &SolverSettings { kind: SolverKind::Dense, ..Default::default() }).unwrap();
            let lz = negative_spectrum(&op, 1.0, &SolverSettings { kind: SolverKind::Lanczos, ..Default::default() }).unwrap();
            assert_eq!(dense.negative_eigenvalues.len(), lz.negative_eigenvalues.len());
            assert!((dense.moment - lz.moment).abs() <= 1e-9 * dense.moment.max(1.0), "{} vs {}", dense.moment, lz.moment);
        }
    }
}
