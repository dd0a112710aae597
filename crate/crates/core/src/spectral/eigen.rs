//! Negative eigenvalues of real symmetric operators.
//!
//! Small problems go to a dense solver. Larger ones use Lanczos with full
//! reorthogonalization: each cycle starts from a fresh random vector kept
//! orthogonal to the eigenvectors found so far, so repeated eigenvalues are
//! picked up one copy per cycle. A cycle that converges to a non-negative
//! lowest Ritz value ends the search. Every returned pair carries its true
//! residual ‖Hx - λx‖.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub kind: SolverKind,
    /// residual tolerance relative to the operator norm estimate
    pub tol: f64,
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            kind: SolverKind::Auto,
            tol: 1e-10,
            max_krylov: 400,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// ascending
    pub values: Vec<f64>,
    pub max_residual: f64,
    pub solver: SolverKind,
    /// Lanczos only: lowest converged Ritz value of the deflated operator
    pub deflated_floor: Option<f64>,
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Convergence {
            detail: format!("dense symmetric eigensolver: {e:?}"),
            residual: f64::NAN,
        })
}

/// Eigenvalues and eigenvectors (columns) of a dense symmetric matrix.
pub fn dense_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Convergence {
        detail: format!("dense symmetric eigensolver: {e:?}"),
        residual: f64::NAN,
    })?;
    let s = e.S().column_vector();
    let vals = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += alpha * b);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual<F: Fn(&[f64]) -> Vec<f64>>(apply: &F, x: &[f64], lambda: f64) -> f64 {
    let mut r = apply(x);
    axpy(&mut r, -lambda, x);
    norm(&r) / norm(x)
}

/// Negative eigenvalues of a symmetric matrix given densely.
pub fn dense_negative<F: Fn(&[f64]) -> Vec<f64>>(m: &Mat<f64>, apply: &F) -> Result<EigenResult> {
    let (vals, vecs) = dense_eigen(m)?;
    let mut out = Vec::new();
    let mut max_res: f64 = 0.0;
    for (j, &v) in vals.iter().enumerate() {
        if v >= 0.0 {
            break;
        }
        let x: Vec<f64> = (0..vecs.nrows()).map(|i| vecs[(i, j)]).collect();
        max_res = max_res.max(residual(apply, &x, v));
        out.push(v);
    }
    Ok(EigenResult {
        values: out,
        max_residual: max_res,
        solver: SolverKind::Dense,
        deflated_floor: None,
    })
}

/// Lanczos search for all eigenvalues below zero.
pub fn lanczos_negative<F: Fn(&[f64]) -> Vec<f64>>(
    apply: &F,
    dim: usize,
    norm_estimate: f64,
    settings: &SolverSettings,
) -> Result<EigenResult> {
    let scale = norm_estimate.max(f64::MIN_POSITIVE);
    let tol = settings.tol * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let m_max = settings.max_krylov.min(dim).max(2);
    let check_every = 20;
    let mut floor = None;

    let orthogonalize = |w: &mut Vec<f64>, basis: &[Vec<f64>], locked: &[(f64, Vec<f64>)]| {
        for _ in 0..2 {
            for (_, q) in locked {
                let c = dot(w, q);
                axpy(w, -c, q);
            }
            for q in basis {
                let c = dot(w, q);
                axpy(w, -c, q);
            }
        }
    };

    'outer: while locked.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        orthogonalize(&mut v, &[], &locked);
        let nv = norm(&v);
        if nv < 1e-12 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let mut basis = vec![v];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let cap = m_max.min(dim - locked.len());
        loop {
            let j = basis.len() - 1;
            let mut w = apply(&basis[j]);
            let alpha = dot(&w, &basis[j]);
            alphas.push(alpha);
            orthogonalize(&mut w, &basis, &locked);
            let beta = norm(&w);
            let exhausted = beta <= 1e-13 * scale || basis.len() >= cap;
            if alphas.len().is_multiple_of(check_every) || exhausted {
                let k = alphas.len();
                let t = Mat::from_fn(k, k, |a, b| {
                    if a == b {
                        alphas[a]
                    } else if a == b + 1 {
                        betas[b]
                    } else if b == a + 1 {
                        betas[a]
                    } else {
                        0.0
                    }
                });
                let (theta, y) = dense_eigen(&t)?;
                let res: Vec<f64> = (0..k).map(|i| (beta * y[(k - 1, i)]).abs()).collect();
                let negative: Vec<usize> = (0..k).filter(|&i| theta[i] < 0.0).collect();
                let invariant = beta <= 1e-13 * scale;
                let all_conv = invariant || negative.iter().all(|&i| res[i] <= tol);
                // a non-negative floor only needs its residual bracket to clear zero
                let floor_conv = invariant || res[0] <= tol || theta[0] - res[0] > 0.0;
                if exhausted && !all_conv {
                    let worst = negative.iter().map(|&i| res[i]).fold(0.0, f64::max);
                    return Err(Error::Convergence {
                        detail: format!(
                            "Lanczos hit the Krylov limit {cap} with {} negative Ritz values unconverged",
                            negative.len()
                        ),
                        residual: worst / scale,
                    });
                }
                if exhausted || (all_conv && floor_conv) {
                    for &i in &negative {
                        let mut x = vec![0.0; dim];
                        for (c, q) in basis.iter().enumerate() {
                            axpy(&mut x, y[(c, i)], q);
                        }
                        let nx = norm(&x);
                        x.iter_mut().for_each(|e| *e /= nx);
                        locked.push((theta[i], x));
                    }
                    if negative.is_empty() {
                        floor = Some(theta[0]);
                        break 'outer;
                    }
                    continue 'outer;
                }
            }
            if exhausted {
                break;
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }
    }

    let mut max_res: f64 = 0.0;
    for (lam, x) in &locked {
        max_res = max_res.max(residual(apply, x, *lam));
    }
    if max_res > 1e3 * tol.max(1e-14 * scale) {
        return Err(Error::Convergence {
            detail: "Lanczos eigenpair failed its residual certificate".into(),
            residual: max_res / scale,
        });
    }
    let mut values: Vec<f64> = locked.into_iter().map(|(l, _)| l).collect();
    values.sort_by(f64::total_cmp);
    Ok(EigenResult {
        values,
        max_residual: max_res,
        solver: SolverKind::Lanczos,
        deflated_floor: floor,
    })
}
