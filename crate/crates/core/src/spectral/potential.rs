use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grid::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub width: f64,
    pub depth: f64,
}

/// Non-negative potentials V(x) used as test fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// Σ depth·exp(-|x - center|²/(2 width²))
    Gaussians { bumps: Vec<Bump> },
    /// depth on |x| < radius
    SquareWell { radius: f64, depth: f64 },
}

impl Potential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Gaussians { bumps } => bumps
                .iter()
                .map(|b| {
                    let r2: f64 = b.center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                    b.depth * (-r2 / (2.0 * b.width * b.width)).exp()
                })
                .sum(),
            Potential::SquareWell { radius, depth } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 < radius * radius {
                    *depth
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        let d = grid.d as usize;
        grid.positions().iter().map(|x| self.eval(&x[..d])).collect()
    }

    /// λ^{2s} V(λx).
    pub fn scaled(&self, lambda: f64, s: f64) -> Potential {
        let amp = lambda.powf(2.0 * s);
        match self {
            Potential::Zero => Potential::Zero,
            Potential::Gaussians { bumps } => Potential::Gaussians {
                bumps: bumps
                    .iter()
                    .map(|b| Bump {
                        center: b.center.iter().map(|c| c / lambda).collect(),
                        width: b.width / lambda,
                        depth: b.depth * amp,
                    })
                    .collect(),
            },
            Potential::SquareWell { radius, depth } => Potential::SquareWell {
                radius: radius / lambda,
                depth: depth * amp,
            },
        }
    }
}

/// Seeded family of sums of 1–5 Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub d: u32,
    pub count: usize,
    pub seed: u64,
    pub min_bumps: usize,
    pub max_bumps: usize,
    /// bump centers are drawn from the cube [-center_radius, center_radius]^d
    pub center_radius: f64,
    pub width_range: (f64, f64),
    pub depth_range: (f64, f64),
}

impl EnsembleSpec {
    pub fn new(d: u32, count: usize, seed: u64) -> Self {
        EnsembleSpec {
            d,
            count,
            seed,
            min_bumps: 1,
            max_bumps: 5,
            center_radius: 2.0,
            width_range: (0.5, 1.5),
            depth_range: (0.2, 2.0),
        }
    }
}

/// Sample i uses stream i of the seeded generator, so members do not depend on each other.
pub fn ensemble_member(spec: &EnsembleSpec, i: usize) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64);
    let k = rng.random_range(spec.min_bumps..=spec.max_bumps.max(spec.min_bumps));
    let bumps = (0..k)
        .map(|_| Bump {
            center: (0..spec.d)
                .map(|_| rng.random_range(-spec.center_radius..=spec.center_radius))
                .collect(),
            width: rng.random_range(spec.width_range.0..=spec.width_range.1),
            depth: rng.random_range(spec.depth_range.0..=spec.depth_range.1),
        })
        .collect();
    Potential::Gaussians { bumps }
}

pub fn gaussian_ensemble(spec: &EnsembleSpec) -> Vec<Potential> {
    (0..spec.count).map(|i| ensemble_member(spec, i)).collect()
}

/// SHA-256 of the little-endian bytes of a sampled field.
pub fn field_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_is_reproducible_and_independent_per_member() {
        let spec = EnsembleSpec::new(2, 10, 42);
        let a = gaussian_ensemble(&spec);
        let b = gaussian_ensemble(&spec);
        assert_eq!(a, b);
        let longer = gaussian_ensemble(&EnsembleSpec { count: 20, ..spec.clone() });
        assert_eq!(&longer[..10], &a[..]);
        assert_ne!(a[0], a[1]);
        for p in &a {
            if let Potential::Gaussians { bumps } = p {
                assert!((1..=5).contains(&bumps.len()));
            }
        }
    }

    #[test]
    fn scaling_and_hash() {
        let p = ensemble_member(&EnsembleSpec::new(1, 1, 3), 0);
        let q = p.scaled(2.0, 0.3);
        let x = 0.37;
        assert!((q.eval(&[x]) - 2f64.powf(0.6) * p.eval(&[2.0 * x])).abs() < 1e-14);
        let g = GridSpec::staggered(1, 16, 3.0).unwrap();
        let h1 = field_hash(&p.sample(&g));
        assert_eq!(h1, field_hash(&p.sample(&g)));
        assert_ne!(h1, field_hash(&q.sample(&g)));
        assert_eq!(h1.len(), 64);
    }
}
