use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of grid sites accepted (memory guard).
pub const MAX_SITES: usize = 1 << 24;

/// Periodic grid on the torus `[-L, L)^d` with `n` points per axis.
///
/// With `stagger` the sites sit at cell centers `-L + (j + ½)h`, so the
/// origin is never a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: u32,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub stagger: bool,
}

impl GridSpec {
    pub fn new(d: u32, n: usize, half_width: f64, stagger: bool) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Grid(format!("d must be 1, 2 or 3, got {d}")));
        }
        // FFT sizes need not be powers of two; evenness keeps the Nyquist mode self-paired
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Grid(format!("n must be even and at least 8, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!("half-width L must be positive, got {half_width}")));
        }
        let g = GridSpec {
            d,
            n,
            half_width,
            stagger,
        };
        if n.checked_pow(d).is_none_or(|m| m > MAX_SITES) {
            return Err(Error::Grid(format!("{n}^{d} sites exceeds the limit {MAX_SITES}")));
        }
        Ok(g)
    }

    pub fn staggered(d: u32, n: usize, half_width: f64) -> Result<Self> {
        Self::new(d, n, half_width, true)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn dim(&self) -> usize {
        self.n.pow(self.d)
    }

    pub fn axis_positions(&self) -> Vec<f64> {
        let h = self.spacing();
        let off = if self.stagger { 0.5 } else { 0.0 };
        (0..self.n).map(|j| -self.half_width + (j as f64 + off) * h).collect()
    }

    /// p_k = πk/L in FFT order: k = 0, 1, …, n/2-1, -n/2, …, -1.
    pub fn axis_momenta(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|j| {
                let k = if j < n / 2 { j } else { j - n };
                std::f64::consts::PI * k as f64 / self.half_width
            })
            .collect()
    }

    /// Row-major multi-index; unused axes are 0.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.d as usize).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn ravel(&self, multi: [usize; 3]) -> usize {
        (0..self.d as usize).fold(0, |acc, a| acc * self.n + multi[a])
    }

    /// Site coordinates; entries beyond `d` are 0.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let ax = self.axis_positions();
        (0..self.dim())
            .map(|i| {
                let m = self.unravel(i);
                let mut x = [0.0; 3];
                for a in 0..self.d as usize {
                    x[a] = ax[m[a]];
                }
                x
            })
            .collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.positions()
            .iter()
            .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
            .collect()
    }

    /// |p| for every Fourier mode, in the same ordering as the sites.
    pub fn momentum_norms(&self) -> Vec<f64> {
        let ax = self.axis_momenta();
        (0..self.dim())
            .map(|i| {
                let m = self.unravel(i);
                (0..self.d as usize).map(|a| ax[m[a]] * ax[m[a]]).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// Same n on `[-L/λ, L/λ)^d`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.d, self.n, self.half_width / lambda, self.stagger)
    }

    /// Twice the points on the same torus.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.d, 2 * self.n, self.half_width, self.stagger)
    }

    /// Largest momentum magnitude along one axis, πn/(2L).
    pub fn axis_cutoff(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / (2.0 * self.half_width)
    }
}
