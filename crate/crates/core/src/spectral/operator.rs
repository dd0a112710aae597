use faer::Mat;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::FftNd;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Potential wall `height_factor · (πn/2L)^{2s}` on sites with `|x| > radius_fraction · L`.
///
/// On the torus the constant function has zero kinetic energy, so a Hardy
/// term alone produces a spurious bound state of size ~L^{-2s}. The wall only
/// raises the operator, so every lower bound for the continuum operator still
/// applies; the height is tied to the grid cutoff so that the pair (grid, wall)
/// scales exactly like the continuum problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confinement {
    pub radius_fraction: f64,
    pub height_factor: f64,
}

impl Default for Confinement {
    fn default() -> Self {
        Confinement {
            radius_fraction: 0.8,
            height_factor: 1.0,
        }
    }
}

/// `H = (-Δ)^s + W` on a periodic grid, with `W = -c|x|^{-2s} - V (+ wall)`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: GridSpec,
    pub s: f64,
    pub hardy_coupling: f64,
    /// |p_k|^{2s} per Fourier mode
    pub kinetic_multiplier: Vec<f64>,
    /// diagonal part without V
    pub base_potential: Vec<f64>,
    /// the field V (subtracted)
    pub v: Vec<f64>,
    pub confinement: Option<Confinement>,
    fft: FftNd,
}

pub fn power_multiplier(grid: &GridSpec, s: f64) -> Vec<f64> {
    grid.momentum_norms()
        .into_iter()
        .map(|p| if p == 0.0 { 0.0 } else { p.powf(2.0 * s) })
        .collect()
}

pub fn build_operator(grid: GridSpec, s: f64, hardy_coupling: f64, v: &[f64]) -> Result<DiscreteOperator> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::param(format!("need s > 0, got {s}")));
    }
    if hardy_coupling != 0.0 && !(s < grid.d as f64 / 2.0) {
        return Err(Error::param(format!("Hardy term needs s < d/2, got s = {s}, d = {}", grid.d)));
    }
    if hardy_coupling != 0.0 && !grid.stagger {
        return Err(Error::Grid("singular Hardy coupling needs a staggered grid (origin is a grid point)".into()));
    }
    if v.len() != grid.dim() {
        return Err(Error::Grid(format!("potential has {} values, grid has {} sites", v.len(), grid.dim())));
    }
    let mut op = DiscreteOperator {
        grid,
        s,
        hardy_coupling,
        kinetic_multiplier: power_multiplier(&grid, s),
        base_potential: Vec::new(),
        v: v.to_vec(),
        confinement: None,
        fft: FftNd::new(grid.n, grid.d),
    };
    op.rebuild_base();
    Ok(op)
}

impl DiscreteOperator {
    fn rebuild_base(&mut self) {
        let radii = self.grid.radii();
        let wall = self.confinement.map(|c| {
            (
                c.radius_fraction * self.grid.half_width,
                c.height_factor * self.grid.axis_cutoff().powf(2.0 * self.s),
            )
        });
        self.base_potential = radii
            .iter()
            .map(|&r| {
                let mut w = 0.0;
                if self.hardy_coupling != 0.0 {
                    w -= self.hardy_coupling * r.powf(-2.0 * self.s);
                }
                if let Some((r_wall, height)) = wall {
                    if r > r_wall {
                        w += height;
                    }
                }
                w
            })
            .collect();
    }

    pub fn with_confinement(mut self, c: Confinement) -> Self {
        self.confinement = Some(c);
        self.rebuild_base();
        self
    }

    pub fn matrix_dim(&self) -> usize {
        self.grid.dim()
    }

    /// Full diagonal W = base - V.
    pub fn potential(&self) -> Vec<f64> {
        self.base_potential.iter().zip(&self.v).map(|(b, v)| b - v).collect()
    }

    /// The same operator with V removed.
    pub fn stripped(&self) -> Self {
        let mut op = self.clone();
        op.v.iter_mut().for_each(|x| *x = 0.0);
        op
    }

    pub fn with_v(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.grid.dim() {
            return Err(Error::Grid("potential length does not match grid".into()));
        }
        let mut op = self.clone();
        op.v = v.to_vec();
        Ok(op)
    }

    fn multiplier_apply(&self, u: &[f64], mult: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = u.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf.iter_mut().zip(mult).for_each(|(z, m)| *z *= m);
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// `(-Δ)^t u` for any power t ≥ 0.
    pub fn kinetic_apply(&self, u: &[f64], t: f64) -> Vec<f64> {
        if t == self.s {
            self.multiplier_apply(u, &self.kinetic_multiplier)
        } else {
            self.multiplier_apply(u, &power_multiplier(&self.grid, t))
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.multiplier_apply(u, &self.kinetic_multiplier);
        for ((o, x), (b, v)) in out.iter_mut().zip(u).zip(self.base_potential.iter().zip(&self.v)) {
            *o += (b - v) * x;
        }
        out
    }

    /// `∫ |p|^{2t} |û|²` as a continuum-normalized form (cell volume included).
    pub fn kinetic_form(&self, u: &[f64], t: f64) -> f64 {
        let mut buf: Vec<Complex<f64>> = u.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        let mult = if t == self.s {
            self.kinetic_multiplier.clone()
        } else {
            power_multiplier(&self.grid, t)
        };
        buf.iter().zip(&mult).map(|(z, m)| m * z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `∫ W |u|²` with W the full diagonal.
    pub fn potential_form(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(self.base_potential.iter().zip(&self.v))
            .map(|(x, (b, v))| (b - v) * x * x)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    /// `⟨u, H u⟩` evaluated in momentum space for the kinetic part.
    pub fn form(&self, u: &[f64]) -> f64 {
        self.kinetic_form(u, self.s) + self.potential_form(u)
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        u.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume()
    }

    /// Dense matrix of H (real symmetric circulant plus diagonal).
    pub fn dense(&self) -> Mat<f64> {
        let mut m = dense_kinetic(&self.grid, &self.kinetic_multiplier, &self.fft);
        for (i, w) in self.potential().iter().enumerate() {
            m[(i, i)] += w;
        }
        m
    }
}

/// The circulant `F^* diag(mult) F` as a dense matrix.
fn dense_kinetic(grid: &GridSpec, mult: &[f64], fft: &FftNd) -> Mat<f64> {
    let dim = grid.dim();
    let mut c: Vec<Complex<f64>> = mult.iter().map(|&m| Complex::new(m, 0.0)).collect();
    fft.inverse(&mut c);
    let scale = 1.0 / (dim as f64).sqrt();
    let kernel: Vec<f64> = c.iter().map(|z| z.re * scale).collect();
    let n = grid.n;
    let idx: Vec<[usize; 3]> = (0..dim).map(|i| grid.unravel(i)).collect();
    Mat::from_fn(dim, dim, |a, b| {
        let (ma, mb) = (idx[a], idx[b]);
        let mut diff = [0usize; 3];
        for ax in 0..grid.d as usize {
            diff[ax] = (ma[ax] + n - mb[ax]) % n;
        }
        kernel[grid.ravel(diff)]
    })
}
