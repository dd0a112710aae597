use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Unitary d-dimensional DFT on an `n^d` row-major buffer.
#[derive(Clone)]
pub struct FftNd {
    n: usize,
    d: u32,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FftNd {{ n: {}, d: {} }}", self.n, self.d)
    }
}

impl FftNd {
    pub fn new(n: usize, d: u32) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            n,
            d,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, buf: &mut [Complex<f64>]) {
        self.run(buf, &self.forward);
    }

    pub fn inverse(&self, buf: &mut [Complex<f64>]) {
        self.run(buf, &self.inverse);
    }

    fn run(&self, buf: &mut [Complex<f64>], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let total = buf.len();
        debug_assert_eq!(total, n.pow(self.d));
        let mut line = vec![Complex::new(0.0, 0.0); n];
        for axis in 0..self.d {
            let stride = n.pow(self.d - 1 - axis);
            if stride == 1 {
                plan.process(buf);
                continue;
            }
            let block = stride * n;
            for start in (0..total).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = buf[base + k * stride];
                    }
                    plan.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        buf[base + k * stride] = *v;
                    }
                }
            }
        }
        let scale = 1.0 / (total as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_parseval() {
        let (n, d) = (8, 3);
        let fft = FftNd::new(n, d);
        let orig: Vec<Complex<f64>> = (0..n.pow(d))
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = orig.clone();
        fft.forward(&mut buf);
        let e0: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        let e1: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        assert!((e0 - e1).abs() < 1e-12 * e0);
        fft.inverse(&mut buf);
        for (a, b) in orig.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn plane_wave_lands_on_one_mode() {
        let (n, d) = (8, 2);
        let fft = FftNd::new(n, d);
        let (k0, k1) = (3usize, 6usize);
        let mut buf: Vec<Complex<f64>> = (0..n * n)
            .map(|i| {
                let (a, b) = (i / n, i % n);
                let ph = 2.0 * std::f64::consts::PI * (k0 * a + k1 * b) as f64 / n as f64;
                Complex::new(ph.cos(), ph.sin())
            })
            .collect();
        fft.forward(&mut buf);
        let peak = k0 * n + k1;
        assert!((buf[peak].norm() - n as f64).abs() < 1e-12);
        let rest: f64 = buf.iter().enumerate().filter(|(i, _)| *i != peak).map(|(_, z)| z.norm()).sum();
        assert!(rest < 1e-10);
    }
}
