//! N-dimensional real transforms built from 1-D line FFTs.
//!
//! Forward coefficients are Fourier-series coefficients,
//! `c_k = n^{-N} Σ_x f(x) e^{-ik·x}`, so that `f(x) = Σ_k c_k e^{ik·x}` and
//! Parseval reads `Σ_x |f|²(L/n)^N = L^N Σ_k |c_k|²` over the full spectrum.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

/// Columns gathered per batch when transforming a strided axis.
const BATCH: usize = 32;

struct Plans {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let mut real = RealFftPlanner::<f64>::new();
            let mut cplx = FftPlanner::<f64>::new();
            Arc::new(Plans {
                r2c: real.plan_fft_forward(n),
                c2r: real.plan_fft_inverse(n),
                fwd: cplx.plan_fft_forward(n),
                inv: cplx.plan_fft_inverse(n),
            })
        })
        .clone()
}

pub fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let n = grid.n();
    let h = grid.half_n();
    let p = plans(n);
    let rows = grid.real_len() / n;
    let mut out = vec![Complex64::new(0.0, 0.0); rows * h];
    out.par_chunks_mut(h * 8)
        .zip(values.par_chunks(n * 8))
        .for_each(|(dst, src)| {
            let mut line = vec![0.0; n];
            let mut scratch = p.r2c.make_scratch_vec();
            for (d, s) in dst.chunks_mut(h).zip(src.chunks(n)) {
                line.copy_from_slice(s);
                p.r2c
                    .process_with_scratch(&mut line, d, &mut scratch)
                    .expect("r2c buffer sizes are fixed by the grid");
            }
        });
    for axis in (0..grid.dim() - 1).rev() {
        strided_axis(grid, &mut out, axis, &p.fwd);
    }
    let scale = 1.0 / grid.real_len() as f64;
    out.par_iter_mut().for_each(|c| *c *= scale);
    out
}

pub fn inverse(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let n = grid.n();
    let h = grid.half_n();
    let p = plans(n);
    let mut work = coeffs.to_vec();
    for axis in 0..grid.dim() - 1 {
        strided_axis(grid, &mut work, axis, &p.inv);
    }
    let rows = grid.real_len() / n;
    let mut out = vec![0.0; rows * n];
    out.par_chunks_mut(n * 8)
        .zip(work.par_chunks_mut(h * 8))
        .for_each(|(dst, src)| {
            let mut scratch = p.c2r.make_scratch_vec();
            for (d, s) in dst.chunks_mut(n).zip(src.chunks_mut(h)) {
                // The DC and Nyquist bins of a Hermitian line are real; drop roundoff.
                s[0].im = 0.0;
                s[h - 1].im = 0.0;
                p.c2r
                    .process_with_scratch(s, d, &mut scratch)
                    .expect("c2r buffer sizes are fixed by the grid");
            }
        });
    out
}

/// In-place complex FFT along a non-last axis of the half-spectrum array.
fn strided_axis(grid: &Grid, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = grid.n();
    let mut shape = vec![n; grid.dim()];
    shape[grid.dim() - 1] = grid.half_n();
    let stride: usize = shape[axis + 1..].iter().product();
    let block = n * stride;
    data.par_chunks_mut(block).for_each(|blk| {
        let mut buf = vec![Complex64::new(0.0, 0.0); BATCH * n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut c0 = 0;
        while c0 < stride {
            let width = BATCH.min(stride - c0);
            for r in 0..n {
                let row = &blk[r * stride + c0..r * stride + c0 + width];
                for (c, v) in row.iter().enumerate() {
                    buf[c * n + r] = *v;
                }
            }
            fft.process_with_scratch(&mut buf[..width * n], &mut scratch);
            for r in 0..n {
                let row = &mut blk[r * stride + c0..r * stride + c0 + width];
                for (c, v) in row.iter_mut().enumerate() {
                    *v = buf[c * n + r];
                }
            }
            c0 += width;
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
        let n = grid.n();
        let modes = grid.spectral_len();
        let mut out = vec![Complex64::new(0.0, 0.0); modes];
        for (m, o) in out.iter_mut().enumerate() {
            let idx = grid.mode_index(m);
            for (p, v) in values.iter().enumerate() {
                let x = grid.point(p);
                let mut phase = 0.0;
                for a in 0..grid.dim() {
                    phase += idx[a] as f64 * x[a] * 2.0 * PI / grid.box_length();
                }
                *o += Complex64::from_polar(*v, -phase);
            }
            *o /= n.pow(grid.dim() as u32) as f64;
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        for grid in [Grid::new(2, 8, 2.0).unwrap(), Grid::new(3, 8, 5.0).unwrap()] {
            let values: Vec<f64> = (0..grid.real_len())
                .map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0)
                .collect();
            let fast = forward(&grid, &values);
            let slow = naive_dft(&grid, &values);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12, "{a} vs {b}");
            }
            let back = inverse(&grid, &fast);
            for (a, b) in back.iter().zip(&values) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
