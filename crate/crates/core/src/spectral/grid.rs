//! Periodic box discretisation and the half-spectrum mode layout.
//!
//! Real samples are stored row-major with axis 0 slowest. Spectral
//! coefficients use the real-to-complex layout: every axis but the last
//! holds `n` indices, the last holds `n/2 + 1` (non-negative indices only);
//! the missing half follows from Hermitian symmetry.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n must be even and >= 8, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        Ok(Self { dim, n, box_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Wavenumber spacing 2π/L.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Quadrature weight (L/n)^N of one grid point.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest retained |index| under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    pub fn real_len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn half_n(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn spectral_len(&self) -> usize {
        self.n.pow(self.dim as u32 - 1) * self.half_n()
    }

    /// Signed index of a full-axis storage position: {−n/2+1, …, n/2}.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber (2π/L)·index for a full-axis storage position.
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.k_unit() * self.signed_index(i) as f64
    }

    /// Signed mode indices of a spectral storage position (unused axes are 0).
    pub fn mode_index(&self, flat: usize) -> [i64; 3] {
        let h = self.half_n();
        let mut idx = [0i64; 3];
        let last = flat % h;
        let mut rest = flat / h;
        idx[self.dim - 1] = last as i64;
        for axis in (0..self.dim - 1).rev() {
            idx[axis] = self.signed_index(rest % self.n);
            rest /= self.n;
        }
        idx
    }

    /// Storage position of signed mode indices, if the mode is stored
    /// (last-axis index in 0..=n/2) and within range.
    pub fn mode_flat(&self, idx: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let last = idx[self.dim - 1];
        if !(0..=n / 2).contains(&last) {
            return None;
        }
        let mut flat = 0usize;
        for &i in idx.iter().take(self.dim - 1) {
            if i <= -n / 2 || i > n / 2 {
                return None;
            }
            flat = flat * self.n + i.rem_euclid(n) as usize;
        }
        Some(flat * self.half_n() + last as usize)
    }

    /// Coordinates of a real-space storage position.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut x = [0.0; 3];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            x[axis] = (rest % self.n) as f64 * h;
            rest /= self.n;
        }
        x
    }

    /// Cached per-mode tables for this grid.
    pub fn modes(&self) -> Arc<ModeTable> {
        type Cache = Mutex<HashMap<(usize, usize, u64), Arc<ModeTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (self.dim, self.n, self.box_length.to_bits());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(key)
            .or_insert_with(|| Arc::new(ModeTable::build(self)))
            .clone()
    }
}

/// Per-mode data shared by every spectral operator on a grid.
#[derive(Debug)]
pub struct ModeTable {
    /// Operator wavenumbers: (2π/L)·index with Nyquist components set to 0.
    pub k_op: Vec<[f64; 3]>,
    /// |index|² with Nyquist kept (true Laplacian symbol in units of (2π/L)²).
    pub index_sq: Vec<u32>,
    /// Multiplicity of a stored mode in full-spectrum sums (1 or 2).
    pub weight: Vec<f64>,
    /// Retained by the 2/3 rule.
    pub in_band: Vec<bool>,
    pub max_index_sq: u32,
}

impl ModeTable {
    fn build(grid: &Grid) -> Self {
        let len = grid.spectral_len();
        let nyq = grid.nyquist_index() as i64;
        let cut = grid.dealias_cutoff() as i64;
        let ku = grid.k_unit();
        let mut k_op = Vec::with_capacity(len);
        let mut index_sq = Vec::with_capacity(len);
        let mut weight = Vec::with_capacity(len);
        let mut in_band = Vec::with_capacity(len);
        for flat in 0..len {
            let idx = grid.mode_index(flat);
            let mut k = [0.0; 3];
            let mut sq = 0i64;
            let mut band = true;
            for axis in 0..grid.dim() {
                let i = idx[axis];
                sq += i * i;
                band &= i.abs() <= cut;
                if i.abs() != nyq {
                    k[axis] = ku * i as f64;
                }
            }
            let last = idx[grid.dim() - 1];
            k_op.push(k);
            index_sq.push(sq as u32);
            weight.push(if last == 0 || last == nyq { 1.0 } else { 2.0 });
            in_band.push(band);
        }
        let max_index_sq = index_sq.iter().copied().max().unwrap_or(0);
        Self {
            k_op,
            index_sq,
            weight,
            in_band,
            max_index_sq,
        }
    }

    pub fn len(&self) -> usize {
        self.k_op.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_op.is_empty()
    }

    pub fn k_op_sq(&self, flat: usize) -> f64 {
        let k = self.k_op[flat];
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }
}
