use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// A real scalar on the grid with its paired half-spectrum coefficients.
///
/// Both representations are kept; linear combinations act on both without
/// transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.real_len()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.spectral_len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.real_len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.real_len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values".into()));
        }
        let coeffs = fft::forward(&grid, &values);
        Ok(Self {
            grid,
            values,
            coeffs,
        })
    }

    /// Builds from coefficients; they must describe a real field.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.spectral_len(),
                coeffs.len()
            )));
        }
        let values = fft::inverse(&grid, &coeffs);
        Ok(Self {
            grid,
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.real_len()).map(|i| f(grid.point(i))).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<Complex64>) {
        (self.values, self.coeffs)
    }

    /// Maps coefficients through `f(flat_index, c)` and transforms back.
    pub fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i, c))
            .collect();
        Self::from_coeffs(self.grid, coeffs).expect("length preserved")
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * a).collect(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `a·self + b·other`, on both representations.
    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    /// Full-spectrum Σ|c_k|² using Hermitian multiplicities.
    pub fn spectral_sum_sq(&self) -> f64 {
        let modes = self.grid.modes();
        self.coeffs
            .iter()
            .zip(&modes.weight)
            .map(|(c, w)| w * c.norm_sqr())
            .sum()
    }

    /// Grid quadrature Σ f²·(L/n)^N.
    pub fn quadrature_sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }
}

pub(crate) fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// N scalar components plus a flag recording that the field was projected.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
    solenoidal: bool,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
            solenoidal: true,
        }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| Error::GridMismatch("no components".into()))?
            .grid();
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} components on a {}-D grid",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            check_same(&grid, c.grid())?;
        }
        Ok(Self {
            grid,
            components,
            solenoidal: false,
        })
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        let comps = coeffs
            .into_iter()
            .map(|c| ScalarField::from_coeffs(grid, c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(comps)
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let pts: Vec<[f64; 3]> = (0..grid.real_len()).map(|i| f(grid.point(i))).collect();
        let comps = (0..grid.dim())
            .map(|a| ScalarField::from_values(grid, pts.iter().map(|p| p[a]).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_components(comps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    /// Sets the flag after checking the divergence invariant.
    pub fn mark_solenoidal(mut self) -> Result<Self> {
        let r = self.divergence_residual();
        if r > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "divergence residual {r:e} exceeds 1e-10"
            )));
        }
        self.solenoidal = true;
        Ok(self)
    }

    pub(crate) fn with_flag(mut self, solenoidal: bool) -> Self {
        self.solenoidal = solenoidal;
        self
    }

    /// max_k |k·û(k)| / max_k |û(k)| (0 for the zero field).
    pub fn divergence_residual(&self) -> f64 {
        let modes = self.grid.modes();
        let mut div_max: f64 = 0.0;
        let mut amp_max: f64 = 0.0;
        for m in 0..modes.len() {
            let k = modes.k_op[m];
            let mut div = Complex64::new(0.0, 0.0);
            let mut amp = 0.0;
            for (a, c) in self.components.iter().enumerate() {
                let v = c.coeffs()[m];
                div += v * k[a];
                amp += v.norm_sqr();
            }
            div_max = div_max.max(div.norm());
            amp_max = amp_max.max(amp.sqrt());
        }
        if amp_max == 0.0 {
            0.0
        } else {
            div_max / amp_max
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components.iter().map(|c| c.scale(a)).collect(),
            solenoidal: self.solenoidal,
        }
    }

    pub fn lincomb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same(&self.grid, &other.grid)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.lincomb(a, y, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: self.grid,
            components,
            solenoidal: self.solenoidal && other.solenoidal,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, -1.0)
    }

    /// Pointwise Euclidean magnitude |u(x)|.
    pub fn magnitude(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.real_len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|o| *o = o.sqrt());
        out
    }

    /// ‖u‖₂² via Parseval.
    pub fn energy_spectral(&self) -> f64 {
        self.grid.volume()
            * self
                .components
                .iter()
                .map(|c| c.spectral_sum_sq())
                .sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.values().iter().all(|v| v.is_finite()))
    }

    pub(crate) fn coeff_vecs(&self) -> Vec<Vec<Complex64>> {
        self.components
            .iter()
            .map(|c| c.coeffs().to_vec())
            .collect()
    }
}

/// N×N scalars, optionally stored symmetrically (upper triangle only).
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: Grid,
    symmetric: bool,
    entries: Vec<ScalarField>,
}

impl TensorField {
    fn slot(dim: usize, symmetric: bool, i: usize, j: usize) -> usize {
        if symmetric {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            a * dim - a * (a + 1) / 2 + b
        } else {
            i * dim + j
        }
    }

    pub fn from_fn(
        grid: Grid,
        symmetric: bool,
        mut f: impl FnMut(usize, usize) -> Result<ScalarField>,
    ) -> Result<Self> {
        let dim = grid.dim();
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                if symmetric && j < i {
                    continue;
                }
                let e = f(i, j)?;
                check_same(&grid, e.grid())?;
                entries.push(e);
            }
        }
        Ok(Self {
            grid,
            symmetric,
            entries,
        })
    }

    /// a ⊗ b, entry (i,j) = a_i b_j.
    pub fn outer(a: &VectorField, b: &VectorField) -> Result<Self> {
        check_same(a.grid(), b.grid())?;
        let grid = *a.grid();
        Self::from_fn(grid, false, |i, j| {
            let v = a
                .component(i)
                .values()
                .iter()
                .zip(b.component(j).values())
                .map(|(x, y)| x * y)
                .collect();
            ScalarField::from_values(grid, v)
        })
    }

    /// a ⊗_s b = ½(a⊗b + b⊗a), symmetric storage.
    pub fn sym_outer(a: &VectorField, b: &VectorField) -> Result<Self> {
        check_same(a.grid(), b.grid())?;
        let grid = *a.grid();
        Self::from_fn(grid, true, |i, j| {
            let (ai, aj) = (a.component(i).values(), a.component(j).values());
            let (bi, bj) = (b.component(i).values(), b.component(j).values());
            let v = (0..grid.real_len())
                .map(|p| 0.5 * (ai[p] * bj[p] + bi[p] * aj[p]))
                .collect();
            ScalarField::from_values(grid, v)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[Self::slot(self.grid.dim(), self.symmetric, i, j)]
    }

    pub(crate) fn map_entries(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            grid: self.grid,
            symmetric: self.symmetric,
            entries: self.entries.iter().map(f).collect(),
        }
    }
}
