//! Constant B-splines (bin indicators) on an equispaced partition of `[0, 1]`.
//!
//! A partition with `N` interior knots has `N + 1` bins of width
//! `H = 1 / (N + 1)`. Bins are left-closed, and the last bin also owns the
//! right endpoint `x = 1`. In design rows bin 0 of every axis is the
//! reference level and gets no column, so a row has `1 + d N` entries:
//! the intercept followed by one block of `N` indicators per axis.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpbkError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    knots_interior: usize,
    dims: usize,
}

impl BasisSpec {
    pub fn new(knots_interior: usize, dims: usize) -> Result<Self> {
        if knots_interior == 0 {
            return Err(SpbkError::Parameter(
                "need at least one interior knot".into(),
            ));
        }
        if dims == 0 {
            return Err(SpbkError::Parameter("need at least one dimension".into()));
        }
        Ok(Self {
            knots_interior,
            dims,
        })
    }

    /// Number of interior knots `N`.
    pub fn knots(&self) -> usize {
        self.knots_interior
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn bins(&self) -> usize {
        self.knots_interior + 1
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.bins() as f64
    }

    /// Columns in an indicator design row.
    pub fn columns(&self) -> usize {
        1 + self.dims * self.knots_interior
    }

    /// Design column of indicator `(alpha, j)` for `j` in `1..=N`.
    pub fn column_of(&self, alpha: usize, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.knots_interior);
        1 + alpha * self.knots_interior + (j - 1)
    }

    /// Inverse of [`column_of`](Self::column_of); `None` for the intercept.
    pub fn bin_of_column(&self, col: usize) -> Option<(usize, usize)> {
        (col > 0).then(|| {
            let k = col - 1;
            (k / self.knots_interior, k % self.knots_interior + 1)
        })
    }
}

/// Bin `J` in `0..=N` containing `x`.
pub fn bin_index(x: f64, knots: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&x) {
        return Err(SpbkError::Domain { value: x });
    }
    let bins = knots + 1;
    // floor(x / H) with H = 1 / (N + 1); multiplying avoids the rounded reciprocal.
    let j = (x * bins as f64).floor() as usize;
    Ok(j.min(knots))
}

/// Indicator design row for one point of the unit cube.
pub fn indicator_row(xrow: &[f64], spec: &BasisSpec) -> Result<Vec<f64>> {
    let mut row = vec![0.0; spec.columns()];
    fill_indicator_row(xrow, spec, &mut row)?;
    Ok(row)
}

pub(crate) fn fill_indicator_row(xrow: &[f64], spec: &BasisSpec, out: &mut [f64]) -> Result<()> {
    if xrow.len() != spec.dims() {
        return Err(SpbkError::Sizing(format!(
            "point has {} coordinates, basis has {} dimensions",
            xrow.len(),
            spec.dims()
        )));
    }
    out.fill(0.0);
    out[0] = 1.0;
    for (alpha, &x) in xrow.iter().enumerate() {
        let j = bin_index(x, spec.knots())?;
        if j >= 1 {
            out[spec.column_of(alpha, j)] = 1.0;
        }
    }
    Ok(())
}

/// Norm constants of the centered basis for one axis.
///
/// Entry `k` (for `k` in `0..N`) describes the basis function
/// `b_k = I_{k+1} - ratio[k] * I_k`, standardized by dividing by `norm[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredNorms {
    pub ratio: Vec<f64>,
    pub norm: Vec<f64>,
}

impl CenteredNorms {
    /// Empirical norms from bin occupancy counts of one axis.
    ///
    /// With `p_j` the fraction of points in bin `j`, the ratio is
    /// `sqrt(p_{k+1} / p_k)` and `||b_k||^2 = 2 p_{k+1}`.
    pub fn empirical(column: &[f64], knots: usize) -> Result<Self> {
        let mut counts = vec![0usize; knots + 1];
        for &x in column {
            counts[bin_index(x, knots)?] += 1;
        }
        let n = column.len() as f64;
        let mut ratio = Vec::with_capacity(knots);
        let mut norm = Vec::with_capacity(knots);
        for k in 0..knots {
            let (lo, hi) = (counts[k] as f64 / n, counts[k + 1] as f64 / n);
            if lo == 0.0 || hi == 0.0 {
                return Err(SpbkError::DegenerateDesign(format!(
                    "bin {} or {} is empty; centered basis undefined",
                    k,
                    k + 1
                )));
            }
            ratio.push((hi / lo).sqrt());
            norm.push((2.0 * hi).sqrt());
        }
        Ok(Self { ratio, norm })
    }
}

/// Centered, standardized basis row: intercept then `N` entries per axis.
pub fn centered_basis_row(
    xrow: &[f64],
    spec: &BasisSpec,
    norms: &[CenteredNorms],
) -> Result<Vec<f64>> {
    if norms.len() != spec.dims() || xrow.len() != spec.dims() {
        return Err(SpbkError::Sizing(
            "norms, point and basis disagree on d".into(),
        ));
    }
    let n_knots = spec.knots();
    let mut row = vec![0.0; spec.columns()];
    row[0] = 1.0;
    for (alpha, (&x, cn)) in xrow.iter().zip(norms).enumerate() {
        if cn.ratio.len() != n_knots || cn.norm.len() != n_knots {
            return Err(SpbkError::Sizing(format!(
                "axis {alpha}: expected {n_knots} norms"
            )));
        }
        if cn.ratio.iter().chain(&cn.norm).any(|v| !(*v > 0.0)) {
            return Err(SpbkError::Parameter(format!(
                "axis {alpha}: ratios and norms must be positive"
            )));
        }
        let j = bin_index(x, n_knots)?;
        let base = 1 + alpha * n_knots;
        // Bin j is the upper bin of b_{j-1} and the lower bin of b_j.
        if j >= 1 {
            row[base + j - 1] = 1.0 / cn.norm[j - 1];
        }
        if j < n_knots {
            row[base + j] = -cn.ratio[j] / cn.norm[j];
        }
    }
    Ok(row)
}

/// `n^{-1} sum phi_i psi_i`.
pub fn empirical_inner_product(phi: &[f64], psi: &[f64]) -> Result<f64> {
    if phi.is_empty() || phi.len() != psi.len() {
        return Err(SpbkError::Sizing(format!(
            "inner product of lengths {} and {}",
            phi.len(),
            psi.len()
        )));
    }
    Ok(phi.iter().zip(psi).map(|(a, b)| a * b).sum::<f64>() / phi.len() as f64)
}
