//! Stage one: the constant-spline least-squares pilot and its centered components.

use serde::{Deserialize, Serialize};

use crate::basis::{bin_index, fill_indicator_row, BasisSpec};
use crate::error::{Result, SpbkError};
use crate::lsq::{solve_least_squares, Matrix};
use crate::sample::RegressionSample;

/// Interior knot count `min(floor(c n^{2/5} ln n) + 1, floor((n/2 - 1)/d))`, at least 1.
///
/// `c` is the tuning constant of the knot rule; it is unrelated to the
/// additive model's constant term.
pub fn choose_knot_count(n: usize, d: usize, c: f64) -> Result<usize> {
    if d == 0 || n < 2 * (1 + d) {
        return Err(SpbkError::Sizing(format!(
            "knot rule needs n >= 2(1 + d); got n = {n}, d = {d}"
        )));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(SpbkError::Parameter(format!(
            "tuning constant c = {c} must be positive"
        )));
    }
    let nf = n as f64;
    let rate = (c * nf.powf(0.4) * nf.ln()).floor() as usize + 1;
    let cap = ((nf / 2.0 - 1.0) / d as f64).floor() as usize;
    Ok(rate.min(cap).max(1))
}

/// Fitted pilot spline on the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotFit {
    pub spec: BasisSpec,
    /// Intercept of the indicator parameterization.
    pub lambda0: f64,
    /// `lambda[alpha][j - 1]` multiplies the indicator of bin `j` on axis `alpha`.
    pub lambda: Vec<Vec<f64>>,
    /// Per-axis sample means of the uncentered components.
    pub comp_offsets: Vec<f64>,
    /// Sample mean of the response; the constant used downstream.
    pub c_hat: f64,
    /// Intercept plus all component offsets.
    pub m_hat_c: f64,
    /// `(alpha, j)` pairs whose indicator column was dropped by the solver.
    pub dropped_bins: Vec<(usize, usize)>,
    pub dropped_intercept: bool,
    pub n: usize,
}

impl PilotFit {
    pub fn d(&self) -> usize {
        self.spec.dims()
    }

    fn uncentered(&self, alpha: usize, x: f64) -> Result<f64> {
        let j = bin_index(x, self.spec.knots())?;
        Ok(if j == 0 {
            0.0
        } else {
            self.lambda[alpha][j - 1]
        })
    }

    /// Centered component `m_alpha(x)`.
    pub fn component_at(&self, alpha: usize, x: f64) -> Result<f64> {
        if alpha >= self.d() {
            return Err(SpbkError::Parameter(format!(
                "axis {alpha} out of range for d = {}",
                self.d()
            )));
        }
        Ok(self.uncentered(alpha, x)? - self.comp_offsets[alpha])
    }

    /// Raw spline fit `lambda0 + sum lambda I` at a point.
    pub fn fitted_value(&self, xrow: &[f64]) -> Result<f64> {
        let mut s = self.lambda0;
        for (alpha, &x) in xrow.iter().enumerate() {
            s += self.uncentered(alpha, x)?;
        }
        Ok(s)
    }

    /// Centered component values at every row of `sample`, one vector per axis.
    pub fn component_table(&self, sample: &RegressionSample) -> Result<Vec<Vec<f64>>> {
        (0..self.d())
            .map(|alpha| {
                sample
                    .rows()
                    .map(|r| self.component_at(alpha, r[alpha]))
                    .collect()
            })
            .collect()
    }
}

/// Same as [`PilotFit::component_at`].
pub fn pilot_component_at(fit: &PilotFit, alpha: usize, x: f64) -> Result<f64> {
    fit.component_at(alpha, x)
}

/// Indicator design matrix of a unit-cube sample.
pub fn indicator_design(sample: &RegressionSample, spec: &BasisSpec) -> Result<Matrix> {
    let mut design = Matrix::zeros(sample.n(), spec.columns());
    for (i, xrow) in sample.rows().enumerate() {
        fill_indicator_row(xrow, spec, design.row_mut(i))?;
    }
    Ok(design)
}

/// Least-squares constant-spline fit with `knots` interior knots per axis.
pub fn fit_pilot(sample: &RegressionSample, knots: usize) -> Result<PilotFit> {
    sample.check_pilot_size()?;
    let spec = BasisSpec::new(knots, sample.d())?;
    let design = indicator_design(sample, &spec)?;
    let sol = solve_least_squares(&design, sample.y())?;

    let d = sample.d();
    let lambda: Vec<Vec<f64>> = (0..d)
        .map(|alpha| {
            (1..=knots)
                .map(|j| sol.coeffs[spec.column_of(alpha, j)])
                .collect()
        })
        .collect();
    let mut dropped_bins = Vec::new();
    let mut dropped_intercept = false;
    for &col in &sol.dropped_columns {
        match spec.bin_of_column(col) {
            Some(bin) => dropped_bins.push(bin),
            None => dropped_intercept = true,
        }
    }

    let n = sample.n() as f64;
    let mut comp_offsets = vec![0.0; d];
    for xrow in sample.rows() {
        for (alpha, &x) in xrow.iter().enumerate() {
            let j = bin_index(x, knots)?;
            if j > 0 {
                comp_offsets[alpha] += lambda[alpha][j - 1];
            }
        }
    }
    comp_offsets.iter_mut().for_each(|o| *o /= n);

    let lambda0 = sol.coeffs[0];
    let c_hat = sample.y().iter().sum::<f64>() / n;
    let m_hat_c = lambda0 + comp_offsets.iter().sum::<f64>();

    Ok(PilotFit {
        spec,
        lambda0,
        lambda,
        comp_offsets,
        c_hat,
        m_hat_c,
        dropped_bins,
        dropped_intercept,
        n: sample.n(),
    })
}
