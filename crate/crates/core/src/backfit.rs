//! Stage two: kernel re-smoothing of spline pseudo-responses.
//!
//! For axis `alpha` the pseudo-response removes the sample mean and every
//! other pilot component from `Y`, leaving a univariate regression on
//! `X_alpha` that is smoothed with Nadaraya-Watson. The oracle smoother does
//! the same with the true components and constant, which is only possible
//! in simulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SpbkError};
use crate::kernel::{Bandwidth, KernelSpec, SortedSmoother};
use crate::pilot::PilotFit;
use crate::sample::RegressionSample;

/// Number of grid points used when the caller does not supply a grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// `points` equispaced values covering `[0, 1]`.
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..points)
            .map(|k| k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// One estimated component on a grid of the unit interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpbkFit {
    pub alpha: usize,
    pub grid: Vec<f64>,
    /// `None` where the kernel window held no observations.
    pub values: Vec<Option<f64>>,
    pub h: Bandwidth,
    pub band_lo: Option<Vec<Option<f64>>>,
    pub band_hi: Option<Vec<Option<f64>>>,
    /// `h <= x <= 1 - h` at each grid point.
    pub interior: Vec<bool>,
}

impl SpbkFit {
    /// Linear interpolation of the grid values; `None` off the grid or next to a gap.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let g = &self.grid;
        if g.is_empty() || x < g[0] || x > g[g.len() - 1] {
            return None;
        }
        let k = g.partition_point(|&v| v <= x);
        if g[k - 1] == x {
            return self.values[k - 1];
        }
        let (x0, x1) = (g[k - 1], g[k]);
        let (v0, v1) = (self.values[k - 1]?, self.values[k]?);
        let t = (x - x0) / (x1 - x0);
        Some(v0 + t * (v1 - v0))
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// True additive structure on the unit cube, used by the oracle smoother.
pub trait AdditiveTruth: Sync {
    fn constant(&self) -> f64;
    fn component(&self, alpha: usize, u: f64) -> f64;
}

fn check_axis(alpha: usize, d: usize) -> Result<()> {
    if alpha < d {
        Ok(())
    } else {
        Err(SpbkError::Parameter(format!(
            "axis {alpha} out of range for d = {d}"
        )))
    }
}

/// `Y_i - Ybar - sum_{beta != alpha} m_beta(X_{i beta})` with pilot components.
pub fn pseudo_responses(
    sample: &RegressionSample,
    pilot: &PilotFit,
    alpha: usize,
) -> Result<Vec<f64>> {
    check_axis(alpha, sample.d())?;
    if pilot.d() != sample.d() {
        return Err(SpbkError::Sizing("pilot and sample disagree on d".into()));
    }
    sample
        .rows()
        .zip(sample.y())
        .map(|(row, &y)| {
            let mut r = y - pilot.c_hat;
            for (beta, &x) in row.iter().enumerate() {
                if beta != alpha {
                    r -= pilot.component_at(beta, x)?;
                }
            }
            Ok(r)
        })
        .collect()
}

/// Oracle responses `Y_i - c - sum_{beta != alpha} m_beta(X_{i beta})`.
pub fn oracle_responses(
    sample: &RegressionSample,
    truth: &dyn AdditiveTruth,
    alpha: usize,
) -> Result<Vec<f64>> {
    check_axis(alpha, sample.d())?;
    let c = truth.constant();
    Ok(sample
        .rows()
        .zip(sample.y())
        .map(|(row, &y)| {
            let mut r = y - c;
            for (beta, &x) in row.iter().enumerate() {
                if beta != alpha {
                    r -= truth.component(beta, x);
                }
            }
            r
        })
        .collect())
}

/// Oracle responses from component values already tabulated at the rows.
///
/// `components[beta][i]` is `m_beta(X_{i beta})`.
pub fn oracle_responses_tabulated(
    y: &[f64],
    constant: f64,
    components: &[Vec<f64>],
    alpha: usize,
) -> Result<Vec<f64>> {
    check_axis(alpha, components.len())?;
    if components.iter().any(|c| c.len() != y.len()) {
        return Err(SpbkError::Sizing(
            "truth table and response lengths differ".into(),
        ));
    }
    Ok((0..y.len())
        .map(|i| {
            let mut r = y[i] - constant;
            for (beta, c) in components.iter().enumerate() {
                if beta != alpha {
                    r -= c[i];
                }
            }
            r
        })
        .collect())
}

/// Nadaraya-Watson smooth of `responses` against axis `alpha` on `grid`.
pub fn smooth_component(
    sample: &RegressionSample,
    responses: &[f64],
    alpha: usize,
    h: Bandwidth,
    grid: &[f64],
) -> Result<SpbkFit> {
    check_axis(alpha, sample.d())?;
    if let Some(&bad) = grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(SpbkError::Domain { value: bad });
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpbkError::Parameter(
            "grid must be strictly ascending".into(),
        ));
    }
    let smoother = SortedSmoother::new(&sample.column(alpha), responses, h)?;
    let hv = h.get();
    Ok(SpbkFit {
        alpha,
        grid: grid.to_vec(),
        values: grid.iter().map(|&x| smoother.estimate(x)).collect(),
        h,
        band_lo: None,
        band_hi: None,
        interior: grid.iter().map(|&x| hv <= x && x <= 1.0 - hv).collect(),
    })
}

/// SPBK estimate of component `alpha` on `grid`.
pub fn spbk_component(
    sample: &RegressionSample,
    pilot: &PilotFit,
    alpha: usize,
    h: Bandwidth,
    grid: &[f64],
) -> Result<SpbkFit> {
    let responses = pseudo_responses(sample, pilot, alpha)?;
    smooth_component(sample, &responses, alpha, h, grid)
}

/// Oracle smoother of component `alpha` on `grid`.
pub fn oracle_component(
    sample: &RegressionSample,
    truth: &dyn AdditiveTruth,
    alpha: usize,
    h: Bandwidth,
    grid: &[f64],
) -> Result<SpbkFit> {
    let responses = oracle_responses(sample, truth, alpha)?;
    smooth_component(sample, &responses, alpha, h, grid)
}

/// Local quantities entering the asymptotic bias and variance at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalTruth {
    pub m_prime: f64,
    pub m_double_prime: f64,
    pub density: f64,
    pub density_prime: f64,
    /// `E[sigma^2(X) | X_alpha = x]`.
    pub cond_var: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    /// Leading bias coefficient; the bias is `b h^2`.
    pub b: f64,
    /// Asymptotic variance of `sqrt(n h) (m* - m)`.
    pub v2: f64,
}

pub fn asymptotic_constants(
    local: &LocalTruth,
    kernel: &KernelSpec,
) -> Result<AsymptoticConstants> {
    if !(local.density > 0.0) {
        return Err(SpbkError::Domain {
            value: local.density,
        });
    }
    let f = local.density;
    let b =
        kernel.mu2_k * (local.m_double_prime * f / 2.0 + local.m_prime * local.density_prime) / f;
    let v2 = kernel.r_k * local.cond_var / f;
    Ok(AsymptoticConstants { b, v2 })
}

/// Supplies true derivatives and densities for the analytic bias correction.
pub trait BiasSource: Sync {
    fn local(&self, alpha: usize, u: f64) -> LocalTruth;
}

#[derive(Clone, Copy)]
pub enum BiasMode<'a> {
    /// Bands centred at the estimate.
    None,
    /// Subtract `b(x) h^2` computed from caller-supplied truth.
    Analytic(&'a dyn BiasSource),
}

/// Source of the conditional noise level in the band half-width.
#[derive(Clone, Copy, Debug)]
pub enum ResidualScale<'a> {
    /// Residuals at the sample rows; their squares are kernel-smoothed.
    Residuals(&'a [f64]),
    /// A known constant noise standard deviation.
    Known(f64),
}

/// Grid points where a band could not be formed.
#[derive(Clone, Debug, PartialEq)]
pub struct BandDiagnostic {
    pub x: f64,
    pub reason: String,
}

/// Two-sided standard normal quantile `z_{(1 - level)/2}`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(SpbkError::Parameter(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

/// Adds pointwise confidence bands at the interior grid points of `fit`.
///
/// Half-width is `z sigma(x) sqrt(int K^2) / sqrt(n h f(x))`, with `f` the
/// kernel density of axis `alpha` and `sigma^2(x)` the kernel smooth of the
/// squared residuals. In [`BiasMode::Analytic`] the band centre moves to
/// `m*(x) - b(x) h^2` and need not contain the estimate.
pub fn confidence_band(
    fit: &SpbkFit,
    sample: &RegressionSample,
    scale: ResidualScale<'_>,
    level: f64,
    bias: BiasMode<'_>,
) -> Result<(SpbkFit, Vec<BandDiagnostic>)> {
    let z = normal_quantile(level)?;
    let kernel = KernelSpec::QUARTIC;
    let column = sample.column(fit.alpha);
    let n = sample.n() as f64;
    let h = fit.h.get();
    let density = SortedSmoother::new(&column, &vec![0.0; column.len()], fit.h)?;
    let var_smoother = match scale {
        ResidualScale::Residuals(r) => {
            if r.len() != sample.n() {
                return Err(SpbkError::Sizing(format!(
                    "{} residuals for {} rows",
                    r.len(),
                    sample.n()
                )));
            }
            let sq: Vec<f64> = r.iter().map(|v| v * v).collect();
            Some(SortedSmoother::new(&column, &sq, fit.h)?)
        }
        ResidualScale::Known(s) => {
            if !(s >= 0.0) {
                return Err(SpbkError::Parameter(format!(
                    "noise level {s} must be nonnegative"
                )));
            }
            None
        }
    };

    let mut lo = vec![None; fit.grid.len()];
    let mut hi = vec![None; fit.grid.len()];
    let mut diagnostics = Vec::new();
    for (k, &x) in fit.grid.iter().enumerate() {
        if !fit.interior[k] {
            continue;
        }
        let Some(value) = fit.values[k] else {
            diagnostics.push(BandDiagnostic {
                x,
                reason: "no estimate at this point".into(),
            });
            continue;
        };
        let f_hat = density.density(x);
        if !(f_hat > 0.0) {
            diagnostics.push(BandDiagnostic {
                x,
                reason: "estimated density is zero".into(),
            });
            continue;
        }
        let sigma = match (&var_smoother, scale) {
            (Some(s), _) => s.estimate(x).unwrap_or(0.0).max(0.0).sqrt(),
            (None, ResidualScale::Known(s)) => s,
            (None, ResidualScale::Residuals(_)) => unreachable!(),
        };
        let center = match bias {
            BiasMode::None => value,
            BiasMode::Analytic(src) => {
                value - asymptotic_constants(&src.local(fit.alpha, x), &kernel)?.b * h * h
            }
        };
        let half = z * sigma * kernel.r_k.sqrt() / (n * h * f_hat).sqrt();
        lo[k] = Some(center - half);
        hi[k] = Some(center + half);
    }
    let mut out = fit.clone();
    out.band_lo = Some(lo);
    out.band_hi = Some(hi);
    Ok((out, diagnostics))
}

/// All components of the additive fit plus the constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveFit {
    pub c_hat: f64,
    pub components: Vec<SpbkFit>,
}

impl AdditiveFit {
    /// `c_hat + sum_alpha m*_alpha(x_alpha)`, interpolating each component grid.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.components.len() {
            return Err(SpbkError::Sizing(format!(
                "point has {} coordinates, fit has {} components",
                x.len(),
                self.components.len()
            )));
        }
        let mut s = self.c_hat;
        for (comp, &u) in self.components.iter().zip(x) {
            s += comp.value_at(u).ok_or(SpbkError::EmptyWindow {
                x0: u,
                h: comp.h.get(),
            })?;
        }
        Ok(s)
    }

    /// `Y_i - prediction(X_i)` for every row.
    pub fn residuals(&self, sample: &RegressionSample) -> Result<Vec<f64>> {
        sample
            .rows()
            .zip(sample.y())
            .map(|(row, &y)| Ok(y - self.predict(row)?))
            .collect()
    }
}

/// SPBK estimates of every component, fit independently per axis.
pub fn full_fit(
    sample: &RegressionSample,
    pilot: &PilotFit,
    h_per_axis: &[Bandwidth],
    grid_per_axis: &[Vec<f64>],
) -> Result<AdditiveFit> {
    let d = sample.d();
    if h_per_axis.len() != d || grid_per_axis.len() != d {
        return Err(SpbkError::Sizing(format!(
            "need {d} bandwidths and grids, got {} and {}",
            h_per_axis.len(),
            grid_per_axis.len()
        )));
    }
    let components = (0..d)
        .into_par_iter()
        .map(|alpha| {
            spbk_component(
                sample,
                pilot,
                alpha,
                h_per_axis[alpha],
                &grid_per_axis[alpha],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdditiveFit {
        c_hat: pilot.c_hat,
        components,
    })
}
