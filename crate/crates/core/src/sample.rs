//! Regression samples, lag embedding and affine maps onto the unit cube.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpbkError};

/// A response vector with an `n x d` predictor matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionSample {
    y: Vec<f64>,
    x: Vec<f64>,
    d: usize,
}

impl RegressionSample {
    /// Builds a sample from a response and a row-major flat predictor buffer.
    pub fn from_flat(y: Vec<f64>, x: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(SpbkError::Sizing(
                "sample needs at least one predictor".into(),
            ));
        }
        if y.is_empty() {
            return Err(SpbkError::Sizing("sample has no rows".into()));
        }
        if x.len() != y.len() * d {
            return Err(SpbkError::Sizing(format!(
                "predictor buffer holds {} values, expected {} rows x {} columns",
                x.len(),
                y.len(),
                d
            )));
        }
        Ok(Self { y, x, d })
    }

    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != y.len() {
            return Err(SpbkError::Sizing(format!(
                "{} responses but {} predictor rows",
                y.len(),
                rows.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(SpbkError::Sizing(format!(
                "predictor row {i} has {} columns, expected {d}",
                rows[i].len()
            )));
        }
        Self::from_flat(y, rows.concat(), d)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn x(&self, i: usize, alpha: usize) -> f64 {
        self.x[i * self.d + alpha]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.d)
    }

    pub fn column(&self, alpha: usize) -> Vec<f64> {
        self.rows().map(|r| r[alpha]).collect()
    }

    /// Copy of the sample with the response replaced.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::from_flat(y, self.x.clone(), self.d)
    }

    /// Rows where `keep` is true, in order.
    pub fn select_rows(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.n() {
            return Err(SpbkError::Sizing(format!(
                "mask has {} entries for {} rows",
                keep.len(),
                self.n()
            )));
        }
        let mut y = Vec::new();
        let mut x = Vec::new();
        for (i, _) in keep.iter().enumerate().filter(|(_, k)| **k) {
            y.push(self.y[i]);
            x.extend_from_slice(self.row(i));
        }
        Self::from_flat(y, x, self.d)
    }

    /// Fails unless the sample can carry the smallest admissible pilot design.
    pub fn check_pilot_size(&self) -> Result<()> {
        let need = 2 * (1 + self.d);
        if self.n() < need {
            return Err(SpbkError::Sizing(format!(
                "n = {} rows, need at least 2(1 + d) = {need}",
                self.n()
            )));
        }
        Ok(())
    }
}

/// Which lags of a univariate series become predictors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagSpec {
    lags: Vec<usize>,
    burn_in: usize,
}

impl LagSpec {
    pub fn new(mut lags: Vec<usize>, burn_in: usize) -> Result<Self> {
        if lags.is_empty() {
            return Err(SpbkError::Parameter("lag list is empty".into()));
        }
        if lags.contains(&0) {
            return Err(SpbkError::Parameter("lags must be positive".into()));
        }
        lags.sort_unstable();
        if lags.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpbkError::Parameter("duplicate lag".into()));
        }
        Ok(Self { lags, burn_in })
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    fn max_lag(&self) -> usize {
        *self.lags.last().expect("nonempty")
    }
}

/// Turns a univariate series into a lagged regression sample.
///
/// Rows start at `t = burn_in + max(lags)`; row `t` has response `series[t]`
/// and predictors `series[t - lag]` in ascending lag order.
pub fn lag_embed(series: &[f64], spec: &LagSpec) -> Result<RegressionSample> {
    let start = spec.burn_in() + spec.max_lag();
    if series.len() <= start {
        return Err(SpbkError::Sizing(format!(
            "series of length {} too short: need at least {} values",
            series.len(),
            start + 1
        )));
    }
    let d = spec.lags().len();
    let mut y = Vec::with_capacity(series.len() - start);
    let mut x = Vec::with_capacity((series.len() - start) * d);
    for t in start..series.len() {
        y.push(series[t]);
        x.extend(spec.lags().iter().map(|&lag| series[t - lag]));
    }
    RegressionSample::from_flat(y, x, d)
}

/// Per-axis interval `[lo, hi]` mapped affinely onto `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// How the per-axis interval of a [`DomainMap`] is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum RangeMode {
    /// Sample minimum and maximum.
    Observed,
    /// Empirical `(1-q)/2` and `(1+q)/2` quantiles.
    CentralQuantile(f64),
    /// Caller-supplied bounds, one pair per axis.
    Explicit(Vec<(f64, f64)>),
}

impl DomainMap {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(SpbkError::Sizing(
                "domain bounds must be nonempty and paired".into(),
            ));
        }
        for (axis, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(SpbkError::DegenerateAxis {
                    axis,
                    reason: format!("bounds [{l}, {h}] are not an increasing finite interval"),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// The same interval on every one of `d` axes.
    pub fn uniform(lo: f64, hi: f64, d: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn d(&self) -> usize {
        self.lo.len()
    }

    pub fn to_unit(&self, alpha: usize, x: f64) -> f64 {
        (x - self.lo[alpha]) / (self.hi[alpha] - self.lo[alpha])
    }

    pub fn from_unit(&self, alpha: usize, u: f64) -> f64 {
        self.lo[alpha] + u * (self.hi[alpha] - self.lo[alpha])
    }

    /// Length of axis `alpha` in original units.
    pub fn width(&self, alpha: usize) -> f64 {
        self.hi[alpha] - self.lo[alpha]
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    if k + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[k] + frac * (sorted[k + 1] - sorted[k])
    }
}

/// Chooses per-axis bounds for the predictors of `sample`.
pub fn fit_domain_map(sample: &RegressionSample, mode: &RangeMode) -> Result<DomainMap> {
    if sample.n() < 2 {
        return Err(SpbkError::Sizing(
            "need at least two rows to fit a domain".into(),
        ));
    }
    let d = sample.d();
    let (mut lo, mut hi) = (Vec::with_capacity(d), Vec::with_capacity(d));
    match mode {
        RangeMode::Explicit(bounds) => {
            if bounds.len() != d {
                return Err(SpbkError::Sizing(format!(
                    "{} explicit bounds for {d} axes",
                    bounds.len()
                )));
            }
            for &(l, h) in bounds {
                lo.push(l);
                hi.push(h);
            }
        }
        RangeMode::Observed => {
            for alpha in 0..d {
                let col = sample.column(alpha);
                lo.push(col.iter().copied().fold(f64::INFINITY, f64::min));
                hi.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
        RangeMode::CentralQuantile(q) => {
            if !(*q > 0.5 && *q < 1.0) {
                return Err(SpbkError::Parameter(format!(
                    "central quantile q = {q} must lie in (0.5, 1)"
                )));
            }
            for alpha in 0..d {
                let mut col = sample.column(alpha);
                col.sort_by(f64::total_cmp);
                lo.push(quantile_sorted(&col, (1.0 - q) / 2.0));
                hi.push(quantile_sorted(&col, (1.0 + q) / 2.0));
            }
        }
    }
    DomainMap::new(lo, hi)
}

/// A sample on the unit cube together with the rows that fell outside it.
#[derive(Clone, Debug)]
pub struct NormalizedSample {
    pub sample: RegressionSample,
    /// `true` where every coordinate of the row lies in `[0, 1]`.
    pub in_range: Vec<bool>,
    pub map: DomainMap,
}

impl NormalizedSample {
    /// The in-range rows, which are the only ones used for fitting.
    pub fn fitting_sample(&self) -> Result<RegressionSample> {
        self.sample.select_rows(&self.in_range)
    }

    pub fn out_of_range_count(&self) -> usize {
        self.in_range.iter().filter(|k| !**k).count()
    }
}

/// Maps predictors onto the unit cube and flags rows that leave it.
pub fn normalize(sample: &RegressionSample, map: &DomainMap) -> Result<NormalizedSample> {
    if map.d() != sample.d() {
        return Err(SpbkError::Sizing(format!(
            "domain map has {} axes, sample has {}",
            map.d(),
            sample.d()
        )));
    }
    let d = sample.d();
    let mut x = Vec::with_capacity(sample.n() * d);
    let mut in_range = Vec::with_capacity(sample.n());
    for row in sample.rows() {
        let mut inside = true;
        for (alpha, &v) in row.iter().enumerate() {
            let u = map.to_unit(alpha, v);
            inside &= (0.0..=1.0).contains(&u);
            x.push(u);
        }
        in_range.push(inside);
    }
    Ok(NormalizedSample {
        sample: RegressionSample::from_flat(sample.y().to_vec(), x, d)?,
        in_range,
        map: map.clone(),
    })
}

/// Inverse of [`normalize`].
pub fn denormalize(sample: &RegressionSample, map: &DomainMap) -> Result<RegressionSample> {
    if map.d() != sample.d() {
        return Err(SpbkError::Sizing(
            "domain map and sample disagree on d".into(),
        ));
    }
    let x = sample
        .rows()
        .flat_map(|row| row.iter().enumerate().map(|(a, &u)| map.from_unit(a, u)))
        .collect();
    RegressionSample::from_flat(sample.y().to_vec(), x, sample.d())
}
