//! Seeded data generators and their true additive components.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::backfit::{AdditiveTruth, BiasSource, LocalTruth};
use crate::error::{Result, SpbkError};
use crate::sample::{lag_embed, quantile_sorted, DomainMap, LagSpec, RegressionSample};

/// Observations discarded at the start of every autoregressive series.
pub const BURN_IN: usize = 2000;
/// Lags of the autoregressive example used as predictors.
pub const EX1_LAGS: [usize; 3] = [1, 2, 3];
/// Truncation bound of the i.i.d. design in the heteroscedastic example.
pub const EX2_BOUND: f64 = 2.5;

/// Length of the seeded run that estimates centering constants.
pub const CENTERING_RUN_LENGTH: usize = 1_000_000;
/// Seed of that run.
pub const CENTERING_SEED: u64 = 20_060_601;

/// Independent stream for replication `rep` of a study seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Start values of the autoregressive recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ex1Start(pub [f64; 3]);

impl Default for Ex1Start {
    fn default() -> Self {
        Self([0.0; 3])
    }
}

/// `Y_t = 1.5 sin(pi/2 Y_{t-2}) - sin(pi/2 Y_{t-3}) + sigma0 e_t`.
///
/// Returns `len` values; the first three are the start values.
pub fn ex1_series<R: Rng + ?Sized>(
    len: usize,
    sigma0: f64,
    start: Ex1Start,
    rng: &mut R,
) -> Vec<f64> {
    let mut y = Vec::with_capacity(len);
    y.extend(start.0.iter().copied().take(len));
    while y.len() < len {
        let t = y.len();
        let e: f64 = rng.sample(StandardNormal);
        y.push(1.5 * (PI / 2.0 * y[t - 2]).sin() - (PI / 2.0 * y[t - 3]).sin() + sigma0 * e);
    }
    y
}

/// Raw autoregressive series of length `n + 2003`, zero start values.
pub fn gen_example1(n: usize, sigma0: f64, seed: u64) -> Result<Vec<f64>> {
    gen_example1_with(n, sigma0, &mut replication_rng(seed, 0))
}

pub fn gen_example1_with<R: Rng + ?Sized>(n: usize, sigma0: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma0 >= 0.0) || !sigma0.is_finite() {
        return Err(SpbkError::Parameter(format!(
            "sigma0 = {sigma0} must be nonnegative"
        )));
    }
    Ok(ex1_series(
        n + BURN_IN + 3,
        sigma0,
        Ex1Start::default(),
        rng,
    ))
}

/// Lagged regression sample from a raw series of the autoregressive example.
pub fn embed_example1(series: &[f64]) -> Result<RegressionSample> {
    lag_embed(series, &LagSpec::new(EX1_LAGS.to_vec(), BURN_IN)?)
}

/// Long-run quantities of the stationary autoregression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryMoments {
    pub sigma0: f64,
    pub seed: u64,
    pub length: usize,
    /// `E[sin(pi/2 Y_t)]`.
    pub mean_sin: f64,
    /// Symmetric bound holding 95% of the observations.
    pub central95: f64,
}

impl StationaryMoments {
    pub fn compute(sigma0: f64, seed: u64, length: usize) -> Self {
        let mut rng = replication_rng(seed, u64::MAX);
        let series = ex1_series(length + BURN_IN, sigma0, Ex1Start::default(), &mut rng);
        let tail = &series[BURN_IN..];
        let mean_sin = tail.iter().map(|y| (PI / 2.0 * y).sin()).sum::<f64>() / tail.len() as f64;
        let mut abs: Vec<f64> = tail.iter().map(|y| y.abs()).collect();
        abs.sort_by(f64::total_cmp);
        Self {
            sigma0,
            seed,
            length,
            mean_sin,
            central95: quantile_sorted(&abs, 0.95),
        }
    }

    /// Process-wide cached moments from the standard centering run.
    pub fn cached(sigma0: f64) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<u64, StationaryMoments>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(m) = cache.lock().expect("cache poisoned").get(&sigma0.to_bits()) {
            return *m;
        }
        let m = Self::compute(sigma0, CENTERING_SEED, CENTERING_RUN_LENGTH);
        cache
            .lock()
            .expect("cache poisoned")
            .insert(sigma0.to_bits(), m);
        m
    }
}

/// Predictor range of the autoregressive example: the calibrated bounds for
/// `sigma0` of 0.5 and 1.0, otherwise the long-run 95% central bound.
#[allow(clippy::approx_constant)]
pub fn ex1_bound(sigma0: f64) -> f64 {
    if sigma0 == 0.5 {
        2.58
    } else if sigma0 == 1.0 {
        3.14
    } else {
        StationaryMoments::cached(sigma0).central95
    }
}

/// An additive model written on the original predictor scale.
pub trait TrueModel: Sync {
    fn d(&self) -> usize;
    fn constant(&self) -> f64;
    fn component(&self, alpha: usize, x: f64) -> f64;
    /// First and second derivative of component `alpha` at `x`.
    fn derivatives(&self, alpha: usize, x: f64) -> (f64, f64);
    /// Marginal density of predictor `alpha` and its derivative, if known.
    fn marginal_density(&self, _alpha: usize, _x: f64) -> Option<(f64, f64)> {
        None
    }
    /// `E[sigma^2(X) | X_alpha = x]`, if known.
    fn conditional_variance(&self, _alpha: usize, _x: f64) -> Option<f64> {
        None
    }
}

/// True components of the autoregressive example.
///
/// `m_1 = 0`, `m_2 = 1.5 sin(pi/2 x) - k_2`, `m_3 = -sin(pi/2 x) - k_3`, where
/// the centering constants are long-run means and the model constant is
/// `k_2 + k_3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ex1Truth {
    pub sigma0: f64,
    pub center2: f64,
    pub center3: f64,
}

impl Ex1Truth {
    pub fn from_moments(m: &StationaryMoments) -> Self {
        Self {
            sigma0: m.sigma0,
            center2: 1.5 * m.mean_sin,
            center3: -m.mean_sin,
        }
    }
}

/// True components of the autoregressive example, centering from the cached run.
pub fn true_components_ex1(sigma0: f64) -> Ex1Truth {
    Ex1Truth::from_moments(&StationaryMoments::cached(sigma0))
}

impl TrueModel for Ex1Truth {
    fn d(&self) -> usize {
        3
    }

    fn constant(&self) -> f64 {
        self.center2 + self.center3
    }

    fn component(&self, alpha: usize, x: f64) -> f64 {
        let s = (PI / 2.0 * x).sin();
        match alpha {
            0 => 0.0,
            1 => 1.5 * s - self.center2,
            2 => -s - self.center3,
            _ => panic!("component {alpha} out of range"),
        }
    }

    fn derivatives(&self, alpha: usize, x: f64) -> (f64, f64) {
        let w = PI / 2.0;
        let scale = match alpha {
            0 => 0.0,
            1 => 1.5,
            2 => -1.0,
            _ => panic!("component {alpha} out of range"),
        };
        (scale * w * (w * x).cos(), -scale * w * w * (w * x).sin())
    }

    fn conditional_variance(&self, _alpha: usize, _x: f64) -> Option<f64> {
        Some(self.sigma0 * self.sigma0)
    }
}

/// Standard normal truncated to `[-bound, bound]`, by rejection.
pub fn truncated_normal<R: Rng + ?Sized>(bound: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= bound {
            return z;
        }
    }
}

/// Noise scale `sigma0 (sqrt(d)/2) (5 - e^s)/(5 + e^s)` with `s = mean |x|`.
///
/// The factor turns negative for `s > ln 5`; only its magnitude matters
/// because it multiplies a symmetric error.
pub fn ex2_noise_scale(xrow: &[f64], sigma0: f64) -> f64 {
    let d = xrow.len() as f64;
    let s = xrow.iter().map(|x| x.abs()).sum::<f64>() / d;
    let e = s.exp();
    sigma0 * d.sqrt() / 2.0 * (5.0 - e) / (5.0 + e)
}

/// Heteroscedastic additive sample with i.i.d. truncated-normal predictors.
pub fn gen_example2(n: usize, d: usize, sigma0: f64, seed: u64) -> Result<RegressionSample> {
    gen_example2_with(n, d, sigma0, &mut replication_rng(seed, 0))
}

pub fn gen_example2_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    sigma0: f64,
    rng: &mut R,
) -> Result<RegressionSample> {
    if d == 0 || n == 0 {
        return Err(SpbkError::Sizing(format!(
            "need n, d >= 1; got n = {n}, d = {d}"
        )));
    }
    if !(sigma0 >= 0.0) || !sigma0.is_finite() {
        return Err(SpbkError::Parameter(format!(
            "sigma0 = {sigma0} must be nonnegative"
        )));
    }
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| truncated_normal(EX2_BOUND, rng)).collect();
        let e: f64 = rng.sample(StandardNormal);
        let mean: f64 = row.iter().map(|&v| (PI / 2.5 * v).sin()).sum();
        y.push(mean + ex2_noise_scale(&row, sigma0) * e);
        x.extend(row);
    }
    RegressionSample::from_flat(y, x, d)
}

/// True components of the heteroscedastic example: `m_alpha = sin(pi x / 2.5)`, constant 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ex2Truth {
    pub d: usize,
}

impl Ex2Truth {
    fn normalizer() -> f64 {
        // P(|Z| <= 2.5) for a standard normal.
        statrs::function::erf::erf(EX2_BOUND / std::f64::consts::SQRT_2)
    }
}

impl TrueModel for Ex2Truth {
    fn d(&self) -> usize {
        self.d
    }

    fn constant(&self) -> f64 {
        0.0
    }

    fn component(&self, _alpha: usize, x: f64) -> f64 {
        (PI / 2.5 * x).sin()
    }

    fn derivatives(&self, _alpha: usize, x: f64) -> (f64, f64) {
        let w = PI / 2.5;
        (w * (w * x).cos(), -w * w * (w * x).sin())
    }

    fn marginal_density(&self, _alpha: usize, x: f64) -> Option<(f64, f64)> {
        if x.abs() > EX2_BOUND {
            return Some((0.0, 0.0));
        }
        let phi = (-x * x / 2.0).exp() / (2.0 * PI).sqrt() / Self::normalizer();
        Some((phi, -x * phi))
    }
}

/// A [`TrueModel`] viewed on the unit cube through a [`DomainMap`].
///
/// Derivatives and densities are rescaled by the axis widths.
pub struct OnUnitCube<'a, M: TrueModel + ?Sized> {
    pub model: &'a M,
    pub map: &'a DomainMap,
    /// Density used where the model has no closed form: kernel estimate
    /// of the unit-scale marginal and its derivative.
    pub density_fallback: Option<&'a (dyn Fn(usize, f64) -> (f64, f64) + Sync)>,
}

impl<'a, M: TrueModel + ?Sized> OnUnitCube<'a, M> {
    pub fn new(model: &'a M, map: &'a DomainMap) -> Self {
        Self {
            model,
            map,
            density_fallback: None,
        }
    }
}

impl<M: TrueModel + ?Sized> AdditiveTruth for OnUnitCube<'_, M> {
    fn constant(&self) -> f64 {
        self.model.constant()
    }

    fn component(&self, alpha: usize, u: f64) -> f64 {
        self.model.component(alpha, self.map.from_unit(alpha, u))
    }
}

impl<M: TrueModel + ?Sized> BiasSource for OnUnitCube<'_, M> {
    fn local(&self, alpha: usize, u: f64) -> LocalTruth {
        let w = self.map.width(alpha);
        let x = self.map.from_unit(alpha, u);
        let (m1, m2) = self.model.derivatives(alpha, x);
        let (density, density_prime) = match self.model.marginal_density(alpha, x) {
            Some((f, fp)) => (f * w, fp * w * w),
            None => self
                .density_fallback
                .map_or((f64::NAN, f64::NAN), |fb| fb(alpha, u)),
        };
        LocalTruth {
            m_prime: m1 * w,
            m_double_prime: m2 * w * w,
            density,
            density_prime,
            cond_var: self
                .model
                .conditional_variance(alpha, x)
                .unwrap_or(f64::NAN),
        }
    }
}
