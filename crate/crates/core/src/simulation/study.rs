use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backfit::{
    oracle_responses, pseudo_responses, unit_grid, AdditiveTruth, DEFAULT_GRID_POINTS,
};
use crate::error::{Result, SpbkError};
use crate::kernel::{rot_bandwidth, SortedSmoother};
use crate::pilot::{choose_knot_count, fit_pilot};
use crate::sample::{normalize, DomainMap, RegressionSample};

use super::generators::{
    embed_example1, ex1_bound, gen_example1_with, gen_example2_with, replication_rng,
    true_components_ex1, Ex2Truth, OnUnitCube, TrueModel, EX2_BOUND,
};
use super::metrics::{ase, efficiency, iqr, mean, median};

/// Bandwidth constant of the rule of thumb on the unit scale.
pub const DEFAULT_C_H: f64 = 1.6;

/// Fraction of failed replications above which a study is abandoned.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    /// Nonlinear additive autoregression of order three.
    Ex1,
    /// Heteroscedastic additive regression with i.i.d. truncated-normal design.
    Ex2,
}

impl std::str::FromStr for Example {
    type Err = SpbkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ex1" => Ok(Example::Ex1),
            "ex2" => Ok(Example::Ex2),
            other => Err(SpbkError::Config(format!(
                "unknown example {other:?} (ex1 | ex2)"
            ))),
        }
    }
}

impl std::fmt::Display for Example {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub example: Example,
    pub n: usize,
    /// Ignored for `Ex1`, which always has three lags.
    pub d: usize,
    pub sigma0: f64,
    /// Tuning constant of the knot rule.
    pub c_tuning: f64,
    pub replications: usize,
    pub seed: u64,
    pub c_h: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            example: Example::Ex1,
            n: 500,
            d: 3,
            sigma0: 0.5,
            c_tuning: 0.5,
            replications: 100,
            seed: 2007,
            c_h: DEFAULT_C_H,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(SpbkError::Config("replications must be at least 1".into()));
        }
        if self.n < 50 {
            return Err(SpbkError::Config(format!(
                "n = {} below the minimum of 50",
                self.n
            )));
        }
        if self.example == Example::Ex2 && self.d == 0 {
            return Err(SpbkError::Config("d must be at least 1".into()));
        }
        for (name, v) in [
            ("sigma0", self.sigma0),
            ("c", self.c_tuning),
            ("Ch", self.c_h),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SpbkError::Config(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        match self.example {
            Example::Ex1 => 3,
            Example::Ex2 => self.d,
        }
    }

    /// Predictor range mapped onto the unit interval.
    pub fn bounds(&self) -> (f64, f64) {
        match self.example {
            Example::Ex1 => {
                let b = ex1_bound(self.sigma0);
                (-b, b)
            }
            Example::Ex2 => (-EX2_BOUND, EX2_BOUND),
        }
    }

    pub fn domain_map(&self) -> Result<DomainMap> {
        let (lo, hi) = self.bounds();
        DomainMap::uniform(lo, hi, self.dims())
    }

    /// Generates replication `rep` on the original predictor scale.
    pub fn generate(&self, rep: u64) -> Result<RegressionSample> {
        let mut rng = replication_rng(self.seed, rep);
        match self.example {
            Example::Ex1 => embed_example1(&gen_example1_with(self.n, self.sigma0, &mut rng)?),
            Example::Ex2 => gen_example2_with(self.n, self.d, self.sigma0, &mut rng),
        }
    }

    pub fn truth(&self) -> Box<dyn TrueModel> {
        match self.example {
            Example::Ex1 => Box::new(true_components_ex1(self.sigma0)),
            Example::Ex2 => Box::new(Ex2Truth { d: self.d }),
        }
    }
}

/// Outcome of one replication; vectors are indexed by component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub rep: usize,
    /// Rows inside the domain, used for fitting and scoring.
    pub n_used: usize,
    pub knots: usize,
    pub bandwidths: Vec<f64>,
    pub ase_stage1: Vec<f64>,
    pub ase_stage2: Vec<f64>,
    pub ase_oracle: Vec<f64>,
    pub efficiency: Vec<f64>,
    /// Largest gap between SPBK and oracle curves over interior grid points.
    pub sup_gap: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub rep: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Pilot,
    Spbk,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Pilot => "1st",
            Stage::Spbk => "2nd",
        }
    }
}

/// Per-replication records of a Monte Carlo study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McStudyResult {
    pub config: McConfig,
    pub replications: Vec<ReplicationResult>,
    pub failures: Vec<ReplicationFailure>,
}

/// Mean and median of one component/stage cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub component: usize,
    pub stage: Stage,
    pub mean_ase: f64,
    pub median_ase: f64,
}

impl McStudyResult {
    pub fn dims(&self) -> usize {
        self.config.dims()
    }

    pub fn ase(&self, stage: Stage, alpha: usize) -> Vec<f64> {
        self.replications
            .iter()
            .map(|r| match stage {
                Stage::Pilot => r.ase_stage1[alpha],
                Stage::Spbk => r.ase_stage2[alpha],
            })
            .collect()
    }

    pub fn mean_ase(&self, stage: Stage, alpha: usize) -> f64 {
        mean(&self.ase(stage, alpha))
    }

    pub fn median_ase(&self, stage: Stage, alpha: usize) -> f64 {
        median(&self.ase(stage, alpha))
    }

    pub fn efficiencies(&self, alpha: usize) -> Vec<f64> {
        self.replications
            .iter()
            .map(|r| r.efficiency[alpha])
            .collect()
    }

    pub fn median_efficiency(&self, alpha: usize) -> f64 {
        median(&self.efficiencies(alpha))
    }

    pub fn efficiency_iqr(&self, alpha: usize) -> f64 {
        iqr(&self.efficiencies(alpha))
    }

    pub fn median_sup_gap(&self, alpha: usize) -> f64 {
        median(
            &self
                .replications
                .iter()
                .map(|r| r.sup_gap[alpha])
                .collect::<Vec<_>>(),
        )
    }

    /// Fraction of replications where the second stage beats the pilot on `alpha`.
    pub fn improvement_rate(&self, alpha: usize) -> f64 {
        let wins = self
            .replications
            .iter()
            .filter(|r| r.ase_stage2[alpha] < r.ase_stage1[alpha])
            .count();
        wins as f64 / self.replications.len() as f64
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for alpha in 0..self.dims() {
            for stage in [Stage::Pilot, Stage::Spbk] {
                rows.push(SummaryRow {
                    component: alpha + 1,
                    stage,
                    mean_ase: self.mean_ase(stage, alpha),
                    median_ase: self.median_ase(stage, alpha),
                });
            }
        }
        rows
    }
}

/// Scores SPBK against the pilot and the oracle on one sample.
///
/// `sample` is on the original scale; rows outside `map` are dropped before
/// fitting and scoring.
pub fn score_replication(
    sample: &RegressionSample,
    model: &dyn TrueModel,
    map: &DomainMap,
    c_tuning: f64,
    c_h: f64,
) -> Result<ReplicationResult> {
    let normalized = normalize(sample, map)?;
    let fit_sample = normalized.fitting_sample()?;
    let d = fit_sample.d();
    let knots = choose_knot_count(fit_sample.n(), d, c_tuning)?;
    let pilot = fit_pilot(&fit_sample, knots)?;
    let truth = OnUnitCube::new(model, map);
    let grid = unit_grid(DEFAULT_GRID_POINTS);

    let mut out = ReplicationResult {
        rep: 0,
        n_used: fit_sample.n(),
        knots,
        bandwidths: Vec::with_capacity(d),
        ase_stage1: Vec::with_capacity(d),
        ase_stage2: Vec::with_capacity(d),
        ase_oracle: Vec::with_capacity(d),
        efficiency: Vec::with_capacity(d),
        sup_gap: Vec::with_capacity(d),
    };
    for alpha in 0..d {
        let column = fit_sample.column(alpha);
        let h = rot_bandwidth(&column, c_h)?;
        let truth_at: Vec<f64> = column.iter().map(|&u| truth.component(alpha, u)).collect();
        let pilot_at = column
            .iter()
            .map(|&u| pilot.component_at(alpha, u))
            .collect::<Result<Vec<_>>>()?;

        let spbk = SortedSmoother::new(&column, &pseudo_responses(&fit_sample, &pilot, alpha)?, h)?;
        let oracle =
            SortedSmoother::new(&column, &oracle_responses(&fit_sample, &truth, alpha)?, h)?;
        let at_points = |s: &SortedSmoother| -> Result<Vec<f64>> {
            column
                .iter()
                .map(|&u| {
                    s.estimate(u)
                        .ok_or(SpbkError::EmptyWindow { x0: u, h: h.get() })
                })
                .collect()
        };
        let spbk_at = at_points(&spbk)?;
        let oracle_at = at_points(&oracle)?;

        let hv = h.get();
        let sup_gap = grid
            .iter()
            .filter(|&&x| hv <= x && x <= 1.0 - hv)
            .filter_map(|&x| Some((spbk.estimate(x)? - oracle.estimate(x)?).abs()))
            .fold(0.0, f64::max);

        out.bandwidths.push(hv);
        out.ase_stage1.push(ase(&pilot_at, &truth_at)?);
        out.ase_stage2.push(ase(&spbk_at, &truth_at)?);
        out.ase_oracle.push(ase(&oracle_at, &truth_at)?);
        out.efficiency
            .push(efficiency(&spbk_at, &oracle_at, &truth_at)?);
        out.sup_gap.push(sup_gap);
    }
    Ok(out)
}

/// How replications are scheduled; results do not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Serial,
    Parallel,
}

/// Runs the study with replications spread over the rayon pool.
pub fn run_mc(config: &McConfig) -> Result<McStudyResult> {
    run_mc_with(config, Schedule::Parallel)
}

pub fn run_mc_with(config: &McConfig, schedule: Schedule) -> Result<McStudyResult> {
    config.validate()?;
    let model = config.truth();
    let map = config.domain_map()?;
    let one = |rep: usize| -> std::result::Result<ReplicationResult, ReplicationFailure> {
        config
            .generate(rep as u64)
            .and_then(|s| score_replication(&s, model.as_ref(), &map, config.c_tuning, config.c_h))
            .map(|mut r| {
                r.rep = rep;
                r
            })
            .map_err(|e| ReplicationFailure {
                rep,
                message: e.to_string(),
            })
    };
    let outcomes: Vec<_> = match schedule {
        Schedule::Serial => (0..config.replications).map(one).collect(),
        Schedule::Parallel => (0..config.replications).into_par_iter().map(one).collect(),
    };

    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => replications.push(r),
            Err(f) => failures.push(f),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * config.replications as f64
        || replications.is_empty()
    {
        return Err(SpbkError::Study {
            failed: failures.len(),
            total: config.replications,
            first: failures
                .first()
                .map(|f| f.message.clone())
                .unwrap_or_default(),
        });
    }
    Ok(McStudyResult {
        config: config.clone(),
        replications,
        failures,
    })
}
