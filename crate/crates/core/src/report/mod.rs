//! File-level commands: fitting a CSV, simulating samples, running studies,
//! and recomputing efficiencies from stored curves.

mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backfit::{
    confidence_band, full_fit, pseudo_responses, unit_grid, AdditiveFit, BiasMode, ResidualScale,
    DEFAULT_GRID_POINTS,
};
use crate::error::{Result, SpbkError};
use crate::kernel::{kde, quartic, rot_bandwidth, Bandwidth, SortedSmoother};
use crate::pilot::{choose_knot_count, fit_pilot, PilotFit};
use crate::sample::{
    fit_domain_map, lag_embed, normalize, DomainMap, LagSpec, RangeMode, RegressionSample,
};
use crate::simulation::{
    efficiency, mean, run_mc, Example, McConfig, McStudyResult, OnUnitCube, Stage, TrueModel,
    DEFAULT_C_H,
};

pub use table::{
    fmt_f64, fmt_opt, parse_numeric_csv, read_numeric_csv, write_file, write_json, CsvOut,
    NumericTable,
};

pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_SERIES_LAGS: usize = 3;

/// Settings shared by all commands. Every field is optional so that a
/// config file and command-line flags can be layered.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub example: Option<Example>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub sigma0: Option<f64>,
    pub c: Option<f64>,
    #[serde(alias = "Ch")]
    pub c_h: Option<f64>,
    pub level: Option<f64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub range: Option<String>,
    pub bias_mode: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasChoice {
    None,
    Analytic,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SpbkError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SpbkError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| SpbkError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set here win; unset fields fall back to `base`.
    pub fn layered_over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            input: self.input.or(base.input),
            output_dir: self.output_dir.or(base.output_dir),
            example: self.example.or(base.example),
            n: self.n.or(base.n),
            d: self.d.or(base.d),
            sigma0: self.sigma0.or(base.sigma0),
            c: self.c.or(base.c),
            c_h: self.c_h.or(base.c_h),
            level: self.level.or(base.level),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            grid: self.grid.or(base.grid),
            range: self.range.or(base.range),
            bias_mode: self.bias_mode.or(base.bias_mode),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn positive(name: &str, v: Option<f64>, default: f64) -> Result<f64> {
        let v = v.unwrap_or(default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(SpbkError::Config(format!("{name} = {v} must be positive")))
        }
    }

    pub fn c_tuning(&self) -> Result<f64> {
        Self::positive("c", self.c, McConfig::default().c_tuning)
    }

    pub fn c_h(&self) -> Result<f64> {
        Self::positive("Ch", self.c_h, DEFAULT_C_H)
    }

    pub fn level(&self) -> Result<f64> {
        let level = self.level.unwrap_or(DEFAULT_LEVEL);
        if level > 0.0 && level < 1.0 {
            Ok(level)
        } else {
            Err(SpbkError::Config(format!(
                "level = {level} must lie in (0, 1)"
            )))
        }
    }

    pub fn grid_points(&self) -> Result<usize> {
        match self.grid.unwrap_or(DEFAULT_GRID_POINTS) {
            g if g >= 2 => Ok(g),
            g => Err(SpbkError::Config(format!(
                "grid = {g} needs at least 2 points"
            ))),
        }
    }

    pub fn bias_choice(&self) -> Result<BiasChoice> {
        match self.bias_mode.as_deref().unwrap_or("none") {
            "none" => Ok(BiasChoice::None),
            "analytic" => Ok(BiasChoice::Analytic),
            other => Err(SpbkError::Config(format!(
                "unknown bias mode {other:?} (none | analytic)"
            ))),
        }
    }

    /// `observed`, `qNN` (central NN% quantile range), `lo,hi` for every
    /// axis, or `lo,hi;lo,hi;...` with one pair per axis.
    pub fn range_mode(&self, d: usize) -> Result<RangeMode> {
        parse_range(self.range.as_deref().unwrap_or("observed"), d)
    }

    /// Study settings with defaults filled in.
    pub fn mc_config(&self) -> Result<McConfig> {
        let base = McConfig::default();
        let config = McConfig {
            example: self.example.unwrap_or(base.example),
            n: self.n.unwrap_or(base.n),
            d: self.d.unwrap_or(base.d),
            sigma0: Self::positive("sigma0", self.sigma0, base.sigma0)?,
            c_tuning: self.c_tuning()?,
            replications: self.reps.unwrap_or(base.replications),
            seed: self.seed.unwrap_or(base.seed),
            c_h: self.c_h()?,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_range(text: &str, d: usize) -> Result<RangeMode> {
    let text = text.trim();
    if text == "observed" {
        return Ok(RangeMode::Observed);
    }
    if let Some(pct) = text.strip_prefix('q') {
        let p: f64 = pct
            .parse()
            .map_err(|_| SpbkError::Config(format!("bad quantile range {text:?}")))?;
        return Ok(RangeMode::CentralQuantile(p / 100.0));
    }
    let pairs = text
        .split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [lo, hi] => match (lo.parse::<f64>(), hi.parse::<f64>()) {
                    (Ok(lo), Ok(hi)) => Ok((lo, hi)),
                    _ => Err(SpbkError::Config(format!("bad range pair {pair:?}"))),
                },
                _ => Err(SpbkError::Config(format!("bad range pair {pair:?}"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    match pairs.len() {
        1 => Ok(RangeMode::Explicit(vec![pairs[0]; d])),
        k if k == d => Ok(RangeMode::Explicit(pairs)),
        k => Err(SpbkError::Config(format!("{k} range pairs for {d} axes"))),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SpbkError::io(dir, e))
}

/// Reads a regression table (response first) or a univariate series.
///
/// A single-column file is lag-embedded with lags `1..=lags`.
pub fn load_sample(path: &Path, lags: usize) -> Result<RegressionSample> {
    let table = read_numeric_csv(path)?;
    table.require_complete(path)?;
    if table.ncols() == 1 {
        let series = table.column(0);
        return lag_embed(&series, &LagSpec::new((1..=lags).collect(), 0)?);
    }
    let y = table.column(0);
    let rows: Vec<Vec<f64>> = table.rows.iter().map(|r| r[1..].to_vec()).collect();
    RegressionSample::from_rows(y, &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandNote {
    pub component: usize,
    pub x: f64,
    pub reason: String,
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSummary {
    pub rows: usize,
    pub rows_used: usize,
    pub rows_out_of_range: usize,
    pub d: usize,
    pub c_hat: f64,
    pub knots: usize,
    /// Bandwidths on the unit scale.
    pub bandwidths: Vec<f64>,
    /// Bandwidths on the original predictor scale.
    pub bandwidths_original: Vec<f64>,
    /// `[component, bin]`, both 1-based.
    pub dropped_bins: Vec<[usize; 2]>,
    pub dropped_intercept: bool,
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
    pub level: f64,
    pub bias_mode: BiasChoice,
    pub band_notes: Vec<BandNote>,
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub pilot: PilotFit,
    /// Components on the unit scale, with bands attached.
    pub fit: AdditiveFit,
    pub map: DomainMap,
    pub summary: FitSummary,
    pub files: Vec<PathBuf>,
}

/// `Y_i - c_hat - sum_alpha m*_alpha(X_{i alpha})`, smoothing at the design points.
fn spbk_residuals(
    sample: &RegressionSample,
    pilot: &PilotFit,
    hs: &[Bandwidth],
) -> Result<Vec<f64>> {
    let mut res: Vec<f64> = sample.y().iter().map(|y| y - pilot.c_hat).collect();
    for (alpha, &h) in hs.iter().enumerate() {
        let column = sample.column(alpha);
        let smoother = SortedSmoother::new(&column, &pseudo_responses(sample, pilot, alpha)?, h)?;
        for (r, &u) in res.iter_mut().zip(&column) {
            *r -= smoother
                .estimate(u)
                .ok_or(SpbkError::EmptyWindow { x0: u, h: h.get() })?;
        }
    }
    Ok(res)
}

/// Kernel density of a unit-scale column and its central difference.
fn density_with_slope(column: &[f64], h: Bandwidth, u: f64) -> (f64, f64) {
    let step = 1e-4;
    let slope = (kde(column, h, u + step) - kde(column, h, u - step)) / (2.0 * step);
    (kde(column, h, u), slope)
}

/// Fits the additive model to `--input` and writes curves, bands and summaries.
pub fn cmd_fit(config: &RunConfig) -> Result<FitReport> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| SpbkError::Config("fit needs --input".into()))?;
    let sample = load_sample(input, config.d.unwrap_or(DEFAULT_SERIES_LAGS))?;
    let d = sample.d();
    let level = config.level()?;
    let grid_points = config.grid_points()?;
    let bias_choice = config.bias_choice()?;
    let c_h = config.c_h()?;

    let map = fit_domain_map(&sample, &config.range_mode(d)?)?;
    let normalized = normalize(&sample, &map)?;
    let fit_sample = normalized.fitting_sample()?;
    let knots = choose_knot_count(fit_sample.n(), d, config.c_tuning()?)?;
    let pilot = fit_pilot(&fit_sample, knots)?;
    let columns: Vec<Vec<f64>> = (0..d).map(|a| fit_sample.column(a)).collect();
    let hs = columns
        .iter()
        .enumerate()
        .map(|(alpha, col)| {
            rot_bandwidth(col, c_h).map_err(|e| match e {
                SpbkError::DegenerateAxis { reason, .. } => SpbkError::DegenerateAxis {
                    axis: alpha,
                    reason,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = unit_grid(grid_points);
    let mut fit = full_fit(&fit_sample, &pilot, &hs, &vec![grid; d])?;
    let residuals = spbk_residuals(&fit_sample, &pilot, &hs)?;

    let model: Option<Box<dyn TrueModel>> = match bias_choice {
        BiasChoice::None => None,
        BiasChoice::Analytic => {
            let example = config.example.ok_or_else(|| {
                SpbkError::Config(
                    "--bias-mode analytic needs --example for the true derivatives".into(),
                )
            })?;
            let truth = McConfig {
                example,
                d,
                sigma0: RunConfig::positive("sigma0", config.sigma0, McConfig::default().sigma0)?,
                ..McConfig::default()
            }
            .truth();
            if truth.d() != d {
                return Err(SpbkError::Config(format!(
                    "example {example} has {} predictors, input has {d}",
                    truth.d()
                )));
            }
            Some(truth)
        }
    };
    let fallback = |alpha: usize, u: f64| density_with_slope(&columns[alpha], hs[alpha], u);
    let mut truth_view = model.as_deref().map(|m| OnUnitCube::new(m, &map));
    if let Some(view) = truth_view.as_mut() {
        view.density_fallback = Some(&fallback);
    }
    let bias = match &truth_view {
        Some(view) => BiasMode::Analytic(view),
        None => BiasMode::None,
    };

    let mut band_notes = Vec::new();
    for comp in fit.components.iter_mut() {
        let (banded, notes) = confidence_band(
            comp,
            &fit_sample,
            ResidualScale::Residuals(&residuals),
            level,
            bias,
        )?;
        band_notes.extend(notes.into_iter().map(|n| BandNote {
            component: comp.alpha + 1,
            x: map.from_unit(comp.alpha, n.x),
            reason: n.reason,
        }));
        *comp = banded;
    }

    let summary = FitSummary {
        rows: sample.n(),
        rows_used: fit_sample.n(),
        rows_out_of_range: normalized.out_of_range_count(),
        d,
        c_hat: pilot.c_hat,
        knots,
        bandwidths: hs.iter().map(|h| h.get()).collect(),
        bandwidths_original: hs
            .iter()
            .enumerate()
            .map(|(a, h)| h.get() * map.width(a))
            .collect(),
        dropped_bins: pilot
            .dropped_bins
            .iter()
            .map(|&(a, j)| [a + 1, j])
            .collect(),
        dropped_intercept: pilot.dropped_intercept,
        domain_lo: map.lo().to_vec(),
        domain_hi: map.hi().to_vec(),
        level,
        bias_mode: bias_choice,
        band_notes,
    };

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let mut files = Vec::new();
    let path = dir.join("pilot.json");
    write_json(&path, &pilot)?;
    files.push(path);
    for comp in &fit.components {
        let mut out = CsvOut::new(&["x", "value", "band_lo", "band_hi", "interior"]);
        for (k, &u) in comp.grid.iter().enumerate() {
            let band = |b: &Option<Vec<Option<f64>>>| b.as_ref().and_then(|v| v[k]);
            out.row([
                fmt_f64(map.from_unit(comp.alpha, u)),
                fmt_opt(comp.values[k]),
                fmt_opt(band(&comp.band_lo)),
                fmt_opt(band(&comp.band_hi)),
                u8::from(comp.interior[k]).to_string(),
            ]);
        }
        let path = dir.join(format!("spbk_m{}.csv", comp.alpha + 1));
        out.save(&path)?;
        files.push(path);
    }
    let path = dir.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);

    Ok(FitReport {
        pilot,
        fit,
        map,
        summary,
        files,
    })
}

/// Writes `sample.csv` (y, x1..xd) and `truth.csv` (c, m1..md at each row).
///
/// The sample is replication 0 of the study with the same seed.
pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let mc = config.mc_config()?;
    let sample = mc.generate(0)?;
    let model = mc.truth();
    let d = sample.d();

    let xs: Vec<String> = (1..=d).map(|a| format!("x{a}")).collect();
    let ms: Vec<String> = (1..=d).map(|a| format!("m{a}")).collect();
    let mut sample_out = CsvOut::new(
        &std::iter::once("y")
            .chain(xs.iter().map(String::as_str))
            .collect::<Vec<_>>(),
    );
    let mut truth_out = CsvOut::new(
        &std::iter::once("c")
            .chain(ms.iter().map(String::as_str))
            .collect::<Vec<_>>(),
    );
    for (row, &y) in sample.rows().zip(sample.y()) {
        sample_out.row(std::iter::once(y).chain(row.iter().copied()).map(fmt_f64));
        truth_out.row(
            std::iter::once(model.constant())
                .chain(row.iter().enumerate().map(|(a, &x)| model.component(a, x)))
                .map(fmt_f64),
        );
    }

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let sample_path = dir.join("sample.csv");
    let truth_path = dir.join("truth.csv");
    sample_out.save(&sample_path)?;
    truth_out.save(&truth_path)?;
    Ok(vec![sample_path, truth_path])
}

/// Quartic-kernel density of `values` on an even grid covering its support.
///
/// Returns `(x, density)` pairs; the bandwidth is the normal-reference
/// value for the quartic kernel.
pub fn efficiency_density(values: &[f64], points: usize) -> Vec<(f64, f64)> {
    if values.is_empty() || points < 2 {
        return Vec::new();
    }
    let m = values.len() as f64;
    let mu = mean(values);
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut h = 2.78 * sd * m.powf(-0.2);
    if !(h > 0.0) {
        h = 0.01 * mu.abs().max(1.0);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - h;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + h;
    (0..points)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let f = values.iter().map(|v| quartic((x - v) / h)).sum::<f64>() / (m * h);
            (x, f)
        })
        .collect()
}

pub const DENSITY_GRID_POINTS: usize = 401;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub component: usize,
    pub mean_ase_1st: f64,
    pub mean_ase_2nd: f64,
    pub mean_ase_oracle: f64,
    pub median_efficiency: f64,
    pub efficiency_iqr: f64,
    pub improvement_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
struct McSummaryFile<'a> {
    config: &'a McConfig,
    replications: usize,
    failures: &'a [crate::simulation::ReplicationFailure],
    components: &'a [ComponentSummary],
}

#[derive(Clone, Debug)]
pub struct McReport {
    pub study: McStudyResult,
    pub components: Vec<ComponentSummary>,
    pub files: Vec<PathBuf>,
}

/// Runs a Monte Carlo study and writes the ASE table, per-replication
/// efficiencies, their densities and a JSON summary.
pub fn cmd_mc(config: &RunConfig) -> Result<McReport> {
    let mc = config.mc_config()?;
    let study = run_mc(&mc)?;
    let d = study.dims();

    let mut ase_out = CsvOut::new(&[
        "sigma0",
        "n",
        "c",
        "component",
        "stage",
        "ase",
        "median_ase",
    ]);
    for row in study.summary() {
        ase_out.row([
            fmt_f64(mc.sigma0),
            mc.n.to_string(),
            fmt_f64(mc.c_tuning),
            row.component.to_string(),
            row.stage.label().to_string(),
            fmt_f64(row.mean_ase),
            fmt_f64(row.median_ase),
        ]);
    }

    let mut eff_out = CsvOut::new(&[
        "rep",
        "component",
        "efficiency",
        "ase_stage1",
        "ase_stage2",
        "ase_oracle",
    ]);
    for r in &study.replications {
        for alpha in 0..d {
            eff_out.row([
                r.rep.to_string(),
                (alpha + 1).to_string(),
                fmt_f64(r.efficiency[alpha]),
                fmt_f64(r.ase_stage1[alpha]),
                fmt_f64(r.ase_stage2[alpha]),
                fmt_f64(r.ase_oracle[alpha]),
            ]);
        }
    }

    let mut density_out = CsvOut::new(&["component", "x", "density"]);
    for alpha in 0..d {
        for (x, f) in efficiency_density(&study.efficiencies(alpha), DENSITY_GRID_POINTS) {
            density_out.row([(alpha + 1).to_string(), fmt_f64(x), fmt_f64(f)]);
        }
    }

    let components: Vec<ComponentSummary> = (0..d)
        .map(|alpha| {
            let oracle: Vec<f64> = study
                .replications
                .iter()
                .map(|r| r.ase_oracle[alpha])
                .collect();
            ComponentSummary {
                component: alpha + 1,
                mean_ase_1st: study.mean_ase(Stage::Pilot, alpha),
                mean_ase_2nd: study.mean_ase(Stage::Spbk, alpha),
                mean_ase_oracle: mean(&oracle),
                median_efficiency: study.median_efficiency(alpha),
                efficiency_iqr: study.efficiency_iqr(alpha),
                improvement_rate: study.improvement_rate(alpha),
            }
        })
        .collect();

    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let mut files = Vec::new();
    for (name, out) in [
        ("ase_table.csv", ase_out),
        ("efficiency.csv", eff_out),
        ("efficiency_density.csv", density_out),
    ] {
        let path = dir.join(name);
        out.save(&path)?;
        files.push(path);
    }
    let path = dir.join("mc_summary.json");
    write_json(
        &path,
        &McSummaryFile {
            config: &mc,
            replications: study.replications.len(),
            failures: &study.failures,
            components: &components,
        },
    )?;
    files.push(path);

    Ok(McReport {
        study,
        components,
        files,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyReport {
    /// `(component, efficiency)` in ascending component order.
    pub efficiencies: Vec<(i64, f64)>,
    pub files: Vec<PathBuf>,
}

/// Recomputes relative efficiencies from stored curves.
///
/// The input has columns `component, spbk, oracle, truth`, either named in
/// a header or in that order.
pub fn cmd_efficiency(config: &RunConfig) -> Result<EfficiencyReport> {
    let input = config
        .input
        .as_deref()
        .ok_or_else(|| SpbkError::Config("efficiency needs --input".into()))?;
    let table = read_numeric_csv(input)?;
    table.require_complete(input)?;
    let names = ["component", "spbk", "oracle", "truth"];
    let idx: Vec<usize> = match &table.header {
        Some(_) => names
            .iter()
            .map(|name| {
                table.column_index(name).ok_or_else(|| SpbkError::Parse {
                    path: input.to_path_buf(),
                    line: 1,
                    message: format!("missing column {name:?}"),
                })
            })
            .collect::<Result<_>>()?,
        None if table.ncols() == 4 => vec![0, 1, 2, 3],
        None => {
            return Err(SpbkError::Parse {
                path: input.to_path_buf(),
                line: table.lines[0],
                message: format!("expected 4 columns, found {}", table.ncols()),
            })
        }
    };

    let mut groups: BTreeMap<i64, [Vec<f64>; 3]> = BTreeMap::new();
    for (row, &line) in table.rows.iter().zip(&table.lines) {
        let comp = row[idx[0]];
        if comp.fract() != 0.0 {
            return Err(SpbkError::Parse {
                path: input.to_path_buf(),
                line,
                message: format!("component {comp} is not an integer"),
            });
        }
        let g = groups.entry(comp as i64).or_default();
        for k in 0..3 {
            g[k].push(row[idx[k + 1]]);
        }
    }
    let efficiencies = groups
        .iter()
        .map(|(&comp, [spbk, oracle, truth])| Ok((comp, efficiency(spbk, oracle, truth)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut out = CsvOut::new(&["component", "efficiency"]);
    for &(comp, eff) in &efficiencies {
        out.row([comp.to_string(), fmt_f64(eff)]);
    }
    let dir = config.output_dir();
    ensure_dir(&dir)?;
    let path = dir.join("efficiency.csv");
    out.save(&path)?;
    Ok(EfficiencyReport {
        efficiencies,
        files: vec![path],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("observed", 2).unwrap(), RangeMode::Observed);
        assert_eq!(
            parse_range("q95", 2).unwrap(),
            RangeMode::CentralQuantile(0.95)
        );
        assert_eq!(
            parse_range("-1,1", 2).unwrap(),
            RangeMode::Explicit(vec![(-1.0, 1.0); 2])
        );
        assert_eq!(
            parse_range("0,1; -2,2", 2).unwrap(),
            RangeMode::Explicit(vec![(0.0, 1.0), (-2.0, 2.0)])
        );
        assert!(parse_range("0,1;0,1;0,1", 2).is_err());
        assert!(parse_range("wide", 1).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig::from_toml("n = 200\nseed = 5\nCh = 1.2\nrange = \"q95\"\n").unwrap();
        let flags = RunConfig {
            n: Some(300),
            ..RunConfig::default()
        };
        let merged = flags.layered_over(file);
        assert_eq!(merged.n, Some(300));
        assert_eq!(merged.seed, Some(5));
        assert_eq!(merged.c_h().unwrap(), 1.2);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert_eq!(RunConfig::from_toml("n = -1").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn config_defaults_and_checks() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.mc_config().unwrap(), McConfig::default());
        assert_eq!(cfg.level().unwrap(), DEFAULT_LEVEL);
        assert_eq!(cfg.bias_choice().unwrap(), BiasChoice::None);
        let bad = RunConfig {
            level: Some(1.0),
            bias_mode: Some("both".into()),
            grid: Some(1),
            ..RunConfig::default()
        };
        assert!(bad.level().is_err());
        assert!(bad.bias_choice().is_err());
        assert!(bad.grid_points().is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let values: Vec<f64> = (0..50)
            .map(|k| 0.8 + 0.01 * ((k * 37) % 23) as f64)
            .collect();
        let curve = efficiency_density(&values, DENSITY_GRID_POINTS);
        let area: f64 = curve
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum();
        assert!((area - 1.0).abs() < 1e-3, "{area}");
        let flat = efficiency_density(&[1.0; 5], 101);
        let area: f64 = flat
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum();
        assert!((area - 1.0).abs() < 1e-2, "{area}");
    }
}
