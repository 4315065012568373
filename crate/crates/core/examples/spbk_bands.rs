//! Stage two: spline-backfitted kernel estimates of every component with
//! pointwise 95% confidence bands, next to the oracle smoother.
//!
//! cargo run --example spbk_bands

use spbk::backfit::{
    confidence_band, full_fit, oracle_component, unit_grid, AdditiveTruth, BiasMode, ResidualScale,
};
use spbk::kernel::rot_bandwidth;
use spbk::pilot::{choose_knot_count, fit_pilot};
use spbk::sample::normalize;
use spbk::simulation::{McConfig, OnUnitCube, DEFAULT_C_H};

fn main() -> spbk::Result<()> {
    let config = McConfig {
        n: 500,
        ..McConfig::default()
    };
    let map = config.domain_map()?;
    let sample = normalize(&config.generate(3)?, &map)?.fitting_sample()?;
    let model = config.truth();
    let truth = OnUnitCube::new(model.as_ref(), &map);

    let pilot = fit_pilot(&sample, choose_knot_count(sample.n(), 3, 0.5)?)?;
    let hs = (0..3)
        .map(|a| rot_bandwidth(&sample.column(a), DEFAULT_C_H))
        .collect::<spbk::Result<Vec<_>>>()?;
    let grid = unit_grid(21);
    let fit = full_fit(&sample, &pilot, &hs, &vec![grid.clone(); 3])?;
    let residuals = fit.residuals(&sample)?;

    for comp in &fit.components {
        let alpha = comp.alpha;
        let oracle = oracle_component(&sample, &truth, alpha, hs[alpha], &grid)?;
        let (banded, _) = confidence_band(
            comp,
            &sample,
            ResidualScale::Residuals(&residuals),
            0.95,
            BiasMode::None,
        )?;
        println!("component {} (h = {:.3})", alpha + 1, hs[alpha].get());
        println!(
            "{:>7} {:>8} {:>8} {:>8} {:>18}",
            "x", "truth", "SPBK", "oracle", "95% band"
        );
        for (k, &u) in grid.iter().enumerate() {
            let band = match (&banded.band_lo, &banded.band_hi) {
                (Some(lo), Some(hi)) => match (lo[k], hi[k]) {
                    (Some(l), Some(h)) => format!("[{l:+.3}, {h:+.3}]"),
                    _ => "-".into(),
                },
                _ => "-".into(),
            };
            println!(
                "{:>7.3} {:>8.3} {:>8.3} {:>8.3} {:>18}",
                map.from_unit(alpha, u),
                truth.component(alpha, u),
                banded.values[k].unwrap_or(f64::NAN),
                oracle.values[k].unwrap_or(f64::NAN),
                band
            );
        }
    }
    Ok(())
}
