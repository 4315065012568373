//! Stage one: the constant-spline least-squares pilot on an additive
//! sample, with its knot rule and centered components.
//!
//! cargo run --example pilot_spline

use spbk::backfit::AdditiveTruth;
use spbk::pilot::{choose_knot_count, fit_pilot};
use spbk::sample::normalize;
use spbk::simulation::{ase, McConfig, OnUnitCube};

fn main() -> spbk::Result<()> {
    let config = McConfig {
        n: 500,
        ..McConfig::default()
    };
    let map = config.domain_map()?;
    let sample = normalize(&config.generate(0)?, &map)?.fitting_sample()?;
    let model = config.truth();
    let truth = OnUnitCube::new(model.as_ref(), &map);

    for c in [0.5, 1.0] {
        let knots = choose_knot_count(sample.n(), sample.d(), c)?;
        let pilot = fit_pilot(&sample, knots)?;
        println!(
            "c = {c}: N = {knots} interior knots, {} columns, c_hat = {:.4}, dropped bins {:?}",
            1 + sample.d() * knots,
            pilot.c_hat,
            pilot.dropped_bins
        );
        let table = pilot.component_table(&sample)?;
        for (alpha, est) in table.iter().enumerate() {
            let m: Vec<f64> = sample
                .rows()
                .map(|r| truth.component(alpha, r[alpha]))
                .collect();
            let mean = est.iter().sum::<f64>() / est.len() as f64;
            println!(
                "  component {}: ASE {:.4}, sample mean {:+.1e}",
                alpha + 1,
                ase(est, &m)?,
                mean
            );
        }
    }
    Ok(())
}
