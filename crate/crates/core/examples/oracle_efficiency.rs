//! Empirical efficiency of SPBK relative to the oracle smoother on the
//! 30-dimensional heteroscedastic design, with a text rendering of the
//! efficiency densities.
//!
//! cargo run --release --example oracle_efficiency -- [n] [reps]

use spbk::report::efficiency_density;
use spbk::simulation::{run_mc, Example, McConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    let reps = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);

    let config = McConfig {
        example: Example::Ex2,
        d: 30,
        n,
        sigma0: 1.0,
        replications: reps,
        ..McConfig::default()
    };
    let study = run_mc(&config)?;
    println!(
        "d = 30, n = {n}, {} replications, N = {}",
        study.replications.len(),
        study.replications[0].knots
    );
    for alpha in 0..2 {
        let effs = study.efficiencies(alpha);
        println!(
            "component {}: median efficiency {:.3}, IQR {:.3}",
            alpha + 1,
            study.median_efficiency(alpha),
            study.efficiency_iqr(alpha)
        );
        let curve = efficiency_density(&effs, 41);
        let peak = curve.iter().map(|p| p.1).fold(0.0, f64::max);
        for (x, f) in curve.iter().step_by(2) {
            println!(
                "  {x:6.3} {}",
                "#".repeat((50.0 * f / peak).round() as usize)
            );
        }
    }
    Ok(())
}
