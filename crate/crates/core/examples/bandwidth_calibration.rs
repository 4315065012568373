//! Sweeps the bandwidth constant C_h on the autoregressive design and
//! reports stage-two ASE, oracle ASE, median efficiency and the share of
//! replications where stage two beats the pilot.
//!
//! cargo run --release --example bandwidth_calibration -- 1.0 1.6 2.0

use spbk::simulation::{mean, run_mc, McConfig, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut values: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        values = vec![1.0, 1.6, 2.0];
    }
    for c_h in values {
        for n in [100, 200, 500, 1000] {
            let study = run_mc(&McConfig {
                n,
                c_h,
                ..McConfig::default()
            })?;
            print!("C_h {c_h:<4} n {n:>4} |");
            for alpha in 0..3 {
                let oracle: Vec<f64> = study
                    .replications
                    .iter()
                    .map(|r| r.ase_oracle[alpha])
                    .collect();
                print!(
                    " m{} {:.4} (oracle {:.4}) eff {:.2} win {:.2} |",
                    alpha + 1,
                    study.mean_ase(Stage::Spbk, alpha),
                    mean(&oracle),
                    study.median_efficiency(alpha),
                    study.improvement_rate(alpha)
                );
            }
            println!();
        }
    }
    Ok(())
}
