//! Monte Carlo study of the autoregressive design, printed in the layout of
//! an ASE table: pilot (1st stage) and SPBK (2nd stage) per component.
//!
//! cargo run --release --example table1_study -- [reps] [C_h]

use spbk::simulation::{run_mc, McConfig, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reps = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let c_h = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(spbk::simulation::DEFAULT_C_H);

    println!(
        "sigma0     n    c   comp1 1st  comp1 2nd  comp2 1st  comp2 2nd  comp3 1st  comp3 2nd"
    );
    for sigma0 in [0.5, 1.0] {
        for n in [100, 200, 500, 1000] {
            for c in [0.5, 1.0] {
                let cfg = McConfig {
                    n,
                    sigma0,
                    c_tuning: c,
                    replications: reps,
                    c_h,
                    ..McConfig::default()
                };
                let study = run_mc(&cfg)?;
                print!("{sigma0:>6} {n:>5} {c:>4}");
                for alpha in 0..3 {
                    for stage in [Stage::Pilot, Stage::Spbk] {
                        print!(" {:>10.4}", study.mean_ase(stage, alpha));
                    }
                }
                println!();
            }
        }
    }
    Ok(())
}
