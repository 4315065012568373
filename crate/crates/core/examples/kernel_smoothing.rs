//! Quartic-kernel building blocks: moment constants, rule-of-thumb
//! bandwidth, Nadaraya-Watson regression and density estimation.
//!
//! cargo run --example kernel_smoothing

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spbk::kernel::{kde, nw_estimate, rot_bandwidth, KernelSpec, SortedSmoother};

fn main() -> spbk::Result<()> {
    let k = KernelSpec::QUARTIC;
    println!(
        "quartic kernel: K(0) = {}, int K^2 = {:.6}, int u^2 K = {:.6}",
        k.eval(0.0),
        k.r_k,
        k.mu2_k
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 400;
    let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| (2.0 * std::f64::consts::PI * x).sin() + 0.3 * (rng.gen::<f64>() - 0.5))
        .collect();

    let h = rot_bandwidth(&xs, 1.0)?;
    println!("rule-of-thumb bandwidth (C_h = 1): {:.4}", h.get());

    let fast = SortedSmoother::new(&xs, &ys, h)?;
    println!("{:>5} {:>10} {:>10} {:>10}", "x", "NW", "truth", "density");
    for k in 0..=10 {
        let x0 = k as f64 / 10.0;
        let direct = nw_estimate(&xs, &ys, h, x0)?;
        assert!((fast.estimate(x0).unwrap() - direct).abs() < 1e-9);
        println!(
            "{x0:>5.2} {direct:>10.4} {:>10.4} {:>10.4}",
            (2.0 * std::f64::consts::PI * x0).sin(),
            kde(&xs, h, x0)
        );
    }
    Ok(())
}
