//! Column-pivoted QR least squares on a rank-deficient design.
//!
//! cargo run --example least_squares

use spbk::lsq::{solve_least_squares, Matrix};

fn main() -> spbk::Result<()> {
    // Third column repeats the second, fourth is empty.
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            let x = i as f64;
            vec![1.0, x, x, 0.0]
        })
        .collect();
    let design = Matrix::from_rows(&rows)?;
    let y: Vec<f64> = (0..6)
        .map(|i| 2.0 + 0.5 * i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 })
        .collect();

    let sol = solve_least_squares(&design, &y)?;
    println!("rank {} of {} columns", sol.rank(), design.ncols());
    println!("dropped columns: {:?}", sol.dropped_columns);
    println!("coefficients: {:.6?}", sol.coeffs);
    println!("residual norm: {:.6}", sol.residual_norm);

    let fitted = design.mul_vec(&sol.coeffs);
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let xtr = design.tr_mul_vec(&resid);
    println!(
        "max |X'r| = {:.2e}",
        xtr.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    );
    Ok(())
}
