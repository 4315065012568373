use crate::error::{Result, SpbkError};

/// Average squared error `n^{-1} sum (est - truth)^2`.
pub fn ase(estimates: &[f64], truth: &[f64]) -> Result<f64> {
    if estimates.is_empty() || estimates.len() != truth.len() {
        return Err(SpbkError::Sizing(format!(
            "ASE of {} estimates against {} true values",
            estimates.len(),
            truth.len()
        )));
    }
    Ok(estimates
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).powi(2))
        .sum::<f64>()
        / estimates.len() as f64)
}

/// Relative efficiency `sqrt(sum (oracle - m)^2 / sum (spbk - m)^2)`.
pub fn efficiency(spbk: &[f64], oracle: &[f64], truth: &[f64]) -> Result<f64> {
    if spbk.len() != truth.len() || oracle.len() != truth.len() || truth.is_empty() {
        return Err(SpbkError::Sizing(
            "efficiency inputs differ in length".into(),
        ));
    }
    let num: f64 = oracle.iter().zip(truth).map(|(o, t)| (o - t).powi(2)).sum();
    let den: f64 = spbk.iter().zip(truth).map(|(s, t)| (s - t).powi(2)).sum();
    if !(den > 0.0) {
        return Err(SpbkError::DegenerateEfficiency);
    }
    Ok((num / den).sqrt())
}

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Median by sorting a copy; NaN for an empty slice.
pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

/// Linearly interpolated empirical quantile; NaN for an empty slice.
pub fn quantile(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    crate::sample::quantile_sorted(&s, p)
}

/// Interquartile range.
pub fn iqr(v: &[f64]) -> f64 {
    quantile(v, 0.75) - quantile(v, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ase_examples() {
        assert_eq!(ase(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let t = [0.3, -0.1, 2.0];
        let shifted: Vec<f64> = t.iter().map(|v| v + 0.25).collect();
        assert!((ase(&shifted, &t).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(ase(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 2.5);
        assert!(ase(&[], &[]).is_err());
        assert!(ase(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn efficiency_examples() {
        let truth = [0.0, 1.0, 2.0];
        let est = [0.1, 0.8, 2.3];
        assert_eq!(efficiency(&est, &est, &truth).unwrap(), 1.0);
        let oracle: Vec<f64> = est
            .iter()
            .zip(&truth)
            .map(|(e, t)| t + 2.0 * (e - t))
            .collect();
        assert!((efficiency(&est, &oracle, &truth).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            efficiency(&truth, &est, &truth),
            Err(SpbkError::DegenerateEfficiency)
        ));
    }

    #[test]
    fn order_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
        assert!(median(&[]).is_nan());
    }
}
