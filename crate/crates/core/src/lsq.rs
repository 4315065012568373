//! Dense least squares by Householder QR with column pivoting.

use crate::error::{Result, SpbkError};

/// Pivots smaller than this fraction of the leading pivot count as rank loss.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(SpbkError::Sizing("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsqSolution {
    pub coeffs: Vec<f64>,
    /// Columns judged numerically dependent; their coefficients are exactly zero.
    pub dropped_columns: Vec<usize>,
    pub residual_norm: f64,
}

impl LsqSolution {
    pub fn rank(&self) -> usize {
        self.coeffs.len() - self.dropped_columns.len()
    }
}

/// Minimizes `||response - design * coeffs||` over the numerically independent columns.
pub fn solve_least_squares(design: &Matrix, response: &[f64]) -> Result<LsqSolution> {
    let (n, p) = (design.nrows(), design.ncols());
    if n == 0 || p == 0 {
        return Err(SpbkError::Sizing(format!("design is {n} x {p}")));
    }
    if response.len() != n {
        return Err(SpbkError::Sizing(format!(
            "response has {} entries for {n} design rows",
            response.len()
        )));
    }

    // Column-major working copy: each column is contiguous for the reflections.
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|i| design.get(i, j)).collect())
        .collect();
    let mut qtb = response.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let steps = n.min(p);
    let mut rank = 0;
    let mut lead = 0.0;

    for k in 0..steps {
        // Remaining column norms are recomputed rather than downdated.
        let (best, best_norm) = (k..p)
            .map(|j| (j, a[j][k..].iter().map(|v| v * v).sum::<f64>().sqrt()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if k == 0 {
            lead = best_norm;
        }
        if best_norm == 0.0 || best_norm < RANK_TOLERANCE * lead {
            break;
        }
        a.swap(k, best);
        perm.swap(k, best);

        let col = &mut a[k];
        let alpha = if col[k] > 0.0 { -best_norm } else { best_norm };
        col[k] -= alpha;
        let vnorm2: f64 = col[k..].iter().map(|v| v * v).sum();
        let v: Vec<f64> = col[k..].to_vec();
        col[k] = alpha;
        for c in col[k + 1..].iter_mut() {
            *c = 0.0;
        }
        if vnorm2 > 0.0 {
            let reflect = |target: &mut [f64]| {
                let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
                let s = 2.0 * dot / vnorm2;
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= s * vi;
                }
            };
            for col in a[k + 1..].iter_mut() {
                reflect(&mut col[k..]);
            }
            reflect(&mut qtb[k..]);
        }
        rank = k + 1;
    }

    if rank == 0 {
        return Err(SpbkError::DegenerateDesign(
            "every design column is zero".into(),
        ));
    }

    // Back substitution on the leading rank x rank triangle.
    let mut z = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qtb[i];
        for j in i + 1..rank {
            s -= a[j][i] * z[j];
        }
        z[i] = s / a[i][i];
    }
    let mut coeffs = vec![0.0; p];
    for (k, &zk) in z.iter().enumerate() {
        coeffs[perm[k]] = zk;
    }
    let mut dropped_columns: Vec<usize> = perm[rank..].to_vec();
    dropped_columns.sort_unstable();

    let fitted = design.mul_vec(&coeffs);
    let residual_norm = response
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f).powi(2))
        .sum::<f64>()
        .sqrt();

    Ok(LsqSolution {
        coeffs,
        dropped_columns,
        residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fitted(design: &Matrix, sol: &LsqSolution) -> Vec<f64> {
        design.mul_vec(&sol.coeffs)
    }

    #[test]
    fn identity_design() {
        let design = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let sol = solve_least_squares(&design, &[1.0, 2.0, 3.0]).unwrap();
        for (c, e) in sol.coeffs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((c - e).abs() < 1e-14);
        }
        assert!(sol.residual_norm < 1e-14);
        assert!(sol.dropped_columns.is_empty());
    }

    #[test]
    fn mean_fit_residual() {
        let design = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let sol = solve_least_squares(&design, &[0.0, 2.0]).unwrap();
        assert!((sol.coeffs[0] - 1.0).abs() < 1e-14);
        assert!((sol.residual_norm - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn duplicated_column_is_dropped() {
        let base = [[1.0, 0.3], [1.0, -1.2], [1.0, 2.5], [1.0, 0.7], [1.0, 1.1]];
        let y = [0.4, -0.3, 2.2, 1.0, 0.1];
        let dedup =
            Matrix::from_rows(&base.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap();
        let dup = Matrix::from_rows(
            &base
                .iter()
                .map(|r| vec![r[0], r[1], r[1]])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let s1 = solve_least_squares(&dedup, &y).unwrap();
        let s2 = solve_least_squares(&dup, &y).unwrap();
        assert_eq!(s2.dropped_columns.len(), 1);
        assert!(s2.dropped_columns[0] >= 1);
        assert_eq!(s2.coeffs[s2.dropped_columns[0]], 0.0);
        for (a, b) in fitted(&dedup, &s1).iter().zip(fitted(&dup, &s2)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_column_is_dropped() {
        let design = Matrix::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 1.0],
        ])
        .unwrap();
        let sol = solve_least_squares(&design, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.dropped_columns, vec![1]);
        assert!((sol.coeffs[0] - 2.0).abs() < 1e-13);
        assert!(sol.coeffs[2].abs() < 1e-13);
    }

    #[test]
    fn all_zero_design_is_degenerate() {
        let design = Matrix::zeros(4, 2);
        assert!(matches!(
            solve_least_squares(&design, &[1.0; 4]),
            Err(SpbkError::DegenerateDesign(_))
        ));
        assert!(solve_least_squares(&Matrix::zeros(2, 2), &[1.0]).is_err());
    }

    #[test]
    fn residual_orthogonal_to_columns() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 / 19.0;
                vec![1.0, t, t * t, (3.0 * t).sin()]
            })
            .collect();
        let design = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..20).map(|i| ((i * 7 % 11) as f64).sqrt()).collect();
        let sol = solve_least_squares(&design, &y).unwrap();
        let f = fitted(&design, &sol);
        let r: Vec<f64> = y.iter().zip(&f).map(|(a, b)| a - b).collect();
        let g = design.tr_mul_vec(&r);
        let scale: f64 = design
            .tr_mul_vec(&y)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()));
        assert!(g.iter().all(|v| v.abs() <= 1e-6 * scale));
    }
}
