//! Kernel primitives: the quartic kernel, Nadaraya-Watson regression,
//! kernel density estimation and rule-of-thumb bandwidths.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpbkError};

/// Kernel shapes supported on `[-1, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelShape {
    /// The biweight `(15/16)(1 - u^2)^2` on `|u| <= 1`.
    #[default]
    Quartic,
}

/// A kernel together with its moment constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub shape: KernelShape,
    /// `int K(u)^2 du`.
    pub r_k: f64,
    /// `int u^2 K(u) du`.
    pub mu2_k: f64,
}

impl KernelSpec {
    pub const QUARTIC: KernelSpec = KernelSpec {
        shape: KernelShape::Quartic,
        r_k: 5.0 / 7.0,
        mu2_k: 1.0 / 7.0,
    };

    pub fn eval(&self, u: f64) -> f64 {
        match self.shape {
            KernelShape::Quartic => quartic(u),
        }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::QUARTIC
    }
}

pub fn quartic(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        let t = 1.0 - u * u;
        0.9375 * t * t
    } else {
        0.0
    }
}

/// Kernel half-width on the unit scale, `0 < h < 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h < 1.0 {
            Ok(Self(h))
        } else {
            Err(SpbkError::Parameter(format!(
                "bandwidth {h} outside (0, 1)"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `K_h(t) = K(t / h) / h`.
#[inline]
fn scaled(h: f64, t: f64) -> f64 {
    quartic(t / h) / h
}

/// Nadaraya-Watson estimate at `x0` with the quartic kernel.
pub fn nw_estimate(xs: &[f64], ys: &[f64], h: Bandwidth, x0: f64) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(SpbkError::Sizing(format!(
            "{} abscissae and {} responses",
            xs.len(),
            ys.len()
        )));
    }
    let h = h.get();
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let w = scaled(h, x - x0);
        num += w * y;
        den += w;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(SpbkError::EmptyWindow { x0, h })
    }
}

/// Kernel density estimate `n^{-1} sum K_h(x_i - x0)`.
pub fn kde(xs: &[f64], h: Bandwidth, x0: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let h = h.get();
    xs.iter().map(|&x| scaled(h, x - x0)).sum::<f64>() / xs.len() as f64
}

/// `h = C_h * sd(xs) * n^{-1/5}`, clamped into `(0, 0.5]`.
pub fn rot_bandwidth(xs: &[f64], c_h: f64) -> Result<Bandwidth> {
    if xs.len() < 2 {
        return Err(SpbkError::Sizing(
            "bandwidth rule needs at least two points".into(),
        ));
    }
    if !(c_h > 0.0) || !c_h.is_finite() {
        return Err(SpbkError::Parameter(format!(
            "bandwidth constant {c_h} must be positive"
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if xs.iter().all(|&x| x == xs[0]) || !(var > 0.0) {
        return Err(SpbkError::DegenerateAxis {
            axis: 0,
            reason: "zero sample variance".into(),
        });
    }
    Bandwidth::new((c_h * var.sqrt() * n.powf(-0.2)).min(0.5))
}

/// Sorted copy of `(x, y)` pairs for repeated windowed smoothing.
///
/// Sums run over the points inside `[x0 - h, x0 + h]` only, found by binary
/// search, so each evaluation costs `O(log n + n h)`.
#[derive(Clone, Debug)]
pub struct SortedSmoother {
    xs: Vec<f64>,
    ys: Vec<f64>,
    h: f64,
}

impl SortedSmoother {
    pub fn new(xs: &[f64], ys: &[f64], h: Bandwidth) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(SpbkError::Sizing(format!(
                "{} abscissae and {} responses",
                xs.len(),
                ys.len()
            )));
        }
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        Ok(Self {
            xs: idx.iter().map(|&i| xs[i]).collect(),
            ys: idx.iter().map(|&i| ys[i]).collect(),
            h: h.get(),
        })
    }

    fn window(&self, x0: f64) -> std::ops::Range<usize> {
        let lo = self.xs.partition_point(|&x| x < x0 - self.h);
        let hi = self.xs.partition_point(|&x| x <= x0 + self.h);
        lo..hi.max(lo)
    }

    /// Nadaraya-Watson estimate at `x0`, `None` for an empty window.
    pub fn estimate(&self, x0: f64) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for i in self.window(x0) {
            let w = scaled(self.h, self.xs[i] - x0);
            num += w * self.ys[i];
            den += w;
        }
        (den > 0.0).then(|| num / den)
    }

    pub fn density(&self, x0: f64) -> f64 {
        self.window(x0)
            .map(|i| scaled(self.h, self.xs[i] - x0))
            .sum::<f64>()
            / self.xs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss-Legendre quadrature over [-1, 1] (5 nodes per panel).
    fn integrate(f: impl Fn(f64) -> f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let panels = 64;
        let w = 2.0 / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = -1.0 + (p as f64 + 0.5) * w;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(t, wt)| wt * f(mid + t * w / 2.0))
                    .sum::<f64>()
                    * w
                    / 2.0
            })
            .sum()
    }

    #[test]
    fn quartic_values() {
        assert_eq!(quartic(0.0), 0.9375);
        assert_eq!(quartic(1.0), 0.0);
        assert_eq!(quartic(-1.0), 0.0);
        assert_eq!(quartic(1.5), 0.0);
        assert_eq!(quartic(0.3), quartic(-0.3));
    }

    #[test]
    fn quartic_moments_by_quadrature() {
        let k = KernelSpec::QUARTIC;
        assert!((integrate(quartic) - 1.0).abs() < 1e-10);
        assert!((integrate(|u| quartic(u).powi(2)) - k.r_k).abs() < 1e-10);
        assert!((integrate(|u| u * u * quartic(u)) - k.mu2_k).abs() < 1e-10);
        assert!((k.r_k - 5.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn nw_examples() {
        let h = Bandwidth::new(0.15).unwrap();
        assert_eq!(nw_estimate(&[0.3], &[7.0], h, 0.3).unwrap(), 7.0);
        let c = nw_estimate(&[0.1, 0.2, 0.25], &[3.0; 3], h, 0.2).unwrap();
        assert!((c - 3.0).abs() < 1e-15);
        // |0.1 / 0.15| < 1, so the outer points carry weight too:
        // K(2/3) = 0.9375 (5/9)^2 for both, K(0) = 0.9375 at the centre.
        let kw = 0.9375 * (5.0f64 / 9.0).powi(2);
        let oracle = (kw * 1.0 + quartic(0.0) * 2.0 + kw * 4.0) / (2.0 * kw + quartic(0.0));
        let got = nw_estimate(&[0.4, 0.5, 0.6], &[1.0, 2.0, 4.0], h, 0.5).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        // With h = 0.1 the outer points sit on the support edge and weigh nothing.
        let narrow = Bandwidth::new(0.1).unwrap();
        let got = nw_estimate(&[0.4, 0.5, 0.6], &[1.0, 2.0, 4.0], narrow, 0.5).unwrap();
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nw_empty_window() {
        let h = Bandwidth::new(0.05).unwrap();
        match nw_estimate(&[0.1, 0.2], &[1.0, 2.0], h, 0.9) {
            Err(SpbkError::EmptyWindow { x0, h }) => {
                assert_eq!(x0, 0.9);
                assert_eq!(h, 0.05);
            }
            other => panic!("expected empty window, got {other:?}"),
        }
        assert!(nw_estimate(&[0.1], &[1.0, 2.0], h, 0.1).is_err());
    }

    #[test]
    fn kde_examples() {
        let h = Bandwidth::new(0.2).unwrap();
        assert!((kde(&[0.4], h, 0.4) - 0.9375 / 0.2).abs() < 1e-14);
        assert_eq!(kde(&[0.4], h, 5.0), 0.0);
    }

    #[test]
    fn kde_uniform_interior_near_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let h = Bandwidth::new(0.05).unwrap();
        for x0 in [0.2, 0.5, 0.8] {
            assert!((kde(&xs, h, x0) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn rot_bandwidth_examples() {
        // Two-point sample with unit standard deviation, replicated to n = 1024.
        let a = 0.5 - (1023.0f64 / 1024.0).sqrt();
        let b = 0.5 + (1023.0f64 / 1024.0).sqrt();
        let xs: Vec<f64> = (0..1024).map(|i| if i % 2 == 0 { a } else { b }).collect();
        let h = rot_bandwidth(&xs, 1.0).unwrap().get();
        assert!((h - 0.25).abs() < 1e-12, "{h}");
        let small: Vec<f64> = xs.iter().map(|x| x * 0.1).collect();
        let h1 = rot_bandwidth(&small, 1.0).unwrap().get();
        let h2 = rot_bandwidth(&small, 2.0).unwrap().get();
        assert!((h2 - 2.0 * h1).abs() < 1e-15);
        assert_eq!(rot_bandwidth(&xs, 10.0).unwrap().get(), 0.5);
        assert!(matches!(
            rot_bandwidth(&[0.3; 10], 1.0),
            Err(SpbkError::DegenerateAxis { .. })
        ));
    }

    #[test]
    fn sorted_smoother_matches_direct() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 / 199.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (5.0 * x).cos()).collect();
        let h = Bandwidth::new(0.07).unwrap();
        let s = SortedSmoother::new(&xs, &ys, h).unwrap();
        for k in 0..=50 {
            let x0 = k as f64 / 50.0;
            let a = s.estimate(x0).unwrap();
            let b = nw_estimate(&xs, &ys, h, x0).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!((s.density(x0) - kde(&xs, h, x0)).abs() < 1e-12);
        }
        assert_eq!(s.estimate(3.0), None);
    }
}
