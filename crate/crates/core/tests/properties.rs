use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::subsequence;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spbk::backfit::{oracle_component, spbk_component, AdditiveTruth};
use spbk::basis::{bin_index, centered_basis_row, indicator_row, BasisSpec, CenteredNorms};
use spbk::kernel::{kde, nw_estimate, rot_bandwidth, Bandwidth};
use spbk::lsq::{solve_least_squares, Matrix};
use spbk::pilot::{fit_pilot, PilotFit};
use spbk::sample::{denormalize, lag_embed, normalize, DomainMap, LagSpec, RegressionSample};

/// Random design on the unit cube with every bin of every axis occupied.
fn occupied_sample(seed: u64, d: usize, knots: usize, extra: usize) -> RegressionSample {
    let bins = knots + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * bins + extra;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..d)
                .map(|_| {
                    let bin = if i < 2 * bins {
                        i % bins
                    } else {
                        rng.gen_range(0..bins)
                    };
                    (bin as f64 + rng.gen_range(0.01..0.99)) / bins as f64
                })
                .collect()
        })
        .collect();
    let y = rows
        .iter()
        .map(|r| r.iter().map(|x| (5.0 * x).sin()).sum::<f64>() + rng.gen_range(-0.5..0.5))
        .collect();
    RegressionSample::from_rows(y, &rows).unwrap()
}

fn fitted(pilot: &PilotFit, sample: &RegressionSample) -> Vec<f64> {
    sample
        .rows()
        .map(|r| pilot.fitted_value(r).unwrap())
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

fn brute_force_nw(xs: &[f64], ys: &[f64], h: f64, x0: f64) -> Option<f64> {
    let k = |x: f64| {
        let u = (x - x0) / h;
        if u.abs() <= 1.0 {
            0.9375 * (1.0 - u * u).powi(2)
        } else {
            0.0
        }
    };
    let mut num = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += k(*x) * y;
    }
    let mut den = 0.0;
    for x in xs {
        den += k(*x);
    }
    (den > 0.0).then(|| num / den)
}

struct PilotTruth<'a>(&'a PilotFit);

impl AdditiveTruth for PilotTruth<'_> {
    fn constant(&self) -> f64 {
        self.0.c_hat
    }

    fn component(&self, alpha: usize, u: f64) -> f64 {
        self.0.component_at(alpha, u).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_then_denormalize_round_trips(
        rows in vec(vec(-50.0..50.0f64, 3), 2..40),
        lo in -60.0..-50.0f64,
        width in 110.0..200.0f64,
    ) {
        let y = vec![0.0; rows.len()];
        let sample = RegressionSample::from_rows(y, &rows).unwrap();
        let map = DomainMap::uniform(lo, lo + width, 3).unwrap();
        let unit = normalize(&sample, &map).unwrap();
        prop_assert_eq!(unit.out_of_range_count(), 0);
        let back = denormalize(&unit.sample, &map).unwrap();
        for (a, b) in sample.rows().zip(back.rows()) {
            for (x, z) in a.iter().zip(b) {
                prop_assert!((x - z).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn lag_embedding_matches_direct_indexing(
        series in vec(-5.0..5.0f64, 1..60),
        lags in subsequence(vec![1usize, 2, 3, 4, 5], 1..4),
        burn in 0usize..4,
    ) {
        let spec = LagSpec::new(lags.clone(), burn).unwrap();
        let start = burn + lags.iter().max().unwrap();
        match lag_embed(&series, &spec) {
            Err(_) => prop_assert!(series.len() <= start),
            Ok(sample) => {
                prop_assert_eq!(sample.n(), series.len() - start);
                for (i, t) in (start..series.len()).enumerate() {
                    prop_assert_eq!(sample.y()[i], series[t]);
                    for (k, &lag) in lags.iter().enumerate() {
                        prop_assert_eq!(sample.x(i, k), series[t - lag]);
                    }
                }
            }
        }
    }

    #[test]
    fn bins_are_monotone_and_partition_unity(a in 0.0..=1.0f64, b in 0.0..=1.0f64, knots in 1usize..40) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (jl, jh) = (bin_index(lo, knots).unwrap(), bin_index(hi, knots).unwrap());
        prop_assert!(jl <= jh);
        let h = 1.0 / (knots + 1) as f64;
        prop_assert!(jl as f64 * h <= lo + 1e-12);
        prop_assert!(lo < (jl + 1) as f64 * h + 1e-12 || lo == 1.0);

        let spec = BasisSpec::new(knots, 1).unwrap();
        let row = indicator_row(&[lo], &spec).unwrap();
        let listed: f64 = row[1..].iter().sum();
        let reference = if jl == 0 { 1.0 } else { 0.0 };
        prop_assert_eq!(listed + reference, 1.0);
        prop_assert_eq!(row[0], 1.0);
    }

    #[test]
    fn centered_basis_spans_the_indicator_space(
        seed in any::<u64>(),
        d in 1usize..4,
        knots in 1usize..6,
        extra in 0usize..30,
    ) {
        let sample = occupied_sample(seed, d, knots, extra);
        prop_assume!(sample.n() >= 2 * (1 + d * knots));
        let pilot = fit_pilot(&sample, knots).unwrap();
        let spec = BasisSpec::new(knots, d).unwrap();
        let norms: Vec<CenteredNorms> = (0..d)
            .map(|a| CenteredNorms::empirical(&sample.column(a), knots).unwrap())
            .collect();
        let rows: Vec<Vec<f64>> = sample
            .rows()
            .map(|r| centered_basis_row(r, &spec, &norms).unwrap())
            .collect();
        let design = Matrix::from_rows(&rows).unwrap();
        let sol = solve_least_squares(&design, sample.y()).unwrap();
        prop_assert!(close(&design.mul_vec(&sol.coeffs), &fitted(&pilot, &sample), 1e-8));
    }

    #[test]
    fn pilot_projection_is_idempotent_and_centered(seed in any::<u64>(), knots in 1usize..6) {
        let sample = occupied_sample(seed, 2, knots, 40);
        let pilot = fit_pilot(&sample, knots).unwrap();
        let first = fitted(&pilot, &sample);
        let again = fit_pilot(&sample.with_response(first.clone()).unwrap(), knots).unwrap();
        prop_assert!(close(&fitted(&again, &sample), &first, 1e-9));
        for comp in pilot.component_table(&sample).unwrap() {
            let mean = comp.iter().sum::<f64>() / comp.len() as f64;
            prop_assert!(mean.abs() < 1e-10);
        }
        let reassembled: Vec<f64> = sample
            .rows()
            .map(|r| {
                pilot.m_hat_c
                    + r.iter().enumerate().map(|(a, &x)| pilot.component_at(a, x).unwrap()).sum::<f64>()
            })
            .collect();
        prop_assert!(close(&reassembled, &first, 1e-10));
    }

    #[test]
    fn pilot_is_linear_in_the_response(seed in any::<u64>(), scale in -3.0..3.0f64, shift in -10.0..10.0f64) {
        let sample = occupied_sample(seed, 3, 4, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let other: Vec<f64> = (0..sample.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fit = |y: Vec<f64>| fit_pilot(&sample.with_response(y).unwrap(), 4).unwrap();
        let base = fit(sample.y().to_vec());
        let comps = |p: &PilotFit| p.component_table(&sample).unwrap().concat();

        let scaled = fit(sample.y().iter().map(|y| scale * y).collect());
        let expect: Vec<f64> = comps(&base).iter().map(|v| scale * v).collect();
        prop_assert!(close(&comps(&scaled), &expect, 1e-9));
        prop_assert!((scaled.c_hat - scale * base.c_hat).abs() < 1e-9 * (1.0 + base.c_hat.abs()));

        let shifted = fit(sample.y().iter().map(|y| y + shift).collect());
        prop_assert!(close(&comps(&shifted), &comps(&base), 1e-9));
        prop_assert!((shifted.c_hat - base.c_hat - shift).abs() < 1e-9 * (1.0 + shift.abs()));

        let summed = fit(sample.y().iter().zip(&other).map(|(a, b)| a + b).collect());
        let part = fit(other.clone());
        let expect: Vec<f64> = comps(&base).iter().zip(comps(&part)).map(|(a, b)| a + b).collect();
        prop_assert!(close(&comps(&summed), &expect, 1e-9));
        prop_assert!(close(&fitted(&summed, &sample), &fitted(&base, &sample).iter().zip(fitted(&part, &sample)).map(|(a, b)| a + b).collect::<Vec<_>>(), 1e-9));
    }

    #[test]
    fn nw_is_a_translation_equivariant_convex_combination(
        pts in vec((0.0..=1.0f64, -5.0..5.0f64), 1..50),
        h in 0.02..0.9f64,
        x0 in 0.0..=1.0f64,
        shift in -20.0..20.0f64,
    ) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let h = Bandwidth::new(h).unwrap();
        let direct = nw_estimate(&xs, &ys, h, x0);
        prop_assert_eq!(direct.is_ok(), brute_force_nw(&xs, &ys, h.get(), x0).is_some());
        if let Ok(v) = direct {
            let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= v && v <= hi + 1e-12);
            let moved: Vec<f64> = ys.iter().map(|y| y + shift).collect();
            let w = nw_estimate(&xs, &moved, h, x0).unwrap();
            prop_assert!((w - v - shift).abs() < 1e-10 * (1.0 + shift.abs()));
            let brute = brute_force_nw(&xs, &ys, h.get(), x0).unwrap();
            prop_assert!((v - brute).abs() < 1e-12 * (1.0 + brute.abs()));
        }
    }

    #[test]
    fn kde_integrates_to_one(xs in vec(0.0..=1.0f64, 1..60), h in 0.02..0.5f64) {
        let bw = Bandwidth::new(h).unwrap();
        let (a, b) = (-h, 1.0 + h);
        let m = 4000;
        let step = (b - a) / m as f64;
        let area: f64 = (0..=m)
            .map(|k| {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                w * kde(&xs, bw, a + k as f64 * step)
            })
            .sum::<f64>()
            * step;
        prop_assert!((area - 1.0).abs() < 1e-3, "area {}", area);
    }

    #[test]
    fn rule_of_thumb_scales_with_its_constant(xs in vec(0.0..=1.0f64, 3..80), c in 0.05..0.6f64) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let one = rot_bandwidth(&xs, c).unwrap().get();
        let two = rot_bandwidth(&xs, 2.0 * c).unwrap().get();
        if 2.0 * one < 0.5 {
            prop_assert!((two - 2.0 * one).abs() < 1e-12);
        } else {
            prop_assert_eq!(two, 0.5);
        }
    }

    #[test]
    fn oracle_equals_spbk_when_truth_is_the_pilot(seed in any::<u64>(), h in 0.05..0.4f64) {
        let sample = occupied_sample(seed, 3, 4, 30);
        let pilot = fit_pilot(&sample, 4).unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let h = Bandwidth::new(h).unwrap();
        for alpha in 0..3 {
            let a = spbk_component(&sample, &pilot, alpha, h, &grid).unwrap();
            let b = oracle_component(&sample, &PilotTruth(&pilot), alpha, h, &grid).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
