use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spbk::backfit::{full_fit, spbk_component, unit_grid, AdditiveTruth};
use spbk::kernel::rot_bandwidth;
use spbk::pilot::{choose_knot_count, fit_pilot};
use spbk::sample::{normalize, RegressionSample};
use spbk::simulation::{
    ase, median, run_mc, McConfig, OnUnitCube, Stage, StationaryMoments, CENTERING_RUN_LENGTH,
    CENTERING_SEED, DEFAULT_C_H,
};

#[test]
fn pilot_ase_matches_reference_level_and_falls_with_n() {
    let medians: Vec<f64> = [100, 200, 500]
        .into_iter()
        .map(|n| {
            let study = run_mc(&McConfig {
                n,
                ..McConfig::default()
            })
            .unwrap();
            study.median_ase(Stage::Pilot, 0)
        })
        .collect();
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "{medians:?}"
    );
    let ratio = medians[2] / 0.0263;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "median pilot ASE {} at n = 500",
        medians[2]
    );
}

fn noiseless_sup_error(n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let y: Vec<f64> = xs.iter().map(|x| (PI * x).sin()).collect();
    let centre = y.iter().sum::<f64>() / n as f64;
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let sample = RegressionSample::from_rows(y, &rows).unwrap();
    let pilot = fit_pilot(&sample, choose_knot_count(n, 1, 0.5).unwrap()).unwrap();
    let h = rot_bandwidth(&xs, DEFAULT_C_H).unwrap();
    let fit = spbk_component(&sample, &pilot, 0, h, &unit_grid(101)).unwrap();
    fit.grid
        .iter()
        .zip(&fit.values)
        .filter(|(x, _)| h.get() <= **x && **x <= 1.0 - h.get())
        .map(|(x, v)| (v.unwrap() - ((PI * x).sin() - centre)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn noiseless_component_is_recovered_more_closely_with_more_data() {
    let (small, large) = (noiseless_sup_error(200), noiseless_sup_error(1000));
    assert!(large < small, "{small} -> {large}");
    assert!(large < 0.05, "{large}");
}

fn prediction_ase(n: usize, reps: u64) -> f64 {
    let config = McConfig {
        n,
        ..McConfig::default()
    };
    let map = config.domain_map().unwrap();
    let model = config.truth();
    let truth = OnUnitCube::new(model.as_ref(), &map);
    let values: Vec<f64> = (0..reps)
        .map(|rep| {
            let sample = normalize(&config.generate(rep).unwrap(), &map)
                .unwrap()
                .fitting_sample()
                .unwrap();
            let pilot = fit_pilot(&sample, choose_knot_count(sample.n(), 3, 0.5).unwrap()).unwrap();
            let hs: Vec<_> = (0..3)
                .map(|a| rot_bandwidth(&sample.column(a), DEFAULT_C_H).unwrap())
                .collect();
            let fit = full_fit(&sample, &pilot, &hs, &vec![unit_grid(201); 3]).unwrap();
            let (pred, m): (Vec<f64>, Vec<f64>) = sample
                .rows()
                .map(|r| {
                    let m =
                        truth.constant() + (0..3).map(|a| truth.component(a, r[a])).sum::<f64>();
                    (fit.predict(r).unwrap(), m)
                })
                .unzip();
            ase(&pred, &m).unwrap()
        })
        .collect();
    median(&values)
}

#[test]
fn additive_prediction_improves_with_n() {
    let (small, large) = (prediction_ase(100, 20), prediction_ase(500, 20));
    assert!(large < small, "{small} -> {large}");
}

#[test]
fn spbk_beats_pilot_on_the_zero_component() {
    let study = run_mc(&McConfig::default()).unwrap();
    assert!(study.mean_ase(Stage::Spbk, 0) < study.mean_ase(Stage::Pilot, 0));
    assert!(study.failures.is_empty());
}

#[test]
fn shipped_centering_constants_match_recomputation() {
    let text = include_str!("../data/centering_constants.json");
    let shipped: Vec<StationaryMoments> = serde_json::from_str(text).unwrap();
    assert_eq!(shipped.len(), 2);
    for m in shipped {
        assert_eq!(m.seed, CENTERING_SEED);
        assert_eq!(m.length, CENTERING_RUN_LENGTH);
        let again = StationaryMoments::compute(m.sigma0, m.seed, m.length);
        assert_eq!(again, m);
        assert_eq!(StationaryMoments::cached(m.sigma0), m);
    }
}

#[test]
fn high_dimensional_design_runs_with_capped_knots() {
    let config = McConfig {
        example: spbk::simulation::Example::Ex2,
        d: 30,
        n: 200,
        sigma0: 1.0,
        replications: 10,
        ..McConfig::default()
    };
    let study = run_mc(&config).unwrap();
    let r = &study.replications[0];
    assert_eq!(r.knots, choose_knot_count(200, 30, 0.5).unwrap());
    assert!(30 * r.knots < 100);
    for alpha in 0..30 {
        assert!(study.median_efficiency(alpha) > 0.0);
    }
}
