//! Distributional checks with fixed seeds. Bands are 3 sigma or KS/chi-square at 0.01.

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use slowbond_core::lattice::{
    bernoulli_decomposition_sample, passage_time, sample_passage_time, sample_weights, topmost_geodesic,
};
use slowbond_core::point_process::{sample_diagonal_reinforcement, sample_poisson_field, Region};
use slowbond_core::stats::{
    self, fluctuation_exponent, ks_one_sample, ks_two_sample, time_constant, transversal_exponent, ModelTag,
    SampleSeries,
};
use slowbond_core::tasep::{init_step, minimum_window, simulate};
use slowbond_core::{Purpose, StreamKey};

fn key(seed: u64, r: u64, p: Purpose) -> StreamKey {
    StreamKey::new(seed, r, p)
}

fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

#[test]
fn poisson_field_mean_count() {
    let region = Region::square(100.0).unwrap();
    let counts: Vec<f64> = (0..200)
        .map(|r| sample_poisson_field(&region, 1.0, key(1, r, Purpose::BulkField)).unwrap().len() as f64)
        .collect();
    let m = stats::mean(&counts);
    let band = 3.0 * (10_000.0f64 / 200.0).sqrt();
    assert!((m - 10_000.0).abs() < band, "mean {m}");
}

#[test]
fn poisson_field_points_are_uniform() {
    let region = Region::new(2.0, 5.0, -1.0, 3.0).unwrap();
    let c = sample_poisson_field(&region, 500.0, key(2, 0, Purpose::BulkField)).unwrap();
    assert!(c.points().iter().all(|p| region.contains(p)));
    let xs: Vec<f64> = c.points().iter().map(|p| p.x).collect();
    let ys: Vec<f64> = c.points().iter().map(|p| p.y).collect();
    assert!(ks_one_sample(&xs, |x| ((x - 2.0) / 3.0).clamp(0.0, 1.0)).unwrap().passes(0.01));
    assert!(ks_one_sample(&ys, |y| ((y + 1.0) / 4.0).clamp(0.0, 1.0)).unwrap().passes(0.01));
}

#[test]
fn disjoint_regions_have_uncorrelated_counts() {
    let region = Region::new(0.0, 20.0, 0.0, 10.0).unwrap();
    let left = Region::new(0.0, 10.0, 0.0, 10.0).unwrap();
    let right = Region::new(10.000001, 20.0, 0.0, 10.0).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in 0..500 {
        let c = sample_poisson_field(&region, 1.0, key(3, r, Purpose::BulkField)).unwrap();
        a.push(c.count_in(&left) as f64);
        b.push(c.count_in(&right) as f64);
    }
    let (ma, mb) = (stats::mean(&a), stats::mean(&b));
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / 499.0;
    let rho = cov / (stats::std_dev(&a) * stats::std_dev(&b));
    assert!(rho.abs() < 0.1, "rho {rho}");
}

#[test]
fn poisson_count_chi_square() {
    let region = Region::new(0.0, 4.0, 0.0, 5.0).unwrap();
    let mu = 20.0;
    let counts: Vec<u64> = (0..1000)
        .map(|r| sample_poisson_field(&region, 1.0, key(4, r, Purpose::BulkField)).unwrap().len() as u64)
        .collect();
    let law = Poisson::new(mu).unwrap();
    // bins [0, 12], 13, ..., 27, [28, inf): every expected count above 5
    let (lo, hi) = (12u64, 28u64);
    let mut observed = vec![0.0; (hi - lo + 1) as usize];
    for &c in &counts {
        observed[(c.clamp(lo, hi) - lo) as usize] += 1.0;
    }
    let mut expected: Vec<f64> = (lo..=hi).map(|k| 1000.0 * law.pmf(k)).collect();
    expected[0] = 1000.0 * (0..=lo).map(|k| law.pmf(k)).sum::<f64>();
    let last = expected.len() - 1;
    expected[last] = 1000.0 * (1.0 - (0..hi).map(|k| law.pmf(k)).sum::<f64>());
    assert!(expected.iter().all(|&e| e >= 5.0));
    let chi2: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (expected.len() - 1) as f64;
    let p = ChiSquared::new(df).unwrap().sf(chi2);
    assert!(p > 0.01, "chi2 {chi2} on {df} df, p {p}");
}

#[test]
fn diagonal_intensity_is_per_unit_arc_length() {
    let counts: Vec<f64> = (0..200)
        .map(|r| {
            let c = sample_diagonal_reinforcement(2.0, 0.0, (0.0, 100.0), key(5, r, Purpose::Diagonal)).unwrap();
            assert!(c.points().iter().all(|p| p.y - p.x == 0.0));
            c.len() as f64
        })
        .collect();
    let mu = 2.0 * std::f64::consts::SQRT_2 * 100.0;
    let band = 3.0 * (mu / 200.0).sqrt();
    assert!((stats::mean(&counts) - mu).abs() < band);
}

#[test]
fn unperturbed_diagonal_is_unit_exponential() {
    let mut diag = Vec::new();
    for r in 0..100 {
        diag.extend(sample_weights(999, 0.0, 0, key(6, r, Purpose::LatticeWeights)).unwrap().defect_line());
    }
    assert_eq!(diag.len(), 100_000);
    assert!(ks_one_sample(&diag, exp_cdf(1.0)).unwrap().passes(0.01));
}

#[test]
fn slowed_diagonal_has_mean_two() {
    let mut diag = Vec::new();
    for r in 0..100 {
        diag.extend(sample_weights(999, 0.5, 0, key(7, r, Purpose::LatticeWeights)).unwrap().defect_line());
    }
    let band = 3.0 * 2.0 / (diag.len() as f64).sqrt();
    assert!((stats::mean(&diag) - 2.0).abs() < band);
    assert!(ks_one_sample(&diag, exp_cdf(0.5)).unwrap().passes(0.01));
}

#[test]
fn bernoulli_decomposition_matches_slowed_exponential() {
    for (i, eps) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let s = bernoulli_decomposition_sample(eps, 100_000, key(8, i as u64, Purpose::Decomposition)).unwrap();
        let ks = ks_two_sample(&s.direct, &s.composite).unwrap();
        assert!(ks.passes(0.01), "eps {eps}: {ks:?}");
        let mean = 1.0 / (1.0 - eps);
        let band = 3.0 * mean * (2.0f64 / 100_000.0).sqrt() * 2.0;
        assert!((stats::mean(&s.composite) - mean).abs() < band);
    }
}

#[test]
fn lone_particle_crosses_after_slowed_clock() {
    // particle 0 starts on the slow bond, so its first jump is the first crossing
    let firsts: Vec<f64> = (0..10_000)
        .map(|r| {
            let w = minimum_window(30.0);
            let s = simulate(init_step::<f64>(w, w).unwrap(), 0.5, 30.0, key(9, r, Purpose::TasepClocks)).unwrap();
            s.crossing_times()[0]
        })
        .collect();
    assert!(ks_one_sample(&firsts, exp_cdf(0.5)).unwrap().passes(0.01));
}

#[test]
fn geodesics_carry_the_passage_time() {
    for r in 0..100u64 {
        let n = 1 + (r as usize * 37) % 200;
        let w = sample_weights(n, 0.3f64, 0, key(10, r, Purpose::LatticeWeights)).unwrap();
        let (t, table) = passage_time(&w);
        let g = topmost_geodesic(&table, &w).unwrap();
        assert!((g.weight(&w) - t).abs() <= 1e-9 * t);
        assert_eq!(g.vertices.len(), 2 * n + 1);
    }
}

#[test]
fn lattice_superadditivity_in_distribution() {
    let sample = |n: usize, seed: u64| -> Vec<f64> {
        (0..200)
            .map(|r| sample_passage_time(n, 0.0f64, 0, key(seed, r, Purpose::LatticeWeights)).unwrap())
            .collect()
    };
    let (a, b) = (sample(40, 11), sample(80, 12));
    let se = (stats::variance(&a) * 4.0 / 200.0 + stats::variance(&b) / 200.0).sqrt();
    assert!(stats::mean(&b) >= 2.0 * stats::mean(&a) - 3.0 * se);
}

fn noisy_series(replicas: usize, seed: u64) -> SampleSeries<f64> {
    let mut s = SampleSeries::new(ModelTag::Lattice);
    let mut g = key(seed, 0, Purpose::Generic).stream();
    for n in [100usize, 200, 400, 800] {
        let sd = (n as f64).powf(1.0 / 3.0);
        let values = (0..replicas).map(|_| 4.0 * n as f64 + sd * g.normal()).collect();
        s.push(n, values).unwrap();
    }
    s
}

#[test]
fn bootstrap_intervals_contain_estimates_and_shrink() {
    let small = noisy_series(100, 13);
    let large = noisy_series(1600, 14);
    for s in [&small, &large] {
        for e in [
            time_constant(s, 1.0 / 3.0).unwrap(),
            fluctuation_exponent(s).unwrap(),
            transversal_exponent(s).unwrap(),
        ] {
            assert!(e.ci_low <= e.estimate() && e.estimate() <= e.ci_high, "{e:?}");
        }
    }
    let w_small = fluctuation_exponent(&small).unwrap().ci_width();
    let w_large = fluctuation_exponent(&large).unwrap().ci_width();
    assert!(w_large < w_small, "{w_large} vs {w_small}");
    let c_small = time_constant(&small, 1.0 / 3.0).unwrap().ci_width();
    let c_large = time_constant(&large, 1.0 / 3.0).unwrap().ci_width();
    assert!(c_large < c_small);
    let chi = fluctuation_exponent(&large).unwrap();
    assert!((chi.exponent - 1.0 / 3.0).abs() < 0.05);
}

#[test]
fn estimators_are_scale_equivariant() {
    let s = noisy_series(100, 15);
    let a = 3.5;
    let t = s.scaled(a);
    let (c0, c1) = (time_constant(&s, 1.0 / 3.0).unwrap(), time_constant(&t, 1.0 / 3.0).unwrap());
    assert!((c1.constant - a * c0.constant).abs() < 1e-9 * c1.constant);
    for (e0, e1) in [
        (fluctuation_exponent(&s).unwrap(), fluctuation_exponent(&t).unwrap()),
        (transversal_exponent(&s).unwrap(), transversal_exponent(&t).unwrap()),
    ] {
        assert!((e0.exponent - e1.exponent).abs() < 1e-9);
        assert!((e1.constant - a * e0.constant).abs() < 1e-9 * e1.constant);
    }
}

#[test]
fn gaussian_tail_is_distinguishable_from_three_halves() {
    // against s^{3/2} a stretched-exponential tail is a straight line; the
    // Gaussian one keeps steepening
    let mut g = key(16, 0, Purpose::Generic).stream();
    let v: Vec<f64> = (0..1_000_000).map(|_| g.normal()).collect();
    let t = stats::tail_profile(&v, (0.0, 1.0)).unwrap();
    let at = |s: f64| t.upper.iter().find(|p| p.s == s).copied().unwrap();
    let chord = |a: f64, b: f64| {
        let (p, q) = (at(a), at(b));
        (q.log_survival - p.log_survival) / (q.s_three_halves - p.s_three_halves)
    };
    let (early, late) = (chord(1.0, 2.0), chord(2.5, 3.5));
    assert!(late < early - 0.1, "{early} vs {late}");
}

#[test]
fn ulam_log_tails_are_decreasing_and_concave() {
    // 10^4 samples of L on a square of area 10^4
    let v: Vec<f64> = (0..10_000)
        .map(|r| slowbond_core::ulam::reinforced_lis(100, 0.0, 0.0, key(17, r, Purpose::Generic)).unwrap().length as f64)
        .collect();
    let t = stats::tail_profile(&v, (stats::mean(&v), stats::std_dev(&v))).unwrap();
    let sd = |p: &stats::TailPoint| ((1.0 - p.log_survival.exp()) / p.count as f64).sqrt();
    for tail in [&t.upper, &t.lower] {
        assert!(tail.len() >= 4, "{tail:?}");
        assert!(tail.windows(2).all(|w| w[1].log_survival <= w[0].log_survival));
        for (w, d2) in tail.windows(3).zip(stats::second_differences(tail)) {
            let noise = (sd(&w[0]).powi(2) + 4.0 * sd(&w[1]).powi(2) + sd(&w[2]).powi(2)).sqrt();
            assert!(d2 <= 3.0 * noise, "second difference {d2} at s = {}", w[1].s);
        }
        let (a, b, c) = (&tail[0], &tail[tail.len() / 2], &tail[tail.len() - 1]);
        let early = (b.log_survival - a.log_survival) / (b.s - a.s);
        let late = (c.log_survival - b.log_survival) / (c.s - b.s);
        assert!(late < early, "chord slopes {early} then {late}");
    }
}
