use rand::Rng;

use relinfo::montecarlo::{replicate_rng, BinomialTable};
use relinfo::{
    conditional_simulate, contour_grid, exact_conditional_moments, expected_inverse_ri,
    lod_mle_vs_null, sd_curve, simulate_joint_lod, variance_inverse_ri, BinomialData, Error,
    Settings, SimConfig, StudyConfig,
};

fn cfg(true_p: f64, replicates: u64, seed: u64) -> SimConfig {
    SimConfig {
        n: 1000,
        n0: 800,
        true_p,
        p0: 0.5,
        replicates,
        seed,
    }
}

#[test]
fn null_lods_average_one_half() {
    // Under the null, 2 * lod is asymptotically chi-square(1), so the mean lod
    // is about 1/2. A direct Bernoulli-by-Bernoulli simulation gives the
    // reference without going through the inversion sampler.
    let reps = 20_000u64;
    let s = simulate_joint_lod(&SimConfig { true_p: 0.5, ..cfg(0.5, reps, 11) }).unwrap();
    let mean_ob = s.pairs.iter().map(|p| p.0).sum::<f64>() / reps as f64;
    let mean_co = s.pairs.iter().map(|p| p.1).sum::<f64>() / reps as f64;

    let direct_reps = 4_000u64;
    let mut direct = 0.0;
    for r in 0..direct_reps {
        let mut rng = replicate_rng(1234, r);
        let x = (0..800).filter(|_| rng.random::<f64>() < 0.5).count() as u64;
        direct += lod_mle_vs_null(BinomialData::new(x, 800).unwrap(), 0.5).unwrap().value;
    }
    let direct = direct / direct_reps as f64;

    // sd of lod is about 1/sqrt(2); allow 5 standard errors of each estimate.
    let tol = 5.0 * (0.5f64 / reps as f64).sqrt() + 5.0 * (0.5f64 / direct_reps as f64).sqrt();
    assert!((mean_ob - 0.5).abs() < 5.0 * (0.5f64 / reps as f64).sqrt(), "{mean_ob}");
    assert!((mean_co - 0.5).abs() < 5.0 * (0.5f64 / reps as f64).sqrt(), "{mean_co}");
    assert!((mean_ob - direct).abs() < tol, "{mean_ob} vs direct {direct}");
}

#[test]
fn simulated_lods_are_nonnegative() {
    let s = simulate_joint_lod(&cfg(0.55, 5_000, 3)).unwrap();
    assert_eq!(s.pairs.len(), 5_000);
    assert!(s.pairs.iter().all(|&(a, b)| a >= 0.0 && b >= 0.0));
}

#[test]
fn simulation_is_independent_of_thread_count() {
    let c = cfg(0.6, 10_000, 77);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_joint_lod(&c).unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one, three);
    let bits = |s: &relinfo::JointSample| -> Vec<(u64, u64)> {
        s.pairs.iter().map(|(a, b)| (a.to_bits(), b.to_bits())).collect()
    };
    assert_eq!(bits(&one), bits(&three));
    assert_ne!(one, simulate_joint_lod(&SimConfig { seed: 78, ..c }).unwrap());
}

#[test]
fn inversion_sampler_matches_masses() {
    let table = BinomialTable::new(20, 0.3).unwrap();
    let reps = 200_000u64;
    let mut counts = [0u64; 21];
    for r in 0..reps {
        counts[table.invert(replicate_rng(5, r).random()) as usize] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(table.masses())
        .filter(|(_, &m)| m * reps as f64 > 5.0)
        .map(|(&c, &m)| {
            let e = m * reps as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 99.9% quantile of chi-square with ~15 degrees of freedom is about 37.7.
    assert!(chi2 < 37.7, "chi2 = {chi2}");
}

#[test]
fn conditional_moments_converge() {
    let s = Settings::default();
    let study = StudyConfig::new(300, 250, 150, 0.5).unwrap();
    let reps = 200_000u64;
    let draws = conditional_simulate(&study, 0.58, reps, 21, &s).unwrap();
    let (mean, var) = exact_conditional_moments(&study, 0.58, &s).unwrap();
    let m = draws.iter().sum::<f64>() / reps as f64;
    assert!((m - mean).abs() < 4.0 * var.sqrt() / (reps as f64).sqrt());
    let closed_e = expected_inverse_ri(&study, 0.58, study.missing(), &s).unwrap();
    let closed_v = variance_inverse_ri(&study, 0.58, study.missing(), &s).unwrap();
    assert!((closed_e - mean).abs() < 1e-10);
    assert!((closed_v - var).abs() < 1e-10);
}

#[test]
fn conditional_simulation_reports_instability() {
    let study = StudyConfig::new(300, 250, 125, 0.5).unwrap();
    assert!(matches!(
        conditional_simulate(&study, 0.5 + 1e-13, 10, 0, &Settings::default()),
        Err(Error::Instability { .. })
    ));
    assert!(matches!(
        exact_conditional_moments(&study, 0.5 + 1e-13, &Settings::default()),
        Err(Error::Instability { .. })
    ));
}

#[test]
fn enumeration_size_limit() {
    let big = StudyConfig::new(200_100, 10, 7, 0.5).unwrap();
    assert!(matches!(
        exact_conditional_moments(&big, 0.6, &Settings::default()),
        Err(Error::Size { .. })
    ));
}

#[test]
fn binomial_masses_normalize() {
    for (m, p) in [(0u64, 0.4), (1, 0.9), (200, 0.55), (5_000, 0.01), (100_000, 0.5)] {
        let t = BinomialTable::new(m, p).unwrap();
        let total: f64 = t.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "{m} {p}: {total}");
        assert_eq!(t.trials(), m);
    }
}

#[test]
fn density_grid_normalizes() {
    let s = simulate_joint_lod(&cfg(0.6, 20_000, 8)).unwrap();
    let g = contour_grid(&s, 30, 25, &[2.0]).unwrap();
    assert_eq!(g.total(), 20_000);
    let mass: f64 = g.normalized.iter().flatten().sum();
    assert!((mass - 1.0).abs() < 1e-12);
    assert_eq!((g.bins_x(), g.bins_y()), (30, 25));
    assert!(g.y_edges.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn complete_data_mass_sits_on_the_diagonal() {
    let s = simulate_joint_lod(&SimConfig { n: 800, ..cfg(0.55, 5_000, 4) }).unwrap();
    let g = contour_grid(&s, 20, 20, &[]).unwrap();
    for (ix, col) in g.counts.iter().enumerate() {
        for (iy, &c) in col.iter().enumerate() {
            if c > 0 {
                assert_eq!(ix, iy);
            }
        }
    }
}

#[test]
fn larger_studies_have_smaller_sd() {
    let s = Settings::default();
    let small = sd_curve(100, 80, 0.5, &[], &s).unwrap();
    let large = sd_curve(1000, 800, 0.5, &[], &s).unwrap();
    // Matched p_hat = x0 / n0 away from the null.
    for x0_small in [4u64, 20, 30, 50, 60, 76] {
        let x0_large = x0_small * 10;
        let a = small.rows[x0_small as usize].sd_inverse_ri.unwrap();
        let b = large.rows[x0_large as usize].sd_inverse_ri.unwrap();
        assert!(b < a, "x0/n0 = {}: {b} !< {a}", x0_small as f64 / 80.0);
    }
}

#[test]
fn sd_spikes_near_the_null() {
    let c = sd_curve(1000, 800, 0.5, &[0.55, 0.6, 0.7], &Settings::default()).unwrap();
    let sd = |x0: usize| c.rows[x0].sd_inverse_ri.unwrap();
    assert!(c.rows[400].sd_inverse_ri.is_none());
    assert!(sd(401) > sd(420));
    assert!(sd(420) > sd(480));
    assert!(sd(480) > sd(560));
    for d in &c.density_curves {
        let total: f64 = d.masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
