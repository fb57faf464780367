//! Independent oracles for the analytic module, the optimizers and the
//! simulator. The reference Matérn sampler here is a brute-force O(n²)
//! implementation on a torus and shares no code with the library.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use d2d_caching::analytic::{
    campbell_neighbor_count, hit_mpc, mhc_variance, retention_marginal,
    second_order_product_density, PlacementKind, PlacementPolicy,
};
use d2d_caching::experiments::optimized_policy;
use d2d_caching::numerics::integrate;
use d2d_caching::optimizers::{invert_retention, numeric_oracle_hcp, solve_gcp};
use d2d_caching::scenario::{coverage_number_pmf, poisson_pmf};
use d2d_caching::simulator::{
    estimate_hit, ks_two_sample, nearest_neighbor_distances, negative_dependence_check, place_mhc,
    sample_ppp,
};
use d2d_caching::{PopularityModel, ScenarioConfig, SimOptions, Strategy};

/// Matérn type-II thinning of a Poisson field on an `l × l` torus.
/// Returns all points and the retained flags.
fn torus_matern(lt: f64, r: f64, l: f64, rng: &mut ChaCha8Rng) -> (Vec<[f64; 2]>, Vec<bool>) {
    let n = Poisson::new(lt * l * l).unwrap().sample(rng) as usize;
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random::<f64>() * l, rng.random::<f64>() * l])
        .collect();
    let marks: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let kept = (0..n)
        .map(|i| {
            (0..n).all(|j| j == i || torus_dist2(pts[i], pts[j], l) >= r * r || marks[j] > marks[i])
        })
        .collect();
    (pts, kept)
}

fn torus_dist2(a: [f64; 2], b: [f64; 2], l: f64) -> f64 {
    let d = |x: f64| {
        let x = x.abs() % l;
        x.min(l - x)
    };
    d(a[0] - b[0]).powi(2) + d(a[1] - b[1]).powi(2)
}

#[test]
fn coverage_count_matches_simulated_disk_counts() {
    // λ_t π R² = 2, so P(k = 2) = 2 e^{-2}
    let cfg = ScenarioConfig::new(1.0 / PI, 2f64.sqrt(), 2, 1, 1.0).unwrap();
    let pk = coverage_number_pmf(&cfg, 2);
    assert!((pk - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(pk, poisson_pmf(2.0, 2));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 100_000;
    let hits = (0..draws)
        .filter(|_| {
            let p = sample_ppp(&cfg, 0.0, &mut rng);
            let r2 = cfg.d2d_radius.powi(2);
            p.positions
                .iter()
                .filter(|x| x[0] * x[0] + x[1] * x[1] <= r2)
                .count()
                == 2
        })
        .count();
    let f = hits as f64 / draws as f64;
    let sigma = (pk * (1.0 - pk) / draws as f64).sqrt();
    assert!((f - pk).abs() <= 3.0 * sigma, "{f} vs {}", pk);
}

#[test]
fn pair_density_integral_matches_dense_midpoint_rule() {
    for (lt_pi, r_m) in [(1.0, 1.0), (0.3, 2.0), (4.0, 0.5)] {
        let cfg = ScenarioConfig::new(lt_pi / PI, 1.0, 1, 1, 0.0).unwrap();
        let f = |r: f64| second_order_product_density(&cfg, r_m, r).unwrap();
        let panels = 10_000;
        let h = r_m / panels as f64;
        let midpoint: f64 = (0..panels)
            .map(|k| f(r_m + (k as f64 + 0.5) * h))
            .sum::<f64>()
            * h;
        let quad = integrate(f, r_m, 2.0 * r_m, &[], 1e-12).unwrap();
        assert!((quad / midpoint - 1.0).abs() < 1e-6, "{quad} vs {midpoint}");
    }
}

#[test]
fn mpc_hit_matches_monte_carlo() {
    let cfg = ScenarioConfig::two_file_example(10.0).with_seed(9);
    let pop = cfg.popularity().unwrap();
    let an = hit_mpc(&cfg, &pop).lower;
    assert!((an - 2.0 / 3.0 * (1.0 - (-100.0f64).exp())).abs() < 1e-15);
    let est = estimate_hit(&cfg, &pop, &Strategy::Mpc, 100_000, &SimOptions::default()).unwrap();
    assert!(
        (est.mean - an).abs() <= 3.0 * est.std_error,
        "{} ± {}",
        est.mean,
        est.std_error
    );
}

#[test]
fn campbell_count_matches_typical_point_estimate() {
    // expected number of retained neighbours within R of a typical point of
    // the parent field, counted only when that point is itself retained
    let cfg = ScenarioConfig::new(1.0 / PI, 3.0, 1, 1, 0.0).unwrap();
    let want = campbell_neighbor_count(&cfg, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (l, r) = (24.0, 1.0);
    let (mut sum, mut parents) = (0u64, 0u64);
    for _ in 0..400 {
        let (pts, kept) = torus_matern(cfg.intensity, r, l, &mut rng);
        parents += pts.len() as u64;
        for i in (0..pts.len()).filter(|&i| kept[i]) {
            sum += (0..pts.len())
                .filter(|&j| j != i && kept[j] && torus_dist2(pts[i], pts[j], l) <= 9.0)
                .count() as u64;
        }
    }
    let got = sum as f64 / parents as f64;
    assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
}

#[test]
fn variance_density_matches_torus_counts() {
    let cfg = ScenarioConfig::new(1.0 / PI, 1.0, 1, 1, 0.0).unwrap();
    let want = mhc_variance(&cfg, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = 12.0;
    let counts: Vec<f64> = (0..10_000)
        .map(|_| {
            torus_matern(cfg.intensity, 1.0, l, &mut rng)
                .1
                .iter()
                .filter(|&&k| k)
                .count() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    let got = var / (l * l);
    assert!((got / want - 1.0).abs() < 0.10, "{got} vs {want}");
    // the mean count is the retained intensity
    assert!((mean / (l * l) / (retention_marginal(&cfg, 1.0) * cfg.intensity) - 1.0).abs() < 0.01);
}

#[test]
fn nearest_neighbour_law_matches_reference_sampler() {
    // λ_t π r² = 0.25
    let r = 0.5;
    let cfg = ScenarioConfig::new(1.0 / PI, 1.0, 1, 1, 0.0).unwrap();
    let pop = PopularityModel::from_pmf(vec![1.0]).unwrap();
    let policy = PlacementPolicy::hard_core(PlacementKind::MhcA, &cfg, vec![r]).unwrap();
    let opts = SimOptions {
        capacity: false,
        ..SimOptions::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lib = Vec::new();
    while lib.len() < 4000 {
        let mut p = sample_ppp(&cfg, r, &mut rng);
        place_mhc(&cfg, &mut p, &policy, &pop, &opts, &mut rng).unwrap();
        lib.extend(nearest_neighbor_distances(&p, 0, 5.0));
    }
    let mut reference = Vec::new();
    let l = 15.0;
    while reference.len() < 4000 {
        let (pts, kept) = torus_matern(cfg.intensity, r, l, &mut rng);
        let held: Vec<[f64; 2]> = pts
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| k)
            .map(|(x, _)| *x)
            .collect();
        for (i, &x) in held.iter().enumerate() {
            let d = held
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &y)| torus_dist2(x, y, l))
                .fold(f64::INFINITY, f64::min);
            reference.push(d.sqrt());
        }
    }
    assert!(lib.iter().all(|&d| d >= r));
    let (d, p) = ks_two_sample(&lib, &reference);
    assert!(p > 1e-3, "KS statistic {d}, p = {p}");
}

#[test]
fn inversion_matches_bisection() {
    let cfg = ScenarioConfig::new(1.0 / PI, 1.0, 2, 1, 1.0).unwrap();
    let map = |c: f64| (1.0 - (-c).exp()) / c;
    let (mut lo, mut hi) = (1e-9, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if map(mid) > 0.5 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let c = 0.5 * (lo + hi);
    assert!((c - 1.5936).abs() < 1e-4);
    let r = invert_retention(&cfg, 0.5).unwrap();
    assert!((r - (c / (cfg.intensity * PI)).sqrt()).abs() < 1e-9);
    assert!((r - 1.263).abs() < 1e-3);
    assert!((retention_marginal(&cfg, r) - 0.5).abs() < 1e-9);

    let cfg = ScenarioConfig::two_file_example(2f64.sqrt());
    let g = solve_gcp(&cfg, &cfg.popularity().unwrap()).unwrap();
    assert!((g.marginals[0] - 0.6733).abs() < 1e-4 && (g.marginals[1] - 0.3267).abs() < 1e-4);
    for &q in &g.marginals {
        let r = invert_retention(&cfg, q).unwrap();
        assert!((retention_marginal(&cfg, r) - q).abs() < 1e-9);
    }
}

#[test]
fn hard_core_optimum_matches_grid_search() {
    // M = 3, N = 1, γ = 1, λ_t π = 1, R = 1; grid over marginals at step 1e-3
    let cfg = ScenarioConfig::new(1.0 / PI, 1.0, 3, 1, 1.0).unwrap();
    let pop = cfg.popularity().unwrap();
    let lt = cfg.intensity;
    let area = PI * cfg.d2d_radius.powi(2);
    let lambda_at_r = (1.0 - (-lt * area).exp()) / area;
    let term = |p: f64, l: f64| {
        // radius at least R exactly when the intensity is at most λ(R)
        if l <= lambda_at_r {
            p * (l * area).min(1.0)
        } else {
            p * (1.0 - (-l * area).exp())
        }
    };
    let steps = 1000;
    let mut best = 0.0f64;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let q = [i as f64, j as f64, (steps - i - j) as f64].map(|k| k / steps as f64 * lt);
            let v: f64 = (0..3).map(|m| term(pop.prob(m), q[m])).sum();
            best = best.max(v);
        }
    }
    let oracle = numeric_oracle_hcp(&cfg, &pop).unwrap();
    assert!(
        (oracle.objective - best).abs() < 1e-4,
        "{} vs grid {best}",
        oracle.objective
    );
    assert!(oracle.objective >= best - 1e-12);
}

#[test]
fn hard_core_joint_retention_is_below_product() {
    let cfg = ScenarioConfig::new(1.0 / PI, 1.0, 1, 1, 0.0)
        .unwrap()
        .with_seed(8);
    let pop = PopularityModel::from_pmf(vec![1.0]).unwrap();
    let policy = PlacementPolicy::hard_core(PlacementKind::MhcA, &cfg, vec![1.0]).unwrap();
    let opts = SimOptions {
        capacity: false,
        ..SimOptions::default()
    };
    let rep = negative_dependence_check(
        &cfg,
        &pop,
        &Strategy::from_policy(&policy),
        &[1.0],
        500,
        &opts,
    )
    .unwrap();
    assert_eq!(rep.close_pairs, 0);
    let f = &rep.per_file[0];
    // Matérn II pairs just beyond r_m are retained together slightly more
    // often than independent ones would be, so the band is compared with
    // ρ⁽²⁾/λ_t² averaged over it, weighted by area
    let band = integrate(
        |r| 2.0 * PI * r * second_order_product_density(&cfg, 1.0, r).unwrap(),
        1.0,
        2.0,
        &[],
        1e-10,
    )
    .unwrap()
        / (3.0 * PI * cfg.intensity.powi(2));
    assert!(
        (f.joint - band).abs() <= 3.0 * f.std_error,
        "{} vs {band}",
        f.joint
    );
    assert!(band > f.marginal * f.marginal);
}

#[test]
fn independent_control_is_uncorrelated() {
    let cfg = ScenarioConfig::two_file_example(1.0).with_seed(12);
    let pop = cfg.popularity().unwrap();
    let g = optimized_policy(&cfg, PlacementKind::Gcp).unwrap();
    let rep = negative_dependence_check(
        &cfg,
        &pop,
        &Strategy::from_policy(&g),
        &[1.0, 1.0],
        2000,
        &SimOptions::default(),
    )
    .unwrap();
    for f in &rep.per_file {
        assert!(
            (f.joint / (f.marginal * f.marginal) - 1.0).abs() < 0.05,
            "{f:?}"
        );
    }
}
