use rand::Rng;
use rayon::prelude::*;

use super::pattern::{sample_ppp, PointPattern};
use super::placement::{place_independent, place_mhc, place_mpc};
use super::{replication_rngs, SimOptions, Strategy};
use crate::error::{Error, Result};
use crate::scenario::{PopularityModel, ScenarioConfig};

/// Monte Carlo estimate of the hit probability at the typical receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct HitEstimate {
    pub mean: f64,
    /// Binomial standard error `sqrt(mean (1 - mean) / replications)`.
    pub std_error: f64,
    pub replications: u64,
    /// Probability that each file is available within the D2D radius, which
    /// is the hit rate conditional on requesting that file.
    pub per_file_hit: Vec<f64>,
}

impl HitEstimate {
    fn from_counts(hits: u64, available: &[u64], replications: u64) -> Self {
        let n = replications as f64;
        let mean = hits as f64 / n;
        HitEstimate {
            mean,
            std_error: (mean * (1.0 - mean) / n).sqrt(),
            replications,
            per_file_hit: available.iter().map(|&a| a as f64 / n).collect(),
        }
    }
}

/// Runs `strategy` on `replications` independent fields and records, for a
/// request drawn from `popularity`, whether a cache within the D2D radius of
/// the origin stores it. Every replication resamples the field, the
/// placement and the request.
///
/// Results are identical for identical inputs regardless of thread count.
pub fn estimate_hit(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    strategy: &Strategy,
    replications: u64,
    options: &SimOptions,
) -> Result<HitEstimate> {
    if replications == 0 {
        return Err(Error::InvalidArgument(
            "at least one replication required".into(),
        ));
    }
    let m = popularity.len();
    let buffer = strategy.buffer(config, options);
    let (hits, available) = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(u64, Vec<u64>)> {
            let (mut field, mut request) = replication_rngs(config.seed, rep);
            let mut pattern = sample_ppp(config, buffer, &mut field);
            run_strategy(
                config,
                popularity,
                strategy,
                options,
                &mut pattern,
                &mut field,
            )?;
            let avail: Vec<u64> = (0..m)
                .map(|f| pattern.holds_within(f, [0.0, 0.0], config.d2d_radius) as u64)
                .collect();
            let file = popularity.sample(&mut request);
            Ok((avail[file], avail))
        })
        .try_reduce(
            || (0, vec![0; m]),
            |a, b| {
                Ok((
                    a.0 + b.0,
                    a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect(),
                ))
            },
        )?;
    Ok(HitEstimate::from_counts(hits, &available, replications))
}

/// The field and placement that replication `rep` of [`estimate_hit`] uses.
pub fn realize(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    strategy: &Strategy,
    rep: u64,
    options: &SimOptions,
) -> Result<PointPattern> {
    let (mut field, _) = replication_rngs(config.seed, rep);
    let mut pattern = sample_ppp(config, strategy.buffer(config, options), &mut field);
    run_strategy(config, popularity, strategy, options, &mut pattern, &mut field)?;
    Ok(pattern)
}

pub(crate) fn run_strategy<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    strategy: &Strategy,
    options: &SimOptions,
    pattern: &mut PointPattern,
    rng: &mut R,
) -> Result<()> {
    match strategy {
        Strategy::Mpc => {
            place_mpc(config, pattern);
            Ok(())
        }
        Strategy::Independent(q) => place_independent(config, pattern, q, rng),
        Strategy::HardCore(policy) => place_mhc(config, pattern, policy, popularity, options, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{hit_gcp, hit_mpc};

    #[test]
    fn mpc_full_catalog_is_coverage() {
        let cfg = ScenarioConfig {
            cache_size: 2,
            ..ScenarioConfig::two_file_example(1.0)
        }
        .with_window(2.0);
        let pop = cfg.popularity().unwrap();
        let est = estimate_hit(&cfg, &pop, &Strategy::Mpc, 20_000, &SimOptions::default()).unwrap();
        let want = hit_mpc(&cfg, &pop).lower;
        assert!(
            (est.mean - want).abs() < 3.0 * est.std_error,
            "{} vs {want}",
            est.mean
        );
    }

    #[test]
    fn gcp_matches_closed_form() {
        let cfg = ScenarioConfig::two_file_example(1.0)
            .with_window(2.0)
            .with_seed(3);
        let pop = cfg.popularity().unwrap();
        let q = vec![0.8466, 0.1534];
        let est = estimate_hit(
            &cfg,
            &pop,
            &Strategy::Independent(q.clone()),
            20_000,
            &SimOptions::default(),
        )
        .unwrap();
        let want = hit_gcp(&cfg, &pop, &q).lower;
        assert!((est.mean - want).abs() < 3.0 * est.std_error);
        let a = cfg.mean_coverage();
        assert!((est.per_file_hit[0] - (1.0 - (-a * q[0]).exp())).abs() < 0.02);
    }

    #[test]
    fn bitwise_reproducible() {
        let cfg = ScenarioConfig::two_file_example(1.0)
            .with_window(3.0)
            .with_seed(77);
        let pop = cfg.popularity().unwrap();
        let policy = crate::optimizers::solve_mhc_b(&cfg, &pop).unwrap();
        let s = Strategy::from_policy(&policy);
        let a = estimate_hit(&cfg, &pop, &s, 500, &SimOptions::default()).unwrap();
        let b = estimate_hit(&cfg, &pop, &s, 500, &SimOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = estimate_hit(
            &cfg.clone().with_seed(78),
            &pop,
            &s,
            500,
            &SimOptions::default(),
        )
        .unwrap();
        assert_ne!(a.per_file_hit, c.per_file_hit);
    }

    #[test]
    fn zero_replications_rejected() {
        let cfg = ScenarioConfig::two_file_example(1.0);
        let pop = cfg.popularity().unwrap();
        assert!(estimate_hit(&cfg, &pop, &Strategy::Mpc, 0, &SimOptions::default()).is_err());
    }
}
