//! Spatial statistics of simulated placements.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::estimate::run_strategy;
use super::grid::CellGrid;
use super::pattern::{sample_ppp, PointPattern};
use super::placement::place_mhc;
use super::{replication_rngs, SimOptions, Strategy};
use crate::analytic::{PlacementKind, PlacementPolicy};
use crate::error::{Error, Result};
use crate::scenario::{PopularityModel, ScenarioConfig};

/// Replications run per parallel batch by the open-ended estimators.
const BATCH: u64 = 256;

/// Single-file Matérn type-II thinning with capacity disabled.
fn single_file_pattern(config: &ScenarioConfig, r_m: f64, rep: u64) -> Result<PointPattern> {
    let one = ScenarioConfig {
        catalog_size: 1,
        cache_size: 1,
        ..config.clone()
    };
    let pop = PopularityModel::from_pmf(vec![1.0])?;
    let policy = PlacementPolicy::hard_core(PlacementKind::MhcA, &one, vec![r_m])?;
    let (mut rng, _) = replication_rngs(config.seed, rep);
    let mut pattern = sample_ppp(&one, r_m, &mut rng);
    let opts = SimOptions {
        capacity: false,
        ..SimOptions::default()
    };
    place_mhc(&one, &mut pattern, &policy, &pop, &opts, &mut rng)?;
    Ok(pattern)
}

/// Retained and total counts of caches inside the window for one file with
/// exclusion radius `r_m` and no capacity limit, accumulated over
/// replications until at least `min_points` caches were seen.
pub fn retention_fraction(
    config: &ScenarioConfig,
    r_m: f64,
    min_points: u64,
) -> Result<(u64, u64)> {
    let (mut kept, mut total, mut rep) = (0u64, 0u64, 0u64);
    while total < min_points {
        let (k, t) = (rep..rep + BATCH)
            .into_par_iter()
            .map(|i| -> Result<(u64, u64)> {
                let p = single_file_pattern(config, r_m, i)?;
                let inside: Vec<usize> = (0..p.len()).filter(|&j| p.in_window(j, 0.0)).collect();
                let k = inside
                    .iter()
                    .filter(|&&j| !p.cache_contents[j].is_empty())
                    .count() as u64;
                Ok((k, inside.len() as u64))
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        kept += k;
        total += t;
        rep += BATCH;
    }
    Ok((kept, total))
}

/// Histogram estimate of the pair density of retained caches.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensity {
    /// Bin edges, `bins + 1` values from 0 to `3 r_m`.
    pub edges: Vec<f64>,
    /// Mean pair density over each annulus.
    pub density: Vec<f64>,
    pub pair_counts: Vec<u64>,
    pub total_pairs: u64,
}

/// Pair density of single-file Matérn type-II patterns with exclusion radius
/// `r_m`, from ordered pair counts.
///
/// Reference caches are taken from the window shrunk by `3 r_m`, so every
/// partner within the histogram range is observed (border method). A bin
/// over `[a, b)` estimates `∫ ρ⁽²⁾ 2πr dr / (π (b² - a²))`.
pub fn empirical_pair_density(
    config: &ScenarioConfig,
    r_m: f64,
    replications: u64,
    bins: usize,
) -> Result<PairDensity> {
    let half = super::effective_half_width(config);
    let reach = 3.0 * r_m;
    if !(r_m > 0.0) || bins == 0 || half <= reach {
        return Err(Error::InvalidArgument(format!(
            "pair density needs r_m > 0, bins > 0 and a window wider than {reach}"
        )));
    }
    let width = reach / bins as f64;
    let counts = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<u64>> {
            let p = single_file_pattern(config, r_m, rep)?;
            let kept: Vec<[f64; 2]> = p.retained[0]
                .iter()
                .filter(|&&i| p.in_window(i, 0.0))
                .map(|&i| p.positions[i])
                .collect();
            let grid = CellGrid::new(&kept, -half, 2.0 * half, reach);
            let mut counts = vec![0u64; bins];
            for (i, &x) in kept.iter().enumerate() {
                if x[0].abs() > half - reach || x[1].abs() > half - reach {
                    continue;
                }
                grid.for_each_within(&kept, x, reach, |j, d2| {
                    if j != i {
                        let b = ((d2.sqrt() / width) as usize).min(bins - 1);
                        counts[b] += 1;
                    }
                });
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0; bins],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    let inner = 2.0 * (half - reach);
    let area = inner * inner * replications as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let density = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / (area * PI * (edges[k + 1].powi(2) - edges[k].powi(2))))
        .collect();
    Ok(PairDensity {
        edges,
        density,
        total_pairs: counts.iter().sum(),
        pair_counts: counts,
    })
}

/// Joint retention of one file at separations in `(r_m, 2 r_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRetention {
    pub file: usize,
    /// Fraction of caches in the window storing the file.
    pub marginal: f64,
    /// Cache pairs at separation in `(r_m, 2 r_m)`.
    pub pairs: u64,
    /// Fraction of those pairs where both caches store the file.
    pub joint: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    /// Pairs of caches closer than the exclusion radius that store the same
    /// file, over all files and replications.
    pub close_pairs: u64,
    pub per_file: Vec<JointRetention>,
}

/// Counts hard-core violations and compares joint with marginal retention.
///
/// `radii` sets the separation band per file; for a hard-core strategy these
/// are its exclusion radii, for an independent control any radii can be used.
pub fn negative_dependence_check(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    strategy: &Strategy,
    radii: &[f64],
    replications: u64,
    options: &SimOptions,
) -> Result<DependenceReport> {
    let m = popularity.len();
    if radii.len() != m {
        return Err(Error::InvalidArgument(
            "one radius per file required".into(),
        ));
    }
    let buffer = strategy.buffer(config, options);
    // per file: close, kept, seen, pairs, both
    let zero = || vec![[0u64; 5]; m];
    let tallies = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<[u64; 5]>> {
            let (mut rng, _) = replication_rngs(config.seed, rep);
            let mut p = sample_ppp(config, buffer, &mut rng);
            run_strategy(config, popularity, strategy, options, &mut p, &mut rng)?;
            let inside: Vec<usize> = (0..p.len()).filter(|&i| p.in_window(i, 0.0)).collect();
            let pts: Vec<[f64; 2]> = inside.iter().map(|&i| p.positions[i]).collect();
            let mut out = zero();
            for (f, t) in out.iter_mut().enumerate() {
                let r = radii[f];
                if !super::is_placed(config, r) {
                    continue;
                }
                // hard-core violations over the whole sampled square
                let held: Vec<[f64; 2]> = p.retained[f].iter().map(|&i| p.positions[i]).collect();
                if r > 0.0 {
                    let g = CellGrid::new(&held, -(p.half_width + p.buffer), p.side(), r);
                    for (i, &x) in held.iter().enumerate() {
                        g.for_each_within(&held, x, r * (1.0 - 1e-12), |j, _| {
                            t[0] += (j > i) as u64
                        });
                    }
                }
                let has: Vec<bool> = inside
                    .iter()
                    .map(|&i| p.cache_contents[i].contains(&f))
                    .collect();
                t[1] = has.iter().filter(|&&h| h).count() as u64;
                t[2] = inside.len() as u64;
                if r > 0.0 {
                    let g = CellGrid::new(&pts, -p.half_width, 2.0 * p.half_width, 2.0 * r);
                    for (i, &x) in pts.iter().enumerate() {
                        g.for_each_within(&pts, x, 2.0 * r, |j, d2| {
                            if j > i && d2 > r * r && d2 < 4.0 * r * r {
                                t[3] += 1;
                                t[4] += (has[i] && has[j]) as u64;
                            }
                        });
                    }
                }
            }
            Ok(out)
        })
        .try_reduce(zero, |a, b| {
            Ok(a.iter()
                .zip(&b)
                .map(|(x, y)| std::array::from_fn(|k| x[k] + y[k]))
                .collect())
        })?;
    let close_pairs = tallies.iter().map(|t| t[0]).sum();
    let per_file = tallies
        .iter()
        .enumerate()
        .map(|(file, t)| {
            let marginal = if t[2] > 0 {
                t[1] as f64 / t[2] as f64
            } else {
                0.0
            };
            let joint = if t[3] > 0 {
                t[4] as f64 / t[3] as f64
            } else {
                0.0
            };
            let std_error = if t[3] > 0 {
                (joint * (1.0 - joint) / t[3] as f64).sqrt()
            } else {
                0.0
            };
            JointRetention {
                file,
                marginal,
                pairs: t[3],
                joint,
                std_error,
            }
        })
        .collect();
    Ok(DependenceReport {
        close_pairs,
        per_file,
    })
}

/// Mean over replications of stored files divided by `N` times the number
/// of caches in the window. Replications without caches are skipped.
pub fn utilization_measure(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    strategy: &Strategy,
    replications: u64,
    options: &SimOptions,
) -> Result<f64> {
    let buffer = strategy.buffer(config, options);
    let slots = config.cache_size as f64;
    let (sum, count) = (0..replications)
        .into_par_iter()
        .map(|rep| -> Result<(f64, u64)> {
            let (mut rng, _) = replication_rngs(config.seed, rep);
            let mut p = sample_ppp(config, buffer, &mut rng);
            run_strategy(config, popularity, strategy, options, &mut p, &mut rng)?;
            let inside: Vec<usize> = (0..p.len()).filter(|&i| p.in_window(i, 0.0)).collect();
            if inside.is_empty() {
                return Ok((0.0, 0));
            }
            let stored: usize = inside.iter().map(|&i| p.cache_contents[i].len()).sum();
            Ok((stored as f64 / (slots * inside.len() as f64), 1))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        // fixed summation order keeps the result reproducible
        .fold((0.0, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));
    if count == 0 {
        return Err(Error::InvalidArgument(
            "no caches in any replication".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Nearest-neighbour distance for each cache storing `file` inside the
/// window shrunk by `margin`, measured to all caches storing it.
pub fn nearest_neighbor_distances(pattern: &PointPattern, file: usize, margin: f64) -> Vec<f64> {
    let held = &pattern.retained[file];
    held.iter()
        .filter(|&&i| pattern.in_window(i, margin))
        .filter_map(|&i| {
            let x = pattern.positions[i];
            held.iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let y = pattern.positions[j];
                    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
                })
                .min_by(f64::total_cmp)
        })
        .collect()
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    if a.is_empty() || b.is_empty() {
        return (0.0, 1.0);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_tail(lambda))
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2 k² λ²}`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
