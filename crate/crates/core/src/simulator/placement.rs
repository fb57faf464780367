use rand::Rng;

use super::grid::CellGrid;
use super::pattern::PointPattern;
use super::{is_placed, SimOptions};
use crate::analytic::PlacementPolicy;
use crate::error::{Error, Result};
use crate::scenario::{PopularityModel, ScenarioConfig};

/// Matérn type-II placement, one file at a time in decreasing popularity.
///
/// For each file every competing cache draws a fresh uniform mark and an
/// eligible cache stores the file iff its mark is the lowest among competing
/// caches within the file's exclusion radius (equal marks fall back to the
/// cache index). With capacity on, caches holding `N` files are no longer
/// eligible; they stop competing unless `full_cache_blocks` is set.
pub fn place_mhc<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pattern: &mut PointPattern,
    policy: &PlacementPolicy,
    popularity: &PopularityModel,
    options: &SimOptions,
    rng: &mut R,
) -> Result<()> {
    let radii = policy.radii().ok_or_else(|| {
        Error::InvalidArgument("hard-core placement needs exclusion radii".into())
    })?;
    if radii.len() != popularity.len() {
        return Err(Error::InvalidArgument(
            "one radius per file required".into(),
        ));
    }
    pattern.clear_contents();
    let n = pattern.len();
    let lo = -(pattern.half_width + pattern.buffer);
    let side = pattern.side();
    let cap = config.cache_size;

    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| {
        popularity
            .prob(b)
            .total_cmp(&popularity.prob(a))
            .then(a.cmp(&b))
    });

    let mut marks = vec![0.0f64; n];
    let mut eligible = vec![true; n];
    let mut keep = Vec::with_capacity(n);
    for file in order {
        let r = radii[file];
        if !is_placed(config, r) || policy.marginals[file] <= 0.0 {
            continue;
        }
        for (i, e) in eligible.iter_mut().enumerate() {
            *e = !options.capacity || pattern.cache_contents[i].len() < cap;
        }
        for m in marks.iter_mut() {
            *m = rng.random::<f64>();
        }
        let competes = |j: usize| eligible[j] || options.full_cache_blocks;
        keep.clear();
        if r > 0.0 {
            let grid = CellGrid::new(&pattern.positions, lo, side, r);
            for i in 0..n {
                if !eligible[i] {
                    continue;
                }
                let mut lowest = true;
                grid.for_each_within(&pattern.positions, pattern.positions[i], r, |j, _| {
                    if j != i && competes(j) && (marks[j], j) < (marks[i], i) {
                        lowest = false;
                    }
                });
                if lowest {
                    keep.push(i);
                }
            }
        } else {
            keep.extend((0..n).filter(|&i| eligible[i]));
        }
        for &i in &keep {
            pattern.store(i, file);
        }
    }
    Ok(())
}

/// Independent placement with exact per-file marginals.
///
/// The marginals are laid end to end on `[0, Σ q)`; one uniform offset `U`
/// per cache selects the files covering `U, U + 1, ..., U + N - 1`. Each file
/// is picked with probability `q_m` and never twice.
pub fn place_independent<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    pattern: &mut PointPattern,
    marginals: &[f64],
    rng: &mut R,
) -> Result<()> {
    let total: f64 = marginals.iter().sum();
    if marginals.iter().any(|q| !(0.0..=1.0).contains(q)) || total > config.cache_size as f64 + 1e-9
    {
        return Err(Error::Infeasible(format!(
            "marginals summing to {total} do not fit {} slots",
            config.cache_size
        )));
    }
    pattern.clear_contents();
    let mut cum = Vec::with_capacity(marginals.len() + 1);
    cum.push(0.0);
    for q in marginals {
        cum.push(cum.last().unwrap() + q);
    }
    for i in 0..pattern.len() {
        let u: f64 = rng.random();
        let mut k = 0.0;
        let mut file = 0;
        while u + k < total && file < marginals.len() {
            let target = u + k;
            while file < marginals.len() && cum[file + 1] <= target {
                file += 1;
            }
            if file == marginals.len() {
                break;
            }
            pattern.store(i, file);
            file += 1;
            k += 1.0;
        }
    }
    Ok(())
}

/// The `N` most popular files in every cache.
pub fn place_mpc(config: &ScenarioConfig, pattern: &mut PointPattern) {
    pattern.clear_contents();
    let n = config.cache_size.min(config.catalog_size);
    for i in 0..pattern.len() {
        for file in 0..n {
            pattern.store(i, file);
        }
    }
}
