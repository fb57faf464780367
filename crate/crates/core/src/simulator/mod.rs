//! Monte Carlo engine.
//!
//! Every replication draws a fresh Poisson field of caches on a window
//! buffered by the largest exclusion radius, runs a placement on it and
//! inspects the caches within the D2D radius of a receiver at the origin.
//! Replication `k` uses stream `k` of a ChaCha generator seeded with the
//! scenario seed, so results do not depend on thread scheduling.

mod dump;
mod estimate;
mod grid;
mod pattern;
mod placement;
mod stats;

pub use dump::write_realization_csv;
pub use estimate::{estimate_hit, realize, HitEstimate};
pub use pattern::{sample_ppp, PointPattern};
pub use placement::{place_independent, place_mhc, place_mpc};
pub use stats::{
    empirical_pair_density, ks_two_sample, nearest_neighbor_distances, negative_dependence_check,
    retention_fraction, utilization_measure, DependenceReport, JointRetention, PairDensity,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{PlacementKind, PlacementPolicy};
use crate::optimizers::RADIUS_CAP_FACTOR;
use crate::scenario::ScenarioConfig;

/// Switches that change how placements are simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Enforce `N` slots per cache. When off, every file is thinned on the
    /// full point set.
    pub capacity: bool,
    /// Full caches keep competing for later files (they still suppress
    /// neighbours but cannot store). Off by default: full caches drop out.
    pub full_cache_blocks: bool,
    /// Largest buffer added around the window, as a multiple of its half
    /// width. Radii beyond it see truncated neighbourhoods near the edge.
    pub max_buffer_factor: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            capacity: true,
            full_cache_blocks: false,
            max_buffer_factor: 2.0,
        }
    }
}

/// A placement to simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// The `N` most popular files everywhere.
    Mpc,
    /// Independent placement with the given marginals.
    Independent(Vec<f64>),
    /// Matérn type-II thinning with the policy's exclusion radii.
    HardCore(PlacementPolicy),
}

impl Strategy {
    pub fn from_policy(policy: &PlacementPolicy) -> Self {
        match policy.kind {
            PlacementKind::Mpc => Strategy::Mpc,
            PlacementKind::Gcp => Strategy::Independent(policy.marginals.clone()),
            PlacementKind::MhcA | PlacementKind::MhcB => Strategy::HardCore(policy.clone()),
        }
    }

    /// Buffer needed around the window so thinning near it is unbiased.
    pub(crate) fn buffer(&self, config: &ScenarioConfig, options: &SimOptions) -> f64 {
        match self {
            Strategy::HardCore(policy) => {
                let cap = options.max_buffer_factor * effective_half_width(config);
                policy
                    .radii()
                    .unwrap_or(&[])
                    .iter()
                    .copied()
                    .filter(|&r| is_placed(config, r))
                    .fold(0.0, f64::max)
                    .min(cap)
            }
            _ => 0.0,
        }
    }
}

/// Half width of the observation window; it always contains the receiver's
/// D2D disk.
pub(crate) fn effective_half_width(config: &ScenarioConfig) -> f64 {
    config.window_half_width.max(config.d2d_radius)
}

/// Files carrying the radius sentinel are never placed.
pub(crate) fn is_placed(config: &ScenarioConfig, radius: f64) -> bool {
    radius.is_finite() && radius < 0.5 * RADIUS_CAP_FACTOR * config.d2d_radius
}

/// Independent generators for replication `rep`: (pattern and placement, requests).
pub(crate) fn replication_rngs(seed: u64, rep: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut field = ChaCha8Rng::seed_from_u64(seed);
    field.set_stream(rep);
    let mut request = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    request.set_stream(rep);
    (field, request)
}
