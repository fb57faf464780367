//! Closed-form hit probabilities, densities and bounds.
//!
//! Everything here is a pure function of a [`ScenarioConfig`], a demand law
//! and a placement. Writing `a = λ_t π R²` for the mean coverage number and
//! `C̄ = λ_t π r²` for the mean number of neighbours inside an exclusion disk,
//! a Matérn type-II thinning with radius `r` keeps a point with probability
//! `(1 - e^{-C̄}) / C̄`.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_radial};
use crate::scenario::{PopularityModel, ScenarioConfig};

/// Relative tolerance of the radial integrals.
const QUAD_TOL: f64 = 1e-10;

/// Slack allowed on the relaxed cache constraint `Σ p_c <= N`.
pub const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlacementKind {
    Mpc,
    Gcp,
    MhcA,
    MhcB,
}

impl PlacementKind {
    pub fn is_hard_core(self) -> bool {
        matches!(self, PlacementKind::MhcA | PlacementKind::MhcB)
    }
}

/// Per-file caching marginals, plus radii and retained intensities for the
/// hard-core variants.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementPolicy {
    pub kind: PlacementKind,
    pub marginals: Vec<f64>,
    pub exclusion_radii: Option<Vec<f64>>,
    pub retained_intensity: Option<Vec<f64>>,
}

impl PlacementPolicy {
    /// The `N` most popular files in every cache.
    pub fn mpc(config: &ScenarioConfig) -> Self {
        let marginals = (0..config.catalog_size)
            .map(|m| if m < config.cache_size { 1.0 } else { 0.0 })
            .collect();
        PlacementPolicy {
            kind: PlacementKind::Mpc,
            marginals,
            exclusion_radii: None,
            retained_intensity: None,
        }
    }

    pub fn gcp(marginals: Vec<f64>) -> Self {
        PlacementPolicy {
            kind: PlacementKind::Gcp,
            marginals,
            exclusion_radii: None,
            retained_intensity: None,
        }
    }

    /// Hard-core policy whose marginals follow from the exclusion radii.
    pub fn hard_core(
        kind: PlacementKind,
        config: &ScenarioConfig,
        radii: Vec<f64>,
    ) -> Result<Self> {
        if !kind.is_hard_core() {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} has no exclusion radii"
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("exclusion radius {r}")));
        }
        let marginals: Vec<f64> = radii
            .iter()
            .map(|&r| retention_marginal(config, r))
            .collect();
        let retained = marginals.iter().map(|p| p * config.intensity).collect();
        Ok(PlacementPolicy {
            kind,
            marginals,
            exclusion_radii: Some(radii),
            retained_intensity: Some(retained),
        })
    }

    pub fn radii(&self) -> Option<&[f64]> {
        self.exclusion_radii.as_deref()
    }

    pub fn intensities(&self) -> Option<&[f64]> {
        self.retained_intensity.as_deref()
    }

    /// Checks ranges, the relaxed budget and, for hard-core kinds, that the
    /// marginals agree with the radii.
    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        if self.marginals.len() != config.catalog_size {
            return Err(Error::InvalidArgument(format!(
                "{} marginals for a catalog of {}",
                self.marginals.len(),
                config.catalog_size
            )));
        }
        if let Some(p) = self.marginals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "marginal {p} outside [0, 1]"
            )));
        }
        let total: f64 = self.marginals.iter().sum();
        if total > config.cache_size as f64 + BUDGET_TOL {
            return Err(Error::Infeasible(format!(
                "marginals sum to {total} with {} slots",
                config.cache_size
            )));
        }
        match (&self.exclusion_radii, &self.retained_intensity) {
            (Some(radii), Some(lambda)) => {
                for ((&r, &p), &l) in radii.iter().zip(&self.marginals).zip(lambda) {
                    let expected = retention_marginal(config, r);
                    if (expected - p).abs() > 1e-9
                        || (l - p * config.intensity).abs() > 1e-9 * config.intensity
                    {
                        return Err(Error::InvalidArgument(format!(
                            "radius {r} implies marginal {expected}, policy has {p}"
                        )));
                    }
                }
                Ok(())
            }
            (None, None) if !self.kind.is_hard_core() => Ok(()),
            _ => Err(Error::InvalidArgument(format!(
                "{:?} policy with inconsistent radius data",
                self.kind
            ))),
        }
    }
}

/// How the correction term of the upper bound integrates the pair density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpperBoundMeasure {
    /// Area element `2πx dx`, matching the Campbell count.
    #[default]
    Area,
    /// Plain `dx` as printed next to the bound.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBounds {
    pub lower: f64,
    pub upper: f64,
    /// Set when the value is exact rather than a bracket.
    pub exact: Option<f64>,
    /// A linear-regime term exceeded 1 and was clamped.
    pub clamped: bool,
}

impl AnalyticBounds {
    pub fn exact(value: f64) -> Self {
        AnalyticBounds {
            lower: value,
            upper: value,
            exact: Some(value),
            clamped: false,
        }
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

/// `(1 - e^{-c}) / c`, with the limit 1 at `c = 0`.
pub fn retention_probability(mean_neighbors: f64) -> f64 {
    let c = mean_neighbors;
    if c < 1e-8 {
        1.0 - 0.5 * c
    } else {
        -(-c).exp_m1() / c
    }
}

/// Matérn type-II retention probability for exclusion radius `r`.
pub fn retention_marginal(config: &ScenarioConfig, r: f64) -> f64 {
    retention_probability(config.intensity * PI * r * r)
}

/// Retained intensity `λ_t (1 - e^{-C̄}) / C̄` for exclusion radius `r`.
pub fn retained_intensity(config: &ScenarioConfig, r: f64) -> f64 {
    config.intensity * retention_marginal(config, r)
}

/// Area of the union of two disks of radius `r_m` whose centres are `r` apart.
pub fn union_area(r_m: f64, r: f64) -> f64 {
    if r >= 2.0 * r_m {
        return 2.0 * PI * r_m * r_m;
    }
    let half = 0.5 * r;
    2.0 * PI * r_m * r_m - 2.0 * r_m * r_m * (half / r_m).acos()
        + r * (r_m * r_m - half * half).sqrt()
}

/// MPC: `(1 - e^{-a}) Σ_{m<N} p_r(m)`.
pub fn hit_mpc(config: &ScenarioConfig, popularity: &PopularityModel) -> AnalyticBounds {
    let covered = -(-config.mean_coverage()).exp_m1();
    AnalyticBounds::exact(covered * popularity.head_mass(config.cache_size))
}

/// Independent placement: `Σ p_r(m) (1 - e^{-a p_c(m)})`.
pub fn hit_gcp(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    marginals: &[f64],
) -> AnalyticBounds {
    let a = config.mean_coverage();
    let hit = popularity
        .as_slice()
        .iter()
        .zip(marginals)
        .map(|(p, q)| p * -(-a * q).exp_m1())
        .sum::<f64>();
    AnalyticBounds::exact(hit.clamp(0.0, 1.0))
}

/// Per-file coverage probability used by the lower bound.
///
/// Files whose exclusion radius is below `R` use `1 - e^{-λ π R²}`; the rest
/// can have at most one holder in range, giving `λ π R²` (clamped to 1).
/// Returns the value and whether clamping happened.
fn coverage_term(lambda: f64, radius: f64, d2d_radius: f64) -> (f64, bool) {
    let x = lambda * PI * d2d_radius * d2d_radius;
    if radius < d2d_radius {
        (-(-x).exp_m1(), false)
    } else if x > 1.0 {
        (1.0, true)
    } else {
        (x, false)
    }
}

/// Lower bound on the MHC-A hit probability from retained intensities and
/// radii. The second value reports whether any term was clamped.
pub fn mhc_a_lower_bound(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    intensities: &[f64],
    radii: &[f64],
) -> (f64, bool) {
    let mut total = 0.0;
    let mut clamped = false;
    for ((p, &l), &r) in popularity.as_slice().iter().zip(intensities).zip(radii) {
        let (term, c) = coverage_term(l, r, config.d2d_radius);
        total += p * term;
        clamped |= c;
    }
    (total.min(1.0), clamped)
}

/// Largest file index (0-based) with `r_m < R`, if any.
pub fn regime_boundary(config: &ScenarioConfig, radii: &[f64]) -> Option<usize> {
    radii.iter().rposition(|&r| r < config.d2d_radius)
}

/// Lower and upper bounds on the MHC-A hit probability.
///
/// The upper bound adds, for each file with `r_m < R`, the mean number of
/// further holders of the file within `R` of a typical cache. The result is
/// clamped into `[lower, 1]`.
pub fn hit_mhc_a_bounds(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    policy: &PlacementPolicy,
    measure: UpperBoundMeasure,
) -> Result<AnalyticBounds> {
    let (radii, lambda) = match (policy.radii(), policy.intensities()) {
        (Some(r), Some(l)) => (r, l),
        _ => {
            return Err(Error::InvalidArgument(
                "MHC bounds need radii and intensities".into(),
            ))
        }
    };
    let (lower, clamped) = mhc_a_lower_bound(config, popularity, lambda, radii);
    if clamped {
        warn!(
            "linear coverage term exceeded 1 and was clamped (R = {})",
            config.d2d_radius
        );
    }
    let big_r = config.d2d_radius;
    let mut correction = 0.0;
    for (p, &r_m) in popularity.as_slice().iter().zip(radii) {
        if r_m >= big_r || *p == 0.0 {
            continue;
        }
        let integral = match measure {
            UpperBoundMeasure::Area => integrate_radial(
                |x| pair_density(config, r_m, x),
                r_m,
                big_r,
                &[2.0 * r_m],
                QUAD_TOL,
            )?,
            UpperBoundMeasure::Linear => integrate(
                |x| pair_density(config, r_m, x),
                r_m,
                big_r,
                &[2.0 * r_m],
                QUAD_TOL,
            )?,
        };
        correction += p * integral / config.intensity;
    }
    let upper = (lower + correction).clamp(lower, 1.0);
    Ok(AnalyticBounds {
        lower,
        upper,
        exact: None,
        clamped,
    })
}

/// Second-order product density of the Matérn type-II process at distance
/// `r` for exclusion radius `r_m`.
pub fn second_order_product_density(config: &ScenarioConfig, r_m: f64, r: f64) -> Result<f64> {
    if !(r_m > 0.0 && r_m.is_finite()) || !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pair density at r = {r}, r_m = {r_m}"
        )));
    }
    Ok(pair_density(config, r_m, r))
}

fn pair_density(config: &ScenarioConfig, r_m: f64, r: f64) -> f64 {
    if r <= r_m {
        return 0.0;
    }
    let lambda = config.intensity;
    let disk = PI * r_m * r_m;
    if r >= 2.0 * r_m {
        let l = retained_intensity(config, r_m);
        return l * l;
    }
    // 2(V a - D b) / (D V (V - D)) with a = 1 - e^{-λD}, b = 1 - e^{-λV}
    // equals 2λ² q(λD, λV); V - D >= 1.9 r_m², so q carries no cancellation
    let v = union_area(r_m, r);
    2.0 * lambda * lambda * retention_slope(lambda * disk, lambda * v)
}

/// `(φ(x) - φ(y)) / (y - x)` for `φ(x) = (1 - e^{-x}) / x` and `0 <= x < y`.
fn retention_slope(x: f64, y: f64) -> f64 {
    if y > 1.0 {
        return (retention_probability(x) - retention_probability(y)) / (y - x);
    }
    // φ(x) = Σ (-x)^k / (k+1)!, and (x^k - y^k) / (x - y) = Σ_j x^j y^{k-1-j}
    let mut h = 1.0;
    let mut y_pow = 1.0;
    let mut fact = 2.0;
    let mut sum = 0.0f64;
    for k in 1..40 {
        let term = h / fact;
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 * sum.abs() {
            break;
        }
        y_pow *= y;
        h = x * h + y_pow;
        fact *= (k + 2) as f64;
    }
    sum
}

/// Mean number of caches holding a file within `R` of a typical cache,
/// `λ_t^{-1} ∫_{B_0(R)} ρ⁽²⁾`.
pub fn campbell_neighbor_count(config: &ScenarioConfig, r_m: f64) -> Result<f64> {
    if !(r_m > 0.0 && r_m.is_finite()) {
        return Err(Error::InvalidArgument(format!("exclusion radius {r_m}")));
    }
    let big_r = config.d2d_radius;
    if big_r <= r_m {
        return Ok(0.0);
    }
    let integral = integrate_radial(
        |x| pair_density(config, r_m, x),
        r_m,
        big_r,
        &[2.0 * r_m],
        QUAD_TOL,
    )?;
    Ok(integral / config.intensity)
}

/// MHC-B hit probability for GCP marginals and the radii that realise them.
pub fn hit_mhc_b(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    marginals_gcp: &[f64],
    radii_b: &[f64],
) -> AnalyticBounds {
    let lambda: Vec<f64> = marginals_gcp.iter().map(|p| p * config.intensity).collect();
    let (hit, clamped) = mhc_a_lower_bound(config, popularity, &lambda, radii_b);
    if clamped {
        warn!(
            "MHC-B linear coverage term clamped to 1 (R = {})",
            config.d2d_radius
        );
    }
    AnalyticBounds {
        clamped,
        ..AnalyticBounds::exact(hit)
    }
}

/// Mean number of occupied slots within `R`, relative to `N λ_t π R²`.
///
/// Both regimes reduce to `λ_MA(m) π R²` per file (for `r_m < R` the packing
/// bound `(1 - e^{-C̄})(R/r_m)²` equals it), so the ratio is
/// `Σ λ_MA / (N λ_t)`.
pub fn underutilization_ratio(config: &ScenarioConfig, policy: &PlacementPolicy) -> Result<f64> {
    let lambda = policy
        .intensities()
        .ok_or_else(|| Error::InvalidArgument("utilization needs retained intensities".into()))?;
    let area = PI * config.d2d_radius * config.d2d_radius;
    let occupied: f64 = lambda.iter().map(|l| l * area).sum();
    Ok(occupied / (config.cache_size as f64 * config.mean_coverage()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientCondition {
    pub per_file: Vec<bool>,
    /// `Σ λ_MA <= N λ_t`.
    pub feasible: bool,
}

impl SufficientCondition {
    pub fn all(&self) -> bool {
        self.feasible && self.per_file.iter().all(|&b| b)
    }
}

/// Per-file test of the retained intensities that guarantee MHC-A beats GCP.
pub fn sufficient_condition_holds(
    config: &ScenarioConfig,
    policy: &PlacementPolicy,
    marginals_gcp: &[f64],
) -> Result<SufficientCondition> {
    let (radii, lambda) = match (policy.radii(), policy.intensities()) {
        (Some(r), Some(l)) => (r, l),
        _ => {
            return Err(Error::InvalidArgument(
                "sufficient condition needs an MHC policy".into(),
            ))
        }
    };
    let tol = 1e-12 * config.intensity;
    let per_file = radii
        .iter()
        .zip(lambda)
        .zip(marginals_gcp)
        .map(|((&r, &l), &p)| l + tol >= sufficient_intensity(config, p, r))
        .collect();
    let total: f64 = lambda.iter().sum();
    let feasible = total <= config.cache_size as f64 * config.intensity * (1.0 + BUDGET_TOL);
    Ok(SufficientCondition { per_file, feasible })
}

/// Smallest retained intensity meeting the sufficient condition for a file
/// with GCP marginal `p` and exclusion radius `r`.
pub fn sufficient_intensity(config: &ScenarioConfig, p: f64, r: f64) -> f64 {
    let big_r = config.d2d_radius;
    if r < big_r {
        config.intensity * p
    } else {
        let area = PI * big_r * big_r;
        -(-config.intensity * p * area).exp_m1() / area
    }
}

/// Asymptotic variance density of the retained count for exclusion radius
/// `r_m`: `λ_MA - 4 λ_MA (1 - e^{-λ_t π r_m²}) + 2π ∫_{r_m}^{2r_m} ρ⁽²⁾(r) r dr`.
pub fn mhc_variance(config: &ScenarioConfig, r_m: f64) -> Result<f64> {
    if !(r_m > 0.0 && r_m.is_finite()) {
        return Err(Error::InvalidArgument(format!("exclusion radius {r_m}")));
    }
    let l = retained_intensity(config, r_m);
    let c = config.intensity * PI * r_m * r_m;
    let integral = integrate_radial(
        |x| pair_density(config, r_m, x),
        r_m,
        2.0 * r_m,
        &[],
        QUAD_TOL,
    )?;
    Ok(l - 4.0 * l * -(-c).exp_m1() + integral)
}
