//! Placement optimizers.
//!
//! * [`solve_gcp`]: optimal independent marginals via the dual variable μ.
//! * [`solve_hcp`]: the Lambert-W closed form for hard-core intensities,
//!   iterated jointly with the regime boundary `m_c`.
//! * [`solve_mhc_b`]: hard-core radii that reproduce the GCP marginals.
//! * [`numeric_oracle_hcp`]: direct maximization of the MHC-A lower bound,
//!   used to cross-check the closed form.

use std::f64::consts::PI;

use log::{debug, warn};

use crate::analytic::{
    mhc_a_lower_bound, retention_probability, sufficient_intensity, PlacementKind, PlacementPolicy,
};
use crate::error::{Error, Result};
use crate::numerics::{find_root, lambert_w0, Bracket, ROOT_TOL};
use crate::scenario::{PopularityModel, ScenarioConfig};

/// Radii are capped at this multiple of the D2D radius.
pub const RADIUS_CAP_FACTOR: f64 = 1e6;

/// Marginals this close to 0 or 1 are snapped to the boundary.
const SNAP_TOL: f64 = 1e-10;

const MAX_OUTER_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct GcpSolution {
    pub marginals: Vec<f64>,
    /// Dual variable of the cache constraint.
    pub mu_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcpSolution {
    pub retained_intensity: Vec<f64>,
    pub radii: Vec<f64>,
    /// Scale constant of the closed form, or the dual price for the oracle.
    pub c_star: f64,
    /// Number of leading files in the concave regime: the largest 1-based
    /// index `m` with `r_m < R`, or 0.
    pub m_c: usize,
    /// Lower-bound hit probability at this solution.
    pub objective: f64,
    /// False when the `m_c` update cycled and the best cycle member was kept.
    pub fixed_point: bool,
}

impl HcpSolution {
    pub fn policy(&self, config: &ScenarioConfig) -> PlacementPolicy {
        PlacementPolicy {
            kind: PlacementKind::MhcA,
            marginals: self
                .retained_intensity
                .iter()
                .map(|l| (l / config.intensity).min(1.0))
                .collect(),
            exclusion_radii: Some(self.radii.clone()),
            retained_intensity: Some(self.retained_intensity.clone()),
        }
    }
}

fn check_sizes(config: &ScenarioConfig, popularity: &PopularityModel) -> Result<()> {
    config.validate()?;
    if popularity.len() != config.catalog_size {
        return Err(Error::InvalidArgument(format!(
            "popularity has {} files, scenario has {}",
            popularity.len(),
            config.catalog_size
        )));
    }
    Ok(())
}

/// Optimal independent placement.
///
/// For a dual price `μ` each marginal is `clamp(ln(p_r a / μ) / a, 0, 1)`
/// with `a = λ_t π R²`; `μ` is chosen so the marginals fill the cache. When
/// the constraint is met on a whole interval of prices (every marginal at 0
/// or 1) the geometric midpoint of that interval is reported.
pub fn solve_gcp(config: &ScenarioConfig, popularity: &PopularityModel) -> Result<GcpSolution> {
    check_sizes(config, popularity)?;
    let a = config.mean_coverage();
    let n = config.cache_size;
    let p = popularity.as_slice();
    if n >= p.len() {
        let mu_star = p
            .iter()
            .fold(f64::INFINITY, |acc, &q| acc.min(q * a * (-a).exp()));
        return Ok(GcpSolution {
            marginals: vec![1.0; p.len()],
            mu_star: mu_star.max(f64::MIN_POSITIVE),
        });
    }
    let ln_pa: Vec<f64> = p.iter().map(|&q| (q * a).ln()).collect();
    let marginals_at = |t: f64| -> Vec<f64> {
        ln_pa
            .iter()
            .map(|&l| ((l - t) / a).clamp(0.0, 1.0))
            .collect()
    };
    let excess = |t: f64| marginals_at(t).iter().sum::<f64>() - n as f64;

    // work in t = ln μ; all ones below t_lo, all zeros above t_hi
    let finite = ln_pa.iter().copied().filter(|l| l.is_finite());
    let t_lo = finite.clone().fold(f64::INFINITY, f64::min) - a - 1.0;
    let t_hi = finite.fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let bracket = Bracket::new(excess, t_lo, t_hi).map_err(|e| {
        Error::Solver(format!(
            "no dual price in [{:e}, {:e}]: {e}",
            t_lo.exp(),
            t_hi.exp()
        ))
    })?;
    let mut t = find_root(excess, bracket, ROOT_TOL)?;

    let interior = |t: f64| {
        ln_pa.iter().any(|&l| {
            let x = (l - t) / a;
            x > SNAP_TOL && x < 1.0 - SNAP_TOL
        })
    };
    if !interior(t) {
        // flat dual: take the centre of the price interval
        let left = edge(|s| excess(s) > ROOT_TOL, t_lo, t);
        let right = edge(|s| excess(s) >= -ROOT_TOL, t, t_hi);
        t = 0.5 * (left + right);
        debug!("flat GCP dual on [{:e}, {:e}]", left.exp(), right.exp());
    }
    let marginals = marginals_at(t)
        .into_iter()
        .map(|x| {
            if x < SNAP_TOL {
                0.0
            } else if x > 1.0 - SNAP_TOL {
                1.0
            } else {
                x
            }
        })
        .collect();
    Ok(GcpSolution {
        marginals,
        mu_star: t.exp(),
    })
}

/// Boundary of `{s : pred(s)}` on `[lo, hi]`, where `pred(lo)` holds and `pred`
/// switches from true to false once.
fn edge(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exclusion radius whose Matérn retention probability equals `marginal`.
///
/// Uses `C̄ = 1/p + W_0(-e^{-1/p}/p)` and falls back to bisection on the
/// monotone map when cancellation spoils the closed form. Radii beyond
/// `1e6 R` are capped with a warning.
pub fn invert_retention(config: &ScenarioConfig, marginal: f64) -> Result<f64> {
    if !(marginal > 0.0 && marginal <= 1.0) {
        return Err(Error::Domain {
            function: "invert_retention",
            value: marginal,
        });
    }
    if marginal == 1.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / marginal;
    let mut c = lambert_w0(-(-inv).exp() * inv)
        .map(|w| inv + w)
        .unwrap_or(f64::NAN);
    let residual = |c: f64| (retention_probability(c) - marginal).abs();
    if !(c.is_finite() && c > 0.0 && residual(c) <= 1e-9 && residual(c) <= 1e-9 * c) {
        // cancellation near p = 1: bisect the monotone map in log space
        let f = |u: f64| retention_probability(u.exp()) - marginal;
        let u = find_root(f, Bracket::new(f, -700.0, (2.0 * inv).ln())?, 1e-15)?;
        c = u.exp();
    }
    let r = (c.max(0.0) / (config.intensity * PI)).sqrt();
    let cap = RADIUS_CAP_FACTOR * config.d2d_radius;
    if r > cap {
        warn!("exclusion radius for marginal {marginal:e} capped at {cap}");
        return Ok(cap);
    }
    Ok(r)
}

/// Radius for a retained intensity; empty files get the capped sentinel.
fn radius_for_intensity(config: &ScenarioConfig, lambda: f64) -> Result<f64> {
    let p = lambda / config.intensity;
    if p <= 0.0 {
        return Ok(RADIUS_CAP_FACTOR * config.d2d_radius);
    }
    invert_retention(config, p.min(1.0))
}

fn concave_count(config: &ScenarioConfig, radii: &[f64]) -> usize {
    radii
        .iter()
        .rposition(|&r| r < config.d2d_radius)
        .map_or(0, |i| i + 1)
}

/// Closed-form hard-core intensities.
///
/// For the leading `m_c` files `λ e^λ = c p_r(m)`, for the rest `λ = c p_r(m)`,
/// each capped at `λ_t`; `c` fills the budget `Σ λ = N λ_t`. Starting from
/// `m_c = M`, radii are recomputed and `m_c` updated until it repeats. If the
/// update enters a cycle, the cycle member with the largest lower bound is
/// returned with `fixed_point = false`.
pub fn solve_hcp(config: &ScenarioConfig, popularity: &PopularityModel) -> Result<HcpSolution> {
    check_sizes(config, popularity)?;
    let lt = config.intensity;
    let m = popularity.len();
    let p = popularity.as_slice();
    if config.cache_size >= m {
        let lambda = vec![lt; m];
        let radii = vec![0.0; m];
        let (objective, _) = mhc_a_lower_bound(config, popularity, &lambda, &radii);
        return Ok(HcpSolution {
            retained_intensity: lambda,
            radii,
            c_star: f64::INFINITY,
            m_c: m,
            objective,
            fixed_point: true,
        });
    }
    let budget = config.cache_size as f64 * lt;

    let mut history: Vec<HcpSolution> = Vec::new();
    let mut m_c = m;
    for _ in 0..MAX_OUTER_ITER {
        let sol = closed_form_for(config, popularity, p, m_c, budget)?;
        let next = sol.m_c;
        if next == m_c {
            return Ok(HcpSolution { m_c: next, ..sol });
        }
        if let Some(start) = history.iter().position(|h| h.m_c == next) {
            // sol was computed assuming m_c but its radii say `next`
            history.push(sol);
            let best = history[start..]
                .iter()
                .max_by(|a, b| a.objective.total_cmp(&b.objective))
                .cloned()
                .expect("non-empty cycle");
            warn!(
                "m_c update cycles over {:?}; keeping the best lower bound",
                history[start..].iter().map(|h| h.m_c).collect::<Vec<_>>()
            );
            return Ok(HcpSolution {
                fixed_point: false,
                ..best
            });
        }
        history.push(sol);
        m_c = next;
    }
    Err(Error::Solver(format!(
        "m_c iteration did not settle in {MAX_OUTER_ITER} rounds"
    )))
}

/// One inner solve with a fixed regime boundary. The returned `m_c` is the
/// boundary implied by the resulting radii.
fn closed_form_for(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
    p: &[f64],
    m_c: usize,
    budget: f64,
) -> Result<HcpSolution> {
    let lt = config.intensity;
    let intensities = |c: f64| -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(i, &q)| {
                let x = c * q;
                let l = if i < m_c {
                    lambert_w0(x).unwrap_or(0.0)
                } else {
                    x
                };
                l.min(lt)
            })
            .collect()
    };
    let residual = |c: f64| intensities(c).iter().sum::<f64>() - budget;
    let mut hi = 1.0;
    while residual(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Solver("cannot bracket the scale constant".into()));
        }
    }
    let c = find_root(
        residual,
        Bracket::new(residual, 0.0, hi)?,
        ROOT_TOL * budget.max(1.0),
    )?;
    if c < 0.0 {
        return Err(Error::Infeasible(format!("negative scale constant {c}")));
    }
    let lambda = intensities(c);
    let radii = lambda
        .iter()
        .map(|&l| radius_for_intensity(config, l))
        .collect::<Result<Vec<_>>>()?;
    let (objective, _) = mhc_a_lower_bound(config, popularity, &lambda, &radii);
    Ok(HcpSolution {
        m_c: concave_count(config, &radii),
        retained_intensity: lambda,
        radii,
        c_star: c,
        objective,
        fixed_point: true,
    })
}

/// Hard-core placement whose marginals equal the optimal GCP marginals.
pub fn solve_mhc_b(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
) -> Result<PlacementPolicy> {
    let gcp = solve_gcp(config, popularity)?;
    mhc_b_policy(config, &gcp.marginals)
}

/// Hard-core radii for given marginals; files with marginal 0 get the radius
/// sentinel and zero intensity.
pub fn mhc_b_policy(config: &ScenarioConfig, marginals: &[f64]) -> Result<PlacementPolicy> {
    let radii = marginals
        .iter()
        .map(|&q| {
            if q <= 0.0 {
                Ok(RADIUS_CAP_FACTOR * config.d2d_radius)
            } else {
                invert_retention(config, q)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlacementPolicy {
        kind: PlacementKind::MhcB,
        marginals: marginals.to_vec(),
        exclusion_radii: Some(radii),
        retained_intensity: Some(marginals.iter().map(|q| q * config.intensity).collect()),
    })
}

/// Smallest intensities meeting the MHC-A sufficient condition relative to
/// the optimal GCP marginals.
///
/// Each file starts at `λ_t p_G`; if that radius reaches `R`, the linear
/// requirement `(1 - e^{-λ_t p_G π R²}) / (π R²)` is used instead, which only
/// enlarges the radius further.
pub fn sufficient_intensities(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
) -> Result<PlacementPolicy> {
    let gcp = solve_gcp(config, popularity)?;
    let mut lambda = Vec::with_capacity(gcp.marginals.len());
    let mut radii = Vec::with_capacity(gcp.marginals.len());
    for &q in &gcp.marginals {
        let mut l = config.intensity * q;
        let mut r = radius_for_intensity(config, l)?;
        if r >= config.d2d_radius {
            l = sufficient_intensity(config, q, r);
            r = radius_for_intensity(config, l)?;
        }
        lambda.push(l);
        radii.push(r);
    }
    Ok(PlacementPolicy {
        kind: PlacementKind::MhcA,
        marginals: lambda.iter().map(|l| l / config.intensity).collect(),
        exclusion_radii: Some(radii),
        retained_intensity: Some(lambda),
    })
}

/// Exhaustive regime search is used up to this many files.
const EXHAUSTIVE_LIMIT: usize = 16;

/// Direct maximizer of the MHC-A lower bound over `λ ∈ [0, λ_t]^M` with
/// `Σ λ <= N λ_t`.
///
/// The bound is piecewise in each coordinate: linear (`p λ π R²`) while the
/// implied radius is at least `R`, concave (`p (1 - e^{-λ π R²})`) above that.
/// For every assignment of files to pieces the restricted problem is solved
/// by water-filling on the dual price, and the best feasible point is kept.
/// All assignments are tried for small catalogs; larger ones try assignments
/// whose concave set is a popularity prefix or suffix.
pub fn numeric_oracle_hcp(
    config: &ScenarioConfig,
    popularity: &PopularityModel,
) -> Result<HcpSolution> {
    check_sizes(config, popularity)?;
    let m = popularity.len();
    let lt = config.intensity;
    if config.cache_size >= m {
        return solve_hcp(config, popularity);
    }
    let area = PI * config.d2d_radius * config.d2d_radius;
    // intensity at which the radius equals R
    let lambda_r = -(-config.mean_coverage()).exp_m1() / area;
    let linear_hi = lambda_r * (1.0 - 1e-12);
    let concave_lo = (lambda_r * (1.0 + 1e-12)).min(lt);
    let budget = config.cache_size as f64 * lt;
    let p = popularity.as_slice();

    let candidates: Vec<Vec<bool>> = if m <= EXHAUSTIVE_LIMIT {
        (0u32..1 << m)
            .map(|mask| (0..m).map(|i| mask >> i & 1 == 1).collect())
            .collect()
    } else {
        let mut v = Vec::with_capacity(2 * m + 2);
        for k in 0..=m {
            v.push((0..m).map(|i| i < k).collect());
            v.push((0..m).map(|i| i >= k).collect());
        }
        v
    };

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for concave in candidates {
        let Some((lambda, nu)) = water_fill(p, &concave, linear_hi, concave_lo, lt, area, budget)
        else {
            continue;
        };
        let radii = lambda
            .iter()
            .map(|&l| radius_for_intensity(config, l))
            .collect::<Result<Vec<_>>>()?;
        let (obj, _) = mhc_a_lower_bound(config, popularity, &lambda, &radii);
        if best.as_ref().map_or(true, |b| obj > b.0 + 1e-15) {
            best = Some((obj, lambda, nu));
        }
    }
    let (objective, lambda, nu) = best.expect("all-linear assignment is always feasible");
    let radii = lambda
        .iter()
        .map(|&l| radius_for_intensity(config, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(HcpSolution {
        m_c: concave_count(config, &radii),
        retained_intensity: lambda,
        radii,
        c_star: nu,
        objective,
        fixed_point: true,
    })
}

/// Maximizes `Σ p_m f_m(λ_m)` for a fixed regime assignment. Returns the
/// intensities and the dual price, or `None` if the concave minimums alone
/// exceed the budget.
fn water_fill(
    p: &[f64],
    concave: &[bool],
    linear_hi: f64,
    concave_lo: f64,
    lt: f64,
    area: f64,
    budget: f64,
) -> Option<(Vec<f64>, f64)> {
    let floor: f64 = concave
        .iter()
        .map(|&c| if c { concave_lo } else { 0.0 })
        .sum();
    if floor > budget * (1.0 + 1e-12) {
        return None;
    }
    let alloc = |nu: f64| -> Vec<f64> {
        p.iter()
            .zip(concave)
            .map(|(&q, &c)| {
                let slope = q * area;
                if c {
                    if nu <= 0.0 {
                        lt
                    } else {
                        ((slope / nu).ln() / area).clamp(concave_lo, lt)
                    }
                } else if slope > nu {
                    linear_hi
                } else {
                    0.0
                }
            })
            .collect()
    };
    let full = alloc(0.0);
    if full.iter().sum::<f64>() <= budget {
        return Some((full, 0.0));
    }
    let (mut lo, mut hi) = (0.0, p.iter().fold(0.0f64, |a, &q| a.max(q)) * area * 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alloc(mid).iter().sum::<f64>() > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut lambda = alloc(hi);
    // spend what is left on linear files, most popular first
    let mut left = budget - lambda.iter().sum::<f64>();
    for i in 0..p.len() {
        if left <= 0.0 {
            break;
        }
        if !concave[i] && lambda[i] < linear_hi {
            let add = (linear_hi - lambda[i]).min(left);
            lambda[i] += add;
            left -= add;
        }
    }
    Some((lambda, hi))
}
