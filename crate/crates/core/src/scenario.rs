//! Model parameters, Zipf demand and the Poisson coverage number.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Tolerance on probability normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// All parameters of a D2D caching scenario.
///
/// Files are indexed from 0 in code; index 0 is the most popular file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Transmitter (cache) density per unit area.
    pub intensity: f64,
    /// Communication radius of a D2D link.
    pub d2d_radius: f64,
    /// Number of files in the catalog.
    pub catalog_size: usize,
    /// Slots per cache.
    pub cache_size: usize,
    /// Zipf exponent of the request distribution.
    pub zipf_exponent: f64,
    /// Half side of the simulation window `[-D, D]^2`.
    pub window_half_width: f64,
    /// Root seed for every random stream.
    pub seed: u64,
}

const KEYS: [&str; 7] = [
    "intensity",
    "d2d_radius",
    "catalog_size",
    "cache_size",
    "zipf_exponent",
    "window_half_width",
    "seed",
];

impl ScenarioConfig {
    pub fn new(
        intensity: f64,
        d2d_radius: f64,
        catalog_size: usize,
        cache_size: usize,
        zipf_exponent: f64,
    ) -> Result<Self> {
        let cfg = ScenarioConfig {
            intensity,
            d2d_radius,
            catalog_size,
            cache_size,
            zipf_exponent,
            window_half_width: 10.0,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Two files, one slot, `p_r = (2/3, 1/3)` and `intensity * pi = 1`.
    pub fn two_file_example(d2d_radius: f64) -> Self {
        ScenarioConfig {
            intensity: 1.0 / PI,
            d2d_radius,
            catalog_size: 2,
            cache_size: 1,
            zipf_exponent: 1.0,
            window_half_width: 10.0,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_window(mut self, half_width: f64) -> Self {
        self.window_half_width = half_width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("intensity", self.intensity),
            ("d2d_radius", self.d2d_radius),
            ("window_half_width", self.window_half_width),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.catalog_size == 0 {
            return Err(Error::InvalidArgument(
                "catalog_size must be at least 1".into(),
            ));
        }
        if self.cache_size == 0 || self.cache_size > self.catalog_size {
            return Err(Error::InvalidArgument(format!(
                "cache_size must lie in 1..={}, got {}",
                self.catalog_size, self.cache_size
            )));
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zipf_exponent must be non-negative, got {}",
                self.zipf_exponent
            )));
        }
        Ok(())
    }

    /// Mean number of caches covering a receiver, `intensity * pi * R^2`.
    pub fn mean_coverage(&self) -> f64 {
        self.intensity * PI * self.d2d_radius * self.d2d_radius
    }

    /// Area of the coverage disk, `pi * R^2`.
    pub fn coverage_area(&self) -> f64 {
        PI * self.d2d_radius * self.d2d_radius
    }

    pub fn popularity(&self) -> Result<PopularityModel> {
        zipf_pmf(self.catalog_size, self.zipf_exponent)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |what: &str| Error::Config {
            line,
            message: format!("cannot parse {key} = {value:?} as {what}"),
        };
        match key {
            "intensity" => self.intensity = value.parse().map_err(|_| bad("a real"))?,
            "d2d_radius" => self.d2d_radius = value.parse().map_err(|_| bad("a real"))?,
            "catalog_size" => self.catalog_size = value.parse().map_err(|_| bad("an integer"))?,
            "cache_size" => self.cache_size = value.parse().map_err(|_| bad("an integer"))?,
            "zipf_exponent" => self.zipf_exponent = value.parse().map_err(|_| bad("a real"))?,
            "window_half_width" => {
                self.window_half_width = value.parse().map_err(|_| bad("a real"))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {key:?}"),
                });
            }
        }
        Ok(())
    }
}

/// Parses the `key = value` scenario format. Every key must appear exactly once.
impl FromStr for ScenarioConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig {
            intensity: f64::NAN,
            d2d_radius: f64::NAN,
            catalog_size: 0,
            cache_size: 0,
            zipf_exponent: f64::NAN,
            window_half_width: f64::NAN,
            seed: 0,
        };
        let mut seen = [false; KEYS.len()];
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value, line)?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .expect("key validated by set");
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        if let Some(missing) = KEYS.iter().zip(seen).find(|(_, s)| !s).map(|(k, _)| k) {
            return Err(Error::Config {
                line: 0,
                message: format!("missing key {missing:?}"),
            });
        }
        cfg.validate().map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(cfg)
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "intensity = {}", self.intensity)?;
        writeln!(f, "d2d_radius = {}", self.d2d_radius)?;
        writeln!(f, "catalog_size = {}", self.catalog_size)?;
        writeln!(f, "cache_size = {}", self.cache_size)?;
        writeln!(f, "zipf_exponent = {}", self.zipf_exponent)?;
        writeln!(f, "window_half_width = {}", self.window_half_width)?;
        writeln!(f, "seed = {}", self.seed)
    }
}

/// Request distribution over the catalog, sorted by decreasing popularity.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityModel {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl PopularityModel {
    /// Wraps an explicit pmf. It must be normalized and nonincreasing.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidArgument("empty pmf".into()));
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "pmf entries must be finite and >= 0".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!(
                "pmf sums to {total}, not 1"
            )));
        }
        if pmf.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("pmf must be nonincreasing".into()));
        }
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(PopularityModel { pmf, cdf })
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn prob(&self, file: usize) -> f64 {
        self.pmf[file]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.pmf
    }

    /// Total request mass of the `n` most popular files.
    pub fn head_mass(&self, n: usize) -> f64 {
        self.pmf.iter().take(n).sum()
    }

    /// Draws a file index by inversion of the cumulative distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf
            .partition_point(|c| *c <= u)
            .min(self.pmf.len() - 1)
    }
}

/// Zipf law `p(n) = n^-gamma / sum_m m^-gamma` over `catalog_size` files.
pub fn zipf_pmf(catalog_size: usize, zipf_exponent: f64) -> Result<PopularityModel> {
    if catalog_size == 0 {
        return Err(Error::InvalidArgument(
            "catalog_size must be at least 1".into(),
        ));
    }
    if !(zipf_exponent.is_finite() && zipf_exponent >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "zipf_exponent must be non-negative, got {zipf_exponent}"
        )));
    }
    let weights: Vec<f64> = (1..=catalog_size)
        .map(|n| (n as f64).powf(-zipf_exponent))
        .collect();
    // smallest terms first
    let total: f64 = weights.iter().rev().sum();
    PopularityModel::from_pmf(weights.into_iter().map(|w| w / total).collect())
}

/// Poisson probability `P(K = k)` for the given mean, evaluated in log space.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (-mean + kf * mean.ln() - ln_gamma(kf + 1.0)).exp()
}

/// Distribution of the number of caches covering the typical receiver.
pub fn coverage_number_pmf(config: &ScenarioConfig, k: u64) -> f64 {
    poisson_pmf(config.mean_coverage(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zipf_two_files_unit_exponent() {
        let p = zipf_pmf(2, 1.0).unwrap();
        assert_relative_eq!(p.prob(0), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.prob(1), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zipf_uniform_and_squared() {
        let p = zipf_pmf(5, 0.0).unwrap();
        assert!(p.as_slice().iter().all(|v| (v - 0.2).abs() < 1e-15));
        let p = zipf_pmf(3, 2.0).unwrap();
        for (got, want) in p
            .as_slice()
            .iter()
            .zip([36.0 / 49.0, 9.0 / 49.0, 4.0 / 49.0])
        {
            assert_relative_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn zipf_rejects_empty_catalog() {
        assert!(matches!(zipf_pmf(0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn poisson_values() {
        assert_relative_eq!(poisson_pmf(1.0, 0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
        assert_relative_eq!(
            poisson_pmf(2.0, 2),
            2.0 * (-2.0f64).exp(),
            max_relative = 1e-13
        );
        // far tail stays finite in log space
        let tail = poisson_pmf(50.0, 400);
        assert!(tail.is_finite() && tail >= 0.0);
    }

    #[test]
    fn coverage_pmf_uses_mean_coverage() {
        let cfg = ScenarioConfig::two_file_example(1.0);
        assert_relative_eq!(
            coverage_number_pmf(&cfg, 0),
            (-1.0f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn coverage_partial_sum_reaches_one() {
        // below a mean of about 1 the rule k = mean + 10 sqrt(mean) leaves
        // more than 1e-9 in the tail (mean 0.1 stops at k = 4)
        for mean in [1.0f64, 7.5, 40.0, 300.0] {
            let k_max = (mean + 10.0 * mean.sqrt()).ceil() as u64;
            let s: f64 = (0..=k_max).map(|k| poisson_pmf(mean, k)).sum();
            assert!(s > 1.0 - 1e-9, "mean {mean}: partial sum {s}");
        }
    }

    #[test]
    fn sampling_follows_pmf() {
        use rand::SeedableRng;
        let p = zipf_pmf(4, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[p.sample(&mut rng)] += 1;
        }
        for (m, c) in counts.iter().enumerate() {
            let freq = *c as f64 / n as f64;
            let sd = (p.prob(m) * (1.0 - p.prob(m)) / n as f64).sqrt();
            assert!((freq - p.prob(m)).abs() < 4.0 * sd, "file {m}: {freq}");
        }
    }

    const SAMPLE_FILE: &str = "\
# Example scenario
intensity = 0.3183098861837907
d2d_radius = 1.0   # one unit
catalog_size = 2
cache_size = 1
zipf_exponent = 1
window_half_width = 10
seed = 42
";

    #[test]
    fn parses_scenario_file() {
        let cfg: ScenarioConfig = SAMPLE_FILE.parse().unwrap();
        assert_eq!(cfg.catalog_size, 2);
        assert_eq!(cfg.seed, 42);
        assert_relative_eq!(cfg.mean_coverage(), 1.0, epsilon = 1e-12);
        let again: ScenarioConfig = cfg.to_string().parse().unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn scenario_file_errors() {
        let unknown = format!("{SAMPLE_FILE}colour = blue\n");
        assert!(matches!(
            unknown.parse::<ScenarioConfig>(),
            Err(Error::Config { line: 9, .. })
        ));
        let dup = format!("{SAMPLE_FILE}seed = 1\n");
        assert!(matches!(
            dup.parse::<ScenarioConfig>(),
            Err(Error::Config { .. })
        ));
        let missing = SAMPLE_FILE.replace("seed = 42\n", "");
        assert!(missing.parse::<ScenarioConfig>().is_err());
        let oversized = SAMPLE_FILE.replace("cache_size = 1", "cache_size = 3");
        assert!(oversized.parse::<ScenarioConfig>().is_err());
        let garbage = SAMPLE_FILE.replace("d2d_radius = 1.0", "d2d_radius = wide");
        assert!(matches!(
            garbage.parse::<ScenarioConfig>(),
            Err(Error::Config { line: 3, .. })
        ));
    }

    #[test]
    fn degenerate_full_catalog_is_valid() {
        assert!(ScenarioConfig::new(1.0, 1.0, 3, 3, 0.5).is_ok());
        assert!(ScenarioConfig::new(1.0, 1.0, 3, 4, 0.5).is_err());
        assert!(ScenarioConfig::new(0.0, 1.0, 3, 1, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn zipf_is_normalized_and_scale_free(m in 1usize..200, gamma in 0.0f64..3.0, a in 1usize..200, b in 1usize..200) {
            let p = zipf_pmf(m, gamma).unwrap();
            let total: f64 = p.as_slice().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(p.as_slice().windows(2).all(|w| w[1] <= w[0]));
            let (a, b) = (a.min(m), b.min(m));
            let ratio = p.prob(a - 1) / p.prob(b - 1);
            let want = (b as f64 / a as f64).powf(gamma);
            prop_assert!((ratio - want).abs() <= 1e-12 * want.max(1.0));
        }
    }
}
