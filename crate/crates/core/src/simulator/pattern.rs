use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::scenario::ScenarioConfig;

/// One realization of the cache field and what each cache stores.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    /// Cache locations on the buffered window.
    pub positions: Vec<[f64; 2]>,
    /// Files stored at each cache, in placement order.
    pub cache_contents: Vec<Vec<usize>>,
    /// For each file, the caches retained for it.
    pub retained: Vec<Vec<usize>>,
    /// Half width of the observation window.
    pub half_width: f64,
    /// Extra margin sampled around the observation window.
    pub buffer: f64,
}

impl PointPattern {
    pub fn empty(catalog_size: usize, half_width: f64, buffer: f64) -> Self {
        PointPattern {
            positions: Vec::new(),
            cache_contents: Vec::new(),
            retained: vec![Vec::new(); catalog_size],
            half_width,
            buffer,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Whether cache `i` lies inside the observation window shrunk by `margin`.
    pub fn in_window(&self, i: usize, margin: f64) -> bool {
        let h = self.half_width - margin;
        let [x, y] = self.positions[i];
        x.abs() <= h && y.abs() <= h
    }

    /// Side of the sampled square.
    pub fn side(&self) -> f64 {
        2.0 * (self.half_width + self.buffer)
    }

    pub(crate) fn clear_contents(&mut self) {
        for c in &mut self.cache_contents {
            c.clear();
        }
        for r in &mut self.retained {
            r.clear();
        }
    }

    pub(crate) fn store(&mut self, point: usize, file: usize) {
        self.cache_contents[point].push(file);
        self.retained[file].push(point);
    }

    /// Whether some cache within `radius` of `p` stores `file`.
    pub fn holds_within(&self, file: usize, p: [f64; 2], radius: f64) -> bool {
        let r2 = radius * radius;
        self.retained[file].iter().any(|&i| {
            let q = self.positions[i];
            (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) <= r2
        })
    }

    /// Smallest distance between two caches storing `file`, or infinity.
    pub fn min_same_file_distance(&self, file: usize) -> f64 {
        let pts = &self.retained[file];
        let mut best = f64::INFINITY;
        for (k, &i) in pts.iter().enumerate() {
            for &j in &pts[k + 1..] {
                let (a, b) = (self.positions[i], self.positions[j]);
                best = best.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        best
    }
}

/// Poisson field of caches with intensity `config.intensity` on the window
/// `[-D, D]^2` enlarged by `buffer` on every side. `D` is the scenario window
/// half width, widened if needed to contain the receiver's D2D disk.
pub fn sample_ppp<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    buffer: f64,
    rng: &mut R,
) -> PointPattern {
    let half_width = super::effective_half_width(config);
    let mut pattern = PointPattern::empty(config.catalog_size, half_width, buffer);
    let h = half_width + buffer;
    let mean = config.intensity * 4.0 * h * h;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map(|d| d.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    pattern.positions = (0..count)
        .map(|_| [rng.random_range(-h..h), rng.random_range(-h..h)])
        .collect();
    pattern.cache_contents = vec![Vec::new(); count];
    pattern
}
