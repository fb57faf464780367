//! Uniform cell grid for fixed-radius neighbour queries.

pub(crate) struct CellGrid {
    lo: f64,
    cell: f64,
    n: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl CellGrid {
    /// Grid over the square `[lo, lo + side]^2` for queries up to `radius`.
    pub fn new(positions: &[[f64; 2]], lo: f64, side: f64, radius: f64) -> Self {
        // about one point per cell at most; never cells narrower than needed
        let n_max = ((positions.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let n = ((side / radius.max(side / 512.0)).floor() as usize).clamp(1, n_max);
        let cell = side / n as f64;
        let index = |p: &[f64; 2]| -> usize {
            let ix = (((p[0] - lo) / cell) as usize).min(n - 1);
            let iy = (((p[1] - lo) / cell) as usize).min(n - 1);
            iy * n + ix
        };
        // counting sort into cells
        let mut starts = vec![0u32; n * n + 1];
        for p in positions {
            starts[index(p) + 1] += 1;
        }
        for i in 0..n * n {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut items = vec![0u32; positions.len()];
        for (i, p) in positions.iter().enumerate() {
            let c = index(p);
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        CellGrid {
            lo,
            cell,
            n,
            starts,
            items,
        }
    }

    /// Calls `visit(j, d²)` for every point `j` within `radius` of `p`.
    pub fn for_each_within(
        &self,
        positions: &[[f64; 2]],
        p: [f64; 2],
        radius: f64,
        mut visit: impl FnMut(usize, f64),
    ) {
        let r2 = radius * radius;
        let span = |x: f64| -> (usize, usize) {
            let a = ((x - radius - self.lo) / self.cell).floor().max(0.0) as usize;
            let b =
                (((x + radius - self.lo) / self.cell).floor().max(0.0) as usize).min(self.n - 1);
            (a.min(self.n - 1), b)
        };
        let (x0, x1) = span(p[0]);
        let (y0, y1) = span(p[1]);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let c = cy * self.n + cx;
                for &j in &self.items[self.starts[c] as usize..self.starts[c + 1] as usize] {
                    let q = positions[j as usize];
                    let d2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
                    if d2 <= r2 {
                        visit(j as usize, d2);
                    }
                }
            }
        }
    }
}
