use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::shapes::PointSample;

/// Uniform-grid spatial hash over a point sample.
///
/// Query results are sample positions in increasing order, which is
/// lexicographic order of the points.
pub struct SpatialGrid<'a> {
    sample: &'a PointSample,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    key_min: Vec<i64>,
    key_max: Vec<i64>,
}

impl<'a> SpatialGrid<'a> {
    pub fn new(sample: &'a PointSample, cell: f64) -> Self {
        assert!(cell > 0.0, "grid cell size must be positive");
        let d = sample.dim();
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let mut key_min = vec![i64::MAX; d];
        let mut key_max = vec![i64::MIN; d];
        for (i, p) in sample.points().enumerate() {
            let key: Vec<i64> = p.iter().map(|v| (v / cell).floor() as i64).collect();
            for k in 0..d {
                key_min[k] = key_min[k].min(key[k]);
                key_max[k] = key_max[k].max(key[k]);
            }
            buckets.entry(key).or_default().push(i);
        }
        SpatialGrid {
            sample,
            cell,
            buckets,
            key_min,
            key_max,
        }
    }

    /// Cell size from the lattice spacing, or from the mean point density.
    pub fn with_auto_cell(sample: &'a PointSample) -> Self {
        SpatialGrid::new(sample, typical_spacing(sample) * 2.0)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Positions of all points within `radius` of `x` (closed ball).
    pub fn within(&self, x: &[f64], radius: f64) -> Vec<usize> {
        let d = x.len();
        let lo: Vec<i64> = x
            .iter()
            .zip(&self.key_min)
            .map(|(v, &m)| (((v - radius) / self.cell).floor() as i64).max(m))
            .collect();
        let hi: Vec<i64> = x
            .iter()
            .zip(&self.key_max)
            .map(|(v, &m)| (((v + radius) / self.cell).floor() as i64).min(m))
            .collect();
        let mut out = Vec::new();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return out;
        }
        let r2 = radius * radius;
        let mut key = lo.clone();
        loop {
            if let Some(bucket) = self.buckets.get(key.as_slice()) {
                for &i in bucket {
                    if dist2(self.sample.point(i), x) <= r2 {
                        out.push(i);
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    out.sort_unstable();
                    return out;
                }
                key[k] += 1;
                if key[k] <= hi[k] {
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Nearest sample point to `x` and its distance, by expanding shells of
    /// grid cells.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        if self.sample.is_empty() {
            return None;
        }
        let d = x.len();
        let home: Vec<i64> = x.iter().map(|v| (v / self.cell).floor() as i64).collect();
        let max_ring = home
            .iter()
            .zip(self.key_min.iter().zip(&self.key_max))
            .map(|(&h, (&lo, &hi))| (h - lo).abs().max((hi - h).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        let mut key = vec![0i64; d];
        for ring in 0..=max_ring {
            // points in shell `ring` are at least `(ring - 1) * cell` away
            if let Some((_, bd)) = best {
                if bd <= (ring - 1) as f64 * self.cell {
                    break;
                }
            }
            let mut offs = vec![-ring; d];
            loop {
                if offs.iter().any(|o| o.abs() == ring) {
                    for k in 0..d {
                        key[k] = home[k] + offs[k];
                    }
                    if let Some(bucket) = self.buckets.get(key.as_slice()) {
                        for &i in bucket {
                            let dd = dist2(self.sample.point(i), x).sqrt();
                            if best.map_or(true, |(bi, bd)| dd < bd || (dd == bd && i < bi)) {
                                best = Some((i, dd));
                            }
                        }
                    }
                }
                let mut k = 0;
                loop {
                    if k == d {
                        break;
                    }
                    offs[k] += 1;
                    if offs[k] <= ring {
                        break;
                    }
                    offs[k] = -ring;
                    k += 1;
                }
                if k == d {
                    break;
                }
            }
        }
        best
    }
}

pub(crate) fn typical_spacing(sample: &PointSample) -> f64 {
    if let Some(l) = sample.lattice() {
        return l.spacing;
    }
    let d = sample.dim();
    let n = sample.len().max(1);
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in sample.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(0.0)).collect();
    let longest = extent.iter().cloned().fold(0.0, f64::max);
    if longest == 0.0 {
        return 1.0;
    }
    let vol: f64 = extent.iter().map(|e| e.max(longest * 1e-3)).product();
    (vol / n as f64).powf(1.0 / d as f64)
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// All sample points other than `x` within `radius` of `x`, in
/// lexicographic order. `x` must belong to the sample.
pub fn neighbors_within(sample: &PointSample, x: &[f64], radius: f64) -> Result<Vec<Vec<f64>>> {
    let me = sample
        .position(x)
        .ok_or_else(|| Error::precondition("query point is not a sample point"))?;
    if !(radius > 0.0) {
        return Ok(Vec::new());
    }
    let grid = SpatialGrid::new(sample, radius);
    Ok(grid
        .within(x, radius)
        .into_iter()
        .filter(|&i| i != me)
        .map(|i| sample.point(i).to_vec())
        .collect())
}
