use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ReferenceShape;
use crate::error::{check_dim, Error, Result};

/// The cubic lattice `a Z^d + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub spacing: f64,
    pub offset: Vec<f64>,
}

impl Lattice {
    pub fn new(spacing: f64, offset: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "lattice spacing must be positive, got {spacing}"
            )));
        }
        Ok(Lattice { spacing, offset })
    }

    pub fn cubic(spacing: f64, dim: usize) -> Result<Self> {
        Lattice::new(spacing, vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// Volume of the Voronoi cell of a lattice point, `a^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Circumradius of the Voronoi cell of the unscaled lattice, the
    /// constant `C` with `V_0 ⊆ B(0, C)`: `sqrt(d)/2`.
    pub fn unit_circumradius(&self) -> f64 {
        (self.dim() as f64).sqrt() / 2.0
    }

    /// Integer coordinates of the nearest lattice point.
    pub fn index_of(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.offset)
            .map(|(v, o)| ((v - o) / self.spacing).round() as i64)
            .collect()
    }

    pub fn point(&self, index: &[i64]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.offset)
            .map(|(&k, o)| o + self.spacing * k as f64)
            .collect()
    }

    /// Inclusive integer index range covering the window.
    pub fn index_range(&self, window: &Window) -> Vec<(i64, i64)> {
        window
            .min
            .iter()
            .zip(&window.max)
            .zip(&self.offset)
            .map(|((lo, hi), o)| {
                (
                    ((lo - o) / self.spacing).ceil() as i64,
                    ((hi - o) / self.spacing).floor() as i64,
                )
            })
            .collect()
    }
}

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Window {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        check_dim(min.len(), max.len())?;
        if min.iter().zip(&max).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("window needs min <= max"));
        }
        Ok(Window { min, max })
    }

    /// Bounding box of the shape grown by `pad` on every side.
    pub fn around(shape: &ReferenceShape, pad: f64) -> Self {
        let (min, max) = shape.bounding_box();
        Window {
            min: min.iter().map(|v| v - pad).collect(),
            max: max.iter().map(|v| v + pad).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains_box(&self, min: &[f64], max: &[f64]) -> bool {
        self.min.iter().zip(min).all(|(w, m)| w <= m) && self.max.iter().zip(max).all(|(w, m)| w >= m)
    }

    pub fn volume(&self) -> f64 {
        self.min.iter().zip(&self.max).map(|(a, b)| b - a).product()
    }
}

/// A finite set of distinct points in lexicographic order, optionally
/// tagged as a subset of a cubic lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSample {
    dim: usize,
    coords: Vec<f64>,
    lattice: Option<Lattice>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl PointSample {
    /// Sorts the points lexicographically; duplicates are rejected.
    pub fn new(dim: usize, points: Vec<Vec<f64>>, lattice: Option<Lattice>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("sample coordinates must be finite"));
            }
        }
        if let Some(l) = &lattice {
            check_dim(dim, l.dim())?;
        }
        let mut points = points;
        points.sort_by(|a, b| lex_cmp(a, b));
        if points.windows(2).any(|w| lex_cmp(&w[0], &w[1]) == Ordering::Equal) {
            return Err(Error::invalid("sample points must be pairwise distinct"));
        }
        Ok(PointSample {
            dim,
            coords: points.into_iter().flatten().collect(),
            lattice,
        })
    }

    /// Build from points already known to be sorted and distinct.
    pub(crate) fn from_sorted(dim: usize, coords: Vec<f64>, lattice: Option<Lattice>) -> Self {
        debug_assert_eq!(coords.len() % dim, 0);
        PointSample {
            dim,
            coords,
            lattice,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn with_lattice(mut self, lattice: Option<Lattice>) -> Result<Self> {
        if let Some(l) = &lattice {
            check_dim(self.dim, l.dim())?;
        }
        self.lattice = lattice;
        Ok(self)
    }

    /// Position of `x` in the sample, by binary search.
    pub fn position(&self, x: &[f64]) -> Option<usize> {
        let n = self.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_cmp(self.point(mid), x) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// The sub-sample at the given (increasing) positions.
    pub fn subset(&self, positions: &[usize]) -> PointSample {
        let mut coords = Vec::with_capacity(positions.len() * self.dim);
        for &i in positions {
            coords.extend_from_slice(self.point(i));
        }
        PointSample::from_sorted(self.dim, coords, self.lattice.clone())
    }

    /// Apply `f` to every point; the result is re-sorted.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<PointSample> {
        let pts: Vec<Vec<f64>> = self.points().map(f).collect();
        PointSample::new(self.dim, pts, None)
    }
}

/// All points of `lattice` inside `shape`, lexicographically ordered.
///
/// Rows (first lattice coordinate) are scanned in parallel and merged in
/// order, so the output does not depend on the thread count.
pub fn digitize(shape: &ReferenceShape, lattice: &Lattice, window: &Window) -> Result<PointSample> {
    let dim = shape.dim();
    check_dim(dim, lattice.dim())?;
    check_dim(dim, window.dim())?;
    let (bmin, bmax) = shape.bounding_box();
    if !window.contains_box(&bmin, &bmax) {
        return Err(Error::precondition(format!(
            "window {:?}..{:?} does not contain the shape's bounding box {:?}..{:?}",
            window.min, window.max, bmin, bmax
        )));
    }
    let ranges = lattice.index_range(window);
    let (first_lo, first_hi) = ranges[0];
    let rows: Vec<Vec<f64>> = (first_lo..=first_hi)
        .into_par_iter()
        .map(|k0| {
            let mut out = Vec::new();
            let mut index: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            index[0] = k0;
            if ranges[1..].iter().any(|(lo, hi)| lo > hi) {
                return out;
            }
            loop {
                let p = lattice.point(&index);
                if shape.contains(&p) {
                    out.extend_from_slice(&p);
                }
                // odometer over the remaining coordinates, last fastest
                let mut k = dim - 1;
                loop {
                    if k == 0 {
                        return out;
                    }
                    index[k] += 1;
                    if index[k] <= ranges[k].1 {
                        break;
                    }
                    index[k] = ranges[k].0;
                    k -= 1;
                }
            }
        })
        .collect();
    let coords = rows.concat();
    Ok(PointSample::from_sorted(dim, coords, Some(lattice.clone())))
}
