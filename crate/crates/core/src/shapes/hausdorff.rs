use rayon::prelude::*;

use super::{PointSample, ReferenceShape};
use crate::cells::SpatialGrid;
use crate::error::{check_dim, Error, Result};

/// Upper estimate of the Hausdorff distance between a planar shape and a
/// sample, from a finite cover of the shape.
///
/// Takes the larger of (i) the distance of each sample point to the shape
/// and (ii) the distance from each probe point to the nearest sample point.
/// Probes are the boundary at spacing `density` and the interior on a grid
/// of the same spacing. Part (ii) approaches the true value from below as
/// the density decreases.
pub fn hausdorff_to_sample(
    shape: &ReferenceShape,
    sample: &PointSample,
    density: f64,
) -> Result<f64> {
    check_dim(shape.dim(), sample.dim())?;
    if sample.is_empty() {
        return Err(Error::precondition("Hausdorff distance needs a nonempty sample"));
    }
    if !(density > 0.0) {
        return Err(Error::invalid("probe density must be positive"));
    }
    let outside = sample
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| shape.distance(p))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;

    let mut probes: Vec<[f64; 2]> = Vec::new();
    for piece in shape.boundary_pieces()? {
        probes.extend(piece.sample_points(density));
    }
    let (min, max) = shape.bounding_box();
    let nx = ((max[0] - min[0]) / density).ceil() as usize;
    let ny = ((max[1] - min[1]) / density).ceil() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let p = [min[0] + i as f64 * density, min[1] + j as f64 * density];
            if shape.contains(&p) {
                probes.push(p);
            }
        }
    }

    let grid = SpatialGrid::with_auto_cell(sample);
    let cover = probes
        .par_iter()
        .map(|p| grid.nearest(p).map_or(f64::INFINITY, |(_, d)| d))
        .reduce(|| 0.0, f64::max);
    Ok(outside.max(cover))
}
