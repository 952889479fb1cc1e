//! Ball-restricted Voronoi cells `B(x, R) ∩ V_x(K_0)` and their monomial
//! moments.

mod cell;
mod grid;
mod moments;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use cell::{build_cell, CellBoundary, ChainPiece, HalfPlane, RestrictedCell, GEOM_EPS};
pub use grid::{neighbors_within, SpatialGrid};
pub use moments::{
    gauss_legendre, moments_exact_2d, moments_exact_2d_capped, moments_mc, moments_mc_cell,
    moments_mc_stream, MomentTable, DEFAULT_MAX_DEGREE,
};

use crate::error::{Error, Result};
use crate::shapes::PointSample;

/// How cell moments are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MomentMethod {
    /// Closed-form planar integration up to `max_degree`.
    Exact { max_degree: u32 },
    /// Uniform sampling with `samples` points per cell; site `i` uses
    /// stream `i` of the generator seeded with `seed`.
    Mc { samples: usize, seed: u64 },
}

impl Default for MomentMethod {
    fn default() -> Self {
        MomentMethod::Exact {
            max_degree: DEFAULT_MAX_DEGREE,
        }
    }
}

impl MomentMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MomentMethod::Exact { .. } => "exact",
            MomentMethod::Mc { .. } => "mc",
        }
    }
}

/// Summary counts over the cells of one pass.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CellStats {
    pub count: usize,
    pub empty: usize,
    pub mean_constraints: f64,
}

/// Build the restricted cell of sample point `pos` using only the
/// neighbors that can cut it.
///
/// The neighbor radius starts small and doubles until it exceeds twice the
/// extent of the cell built so far (or reaches `2R`): a site farther than
/// `2ρ` has its bisector beyond a ball of radius `ρ` containing the cell.
pub fn cell_of(sample: &PointSample, grid: &SpatialGrid<'_>, pos: usize, radius: f64) -> RestrictedCell {
    let x = sample.point(pos);
    let full = 2.0 * radius;
    let mut q = (3.0 * grid::typical_spacing(sample)).min(full);
    loop {
        let ids = grid.within(x, q);
        let cell = build_cell(
            x,
            ids.iter().filter(|&&i| i != pos).map(|&i| sample.point(i)),
            radius,
        );
        if q >= full || 2.0 * cell.extent() <= q {
            return cell;
        }
        q = (2.0 * q).min(full);
    }
}

/// Apply `f` to the restricted cell of each listed site (sample
/// positions). Sites are processed in parallel; results come back in the
/// order given, independent of scheduling.
pub fn map_cells<T, F>(sample: &PointSample, radius: f64, sites: &[usize], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &RestrictedCell) -> Result<T> + Sync,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("cell radius must be positive, got {radius}")));
    }
    if let Some(&bad) = sites.iter().find(|&&i| i >= sample.len()) {
        return Err(Error::invalid(format!("site position {bad} out of range")));
    }
    let cell_size = (3.0 * grid::typical_spacing(sample)).min(2.0 * radius);
    let grid = SpatialGrid::new(sample, cell_size);
    sites
        .par_iter()
        .map(|&pos| f(pos, &cell_of(sample, &grid, pos, radius)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Moment tables about each listed site, in the order given.
pub fn site_moments(
    sample: &PointSample,
    radius: f64,
    s_max: u32,
    method: MomentMethod,
    sites: &[usize],
) -> Result<(Vec<MomentTable>, CellStats)> {
    check_method(sample.dim(), s_max, method)?;
    let results = map_cells(sample, radius, sites, |pos, cell| {
        let table = match method {
            MomentMethod::Exact { max_degree } => moments_exact_2d_capped(cell, s_max, max_degree)?,
            MomentMethod::Mc { samples, seed } => moments_mc_cell(cell, s_max, samples, seed, pos as u64)?,
        };
        Ok((table, cell.constraints().len(), cell.is_empty()))
    })?;
    let mut tables = Vec::with_capacity(sites.len());
    let mut stats = CellStats::default();
    let mut constraints = 0usize;
    for (t, c, empty) in results {
        stats.count += 1;
        stats.empty += empty as usize;
        constraints += c;
        tables.push(t);
    }
    if stats.count > 0 {
        stats.mean_constraints = constraints as f64 / stats.count as f64;
    }
    Ok((tables, stats))
}

/// Reject method/dimension/degree combinations the backends cannot serve.
pub fn check_method(dim: usize, s_max: u32, method: MomentMethod) -> Result<()> {
    match method {
        MomentMethod::Exact { max_degree } => {
            if dim != 2 {
                return Err(Error::Unsupported(format!(
                    "exact moments need d = 2 (got d = {dim}); use the Monte Carlo method"
                )));
            }
            if s_max > max_degree {
                return Err(Error::Unsupported(format!(
                    "moment degree {s_max} exceeds the exact backend cap {max_degree}"
                )));
            }
        }
        MomentMethod::Mc { samples, .. } => {
            if samples == 0 {
                return Err(Error::invalid("Monte Carlo needs at least one sample per cell"));
            }
        }
    }
    Ok(())
}

/// JSON description of a cell for plotting, in absolute coordinates.
pub fn cell_dump(cell: &RestrictedCell) -> Value {
    let x = cell.site();
    let r = cell.radius();
    let abs = |p: [f64; 2]| vec![p[0] + x[0], p[1] + x[1]];
    let boundary = match cell.boundary() {
        None => Value::Null,
        Some(CellBoundary::Empty) => json!("empty"),
        Some(CellBoundary::Chain(pieces)) => Value::Array(
            pieces
                .iter()
                .map(|p| match *p {
                    ChainPiece::Arc {
                        start_angle,
                        end_angle,
                    } => json!({
                        "type": "arc",
                        "center": x,
                        "radius": r,
                        "start_angle": start_angle,
                        "end_angle": end_angle,
                        "start": abs(p.start(r)),
                        "end": abs(p.end(r)),
                    }),
                    ChainPiece::Segment { start, end } => json!({
                        "type": "segment",
                        "start": abs(start),
                        "end": abs(end),
                    }),
                })
                .collect(),
        ),
    };
    json!({
        "site": x,
        "radius": r,
        "constraints": cell.constraints(),
        "boundary": boundary,
    })
}
