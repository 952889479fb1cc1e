use std::f64::consts::TAU;

use serde::Serialize;

use super::grid::dist2;

/// Relative tolerance for geometric predicates, scaled by the cell radius.
pub const GEOM_EPS: f64 = 1e-12;

/// The half-space `{y : <y - x, normal> <= offset}` bounded by the bisector
/// between the site `x` and one neighbor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfPlane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// One piece of the planar boundary chain, in coordinates relative to the
/// site.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainPiece {
    /// Arc of the circle of radius `R` about the site, counterclockwise
    /// from `start_angle` to `end_angle` (`end_angle > start_angle`).
    Arc { start_angle: f64, end_angle: f64 },
    Segment { start: [f64; 2], end: [f64; 2] },
}

impl ChainPiece {
    pub fn start(&self, radius: f64) -> [f64; 2] {
        match *self {
            ChainPiece::Arc { start_angle, .. } => {
                [radius * start_angle.cos(), radius * start_angle.sin()]
            }
            ChainPiece::Segment { start, .. } => start,
        }
    }

    pub fn end(&self, radius: f64) -> [f64; 2] {
        match *self {
            ChainPiece::Arc { end_angle, .. } => [radius * end_angle.cos(), radius * end_angle.sin()],
            ChainPiece::Segment { end, .. } => end,
        }
    }
}

/// Boundary of a planar restricted cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellBoundary {
    Empty,
    /// Closed counterclockwise chain of arcs and segments.
    Chain(Vec<ChainPiece>),
}

/// The region `B(x, R) ∩ V_x(K_0)`, represented as the ball clipped by the
/// bisector half-spaces of the neighbors that can reach it.
#[derive(Clone, Debug)]
pub struct RestrictedCell {
    site: Vec<f64>,
    radius: f64,
    constraints: Vec<HalfPlane>,
    boundary: Option<CellBoundary>,
    /// Convex polygon (relative coordinates) containing the planar region.
    polygon: Vec<[f64; 2]>,
    extent: f64,
}

impl RestrictedCell {
    pub fn site(&self) -> &[f64] {
        &self.site
    }

    pub fn dim(&self) -> usize {
        self.site.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn constraints(&self) -> &[HalfPlane] {
        &self.constraints
    }

    /// Boundary chain; `None` outside the plane.
    pub fn boundary(&self) -> Option<&CellBoundary> {
        self.boundary.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.boundary, Some(CellBoundary::Empty))
    }

    /// Radius of a ball about the site containing the region.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Membership by the defining inequalities (absolute coordinates).
    pub fn contains(&self, y: &[f64]) -> bool {
        let rel: Vec<f64> = y.iter().zip(&self.site).map(|(a, b)| a - b).collect();
        self.contains_relative(&rel)
    }

    pub fn contains_relative(&self, rel: &[f64]) -> bool {
        if rel.iter().map(|v| v * v).sum::<f64>() > self.radius * self.radius {
            return false;
        }
        self.constraints
            .iter()
            .all(|c| c.normal.iter().zip(rel).map(|(n, v)| n * v).sum::<f64>() <= c.offset)
    }

    /// Axis box (relative coordinates) containing the region.
    pub fn relative_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.radius;
        if self.dim() != 2 || self.polygon.is_empty() {
            return (vec![-r; self.dim()], vec![r; self.dim()]);
        }
        let mut lo = [r, r];
        let mut hi = [-r, -r];
        for v in &self.polygon {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (
            vec![lo[0].max(-r), lo[1].max(-r)],
            vec![hi[0].min(r), hi[1].min(r)],
        )
    }
}

/// Clip `B(x, R)` by the bisectors between `x` and each neighbor.
///
/// Neighbors whose bisector is at distance `>= R` from `x` (within
/// tolerance) cannot cut the ball and are dropped. In the plane the
/// boundary chain is built as well; a constraint whose bisector misses the
/// current region leaves it unchanged.
pub fn build_cell<'n, I>(x: &[f64], neighbors: I, radius: f64) -> RestrictedCell
where
    I: IntoIterator<Item = &'n [f64]>,
{
    assert!(radius > 0.0, "cell radius must be positive");
    let d = x.len();
    let cut = radius * (1.0 - GEOM_EPS);
    let mut constraints = Vec::new();
    let mut last: Option<&[f64]> = None;
    for n in neighbors {
        // sorted input: exact duplicates are adjacent
        if last == Some(n) {
            continue;
        }
        last = Some(n);
        let dist = dist2(n, x).sqrt();
        if dist == 0.0 {
            continue;
        }
        let offset = 0.5 * dist;
        if offset >= cut {
            continue;
        }
        let normal = n.iter().zip(x).map(|(a, b)| (a - b) / dist).collect();
        constraints.push(HalfPlane { normal, offset });
    }
    let mut cell = RestrictedCell {
        site: x.to_vec(),
        radius,
        constraints,
        boundary: None,
        polygon: Vec::new(),
        extent: radius,
    };
    if d == 2 {
        planar_geometry(&mut cell);
    }
    cell
}

fn planar_geometry(cell: &mut RestrictedCell) {
    let r = cell.radius;
    let eps = GEOM_EPS * r;
    let b = 2.0 * r;
    let mut poly = vec![[-b, -b], [b, -b], [b, b], [-b, b]];
    let mut extent = r;
    for c in &cell.constraints {
        if c.offset >= extent {
            continue;
        }
        poly = clip_polygon(&poly, [c.normal[0], c.normal[1]], c.offset, eps);
        if poly.len() < 3 {
            poly.clear();
            break;
        }
        let far = poly
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .fold(0.0, f64::max);
        extent = far.min(r);
    }
    if poly.is_empty() {
        cell.boundary = Some(CellBoundary::Empty);
        cell.extent = 0.0;
        return;
    }

    let mut pieces = Vec::new();
    for i in 0..poly.len() {
        if let Some(seg) = chord(poly[i], poly[(i + 1) % poly.len()], r, eps) {
            pieces.push(seg);
        }
    }
    pieces.extend(free_arcs(&cell.constraints, r));
    if pieces.is_empty() {
        cell.boundary = Some(CellBoundary::Empty);
        cell.extent = 0.0;
        return;
    }
    // the site is interior, so the boundary is star-shaped about it
    let mut keyed: Vec<(f64, ChainPiece)> = pieces
        .into_iter()
        .map(|p| {
            let key = match p {
                ChainPiece::Arc { start_angle, .. } => start_angle.rem_euclid(TAU),
                ChainPiece::Segment { start, .. } => start[1].atan2(start[0]).rem_euclid(TAU),
            };
            (key, p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    cell.boundary = Some(CellBoundary::Chain(keyed.into_iter().map(|(_, p)| p).collect()));
    cell.polygon = poly;
    cell.extent = extent;
}

/// Sutherland-Hodgman step for `<v, n> <= h`; vertices within `eps` of the
/// line count as inside.
fn clip_polygon(poly: &[[f64; 2]], n: [f64; 2], h: f64, eps: f64) -> Vec<[f64; 2]> {
    let side = |v: &[f64; 2]| v[0] * n[0] + v[1] * n[1] - h;
    if poly.iter().all(|v| side(v) <= eps) {
        return poly.to_vec();
    }
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp <= eps {
            out.push(p);
        }
        if (sp < -eps && sq > eps) || (sp > eps && sq < -eps) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out.dedup_by(|a, b| (a[0] - b[0]).abs() <= eps && (a[1] - b[1]).abs() <= eps);
    while out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f[0] - l[0]).abs() <= eps && (f[1] - l[1]).abs() <= eps {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Part of the segment `p -> q` inside the closed disk of radius `r`.
fn chord(p: [f64; 2], q: [f64; 2], r: f64, eps: f64) -> Option<ChainPiece> {
    let dx = [q[0] - p[0], q[1] - p[1]];
    let a = dx[0] * dx[0] + dx[1] * dx[1];
    if a <= eps * eps {
        return None;
    }
    let b = 2.0 * (p[0] * dx[0] + p[1] * dx[1]);
    let c = p[0] * p[0] + p[1] * p[1] - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-b - sq) / (2.0 * a)).max(0.0);
    let t1 = ((-b + sq) / (2.0 * a)).min(1.0);
    if (t1 - t0) * a.sqrt() <= eps {
        return None;
    }
    Some(ChainPiece::Segment {
        start: [p[0] + t0 * dx[0], p[1] + t0 * dx[1]],
        end: [p[0] + t1 * dx[0], p[1] + t1 * dx[1]],
    })
}

/// Arcs of the circle of radius `r` that satisfy every constraint: the
/// complement of the union of the angular intervals cut off by each
/// bisector.
fn free_arcs(constraints: &[HalfPlane], r: f64) -> Vec<ChainPiece> {
    let mut cuts: Vec<(f64, f64)> = Vec::with_capacity(constraints.len() + 1);
    for c in constraints {
        let ratio = (c.offset / r).clamp(-1.0, 1.0);
        let half = ratio.acos();
        let mid = c.normal[1].atan2(c.normal[0]);
        let lo = (mid - half).rem_euclid(TAU);
        let hi = lo + 2.0 * half;
        if hi > TAU {
            cuts.push((lo, TAU));
            cuts.push((0.0, hi - TAU));
        } else {
            cuts.push((lo, hi));
        }
    }
    if cuts.is_empty() {
        return vec![ChainPiece::Arc {
            start_angle: 0.0,
            end_angle: TAU,
        }];
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in cuts {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut free: Vec<(f64, f64)> = Vec::new();
    for w in merged.windows(2) {
        free.push((w[0].1, w[1].0));
    }
    // gap across angle 0
    let first = merged[0].0;
    let last = merged[merged.len() - 1].1;
    if last < TAU || first > 0.0 {
        free.push((last, first + TAU));
    }
    let min_len = 1e-14;
    free.into_iter()
        .filter(|(a, b)| b - a > min_len)
        .map(|(a, b)| ChainPiece::Arc {
            start_angle: a,
            end_angle: b,
        })
        .collect()
}
