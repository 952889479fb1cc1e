//! Voronoi tensor measures, shell measures and their boundary-filtered
//! refinement, assembled from per-cell moment tables.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cells::{self, check_method, site_moments, CellStats, MomentMethod, MomentTable};
use crate::error::{check_dim, Error, Result};
use crate::shapes::PointSample;
use crate::symtensor::{sym_pow, sym_product, SymTensor};

/// Spatial part `A` of a region of interest. Membership is tested at the
/// site, so restriction never clips the integration domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialRegion {
    #[default]
    All,
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : <x, normal> <= offset}`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Box { min: Vec<f64>, max: Vec<f64> },
}

impl SpatialRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            SpatialRegion::All => true,
            SpatialRegion::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
            SpatialRegion::HalfSpace { normal, offset } => {
                x.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() <= *offset
            }
            SpatialRegion::Box { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .all(|(v, (lo, hi))| lo <= v && v <= hi),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SpatialRegion::All => Ok(()),
            SpatialRegion::Ball { center, radius } => {
                check_dim(dim, center.len())?;
                if !(*radius >= 0.0) {
                    return Err(Error::invalid("ball region needs a nonnegative radius"));
                }
                Ok(())
            }
            SpatialRegion::HalfSpace { normal, .. } => check_dim(dim, normal.len()),
            SpatialRegion::Box { min, max } => {
                check_dim(dim, min.len())?;
                check_dim(dim, max.len())?;
                if min.iter().zip(max).any(|(a, b)| a > b) {
                    return Err(Error::invalid("box region has min > max"));
                }
                Ok(())
            }
        }
    }
}

/// Direction part `D` of a region of interest, a subset of the unit sphere.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirectionRegion {
    #[default]
    Full,
    /// Directions within half the opening angle `aperture` of `axis`;
    /// `aperture = π` is a hemisphere.
    Cap { axis: Vec<f64>, aperture: f64 },
}

impl DirectionRegion {
    /// Membership of a unit vector.
    pub fn contains(&self, u: &[f64]) -> bool {
        match self {
            DirectionRegion::Full => true,
            DirectionRegion::Cap { axis, aperture } => {
                let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = u.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>() / norm;
                c >= (0.5 * aperture).cos()
            }
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            DirectionRegion::Full => Ok(()),
            DirectionRegion::Cap { axis, aperture } => {
                check_dim(dim, axis.len())?;
                if axis.iter().all(|v| *v == 0.0) {
                    return Err(Error::invalid("cap axis must be nonzero"));
                }
                if !(0.0..=std::f64::consts::TAU).contains(aperture) {
                    return Err(Error::invalid("cap aperture must lie in [0, 2π]"));
                }
                Ok(())
            }
        }
    }
}

/// A set `B = A × D` in `R^d × S^{d-1}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionOfInterest {
    #[serde(default)]
    pub spatial: SpatialRegion,
    #[serde(default)]
    pub direction: DirectionRegion,
}

impl RegionOfInterest {
    pub fn all() -> Self {
        RegionOfInterest::default()
    }

    pub fn spatial(spatial: SpatialRegion) -> Self {
        RegionOfInterest {
            spatial,
            direction: DirectionRegion::Full,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.spatial.validate(dim)?;
        self.direction.validate(dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Voronoi,
    Shell,
    Refined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureMeta {
    pub kind: MeasureKind,
    pub radius: f64,
    pub r: u32,
    pub s: u32,
    pub region: RegionOfInterest,
    pub method: MomentMethod,
    /// Coefficientwise Monte Carlo standard errors (an upper bound when
    /// `r > 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
    pub cells: CellStats,
    /// Sites excluded as lattice-interior (refined measures).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_sites: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureValue {
    pub tensor: SymTensor,
    pub metadata: MeasureMeta,
}

/// Compensated (Neumaier) coefficientwise sum.
struct TensorSum {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl TensorSum {
    fn new(n: usize) -> Self {
        TensorSum {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
        }
    }

    fn add(&mut self, values: &[f64]) {
        for ((s, c), &v) in self.sum.iter_mut().zip(self.comp.iter_mut()).zip(values) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }

    fn total(&self) -> Vec<f64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}

/// `Σ x^r ⊙ M_s(x)` over the given sites in the order given, plus the
/// propagated standard error when the tables carry one.
fn assemble(
    sample: &PointSample,
    sites: &[usize],
    tables: &[MomentTable],
    r: u32,
    s: u32,
) -> (SymTensor, Option<Vec<f64>>) {
    let d = sample.dim();
    let mut acc = TensorSum::new(crate::symtensor::basis_len(d, r + s));
    let mut var = TensorSum::new(crate::symtensor::basis_len(d, r + s));
    let with_err = tables.iter().all(|t| t.stderr.is_some()) && !tables.is_empty();
    for (&pos, table) in sites.iter().zip(tables) {
        let xr = sym_pow(sample.point(pos), r);
        let term = sym_product(&xr, &table.degree_tensor(s)).expect("matching dimension");
        acc.add(term.coeffs());
        if with_err {
            // triangle-inequality bound on the per-site error, combined in
            // quadrature across independent sites
            let abs_xr = SymTensor::from_coeffs(d, r, xr.coeffs().iter().map(|v| v.abs()).collect())
                .expect("basis length");
            let se = SymTensor::from_coeffs(d, s, table.degree_stderr(s).expect("stderr"))
                .expect("basis length");
            let bound = sym_product(&abs_xr, &se).expect("matching dimension");
            let sq: Vec<f64> = bound.coeffs().iter().map(|v| v * v).collect();
            var.add(&sq);
        }
    }
    let tensor = SymTensor::from_coeffs(d, r + s, acc.total()).expect("basis length");
    let err = with_err.then(|| var.total().iter().map(|v| v.sqrt()).collect());
    (tensor, err)
}

fn check_inputs(sample: &PointSample, radius: f64, s: u32, region: &RegionOfInterest, method: MomentMethod) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::precondition("the sample is empty"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    region.validate(sample.dim())?;
    check_method(sample.dim(), s, method)
}

fn sites_in(sample: &PointSample, region: &SpatialRegion, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..sample.len())
        .filter(|&i| keep(i) && region.contains(sample.point(i)))
        .collect()
}

/// `V_R^{r,s}(K_0; A) = Σ_{x ∈ K_0 ∩ A} x^r ⊙ ∫_{B(x,R) ∩ V_x} (y - x)^s dy`.
pub fn voronoi_tensor_measure(
    sample: &PointSample,
    radius: f64,
    r: u32,
    s: u32,
    region: &SpatialRegion,
    method: MomentMethod,
) -> Result<MeasureValue> {
    let roi = RegionOfInterest::spatial(region.clone());
    check_inputs(sample, radius, s, &roi, method)?;
    let sites = sites_in(sample, region, |_| true);
    let (tables, cells) = site_moments(sample, radius, s, method, &sites)?;
    let (tensor, stderr) = assemble(sample, &sites, &tables, r, s);
    Ok(MeasureValue {
        tensor,
        metadata: MeasureMeta {
            kind: MeasureKind::Voronoi,
            radius,
            r,
            s,
            region: roi,
            method,
            stderr,
            cells,
            interior_sites: None,
        },
    })
}

/// Shell measure over `B(x, R) \ B(x, R/2)` restricted to `A × D`.
///
/// With the full sphere this is `V_R - V_{R/2}` with either method. A
/// direction cap needs the Monte Carlo method: each sample point `y` of a
/// cell is kept when `(y - x)/|y - x|` lies in the cap.
pub fn shell_measure(
    sample: &PointSample,
    radius: f64,
    r: u32,
    s: u32,
    region: &RegionOfInterest,
    method: MomentMethod,
) -> Result<MeasureValue> {
    check_inputs(sample, radius, s, region, method)?;
    let (tensor, stderr, cells) = match &region.direction {
        DirectionRegion::Full => {
            let outer = voronoi_tensor_measure(sample, radius, r, s, &region.spatial, method)?;
            let inner = voronoi_tensor_measure(sample, 0.5 * radius, r, s, &region.spatial, method)?;
            let stderr = match (&outer.metadata.stderr, &inner.metadata.stderr) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.hypot(*y)).collect()),
                _ => None,
            };
            (&outer.tensor - &inner.tensor, stderr, outer.metadata.cells)
        }
        DirectionRegion::Cap { .. } => {
            let MomentMethod::Mc { samples, seed } = method else {
                return Err(Error::Unsupported(
                    "direction-restricted shell measures need the Monte Carlo method".into(),
                ));
            };
            let sites = sites_in(sample, &region.spatial, |_| true);
            let inner2 = 0.25 * radius * radius;
            let dir = &region.direction;
            let tables = cells::map_cells(sample, radius, &sites, |pos, cell| {
                let zero = vec![0.0; cell.dim()];
                let (lo, hi) = cell.relative_bounds();
                if cell.is_empty() {
                    let mut t = MomentTable::zeros(cell.site().to_vec(), s);
                    t.stderr = Some(vec![0.0; t.values.len()]);
                    return Ok((t, cell.constraints().len(), true));
                }
                let t = cells::moments_mc_stream(
                    |y| {
                        let n2: f64 = y.iter().map(|v| v * v).sum();
                        if n2 < inner2 || !cell.contains_relative(y) {
                            return false;
                        }
                        let n = n2.sqrt();
                        let u: Vec<f64> = y.iter().map(|v| v / n).collect();
                        dir.contains(&u)
                    },
                    &lo,
                    &hi,
                    &zero,
                    s,
                    samples,
                    seed,
                    pos as u64,
                )?;
                Ok((t, cell.constraints().len(), false))
            })?;
            let mut stats = CellStats::default();
            let mut cons = 0;
            let mut only = Vec::with_capacity(tables.len());
            for (t, c, empty) in tables {
                stats.count += 1;
                stats.empty += empty as usize;
                cons += c;
                only.push(t);
            }
            if stats.count > 0 {
                stats.mean_constraints = cons as f64 / stats.count as f64;
            }
            let (tensor, stderr) = assemble(sample, &sites, &only, r, s);
            (tensor, stderr, stats)
        }
    };
    Ok(MeasureValue {
        tensor,
        metadata: MeasureMeta {
            kind: MeasureKind::Shell,
            radius,
            r,
            s,
            region: region.clone(),
            method,
            stderr,
            cells,
            interior_sites: None,
        },
    })
}

/// Interior flags: a site is interior when all `2d` axis neighbors at the
/// lattice spacing belong to the sample.
pub fn interior_mask(sample: &PointSample) -> Result<Vec<bool>> {
    let lattice = sample
        .lattice()
        .ok_or_else(|| Error::precondition("the interior filter needs lattice metadata"))?;
    let d = sample.dim();
    let keys: Vec<Vec<i64>> = sample.points().map(|p| lattice.index_of(p)).collect();
    let present: HashSet<&[i64]> = keys.iter().map(|k| k.as_slice()).collect();
    let mut probe = vec![0i64; d];
    Ok(keys
        .iter()
        .map(|k| {
            (0..d).all(|axis| {
                [-1, 1].iter().all(|step| {
                    probe.copy_from_slice(k);
                    probe[axis] += step;
                    present.contains(probe.as_slice())
                })
            })
        })
        .collect())
}

/// Split a lattice sample into its interior and boundary points.
pub fn interior_filter(sample: &PointSample) -> Result<(PointSample, PointSample)> {
    let mask = interior_mask(sample)?;
    let (inner, outer): (Vec<usize>, Vec<usize>) = (0..sample.len()).partition(|&i| mask[i]);
    Ok((sample.subset(&inner), sample.subset(&outer)))
}

/// The Voronoi tensor measure summed over boundary sites only; every cell
/// is still clipped against the full sample.
pub fn refined_measure(
    sample: &PointSample,
    radius: f64,
    r: u32,
    s: u32,
    region: &SpatialRegion,
    method: MomentMethod,
) -> Result<MeasureValue> {
    let roi = RegionOfInterest::spatial(region.clone());
    check_inputs(sample, radius, s, &roi, method)?;
    let mask = interior_mask(sample)?;
    let sites = sites_in(sample, region, |i| !mask[i]);
    let interior = sites_in(sample, region, |i| mask[i]).len();
    let (tables, cells) = site_moments(sample, radius, s, method, &sites)?;
    let (tensor, stderr) = assemble(sample, &sites, &tables, r, s);
    Ok(MeasureValue {
        tensor,
        metadata: MeasureMeta {
            kind: MeasureKind::Refined,
            radius,
            r,
            s,
            region: roi,
            method,
            stderr,
            cells,
            interior_sites: Some(interior),
        },
    })
}
