//! Steiner-system inversion: Minkowski tensor estimates from Voronoi
//! tensor measures at several radii, plus the direct lattice volume tensor.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{MeasureKind, MeasureValue, SpatialRegion};
use crate::shapes::PointSample;
use crate::symtensor::{basis_len, factorial, sym_pow, SymTensor};

/// Largest accepted condition number of a Steiner matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Default upper bound on the radius scale when the reach is larger.
pub const DEFAULT_RADIUS_CAP: f64 = 0.5;

/// Volume of the unit ball in `R^j`.
pub fn kappa(j: usize) -> f64 {
    match j {
        0 => 1.0,
        1 => 2.0,
        _ => kappa(j - 2) * 2.0 * PI / j as f64,
    }
}

/// Surface area of the unit sphere in `R^j`.
pub fn omega(j: usize) -> f64 {
    j as f64 * kappa(j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `V_R = r! s! Σ_{k=0}^{d} κ_{s+k} R^{s+k} Φ_{d-k}`, unknowns
    /// `Φ_d, ..., Φ_0`.
    Standard,
    /// Shell measures `V_R - V_{R/2}`, unknowns `Φ_{d-1}, ..., Φ_0`.
    Shell,
    /// `V_R - r! Φ_d` for `s = 0`, unknowns `Φ_{d-1}, ..., Φ_0`.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinerMatrix {
    pub variant: Variant,
    pub dim: usize,
    pub r: u32,
    pub s: u32,
    pub radii: Vec<f64>,
    /// Row-major entries, one row per radius.
    pub entries: Vec<Vec<f64>>,
    /// 1-norm condition number (2-norm when overdetermined).
    pub condition: f64,
}

impl SteinerMatrix {
    /// Square system: `d + 1` radii for the standard variant, `d` otherwise.
    pub fn new(radii: &[f64], r: u32, s: u32, dim: usize, variant: Variant) -> Result<Self> {
        let need = unknowns(dim, variant);
        if radii.len() != need {
            return Err(Error::invalid(format!(
                "the {variant:?} Steiner system in d = {dim} needs {need} radii, got {}",
                radii.len()
            )));
        }
        Self::build(radii, r, s, dim, variant)
    }

    /// Least-squares system with at least as many radii as unknowns.
    pub fn overdetermined(radii: &[f64], r: u32, s: u32, dim: usize, variant: Variant) -> Result<Self> {
        let need = unknowns(dim, variant);
        if radii.len() < need {
            return Err(Error::invalid(format!(
                "the {variant:?} Steiner system in d = {dim} needs at least {need} radii, got {}",
                radii.len()
            )));
        }
        Self::build(radii, r, s, dim, variant)
    }

    fn build(radii: &[f64], r: u32, s: u32, dim: usize, variant: Variant) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if radii.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("radii must be positive and finite"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("radii must be strictly increasing"));
        }
        if variant == Variant::Reduced && s != 0 {
            return Err(Error::invalid("the reduced-radius system needs s = 0"));
        }
        let fact = factorial(r) * factorial(s);
        let first = if variant == Variant::Standard { 0 } else { 1 };
        let entries: Vec<Vec<f64>> = radii
            .iter()
            .map(|&rad| {
                (first..=dim)
                    .map(|j| {
                        let e = (s as usize + j) as i32;
                        let base = fact * kappa(s as usize + j) * rad.powi(e);
                        match variant {
                            Variant::Shell => base * (1.0 - 0.5f64.powi(e)),
                            _ => base,
                        }
                    })
                    .collect()
            })
            .collect();
        let mut m = SteinerMatrix {
            variant,
            dim,
            r,
            s,
            radii: radii.to_vec(),
            entries,
            condition: f64::NAN,
        };
        m.condition = condition(&m.matrix());
        Ok(m)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.entries[0].len();
        DMatrix::from_fn(self.entries.len(), n, |i, j| self.entries[i][j])
    }

    /// Index `k` of `Φ_k` for each column.
    pub fn orders(&self) -> Vec<usize> {
        let first = if self.variant == Variant::Standard { 0 } else { 1 };
        (first..=self.dim).map(|j| self.dim - j).collect()
    }

    /// Measure values `A Φ` for given tensors (keyed by `k`).
    pub fn apply(&self, phi: &BTreeMap<usize, SymTensor>) -> Result<Vec<SymTensor>> {
        let rank = self.r + self.s;
        let orders = self.orders();
        let mut out = Vec::with_capacity(self.radii.len());
        for row in &self.entries {
            let mut v = SymTensor::zeros(self.dim, rank);
            for (col, k) in orders.iter().enumerate() {
                let t = phi
                    .get(k)
                    .ok_or_else(|| Error::invalid(format!("missing tensor for k = {k}")))?;
                v += &t.scale(row[col]);
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Solve `A Φ = V` for every tensor coefficient with one factorization.
    pub fn solve(&self, values: &[SymTensor]) -> Result<TensorEstimate> {
        if values.len() != self.radii.len() {
            return Err(Error::invalid(format!(
                "{} measure values for {} radii",
                values.len(),
                self.radii.len()
            )));
        }
        let rank = self.r + self.s;
        for v in values {
            if v.dim() != self.dim || v.rank() != rank {
                return Err(Error::invalid(format!(
                    "measure tensor has (d, rank) = ({}, {}), expected ({}, {rank})",
                    v.dim(),
                    v.rank(),
                    self.dim
                )));
            }
        }
        if !(self.condition.is_finite() && self.condition <= MAX_CONDITION) {
            return Err(Error::Numerical(format!(
                "Steiner matrix is ill-conditioned (condition {:.3e} > {MAX_CONDITION:e}) for radii {:?}; \
                 spread the radii further apart",
                self.condition, self.radii
            )));
        }
        let a = self.matrix();
        let ncoef = basis_len(self.dim, rank);
        let b = DMatrix::from_fn(values.len(), ncoef, |i, c| values[i].coeffs()[c]);

        // equilibrate columns: solve (A D) y = b, x = D y
        let scales: Vec<f64> = (0..a.ncols()).map(|j| 1.0 / a.column(j).amax()).collect();
        let mut ad = a.clone();
        for (j, sc) in scales.iter().enumerate() {
            ad.column_mut(j).scale_mut(*sc);
        }
        let y = if ad.is_square() {
            ad.lu()
                .solve(&b)
                .ok_or_else(|| Error::Numerical("Steiner matrix is singular".into()))?
        } else {
            ad.svd(true, true)
                .solve(&b, 1e-15)
                .map_err(|e| Error::Numerical(format!("least-squares solve failed: {e}")))?
        };
        let mut x = y;
        for (j, sc) in scales.iter().enumerate() {
            x.row_mut(j).scale_mut(*sc);
        }
        let resid = &a * &x - &b;
        let bn = b.norm();
        let residual = if bn > 0.0 { resid.norm() / bn } else { resid.norm() };

        let mut tensors = BTreeMap::new();
        let mut solved_top = None;
        let mut warnings = Vec::new();
        for (col, k) in self.orders().into_iter().enumerate() {
            let coeffs: Vec<f64> = x.row(col).iter().copied().collect();
            let t = SymTensor::from_coeffs(self.dim, rank, coeffs)?;
            if k == self.dim && self.s >= 1 {
                // Φ_d^{r,s} vanishes for s ≥ 1; keep the solved value aside
                tensors.insert(k, SymTensor::zeros(self.dim, rank));
                solved_top = Some(t);
            } else {
                tensors.insert(k, t);
            }
        }
        if !a.is_square() {
            warnings.push(format!(
                "least-squares solve over {} radii for {} unknowns",
                a.nrows(),
                a.ncols()
            ));
        }
        Ok(TensorEstimate {
            dim: self.dim,
            r: self.r,
            s: self.s,
            variant: self.variant,
            radii: self.radii.clone(),
            condition: self.condition,
            residual,
            tensors,
            solved_top,
            warnings,
        })
    }
}

fn unknowns(dim: usize, variant: Variant) -> usize {
    match variant {
        Variant::Standard => dim + 1,
        Variant::Shell | Variant::Reduced => dim,
    }
}

fn condition(a: &DMatrix<f64>) -> f64 {
    if a.is_square() {
        let norm1 = |m: &DMatrix<f64>| {
            (0..m.ncols())
                .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        match a.clone().try_inverse() {
            Some(inv) => norm1(a) * norm1(&inv),
            None => f64::INFINITY,
        }
    } else {
        let sv = a.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

/// Tensor estimates `Φ_k` keyed by `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorEstimate {
    pub dim: usize,
    pub r: u32,
    pub s: u32,
    pub variant: Variant,
    pub radii: Vec<f64>,
    pub condition: f64,
    /// `‖A Φ - V‖ / ‖V‖` (Frobenius over all coefficients).
    pub residual: f64,
    pub tensors: BTreeMap<usize, SymTensor>,
    /// For `s >= 1`, the solver's value in the `Φ_d` slot, which the
    /// estimate itself reports as zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solved_top: Option<SymTensor>,
    pub warnings: Vec<String>,
}

impl TensorEstimate {
    pub fn get(&self, k: usize) -> Option<&SymTensor> {
        self.tensors.get(&k)
    }
}

fn check_measures(measures: &[MeasureValue], matrix: &SteinerMatrix, kinds: &[MeasureKind]) -> Result<()> {
    if measures.len() != matrix.radii.len() {
        return Err(Error::invalid(format!(
            "{} measures for {} radii",
            measures.len(),
            matrix.radii.len()
        )));
    }
    let region = &measures[0].metadata.region;
    for (m, &rad) in measures.iter().zip(&matrix.radii) {
        let meta = &m.metadata;
        if (meta.radius - rad).abs() > 1e-12 * rad {
            return Err(Error::invalid(format!(
                "measure at radius {} does not match matrix radius {rad}",
                meta.radius
            )));
        }
        if (meta.r, meta.s) != (matrix.r, matrix.s) {
            return Err(Error::invalid(format!(
                "measure ranks ({}, {}) differ from matrix ranks ({}, {})",
                meta.r, meta.s, matrix.r, matrix.s
            )));
        }
        if &meta.region != region {
            return Err(Error::invalid("measures were taken over different regions"));
        }
        if !kinds.contains(&meta.kind) {
            return Err(Error::invalid(format!(
                "{:?} measures do not fit the {:?} Steiner system",
                meta.kind, matrix.variant
            )));
        }
    }
    Ok(())
}

fn tensors_of(measures: &[MeasureValue]) -> Vec<SymTensor> {
    measures.iter().map(|m| m.tensor.clone()).collect()
}

/// `Φ̂` from Voronoi tensor measures at the matrix radii.
pub fn estimate_tensors(measures: &[MeasureValue], matrix: &SteinerMatrix) -> Result<TensorEstimate> {
    if matrix.variant != Variant::Standard {
        return Err(Error::invalid("estimate_tensors needs the standard Steiner matrix"));
    }
    check_measures(measures, matrix, &[MeasureKind::Voronoi, MeasureKind::Refined])?;
    matrix.solve(&tensors_of(measures))
}

/// Local estimates `Φ̄_0 .. Φ̄_{d-1}` from shell measures.
pub fn estimate_local(measures: &[MeasureValue], matrix: &SteinerMatrix) -> Result<TensorEstimate> {
    if matrix.variant != Variant::Shell {
        return Err(Error::invalid("estimate_local needs the shell Steiner matrix"));
    }
    check_measures(measures, matrix, &[MeasureKind::Shell])?;
    matrix.solve(&tensors_of(measures))
}

/// Circumradius `aC` of the Voronoi cell of a cubic lattice of spacing `a`.
pub fn lattice_cell_bound(spacing: f64, dim: usize) -> f64 {
    spacing * (dim as f64).sqrt() / 2.0
}

/// `Φ̃` from boundary-filtered measures; needs `aC < R_0`.
pub fn estimate_refined(measures: &[MeasureValue], matrix: &SteinerMatrix, spacing: f64) -> Result<TensorEstimate> {
    let bound = lattice_cell_bound(spacing, matrix.dim);
    check_refined_radii(&matrix.radii, bound)?;
    if measures.iter().any(|m| m.metadata.kind != MeasureKind::Refined) {
        return Err(Error::invalid("estimate_refined needs refined measures"));
    }
    estimate_tensors(measures, matrix)
}

pub fn check_refined_radii(radii: &[f64], bound: f64) -> Result<()> {
    match radii.first() {
        Some(&r0) if bound < r0 => Ok(()),
        Some(&r0) => Err(Error::precondition(format!(
            "refined estimation needs the smallest radius above the lattice cell bound: \
             R_0 = {r0} <= aC = {bound}; use a finer lattice or larger radii"
        ))),
        None => Err(Error::invalid("no radii given")),
    }
}

/// `φ̂ = (a^d / r!) Σ z^r` over a lattice sample.
pub fn volume_tensor_hat(sample: &PointSample, r: u32) -> Result<SymTensor> {
    let lattice = sample
        .lattice()
        .ok_or_else(|| Error::precondition("the volume tensor estimator needs lattice metadata"))?;
    let d = sample.dim();
    let n = basis_len(d, r);
    let mut sum = vec![0.0; n];
    let mut comp = vec![0.0; n];
    for p in sample.points() {
        for (i, v) in sym_pow(p, r).coeffs().iter().enumerate() {
            let t = sum[i] + v;
            comp[i] += if sum[i].abs() >= v.abs() {
                (sum[i] - t) + v
            } else {
                (v - t) + sum[i]
            };
            sum[i] = t;
        }
    }
    let total: Vec<f64> = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
    let t = SymTensor::from_coeffs(d, r, total)?;
    Ok(t.scale(lattice.cell_volume() / factorial(r)))
}

/// `Φ_0 .. Φ_{d-1}` from `V_R - r! φ̂` at `d` radii.
pub fn reduced_radius_estimate(
    measures: &[MeasureValue],
    volume_tensor: &SymTensor,
    matrix: &SteinerMatrix,
) -> Result<TensorEstimate> {
    if matrix.variant != Variant::Reduced {
        return Err(Error::invalid("reduced_radius_estimate needs the reduced Steiner matrix"));
    }
    check_measures(measures, matrix, &[MeasureKind::Voronoi])?;
    if measures[0].metadata.region.spatial != SpatialRegion::All {
        return Err(Error::precondition("the reduced-radius estimator needs the whole space as region"));
    }
    let shift = volume_tensor.scale(factorial(matrix.r));
    let values: Vec<SymTensor> = measures.iter().map(|m| &m.tensor - &shift).collect();
    matrix.solve(&values)
}

/// `count` radii spaced geometrically over `[0.3β, 0.8β]` with
/// `β = min(reach, cap)`.
pub fn auto_radii(count: usize, reach: Option<f64>, cap: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("need at least one radius"));
    }
    let beta = reach.map_or(cap, |r| r.min(cap));
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("radius scale must be positive, got {beta}")));
    }
    let (lo, hi) = (0.3 * beta, 0.8 * beta);
    if count == 1 {
        return Ok(vec![hi]);
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<f64> = (0..count).map(|i| lo * ratio.powi(i as i32)).collect();
    out[count - 1] = hi;
    Ok(out)
}

/// Warning text when the largest radius reaches the declared reach.
pub fn reach_warning(radii: &[f64], reach: Option<f64>) -> Option<String> {
    let reach = reach?;
    let top = radii.iter().cloned().fold(0.0, f64::max);
    (top >= reach).then(|| {
        format!("largest radius {top} is not below the declared reach {reach}; the Steiner relation may not hold")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::MomentMethod;
    use crate::measures::{refined_measure, shell_measure, voronoi_tensor_measure, RegionOfInterest};
    use crate::shapes::{digitize, Lattice, ReferenceShape, Window};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EXACT: MomentMethod = MomentMethod::Exact { max_degree: 4 };

    fn disk_sample(a: f64) -> PointSample {
        let disk = ReferenceShape::unit_disk();
        let lat = Lattice::cubic(a, 2).unwrap();
        digitize(&disk, &lat, &Window::around(&disk, 2.0 * a)).unwrap()
    }

    fn scalar(v: f64) -> SymTensor {
        SymTensor::scalar(2, v)
    }

    #[test]
    fn kappa_omega_values() {
        assert_eq!(kappa(0), 1.0);
        assert_eq!(kappa(1), 2.0);
        assert!((kappa(2) - PI).abs() < 1e-15);
        assert!((kappa(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((omega(2) - 2.0 * PI).abs() < 1e-15);
        // Γ-function closed form
        for j in 0..12 {
            let g = gamma_half(j as f64 / 2.0 + 1.0);
            assert!((kappa(j) - PI.powf(j as f64 / 2.0) / g).abs() < 1e-12 * kappa(j));
        }
    }

    /// Γ at integers and half-integers.
    fn gamma_half(x: f64) -> f64 {
        if x == 1.0 {
            1.0
        } else if x == 0.5 {
            PI.sqrt()
        } else {
            (x - 1.0) * gamma_half(x - 1.0)
        }
    }

    #[test]
    fn matrix_examples() {
        let m = SteinerMatrix::new(&[1.0, 2.0, 3.0], 0, 0, 2, Variant::Standard).unwrap();
        let want = [[1.0, 2.0, PI], [1.0, 4.0, 4.0 * PI], [1.0, 6.0, 9.0 * PI]];
        for (row, w) in m.entries.iter().zip(want) {
            for (a, b) in row.iter().zip(w) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        let m = SteinerMatrix::new(&[1.0, 2.0, 3.0], 0, 1, 2, Variant::Standard).unwrap();
        for (row, rad) in m.entries.iter().zip([1.0f64, 2.0, 3.0]) {
            assert!((row[0] - kappa(1) * rad).abs() < 1e-13);
            assert!((row[1] - kappa(2) * rad.powi(2)).abs() < 1e-13);
            assert!((row[2] - kappa(3) * rad.powi(3)).abs() < 1e-12);
        }
        let m = SteinerMatrix::new(&[1.0, 2.0], 0, 0, 2, Variant::Shell).unwrap();
        assert!((m.entries[1][0] - 2.0).abs() < 1e-14);
        assert!((m.entries[1][1] - 0.75 * PI * 4.0).abs() < 1e-13);
        assert!(m.condition.is_finite());

        assert!(SteinerMatrix::new(&[1.0, 2.0], 0, 0, 2, Variant::Standard).is_err());
        assert!(SteinerMatrix::new(&[1.0, 1.0, 3.0], 0, 0, 2, Variant::Standard).is_err());
        assert!(SteinerMatrix::new(&[3.0, 2.0, 1.0], 0, 0, 2, Variant::Standard).is_err());
    }

    #[test]
    fn disk_parallel_volumes() {
        let radii = [1.0, 2.0, 3.0];
        let m = SteinerMatrix::new(&radii, 0, 0, 2, Variant::Standard).unwrap();
        let v: Vec<SymTensor> = radii.iter().map(|r| scalar(PI * (1.0 + r) * (1.0 + r))).collect();
        let e = m.solve(&v).unwrap();
        assert!((e.tensors[&2].coeffs()[0] - PI).abs() < 1e-12);
        assert!((e.tensors[&1].coeffs()[0] - PI).abs() < 1e-12);
        assert!((e.tensors[&0].coeffs()[0] - 1.0).abs() < 1e-12);
        assert!(e.residual < 1e-14);
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            for (r, s) in [(0u32, 0u32), (1, 0), (0, 1), (0, 2), (1, 1)] {
                for variant in [Variant::Standard, Variant::Shell] {
                    let n = unknowns(d, variant);
                    let mut radii: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
                    radii.sort_by(f64::total_cmp);
                    let Ok(m) = SteinerMatrix::new(&radii, r, s, d, variant) else { continue };
                    if m.condition > 1e9 {
                        continue;
                    }
                    let phi: BTreeMap<usize, SymTensor> = m
                        .orders()
                        .into_iter()
                        .map(|k| {
                            let c = (0..basis_len(d, r + s)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                            (k, SymTensor::from_coeffs(d, r + s, c).unwrap())
                        })
                        .collect();
                    let v = m.apply(&phi).unwrap();
                    let e = m.solve(&v).unwrap();
                    for (k, t) in &phi {
                        let got = if *k == d && s >= 1 { e.solved_top.as_ref().unwrap() } else { &e.tensors[k] };
                        let err = (got - t).max_abs_coeff() / t.max_abs_coeff();
                        assert!(err < 1e-9, "d={d} r={r} s={s} k={k}: {err}");
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_round_trip() {
        let radii = [0.2, 0.5];
        let m = SteinerMatrix::new(&radii, 0, 0, 2, Variant::Reduced).unwrap();
        let phi_d = scalar(PI);
        let vols: Vec<SymTensor> = radii.iter().map(|r| scalar(PI * (1.0 + r) * (1.0 + r))).collect();
        let shift_vals: Vec<SymTensor> = vols.iter().map(|v| v - &phi_d).collect();
        let e = m.solve(&shift_vals).unwrap();
        assert!((e.tensors[&1].coeffs()[0] - PI).abs() < 1e-10);
        assert!((e.tensors[&0].coeffs()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ill_conditioned_is_an_error() {
        let m = SteinerMatrix::new(&[1e-5, 1.0001e-5, 1.0002e-5, 1.0003e-5], 0, 2, 3, Variant::Standard).unwrap();
        let v = vec![SymTensor::zeros(3, 2); 4];
        assert!(matches!(m.solve(&v), Err(Error::Numerical(_))));
    }

    #[test]
    fn default_radii_are_well_conditioned() {
        for d in 1..=3 {
            for reach in [None, Some(2.0), Some(0.5)] {
                for (r, s) in [(0, 0), (1, 0), (0, 1), (0, 2), (1, 1), (2, 0)] {
                    let radii = auto_radii(d + 1, reach, DEFAULT_RADIUS_CAP).unwrap();
                    let m = SteinerMatrix::new(&radii, r, s, d, Variant::Standard).unwrap();
                    assert!(m.condition <= 1e6, "d={d} r={r} s={s}: {}", m.condition);
                }
            }
        }
        let radii = auto_radii(3, None, DEFAULT_RADIUS_CAP).unwrap();
        assert!((radii[0] - 0.15).abs() < 1e-15 && (radii[2] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn least_squares_mode() {
        let radii = [0.5, 1.0, 1.5, 2.0, 2.5];
        let m = SteinerMatrix::overdetermined(&radii, 0, 0, 2, Variant::Standard).unwrap();
        let v: Vec<SymTensor> = radii.iter().map(|r| scalar(PI * (1.0 + r) * (1.0 + r))).collect();
        let e = m.solve(&v).unwrap();
        assert!((e.tensors[&0].coeffs()[0] - 1.0).abs() < 1e-10);
        assert!(!e.warnings.is_empty());
    }

    #[test]
    fn volume_tensor_examples() {
        let a = 0.1;
        let s = disk_sample(a);
        let v0 = volume_tensor_hat(&s, 0).unwrap();
        assert!((v0.coeffs()[0] - a * a * s.len() as f64).abs() < 1e-12);
        let v1 = volume_tensor_hat(&s, 1).unwrap();
        assert!(v1.max_abs_coeff() < 1e-12);
        assert!(volume_tensor_hat(&PointSample::new(2, vec![vec![0.0, 0.0]], None).unwrap(), 0).is_err());
    }

    #[test]
    fn digitized_disk_pipeline() {
        let s = disk_sample(0.05);
        let radii = [0.15, 0.25, 0.4];
        let measures: Vec<MeasureValue> = radii
            .iter()
            .map(|&r| voronoi_tensor_measure(&s, r, 0, 0, &SpatialRegion::All, EXACT).unwrap())
            .collect();
        let m = SteinerMatrix::new(&radii, 0, 0, 2, Variant::Standard).unwrap();
        let e = estimate_tensors(&measures, &m).unwrap();
        // O(a) bias: the outermost sites sit about a/2 inside the boundary
        assert!((e.tensors[&2].coeffs()[0] - PI).abs() < 0.25);
        assert!((e.tensors[&1].coeffs()[0] - PI).abs() < 0.25);
        assert!((e.tensors[&0].coeffs()[0] - 1.0).abs() < 0.25);

        // reduced radius: drop the smallest radius
        let phi = volume_tensor_hat(&s, 0).unwrap();
        let mr = SteinerMatrix::new(&radii[1..], 0, 0, 2, Variant::Reduced).unwrap();
        let red = reduced_radius_estimate(&measures[1..], &phi, &mr).unwrap();
        // pixel volume and union-of-balls volume differ at O(a)
        assert!((red.tensors[&1].coeffs()[0] - e.tensors[&1].coeffs()[0]).abs() < 0.6);

        // shell
        let shells: Vec<MeasureValue> = radii[1..]
            .iter()
            .map(|&r| shell_measure(&s, r, 0, 0, &RegionOfInterest::all(), EXACT).unwrap())
            .collect();
        let ms = SteinerMatrix::new(&radii[1..], 0, 0, 2, Variant::Shell).unwrap();
        let loc = estimate_local(&shells, &ms).unwrap();
        assert!((loc.tensors[&1].coeffs()[0] - PI).abs() < 0.2);
        assert!((loc.tensors[&0].coeffs()[0] - 1.0).abs() < 0.3);
    }

    #[test]
    fn refined_matches_standard_for_s0() {
        let a = 0.05;
        let s = disk_sample(a);
        let radii = [0.15, 0.25, 0.4];
        let m = SteinerMatrix::new(&radii, 0, 0, 2, Variant::Standard).unwrap();
        let full: Vec<MeasureValue> = radii
            .iter()
            .map(|&r| voronoi_tensor_measure(&s, r, 0, 0, &SpatialRegion::All, EXACT).unwrap())
            .collect();
        let refined: Vec<MeasureValue> = radii
            .iter()
            .map(|&r| refined_measure(&s, r, 0, 0, &SpatialRegion::All, EXACT).unwrap())
            .collect();
        let e = estimate_tensors(&full, &m).unwrap();
        let f = estimate_refined(&refined, &m, a).unwrap();
        for k in 0..2 {
            let (x, y) = (e.tensors[&k].coeffs()[0], f.tensors[&k].coeffs()[0]);
            assert!((x - y).abs() <= 1e-9 * x.abs(), "k={k}: {x} vs {y}");
        }
        assert!(matches!(estimate_refined(&refined, &m, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn reach_warning_text() {
        assert!(reach_warning(&[0.1, 0.2], Some(0.15)).is_some());
        assert!(reach_warning(&[0.1, 0.2], Some(0.5)).is_none());
        assert!(reach_warning(&[0.1, 0.2], None).is_none());
    }
}
