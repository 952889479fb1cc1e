use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::cell::{CellBoundary, ChainPiece, RestrictedCell};
use crate::error::{Error, Result};
use crate::symtensor::{basis_len, MultiIndex, SymTensor};

/// Default maximum moment degree of the exact planar backend.
pub const DEFAULT_MAX_DEGREE: u32 = 4;

const MAX_GAUSS: usize = 32;

/// Gauss-Legendre nodes and weights on `[0, 1]`; exact for polynomials of
/// degree `< 2n`.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!((1..=MAX_GAUSS).contains(&n), "Gauss-Legendre order out of range");
    &RULES.get_or_init(|| (0..=MAX_GAUSS).map(legendre_rule).collect())[n]
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Monomial moments `∫_cell (y - x)^α dy` for all `|α| <= s_max`, stored by
/// degree and canonical order within each degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTable {
    pub site: Vec<f64>,
    pub s_max: u32,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
}

impl MomentTable {
    pub fn zeros(site: Vec<f64>, s_max: u32) -> Self {
        let n = (0..=s_max).map(|k| basis_len(site.len(), k)).sum();
        MomentTable {
            site,
            s_max,
            values: vec![0.0; n],
            stderr: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.site.len()
    }

    fn offset(&self, degree: u32) -> usize {
        (0..degree).map(|k| basis_len(self.dim(), k)).sum()
    }

    fn slot(&self, alpha: &MultiIndex) -> usize {
        let deg = alpha.degree();
        let pos = MultiIndex::all(self.dim(), deg)
            .iter()
            .position(|m| m == alpha)
            .expect("multi-index of matching dimension");
        self.offset(deg) + pos
    }

    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        assert!(alpha.degree() <= self.s_max, "moment degree above table maximum");
        self.values[self.slot(alpha)]
    }

    pub fn get_stderr(&self, alpha: &MultiIndex) -> Option<f64> {
        let i = self.slot(alpha);
        self.stderr.as_ref().map(|e| e[i])
    }

    /// Volume of the region.
    pub fn volume(&self) -> f64 {
        self.values[0]
    }

    /// `∫_cell (y - x)^s dy` as a symmetric tensor; its component at `α`
    /// is the moment `m_α`.
    pub fn degree_tensor(&self, s: u32) -> SymTensor {
        assert!(s <= self.s_max, "moment degree above table maximum");
        let start = self.offset(s);
        let coeffs = self.values[start..start + basis_len(self.dim(), s)].to_vec();
        SymTensor::from_coeffs(self.dim(), s, coeffs).expect("basis length")
    }

    /// Standard errors of `degree_tensor(s)`, coefficientwise.
    pub fn degree_stderr(&self, s: u32) -> Option<Vec<f64>> {
        let start = self.offset(s);
        self.stderr
            .as_ref()
            .map(|e| e[start..start + basis_len(self.dim(), s)].to_vec())
    }
}

/// Table of `∫ cos^p θ sin^q θ dθ` over `[t0, t1]` for `p <= pmax`,
/// `q <= qmax`.
fn trig_table(t0: f64, t1: f64, pmax: usize, qmax: usize) -> Vec<Vec<f64>> {
    let (c0, s0, c1, s1) = (t0.cos(), t0.sin(), t1.cos(), t1.sin());
    let bracket = |p: usize, q: usize| {
        c1.powi(p as i32) * s1.powi(q as i32) - c0.powi(p as i32) * s0.powi(q as i32)
    };
    let mut j = vec![vec![0.0; qmax + 1]; pmax + 1];
    for q in 0..=qmax {
        for p in 0..=pmax {
            let n = (p + q) as f64;
            j[p][q] = match (p, q) {
                (0, 0) => t1 - t0,
                (1, 0) => s1 - s0,
                (0, 1) => c0 - c1,
                (1, 1) => 0.5 * (s1 * s1 - s0 * s0),
                _ if p >= 2 => bracket(p - 1, q + 1) / n + (p - 1) as f64 / n * j[p - 2][q],
                _ => -bracket(p + 1, q - 1) / n + (q - 1) as f64 / n * j[p][q - 2],
            };
        }
    }
    j
}

/// Exact planar moments of a restricted cell up to the default degree cap.
pub fn moments_exact_2d(cell: &RestrictedCell, s_max: u32) -> Result<MomentTable> {
    moments_exact_2d_capped(cell, s_max, DEFAULT_MAX_DEGREE)
}

/// Exact planar moments with an explicit degree cap.
///
/// Green's theorem turns `∫ y1^a y2^b dy` into the boundary integral
/// `∮ y1^(a+1) y2^b / (a+1) dy2`; segments are integrated by Gauss-Legendre
/// quadrature (exact for these polynomials) and arcs in closed form.
pub fn moments_exact_2d_capped(cell: &RestrictedCell, s_max: u32, cap: u32) -> Result<MomentTable> {
    if cell.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "exact cell moments are planar only (got d = {})",
            cell.dim()
        )));
    }
    if s_max > cap {
        return Err(Error::Unsupported(format!(
            "moment degree {s_max} exceeds the exact backend cap {cap}"
        )));
    }
    let mut table = MomentTable::zeros(cell.site().to_vec(), s_max);
    let pieces = match cell.boundary() {
        Some(CellBoundary::Chain(p)) => p,
        _ => return Ok(table),
    };
    let r = cell.radius();
    let sm = s_max as usize;
    let rule = gauss_legendre(sm / 2 + 2);
    let alphas: Vec<MultiIndex> = (0..=s_max).flat_map(|k| MultiIndex::all(2, k)).collect();

    // powers of y1, y2 are accumulated per node to avoid repeated powi
    let mut acc = vec![0.0; alphas.len()];
    for piece in pieces {
        match *piece {
            ChainPiece::Segment { start, end } => {
                let d = [end[0] - start[0], end[1] - start[1]];
                for &(t, w) in rule {
                    let y = [start[0] + t * d[0], start[1] + t * d[1]];
                    let mut p1 = vec![1.0; sm + 2];
                    let mut p2 = vec![1.0; sm + 1];
                    for k in 1..sm + 2 {
                        p1[k] = p1[k - 1] * y[0];
                    }
                    for k in 1..sm + 1 {
                        p2[k] = p2[k - 1] * y[1];
                    }
                    for (slot, alpha) in alphas.iter().enumerate() {
                        let (a, b) = (alpha.exponents()[0] as usize, alpha.exponents()[1] as usize);
                        acc[slot] += w * d[1] * p1[a + 1] * p2[b] / (a + 1) as f64;
                    }
                }
            }
            ChainPiece::Arc {
                start_angle,
                end_angle,
            } => {
                let j = trig_table(start_angle, end_angle, sm + 2, sm);
                for (slot, alpha) in alphas.iter().enumerate() {
                    let (a, b) = (alpha.exponents()[0] as usize, alpha.exponents()[1] as usize);
                    acc[slot] += r.powi((a + b + 2) as i32) / (a + 1) as f64 * j[a + 2][b];
                }
            }
        }
    }
    table.values = acc;
    Ok(table)
}

/// Monte Carlo moments `∫_region (y - center)^α dy` by uniform sampling of
/// an axis box.
pub fn moments_mc<F>(
    region: F,
    lo: &[f64],
    hi: &[f64],
    center: &[f64],
    s_max: u32,
    n: usize,
    seed: u64,
) -> Result<MomentTable>
where
    F: Fn(&[f64]) -> bool,
{
    moments_mc_stream(region, lo, hi, center, s_max, n, seed, 0)
}

/// As [`moments_mc`], drawing from stream `stream` of the seeded generator
/// so independent sites get independent, reproducible samples.
#[allow(clippy::too_many_arguments)]
pub fn moments_mc_stream<F>(
    region: F,
    lo: &[f64],
    hi: &[f64],
    center: &[f64],
    s_max: u32,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<MomentTable>
where
    F: Fn(&[f64]) -> bool,
{
    let d = center.len();
    if lo.len() != d || hi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: lo.len().min(hi.len()),
        });
    }
    if n == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    let widths: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
    let vol: f64 = widths.iter().product();
    if !(vol > 0.0) || !vol.is_finite() {
        return Err(Error::invalid("Monte Carlo bounding box has zero volume"));
    }
    let alphas: Vec<MultiIndex> = (0..=s_max).flat_map(|k| MultiIndex::all(d, k)).collect();
    let sm = s_max as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut sum = vec![0.0; alphas.len()];
    let mut sum2 = vec![0.0; alphas.len()];
    let mut y = vec![0.0; d];
    let mut rel = vec![0.0; d];
    let mut pows = vec![vec![1.0; sm + 1]; d];
    for _ in 0..n {
        for k in 0..d {
            y[k] = lo[k] + widths[k] * rng.gen::<f64>();
        }
        if !region(&y) {
            continue;
        }
        for k in 0..d {
            rel[k] = y[k] - center[k];
            for e in 1..=sm {
                pows[k][e] = pows[k][e - 1] * rel[k];
            }
        }
        for (slot, alpha) in alphas.iter().enumerate() {
            let f: f64 = alpha
                .exponents()
                .iter()
                .enumerate()
                .map(|(k, &e)| pows[k][e as usize])
                .product();
            sum[slot] += f;
            sum2[slot] += f * f;
        }
    }
    let nf = n as f64;
    let mut table = MomentTable::zeros(center.to_vec(), s_max);
    let mut err = vec![0.0; alphas.len()];
    for slot in 0..alphas.len() {
        let mean = sum[slot] / nf;
        let var = (sum2[slot] / nf - mean * mean).max(0.0);
        table.values[slot] = vol * mean;
        err[slot] = vol * (var / nf).sqrt();
    }
    table.stderr = Some(err);
    Ok(table)
}

/// Monte Carlo moments of a restricted cell about its site.
pub fn moments_mc_cell(
    cell: &RestrictedCell,
    s_max: u32,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<MomentTable> {
    if cell.is_empty() {
        let mut t = MomentTable::zeros(cell.site().to_vec(), s_max);
        t.stderr = Some(vec![0.0; t.values.len()]);
        return Ok(t);
    }
    let (lo, hi) = cell.relative_bounds();
    let zero = vec![0.0; cell.dim()];
    let mut t = moments_mc_stream(
        |rel| cell.contains_relative(rel),
        &lo,
        &hi,
        &zero,
        s_max,
        n,
        seed,
        stream,
    )?;
    t.site = cell.site().to_vec();
    Ok(t)
}
