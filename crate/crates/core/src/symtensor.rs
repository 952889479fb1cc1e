//! Symmetric tensors over `R^d`.
//!
//! A symmetric rank-`p` tensor is determined by its coordinates
//! `T(e_{i_1}, ..., e_{i_p})`, and by symmetry only the exponent profile of
//! the index tuple matters. [`SymTensor`] stores one coefficient per
//! [`MultiIndex`] of degree `p`, i.e. `binomial(d+p-1, p)` numbers.
//!
//! Canonical order is lexicographic on the sorted index tuple
//! `i_1 <= ... <= i_p`, which is descending lexicographic order on the
//! exponent vectors: `(2,0), (1,1), (0,2)` for `d = p = 2`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Exponent vector of a monomial `v_1^{a_1} ... v_d^{a_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// All multi-indices of the given degree in canonical order.
    pub fn all(dim: usize, degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(basis_len(dim, degree));
        let mut current = vec![0u32; dim];
        fill(&mut out, &mut current, 0, degree);
        out
    }

    /// Position of this multi-index in [`MultiIndex::all`].
    pub fn rank(&self) -> usize {
        rank_of(&self.0)
    }

    /// Number of index tuples with this exponent profile, `p! / prod(a_i!)`.
    pub fn multinomial(&self) -> f64 {
        let mut out = factorial(self.degree());
        for &a in &self.0 {
            out /= factorial(a);
        }
        out
    }

    /// `prod_i v_i^{a_i}`.
    pub fn monomial(&self, v: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(v)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    if current.is_empty() {
        out.push(MultiIndex(Vec::new()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(out, current, pos + 1, remaining - a);
    }
    current[pos] = 0;
}

/// Number of exponent vectors of the given degree in `dim` variables.
pub fn basis_len(dim: usize, degree: u32) -> usize {
    if dim == 0 {
        return usize::from(degree == 0);
    }
    binomial(degree as usize + dim - 1, dim - 1)
}

fn rank_of(exps: &[u32]) -> usize {
    let d = exps.len();
    let mut remaining: u32 = exps.iter().sum();
    let mut rank = 0;
    for (i, &a) in exps.iter().enumerate().take(d.saturating_sub(1)) {
        // every profile with a larger exponent at position i comes first
        for e in (a + 1)..=remaining {
            rank += basis_len(d - i - 1, remaining - e);
        }
        remaining -= a;
    }
    rank
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A symmetric tensor of rank `rank` over `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct SymTensor {
    dim: usize,
    rank: u32,
    coeffs: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(dim: usize, rank: u32) -> Self {
        SymTensor {
            dim,
            rank,
            coeffs: vec![0.0; basis_len(dim, rank)],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        SymTensor {
            dim,
            rank: 0,
            coeffs: vec![value],
        }
    }

    /// Build from coefficients in canonical order.
    pub fn from_coeffs(dim: usize, rank: u32, coeffs: Vec<f64>) -> Result<Self> {
        let expected = basis_len(dim, rank);
        if coeffs.len() != expected {
            return Err(Error::Arity {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(SymTensor { dim, rank, coeffs })
    }

    /// The rank-2 identity tensor `Q` (the metric tensor).
    pub fn identity2(dim: usize) -> Self {
        let mut t = SymTensor::zeros(dim, 2);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 2;
            t.coeffs[rank_of(&e)] = 1.0;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn get(&self, index: &MultiIndex) -> f64 {
        debug_assert_eq!(index.degree(), self.rank);
        self.coeffs[index.rank()]
    }

    pub fn set(&mut self, index: &MultiIndex, value: f64) {
        debug_assert_eq!(index.degree(), self.rank);
        self.coeffs[index.rank()] = value;
    }

    /// `(multi-index, coefficient)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        MultiIndex::all(self.dim, self.rank)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymTensor {
            dim: self.dim,
            rank: self.rank,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn try_add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.check_same_shape(other)?;
        Ok(SymTensor {
            dim: self.dim,
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    fn check_same_shape(&self, other: &SymTensor) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        if self.rank != other.rank {
            return Err(Error::invalid(format!(
                "rank mismatch: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `T(v_1, ..., v_p)`.
    pub fn evaluate(&self, args: &[&[f64]]) -> Result<f64> {
        if args.len() != self.rank as usize {
            return Err(Error::Arity {
                expected: self.rank as usize,
                found: args.len(),
            });
        }
        for a in args {
            check_dim(self.dim, a.len())?;
        }
        if self.rank == 0 {
            return Ok(self.coeffs[0]);
        }
        let p = self.rank as usize;
        let mut tuple = vec![0usize; p];
        let mut profile = vec![0u32; self.dim];
        let mut total = 0.0;
        loop {
            profile.iter_mut().for_each(|e| *e = 0);
            let mut weight = 1.0;
            for (k, &i) in tuple.iter().enumerate() {
                profile[i] += 1;
                weight *= args[k][i];
            }
            if weight != 0.0 {
                total += weight * self.coeffs[rank_of(&profile)];
            }
            // odometer increment over [0, d)^p
            let mut k = 0;
            loop {
                if k == p {
                    return Ok(total);
                }
                tuple[k] += 1;
                if tuple[k] < self.dim {
                    break;
                }
                tuple[k] = 0;
                k += 1;
            }
        }
    }

    /// `T(v, ..., v)`.
    pub fn evaluate_diagonal(&self, v: &[f64]) -> f64 {
        self.iter()
            .map(|(alpha, c)| c * alpha.multinomial() * alpha.monomial(v))
            .sum()
    }

    /// Frobenius norm of the full `d^p` coordinate array.
    pub fn frobenius_norm(&self) -> f64 {
        self.iter()
            .map(|(alpha, c)| alpha.multinomial() * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Push the tensor forward by the linear map `m` (rows of a `d x d`
    /// matrix): `(mT)(v_1, ..., v_p) = T(m^T v_1, ..., m^T v_p)`.
    pub fn transform(&self, m: &[Vec<f64>]) -> Result<SymTensor> {
        check_dim(self.dim, m.len())?;
        let cols: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| m[i][j]).collect())
            .collect();
        let mut out = SymTensor::zeros(self.dim, self.rank);
        for (slot, alpha) in MultiIndex::all(self.dim, self.rank).iter().enumerate() {
            // representative tuple for alpha, each e_i mapped to m^T e_i
            let args: Vec<&[f64]> = alpha
                .exponents()
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| std::iter::repeat(cols[i].as_slice()).take(a as usize))
                .collect();
            out.coeffs[slot] = self.evaluate(&args)?;
        }
        Ok(out)
    }
}

impl Add<&SymTensor> for &SymTensor {
    type Output = SymTensor;

    fn add(self, rhs: &SymTensor) -> SymTensor {
        self.try_add(rhs).expect("tensor shapes must agree")
    }
}

impl Sub<&SymTensor> for &SymTensor {
    type Output = SymTensor;

    fn sub(self, rhs: &SymTensor) -> SymTensor {
        self.try_add(&rhs.scale(-1.0))
            .expect("tensor shapes must agree")
    }
}

impl AddAssign<&SymTensor> for SymTensor {
    fn add_assign(&mut self, rhs: &SymTensor) {
        assert_eq!(self.dim, rhs.dim, "tensor dimensions must agree");
        assert_eq!(self.rank, rhs.rank, "tensor ranks must agree");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<f64> for &SymTensor {
    type Output = SymTensor;

    fn mul(self, rhs: f64) -> SymTensor {
        self.scale(rhs)
    }
}

/// `v^r`, the `r`-fold symmetric power of a vector.
pub fn sym_pow(v: &[f64], r: u32) -> SymTensor {
    let dim = v.len();
    let coeffs = MultiIndex::all(dim, r)
        .iter()
        .map(|alpha| alpha.monomial(v))
        .collect();
    SymTensor { dim, rank: r, coeffs }
}

/// Symmetric product `T_1 ⊙ T_2`.
pub fn sym_product(t1: &SymTensor, t2: &SymTensor) -> Result<SymTensor> {
    check_dim(t1.dim, t2.dim)?;
    let dim = t1.dim;
    let p = t1.rank + t2.rank;
    let norm = binomial(p as usize, t1.rank as usize) as f64;
    let mut out = SymTensor::zeros(dim, p);
    let left = MultiIndex::all(dim, t1.rank);
    let right = MultiIndex::all(dim, t2.rank);
    let mut gamma = vec![0u32; dim];
    for (beta, &c1) in left.iter().zip(&t1.coeffs) {
        if c1 == 0.0 {
            continue;
        }
        for (delta, &c2) in right.iter().zip(&t2.coeffs) {
            if c2 == 0.0 {
                continue;
            }
            let mut ways = 1usize;
            for i in 0..dim {
                gamma[i] = beta.0[i] + delta.0[i];
                ways *= binomial(gamma[i] as usize, beta.0[i] as usize);
            }
            out.coeffs[rank_of(&gamma)] += ways as f64 / norm * c1 * c2;
        }
    }
    Ok(out)
}

/// Which norm [`sup_norm`] actually computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    /// `sup |T(v,...,v)|` over unit `v`, by angular grid search with
    /// golden-section refinement (`d = 2`) or exactly (`d = 1`, rank <= 1).
    Sup { grid: usize },
    /// Frobenius norm of the coordinate array; used for `d >= 3`.
    Frobenius,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorNorm {
    pub value: f64,
    pub method: NormKind,
}

pub const SUP_NORM_GRID: usize = 4096;

/// The tensor norm `sup{|T(v_1,...,v_p)| : |v_i| = 1}`.
///
/// For symmetric tensors the supremum is attained with all arguments equal,
/// so only `|T(v,...,v)|` is maximized. In `d >= 3` the coefficient
/// Frobenius norm is returned instead and labelled as such.
pub fn sup_norm(t: &SymTensor) -> TensorNorm {
    let sup = |value| TensorNorm {
        value,
        method: NormKind::Sup {
            grid: SUP_NORM_GRID,
        },
    };
    if t.rank == 0 {
        return sup(t.coeffs[0].abs());
    }
    if t.rank == 1 {
        let v = t.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        return sup(v);
    }
    match t.dim {
        1 => sup(t.coeffs[0].abs()),
        2 => sup(sup_norm_planar(t)),
        _ => TensorNorm {
            value: t.frobenius_norm(),
            method: NormKind::Frobenius,
        },
    }
}

fn sup_norm_planar(t: &SymTensor) -> f64 {
    let f = |theta: f64| t.evaluate_diagonal(&[theta.cos(), theta.sin()]).abs();
    // T(v,...,v) has period pi (even rank) or is odd; |.| has period pi
    let step = std::f64::consts::PI / SUP_NORM_GRID as f64;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..SUP_NORM_GRID {
        let val = f(i as f64 * step);
        if val > best {
            best = val;
            best_i = i;
        }
    }
    let center = best_i as f64 * step;
    let (mut lo, mut hi) = (center - step, center + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    best.max(f1).max(f2).max(f(0.5 * (lo + hi)))
}

#[derive(Serialize, Deserialize)]
struct TensorRepr {
    dim: usize,
    rank: u32,
    coeffs: Vec<CoeffRepr>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    index: Vec<u32>,
    value: f64,
}

impl From<SymTensor> for TensorRepr {
    fn from(t: SymTensor) -> Self {
        let coeffs = t
            .iter()
            .map(|(alpha, value)| CoeffRepr {
                index: alpha.0,
                value,
            })
            .collect();
        TensorRepr {
            dim: t.dim,
            rank: t.rank,
            coeffs,
        }
    }
}

impl TryFrom<TensorRepr> for SymTensor {
    type Error = Error;

    fn try_from(repr: TensorRepr) -> Result<Self> {
        let mut t = SymTensor::zeros(repr.dim, repr.rank);
        if repr.coeffs.len() != t.coeffs.len() {
            return Err(Error::invalid(format!(
                "rank-{} tensor in dimension {} needs {} coefficients, got {}",
                repr.rank,
                repr.dim,
                t.coeffs.len(),
                repr.coeffs.len()
            )));
        }
        let mut seen = vec![false; t.coeffs.len()];
        for c in repr.coeffs {
            let index = MultiIndex(c.index);
            if index.dim() != repr.dim || index.degree() != repr.rank {
                return Err(Error::invalid(format!("bad multi-index {index}")));
            }
            let slot = index.rank();
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::invalid(format!("duplicate multi-index {index}")));
            }
            t.coeffs[slot] = c.value;
        }
        Ok(t)
    }
}
