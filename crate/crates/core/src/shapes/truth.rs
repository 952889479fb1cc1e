//! Ground-truth Minkowski tensors of the reference shapes.
//!
//! Closed forms cover intrinsic volumes of balls, boxes and annuli and
//! volume tensors up to rank 2 of balls and boxes. Everything else in the
//! plane comes from a boundary quadrature of the support measures:
//!
//! * `Λ_1` is half the arc length on the boundary, with the outer normal;
//! * `Λ_0` is `1/(2π)` times signed curvature times arc length, plus the
//!   normal cone (turning angle) at corners;
//! * volume tensors use Green's theorem on the oriented boundary.

use serde::{Deserialize, Serialize};

use super::ReferenceShape;
use crate::error::{Error, Result};
use crate::estimators::{kappa, omega};
use crate::symtensor::{factorial, sym_pow, sym_product, MultiIndex, SymTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    /// Numerical boundary-quadrature oracle.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub tensor: SymTensor,
    pub provenance: Provenance,
}

const PANELS: usize = 64;

/// `Φ_k^{r,s}(K)` for a reference shape.
pub fn ground_truth(shape: &ReferenceShape, k: usize, r: u32, s: u32) -> Result<GroundTruth> {
    let d = shape.dim();
    if k > d {
        return Err(Error::invalid(format!("k = {k} exceeds dimension {d}")));
    }
    if k == d && s > 0 {
        return Ok(GroundTruth {
            tensor: SymTensor::zeros(d, r + s),
            provenance: Provenance::Analytic,
        });
    }
    if let Some(t) = analytic(shape, k, r, s) {
        return Ok(GroundTruth {
            tensor: t,
            provenance: Provenance::Analytic,
        });
    }
    if d != 2 {
        return Err(Error::Unsupported(format!(
            "no ground truth for Φ_{k}^({r},{s}) of this shape in d = {d}"
        )));
    }
    let tensor = if k == 2 {
        volume_tensor_quadrature(shape, r)?
    } else {
        support_tensor_quadrature(shape, k, r, s)?
    };
    Ok(GroundTruth {
        tensor,
        provenance: Provenance::Derived,
    })
}

fn analytic(shape: &ReferenceShape, k: usize, r: u32, s: u32) -> Option<SymTensor> {
    let d = shape.dim();
    match shape {
        ReferenceShape::Disk { center, radius } => {
            let vol = kappa(d) * radius.powi(d as i32);
            if r == 0 && s == 0 {
                // Φ_k(B_ρ) = binom(d,k) κ_d / κ_{d-k} ρ^k
                let binom = crate::symtensor::binomial(d, k) as f64;
                return Some(SymTensor::scalar(
                    d,
                    binom * kappa(d) / kappa(d - k) * radius.powi(k as i32),
                ));
            }
            if k == d && s == 0 {
                return match r {
                    1 => Some(sym_pow(center, 1).scale(vol)),
                    2 => {
                        let spread = SymTensor::identity2(d)
                            .scale(vol * radius * radius / (d as f64 + 2.0));
                        Some((&sym_pow(center, 2).scale(vol) + &spread).scale(0.5))
                    }
                    _ => None,
                };
            }
            None
        }
        ReferenceShape::Rectangle { min, max } => {
            let sides: Vec<f64> = min.iter().zip(max).map(|(a, b)| b - a).collect();
            let vol: f64 = sides.iter().product();
            let center: Vec<f64> = min.iter().zip(max).map(|(a, b)| 0.5 * (a + b)).collect();
            if r == 0 && s == 0 {
                return Some(SymTensor::scalar(d, elementary_symmetric(&sides, k)));
            }
            if k == d && s == 0 {
                return match r {
                    1 => Some(sym_pow(&center, 1).scale(vol)),
                    2 => {
                        let mut spread = SymTensor::zeros(d, 2);
                        for (i, w) in sides.iter().enumerate() {
                            let mut e = vec![0u32; d];
                            e[i] = 2;
                            spread.set(&MultiIndex::new(e), vol * w * w / 12.0);
                        }
                        Some((&sym_pow(&center, 2).scale(vol) + &spread).scale(0.5))
                    }
                    _ => None,
                };
            }
            None
        }
        ReferenceShape::Annulus { inner, outer, .. } if r == 0 && s == 0 => {
            let pi = std::f64::consts::PI;
            Some(SymTensor::scalar(
                2,
                match k {
                    0 => 0.0,
                    1 => pi * (inner + outer),
                    _ => pi * (outer * outer - inner * inner),
                },
            ))
        }
        ReferenceShape::Ellipse { semi_axes, .. } if r == 0 && s == 0 && k != 1 => {
            Some(SymTensor::scalar(
                2,
                if k == 0 {
                    1.0
                } else {
                    std::f64::consts::PI * semi_axes[0] * semi_axes[1]
                },
            ))
        }
        _ => None,
    }
}

fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k).rev() {
            e[j] += e[j - 1] * v;
        }
    }
    e[k]
}

/// `(1/r!) ∫_K x^r dx` via `∫_K x^α = ∮ x_1^{α_1+1} x_2^{α_2} / (α_1+1) dx_2`.
pub(crate) fn volume_tensor_quadrature(shape: &ReferenceShape, r: u32) -> Result<SymTensor> {
    let mut out = SymTensor::zeros(2, r);
    let basis = MultiIndex::all(2, r);
    for piece in shape.boundary_pieces()? {
        for node in piece.nodes(PANELS) {
            let [x, y] = node.point;
            for (slot, alpha) in basis.iter().enumerate() {
                let [a1, a2] = [alpha.exponents()[0], alpha.exponents()[1]];
                out.coeffs_mut()[slot] +=
                    x.powi(a1 as i32 + 1) * y.powi(a2 as i32) / f64::from(a1 + 1) * node.dy;
            }
        }
    }
    Ok(out.scale(1.0 / factorial(r)))
}

/// `(1/(r! s!)) (ω_{d-k}/ω_{d-k+s}) ∫ x^r u^s dΛ_k` for `k ∈ {0, 1}` in
/// the plane.
pub(crate) fn support_tensor_quadrature(
    shape: &ReferenceShape,
    k: usize,
    r: u32,
    s: u32,
) -> Result<SymTensor> {
    let d = 2;
    let mut acc = SymTensor::zeros(d, r + s);
    for piece in shape.boundary_pieces()? {
        for node in piece.nodes(PANELS) {
            let weight = match k {
                1 => 0.5 * node.ds,
                0 => node.turn / (2.0 * std::f64::consts::PI),
                _ => unreachable!(),
            };
            if weight == 0.0 {
                continue;
            }
            let integrand = sym_product(&sym_pow(&node.point, r), &sym_pow(&node.normal, s))?;
            acc += &integrand.scale(weight);
        }
    }
    let norm = omega(d - k) / omega(d - k + s as usize) / (factorial(r) * factorial(s));
    Ok(acc.scale(norm))
}
