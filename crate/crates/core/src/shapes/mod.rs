//! Analytic reference sets with membership, metric projection, reach, and
//! boundary parametrizations, plus lattice digitization and ground truth.

mod hausdorff;
pub mod io;
mod lattice;
mod truth;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hausdorff::hausdorff_to_sample;
pub use lattice::{digitize, Lattice, PointSample, Window};
pub use truth::{ground_truth, GroundTruth, Provenance};

/// An analytic compact set.
///
/// `Disk` and `Rectangle` work in any dimension (ball and axis box); the
/// ellipse and annulus are planar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReferenceShape {
    Disk {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        /// Counterclockwise angle of the first semi-axis, radians.
        #[serde(default)]
        rotation: f64,
    },
    Rectangle {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
}

/// Reach of a set and of the closure of its complement. `f64::INFINITY`
/// stands for infinite reach and is written as `"infinite"` in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Reach {
    #[serde(serialize_with = "ser_reach")]
    pub set: f64,
    #[serde(serialize_with = "ser_reach")]
    pub complement: f64,
}

fn ser_reach<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("infinite")
    } else {
        s.serialize_f64(*v)
    }
}

impl Reach {
    /// Largest `delta` for which the set is `delta`-regular.
    pub fn regularity(&self) -> f64 {
        self.set.min(self.complement)
    }
}

/// Nearest point of a shape, with a flag for points whose nearest point is
/// not unique (e.g. the center of an annulus).
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub ambiguous: bool,
}

impl ReferenceShape {
    pub fn unit_disk() -> Self {
        ReferenceShape::Disk {
            center: vec![0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let shape: ReferenceShape = serde_json::from_str(text)?;
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ReferenceShape::Disk { center, radius } => {
                if center.is_empty() || !finite(center) || !(*radius > 0.0) {
                    return Err(Error::invalid("disk needs a center and a positive radius"));
                }
            }
            ReferenceShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                if !finite(center) || !rotation.is_finite() || !semi_axes.iter().all(|&a| a > 0.0)
                {
                    return Err(Error::invalid("ellipse needs positive semi-axes"));
                }
            }
            ReferenceShape::Rectangle { min, max } => {
                if min.is_empty()
                    || min.len() != max.len()
                    || !finite(min)
                    || !finite(max)
                    || min.iter().zip(max).any(|(a, b)| !(a < b))
                {
                    return Err(Error::invalid("rectangle needs min < max in every coordinate"));
                }
            }
            ReferenceShape::Annulus {
                center,
                inner,
                outer,
            } => {
                if !finite(center) || !(*inner > 0.0) || !(outer > inner) {
                    return Err(Error::invalid("annulus needs 0 < inner < outer"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ReferenceShape::Disk { center, .. } => center.len(),
            ReferenceShape::Rectangle { min, .. } => min.len(),
            ReferenceShape::Ellipse { .. } | ReferenceShape::Annulus { .. } => 2,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ReferenceShape::Disk { center, radius } => dist2(x, center) <= radius * radius,
            ReferenceShape::Rectangle { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi),
            ReferenceShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let (u, v) = to_ellipse_frame(x, center, *rotation);
                (u / semi_axes[0]).powi(2) + (v / semi_axes[1]).powi(2) <= 1.0
            }
            ReferenceShape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r2 = dist2(x, center);
                inner * inner <= r2 && r2 <= outer * outer
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ReferenceShape::Disk { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            ReferenceShape::Rectangle { min, max } => (min.clone(), max.clone()),
            ReferenceShape::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                let (c, s) = (rotation.cos(), rotation.sin());
                let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                (
                    vec![center[0] - hx, center[1] - hy],
                    vec![center[0] + hx, center[1] + hy],
                )
            }
            ReferenceShape::Annulus { center, outer, .. } => (
                vec![center[0] - outer, center[1] - outer],
                vec![center[0] + outer, center[1] + outer],
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ReferenceShape::Disk { radius, .. } => 2.0 * radius,
            ReferenceShape::Rectangle { min, max } => dist2(min, max).sqrt(),
            ReferenceShape::Ellipse { semi_axes, .. } => 2.0 * semi_axes[0].max(semi_axes[1]),
            ReferenceShape::Annulus { outer, .. } => 2.0 * outer,
        }
    }

    pub fn reach(&self) -> Reach {
        match self {
            ReferenceShape::Disk { radius, .. } => Reach {
                set: f64::INFINITY,
                complement: *radius,
            },
            ReferenceShape::Ellipse { semi_axes, .. } => {
                let (a, b) = (semi_axes[0].max(semi_axes[1]), semi_axes[0].min(semi_axes[1]));
                // smallest radius of curvature, at the ends of the major axis
                Reach {
                    set: f64::INFINITY,
                    complement: b * b / a,
                }
            }
            ReferenceShape::Rectangle { .. } => Reach {
                set: f64::INFINITY,
                complement: 0.0,
            },
            ReferenceShape::Annulus { inner, outer, .. } => Reach {
                set: *inner,
                complement: 0.5 * (outer - inner),
            },
        }
    }

    /// Nearest point of the shape to `x`; points of the shape map to
    /// themselves.
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        crate::error::check_dim(self.dim(), x.len())?;
        let plain = |point| Projection {
            point,
            ambiguous: false,
        };
        if self.contains(x) {
            return Ok(plain(x.to_vec()));
        }
        Ok(match self {
            ReferenceShape::Disk { center, radius } => plain(radial(center, x, *radius)),
            ReferenceShape::Rectangle { min, max } => plain(
                x.iter()
                    .zip(min.iter().zip(max))
                    .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
                    .collect(),
            ),
            ReferenceShape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = dist2(x, center).sqrt();
                if r > *outer {
                    plain(radial(center, x, *outer))
                } else if r > 0.0 {
                    plain(radial(center, x, *inner))
                } else {
                    Projection {
                        point: vec![center[0] + inner, center[1]],
                        ambiguous: true,
                    }
                }
            }
            ReferenceShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let (u, v) = to_ellipse_frame(x, center, *rotation);
                let (fu, fv) = ellipse_foot(u, v, semi_axes[0], semi_axes[1])?;
                let (c, s) = (rotation.cos(), rotation.sin());
                plain(vec![
                    center[0] + c * fu - s * fv,
                    center[1] + s * fu + c * fv,
                ])
            }
        })
    }

    /// Euclidean distance from `x` to the shape.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(dist2(x, &p.point).sqrt())
    }

    /// Planar boundary decomposed into smooth pieces and corners.
    pub(crate) fn boundary_pieces(&self) -> Result<Vec<BoundaryPiece>> {
        if self.dim() != 2 {
            return Err(Error::Unsupported(format!(
                "boundary parametrization needs d = 2, shape has d = {}",
                self.dim()
            )));
        }
        Ok(match self {
            ReferenceShape::Disk { center, radius } => vec![BoundaryPiece::Circle {
                center: [center[0], center[1]],
                radius: *radius,
                outer: true,
            }],
            ReferenceShape::Annulus {
                center,
                inner,
                outer,
            } => vec![
                BoundaryPiece::Circle {
                    center: *center,
                    radius: *outer,
                    outer: true,
                },
                BoundaryPiece::Circle {
                    center: *center,
                    radius: *inner,
                    outer: false,
                },
            ],
            ReferenceShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => vec![BoundaryPiece::Ellipse {
                center: *center,
                semi_axes: *semi_axes,
                rotation: *rotation,
            }],
            ReferenceShape::Rectangle { min, max } => {
                let c = [
                    [min[0], min[1]],
                    [max[0], min[1]],
                    [max[0], max[1]],
                    [min[0], max[1]],
                ];
                let normals = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
                let mut out = Vec::new();
                for i in 0..4 {
                    out.push(BoundaryPiece::Segment {
                        from: c[i],
                        to: c[(i + 1) % 4],
                        normal: normals[i],
                    });
                    // normal cone at the corner ending this edge
                    let a0 = normals[i][1].atan2(normals[i][0]);
                    out.push(BoundaryPiece::Corner {
                        at: c[(i + 1) % 4],
                        from_angle: a0,
                        to_angle: a0 + PI / 2.0,
                    });
                }
                out
            }
        })
    }
}

/// A piece of a planar boundary, positively oriented (region on the left).
#[derive(Clone, Debug)]
pub(crate) enum BoundaryPiece {
    /// `outer = false` marks a hole: traversed clockwise, normal toward the
    /// center, negative curvature.
    Circle {
        center: [f64; 2],
        radius: f64,
        outer: bool,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        rotation: f64,
    },
    Segment {
        from: [f64; 2],
        to: [f64; 2],
        normal: [f64; 2],
    },
    /// Normal cone at a convex corner, no length.
    Corner {
        at: [f64; 2],
        from_angle: f64,
        to_angle: f64,
    },
}

/// One node of a boundary quadrature rule.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BoundaryNode {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    /// Oriented `dx_2` weight for Green's theorem.
    pub dy: f64,
    /// Arc length weight.
    pub ds: f64,
    /// Signed curvature times arc length, including normal-cone turning at
    /// corners.
    pub turn: f64,
}

impl BoundaryPiece {
    /// Composite Gauss-Legendre nodes over the piece's parameter range.
    pub(crate) fn nodes(&self, panels: usize) -> Vec<BoundaryNode> {
        let rule = crate::cells::gauss_legendre(12);
        let mut out = Vec::new();
        let mut push_param = |t0: f64, t1: f64, eval: &dyn Fn(f64) -> BoundaryNode| {
            for p in 0..panels {
                let a = t0 + (t1 - t0) * p as f64 / panels as f64;
                let b = t0 + (t1 - t0) * (p + 1) as f64 / panels as f64;
                // the rule lives on [0, 1]
                for &(x, w) in rule {
                    let mut node = eval(a + (b - a) * x);
                    let jw = w * (b - a);
                    node.dy *= jw;
                    node.ds *= jw;
                    node.turn *= jw;
                    out.push(node);
                }
            }
        };
        match *self {
            BoundaryPiece::Circle {
                center,
                radius,
                outer,
            } => {
                let sign = if outer { 1.0 } else { -1.0 };
                push_param(0.0, 2.0 * PI, &|t| {
                    // hole traversed clockwise: parametrize by -t
                    let (c, s) = ((sign * t).cos(), (sign * t).sin());
                    BoundaryNode {
                        point: [center[0] + radius * c, center[1] + radius * s],
                        normal: [sign * c, sign * s],
                        dy: sign * radius * c,
                        ds: radius,
                        turn: sign,
                    }
                });
            }
            BoundaryPiece::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                let (cr, sr) = (rotation.cos(), rotation.sin());
                push_param(0.0, 2.0 * PI, &|t| {
                    let (c, s) = (t.cos(), t.sin());
                    let (px, py) = (a * c, b * s);
                    let (tx, ty) = (-a * s, b * c);
                    let speed = (tx * tx + ty * ty).sqrt();
                    let (nx, ny) = (b * c / speed, a * s / speed);
                    BoundaryNode {
                        point: [center[0] + cr * px - sr * py, center[1] + sr * px + cr * py],
                        normal: [cr * nx - sr * ny, sr * nx + cr * ny],
                        dy: sr * tx + cr * ty,
                        ds: speed,
                        turn: a * b / (speed * speed),
                    }
                });
            }
            BoundaryPiece::Segment { from, to, normal } => {
                let len = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
                push_param(0.0, 1.0, &|t| BoundaryNode {
                    point: [
                        from[0] + t * (to[0] - from[0]),
                        from[1] + t * (to[1] - from[1]),
                    ],
                    normal,
                    dy: to[1] - from[1],
                    ds: len,
                    turn: 0.0,
                });
            }
            BoundaryPiece::Corner {
                at,
                from_angle,
                to_angle,
            } => {
                push_param(from_angle, to_angle, &|t| BoundaryNode {
                    point: at,
                    normal: [t.cos(), t.sin()],
                    dy: 0.0,
                    ds: 0.0,
                    turn: 1.0,
                });
            }
        }
        out
    }

    /// Points along the piece at spacing at most `step`.
    pub(crate) fn sample_points(&self, step: f64) -> Vec<[f64; 2]> {
        let count = |len: f64| ((len / step).ceil() as usize).max(1);
        match *self {
            BoundaryPiece::Circle { center, radius, .. } => {
                let n = count(2.0 * PI * radius);
                (0..n)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / n as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect()
            }
            BoundaryPiece::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                // parameter speed is at most max(a, b)
                let n = count(2.0 * PI * a.max(b));
                let (cr, sr) = (rotation.cos(), rotation.sin());
                (0..n)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / n as f64;
                        let (px, py) = (a * t.cos(), b * t.sin());
                        [center[0] + cr * px - sr * py, center[1] + sr * px + cr * py]
                    })
                    .collect()
            }
            BoundaryPiece::Segment { from, to, .. } => {
                let len = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
                let n = count(len);
                (0..=n)
                    .map(|i| {
                        let t = i as f64 / n as f64;
                        [
                            from[0] + t * (to[0] - from[0]),
                            from[1] + t * (to[1] - from[1]),
                        ]
                    })
                    .collect()
            }
            BoundaryPiece::Corner { at, .. } => vec![at],
        }
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn radial(center: &[f64], x: &[f64], radius: f64) -> Vec<f64> {
    let r = dist2(x, center).sqrt();
    center
        .iter()
        .zip(x)
        .map(|(c, v)| c + radius * (v - c) / r)
        .collect()
}

fn to_ellipse_frame(x: &[f64], center: &[f64; 2], rotation: f64) -> (f64, f64) {
    let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
    let (c, s) = (rotation.cos(), rotation.sin());
    (c * dx + s * dy, -s * dx + c * dy)
}

/// Foot point on the axis-aligned ellipse `(u/a)^2 + (v/b)^2 = 1` for an
/// exterior point, from the Lagrange condition
/// `(a u / (t + a^2))^2 + (b v / (t + b^2))^2 = 1`, `t >= 0`.
///
/// Newton's method on this monotone function, safeguarded by bisection.
fn ellipse_foot(u: f64, v: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let f = |t: f64| {
        let p = a * u / (t + a * a);
        let q = b * v / (t + b * b);
        let val = p * p + q * q - 1.0;
        let deriv = -2.0 * (p * p / (t + a * a) + q * q / (t + b * b));
        (val, deriv)
    };
    let mut lo = 0.0;
    let mut hi = a.max(b) * (u * u + v * v).sqrt();
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (val, deriv) = f(t);
        if val.abs() <= 1e-12 {
            return Ok((a * a * u / (t + a * a), b * b * v / (t + b * b)));
        }
        if val > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - val / deriv;
        t = if deriv < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            return Ok((a * a * u / (t + a * a), b * b * v / (t + b * b)));
        }
    }
    Err(Error::Numerical(format!(
        "ellipse projection of ({u}, {v}) did not converge"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        dist2(a, b).sqrt() <= tol
    }

    #[test]
    fn membership() {
        let disk = ReferenceShape::unit_disk();
        assert!(disk.contains(&[0.0, 0.0]));
        assert!(!disk.contains(&[2.0, 0.0]));
        let ring = ReferenceShape::Annulus {
            center: [0.0, 0.0],
            inner: 0.5,
            outer: 1.0,
        };
        assert!(!ring.contains(&[0.0, 0.0]));
        assert!(ring.contains(&[0.0, 0.75]));
    }

    #[test]
    fn projection_examples() {
        let disk = ReferenceShape::unit_disk();
        assert!(close(&disk.project(&[2.0, 0.0]).unwrap().point, &[1.0, 0.0], 1e-15));
        let rect = ReferenceShape::Rectangle {
            min: vec![0.0, 0.0],
            max: vec![1.0, 1.0],
        };
        assert!(close(&rect.project(&[2.0, 2.0]).unwrap().point, &[1.0, 1.0], 0.0));
        let ell = ReferenceShape::Ellipse {
            center: [0.0, 0.0],
            semi_axes: [2.0, 1.0],
            rotation: 0.0,
        };
        assert!(close(&ell.project(&[3.0, 0.0]).unwrap().point, &[2.0, 0.0], 1e-10));
        let ring = ReferenceShape::Annulus {
            center: [0.0, 0.0],
            inner: 0.5,
            outer: 1.0,
        };
        let p = ring.project(&[0.0, 0.0]).unwrap();
        assert!(p.ambiguous);
        assert!((dist2(&p.point, &[0.0, 0.0]).sqrt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ellipse_projection_is_a_foot_point() {
        let ell = ReferenceShape::Ellipse {
            center: [0.2, -0.1],
            semi_axes: [2.0, 0.7],
            rotation: 0.4,
        };
        // brute-force minimum over a dense boundary parametrization
        let pts = ell.boundary_pieces().unwrap()[0].sample_points(1e-5);
        for x in [[3.0, 1.0], [-1.0, 2.5], [0.0, -3.0], [2.5, -0.2]] {
            let got = ell.distance(&x).unwrap();
            let brute = pts
                .iter()
                .map(|p| dist2(p, &x).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!((got - brute).abs() < 1e-8, "{got} vs {brute}");
        }
    }

    #[test]
    fn reach_values() {
        let ring = ReferenceShape::Annulus {
            center: [0.0, 0.0],
            inner: 0.5,
            outer: 2.0,
        };
        assert_eq!(ring.reach().set, 0.5);
        assert_eq!(ring.reach().complement, 0.75);
        assert_eq!(ring.reach().regularity(), 0.5);
        let disk = ReferenceShape::unit_disk();
        assert!(disk.reach().set.is_infinite());
        assert_eq!(
            serde_json::to_string(&disk.reach()).unwrap(),
            r#"{"set":"infinite","complement":1.0}"#
        );
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let s = ReferenceShape::from_json(r#"{"kind":"disk","center":[0,0],"radius":1}"#).unwrap();
        assert_eq!(s, ReferenceShape::unit_disk());
        assert!(ReferenceShape::from_json(r#"{"kind":"disk","center":[0,0],"radius":-1}"#).is_err());
        assert!(ReferenceShape::from_json(r#"{"kind":"blob"}"#).is_err());
        assert!(ReferenceShape::from_json("not json").is_err());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(x in -3.0f64..3.0, y in -3.0f64..3.0, which in 0usize..4) {
            let shapes = [
                ReferenceShape::unit_disk(),
                ReferenceShape::Ellipse { center: [0.1, 0.0], semi_axes: [1.5, 0.6], rotation: 0.3 },
                ReferenceShape::Rectangle { min: vec![-1.0, -0.5], max: vec![0.5, 1.0] },
                ReferenceShape::Annulus { center: [0.0, 0.0], inner: 0.4, outer: 1.2 },
            ];
            let shape = &shapes[which];
            let p = shape.project(&[x, y]).unwrap().point;
            let q = shape.project(&p).unwrap().point;
            prop_assert!(dist2(&p, &q).sqrt() <= 1e-10);
        }
    }
}
