//! Tangent geometry of a two-variable function at a point.
//!
//! The phototangents along x and y meet the unit sphere around the anchor
//! `(a₁, a₂, u[a])` in four points `p₁, q₁, p₂, q₂`. A strong tangent plane
//! exists when all four are coplanar, which is decided by a closed-form
//! criterion in the semi-derivatives. Otherwise each choice of three points
//! spans a weak tangent plane.

use nalgebra::{Matrix3, Vector3};

use crate::piecewise::PiecewiseFn;
use crate::specular::{a_combine, semi_derivatives, SemiDerivativePair};
use crate::{Error, Result};

pub type Point3 = [f64; 3];

/// The plane `z = c1·x + c2·y + c0` in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub c1: f64,
    pub c2: f64,
    pub c0: f64,
}

impl Plane {
    pub fn z(&self, x: f64, y: f64) -> f64 {
        self.c1 * x + self.c2 * y + self.c0
    }

    /// Vertical distance of `p` from the plane.
    pub fn residual(&self, p: &Point3) -> f64 {
        (self.z(p[0], p[1]) - p[2]).abs()
    }

    fn close_to(&self, o: &Plane, tol: f64) -> bool {
        (self.c1 - o.c1).abs() <= tol && (self.c2 - o.c2).abs() <= tol && (self.c0 - o.c0).abs() <= tol
    }

    /// Plane through three points, or `None` if they span a vertical or
    /// degenerate plane.
    pub fn through(pts: [&Point3; 3]) -> Option<Plane> {
        let m = Matrix3::from_fn(|r, c| match c {
            0 => pts[r][0],
            1 => pts[r][1],
            _ => 1.0,
        });
        let scale = pts.iter().map(|p| p[0].abs() + p[1].abs() + 1.0).fold(0.0, f64::max);
        if m.determinant().abs() <= 1e-12 * scale * scale {
            return None;
        }
        let z = Vector3::new(pts[0][2], pts[1][2], pts[2][2]);
        let c = m.lu().solve(&z)?;
        Some(Plane {
            c1: c[0],
            c2: c[1],
            c0: c[2],
        })
    }
}

/// The four sphere points, in the order `p₁, q₁, p₂, q₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoints {
    pub anchor: Point3,
    pub p1: Point3,
    pub q1: Point3,
    pub p2: Point3,
    pub q2: Point3,
    pub semi: [SemiDerivativePair; 2],
}

impl SpherePoints {
    pub fn as_array(&self) -> [Point3; 4] {
        [self.p1, self.q1, self.p2, self.q2]
    }

    pub fn slopes(&self) -> (f64, f64, f64, f64) {
        (
            self.semi[0].right,
            self.semi[0].left,
            self.semi[1].right,
            self.semi[1].left,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentData {
    pub points: SpherePoints,
    pub criterion: f64,
    pub tol: f64,
    pub normal: Option<[f64; 3]>,
    pub planes: Vec<Plane>,
    /// Indices (into `p₁, q₁, p₂, q₂`) of omitted points whose remaining
    /// triple was degenerate.
    pub degenerate: Vec<usize>,
}

fn check_point(u: &PiecewiseFn, a: &[f64]) -> Result<()> {
    if u.dim() != 2 || a.len() != 2 {
        return Err(Error::DimensionMismatch(
            "tangent geometry needs a 2-variable function and point".into(),
        ));
    }
    Ok(())
}

pub fn sphere_points(u: &PiecewiseFn, a: &[f64]) -> Result<SpherePoints> {
    check_point(u, a)?;
    let cx = u.one_sided_limits(a, 0)?.mid;
    let cy = u.one_sided_limits(a, 1)?.mid;
    if (cx - cy).abs() > 1e-9 * (1.0 + cx.abs() + cy.abs()) {
        return Err(Error::CenterMismatch(cx, cy));
    }
    let s1 = semi_derivatives(u, a, 0)?;
    let s2 = semi_derivatives(u, a, 1)?;
    let anchor = [a[0], a[1], cx];
    let unit = |m: f64| 1.0 / m.hypot(1.0);
    let at = |dx: f64, dy: f64, dz: f64| [anchor[0] + dx, anchor[1] + dy, anchor[2] + dz];
    let (a1, b1, a2, b2) = (s1.right, s1.left, s2.right, s2.left);
    Ok(SpherePoints {
        anchor,
        p1: at(unit(a1), 0.0, a1 * unit(a1)),
        q1: at(-unit(b1), 0.0, -b1 * unit(b1)),
        p2: at(0.0, unit(a2), a2 * unit(a2)),
        q2: at(0.0, -unit(b2), -b2 * unit(b2)),
        semi: [s1, s2],
    })
}

/// Left side of the strong-tangent criterion for the given slopes.
pub fn criterion(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    let r = |m: f64| m.hypot(1.0);
    (a1 - b1) * (r(a2) + r(b2)) - (a2 - b2) * (r(a1) + r(b1))
}

pub fn criterion_tol(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    1e-9 * (1.0 + a1.abs() + b1.abs() + a2.abs() + b2.abs())
}

pub fn strong_criterion_residual(u: &PiecewiseFn, a: &[f64]) -> Result<f64> {
    let (a1, b1, a2, b2) = sphere_points(u, a)?.slopes();
    Ok(criterion(a1, b1, a2, b2))
}

fn normal_of(sp: &SpherePoints) -> [f64; 3] {
    let (a1, b1, a2, b2) = sp.slopes();
    [a_combine(a1, b1), a_combine(a2, b2), -1.0]
}

/// Sine of the angle between the normal and the cross product of the
/// directions of `ℓ₁ = q₁p₁` and `ℓ₂ = q₂p₂`.
pub fn parallel_residual(sp: &SpherePoints) -> f64 {
    let v = |p: &Point3, q: &Point3| Vector3::new(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
    let c = v(&sp.p1, &sp.q1).cross(&v(&sp.p2, &sp.q2));
    let n = Vector3::from(normal_of(sp));
    c.cross(&n).norm() / (c.norm() * n.norm())
}

/// `(∂S_x u, ∂S_y u, −1)` when the strong criterion holds.
pub fn specular_normal(u: &PiecewiseFn, a: &[f64]) -> Result<[f64; 3]> {
    let sp = sphere_points(u, a)?;
    let (a1, b1, a2, b2) = sp.slopes();
    let residual = criterion(a1, b1, a2, b2);
    let n = normal_of(&sp);
    if residual.abs() > criterion_tol(a1, b1, a2, b2) {
        return Err(Error::NoStrongTangent { residual, would_be: n });
    }
    Ok(n)
}

/// One plane per omitted sphere point, through the other three. Planes
/// that coincide (always the case when the strong criterion holds) are
/// reported once.
pub fn weak_tangent_planes(u: &PiecewiseFn, a: &[f64]) -> Result<(Vec<Plane>, Vec<usize>)> {
    let sp = sphere_points(u, a)?;
    Ok(planes_of(&sp))
}

fn planes_of(sp: &SpherePoints) -> (Vec<Plane>, Vec<usize>) {
    let pts = sp.as_array();
    let (a1, b1, a2, b2) = sp.slopes();
    let strong = criterion(a1, b1, a2, b2).abs() <= criterion_tol(a1, b1, a2, b2);
    let mut planes: Vec<Plane> = Vec::new();
    let mut degenerate = Vec::new();
    // Omitting q₂, p₂, q₁, p₁ in turn.
    for omit in [3, 2, 1, 0] {
        let tri: Vec<&Point3> = (0..4).filter(|&i| i != omit).map(|i| &pts[i]).collect();
        match Plane::through([tri[0], tri[1], tri[2]]) {
            Some(pl) => {
                let dup = planes.iter().any(|q| q.close_to(&pl, 1e-9));
                if !dup && !(strong && !planes.is_empty()) {
                    planes.push(pl);
                }
            }
            None => degenerate.push(omit),
        }
    }
    (planes, degenerate)
}

pub fn tangent_data(u: &PiecewiseFn, a: &[f64]) -> Result<TangentData> {
    let points = sphere_points(u, a)?;
    let (a1, b1, a2, b2) = points.slopes();
    let crit = criterion(a1, b1, a2, b2);
    let tol = criterion_tol(a1, b1, a2, b2);
    let normal = (crit.abs() <= tol).then(|| normal_of(&points));
    let (planes, degenerate) = planes_of(&points);
    Ok(TangentData {
        points,
        criterion: crit,
        tol,
        normal,
        planes,
        degenerate,
    })
}
