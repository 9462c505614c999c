//! Quadrature that never samples a singular point or line.
//!
//! One-variable integrals are split at the zeros of the forms; two-variable
//! integrals over polygons are split into the convex cells cut out by the
//! forms. Each smooth piece is integrated with adaptive 15-point
//! Gauss–Legendre panels.

mod green;

pub use green::{green_check, GreenReport, TypeIIIRegion};

use std::sync::OnceLock;

use crate::arrangement::split_polygon;
use crate::piecewise::PiecewiseFn;
use crate::specular::specular_partial;
use crate::{Error, Result};

pub const TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 30;
const TRI_MAX_DEPTH: u32 = 8;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

fn panel(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let (x, w) = gl15();
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(m + h * xi)?;
    }
    Ok(s * h)
}

struct Worst {
    a: f64,
    b: f64,
    estimate: f64,
}

fn adapt(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut Option<Worst>,
) -> Result<f64> {
    let m = (a + b) / 2.0;
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= tol.max(1e-14 * refined.abs()) || m <= a || m >= b {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH {
        if worst.as_ref().is_none_or(|w| err > w.estimate) {
            *worst = Some(Worst { a, b, estimate: err });
        }
        return Ok(refined);
    }
    let l = adapt(f, a, m, left, tol / 2.0, depth + 1, worst)?;
    let r = adapt(f, m, b, right, tol / 2.0, depth + 1, worst)?;
    Ok(l + r)
}

/// Adaptive Gauss–Legendre integral of a smooth `f` over `[a, b]`.
pub fn integrate_smooth(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(f, a, b)?;
    let mut worst = None;
    let tol = TOL * (1.0 + whole.abs());
    let v = adapt(f, a, b, whole, tol, 0, &mut worst)?;
    if let Some(w) = worst {
        return Err(Error::NonConvergent {
            a: w.a,
            b: w.b,
            estimate: w.estimate,
        });
    }
    Ok(v)
}

/// Integral of `f` over `[a, b]` split at the given interior points.
pub fn integrate_split(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, splits: &[f64]) -> Result<f64> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = splits.iter().copied().filter(|&s| s > lo && s < hi).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut edges = vec![lo];
    edges.extend(pts);
    edges.push(hi);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate_smooth(f, w[0], w[1])?;
    }
    Ok(sign * total)
}

/// Singular points of a one-variable function.
pub fn singular_points(f: &PiecewiseFn) -> Vec<f64> {
    let mut s: Vec<f64> = f.forms().iter().map(|g| g.offset() / g.coeffs()[0]).collect();
    s.sort_by(f64::total_cmp);
    s
}

/// `∫_a^b f`, split at the singular points of `f`.
pub fn integrate_1d(f: &PiecewiseFn, a: f64, b: f64) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch("integrate_1d needs one variable".into()));
    }
    integrate_split(&|x| f.evaluate(&[x]), a, b, &singular_points(f))
}

/// `|∫_a^b f − (F(b) − F(a))|` plus the largest `|∂S F(s) − f(s)|` over
/// singular points `s` of either function inside `[a, b]`.
pub fn antiderivative_check(f: &PiecewiseFn, big_f: &PiecewiseFn, a: f64, b: f64) -> Result<f64> {
    let integral = integrate_1d(f, a, b)?;
    let mut residual = (integral - (big_f.evaluate(&[b])? - big_f.evaluate(&[a])?)).abs();
    let (lo, hi) = (a.min(b), a.max(b));
    for s in singular_points(f).into_iter().chain(singular_points(big_f)) {
        if s >= lo && s <= hi {
            let d = specular_partial(big_f, &[s], 0)?;
            residual = residual.max((d - f.evaluate(&[s])?).abs());
        }
    }
    Ok(residual)
}

type Pt = [f64; 2];

/// Tensor Gauss–Legendre on a triangle through the collapsed square map.
fn tri_rule(g: &dyn Fn(f64, f64) -> Result<f64>, t: &[Pt; 3]) -> Result<f64> {
    let (x, w) = gl15();
    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1]];
    let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let mut s = 0.0;
    for (ui, wi) in x.iter().zip(w) {
        let u = (ui + 1.0) / 2.0;
        let mut inner = 0.0;
        for (vj, wj) in x.iter().zip(w) {
            let v = (vj + 1.0) / 2.0 * (1.0 - u);
            let p = [t[0][0] + u * e1[0] + v * e2[0], t[0][1] + u * e1[1] + v * e2[1]];
            inner += wj * g(p[0], p[1])?;
        }
        s += wi * inner * (1.0 - u) / 2.0;
    }
    Ok(s * jac / 2.0)
}

fn mid(a: &Pt, b: &Pt) -> Pt {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
}

fn tri_adapt(g: &dyn Fn(f64, f64) -> Result<f64>, t: &[Pt; 3], whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let (m01, m12, m20) = (mid(&t[0], &t[1]), mid(&t[1], &t[2]), mid(&t[2], &t[0]));
    let kids = [[t[0], m01, m20], [m01, t[1], m12], [m20, m12, t[2]], [m12, m20, m01]];
    let mut parts = [0.0; 4];
    for (p, k) in parts.iter_mut().zip(&kids) {
        *p = tri_rule(g, k)?;
    }
    let refined: f64 = parts.iter().sum();
    let err = (refined - whole).abs();
    if err <= tol.max(1e-14 * refined.abs()) {
        return Ok(refined);
    }
    if depth >= TRI_MAX_DEPTH {
        let c = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
        return Err(Error::NonConvergent {
            a: c[0],
            b: c[1],
            estimate: err,
        });
    }
    let mut total = 0.0;
    for (p, k) in parts.iter().zip(&kids) {
        total += tri_adapt(g, k, *p, tol / 4.0, depth + 1)?;
    }
    Ok(total)
}

/// Integral of a smooth `g` over a convex polygon, fan-triangulated.
pub fn integrate_convex(g: &dyn Fn(f64, f64) -> Result<f64>, poly: &[Pt]) -> Result<f64> {
    let mut total = 0.0;
    for i in 1..poly.len().saturating_sub(1) {
        let t = [poly[0], poly[i], poly[i + 1]];
        let whole = tri_rule(g, &t)?;
        total += tri_adapt(g, &t, whole, TOL * (1.0 + whole.abs()), 0)?;
    }
    Ok(total)
}

/// Integral of `f` over a convex polygon, split along the forms of `f`.
pub fn integrate_polygon(f: &PiecewiseFn, poly: &[Pt]) -> Result<f64> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch("polygon integrals need two variables".into()));
    }
    let mut total = 0.0;
    for (cell, _) in split_polygon(poly, f.forms()) {
        total += integrate_convex(&|x, y| f.evaluate(&[x, y]), &cell)?;
    }
    Ok(total)
}

/// Integral of `f(y, s)` over the triangle with apex `(x0, t0)` and base
/// `[x0 − t0, x0 + t0]` on `s = 0`.
pub fn integrate_triangle(f: &PiecewiseFn, x0: f64, t0: f64) -> Result<f64> {
    if t0 < 0.0 || !t0.is_finite() || !x0.is_finite() {
        return Err(Error::DimensionMismatch(format!(
            "triangle apex ({x0}, {t0}) must have t0 >= 0"
        )));
    }
    if t0 == 0.0 {
        return Ok(0.0);
    }
    integrate_polygon(f, &[[x0 - t0, 0.0], [x0 + t0, 0.0], [x0, t0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn pw(src: &str, vars: &[&str]) -> PiecewiseFn {
        let v: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        PiecewiseFn::from_expression(&parse(src, &v).unwrap(), &v).unwrap()
    }

    #[test]
    fn gauss_rule_is_exact_for_degree_29() {
        let (x, w) = gauss_legendre(15);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(28)).sum();
        assert!((s - 2.0 / 29.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_integrals() {
        assert!((integrate_1d(&pw("sgn(x)", &["x"]), -1.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((integrate_1d(&pw("abs(x - 1)", &["x"]), 0.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(integrate_1d(&pw("0", &["x"]), -3.0, 5.0).unwrap(), 0.0);
        let e = integrate_1d(&pw("exp(x)", &["x"]), 0.0, 1.0).unwrap();
        assert!((e - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = pw("abs(x)", &["x"]);
        let a = integrate_1d(&f, -1.0, 2.0).unwrap();
        let b = integrate_1d(&f, 2.0, -1.0).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn antiderivative_of_sgn() {
        let r = antiderivative_check(&pw("sgn(x)", &["x"]), &pw("abs(x)", &["x"]), -1.0, 2.0).unwrap();
        assert!(r <= 1e-10);
    }

    #[test]
    fn triangle_integrals() {
        let one = pw("1", &["y", "s"]);
        assert!((integrate_triangle(&one, 0.3, 1.7).unwrap() - 1.7 * 1.7).abs() < 1e-12);
        let kink = pw("abs(y - s)", &["y", "s"]);
        // Apex on the line y = s: the triangle splits into two pieces.
        let v = integrate_triangle(&kink, 1.0, 1.0).unwrap();
        // Inner integral over [s, 2 - s] of (y - s) is 2(1 - s)^2; its
        // integral over s in [0, 1] is 2/3.
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }
}
