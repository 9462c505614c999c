use super::integrate_split;
use crate::expr::{diff, Expr};
use crate::piecewise::{BinOp, PiecewiseFn, SampleConfig};
use crate::specular::specular_field;
use crate::{Error, Result};

/// A region that is both `{a ≤ x ≤ b, ω₁(x) ≤ y ≤ ω₂(x)}` and
/// `{c ≤ y ≤ d, ω₃(y) ≤ x ≤ ω₄(y)}`. Boundary curves are expressions in a
/// single variable (index 0).
#[derive(Debug, Clone)]
pub struct TypeIIIRegion {
    pub a: f64,
    pub b: f64,
    pub lower: Expr,
    pub upper: Expr,
    pub c: f64,
    pub d: f64,
    pub left: Expr,
    pub right: Expr,
}

impl TypeIIIRegion {
    pub fn rectangle(a: f64, b: f64, c: f64, d: f64) -> Self {
        TypeIIIRegion {
            a,
            b,
            lower: Expr::constant(c),
            upper: Expr::constant(d),
            c,
            d,
            left: Expr::constant(a),
            right: Expr::constant(b),
        }
    }

    fn at(e: &Expr, s: f64) -> Result<f64> {
        Ok(e.eval(&[s])?)
    }

    /// Spot-checks on a grid that both descriptions give the same set.
    pub fn views_agree(&self) -> bool {
        let n = 23;
        let inside1 = |x: f64, y: f64| -> Result<bool> {
            Ok(x >= self.a && x <= self.b && y >= Self::at(&self.lower, x)? && y <= Self::at(&self.upper, x)?)
        };
        let inside2 = |x: f64, y: f64| -> Result<bool> {
            Ok(y >= self.c && y <= self.d && x >= Self::at(&self.left, y)? && x <= Self::at(&self.right, y)?)
        };
        let (w, h) = (self.b - self.a, self.d - self.c);
        for i in 0..n {
            for j in 0..n {
                let x = self.a - 0.1 * w + 1.2 * w * (i as f64 + 0.37) / n as f64;
                let y = self.c - 0.1 * h + 1.2 * h * (j as f64 + 0.61) / n as f64;
                match (inside1(x, y), inside2(x, y)) {
                    (Ok(p), Ok(q)) if p == q => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Reasons the integrands fall outside the class the identity assumes.
    pub class_violations: Vec<String>,
}

/// Roots of `g` on `[lo, hi]` found by sign changes on a fine grid and
/// bisection.
fn roots(g: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = 256;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = g(lo)?;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = g(x)?;
        if prev == 0.0 {
            out.push(prev_x);
        } else if prev * v < 0.0 {
            let (mut l, mut r, mut gl) = (prev_x, x, prev);
            for _ in 0..200 {
                let m = (l + r) / 2.0;
                let gm = g(m)?;
                if gm == 0.0 || m <= l || m >= r {
                    l = m;
                    r = m;
                    break;
                }
                if gl * gm < 0.0 {
                    r = m;
                } else {
                    l = m;
                    gl = gm;
                }
            }
            out.push((l + r) / 2.0);
        }
        prev_x = x;
        prev = v;
    }
    if prev == 0.0 {
        out.push(hi);
    }
    Ok(out)
}

/// Parameters in `[lo, hi]` where the curve `s -> (x(s), y(s))` meets a
/// form of `f`.
fn curve_splits(
    f: &PiecewiseFn,
    x: &dyn Fn(f64) -> Result<f64>,
    y: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for g in f.forms() {
        let h = |s: f64| -> Result<f64> { Ok(g.eval(&[x(s)?, y(s)?])) };
        out.extend(roots(&h, lo, hi)?);
    }
    Ok(out)
}

/// Verifies `∬_R (∂S_x P − ∂S_y Q) = ∮_{∂R} P dy + Q dx` with the boundary
/// traversed counterclockwise.
pub fn green_check(p: &PiecewiseFn, q: &PiecewiseFn, region: &TypeIIIRegion) -> Result<GreenReport> {
    if p.dim() != 2 || q.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "Green's identity needs two-variable integrands".into(),
        ));
    }
    let cfg = SampleConfig::for_dim(2);
    let mut class_violations = Vec::new();
    if !region.views_agree() {
        class_violations.push("the two region descriptions disagree".into());
    }
    let px = specular_field(p, 0)?;
    let qy = specular_field(q, 1)?;
    for (name, u, field) in [("P", p, &px), ("Q", q, &qy)] {
        let cont = u.classify_continuity(&cfg);
        if cont.verdict != crate::piecewise::ContinuityVerdict::Continuous {
            class_violations.push(format!("{name} is not continuous"));
        }
        if !field.is_proper(&cfg).proper {
            class_violations.push(format!("the specular derivative of {name} is not proper"));
        }
    }
    let integrand = px.combine(&qy, BinOp::Sub)?;

    let (lo_e, up_e) = (&region.lower, &region.upper);
    let lower = |x: f64| TypeIIIRegion::at(lo_e, x);
    let upper = |x: f64| TypeIIIRegion::at(up_e, x);
    let ident = |s: f64| -> Result<f64> { Ok(s) };

    // Area integral, type-I iterated: the inner integral splits where a form
    // crosses the vertical segment, the outer one at every abscissa where
    // that crossing pattern can change.
    let inner = |x: f64| -> Result<f64> {
        let (y0, y1) = (lower(x)?, upper(x)?);
        let splits: Vec<f64> = integrand
            .forms()
            .iter()
            .filter(|g| g.coeffs()[1] != 0.0)
            .map(|g| (g.offset() - g.coeffs()[0] * x) / g.coeffs()[1])
            .collect();
        integrate_split(&|y| integrand.evaluate(&[x, y]), y0, y1, &splits)
    };
    let mut outer_splits = curve_splits(&integrand, &ident, &lower, region.a, region.b)?;
    outer_splits.extend(curve_splits(&integrand, &ident, &upper, region.a, region.b)?);
    let forms = integrand.forms();
    for (i, g) in forms.iter().enumerate() {
        if g.coeffs()[1] == 0.0 {
            outer_splits.push(g.offset() / g.coeffs()[0]);
        }
        for h in &forms[i + 1..] {
            let det = g.coeffs()[0] * h.coeffs()[1] - g.coeffs()[1] * h.coeffs()[0];
            if det.abs() > 1e-14 {
                outer_splits.push((g.offset() * h.coeffs()[1] - h.offset() * g.coeffs()[1]) / det);
            }
        }
    }
    let lhs = integrate_split(&inner, region.a, region.b, &outer_splits)?;

    // Boundary integral, counterclockwise: bottom curve left to right, right
    // side upwards, top curve right to left, left side downwards.
    let (dlo, dup) = (diff(lo_e, 0), diff(up_e, 0));
    let along = |curve: &dyn Fn(f64) -> Result<f64>, slope: &Expr| -> Result<f64> {
        let splits = {
            let mut s = curve_splits(p, &ident, curve, region.a, region.b)?;
            s.extend(curve_splits(q, &ident, curve, region.a, region.b)?);
            s
        };
        let g = |x: f64| -> Result<f64> {
            let y = curve(x)?;
            Ok(p.evaluate(&[x, y])? * slope.eval(&[x])? + q.evaluate(&[x, y])?)
        };
        integrate_split(&g, region.a, region.b, &splits)
    };
    let side = |x: f64| -> Result<f64> {
        let (y0, y1) = (lower(x)?, upper(x)?);
        if y0 == y1 {
            return Ok(0.0);
        }
        let splits: Vec<f64> = p
            .forms()
            .iter()
            .filter(|g| g.coeffs()[1] != 0.0)
            .map(|g| (g.offset() - g.coeffs()[0] * x) / g.coeffs()[1])
            .collect();
        integrate_split(&|y| p.evaluate(&[x, y]), y0, y1, &splits)
    };
    let bottom = along(&lower, &dlo)?;
    let top = along(&upper, &dup)?;
    let rhs = bottom + side(region.b)? - top - side(region.a)?;
    Ok(GreenReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        class_violations,
    })
}
