use crate::expr::Sign;
use crate::piecewise::{PiecewiseFn, Side, TOL_ZERO};
use crate::specular::{a_combine, classical_partial_field, specular_partial};
use crate::tangent2d::{criterion, criterion_tol, sphere_points};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSample {
    pub point: Vec<f64>,
    pub on_line: bool,
    /// Residual of the equation: classical inside a region, and on a line
    /// the A-combination of the two adjacent limits of the operator.
    pub residual: f64,
    /// On a line, the operator applied directly with specular derivatives
    /// of the classical first partials, minus the right-hand side.
    pub direct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualReport {
    pub samples: Vec<ResidualSample>,
    pub errors: Vec<String>,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_off_line(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| !s.on_line)
            .map(|s| s.residual.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_direct(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.direct)
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

fn combine_or_zero(l: f64, r: f64) -> f64 {
    if (l + r).abs() <= TOL_ZERO {
        0.0
    } else {
        a_combine(l, r)
    }
}

/// Specular partial at `p`, or the one-sided classical partial when only
/// one side is covered (as on the edge of the domain).
pub fn partial_or_one_sided(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<f64> {
    match specular_partial(u, p, axis) {
        Err(Error::CoverageGap(_)) => {
            let signs = u.signs_at(p);
            for (dir, side) in [(Sign::Pos, Side::Right), (Sign::Neg, Side::Left)] {
                if let Ok(b) = u.resolve(&u.adjacent(&signs, axis, dir)) {
                    return b.partial_at(p, axis, side);
                }
            }
            Err(Error::CoverageGap(format!("no branch next to {p:?}")))
        }
        other => other,
    }
}

fn operator_on(u: &PiecewiseFn, signs: &[Sign], p: &[f64]) -> Result<f64> {
    let b = u.resolve(signs)?;
    Ok(b.derivative(1).derivative(1).eval(p)? - b.derivative(0).derivative(0).eval(p)?)
}

/// Residual of `u_tt − u_xx = f` at the given points of the `(x, t)` plane.
/// A missing `f` means zero.
pub fn wave_residual(u: &PiecewiseFn, f: Option<&PiecewiseFn>, points: &[Vec<f64>]) -> Result<ResidualReport> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch("wave residual needs u(x, t)".into()));
    }
    let (ux, _) = classical_partial_field(u, 0)?;
    let (ut, _) = classical_partial_field(u, 1)?;
    let rhs = |p: &[f64]| -> Result<f64> { f.map_or(Ok(0.0), |f| f.evaluate(p)) };
    let mut report = ResidualReport::default();
    for p in points {
        let signs = u.signs_at(p);
        let zero: Vec<usize> = (0..signs.len()).filter(|&k| signs[k] == Sign::Zero).collect();
        let sample = (|| -> Result<ResidualSample> {
            if zero.is_empty() {
                return Ok(ResidualSample {
                    point: p.clone(),
                    on_line: false,
                    residual: operator_on(u, &signs, p)? - rhs(p)?,
                    direct: None,
                });
            }
            let axis = if zero.iter().any(|&k| u.forms()[k].coeffs()[0] != 0.0) {
                0
            } else {
                1
            };
            let l = operator_on(u, &u.adjacent(&signs, axis, Sign::Neg), p)?;
            let r = operator_on(u, &u.adjacent(&signs, axis, Sign::Pos), p)?;
            let g = rhs(p)?;
            let direct = partial_or_one_sided(&ut, p, 1)? - partial_or_one_sided(&ux, p, 0)? - g;
            Ok(ResidualSample {
                point: p.clone(),
                on_line: true,
                residual: combine_or_zero(l, r) - g,
                direct: Some(direct),
            })
        })();
        match sample {
            Ok(s) => report.samples.push(s),
            Err(e) => report.errors.push(format!("{p:?}: {e}")),
        }
    }
    Ok(report)
}

/// `∂S_t u + ∂S_x u` at the given points.
pub fn transport_residual(u: &PiecewiseFn, points: &[Vec<f64>]) -> Result<ResidualReport> {
    let mut report = ResidualReport::default();
    for p in points {
        let on_line = u.signs_at(p).contains(&Sign::Zero);
        match (partial_or_one_sided(u, p, 1), partial_or_one_sided(u, p, 0)) {
            (Ok(a), Ok(b)) => report.samples.push(ResidualSample {
                point: p.clone(),
                on_line,
                residual: a + b,
                direct: None,
            }),
            (Err(e), _) | (_, Err(e)) => report.errors.push(format!("{p:?}: {e}")),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    /// Criterion value at each point, or the reason it could not be formed.
    pub points: Vec<(Vec<f64>, std::result::Result<f64, String>)>,
    pub failures: usize,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

/// Whether `v = u_t − u_x` has a strong tangent plane at each point.
pub fn hypothesis_h_check(u: &PiecewiseFn, points: &[Vec<f64>]) -> Result<HypothesisReport> {
    let (ux, _) = classical_partial_field(u, 0)?;
    let (ut, _) = classical_partial_field(u, 1)?;
    let v = ut.sub(&ux)?;
    let mut report = HypothesisReport::default();
    for p in points {
        let entry = match sphere_points(&v, p) {
            Ok(sp) => {
                let (a1, b1, a2, b2) = sp.slopes();
                let c = criterion(a1, b1, a2, b2);
                if c.abs() > criterion_tol(a1, b1, a2, b2) {
                    report.failures += 1;
                }
                Ok(c)
            }
            Err(e) => {
                report.failures += 1;
                Err(e.to_string())
            }
        };
        report.points.push((p.clone(), entry));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialReport {
    pub max_displacement_error: f64,
    pub max_velocity_error: f64,
    pub errors: Vec<String>,
}

/// Compares `u(x, 0)` with `φ` and the right `t` semi-derivative at `t = 0`
/// with `ψ` (when given) at the sample abscissae.
pub fn initial_check(u: &PiecewiseFn, phi: &PiecewiseFn, psi: Option<&PiecewiseFn>, xs: &[f64]) -> InitialReport {
    let mut r = InitialReport::default();
    for &x in xs {
        let p = [x, 0.0];
        match (u.evaluate(&p), phi.evaluate(&[x])) {
            (Ok(a), Ok(b)) => r.max_displacement_error = r.max_displacement_error.max((a - b).abs()),
            (Err(e), _) | (_, Err(e)) => r.errors.push(format!("u({x}, 0): {e}")),
        }
        if let Some(psi) = psi {
            let ut = u
                .resolve(&u.adjacent(&u.signs_at(&p), 1, Sign::Pos))
                .and_then(|b| b.partial_at(&p, 1, Side::Right));
            match (ut, psi.evaluate(&[x])) {
                (Ok(a), Ok(b)) => r.max_velocity_error = r.max_velocity_error.max((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => r.errors.push(format!("u_t({x}, 0): {e}")),
            }
        }
    }
    r
}

/// Largest `|u(0, t)|` over the sample times.
pub fn boundary_check(u: &PiecewiseFn, ts: &[f64]) -> Result<f64> {
    let mut m: f64 = 0.0;
    for &t in ts {
        m = m.max(u.evaluate(&[0.0, t])?.abs());
    }
    Ok(m)
}
