//! Closed-form solvers for the transport and wave equations in one space
//! dimension, and the checks used to verify their output.
//!
//! Solutions are piecewise functions of `(x, t)` on `t >= 0` (and `x >= 0`
//! for the half-line). They are assembled symbolically from the data by
//! composition with `x ± t`, a piecewise primitive of the initial velocity,
//! and, for a force term, a per-region polynomial fitted to the
//! domain-of-dependence integral.

mod checks;

pub use checks::{
    boundary_check, hypothesis_h_check, initial_check, partial_or_one_sided, transport_residual, wave_residual,
    HypothesisReport, InitialReport, ResidualReport, ResidualSample,
};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::arrangement::{split_polygon, Arrangement};
use crate::expr::{antiderivative, poly_degree, AffineForm, EvalError, Expr, Poly2, Sign};
use crate::piecewise::{pattern_of, Branch, ClosureBranch, OnLinePolicy, PiecewiseFn, SampleConfig};
use crate::quad::{integrate_1d, integrate_triangle, singular_points};
use crate::specular::{a_combine, classical_partial_field, phototangent, specular_field};
use crate::{Error, Result};

/// `x` for `x >= 0` and `λ(eˣ − 1)` otherwise.
pub fn elu(lambda: f64, x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        lambda * x.exp_m1()
    }
}

pub fn space_time_vars() -> Vec<String> {
    vec!["x".to_string(), "t".to_string()]
}

/// The constraint `t >= 0`.
pub fn time_domain() -> AffineForm {
    AffineForm::new(vec![0.0, 1.0], 0.0).expect("nonzero form")
}

/// The constraint `x >= 0`.
pub fn space_domain() -> AffineForm {
    AffineForm::new(vec![1.0, 0.0], 0.0).expect("nonzero form")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Transport,
    Dalembert,
    Halfline,
    Duhamel,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Transport => "transport",
            Provenance::Dalembert => "dalembert",
            Provenance::Halfline => "halfline",
            Provenance::Duhamel => "duhamel",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionField {
    pub u: PiecewiseFn,
    pub provenance: Provenance,
    pub characteristics: Vec<AffineForm>,
    /// The force contribution on its own, when there is one.
    pub duhamel: Option<PiecewiseFn>,
    pub notes: Vec<String>,
}

impl SolutionField {
    fn new(u: PiecewiseFn, provenance: Provenance) -> Self {
        let u = u.with_all_policies(OnLinePolicy::SpecularCombination);
        SolutionField {
            characteristics: u.forms().to_vec(),
            u,
            provenance,
            duhamel: None,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialDomain {
    FullLine,
    HalfLine,
}

#[derive(Debug, Clone)]
pub struct WaveProblem {
    pub domain: SpatialDomain,
    pub phi: PiecewiseFn,
    pub psi: PiecewiseFn,
    pub f: Option<PiecewiseFn>,
}

impl WaveProblem {
    pub fn solve(&self) -> Result<SolutionField> {
        match (self.domain, &self.f) {
            (SpatialDomain::HalfLine, None) => solve_wave_halfline(&self.phi, &self.psi),
            (SpatialDomain::HalfLine, Some(_)) => Err(Error::ClassViolation(
                "a force term on the half-line is not supported".into(),
            )),
            (SpatialDomain::FullLine, None) => solve_wave_homogeneous(&self.phi, &self.psi),
            (SpatialDomain::FullLine, Some(f)) => solve_wave_nonhomogeneous(&self.phi, &self.psi, f),
        }
    }
}

fn require_1d(u: &PiecewiseFn, name: &str) -> Result<()> {
    if u.dim() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be a function of one variable"
        )));
    }
    Ok(())
}

fn compose(u: &PiecewiseFn, tsign: f64) -> Result<PiecewiseFn> {
    u.compose_affine(&[(vec![1.0, tsign], 0.0)], &space_time_vars())
}

fn require_continuous(u: &PiecewiseFn, name: &str) -> Result<()> {
    for s in singular_points(u) {
        let (_, cont) = phototangent(u, s)?;
        if !cont {
            return Err(Error::ClassViolation(format!("{name} jumps at {s}")));
        }
    }
    Ok(())
}

/// Initial displacement: continuous, classical first derivative, proper
/// specular second derivative.
fn check_phi(phi: &PiecewiseFn) -> Result<()> {
    require_1d(phi, "phi")?;
    require_continuous(phi, "phi")?;
    let (d1, rep) = classical_partial_field(phi, 0)?;
    if !rep.non_classical_forms.is_empty() {
        let s: Vec<String> = rep.non_classical_forms.iter().map(|&k| phi.form_label(k)).collect();
        return Err(Error::ClassViolation(format!(
            "phi' does not exist where {} = 0",
            s.join(", ")
        )));
    }
    if !specular_field(&d1, 0)?.is_proper(&SampleConfig::for_dim(1)).proper {
        return Err(Error::ClassViolation(
            "the specular derivative of phi' is not proper".into(),
        ));
    }
    Ok(())
}

/// Initial velocity: continuous with a proper specular derivative.
fn check_psi(psi: &PiecewiseFn) -> Result<()> {
    require_1d(psi, "psi")?;
    require_continuous(psi, "psi")?;
    if !specular_field(psi, 0)?.is_proper(&SampleConfig::for_dim(1)).proper {
        return Err(Error::ClassViolation(
            "the specular derivative of psi is not proper".into(),
        ));
    }
    Ok(())
}

/// `u(x, t) = h(x − t)` on `t >= 0`.
pub fn solve_transport(h: &PiecewiseFn) -> Result<SolutionField> {
    require_1d(h, "h")?;
    for s in singular_points(h) {
        let (_, cont) = phototangent(h, s)?;
        if !cont {
            return Err(Error::ClassViolation(format!(
                "h is not specularly differentiable at {s}: its phototangent is discontinuous"
            )));
        }
    }
    let u = compose(h, -1.0)?.with_domain(&[time_domain()]);
    Ok(SolutionField::new(u, Provenance::Transport))
}

/// A primitive of a one-variable function, vanishing at 0. Pieces are
/// integrated symbolically and glued continuously; if some piece has no
/// closed form the whole primitive falls back to quadrature.
pub fn primitive(psi: &PiecewiseFn) -> Result<PiecewiseFn> {
    require_1d(psi, "the integrand")?;
    let vars = psi.vars().to_vec();
    let pts = singular_points(psi);
    let n = pts.len();
    let interval_sample = |k: usize| -> f64 {
        match (k, n) {
            (_, 0) => 0.0,
            (0, _) => pts[0] - 1.0,
            (k, n) if k == n => pts[n - 1] + 1.0,
            (k, _) => 0.5 * (pts[k - 1] + pts[k]),
        }
    };
    let signs: Vec<Vec<Sign>> = (0..=n).map(|k| psi.signs_at(&[interval_sample(k)])).collect();
    let mut pieces = Vec::with_capacity(n + 1);
    for s in &signs {
        let b = psi.resolve(s)?;
        pieces.push(b.as_expr().and_then(|e| antiderivative(e, 0)));
    }
    let point_signs: Vec<Vec<Sign>> = pts.iter().map(|&p| psi.signs_at(&[p])).collect();

    let table: Vec<(Vec<_>, Branch)> = if pieces.iter().all(Option::is_some) {
        let g: Vec<Expr> = pieces.into_iter().map(Option::unwrap).collect();
        let at = |k: usize, x: f64| -> Result<f64> { Ok(g[k].eval(&[x])?) };
        let k0 = pts.iter().take_while(|&&p| p <= 0.0).count();
        let mut c = vec![0.0; n + 1];
        c[k0] = -at(k0, 0.0)?;
        for k in k0 + 1..=n {
            c[k] = at(k - 1, pts[k - 1])? + c[k - 1] - at(k, pts[k - 1])?;
        }
        for k in (0..k0).rev() {
            c[k] = at(k + 1, pts[k])? + c[k + 1] - at(k, pts[k])?;
        }
        let piece = |k: usize| Branch::Expr((g[k].clone() + Expr::constant(c[k])).simplify());
        let mut t: Vec<_> = (0..=n).map(|k| (pattern_of(&signs[k]), piece(k))).collect();
        t.extend((0..n).map(|j| (pattern_of(&point_signs[j]), piece(j))));
        t
    } else {
        let f = Arc::new(psi.clone());
        let closure = Branch::Closure(ClosureBranch::new("primitive", move |p: &[f64]| {
            integrate_1d(&f, 0.0, p[0]).map_err(|e| EvalError::Domain(e.to_string()))
        }));
        let mut t: Vec<_> = signs.iter().map(|s| (pattern_of(s), closure.clone())).collect();
        t.extend(point_signs.iter().map(|s| (pattern_of(s), closure.clone())));
        t
    };
    let m = psi.forms().len();
    PiecewiseFn::from_parts(
        &vars,
        psi.forms().to_vec(),
        vec![OnLinePolicy::BranchAssigned; m],
        vec![],
        table,
    )
}

/// d'Alembert's formula on `t >= 0`.
pub fn solve_wave_homogeneous(phi: &PiecewiseFn, psi: &PiecewiseFn) -> Result<SolutionField> {
    check_phi(phi)?;
    check_psi(psi)?;
    let u = dalembert(phi, psi, &[time_domain()])?;
    Ok(SolutionField::new(u, Provenance::Dalembert))
}

fn dalembert(phi: &PiecewiseFn, psi: &PiecewiseFn, domain: &[AffineForm]) -> Result<PiecewiseFn> {
    let big_psi = primitive(psi)?;
    let plus = compose(phi, 1.0)?.with_domain(domain);
    let wave = plus.add(&compose(phi, -1.0)?)?;
    let drift = compose(&big_psi, 1.0)?.sub(&compose(&big_psi, -1.0)?)?;
    wave.add(&drift).map(|u| u.scale(0.5))
}

/// Reflection method on `x >= 0, t >= 0` with `u(0, t) = 0`: d'Alembert's
/// formula applied to the odd extensions of the data.
pub fn solve_wave_halfline(phi: &PiecewiseFn, psi: &PiecewiseFn) -> Result<SolutionField> {
    require_1d(phi, "phi")?;
    require_1d(psi, "psi")?;
    let (p0, s0) = (phi.evaluate(&[0.0])?, psi.evaluate(&[0.0])?);
    if p0.abs() > 1e-12 || s0.abs() > 1e-12 {
        return Err(Error::Compatibility(format!(
            "phi(0) = {p0}, psi(0) = {s0}; both must vanish"
        )));
    }
    let (phi_odd, psi_odd) = (phi.odd_extension()?, psi.odd_extension()?);
    check_phi(&phi_odd)?;
    check_psi(&psi_odd)?;
    let u = dalembert(&phi_odd, &psi_odd, &[time_domain(), space_domain()])?;
    let mut sol = SolutionField::new(u, Provenance::Halfline);
    let d2 = specular_field(&specular_field(&phi_odd, 0)?, 0)?.evaluate(&[0.0])?;
    sol.notes.push(format!("second specular derivative of phi at 0: {d2}"));
    Ok(sol)
}

/// d'Alembert part plus `½∬ f` over the domain of dependence.
pub fn solve_wave_nonhomogeneous(phi: &PiecewiseFn, psi: &PiecewiseFn, f: &PiecewiseFn) -> Result<SolutionField> {
    let hom = solve_wave_homogeneous(phi, psi)?;
    if f.dim() != 2 || f.vars() != space_time_vars().as_slice() {
        return Err(Error::DimensionMismatch(
            "the force must be a function of (x, t)".into(),
        ));
    }
    let is_zero = f.forms().is_empty() && f.table().iter().all(|(_, b)| b.as_const() == Some(0.0));
    if is_zero {
        let mut sol = hom;
        sol.provenance = Provenance::Duhamel;
        return Ok(sol);
    }
    let f = f.clone().with_domain(&[time_domain()]);
    let cfg = SampleConfig::for_dim(2);
    let rep = f.is_proper(&cfg);
    if !rep.proper {
        return Err(Error::ClassViolation(format!(
            "the force is not proper ({} on-line violations)",
            rep.violations.len()
        )));
    }
    let (d, symbolic) = duhamel(&f)?;
    let u = hom.u.add(&d)?;
    let mut sol = SolutionField::new(u, Provenance::Duhamel);
    if !symbolic {
        sol.notes
            .push("force term evaluated by quadrature on some regions".into());
    }
    sol.duhamel = Some(d);
    Ok(sol)
}

fn push_unique(forms: &mut Vec<AffineForm>, f: AffineForm) {
    let (f, _) = f.normalized();
    if !forms.iter().any(|g| g.same_as(&f)) {
        forms.push(f);
    }
}

fn half_triangle_integral(f: &PiecewiseFn, x: f64, t: f64) -> Result<f64> {
    Ok(0.5 * integrate_triangle(f, x, t)?)
}

/// `D(x, t) = ½∫₀ᵗ∫_{x−t+s}^{x+t−s} f(y, s) dy ds` as a piecewise function.
///
/// `D` is polynomial on each region cut out by the forms of `f` and the
/// characteristics through the vertices of `f` (including where its lines
/// meet `t = 0`), provided `f` is piecewise polynomial. Each region gets a
/// least-squares fit from quadrature samples, accepted only if it also
/// matches at separate check points; otherwise the region keeps a
/// quadrature-backed closure. Returns the function and whether every region
/// was fitted.
pub fn duhamel(f: &PiecewiseFn) -> Result<(PiecewiseFn, bool)> {
    let vars = space_time_vars();
    let tdom = time_domain();
    let mut forms: Vec<AffineForm> = Vec::new();
    for g in f.forms() {
        push_unique(&mut forms, g.clone());
    }
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    for (i, g) in f.forms().iter().enumerate() {
        for h in f.forms()[i + 1..].iter().chain(std::iter::once(&tdom)) {
            let (a, b) = (g.coeffs(), h.coeffs());
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() > 1e-14 {
                let x = (g.offset() * b[1] - h.offset() * a[1]) / det;
                let t = (a[0] * h.offset() - b[0] * g.offset()) / det;
                if t >= -1e-12 {
                    vertices.push([x, t.max(0.0)]);
                }
            }
        }
    }
    for v in &vertices {
        push_unique(&mut forms, AffineForm::new(vec![1.0, -1.0], v[0] - v[1])?);
        push_unique(&mut forms, AffineForm::new(vec![1.0, 1.0], v[0] + v[1])?);
    }

    let degree = match f.arrangement() {
        Ok(arr) => arr
            .faces()
            .map(|c| f.resolve(&c.signs).ok().and_then(|b| b.as_expr().and_then(poly_degree)))
            .try_fold(0u32, |m, d| d.map(|d| m.max(d))),
        Err(_) => None,
    };

    let shared = Arc::new(f.clone());
    let closure = {
        let f = shared.clone();
        Branch::Closure(ClosureBranch::new(
            "domain-of-dependence integral",
            move |p: &[f64]| half_triangle_integral(&f, p[0], p[1]).map_err(|e| EvalError::Domain(e.to_string())),
        ))
    };

    let arr = Arrangement::new(&forms, 2, std::slice::from_ref(&tdom))?;
    let w = &arr.window;
    let region = vec![
        [w[0].0, 0.0],
        [w[0].1, 0.0],
        [w[0].1, w[1].1.max(1.0)],
        [w[0].0, w[1].1.max(1.0)],
    ];
    let mut all_fitted = true;
    let mut face_table: Vec<(Vec<Sign>, Branch)> = Vec::new();
    for (poly, signs) in split_polygon(&region, &forms) {
        let fitted = match degree {
            Some(deg) => fit_region(f, &poly, deg + 2)?,
            None => None,
        };
        let b = match fitted {
            Some(e) => Branch::Expr(e),
            None => {
                all_fitted = false;
                closure.clone()
            }
        };
        face_table.push((signs, b));
    }

    // Lower-dimensional cells take the branch of the face reached by a
    // small step in a fixed direction; D is continuous so any neighbour
    // would do.
    let dir = [1.0, 1e-3];
    let mut table = Vec::with_capacity(arr.cells.len());
    for cell in &arr.cells {
        let face: Vec<Sign> = cell
            .signs
            .iter()
            .zip(&forms)
            .map(|(&s, g)| {
                if s == Sign::Zero {
                    Sign::of(g.coeffs()[0] * dir[0] + g.coeffs()[1] * dir[1])
                } else {
                    s
                }
            })
            .collect();
        let b = face_table
            .iter()
            .find(|(s, _)| *s == face)
            .map(|(_, b)| b.clone())
            .unwrap_or_else(|| closure.clone());
        table.push((pattern_of(&cell.signs), b));
    }
    if forms.is_empty() {
        let b = face_table.pop().map(|(_, b)| b).unwrap_or(closure);
        table = vec![(vec![], b)];
    }
    let n = forms.len();
    let d = PiecewiseFn::from_parts(&vars, forms, vec![OnLinePolicy::BranchAssigned; n], vec![tdom], table)?;
    Ok((d, all_fitted))
}

/// Least-squares polynomial of total degree `deg` matching the
/// domain-of-dependence integral inside a convex polygon, or `None` if it
/// fails the check at independent points.
fn fit_region(f: &PiecewiseFn, poly: &[[f64; 2]], deg: u32) -> Result<Option<Expr>> {
    let n = poly.len() as f64;
    let c = poly.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0] / n, a[1] + p[1] / n]);
    let toward = |p: &[f64; 2], lam: f64| [c[0] + lam * (p[0] - c[0]), c[1] + lam * (p[1] - c[1])];
    let mut fit_pts = vec![c];
    let mut check_pts = Vec::new();
    for (i, v) in poly.iter().enumerate() {
        let next = &poly[(i + 1) % poly.len()];
        let m = [(v[0] + next[0]) / 2.0, (v[1] + next[1]) / 2.0];
        fit_pts.push(toward(v, 0.3));
        fit_pts.push(toward(v, 0.85));
        fit_pts.push(toward(&m, 0.5));
        fit_pts.push(toward(&m, 0.9));
        check_pts.push(toward(v, 0.6));
        check_pts.push(toward(&m, 0.7));
    }
    let monos = Poly2::monomials(deg);
    if fit_pts.len() < monos.len() + 2 {
        return Ok(None);
    }
    let mut a = DMatrix::zeros(fit_pts.len(), monos.len());
    let mut rhs = DVector::zeros(fit_pts.len());
    for (r, p) in fit_pts.iter().enumerate() {
        for (k, &(i, j)) in monos.iter().enumerate() {
            a[(r, k)] = p[0].powi(i as i32) * p[1].powi(j as i32);
        }
        rhs[r] = half_triangle_integral(f, p[0], p[1])?;
    }
    let svd = a.svd(true, true);
    let Ok(coef) = svd.solve(&rhs, 1e-13) else {
        return Ok(None);
    };
    let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut p2 = Poly2::default();
    for (k, &(i, j)) in monos.iter().enumerate() {
        let v = snap(coef[k], scale);
        if v != 0.0 {
            p2.terms.insert((i, j), v);
        }
    }
    for p in fit_pts.iter().chain(&check_pts) {
        let want = half_triangle_integral(f, p[0], p[1])?;
        if (p2.eval(p[0], p[1]) - want).abs() > 1e-8 * (1.0 + want.abs()) {
            return Ok(None);
        }
    }
    Ok(Some(p2.to_expr().simplify()))
}

/// Rounds a fitted coefficient to zero or to a nearby fraction with a
/// small denominator when it is within fitting noise of one. The fit is
/// re-verified afterwards, so a wrong snap only costs the closed form.
fn snap(v: f64, scale: f64) -> f64 {
    let tol = 1e-11 * scale;
    if v.abs() <= tol {
        return 0.0;
    }
    for den in [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 24.0] {
        let r = (v * den).round() / den;
        if (v - r).abs() <= tol {
            return r;
        }
    }
    v
}

/// `A(u(a], u[a))` along `axis` at `p`, or 0 when the limits cancel.
pub fn combined_limit(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<f64> {
    let l = u.one_sided_limits(p, axis)?;
    Ok(if (l.left + l.right).abs() <= crate::piecewise::TOL_ZERO {
        0.0
    } else {
        a_combine(l.left, l.right)
    })
}
