//! The A-combination of two slopes and the derivatives built from it.
//!
//! For slopes α (right) and β (left) the specular value is
//! `tan((atan α + atan β) / 2)`, computed here in an algebraic form that
//! avoids trigonometric round-off and is exactly symmetric.

mod s2;

pub use s2::{s2_membership, S2Report, S2Verdict};

use crate::arrangement::Cell;
use crate::expr::{Expr, Sign};
use crate::piecewise::{Branch, OnLinePolicy, PiecewiseFn, SampleConfig, Side, SignPat};
use crate::{Error, Result};

/// `tan((atan α + atan β)/2)`.
///
/// With `A = √(1+α²)`, `B = √(1+β²)` this equals `(αβ − 1 + AB) / (α + β)`.
/// Multiplying through by the conjugate gives `(α + β) / (1 − αβ + AB)`,
/// which is the form used when `αβ ≤ 0`; the first form is used otherwise.
/// Neither denominator cancels in its range, the result is exactly
/// symmetric, and it is exactly zero when `β = −α`.
pub fn a_combine(alpha: f64, beta: f64) -> f64 {
    if alpha == beta {
        return alpha;
    }
    if alpha == -beta {
        return 0.0;
    }
    if !alpha.is_finite() || !beta.is_finite() {
        let (a, b) = if alpha < beta { (alpha, beta) } else { (beta, alpha) };
        return ((a.atan() + b.atan()) / 2.0).tan();
    }
    let ab = alpha * beta;
    let r = alpha.hypot(1.0) * beta.hypot(1.0);
    if ab <= 0.0 {
        (alpha + beta) / (1.0 - ab + r)
    } else {
        (ab - 1.0 + r) / (alpha + beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiDerivativePair {
    /// Right semi-derivative α.
    pub right: f64,
    /// Left semi-derivative β.
    pub left: f64,
    pub axis: usize,
}

impl SemiDerivativePair {
    pub fn combined(&self) -> f64 {
        a_combine(self.right, self.left)
    }
}

fn check_axis(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<()> {
    if p.len() != u.dim() || axis >= u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} / axis {axis} for a {}-variable function",
            p.len(),
            u.dim()
        )));
    }
    Ok(())
}

/// Right and left semi-derivatives along `axis`: the classical derivatives
/// of the branches adjacent to `p` in the `+e_axis` and `-e_axis`
/// directions.
pub fn semi_derivatives(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<SemiDerivativePair> {
    check_axis(u, p, axis)?;
    let signs = u.signs_at(p);
    let right = u.resolve(&u.adjacent(&signs, axis, Sign::Pos))?;
    let left = u.resolve(&u.adjacent(&signs, axis, Sign::Neg))?;
    let alpha = right.partial_at(p, axis, Side::Right)?;
    let beta = left.partial_at(p, axis, Side::Left)?;
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::NonFinite(format!("semi-derivatives ({alpha}, {beta}) at {p:?}")));
    }
    Ok(SemiDerivativePair {
        right: alpha,
        left: beta,
        axis,
    })
}

pub fn specular_partial(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<f64> {
    Ok(semi_derivatives(u, p, axis)?.combined())
}

/// Forms on which a derived field could not be given a closed form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldReport {
    /// Forms whose on-line entries combine non-constant slopes pointwise.
    pub pointwise_forms: Vec<usize>,
    /// Forms across which the one-sided classical partials differ.
    pub non_classical_forms: Vec<usize>,
}

fn crossing_forms(u: &PiecewiseFn, cell: &Cell, axis: usize) -> Vec<usize> {
    cell.zero_forms()
        .filter(|&k| u.forms()[k].coeffs()[axis] != 0.0)
        .collect()
}

fn build_field(u: &PiecewiseFn, mut entry: impl FnMut(&Cell) -> Result<Branch>) -> Result<PiecewiseFn> {
    let mut table = Vec::new();
    for (cell, required) in u.extended_cells()? {
        match entry(&cell) {
            Ok(b) => table.push((cell.signs.iter().map(|&s| SignPat::exact(s)).collect(), b)),
            Err(e) if required => return Err(e),
            Err(_) => {}
        }
    }
    let n = u.forms().len();
    PiecewiseFn::from_parts(
        u.vars(),
        u.forms().to_vec(),
        vec![OnLinePolicy::BranchAssigned; n],
        u.domain().to_vec(),
        table,
    )
}

/// Derivatives along `axis` of the branches on either side of `cell`. At
/// the edge of the domain only one side may exist; it then stands in for
/// both.
fn side_derivatives(u: &PiecewiseFn, cell: &Cell, axis: usize) -> Result<(Branch, Branch)> {
    let side = |dir| {
        u.resolve(&u.adjacent(&cell.signs, axis, dir))
            .map(|b| b.derivative(axis))
    };
    match (side(Sign::Pos), side(Sign::Neg)) {
        (Ok(r), Ok(l)) => Ok((r, l)),
        (Ok(r), Err(_)) => Ok((r.clone(), r)),
        (Err(_), Ok(l)) => Ok((l.clone(), l)),
        (Err(e), Err(_)) => Err(e),
    }
}

/// The specular partial derivative of `u` along `axis` as a piecewise
/// function on the same forms. See [`specular_field_report`].
pub fn specular_field(u: &PiecewiseFn, axis: usize) -> Result<PiecewiseFn> {
    Ok(specular_field_report(u, axis)?.0)
}

/// Open regions carry the classical derivative of their branch. Cells on a
/// form that varies along `axis` carry `A(α, β)`: a constant when both
/// adjacent slopes are constant, otherwise a pointwise combination that is
/// recorded in the report.
pub fn specular_field_report(u: &PiecewiseFn, axis: usize) -> Result<(PiecewiseFn, FieldReport)> {
    if axis >= u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "axis {axis} of a {}-variable function",
            u.dim()
        )));
    }
    let mut report = FieldReport::default();
    let field = build_field(u, |cell| {
        let crossing = crossing_forms(u, cell, axis);
        if crossing.is_empty() {
            return Ok(u.resolve(&cell.signs)?.derivative(axis));
        }
        let (right, left) = side_derivatives(u, cell, axis)?;
        if let (Some(a), Some(b)) = (right.as_const(), left.as_const()) {
            return Ok(Branch::constant(a_combine(a, b)));
        }
        if cell.dim == 0 {
            let p = &cell.sample;
            return Ok(Branch::constant(a_combine(right.eval(p)?, left.eval(p)?)));
        }
        for k in crossing {
            if !report.pointwise_forms.contains(&k) {
                report.pointwise_forms.push(k);
            }
        }
        Ok(Branch::combine_values(right, left))
    })?;
    Ok((field, report))
}

fn branches_agree(a: &Branch, b: &Branch, cell: &Cell) -> Result<bool> {
    if let (Some(x), Some(y)) = (a.as_expr(), b.as_expr()) {
        if x == y {
            return Ok(true);
        }
    }
    for p in cell.samples() {
        let (va, vb) = (a.eval(p)?, b.eval(p)?);
        if (va - vb).abs() > 1e-9 * (1.0 + va.abs() + vb.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The classical partial derivative along `axis` as a piecewise function.
/// On cells where the two adjacent derivatives agree the common value is
/// used; elsewhere the form is listed as non-classical and the cell keeps
/// the derivative of its own branch.
pub fn classical_partial_field(u: &PiecewiseFn, axis: usize) -> Result<(PiecewiseFn, FieldReport)> {
    if axis >= u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "axis {axis} of a {}-variable function",
            u.dim()
        )));
    }
    let mut report = FieldReport::default();
    let field = build_field(u, |cell| {
        let crossing = crossing_forms(u, cell, axis);
        if crossing.is_empty() {
            return Ok(u.resolve(&cell.signs)?.derivative(axis));
        }
        let (right, left) = side_derivatives(u, cell, axis)?;
        if branches_agree(&right, &left, cell)? {
            return Ok(right);
        }
        for k in crossing {
            if !report.non_classical_forms.contains(&k) {
                report.non_classical_forms.push(k);
            }
        }
        Ok(u.resolve(&cell.signs)?.derivative(axis))
    })?;
    Ok((field, report))
}

/// `|∂S_i[u∘R_i](p) + ∂S_i u(R_i p)|` where `R_i` negates coordinate `i`.
pub fn odd_reflection_check(u: &PiecewiseFn, p: &[f64], axis: usize) -> Result<f64> {
    check_axis(u, p, axis)?;
    let reflected = u.reflect_axis(axis)?;
    let mut q = p.to_vec();
    q[axis] = -q[axis];
    Ok((specular_partial(&reflected, p, axis)? + specular_partial(u, &q, axis)?).abs())
}

/// The three-piece local model of a one-variable function at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phototangent {
    pub x: f64,
    pub left_slope: f64,
    pub right_slope: f64,
    pub left_value: f64,
    pub right_value: f64,
    pub center: f64,
}

impl Phototangent {
    pub fn eval(&self, y: f64) -> f64 {
        if y < self.x {
            self.left_value + self.left_slope * (y - self.x)
        } else if y > self.x {
            self.right_value + self.right_slope * (y - self.x)
        } else {
            self.center
        }
    }

    pub fn is_continuous(&self) -> bool {
        (self.left_value - self.right_value).abs() <= crate::piecewise::tol_jump(self.left_value, self.right_value)
    }
}

/// Phototangent of `u` at `x` and whether it is continuous, which is the
/// specular differentiability test at `x`.
pub fn phototangent(u: &PiecewiseFn, x: f64) -> Result<(Phototangent, bool)> {
    if u.dim() != 1 {
        return Err(Error::DimensionMismatch("phototangent needs one variable".into()));
    }
    let lim = u.one_sided_limits(&[x], 0)?;
    let semi = semi_derivatives(u, &[x], 0)?;
    let pht = Phototangent {
        x,
        left_slope: semi.left,
        right_slope: semi.right,
        left_value: lim.left,
        right_value: lim.right,
        center: lim.mid,
    };
    let cont = pht.is_continuous();
    Ok((pht, cont))
}

/// The integrand condition of the second fundamental theorem: every
/// singular point carries `A(f(x], f[x))`, or `0` when the limits cancel.
pub fn ftc_condition_check(f: &PiecewiseFn) -> bool {
    f.dim() == 1 && f.is_proper(&SampleConfig::for_dim(1)).proper
}

/// Constant expression helper for callers that build fields by hand.
pub fn combined_constant(alpha: f64, beta: f64) -> Expr {
    Expr::constant(a_combine(alpha, beta))
}
