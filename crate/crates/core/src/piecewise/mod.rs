//! Piecewise-smooth functions on R or R^2 whose singular sets are the zero
//! sets of finitely many affine forms.
//!
//! A [`PiecewiseFn`] stores the forms, a branch table keyed by sign
//! patterns (first match wins), an on-line policy per form and optional
//! domain constraints `g >= 0`. Branches are expressions, or opaque closures
//! when no closed form is available.

mod algebra;
mod continuity;

use std::fmt;
use std::sync::Arc;

pub use algebra::BinOp;
pub use continuity::{
    tol_jump, ContinuityReport, ContinuityVerdict, FormContinuity, ProperReport, ProperViolation, SampleConfig,
    TOL_ZERO,
};

use crate::arrangement::Arrangement;
use crate::expr::{affine_arguments, diff, pin_signs, AffineForm, EvalError, Expr, Sign};
use crate::{Error, Result};

/// One entry of a sign pattern; `Any` matches every sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPat {
    Neg,
    Zero,
    Pos,
    Any,
}

impl SignPat {
    pub fn matches(self, s: Sign) -> bool {
        matches!(
            (self, s),
            (SignPat::Any, _) | (SignPat::Neg, Sign::Neg) | (SignPat::Zero, Sign::Zero) | (SignPat::Pos, Sign::Pos)
        )
    }

    pub fn exact(s: Sign) -> SignPat {
        match s {
            Sign::Neg => SignPat::Neg,
            Sign::Zero => SignPat::Zero,
            Sign::Pos => SignPat::Pos,
        }
    }

    pub fn from_char(c: char) -> Option<SignPat> {
        Some(match c {
            '-' => SignPat::Neg,
            '0' => SignPat::Zero,
            '+' => SignPat::Pos,
            '*' => SignPat::Any,
            _ => return None,
        })
    }

    fn flip(self) -> SignPat {
        match self {
            SignPat::Neg => SignPat::Pos,
            SignPat::Pos => SignPat::Neg,
            other => other,
        }
    }
}

pub fn pattern_of(signs: &[Sign]) -> Vec<SignPat> {
    signs.iter().map(|&s| SignPat::exact(s)).collect()
}

pub fn signs_label(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

/// How a function takes its value on the graph of a form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnLinePolicy {
    /// The table entry matching the on-line sign vector decides.
    BranchAssigned,
    /// The A-combination of the one-sided limits across the form.
    SpecularCombination,
}

pub type ClosureFn = dyn Fn(&[f64]) -> std::result::Result<f64, EvalError> + Send + Sync;

/// A branch without a closed form, e.g. a quadrature-backed term.
#[derive(Clone)]
pub struct ClosureBranch {
    pub label: String,
    f: Arc<ClosureFn>,
}

impl ClosureBranch {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> std::result::Result<f64, EvalError> + Send + Sync + 'static,
    ) -> Self {
        ClosureBranch {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn call(&self, p: &[f64]) -> std::result::Result<f64, EvalError> {
        (self.f)(p)
    }
}

/// Which side a one-sided finite difference looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Central,
}

/// Step used by finite-difference fallbacks on closure branches.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone)]
pub enum Branch {
    Expr(Expr),
    Closure(ClosureBranch),
}

impl fmt::Debug for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Expr(e) => write!(f, "Expr({e:?})"),
            Branch::Closure(c) => write!(f, "Closure({})", c.label),
        }
    }
}

impl From<Expr> for Branch {
    fn from(e: Expr) -> Self {
        Branch::Expr(e)
    }
}

impl Branch {
    pub fn constant(c: f64) -> Branch {
        Branch::Expr(Expr::constant(c))
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        let v = match self {
            Branch::Expr(e) => e.eval(p)?,
            Branch::Closure(c) => c.call(p)?,
        };
        Ok(v)
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Branch::Expr(e) => Some(e),
            Branch::Closure(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        self.as_expr().and_then(Expr::as_const)
    }

    pub fn is_closure(&self) -> bool {
        matches!(self, Branch::Closure(_))
    }

    fn closure_of(self) -> Arc<ClosureFn> {
        match self {
            Branch::Expr(e) => Arc::new(move |p: &[f64]| e.eval(p)),
            Branch::Closure(c) => c.f,
        }
    }

    /// Partial derivative along `axis`. Closures fall back to a central
    /// difference and the result is itself a closure.
    pub fn derivative(&self, axis: usize) -> Branch {
        match self {
            Branch::Expr(e) => Branch::Expr(diff(e, axis)),
            Branch::Closure(c) => {
                let g = c.f.clone();
                Branch::Closure(ClosureBranch::new(format!("d{axis}[{}]", c.label), move |p| {
                    fd_partial(&*g, p, axis, Side::Central)
                }))
            }
        }
    }

    /// Numeric partial at `p`; closures use a one-sided difference on `side`.
    pub fn partial_at(&self, p: &[f64], axis: usize, side: Side) -> Result<f64> {
        match self {
            Branch::Expr(e) => Ok(diff(e, axis).eval(p)?),
            Branch::Closure(c) => Ok(fd_partial(&*c.f, p, axis, side)?),
        }
    }

    /// The A-combination of two branches, evaluated pointwise.
    pub fn combine_values(left: Branch, right: Branch) -> Branch {
        match (left, right) {
            (Branch::Expr(a), Branch::Expr(b)) => Branch::Expr(Expr::combine(a, b).simplify()),
            (a, b) => {
                let (fa, fb) = (a.closure_of(), b.closure_of());
                Branch::Closure(ClosureBranch::new("A(left, right)", move |p| {
                    Ok(crate::specular::a_combine(fa(p)?, fb(p)?))
                }))
            }
        }
    }

    pub fn binary(a: Branch, b: Branch, op: BinOp) -> Branch {
        match (a, b) {
            (Branch::Expr(x), Branch::Expr(y)) => Branch::Expr(op.apply_expr(x, y)),
            (a, b) => {
                let (fa, fb) = (a.closure_of(), b.closure_of());
                Branch::Closure(ClosureBranch::new(format!("{op:?}"), move |p| {
                    Ok(op.apply(fa(p)?, fb(p)?))
                }))
            }
        }
    }

    pub fn scale(self, c: f64) -> Branch {
        Branch::binary(Branch::constant(c), self, BinOp::Mul)
    }

    /// Compose with the map `p -> (c_0 . p + d_0, c_1 . p + d_1, ...)`.
    pub fn compose_affine(&self, rows: &[(Vec<f64>, f64)]) -> Branch {
        match self {
            Branch::Expr(e) => {
                let subs: Vec<Expr> = rows
                    .iter()
                    .map(|(c, d)| {
                        let mut acc = Expr::constant(*d);
                        for (j, &cj) in c.iter().enumerate() {
                            if cj != 0.0 {
                                acc = acc + Expr::constant(cj) * Expr::var(j);
                            }
                        }
                        acc.simplify()
                    })
                    .collect();
                Branch::Expr(e.substitute(&subs).simplify())
            }
            Branch::Closure(c) => {
                let g = c.f.clone();
                let rows = rows.to_vec();
                Branch::Closure(ClosureBranch::new(c.label.clone(), move |p| {
                    let q: Vec<f64> = rows
                        .iter()
                        .map(|(c, d)| d + c.iter().zip(p).map(|(a, x)| a * x).sum::<f64>())
                        .collect();
                    g(&q)
                }))
            }
        }
    }
}

/// One-sided second-order (Richardson) difference quotient.
pub(crate) fn fd_partial(f: &ClosureFn, p: &[f64], axis: usize, side: Side) -> std::result::Result<f64, EvalError> {
    let shifted = |h: f64| -> std::result::Result<f64, EvalError> {
        let mut q = p.to_vec();
        q[axis] += h;
        f(&q)
    };
    let h = FD_STEP * (1.0 + p[axis].abs());
    match side {
        Side::Central => {
            let d1 = (shifted(h)? - shifted(-h)?) / (2.0 * h);
            let d2 = (shifted(h / 2.0)? - shifted(-h / 2.0)?) / h;
            Ok((4.0 * d2 - d1) / 3.0)
        }
        Side::Right | Side::Left => {
            let s = if side == Side::Right { 1.0 } else { -1.0 };
            // Derivative at p of the quadratic through the nodes h, 2h, 3h
            // away from p, so the on-line value itself never enters.
            let f1 = shifted(s * h)?;
            let f2 = shifted(s * 2.0 * h)?;
            let f3 = shifted(s * 3.0 * h)?;
            Ok(s * (-5.0 * f1 + 8.0 * f2 - 3.0 * f3) / (2.0 * h))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedLimits {
    pub left: f64,
    pub right: f64,
    pub mid: f64,
    pub axis: usize,
}

#[derive(Clone, Debug)]
pub struct PiecewiseFn {
    vars: Vec<String>,
    forms: Vec<AffineForm>,
    policies: Vec<OnLinePolicy>,
    domain: Vec<AffineForm>,
    table: Vec<(Vec<SignPat>, Branch)>,
}

impl PiecewiseFn {
    /// A function with no singular forms.
    pub fn smooth(e: Expr, vars: &[String]) -> Self {
        PiecewiseFn {
            vars: vars.to_vec(),
            forms: vec![],
            policies: vec![],
            domain: vec![],
            table: vec![(vec![], Branch::Expr(e))],
        }
    }

    /// Expands `e` over the cells of its `abs`/`sgn` arguments. Each cell gets
    /// `e` with the nonzero signs pinned; on-line cells keep the unpinned
    /// nodes and so evaluate with `sgn(0) = 0`.
    pub fn from_expression(e: &Expr, vars: &[String]) -> Result<Self> {
        let forms = affine_arguments(e, vars)?;
        if forms.is_empty() {
            return Ok(Self::smooth(e.clone(), vars));
        }
        let arr = Arrangement::new(&forms, vars.len(), &[])?;
        let mut table = Vec::with_capacity(arr.cells.len() + 1);
        for cell in &arr.cells {
            let pinned = pin_signs(e, &forms, &cell.signs, vars)?.simplify();
            table.push((pattern_of(&cell.signs), Branch::Expr(pinned)));
        }
        table.push((vec![SignPat::Any; forms.len()], Branch::Expr(e.clone())));
        Ok(PiecewiseFn {
            vars: vars.to_vec(),
            policies: vec![OnLinePolicy::BranchAssigned; forms.len()],
            forms,
            domain: vec![],
            table,
        })
    }

    /// Builds a function from an explicit table, with every form
    /// branch-assigned and no domain restriction.
    pub fn from_branches(forms: Vec<AffineForm>, table: Vec<(Vec<SignPat>, Branch)>, vars: &[String]) -> Result<Self> {
        let n = forms.len();
        Self::from_parts(vars, forms, vec![OnLinePolicy::BranchAssigned; n], vec![], table)
    }

    /// Builds and validates a function from all of its parts. Forms are
    /// normalized; patterns of forms whose orientation flips are flipped too.
    pub fn from_parts(
        vars: &[String],
        forms: Vec<AffineForm>,
        policies: Vec<OnLinePolicy>,
        domain: Vec<AffineForm>,
        mut table: Vec<(Vec<SignPat>, Branch)>,
    ) -> Result<Self> {
        let d = vars.len();
        if !(1..=2).contains(&d) {
            return Err(Error::DimensionMismatch(format!("{d} variables; expected 1 or 2")));
        }
        if let Some(f) = forms.iter().chain(&domain).find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch(format!(
                "form with {} coefficients in a {d}-variable function",
                f.dim()
            )));
        }
        if policies.len() != forms.len() {
            return Err(Error::DimensionMismatch("one policy per form required".into()));
        }
        if let Some((pat, _)) = table.iter().find(|(p, _)| p.len() != forms.len()) {
            return Err(Error::DimensionMismatch(format!(
                "pattern of length {} for {} forms",
                pat.len(),
                forms.len()
            )));
        }
        let mut normalized = Vec::with_capacity(forms.len());
        for (k, f) in forms.iter().enumerate() {
            let (n, scale) = f.normalized();
            if scale < 0.0 {
                for (pat, _) in &mut table {
                    pat[k] = pat[k].flip();
                }
            }
            if normalized.iter().any(|g: &AffineForm| g.same_as(&n)) {
                return Err(Error::DimensionMismatch(format!(
                    "form {} declared twice",
                    n.display(vars)
                )));
            }
            normalized.push(n);
        }
        let domain = domain.into_iter().map(|g| g.normalized_keep_side()).collect();
        let u = PiecewiseFn {
            vars: vars.to_vec(),
            forms: normalized,
            policies,
            domain,
            table,
        };
        u.validate()?;
        Ok(u)
    }

    /// Checks that every cell inside the domain resolves to a branch and that
    /// branches on open cells carry no `abs`/`sgn` nodes.
    pub fn validate(&self) -> Result<()> {
        let arr = self.arrangement()?;
        for cell in &arr.cells {
            let b = self.resolve(&cell.signs)?;
            if cell.is_open() {
                if let Branch::Expr(e) = &b {
                    if e.has_singular_nodes() {
                        return Err(Error::ClassViolation(format!(
                            "branch for region {} is not smooth: {}",
                            signs_label(&cell.signs),
                            e.display(&self.vars)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn arrangement(&self) -> Result<Arrangement> {
        Arrangement::new(&self.forms, self.dim(), &self.domain)
    }

    pub fn with_policies(mut self, policies: Vec<OnLinePolicy>) -> Result<Self> {
        if policies.len() != self.forms.len() {
            return Err(Error::DimensionMismatch("one policy per form required".into()));
        }
        self.policies = policies;
        Ok(self)
    }

    pub fn with_all_policies(mut self, p: OnLinePolicy) -> Self {
        self.policies = vec![p; self.forms.len()];
        self
    }

    /// Restricts the function to `{g >= 0 for all g}` in addition to any
    /// existing constraints.
    pub fn with_domain(mut self, domain: &[AffineForm]) -> Self {
        for g in domain {
            let g = g.normalized_keep_side();
            if !self.domain.iter().any(|h| h.same_as(&g)) {
                self.domain.push(g);
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn forms(&self) -> &[AffineForm] {
        &self.forms
    }

    pub fn policies(&self) -> &[OnLinePolicy] {
        &self.policies
    }

    pub fn domain(&self) -> &[AffineForm] {
        &self.domain
    }

    pub fn table(&self) -> &[(Vec<SignPat>, Branch)] {
        &self.table
    }

    pub fn has_closures(&self) -> bool {
        self.table.iter().any(|(_, b)| b.is_closure())
    }

    pub fn form_label(&self, k: usize) -> String {
        self.forms[k].display(&self.vars).to_string()
    }

    pub fn in_domain(&self, p: &[f64]) -> bool {
        self.domain.iter().all(|g| g.eval(p) >= -1e-12 * g.scale_at(p))
    }

    pub fn signs_at(&self, p: &[f64]) -> Vec<Sign> {
        self.forms.iter().map(|f| f.sign_at(p)).collect()
    }

    /// First table entry whose pattern matches `signs`.
    pub fn lookup(&self, signs: &[Sign]) -> Option<&Branch> {
        self.table
            .iter()
            .find(|(pat, _)| pat.iter().zip(signs).all(|(p, &s)| p.matches(s)))
            .map(|(_, b)| b)
    }

    /// Sign vector seen when moving from a point with `signs` a short step
    /// along `dir * e_axis`: zero entries of forms varying along the axis
    /// take the sign of the step; the rest are unchanged.
    pub fn adjacent(&self, signs: &[Sign], axis: usize, dir: Sign) -> Vec<Sign> {
        signs
            .iter()
            .zip(&self.forms)
            .map(|(&s, f)| {
                let a = f.coeffs()[axis];
                if s == Sign::Zero && a != 0.0 {
                    let step = if a > 0.0 { Sign::Pos } else { Sign::Neg };
                    if dir == Sign::Neg {
                        step.flip()
                    } else {
                        step
                    }
                } else {
                    s
                }
            })
            .collect()
    }

    /// Branch in force on the cell with sign vector `signs`. Zero entries
    /// under the specular-combination policy are combined along the smallest
    /// axis on which one of those forms varies.
    pub fn resolve(&self, signs: &[Sign]) -> Result<Branch> {
        let axis = signs
            .iter()
            .zip(&self.forms)
            .zip(&self.policies)
            .filter(|((&s, _), &p)| s == Sign::Zero && p == OnLinePolicy::SpecularCombination)
            .map(|((_, f), _)| f.lead_axis())
            .min();
        if let Some(axis) = axis {
            let left = self.resolve(&self.adjacent(signs, axis, Sign::Neg))?;
            let right = self.resolve(&self.adjacent(signs, axis, Sign::Pos))?;
            return Ok(Branch::combine_values(left, right));
        }
        self.lookup(signs)
            .cloned()
            .ok_or_else(|| Error::CoverageGap(signs_label(signs)))
    }

    pub fn branch_at(&self, p: &[f64]) -> Result<Branch> {
        self.resolve(&self.signs_at(p))
    }

    pub fn evaluate(&self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, function has {}",
                p.len(),
                self.dim()
            )));
        }
        let v = self.branch_at(p)?.eval(p)?;
        Ok(v)
    }

    pub fn one_sided_limits(&self, p: &[f64], axis: usize) -> Result<OneSidedLimits> {
        let signs = self.signs_at(p);
        let left = self.resolve(&self.adjacent(&signs, axis, Sign::Neg))?.eval(p)?;
        let right = self.resolve(&self.adjacent(&signs, axis, Sign::Pos))?.eval(p)?;
        Ok(OneSidedLimits {
            left,
            right,
            mid: (left + right) / 2.0,
            axis,
        })
    }

    /// Replace every branch through `f`, keeping forms, policies and domain.
    pub fn map_branches(&self, f: impl Fn(&Branch) -> Branch) -> PiecewiseFn {
        PiecewiseFn {
            table: self.table.iter().map(|(p, b)| (p.clone(), f(b))).collect(),
            ..self.clone()
        }
    }

    /// Human-readable branch table, one line per entry.
    pub fn describe(&self) -> Vec<String> {
        self.table
            .iter()
            .map(|(pat, b)| {
                let key: String = pat
                    .iter()
                    .map(|p| match p {
                        SignPat::Neg => '-',
                        SignPat::Zero => '0',
                        SignPat::Pos => '+',
                        SignPat::Any => '*',
                    })
                    .collect();
                let body = match b {
                    Branch::Expr(e) => e.display(&self.vars).to_string(),
                    Branch::Closure(c) => format!("<{}>", c.label),
                };
                format!("[{key}] {body}")
            })
            .collect()
    }
}

impl AffineForm {
    /// Positive rescaling that makes the largest coefficient magnitude 1;
    /// unlike `normalized` it never flips which side is `>= 0`.
    pub fn normalized_keep_side(&self) -> AffineForm {
        let m = self.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        AffineForm::new(self.coeffs().iter().map(|c| c / m).collect(), self.offset() / m).expect("nonzero form")
    }
}

#[cfg(test)]
mod tests;
