use std::fmt;

use super::{Expr, Node};
use crate::Error;

/// Sign of an affine form at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Pos
        } else if v < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
            Sign::Pos => 1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }
}

/// `l(p) = a . p - b` with `a != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    coeffs: Vec<f64>,
    offset: f64,
}

/// Relative tolerance used to decide that a point lies on a form.
const ON_FORM_TOL: f64 = 1e-12;

impl AffineForm {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Result<Self, Error> {
        if coeffs.iter().all(|&c| c == 0.0) || !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateForm);
        }
        Ok(AffineForm { coeffs, offset })
    }

    /// Builds the form and normalizes it so the first nonzero coefficient is +1.
    pub fn normalized_new(coeffs: Vec<f64>, offset: f64) -> Result<Self, Error> {
        Ok(Self::new(coeffs, offset)?.normalized().0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Returns `(n, s)` with `self = s * n` and the first nonzero coefficient
    /// of `n` equal to +1.
    pub fn normalized(&self) -> (AffineForm, f64) {
        let lead = self
            .coeffs
            .iter()
            .copied()
            .find(|&c| c != 0.0)
            .expect("affine form has a nonzero coefficient");
        let coeffs = self.coeffs.iter().map(|c| c / lead).collect();
        (
            AffineForm {
                coeffs,
                offset: self.offset / lead,
            },
            lead,
        )
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() - self.offset
    }

    /// Scale of the terms entering `eval`, used for relative tolerances.
    pub fn scale_at(&self, p: &[f64]) -> f64 {
        1.0 + self.offset.abs() + self.coeffs.iter().zip(p).map(|(a, x)| (a * x).abs()).sum::<f64>()
    }

    pub fn sign_at(&self, p: &[f64]) -> Sign {
        let v = self.eval(p);
        if v.abs() <= ON_FORM_TOL * self.scale_at(p) {
            Sign::Zero
        } else {
            Sign::of(v)
        }
    }

    /// Index of the first axis along which the form varies.
    pub fn lead_axis(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0.0).unwrap_or(0)
    }

    /// Equality up to a relative tolerance on coefficients and offset.
    pub fn same_as(&self, other: &AffineForm) -> bool {
        const TOL: f64 = 1e-12;
        let close = |a: f64, b: f64| (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()));
        self.dim() == other.dim()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| close(*a, *b))
            && close(self.offset, other.offset)
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let term = if a == 1.0 {
                Expr::var(i)
            } else {
                Expr::constant(a) * Expr::var(i)
            };
            acc = Some(match acc {
                None => term,
                Some(e) => e + term,
            });
        }
        let e = acc.expect("nonzero coefficient");
        if self.offset == 0.0 {
            e
        } else {
            e - Expr::constant(self.offset)
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> FormDisplay<'a> {
        FormDisplay { form: self, names }
    }
}

pub struct FormDisplay<'a> {
    form: &'a AffineForm,
    names: &'a [String],
}

impl fmt::Display for FormDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: f64, name: Option<&str>| -> fmt::Result {
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            }
            first = false;
            match name {
                Some(n) if mag == 1.0 => f.write_str(n),
                Some(n) => write!(f, "{mag}{n}"),
                None => write!(f, "{mag}"),
            }
        };
        for (i, &a) in self.form.coeffs.iter().enumerate() {
            if a != 0.0 {
                let name = self.names.get(i).map(String::as_str).unwrap_or("?");
                term(f, a, Some(name))?;
            }
        }
        if self.form.offset != 0.0 {
            term(f, -self.form.offset, None)?;
        }
        Ok(())
    }
}

/// If `e` is affine in the first `nvars` variables, returns `(a, c)` with
/// `e = a . x + c`.
pub fn as_affine(e: &Expr, nvars: usize) -> Option<(Vec<f64>, f64)> {
    fn go(e: &Expr, n: usize) -> Option<(Vec<f64>, f64)> {
        let zero = || vec![0.0; n];
        if e.is_constant() {
            return e.eval(&[]).ok().map(|c| (zero(), c));
        }
        match e.node() {
            Node::Var(i) if *i < n => {
                let mut a = zero();
                a[*i] = 1.0;
                Some((a, 0.0))
            }
            Node::Add(x, y) | Node::Sub(x, y) => {
                let (ax, cx) = go(x, n)?;
                let (ay, cy) = go(y, n)?;
                let s = if matches!(e.node(), Node::Add(..)) { 1.0 } else { -1.0 };
                Some((ax.iter().zip(&ay).map(|(p, q)| p + s * q).collect(), cx + s * cy))
            }
            Node::Neg(x) => {
                let (a, c) = go(x, n)?;
                Some((a.iter().map(|v| -v).collect(), -c))
            }
            Node::Mul(x, y) => {
                let (k, other) = if x.is_constant() {
                    (x.eval(&[]).ok()?, y)
                } else if y.is_constant() {
                    (y.eval(&[]).ok()?, x)
                } else {
                    return None;
                };
                let (a, c) = go(other, n)?;
                Some((a.iter().map(|v| k * v).collect(), k * c))
            }
            Node::Div(x, y) if y.is_constant() => {
                let k = y.eval(&[]).ok()?;
                if k == 0.0 {
                    return None;
                }
                let (a, c) = go(x, n)?;
                Some((a.iter().map(|v| v / k).collect(), c / k))
            }
            Node::Pow(x, 1) => go(x, n),
            _ => None,
        }
    }
    go(e, nvars)
}

/// Normalized form of an `abs`/`sgn` argument, with the scale relating it to
/// the argument (`arg = scale * form`). `None` means the argument is constant.
fn argument_form(arg: &Expr, nvars: usize, names: &[String]) -> Result<Option<(AffineForm, f64)>, Error> {
    let Some((a, c)) = as_affine(arg, nvars) else {
        return Err(Error::NonAffineSingularity(arg.display(names).to_string()));
    };
    if a.iter().all(|&v| v == 0.0) {
        return Ok(None);
    }
    Ok(Some(AffineForm::new(a, -c)?.normalized()))
}

/// Distinct singular forms under `abs`/`sgn`, normalized, in order of first
/// occurrence.
pub fn affine_arguments(e: &Expr, names: &[String]) -> Result<Vec<AffineForm>, Error> {
    fn walk(e: &Expr, names: &[String], out: &mut Vec<AffineForm>) -> Result<(), Error> {
        match e.node() {
            Node::Const(_) | Node::Var(_) => Ok(()),
            Node::Abs(g) | Node::Sgn(g) => {
                if let Some((form, _)) = argument_form(g, names.len(), names)? {
                    if !out.iter().any(|f| f.same_as(&form)) {
                        out.push(form);
                    }
                }
                Ok(())
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Combine(a, b) => {
                walk(a, names, out)?;
                walk(b, names, out)
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Exp(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) => {
                walk(a, names, out)
            }
        }
    }
    let mut out = Vec::new();
    walk(e, names, &mut out)?;
    Ok(out)
}

/// Replace `sgn(l)` by the assigned sign and `abs(l)` by `+-l` for every form
/// whose assigned sign is nonzero. Forms assigned `Sign::Zero` keep their
/// nodes, which then evaluate with the `sgn(0) = 0` convention.
pub fn pin_signs(e: &Expr, forms: &[AffineForm], signs: &[Sign], names: &[String]) -> Result<Expr, Error> {
    let rec = |x: &Expr| pin_signs(x, forms, signs, names);
    Ok(match e.node() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Abs(g) | Node::Sgn(g) => {
            let Some((form, scale)) = argument_form(g, names.len(), names)? else {
                return Ok(e.clone());
            };
            let k = forms
                .iter()
                .position(|f| f.same_as(&form))
                .ok_or_else(|| Error::UnassignedForm(form.display(names).to_string()))?;
            let s = signs[k];
            if s == Sign::Zero {
                return Ok(e.clone());
            }
            let s = if scale < 0.0 { s.flip() } else { s };
            match (e.node(), s) {
                (Node::Abs(_), Sign::Pos) => g.clone(),
                (Node::Abs(_), _) => -g.clone(),
                _ => Expr::constant(s.value()),
            }
        }
        Node::Add(a, b) => rec(a)? + rec(b)?,
        Node::Sub(a, b) => rec(a)? - rec(b)?,
        Node::Mul(a, b) => rec(a)? * rec(b)?,
        Node::Div(a, b) => rec(a)? / rec(b)?,
        Node::Combine(a, b) => Expr::combine(rec(a)?, rec(b)?),
        Node::Pow(a, n) => rec(a)?.pow(*n),
        Node::Neg(a) => -rec(a)?,
        Node::Exp(a) => rec(a)?.exp(),
        Node::Sqrt(a) => rec(a)?.sqrt(),
        Node::Sin(a) => rec(a)?.sin(),
        Node::Cos(a) => rec(a)?.cos(),
    })
}
