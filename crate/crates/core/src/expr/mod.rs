//! Real-valued expression trees: parsing, evaluation, formatting, symbolic
//! differentiation and the affine structure hidden under `abs`/`sgn`.
//!
//! Trees are immutable and reference counted, so cloning a subtree is cheap
//! and expressions can be shared freely between threads.

mod affine;
mod diff;
mod integrate;
mod parser;
mod poly;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use affine::{affine_arguments, as_affine, pin_signs, AffineForm, Sign};
pub use diff::diff;
pub use integrate::antiderivative;
pub use parser::{parse, ParseError, ParseErrorKind};
pub use poly::{poly_degree, Poly2};

/// Names accepted in function-call position by the parser.
pub const FUNCTIONS: [&str; 7] = ["abs", "sgn", "exp", "sqrt", "sin", "cos", "elu"];

/// Errors raised while evaluating an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("variable index {0} is not bound")]
    Unbound(usize),
}

/// One node of an expression tree. Variables are referenced by their index
/// in the owning variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, u32),
    Neg(Expr),
    Abs(Expr),
    Sgn(Expr),
    Exp(Expr),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    /// The A-combination of two sub-expressions, evaluated pointwise.
    /// Never produced by the parser; the specular machinery uses it for
    /// on-line values whose one-sided data vary along the line.
    Combine(Expr, Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Const(c))
    }

    pub fn var(i: usize) -> Self {
        Expr::new(Node::Var(i))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn pow(self, n: u32) -> Self {
        Expr::new(Node::Pow(self, n))
    }

    pub fn abs(self) -> Self {
        Expr::new(Node::Abs(self))
    }

    pub fn sgn(self) -> Self {
        Expr::new(Node::Sgn(self))
    }

    pub fn exp(self) -> Self {
        Expr::new(Node::Exp(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::new(Node::Sqrt(self))
    }

    pub fn sin(self) -> Self {
        Expr::new(Node::Sin(self))
    }

    pub fn cos(self) -> Self {
        Expr::new(Node::Cos(self))
    }

    pub fn combine(a: Expr, b: Expr) -> Self {
        Expr::new(Node::Combine(a, b))
    }

    /// `g*(1+sgn(g))/2 + (exp(g)-1)*(1-sgn(g))/2`
    pub fn elu(g: Expr) -> Self {
        let one = || Expr::constant(1.0);
        let two = || Expr::constant(2.0);
        let pos = g.clone() * (one() + g.clone().sgn()) / two();
        let neg = (g.clone().exp() - one()) * (one() - g.sgn()) / two();
        pos + neg
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// True when no variable occurs in the tree.
    pub fn is_constant(&self) -> bool {
        self.max_var().is_none()
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Combine(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Node::Pow(a, _)
            | Node::Neg(a)
            | Node::Abs(a)
            | Node::Sgn(a)
            | Node::Exp(a)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a) => a.max_var(),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Combine(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Node::Pow(a, _)
            | Node::Neg(a)
            | Node::Abs(a)
            | Node::Sgn(a)
            | Node::Exp(a)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a) => a.depends_on(var),
        }
    }

    /// True when the tree contains an `abs` or `sgn` node.
    pub fn has_singular_nodes(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var(_) => false,
            Node::Abs(_) | Node::Sgn(_) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Combine(a, b) => {
                a.has_singular_nodes() || b.has_singular_nodes()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Exp(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) => {
                a.has_singular_nodes()
            }
        }
    }

    pub fn eval(&self, vals: &[f64]) -> Result<f64, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Var(i) => *vals.get(*i).ok_or(EvalError::Unbound(*i))?,
            Node::Add(a, b) => a.eval(vals)? + b.eval(vals)?,
            Node::Sub(a, b) => a.eval(vals)? - b.eval(vals)?,
            Node::Mul(a, b) => a.eval(vals)? * b.eval(vals)?,
            Node::Div(a, b) => {
                let num = a.eval(vals)?;
                let den = b.eval(vals)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Node::Pow(a, n) => powu(a.eval(vals)?, *n),
            Node::Neg(a) => -a.eval(vals)?,
            Node::Abs(a) => a.eval(vals)?.abs(),
            Node::Sgn(a) => sgn(a.eval(vals)?),
            Node::Exp(a) => a.eval(vals)?.exp(),
            Node::Sqrt(a) => {
                let v = a.eval(vals)?;
                if v < 0.0 {
                    return Err(EvalError::Domain(format!("sqrt of negative value {v}")));
                }
                v.sqrt()
            }
            Node::Sin(a) => a.eval(vals)?.sin(),
            Node::Cos(a) => a.eval(vals)?.cos(),
            Node::Combine(a, b) => crate::specular::a_combine(a.eval(vals)?, b.eval(vals)?),
        })
    }

    /// Replace every `Var(i)` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        let un = |a: &Expr, f: fn(Expr) -> Node| Expr::new(f(a.substitute(subs)));
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => subs.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(subs) + b.substitute(subs),
            Node::Sub(a, b) => a.substitute(subs) - b.substitute(subs),
            Node::Mul(a, b) => a.substitute(subs) * b.substitute(subs),
            Node::Div(a, b) => a.substitute(subs) / b.substitute(subs),
            Node::Combine(a, b) => Expr::combine(a.substitute(subs), b.substitute(subs)),
            Node::Pow(a, n) => a.substitute(subs).pow(*n),
            Node::Neg(a) => un(a, Node::Neg),
            Node::Abs(a) => un(a, Node::Abs),
            Node::Sgn(a) => un(a, Node::Sgn),
            Node::Exp(a) => un(a, Node::Exp),
            Node::Sqrt(a) => un(a, Node::Sqrt),
            Node::Sin(a) => un(a, Node::Sin),
            Node::Cos(a) => un(a, Node::Cos),
        }
    }

    /// Constant folding plus the identities `x+0`, `x*1`, `x*0`, `--x` and
    /// friends. Not a general simplifier.
    pub fn simplify(&self) -> Expr {
        use Node::*;
        match self.node() {
            Const(_) | Var(_) => self.clone(),
            Add(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Expr::constant(x + y),
                    (Some(0.0), _) => b,
                    (_, Some(0.0)) => a,
                    _ => match b.node() {
                        Neg(inner) => Expr::new(Sub(a, inner.clone())),
                        _ => a + b,
                    },
                }
            }
            Sub(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Expr::constant(x - y),
                    (_, Some(0.0)) => a,
                    (Some(0.0), _) => (-b).simplify(),
                    _ => match b.node() {
                        Neg(inner) => a + inner.clone(),
                        _ => a - b,
                    },
                }
            }
            Mul(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Expr::constant(x * y),
                    (Some(0.0), _) | (_, Some(0.0)) => Expr::zero(),
                    (Some(1.0), _) => b,
                    (_, Some(1.0)) => a,
                    (Some(-1.0), _) => (-b).simplify(),
                    (_, Some(-1.0)) => (-a).simplify(),
                    _ => a * b,
                }
            }
            Div(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
                    (Some(0.0), _) => Expr::zero(),
                    (_, Some(1.0)) => a,
                    _ => a / b,
                }
            }
            Pow(a, n) => {
                let a = a.simplify();
                match (a.as_const(), *n) {
                    (_, 0) => Expr::constant(1.0),
                    (_, 1) => a,
                    (Some(x), n) => Expr::constant(powu(x, n)),
                    _ => a.pow(*n),
                }
            }
            Neg(a) => {
                let a = a.simplify();
                match a.node() {
                    Const(x) => Expr::constant(-x),
                    Neg(inner) => inner.clone(),
                    _ => -a,
                }
            }
            Combine(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (a.as_const(), b.as_const()) {
                    (Some(x), Some(y)) => Expr::constant(crate::specular::a_combine(x, y)),
                    _ if a == b => a,
                    _ => Expr::combine(a, b),
                }
            }
            Abs(a) | Sgn(a) | Exp(a) | Sqrt(a) | Sin(a) | Cos(a) => {
                let inner = a.simplify();
                let rebuilt = Expr::new(match self.node() {
                    Abs(_) => Abs(inner.clone()),
                    Sgn(_) => Sgn(inner.clone()),
                    Exp(_) => Exp(inner.clone()),
                    Sqrt(_) => Sqrt(inner.clone()),
                    Sin(_) => Sin(inner.clone()),
                    _ => Cos(inner.clone()),
                });
                if inner.as_const().is_some() {
                    if let Ok(v) = rebuilt.eval(&[]) {
                        return Expr::constant(v);
                    }
                }
                rebuilt
            }
        }
    }

    /// Formatter bound to a list of variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub(crate) fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        v * 0.0
    }
}

fn powu(x: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(k) => x.powi(k),
        Err(_) => x.powf(n as f64),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::new(Node::$variant(self, rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

// Binding strength used by the printer; mirrors the parser so that printed
// text re-parses into the same tree.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Neg(_) => PREC_UNARY,
        Node::Pow(..) => 4,
        Node::Const(c) if c.is_sign_negative() => PREC_SUM,
        _ => PREC_ATOM,
    }
}

impl ExprDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if precedence(e) < min_prec {
            f.write_str("(")?;
            self.write_bare(f, e)?;
            f.write_str(")")
        } else {
            self.write_bare(f, e)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        let call = |f: &mut fmt::Formatter<'_>, name: &str, a: &Expr| -> fmt::Result {
            write!(f, "{name}(")?;
            self.write(f, a, 0)?;
            f.write_str(")")
        };
        match e.node() {
            Node::Const(c) if c.is_sign_negative() => write!(f, "-{}", -c),
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => match self.names.get(*i) {
                Some(n) => f.write_str(n),
                None => write!(f, "v{i}"),
            },
            Node::Add(a, b) => {
                self.write(f, a, PREC_SUM)?;
                f.write_str(" + ")?;
                self.write(f, b, PREC_SUM + 1)
            }
            Node::Sub(a, b) => {
                self.write(f, a, PREC_SUM)?;
                f.write_str(" - ")?;
                self.write(f, b, PREC_SUM + 1)
            }
            Node::Mul(a, b) => {
                self.write(f, a, PREC_PRODUCT)?;
                f.write_str("*")?;
                self.write(f, b, PREC_PRODUCT + 1)
            }
            Node::Div(a, b) => {
                self.write(f, a, PREC_PRODUCT)?;
                f.write_str("/")?;
                self.write(f, b, PREC_PRODUCT + 1)
            }
            Node::Pow(a, n) => {
                self.write(f, a, PREC_ATOM)?;
                write!(f, "^{n}")
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                self.write(f, a, PREC_UNARY)
            }
            Node::Abs(a) => call(f, "abs", a),
            Node::Sgn(a) => call(f, "sgn", a),
            Node::Exp(a) => call(f, "exp", a),
            Node::Sqrt(a) => call(f, "sqrt", a),
            Node::Sin(a) => call(f, "sin", a),
            Node::Cos(a) => call(f, "cos", a),
            Node::Combine(a, b) => {
                f.write_str("A(")?;
                self.write(f, a, 0)?;
                f.write_str(", ")?;
                self.write(f, b, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn eval_examples() {
        let xy = names(&["x", "y"]);
        let e = parse("abs(2*x-y)+abs(x-3)", &xy).unwrap();
        assert_eq!(e.eval(&[3.0, 6.0]).unwrap(), 0.0);
        let x = names(&["x"]);
        assert_eq!(parse("sgn(x)", &x).unwrap().eval(&[0.0]).unwrap(), 0.0);
        let q = parse("(1/2)*x*abs(x)", &x).unwrap();
        assert_eq!(q.eval(&[-2.0]).unwrap(), -2.0);
    }

    #[test]
    fn eval_errors() {
        let x = names(&["x"]);
        let e = parse("1/(x-1)", &x).unwrap();
        assert_eq!(e.eval(&[1.0]), Err(EvalError::DivisionByZero));
        let e = parse("sqrt(x)", &x).unwrap();
        assert!(matches!(e.eval(&[-1.0]), Err(EvalError::Domain(_))));
    }

    #[test]
    fn negative_constants_print_reparseably() {
        let x = names(&["x"]);
        let e = Expr::var(0) * Expr::constant(-2.5);
        let text = e.display(&x).to_string();
        assert_eq!(text, "x*(-2.5)");
        let back = parse(&text, &x).unwrap();
        assert_eq!(back.eval(&[3.0]).unwrap(), -7.5);
    }

    #[test]
    fn simplify_folds_constants() {
        let x = names(&["x"]);
        let e = parse("0*x + 1*(x - 0) + 2*3", &x).unwrap().simplify();
        assert_eq!(e.display(&x).to_string(), "x + 6");
    }

    #[test]
    fn elu_sugar_matches_definition() {
        let x = names(&["x"]);
        let e = parse("elu(x)", &x).unwrap();
        for &v in &[-3.0, -0.5, 0.0, 0.25, 4.0] {
            let expect = if v >= 0.0 { v } else { f64::exp(v) - 1.0 };
            assert!((e.eval(&[v]).unwrap() - expect).abs() < 1e-15);
        }
    }
}
