use std::collections::BTreeMap;

use super::{Expr, Node};

/// Total degree of `e` as a polynomial in its variables, or `None` if `e` is
/// not a polynomial (division only by constants is allowed).
pub fn poly_degree(e: &Expr) -> Option<u32> {
    match e.node() {
        Node::Const(_) => Some(0),
        Node::Var(_) => Some(1),
        _ if e.is_constant() => e.eval(&[]).ok().map(|_| 0),
        Node::Add(a, b) | Node::Sub(a, b) => Some(poly_degree(a)?.max(poly_degree(b)?)),
        Node::Mul(a, b) => Some(poly_degree(a)? + poly_degree(b)?),
        Node::Div(a, b) if b.is_constant() => poly_degree(a),
        Node::Pow(a, n) => Some(poly_degree(a)? * n),
        Node::Neg(a) => poly_degree(a),
        _ => None,
    }
}

/// Dense bivariate polynomial `sum c[i][j] x^i y^j`, used to turn sampled
/// polynomial data back into expressions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    pub terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    /// Monomial exponents of total degree `<= deg`, in a fixed order.
    pub fn monomials(deg: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for total in 0..=deg {
            for i in (0..=total).rev() {
                out.push((i, total - i));
            }
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (&(i, j), &c) in &self.terms {
            if c == 0.0 {
                continue;
            }
            let mut term = Expr::constant(c);
            if i > 0 {
                term = term * Expr::var(0).pow(i);
            }
            if j > 0 {
                term = term * Expr::var(1).pow(j);
            }
            acc = Some(match acc {
                None => term,
                Some(e) => e + term,
            });
        }
        acc.unwrap_or_else(Expr::zero).simplify()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn degrees() {
        let v = vec!["x".to_string(), "t".to_string()];
        let d = |s: &str| poly_degree(&parse(s, &v).unwrap());
        assert_eq!(d("3"), Some(0));
        assert_eq!(d("x*t - t^2/2 + 1"), Some(2));
        assert_eq!(d("exp(x)"), None);
        assert_eq!(d("x/t"), None);
        assert_eq!(d("abs(x)"), None);
    }

    #[test]
    fn poly_round_trip() {
        let mut p = Poly2::default();
        p.terms.insert((0, 2), -0.5);
        p.terms.insert((1, 1), 2.0);
        let e = p.to_expr();
        assert_eq!(e.eval(&[3.0, 2.0]).unwrap(), p.eval(3.0, 2.0));
    }
}
