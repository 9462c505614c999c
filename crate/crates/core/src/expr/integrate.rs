use super::{Expr, Node};

/// Coefficients of `e` as a polynomial in `var` alone, lowest degree first.
fn univariate(e: &Expr, var: usize) -> Option<Vec<f64>> {
    if e.is_constant() {
        return e.eval(&[]).ok().map(|c| vec![c]);
    }
    let add = |a: Vec<f64>, b: Vec<f64>, s: f64| {
        let n = a.len().max(b.len());
        (0..n)
            .map(|k| a.get(k).copied().unwrap_or(0.0) + s * b.get(k).copied().unwrap_or(0.0))
            .collect::<Vec<_>>()
    };
    let mul = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    match e.node() {
        Node::Var(i) if *i == var => Some(vec![0.0, 1.0]),
        Node::Add(a, b) => Some(add(univariate(a, var)?, univariate(b, var)?, 1.0)),
        Node::Sub(a, b) => Some(add(univariate(a, var)?, univariate(b, var)?, -1.0)),
        Node::Mul(a, b) => Some(mul(&univariate(a, var)?, &univariate(b, var)?)),
        Node::Div(a, b) if b.is_constant() => {
            let k = b.eval(&[]).ok()?;
            Some(univariate(a, var)?.iter().map(|c| c / k).collect())
        }
        Node::Neg(a) => Some(univariate(a, var)?.iter().map(|c| -c).collect()),
        Node::Pow(a, n) => {
            let base = univariate(a, var)?;
            let mut acc = vec![1.0];
            for _ in 0..*n {
                acc = mul(&acc, &base);
            }
            Some(acc)
        }
        _ => None,
    }
}

fn poly_expr(coeffs: &[f64], var: usize) -> Expr {
    let mut acc: Option<Expr> = None;
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let term = match k {
            0 => Expr::constant(c),
            1 => Expr::constant(c) * Expr::var(var),
            _ => Expr::constant(c) * Expr::var(var).pow(k as u32),
        };
        acc = Some(match acc {
            None => term,
            Some(e) => e + term,
        });
    }
    acc.unwrap_or_else(Expr::zero)
}

/// Slope of `g` if it is affine and non-constant in `var`.
fn linear_slope(g: &Expr, var: usize) -> Option<f64> {
    let c = univariate(g, var)?;
    match c.len() {
        2 if c[1] != 0.0 => Some(c[1]),
        _ => None,
    }
}

/// Symbolic antiderivative with respect to `var` for the one-variable
/// expressions the solvers meet: polynomials, `exp`/`sin`/`cos` of linear
/// arguments, polynomial times `exp` of a linear argument, and sums and
/// constant multiples of these. Returns `None` for anything else.
pub fn antiderivative(e: &Expr, var: usize) -> Option<Expr> {
    if let Some(p) = univariate(e, var) {
        let mut up = vec![0.0];
        up.extend(p.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)));
        return Some(poly_expr(&up, var).simplify());
    }
    let out = match e.node() {
        Node::Add(a, b) => antiderivative(a, var)? + antiderivative(b, var)?,
        Node::Sub(a, b) => antiderivative(a, var)? - antiderivative(b, var)?,
        Node::Neg(a) => -antiderivative(a, var)?,
        Node::Div(a, b) if b.is_constant() => antiderivative(a, var)? / b.clone(),
        Node::Mul(a, b) if a.is_constant() => a.clone() * antiderivative(b, var)?,
        Node::Mul(a, b) if b.is_constant() => antiderivative(a, var)? * b.clone(),
        Node::Mul(a, b) => {
            let (p, ex) = match (univariate(a, var), univariate(b, var)) {
                (Some(p), None) => (p, b),
                (None, Some(p)) => (p, a),
                _ => return None,
            };
            let Node::Exp(g) = ex.node() else { return None };
            let k = linear_slope(g, var)?;
            // integral p e^g = e^g * sum_j (-1)^j p^(j) / k^(j+1)
            let mut q = vec![0.0; p.len()];
            let mut deriv = p.clone();
            let mut sign = 1.0;
            let mut kp = k;
            while !deriv.is_empty() {
                for (i, c) in deriv.iter().enumerate() {
                    q[i] += sign * c / kp;
                }
                deriv = deriv.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
                sign = -sign;
                kp *= k;
            }
            ex.clone() * poly_expr(&q, var)
        }
        Node::Exp(g) => e.clone() / Expr::constant(linear_slope(g, var)?),
        Node::Sin(g) => -(g.clone().cos()) / Expr::constant(linear_slope(g, var)?),
        Node::Cos(g) => g.clone().sin() / Expr::constant(linear_slope(g, var)?),
        _ => return None,
    };
    Some(out.simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{diff, parse};

    fn check(src: &str) {
        let x = vec!["x".to_string()];
        let e = parse(src, &x).unwrap();
        let big = antiderivative(&e, 0).unwrap_or_else(|| panic!("no antiderivative for {src}"));
        let back = diff(&big, 0);
        for &p in &[-1.7, -0.3, 0.0, 0.9, 2.4] {
            let want = e.eval(&[p]).unwrap();
            let got = back.eval(&[p]).unwrap();
            assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()), "{src} at {p}");
        }
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        for src in [
            "3",
            "x^2 - 2*x + 1",
            "(x-1)*(x+1)/4",
            "exp(2*x - 1)",
            "sin(3*x) + cos(x/2)",
            "2*exp(x) - x^2/2",
            "x^2*exp(-x)",
            "-(x - 1)",
        ] {
            check(src);
        }
    }

    #[test]
    fn unsupported_returns_none() {
        let x = vec!["x".to_string()];
        assert!(antiderivative(&parse("exp(x^2)", &x).unwrap(), 0).is_none());
        assert!(antiderivative(&parse("abs(x)", &x).unwrap(), 0).is_none());
    }
}
