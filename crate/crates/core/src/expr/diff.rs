use super::{Expr, Node};

/// Symbolic partial derivative with respect to variable `var`.
///
/// Classical rules throughout, with `d abs(g) = sgn(g) dg` and `d sgn(g) = 0`,
/// so the result is only meaningful away from the zeros of `abs`/`sgn`
/// arguments. For `A(a, b)` the chain rule goes through
/// `A = tan((atan a + atan b)/2)`.
pub fn diff(e: &Expr, var: usize) -> Expr {
    raw(e, var).simplify()
}

fn raw(e: &Expr, v: usize) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    let c = Expr::constant;
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(i) => c(if *i == v { 1.0 } else { 0.0 }),
        Node::Add(a, b) => raw(a, v) + raw(b, v),
        Node::Sub(a, b) => raw(a, v) - raw(b, v),
        Node::Mul(a, b) => raw(a, v) * b.clone() + a.clone() * raw(b, v),
        Node::Div(a, b) => {
            if !b.depends_on(v) {
                raw(a, v) / b.clone()
            } else {
                (raw(a, v) * b.clone() - a.clone() * raw(b, v)) / b.clone().pow(2)
            }
        }
        Node::Pow(a, n) => match n {
            0 => Expr::zero(),
            1 => raw(a, v),
            _ => c(*n as f64) * a.clone().pow(n - 1) * raw(a, v),
        },
        Node::Neg(a) => -raw(a, v),
        Node::Abs(a) => a.clone().sgn() * raw(a, v),
        Node::Sgn(_) => Expr::zero(),
        Node::Exp(a) => e.clone() * raw(a, v),
        Node::Sqrt(a) => raw(a, v) / (c(2.0) * e.clone()),
        Node::Sin(a) => a.clone().cos() * raw(a, v),
        Node::Cos(a) => -(a.clone().sin()) * raw(a, v),
        Node::Combine(a, b) => {
            let one = || c(1.0);
            let weight = |g: &Expr| raw(g, v) / (one() + g.clone().pow(2));
            (one() + e.clone().pow(2)) / c(2.0) * (weight(a) + weight(b))
        }
    }
}
