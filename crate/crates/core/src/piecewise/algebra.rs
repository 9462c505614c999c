use super::{pattern_of, Branch, OnLinePolicy, PiecewiseFn, SignPat};
use crate::arrangement::{Arrangement, Cell};
use crate::expr::{AffineForm, Expr, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
        }
    }

    pub fn apply_expr(self, a: Expr, b: Expr) -> Expr {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
        }
        .simplify()
    }
}

fn union_forms(into: &mut Vec<AffineForm>, extra: &[AffineForm]) -> Vec<usize> {
    extra
        .iter()
        .map(|f| match into.iter().position(|g| g.same_as(f)) {
            Some(i) => i,
            None => {
                into.push(f.clone());
                into.len() - 1
            }
        })
        .collect()
}

fn union_domain(a: &[AffineForm], b: &[AffineForm]) -> Vec<AffineForm> {
    let mut out = a.to_vec();
    for g in b {
        if !out.iter().any(|h| h.same_as(g)) {
            out.push(g.clone());
        }
    }
    out
}

/// Sign vectors of every cell of the whole-space arrangement, each flagged
/// with whether the cell meets the domain. Tables built from these extend
/// past the domain wherever the operands allow it, so one-sided quantities
/// at the domain boundary stay computable.
pub(crate) fn cells_with_domain(forms: &[AffineForm], dim: usize, domain: &[AffineForm]) -> Result<Vec<(Cell, bool)>> {
    if forms.is_empty() {
        let c = Cell {
            signs: vec![],
            dim,
            sample: vec![0.0; dim],
            extra: vec![],
        };
        return Ok(vec![(c, true)]);
    }
    let inside = Arrangement::new(forms, dim, domain)?.cells;
    let mut out = Vec::with_capacity(inside.len());
    if !domain.is_empty() {
        for c in Arrangement::new(forms, dim, &[])?.cells {
            if !inside.iter().any(|d| d.signs == c.signs) {
                out.push((c, false));
            }
        }
    }
    let mut all: Vec<(Cell, bool)> = inside.into_iter().map(|c| (c, true)).collect();
    all.extend(out);
    Ok(all)
}

impl PiecewiseFn {
    /// Cells of the arrangement of the forms over the whole space, each
    /// flagged with whether it meets the domain.
    pub fn extended_cells(&self) -> Result<Vec<(Cell, bool)>> {
        cells_with_domain(&self.forms, self.dim(), &self.domain)
    }

    /// Pointwise `self op other` over the union of both arrangements. The
    /// result lists every cell explicitly and is branch-assigned everywhere;
    /// on-line values come from resolving each operand on that cell.
    pub fn combine(&self, other: &PiecewiseFn, op: BinOp) -> Result<PiecewiseFn> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch(format!(
                "variables {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        let mut forms = self.forms.clone();
        let map_b = union_forms(&mut forms, &other.forms);
        let domain = union_domain(&self.domain, &other.domain);
        let na = self.forms.len();
        let mut table = Vec::new();
        for (cell, required) in cells_with_domain(&forms, self.dim(), &domain)? {
            let signs = cell.signs;
            let sa = &signs[..na];
            let sb: Vec<Sign> = map_b.iter().map(|&j| signs[j]).collect();
            match (self.resolve(sa), other.resolve(&sb)) {
                (Ok(a), Ok(b)) => table.push((pattern_of(&signs), Branch::binary(a, b, op))),
                (Err(e), _) | (_, Err(e)) if required => return Err(e),
                _ => {}
            }
        }
        Ok(PiecewiseFn {
            vars: self.vars.clone(),
            policies: vec![OnLinePolicy::BranchAssigned; forms.len()],
            forms,
            domain,
            table,
        })
    }

    pub fn add(&self, other: &PiecewiseFn) -> Result<PiecewiseFn> {
        self.combine(other, BinOp::Add)
    }

    pub fn sub(&self, other: &PiecewiseFn) -> Result<PiecewiseFn> {
        self.combine(other, BinOp::Sub)
    }

    pub fn scale(&self, c: f64) -> PiecewiseFn {
        self.map_branches(|b| b.clone().scale(c))
    }

    /// `p -> self(M p + d)` where `rows[i] = (M_i, d_i)` and the result lives
    /// on `vars`.
    pub fn compose_affine(&self, rows: &[(Vec<f64>, f64)], vars: &[String]) -> Result<PiecewiseFn> {
        if rows.len() != self.dim() || rows.iter().any(|(m, _)| m.len() != vars.len()) {
            return Err(Error::DimensionMismatch("affine map has the wrong shape".into()));
        }
        let pull = |g: &AffineForm| -> Result<(Vec<f64>, f64)> {
            let a = g.coeffs();
            let coeffs: Vec<f64> = (0..vars.len())
                .map(|j| a.iter().zip(rows).map(|(ai, (m, _))| ai * m[j]).sum())
                .collect();
            let shift: f64 = a.iter().zip(rows).map(|(ai, (_, d))| ai * d).sum();
            if coeffs.iter().all(|&c| c == 0.0) {
                return Err(Error::DimensionMismatch("affine map collapses a singular form".into()));
            }
            Ok((coeffs, g.offset() - shift))
        };
        let mut forms = Vec::with_capacity(self.forms.len());
        let mut flips = Vec::with_capacity(self.forms.len());
        for f in &self.forms {
            let (c, b) = pull(f)?;
            let (n, s) = AffineForm::new(c, b)?.normalized();
            forms.push(n);
            flips.push(s < 0.0);
        }
        let domain = self
            .domain
            .iter()
            .map(|g| {
                let (c, b) = pull(g)?;
                Ok(AffineForm::new(c, b)?.normalized_keep_side())
            })
            .collect::<Result<Vec<_>>>()?;
        let table = self
            .table
            .iter()
            .map(|(pat, b)| {
                let pat = pat
                    .iter()
                    .zip(&flips)
                    .map(|(p, &fl)| if fl { p.flip() } else { *p })
                    .collect();
                (pat, b.compose_affine(rows))
            })
            .collect();
        let u = PiecewiseFn {
            vars: vars.to_vec(),
            forms,
            policies: self.policies.clone(),
            domain,
            table,
        };
        Ok(u)
    }

    /// `p -> self(p with coordinate `axis` negated)`.
    pub fn reflect_axis(&self, axis: usize) -> Result<PiecewiseFn> {
        let d = self.dim();
        let rows: Vec<(Vec<f64>, f64)> = (0..d)
            .map(|i| {
                let mut m = vec![0.0; d];
                m[i] = if i == axis { -1.0 } else { 1.0 };
                (m, 0.0)
            })
            .collect();
        self.compose_affine(&rows, &self.vars)
    }

    /// `pos` where `form >= 0` (including on its graph) and `neg` where
    /// `form < 0`.
    pub fn splice(form: &AffineForm, pos: &PiecewiseFn, neg: &PiecewiseFn) -> Result<PiecewiseFn> {
        if pos.vars != neg.vars {
            return Err(Error::DimensionMismatch("splice operands differ in variables".into()));
        }
        let (form, scale) = form.normalized();
        let mut forms = pos.forms.clone();
        let map_n = union_forms(&mut forms, &neg.forms);
        let k = union_forms(&mut forms, std::slice::from_ref(&form))[0];
        let domain = union_domain(&pos.domain, &neg.domain);
        let np = pos.forms.len();
        let mut table = Vec::new();
        for (cell, required) in cells_with_domain(&forms, pos.dim(), &domain)? {
            let signs = cell.signs;
            let s = if scale < 0.0 { signs[k].flip() } else { signs[k] };
            let branch = if s == Sign::Neg {
                let sn: Vec<Sign> = map_n.iter().map(|&j| signs[j]).collect();
                neg.resolve(&sn)
            } else {
                pos.resolve(&signs[..np])
            };
            match branch {
                Ok(b) => table.push((pattern_of(&signs), b)),
                Err(e) if required => return Err(e),
                Err(_) => {}
            }
        }
        Ok(PiecewiseFn {
            vars: pos.vars.clone(),
            policies: vec![OnLinePolicy::BranchAssigned; forms.len()],
            forms,
            domain,
            table,
        })
    }

    /// Odd extension of a one-variable function from `x >= 0` to the line.
    pub fn odd_extension(&self) -> Result<PiecewiseFn> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch("odd extension needs one variable".into()));
        }
        let mirrored = self.reflect_axis(0)?.scale(-1.0);
        let x = AffineForm::new(vec![1.0], 0.0)?;
        PiecewiseFn::splice(&x, self, &mirrored)
    }

    /// A copy whose table lists every cell of the arrangement explicitly, so
    /// that later edits of individual cells are possible.
    pub fn tabulate(&self) -> Result<PiecewiseFn> {
        let mut table = Vec::new();
        for (cell, required) in cells_with_domain(&self.forms, self.dim(), &self.domain)? {
            match self.resolve(&cell.signs) {
                Ok(b) => table.push((pattern_of(&cell.signs), b)),
                Err(e) if required => return Err(e),
                Err(_) => {}
            }
        }
        Ok(PiecewiseFn {
            policies: vec![OnLinePolicy::BranchAssigned; self.forms.len()],
            table,
            ..self.clone()
        })
    }

    /// Appends a catch-all entry evaluated when nothing else matches.
    pub fn with_fallback(mut self, b: Branch) -> PiecewiseFn {
        self.table.push((vec![SignPat::Any; self.forms.len()], b));
        self
    }
}
