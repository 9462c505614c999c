//! Problem files: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [problem]
//! kind = wave-halfline
//! phi = (x - 1)*abs(x - 1)/2 + x^2/2 + 1/2
//! psi = abs(x - 1) - 1
//!
//! [grid]
//! x = 0, 3
//! t = 0, 2
//! nx = 13
//! nt = 9
//!
//! [check]
//! list = residual, boundary, initial
//! ```
//!
//! A function may instead be given as an explicit table:
//! `NAME.forms` lists affine expressions separated by `;`, each
//! `NAME.branch.PATTERN` line gives the branch for a sign pattern over
//! `+ - 0 *` (first match wins), `NAME.policy` is `branch` or `specular`
//! (one value, or one per form separated by `,`), and `NAME.domain` lists
//! affine expressions that must be `>= 0`. `#` starts a comment.

use std::collections::BTreeMap;

use speculus_core::expr::{as_affine, parse, AffineForm};
use speculus_core::piecewise::{Branch, OnLinePolicy, PiecewiseFn, SignPat};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("line {line}: {msg}")]
pub struct ProblemError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ProblemError> {
    Err(ProblemError { line, msg: msg.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Function,
    Transport,
    Wave,
    WaveHalfline,
    WaveNonhomogeneous,
}

impl Kind {
    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "function" => Kind::Function,
            "transport" => Kind::Transport,
            "wave" => Kind::Wave,
            "wave-halfline" => Kind::WaveHalfline,
            "wave-nonhomogeneous" => Kind::WaveNonhomogeneous,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::Function => "function",
            Kind::Transport => "transport",
            Kind::Wave => "wave",
            Kind::WaveHalfline => "wave-halfline",
            Kind::WaveNonhomogeneous => "wave-nonhomogeneous",
        }
    }

    pub fn is_wave(self) -> bool {
        matches!(self, Kind::Wave | Kind::WaveHalfline | Kind::WaveNonhomogeneous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Residual,
    S2,
    Proper,
    HypothesisH,
    Boundary,
    Initial,
    Reference,
}

impl Check {
    fn parse(s: &str) -> Option<Check> {
        Some(match s {
            "residual" => Check::Residual,
            "s2" => Check::S2,
            "proper" => Check::Proper,
            "hypothesis-h" => Check::HypothesisH,
            "boundary" => Check::Boundary,
            "initial" => Check::Initial,
            "reference" => Check::Reference,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Check::Residual => "residual",
            Check::S2 => "s2",
            Check::Proper => "proper",
            Check::HypothesisH => "hypothesis-h",
            Check::Boundary => "boundary",
            Check::Initial => "initial",
            Check::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x: (f64, f64),
    pub t: (f64, f64),
    pub nx: usize,
    pub nt: usize,
    pub delta: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            x: (-2.0, 2.0),
            t: (0.0, 2.0),
            nx: 21,
            nt: 21,
            delta: 1e-6,
        }
    }
}

impl Grid {
    fn coord(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| Self::coord(self.x, self.nx, i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|i| Self::coord(self.t, self.nt, i)).collect()
    }

    /// Grid points, `t` outer and `x` inner.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let xs = self.xs();
        self.ts()
            .into_iter()
            .flat_map(|t| xs.iter().map(move |&x| [x, t]))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: Kind,
    pub functions: BTreeMap<String, PiecewiseFn>,
    pub grid: Grid,
    pub checks: Vec<Check>,
    /// On-line policy forced onto the solution after solving.
    pub policy: Option<OnLinePolicy>,
}

impl Problem {
    pub fn get(&self, name: &str) -> Option<&PiecewiseFn> {
        self.functions.get(name)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn sections(text: &str) -> Result<BTreeMap<String, Vec<Entry>>, ProblemError> {
    let mut out: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !matches!(name.as_str(), "problem" | "grid" | "check") {
                return err(line, format!("unknown section [{name}]"));
            }
            out.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some(sec) = &current else {
            return err(line, "entry outside of any section");
        };
        let Some((k, v)) = s.split_once('=') else {
            return err(line, "expected `key = value`");
        };
        let entries = out.get_mut(sec).expect("section exists");
        let key = k.trim().to_string();
        if entries.iter().any(|e| e.key == key) {
            return err(line, format!("duplicate key `{key}`"));
        }
        entries.push(Entry {
            line,
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn parse_form(text: &str, vars: &[String], line: usize) -> Result<AffineForm, ProblemError> {
    let e = parse(text, vars).map_err(|e| ProblemError {
        line,
        msg: format!("`{text}`: {e}"),
    })?;
    let Some((a, c)) = as_affine(&e, vars.len()) else {
        return err(line, format!("`{text}` is not affine"));
    };
    AffineForm::new(a, -c).map_err(|e| ProblemError {
        line,
        msg: format!("`{text}`: {e}"),
    })
}

fn parse_forms(text: &str, vars: &[String], line: usize) -> Result<Vec<AffineForm>, ProblemError> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_form(s, vars, line))
        .collect()
}

fn parse_policy(s: &str, line: usize) -> Result<OnLinePolicy, ProblemError> {
    match s.trim() {
        "branch" => Ok(OnLinePolicy::BranchAssigned),
        "specular" => Ok(OnLinePolicy::SpecularCombination),
        other => err(line, format!("unknown policy `{other}` (expected branch or specular)")),
    }
}

/// Builds the function called `name` from the entries of `[problem]`, or
/// `None` if no entry mentions it.
fn function(name: &str, entries: &[Entry], vars: &[String]) -> Result<Option<PiecewiseFn>, ProblemError> {
    let prefix = format!("{name}.");
    let plain = entries.iter().find(|e| e.key == name);
    let parts: Vec<&Entry> = entries.iter().filter(|e| e.key.starts_with(&prefix)).collect();
    if plain.is_none() && parts.is_empty() {
        return Ok(None);
    }
    let field = |suffix: &str| parts.iter().find(|e| e.key[prefix.len()..] == *suffix).copied();
    let branches: Vec<&Entry> = parts
        .iter()
        .filter(|e| e.key[prefix.len()..].starts_with("branch."))
        .copied()
        .collect();
    for e in &parts {
        let rest = &e.key[prefix.len()..];
        if !matches!(rest, "forms" | "policy" | "domain") && !rest.starts_with("branch.") {
            return err(e.line, format!("unknown key `{}`", e.key));
        }
    }
    let domain = match field("domain") {
        Some(e) => parse_forms(&e.value, vars, e.line)?,
        None => vec![],
    };
    let build_err = |line: usize| {
        move |e: speculus_core::Error| ProblemError {
            line,
            msg: format!("{name}: {e}"),
        }
    };

    let u = match (plain, branches.is_empty()) {
        (Some(e), true) => {
            if let Some(f) = field("forms") {
                return err(
                    f.line,
                    format!("`{name}.forms` needs branch entries, not an expression"),
                );
            }
            let ex = parse(&e.value, vars).map_err(|x| ProblemError {
                line: e.line,
                msg: format!("{name}: {x}"),
            })?;
            let u = PiecewiseFn::from_expression(&ex, vars).map_err(build_err(e.line))?;
            match field("policy") {
                Some(p) => u.with_all_policies(parse_policy(&p.value, p.line)?),
                None => u,
            }
        }
        (Some(e), false) => {
            return err(
                e.line,
                format!("`{name}` is given both as an expression and as a table"),
            )
        }
        (None, true) => {
            return err(
                parts[0].line,
                format!("`{name}` has no expression and no branch entries"),
            );
        }
        (None, false) => {
            let forms = match field("forms") {
                Some(e) => parse_forms(&e.value, vars, e.line)?,
                None => vec![],
            };
            let mut table = Vec::with_capacity(branches.len());
            for e in &branches {
                let key = &e.key[prefix.len() + "branch.".len()..];
                let pat: Option<Vec<SignPat>> = key.chars().map(SignPat::from_char).collect();
                let Some(pat) = pat.filter(|p| p.len() == forms.len()) else {
                    return err(
                        e.line,
                        format!("pattern `{key}` must use + - 0 * once per form ({} forms)", forms.len()),
                    );
                };
                let ex = parse(&e.value, vars).map_err(|x| ProblemError {
                    line: e.line,
                    msg: format!("{name}: {x}"),
                })?;
                table.push((pat, Branch::Expr(ex)));
            }
            let policies = match field("policy") {
                None => vec![OnLinePolicy::BranchAssigned; forms.len()],
                Some(p) => {
                    let list: Vec<&str> = p.value.split(',').collect();
                    match list.len() {
                        1 => vec![parse_policy(list[0], p.line)?; forms.len()],
                        n if n == forms.len() => {
                            list.iter().map(|s| parse_policy(s, p.line)).collect::<Result<_, _>>()?
                        }
                        _ => return err(p.line, "give one policy or one per form"),
                    }
                }
            };
            let line = branches[0].line;
            PiecewiseFn::from_parts(vars, forms, policies, vec![], table).map_err(build_err(line))?
        }
    };
    Ok(Some(if domain.is_empty() { u } else { u.with_domain(&domain) }))
}

fn number(e: &Entry) -> Result<f64, ProblemError> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(e.line, format!("`{}` is not a finite number", e.value)),
    }
}

fn range(e: &Entry) -> Result<(f64, f64), ProblemError> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    let nums: Option<Vec<f64>> = parts
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    match nums.as_deref() {
        Some(&[a, b]) if a <= b => Ok((a, b)),
        _ => err(e.line, format!("`{}` is not a range `lo, hi`", e.value)),
    }
}

fn count(e: &Entry) -> Result<usize, ProblemError> {
    match e.value.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => err(e.line, format!("`{}` is not a positive integer", e.value)),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let secs = sections(text)?;
    let Some(pe) = secs.get("problem") else {
        return err(0, "missing [problem] section");
    };
    let Some(kind_entry) = pe.iter().find(|e| e.key == "kind") else {
        return err(0, "missing `kind`");
    };
    let Some(kind) = Kind::parse(&kind_entry.value) else {
        return err(kind_entry.line, format!("unknown kind `{}`", kind_entry.value));
    };
    let x = names(&["x"]);
    let xt = names(&["x", "t"]);
    let vars = match (kind, pe.iter().find(|e| e.key == "vars")) {
        (Kind::Function, Some(e)) => {
            let v: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
            if !(1..=2).contains(&v.len()) || v.iter().any(|s| s.is_empty()) {
                return err(e.line, "`vars` lists one or two names");
            }
            v
        }
        (Kind::Function, None) => x.clone(),
        (_, Some(e)) => return err(e.line, "`vars` is only used by kind = function"),
        (_, None) => xt.clone(),
    };
    let (required, optional): (&[&str], &[&str]) = match kind {
        Kind::Function => (&["u"], &[]),
        Kind::Transport => (&["h"], &["expected"]),
        Kind::Wave | Kind::WaveHalfline => (&["phi", "psi"], &["expected"]),
        Kind::WaveNonhomogeneous => (&["phi", "psi", "f"], &["expected"]),
    };
    let mut functions = BTreeMap::new();
    for &name in required.iter().chain(optional) {
        let fvars = match name {
            "u" => &vars,
            "f" | "expected" => &xt,
            _ => &x,
        };
        match function(name, pe, fvars)? {
            Some(u) => {
                functions.insert(name.to_string(), u);
            }
            None if required.contains(&name) => {
                return err(kind_entry.line, format!("kind {} requires `{name}`", kind.label()));
            }
            None => {}
        }
    }
    let mut policy = None;
    for e in pe {
        let base = e.key.split('.').next().unwrap_or("");
        match base {
            "kind" | "vars" => {}
            "policy" => policy = Some(parse_policy(&e.value, e.line)?),
            b if required.contains(&b) || optional.contains(&b) => {}
            _ => return err(e.line, format!("unexpected key `{}` for kind {}", e.key, kind.label())),
        }
    }

    let mut grid = Grid::default();
    if kind == Kind::WaveHalfline {
        grid.x = (0.0, 4.0);
    }
    for e in secs.get("grid").map(Vec::as_slice).unwrap_or(&[]) {
        match e.key.as_str() {
            "x" => grid.x = range(e)?,
            "t" => grid.t = range(e)?,
            "nx" => grid.nx = count(e)?,
            "nt" => grid.nt = count(e)?,
            "delta" => {
                grid.delta = number(e)?;
                if grid.delta <= 0.0 {
                    return err(e.line, "delta must be positive");
                }
            }
            other => return err(e.line, format!("unknown grid key `{other}`")),
        }
    }
    if kind != Kind::Function && grid.t.0 < 0.0 {
        return err(0, "the grid must lie in t >= 0");
    }
    if kind == Kind::WaveHalfline && grid.x.0 < 0.0 {
        return err(0, "the grid must lie in x >= 0 for the half-line");
    }

    let mut checks = Vec::new();
    for e in secs.get("check").map(Vec::as_slice).unwrap_or(&[]) {
        if e.key != "list" {
            return err(e.line, format!("unknown check key `{}`", e.key));
        }
        for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some(c) = Check::parse(item) else {
                return err(e.line, format!("unknown check `{item}`"));
            };
            let ok = match c {
                Check::Residual | Check::HypothesisH | Check::Initial => kind != Kind::Function,
                Check::Boundary => kind == Kind::WaveHalfline,
                Check::Reference => functions.contains_key("expected"),
                Check::S2 | Check::Proper => true,
            };
            if !ok {
                return err(
                    e.line,
                    format!("check `{item}` does not apply to kind {}", kind.label()),
                );
            }
            if !checks.contains(&c) {
                checks.push(c);
            }
        }
    }
    Ok(Problem {
        kind,
        functions,
        grid,
        checks,
        policy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_transport() {
        let p = parse_problem("[problem]\nkind = transport\nh = abs(x)\n").unwrap();
        assert_eq!(p.kind, Kind::Transport);
        assert_eq!(p.get("h").unwrap().evaluate(&[-2.0]).unwrap(), 2.0);
        assert_eq!(p.grid, Grid::default());
    }

    #[test]
    fn explicit_table() {
        let src = "[problem]\nkind = function\nu.forms = x - 1\nu.branch.- = 0\nu.branch.* = x\n";
        let p = parse_problem(src).unwrap();
        let u = p.get("u").unwrap();
        assert_eq!(u.evaluate(&[0.0]).unwrap(), 0.0);
        assert_eq!(u.evaluate(&[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_problem("[problem]\nkind = wave\nphi = x^2/(x+1\npsi = 0\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_problem("[problem]\nkind = wave\nphi = x\n").unwrap_err();
        assert!(e.msg.contains("psi"));
        let e = parse_problem("[problem]\nkind = function\nu = x\n[check]\nlist = boundary\n").unwrap_err();
        assert_eq!(e.line, 5);
    }

    #[test]
    fn pattern_length_is_checked() {
        let src = "[problem]\nkind = function\nu.forms = x\nu.branch.+- = 1\n";
        assert_eq!(parse_problem(src).unwrap_err().line, 4);
    }

    #[test]
    fn grid_points_are_time_major() {
        let g = Grid {
            x: (0.0, 1.0),
            t: (0.0, 2.0),
            nx: 2,
            nt: 3,
            delta: 1e-6,
        };
        let p = g.points();
        assert_eq!(p[0], [0.0, 0.0]);
        assert_eq!(p[1], [1.0, 0.0]);
        assert_eq!(p[2], [0.0, 1.0]);
        assert_eq!(p.len(), 6);
    }
}
