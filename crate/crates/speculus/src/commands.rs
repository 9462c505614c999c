use std::fmt::Write as _;

use speculus_core::expr::Sign;
use speculus_core::piecewise::{PiecewiseFn, SampleConfig};
use speculus_core::specular::{s2_membership, semi_derivatives, S2Verdict};
use speculus_core::tangent2d::tangent_data;
use speculus_core::waves::{
    boundary_check, hypothesis_h_check, initial_check, partial_or_one_sided, solve_transport, transport_residual,
    wave_residual, ResidualReport, SolutionField, SpatialDomain, WaveProblem,
};
use speculus_core::Error;
use thiserror::Error;

use crate::problem::{Check, Grid, Kind, Problem, ProblemError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read or write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Math(#[from] Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Problem(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Math(Error::Parse(_)) => 2,
            CliError::Math(Error::ClassViolation(_) | Error::Compatibility(_)) => 4,
            CliError::Math(_) => 3,
        }
    }
}

/// Shortest representation that parses back to the same double.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&v.abs()) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}

pub struct Solved {
    pub u: PiecewiseFn,
    pub field: Option<SolutionField>,
}

pub fn solve(p: &Problem) -> Result<Solved, Error> {
    let get = |n: &str| p.get(n).expect("parser guarantees required functions").clone();
    let field = match p.kind {
        Kind::Function => {
            return Ok(Solved {
                u: get("u"),
                field: None,
            })
        }
        Kind::Transport => solve_transport(&get("h"))?,
        Kind::Wave | Kind::WaveHalfline | Kind::WaveNonhomogeneous => WaveProblem {
            domain: if p.kind == Kind::WaveHalfline {
                SpatialDomain::HalfLine
            } else {
                SpatialDomain::FullLine
            },
            phi: get("phi"),
            psi: get("psi"),
            f: p.get("f").cloned(),
        }
        .solve()?,
    };
    let u = match p.policy {
        Some(pol) => field.u.clone().with_all_policies(pol),
        None => field.u.clone(),
    };
    Ok(Solved { u, field: Some(field) })
}

/// Points on each singular form of `u` inside the grid window, with the
/// paired samples at `±δ` along every axis the form varies in. Ordered by
/// form, then position along the form, then side.
pub fn line_supplements(u: &PiecewiseFn, grid: &Grid) -> Vec<[f64; 2]> {
    let (xs, ts) = (grid.xs(), grid.ts());
    let inside = |p: &[f64; 2]| {
        let slack = 1e-12;
        p[0] >= grid.x.0 - slack
            && p[0] <= grid.x.1 + slack
            && p[1] >= grid.t.0 - slack
            && p[1] <= grid.t.1 + slack
            && u.in_domain(p)
    };
    let d = grid.delta;
    let mut out = Vec::new();
    for g in u.forms() {
        let (a, b) = (g.coeffs(), g.offset());
        let on: Vec<[f64; 2]> = if a[0] != 0.0 {
            ts.iter().map(|&t| [(b - a[1] * t) / a[0], t]).collect()
        } else {
            xs.iter().map(|&x| [x, (b - a[0] * x) / a[1]]).collect()
        };
        for p in on.into_iter().filter(|p| inside(p)) {
            let mut sides = vec![p];
            if a[0] != 0.0 {
                sides.push([p[0] - d, p[1]]);
                sides.push([p[0] + d, p[1]]);
            }
            if a[1] != 0.0 {
                sides.push([p[0], p[1] - d]);
                sides.push([p[0], p[1] + d]);
            }
            out.extend(sides.into_iter().filter(|q| u.in_domain(q)));
        }
    }
    out
}

fn to_vecs(pts: &[[f64; 2]]) -> Vec<Vec<f64>> {
    pts.iter().map(|p| p.to_vec()).collect()
}

fn residuals(p: &Problem, u: &PiecewiseFn, pts: &[[f64; 2]]) -> Result<ResidualReport, Error> {
    let r = if p.kind == Kind::Transport {
        transport_residual(u, &to_vecs(pts))?
    } else {
        wave_residual(u, p.get("f"), &to_vecs(pts))?
    };
    if let Some(e) = r.errors.first() {
        return Err(Error::NonFinite(format!("residual: {e}")));
    }
    Ok(r)
}

pub fn csv(p: &Problem, u: &PiecewiseFn) -> Result<(String, usize), CliError> {
    if p.kind == Kind::Function {
        return Err(CliError::Usage("solve needs a transport or wave problem".into()));
    }
    let mut pts = p.grid.points();
    pts.extend(line_supplements(u, &p.grid));
    let res = residuals(p, u, &pts)?;
    let mut out = String::from("x,t,u,ux,ut,residual\n");
    for (pt, r) in pts.iter().zip(&res.samples) {
        let vals = [
            pt[0],
            pt[1],
            u.evaluate(pt)?,
            partial_or_one_sided(u, pt, 0)?,
            partial_or_one_sided(u, pt, 1)?,
            r.residual,
        ];
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{v} at ({}, {})", pt[0], pt[1])).into());
        }
        out.push_str(&fmt_list(&vals));
        out.push('\n');
    }
    Ok((out, pts.len()))
}

fn s2_summary(u: &PiecewiseFn) -> Result<(bool, String), Error> {
    let r = s2_membership(u)?;
    let mut why = Vec::new();
    if !r.jump_forms.is_empty() {
        why.push(format!("jumps across {}", r.jump_forms.join(", ")));
    }
    if !r.non_classical.is_empty() {
        why.push(format!(
            "first partials not classical across {}",
            r.non_classical.join(", ")
        ));
    }
    if !r.mixed_continuous {
        why.push("mixed second derivatives not continuous".to_string());
    }
    Ok((
        r.verdict == S2Verdict::S2,
        format!("{} ({})", r.verdict.label(), why.join("; ")),
    ))
}

/// Writes the CSV and returns the summary printed on stdout and any
/// warnings for stderr.
pub fn cmd_solve(p: &Problem, out_path: &str) -> Result<(String, Vec<String>), CliError> {
    let solved = solve(p)?;
    let (text, rows) = csv(p, &solved.u)?;
    std::fs::write(out_path, text).map_err(|source| CliError::Io {
        path: out_path.to_string(),
        source,
    })?;
    let mut summary = String::new();
    let _ = writeln!(summary, "kind={}", p.kind.label());
    if let Some(f) = &solved.field {
        let _ = writeln!(summary, "provenance={}", f.provenance.label());
        for n in &f.notes {
            let _ = writeln!(summary, "note={n}");
        }
    }
    let _ = writeln!(summary, "rows={rows}");
    let (ok, verdict) = s2_summary(&solved.u)?;
    let _ = writeln!(
        summary,
        "s2={}",
        if ok {
            "S2"
        } else {
            verdict.split(' ').next().unwrap_or("")
        }
    );
    let mut warnings = Vec::new();
    if !ok && p.kind.is_wave() {
        warnings.push(format!("the solution is not in S2: {verdict}"));
    }
    Ok((summary, warnings))
}

struct CheckOutcome {
    pass: bool,
    lines: Vec<(String, String)>,
}

fn run_check(p: &Problem, c: Check, u: &PiecewiseFn) -> Result<CheckOutcome, Error> {
    let kv = |k: &str, v: String| (k.to_string(), v);
    let grid_pts = p.grid.points();
    let mut pts = grid_pts.clone();
    pts.extend(line_supplements(u, &p.grid));
    Ok(match c {
        Check::Residual => {
            let r = residuals(p, u, &pts)?;
            let m = r.max_residual();
            let mut lines = vec![kv("max", fmt_num(m)), kv("points", pts.len().to_string())];
            if p.kind.is_wave() {
                lines.push(kv("max_direct", fmt_num(r.max_direct())));
            }
            CheckOutcome { pass: m <= 1e-9, lines }
        }
        Check::S2 => {
            let r = s2_membership(u)?;
            CheckOutcome {
                pass: r.verdict == S2Verdict::S2,
                lines: vec![
                    kv("verdict", r.verdict.label().to_string()),
                    kv("jump_forms", r.jump_forms.join(";")),
                    kv("non_classical", r.non_classical.join(";")),
                    kv("mixed_continuous", r.mixed_continuous.to_string()),
                    kv("symmetry_residual", fmt_num(r.symmetry_residual)),
                ],
            }
        }
        Check::Proper => {
            let r = u.is_proper(&SampleConfig::for_dim(u.dim()));
            CheckOutcome {
                pass: r.proper,
                lines: vec![kv("violations", r.violations.len().to_string())],
            }
        }
        Check::HypothesisH => {
            let inner: Vec<[f64; 2]> = pts.iter().copied().filter(|q| q[1] > 0.0).collect();
            let r = hypothesis_h_check(u, &to_vecs(&inner))?;
            CheckOutcome {
                pass: r.holds(),
                lines: vec![
                    kv("failures", r.failures.to_string()),
                    kv("points", inner.len().to_string()),
                ],
            }
        }
        Check::Boundary => {
            let m = boundary_check(u, &p.grid.ts())?;
            CheckOutcome {
                pass: m <= 1e-10,
                lines: vec![kv("max", fmt_num(m))],
            }
        }
        Check::Initial => {
            let (phi, psi) = match p.kind {
                Kind::Transport => (p.get("h"), None),
                _ => (p.get("phi"), p.get("psi")),
            };
            let phi = phi.expect("initial data present");
            let r = initial_check(u, phi, psi, &p.grid.xs());
            let mut lines = vec![kv("max_displacement", fmt_num(r.max_displacement_error))];
            if psi.is_some() {
                lines.push(kv("max_velocity", fmt_num(r.max_velocity_error)));
            }
            lines.push(kv("errors", r.errors.len().to_string()));
            let pass = r.errors.is_empty() && r.max_displacement_error <= 1e-10 && r.max_velocity_error <= 1e-10;
            CheckOutcome { pass, lines }
        }
        Check::Reference => {
            let e = p.get("expected").expect("parser guarantees expected");
            let (mut worst, mut bad) = (0.0f64, 0usize);
            for q in &pts {
                let (a, b) = (u.evaluate(q)?, e.evaluate(q)?);
                let gap = (a - b).abs();
                worst = worst.max(gap);
                if gap > 1e-9 * (1.0 + b.abs()) {
                    bad += 1;
                }
            }
            CheckOutcome {
                pass: bad == 0,
                lines: vec![kv("max", fmt_num(worst)), kv("mismatches", bad.to_string())],
            }
        }
    })
}

/// Runs the requested checks. Returns the report and the number of failed
/// checks.
pub fn cmd_check(p: &Problem) -> Result<(String, usize), CliError> {
    let solved = solve(p)?;
    let mut out = String::new();
    let _ = writeln!(out, "kind={}", p.kind.label());
    let mut failed = 0;
    for &c in &p.checks {
        let o = run_check(p, c, &solved.u)?;
        let name = c.label();
        let _ = writeln!(out, "# {name}: {}", if o.pass { "pass" } else { "FAIL" });
        let _ = writeln!(out, "{name}={}", if o.pass { "pass" } else { "fail" });
        for (k, v) in o.lines {
            let _ = writeln!(out, "{name}.{k}={v}");
        }
        if !o.pass {
            failed += 1;
        }
    }
    let _ = writeln!(out, "status={}", if failed == 0 { "pass" } else { "fail" });
    Ok((out, failed))
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let v: Option<Vec<f64>> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect();
    match v {
        Some(v) if v.len() == dim => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--point `{s}` must give {dim} comma-separated numbers"
        ))),
    }
}

pub fn cmd_deriv(p: &Problem, point: &str, axis: &str) -> Result<String, CliError> {
    let u = solve(p)?.u;
    let pt = parse_point(point, u.dim())?;
    let Some(ax) = u.vars().iter().position(|v| v == axis) else {
        return Err(CliError::Usage(format!(
            "axis `{axis}` is not one of {}",
            u.vars().join(", ")
        )));
    };
    let sd = semi_derivatives(&u, &pt, ax)?;
    let mut out = String::new();
    let _ = writeln!(out, "point={}", fmt_list(&pt));
    let _ = writeln!(out, "axis={axis}");
    let _ = writeln!(out, "alpha={}", fmt_num(sd.right));
    let _ = writeln!(out, "beta={}", fmt_num(sd.left));
    let _ = writeln!(out, "specular={}", fmt_num(sd.combined()));
    let on_line = u.signs_at(&pt).contains(&Sign::Zero);
    let _ = writeln!(out, "on_line={on_line}");
    if u.dim() == 2 {
        let td = tangent_data(&u, &pt)?;
        let _ = writeln!(out, "criterion={}", fmt_num(td.criterion));
        let _ = writeln!(out, "criterion_tol={}", fmt_num(td.tol));
        match td.normal {
            Some(n) => {
                let _ = writeln!(out, "strong=true");
                let _ = writeln!(out, "normal={}", fmt_list(&n));
            }
            None => {
                let _ = writeln!(out, "strong=false");
                let _ = writeln!(out, "planes={}", td.planes.len());
                for (i, pl) in td.planes.iter().enumerate() {
                    let _ = writeln!(out, "plane.{}={}", i + 1, fmt_list(&[pl.c1, pl.c2, pl.c0]));
                }
            }
        }
    }
    Ok(out)
}
