use super::{classical_partial_field, specular_field};
use crate::arrangement::line_samples;
use crate::piecewise::{ContinuityVerdict, PiecewiseFn, SampleConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S2Verdict {
    S2,
    S1Only,
    S0Only,
    Fails,
}

impl S2Verdict {
    pub fn label(self) -> &'static str {
        match self {
            S2Verdict::S2 => "S2",
            S2Verdict::S1Only => "S1-only",
            S2Verdict::S0Only => "S0-only",
            S2Verdict::Fails => "fails",
        }
    }
}

/// Outcome of the second-order membership test for a function of two
/// variables. Field names follow `d{first}{second}`: `dxy` is the specular
/// derivative along the second variable of the classical `u_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct S2Report {
    pub continuous: bool,
    pub proper: bool,
    /// Labels of forms across which `u` jumps.
    pub jump_forms: Vec<String>,
    pub classical_x: bool,
    pub classical_y: bool,
    /// Labels of forms across which a first partial is not classical.
    pub non_classical: Vec<String>,
    pub first_fields_proper: bool,
    /// Properness of the four second fields in the order xx, xy, yx, yy.
    pub second_proper: [bool; 4],
    pub mixed_continuous: bool,
    pub symmetry_residual: f64,
    pub errors: Vec<String>,
    pub verdict: S2Verdict,
}

/// Deterministic sample points for symmetry checks: the on-line samples of
/// every form plus a Halton set over the box, all inside the domain.
fn symmetry_points(u: &PiecewiseFn, cfg: &SampleConfig) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    for k in 0..u.forms().len() {
        pts.extend(line_samples(
            u.forms(),
            k,
            u.domain(),
            &cfg.bbox,
            cfg.per_form,
            cfg.exclusion,
        ));
    }
    let halton = |mut i: u32, base: u32| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    for i in 1..=64 {
        let p: Vec<f64> = cfg
            .bbox
            .iter()
            .zip([2, 3])
            .map(|(&(lo, hi), b)| lo + halton(i, b) * (hi - lo))
            .collect();
        if u.in_domain(&p) {
            pts.push(p);
        }
    }
    pts
}

pub fn s2_membership(u: &PiecewiseFn) -> Result<S2Report> {
    s2_membership_with(u, &SampleConfig::for_dim(2))
}

pub fn s2_membership_with(u: &PiecewiseFn, cfg: &SampleConfig) -> Result<S2Report> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch("S2 membership needs two variables".into()));
    }
    let mut errors = Vec::new();
    let proper_u = u.is_proper(cfg);
    let continuous = proper_u.continuity.verdict == ContinuityVerdict::Continuous;
    let jump_forms: Vec<String> = proper_u
        .continuity
        .forms
        .iter()
        .filter(|f| f.jumps > 0)
        .map(|f| f.label.clone())
        .collect();
    errors.extend(proper_u.errors.iter().cloned());

    let (ux, rx) = classical_partial_field(u, 0)?;
    let (uy, ry) = classical_partial_field(u, 1)?;
    let mut non_classical: Vec<String> = Vec::new();
    for &k in rx.non_classical_forms.iter().chain(&ry.non_classical_forms) {
        let l = u.form_label(k);
        if !non_classical.contains(&l) {
            non_classical.push(l);
        }
    }

    let first_fields_proper = [specular_field(u, 0)?, specular_field(u, 1)?]
        .iter()
        .all(|f| f.is_proper(cfg).proper);

    let second = [
        specular_field(&ux, 0)?,
        specular_field(&ux, 1)?,
        specular_field(&uy, 0)?,
        specular_field(&uy, 1)?,
    ];
    let mut second_proper = [false; 4];
    for (i, f) in second.iter().enumerate() {
        let rep = f.is_proper(cfg);
        errors.extend(rep.errors.iter().cloned());
        second_proper[i] = rep.proper;
    }
    let mixed_continuous = [&second[1], &second[2]]
        .iter()
        .all(|f| f.classify_continuity(cfg).verdict == ContinuityVerdict::Continuous);

    let mut symmetry_residual: f64 = 0.0;
    for p in symmetry_points(u, cfg) {
        match (second[1].evaluate(&p), second[2].evaluate(&p)) {
            (Ok(a), Ok(b)) => symmetry_residual = symmetry_residual.max((a - b).abs()),
            (Err(e), _) | (_, Err(e)) => errors.push(format!("mixed field at {p:?}: {e}")),
        }
    }

    let classical_x = rx.non_classical_forms.is_empty();
    let classical_y = ry.non_classical_forms.is_empty();
    let verdict = if continuous
        && classical_x
        && classical_y
        && second_proper.iter().all(|&b| b)
        && mixed_continuous
        && errors.is_empty()
    {
        S2Verdict::S2
    } else if continuous && first_fields_proper {
        S2Verdict::S1Only
    } else if proper_u.proper {
        S2Verdict::S0Only
    } else {
        S2Verdict::Fails
    };
    Ok(S2Report {
        continuous,
        proper: proper_u.proper,
        jump_forms,
        classical_x,
        classical_y,
        non_classical,
        first_fields_proper,
        second_proper,
        mixed_continuous,
        symmetry_residual,
        errors,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn pw(src: &str) -> PiecewiseFn {
        let v = vec!["x".to_string(), "y".to_string()];
        PiecewiseFn::from_expression(&parse(src, &v).unwrap(), &v).unwrap()
    }

    #[test]
    fn q_plus_q_is_s2() {
        let r = s2_membership(&pw("x*abs(x)/2 + y*abs(y)/2")).unwrap();
        assert_eq!(r.verdict, S2Verdict::S2, "{r:?}");
        assert!(r.symmetry_residual <= 1e-12);
    }

    #[test]
    fn kink_is_s1_only() {
        let r = s2_membership(&pw("abs(x - y)")).unwrap();
        assert_eq!(r.verdict, S2Verdict::S1Only, "{r:?}");
        assert!(!r.classical_x);
    }

    #[test]
    fn smooth_is_s2() {
        let r = s2_membership(&pw("x^2*y + exp(y)")).unwrap();
        assert_eq!(r.verdict, S2Verdict::S2);
    }
}
