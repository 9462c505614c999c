use super::PiecewiseFn;
use crate::arrangement::line_samples;
use crate::specular::a_combine;

/// Where and how densely forms are sampled by the continuity and properness
/// checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub bbox: Vec<(f64, f64)>,
    pub per_form: usize,
    pub exclusion: f64,
}

impl SampleConfig {
    pub fn for_dim(d: usize) -> Self {
        SampleConfig {
            bbox: vec![(-10.0, 10.0); d],
            per_form: 17,
            exclusion: 1e-6,
        }
    }
}

pub fn tol_jump(left: f64, right: f64) -> f64 {
    1e-9 * (1.0 + left.abs() + right.abs())
}

pub const TOL_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FormContinuity {
    pub form: usize,
    pub label: String,
    pub samples: usize,
    pub jumps: usize,
    pub max_gap: f64,
    pub restriction_continuous: bool,
}

impl FormContinuity {
    pub fn is_jump(&self) -> bool {
        self.samples > 0 && self.jumps == self.samples
    }

    pub fn is_indeterminate(&self) -> bool {
        self.jumps > 0 && self.jumps < self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuityVerdict {
    Continuous,
    PiecewiseContinuous,
    NotPiecewiseContinuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub forms: Vec<FormContinuity>,
    pub jump_forms: Vec<usize>,
    pub indeterminate: Vec<usize>,
    pub errors: Vec<String>,
    pub verdict: ContinuityVerdict,
}

impl ContinuityReport {
    pub fn max_gap(&self) -> f64 {
        self.forms.iter().fold(0.0, |m, f| m.max(f.max_gap))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProperViolation {
    pub form: usize,
    pub point: Vec<f64>,
    pub axis: usize,
    pub value: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProperReport {
    pub continuity: ContinuityReport,
    pub checked: usize,
    pub violations: Vec<ProperViolation>,
    pub errors: Vec<String>,
    pub proper: bool,
}

impl PiecewiseFn {
    /// Sample points on the graph of form `k` within the configured box and
    /// the domain.
    pub fn form_samples(&self, k: usize, cfg: &SampleConfig) -> Vec<Vec<f64>> {
        line_samples(&self.forms, k, &self.domain, &cfg.bbox, cfg.per_form, cfg.exclusion)
    }

    /// Classifies each form as a jump line or not by comparing one-sided
    /// limits across it at sampled points, and checks that the restriction to
    /// each graph varies continuously along it.
    pub fn classify_continuity(&self, cfg: &SampleConfig) -> ContinuityReport {
        let mut forms = Vec::with_capacity(self.forms.len());
        let mut errors = Vec::new();
        for (k, f) in self.forms.iter().enumerate() {
            let axis = f.lead_axis();
            let pts = self.form_samples(k, cfg);
            let mut fc = FormContinuity {
                form: k,
                label: self.form_label(k),
                samples: 0,
                jumps: 0,
                max_gap: 0.0,
                restriction_continuous: true,
            };
            for p in &pts {
                match self.one_sided_limits(p, axis) {
                    Ok(l) => {
                        fc.samples += 1;
                        let gap = (l.left - l.right).abs();
                        if !gap.is_finite() {
                            errors.push(format!("non-finite limits on {} at {p:?}", fc.label));
                            continue;
                        }
                        fc.max_gap = fc.max_gap.max(gap);
                        if gap > super::continuity::tol_jump(l.left, l.right) {
                            fc.jumps += 1;
                        }
                    }
                    Err(e) => errors.push(format!("{} at {p:?}: {e}", fc.label)),
                }
                if self.dim() == 2 && !self.restriction_ok(p, k) {
                    fc.restriction_continuous = false;
                }
            }
            forms.push(fc);
        }
        let jump_forms: Vec<usize> = forms.iter().filter(|f| f.is_jump()).map(|f| f.form).collect();
        let indeterminate: Vec<usize> = forms.iter().filter(|f| f.is_indeterminate()).map(|f| f.form).collect();
        let verdict = if !errors.is_empty() || forms.iter().any(|f| !f.restriction_continuous) {
            ContinuityVerdict::NotPiecewiseContinuous
        } else if jump_forms.is_empty() && indeterminate.is_empty() {
            ContinuityVerdict::Continuous
        } else {
            ContinuityVerdict::PiecewiseContinuous
        };
        ContinuityReport {
            forms,
            jump_forms,
            indeterminate,
            errors,
            verdict,
        }
    }

    /// The on-line value at `p` and a nearby point on the same graph agree.
    fn restriction_ok(&self, p: &[f64], k: usize) -> bool {
        let a = self.forms[k].coeffs();
        let n = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let eta = 1e-7 * (1.0 + p[0].abs() + p[1].abs());
        let q = [p[0] - a[1] / n * eta, p[1] + a[0] / n * eta];
        match (self.evaluate(p), self.evaluate(&q)) {
            (Ok(u), Ok(v)) => (u - v).abs() <= 1e-4 * (1.0 + u.abs()),
            _ => false,
        }
    }

    /// Checks the proper-function identity `u(a) = A(u(a], u[a))` (or `0`
    /// when the limits cancel) at sampled on-line points, along every axis
    /// on which the form varies.
    pub fn is_proper(&self, cfg: &SampleConfig) -> ProperReport {
        let continuity = self.classify_continuity(cfg);
        let mut violations = Vec::new();
        let mut errors = Vec::new();
        let mut checked = 0;
        for (k, f) in self.forms.iter().enumerate() {
            for p in self.form_samples(k, cfg) {
                for axis in (0..self.dim()).filter(|&i| f.coeffs()[i] != 0.0) {
                    let (lim, value) = match (self.one_sided_limits(&p, axis), self.evaluate(&p)) {
                        (Ok(l), Ok(v)) => (l, v),
                        (Err(e), _) | (_, Err(e)) => {
                            errors.push(format!("{} at {p:?}: {e}", self.form_label(k)));
                            continue;
                        }
                    };
                    checked += 1;
                    let expected = if (lim.left + lim.right).abs() <= TOL_ZERO {
                        0.0
                    } else {
                        a_combine(lim.left, lim.right)
                    };
                    if (value - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                        violations.push(ProperViolation {
                            form: k,
                            point: p.clone(),
                            axis,
                            value,
                            expected,
                        });
                    }
                }
            }
        }
        let proper = continuity.verdict != super::ContinuityVerdict::NotPiecewiseContinuous
            && violations.is_empty()
            && errors.is_empty();
        ProperReport {
            continuity,
            checked,
            violations,
            errors,
            proper,
        }
    }
}
