use super::*;
use crate::expr::parse;

fn vars1() -> Vec<String> {
    vec!["x".into()]
}

fn vars2() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn pw(src: &str, vars: &[String]) -> PiecewiseFn {
    PiecewiseFn::from_expression(&parse(src, vars).unwrap(), vars).unwrap()
}

fn form(c: &[f64], b: f64) -> AffineForm {
    AffineForm::new(c.to_vec(), b).unwrap()
}

#[test]
fn expression_expansion_matches_direct_evaluation() {
    let v = vars2();
    let src = "abs(x - y) + sgn(x + 2*y - 1)*x";
    let e = parse(src, &v).unwrap();
    let u = pw(src, &v);
    assert_eq!(u.forms().len(), 2);
    for p in [[0.3, -2.0], [1.0, 1.0], [-1.0, 1.0], [1.0 / 3.0, 1.0 / 3.0], [4.0, 0.5]] {
        assert_eq!(u.evaluate(&p).unwrap(), e.eval(&p).unwrap(), "at {p:?}");
    }
}

#[test]
fn on_line_value_uses_zero_sign() {
    let v = vars1();
    let u = pw("sgn(x) + 3", &v);
    assert_eq!(u.evaluate(&[0.0]).unwrap(), 3.0);
    let l = u.one_sided_limits(&[0.0], 0).unwrap();
    assert_eq!((l.left, l.right, l.mid), (2.0, 4.0, 3.0));
}

#[test]
fn specular_policy_combines_limits() {
    let v = vars1();
    let u = pw("sgn(x)", &v).with_all_policies(OnLinePolicy::SpecularCombination);
    assert_eq!(u.evaluate(&[0.0]).unwrap(), 0.0);
    let w = pw("(1 + sgn(x))/2", &v).with_all_policies(OnLinePolicy::SpecularCombination);
    let got = w.evaluate(&[0.0]).unwrap();
    assert!((got - (2f64.sqrt() - 1.0)).abs() < 1e-15);
}

#[test]
fn from_parts_flips_patterns_with_orientation() {
    let v = vars1();
    // -x >= 0 is the left half-line.
    let u = PiecewiseFn::from_branches(
        vec![form(&[-2.0], 0.0)],
        vec![
            (vec![SignPat::Pos], Branch::constant(-1.0)),
            (vec![SignPat::Any], Branch::constant(1.0)),
        ],
        &v,
    )
    .unwrap();
    assert_eq!(u.forms()[0].coeffs(), &[1.0]);
    assert_eq!(u.evaluate(&[-1.0]).unwrap(), -1.0);
    assert_eq!(u.evaluate(&[1.0]).unwrap(), 1.0);
}

#[test]
fn coverage_gap_is_reported() {
    let v = vars1();
    let r = PiecewiseFn::from_branches(
        vec![form(&[1.0], 0.0)],
        vec![(vec![SignPat::Pos], Branch::constant(1.0))],
        &v,
    );
    assert!(matches!(r, Err(Error::CoverageGap(_))));
}

#[test]
fn singular_nodes_on_open_cells_are_rejected() {
    let v = vars1();
    let r = PiecewiseFn::from_branches(
        vec![form(&[1.0], 0.0)],
        vec![(vec![SignPat::Any], Branch::Expr(parse("abs(x)", &v).unwrap()))],
        &v,
    );
    assert!(r.is_err());
}

#[test]
fn adjacent_steps_only_across_varying_forms() {
    let v = vars2();
    let u = pw("abs(x) + abs(y) + abs(x - y)", &v);
    let s = u.signs_at(&[0.0, 0.0]);
    assert!(s.iter().all(|&s| s == Sign::Zero));
    let right = u.adjacent(&s, 0, Sign::Pos);
    // Forms are x, y, x - y in some order; only y keeps its zero.
    for (k, f) in u.forms().iter().enumerate() {
        if f.coeffs()[0] == 0.0 {
            assert_eq!(right[k], Sign::Zero);
        } else {
            assert_eq!(right[k], Sign::Pos);
        }
    }
}

#[test]
fn sum_and_difference() {
    let v = vars1();
    let a = pw("abs(x - 1)", &v);
    let b = pw("x*sgn(x + 1)", &v);
    let s = a.add(&b).unwrap();
    let d = a.sub(&b).unwrap();
    for x in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
        let (av, bv) = (a.evaluate(&[x]).unwrap(), b.evaluate(&[x]).unwrap());
        assert_eq!(s.evaluate(&[x]).unwrap(), av + bv);
        assert_eq!(d.evaluate(&[x]).unwrap(), av - bv);
    }
    assert_eq!(s.forms().len(), 2);
}

#[test]
fn composition_with_characteristics() {
    let v = vars1();
    let h = pw("abs(x - 1)", &v);
    let xt = vec!["x".to_string(), "t".to_string()];
    let u = h.compose_affine(&[(vec![1.0, -1.0], 0.0)], &xt).unwrap();
    assert_eq!(u.dim(), 2);
    for p in [[0.0, 0.0], [3.0, 2.0], [2.0, 1.0], [-1.0, 0.5]] {
        assert_eq!(u.evaluate(&p).unwrap(), (p[0] - p[1] - 1.0).abs());
    }
}

#[test]
fn odd_extension_mirrors() {
    let v = vars1();
    let f = pw("x*abs(x - 1)", &v);
    let o = f.odd_extension().unwrap();
    for x in [0.0, 0.5, 1.0, 2.0] {
        let fx = f.evaluate(&[x]).unwrap();
        assert_eq!(o.evaluate(&[x]).unwrap(), fx);
        assert_eq!(o.evaluate(&[-x]).unwrap(), -fx);
    }
}

#[test]
fn splice_takes_positive_side_on_the_line() {
    let v = vars1();
    let (a, b) = (pw("1", &v), pw("2", &v));
    let s = PiecewiseFn::splice(&form(&[1.0], 1.0), &a, &b).unwrap();
    assert_eq!(s.evaluate(&[1.0]).unwrap(), 1.0);
    assert_eq!(s.evaluate(&[0.0]).unwrap(), 2.0);
    assert_eq!(s.evaluate(&[5.0]).unwrap(), 1.0);
}

#[test]
fn continuity_classification() {
    let v = vars2();
    let cfg = SampleConfig::for_dim(2);
    let c = pw("abs(x - y)", &v).classify_continuity(&cfg);
    assert_eq!(c.verdict, ContinuityVerdict::Continuous);
    let j = pw("sgn(x - y) + y", &v).classify_continuity(&cfg);
    assert_ne!(j.verdict, ContinuityVerdict::Continuous);
    assert_eq!(j.jump_forms.len(), 1);
    assert!((j.max_gap() - 2.0).abs() < 1e-12);
}

#[test]
fn properness() {
    let v = vars1();
    let cfg = SampleConfig::for_dim(1);
    assert!(pw("abs(x)", &v).is_proper(&cfg).proper);
    // sgn(0) = 0 is what the combination of -1 and 1 gives.
    assert!(pw("sgn(x)", &v).is_proper(&cfg).proper);
    // The Heaviside step with value 1/2 at 0 is not.
    let h = pw("(1 + sgn(x))/2", &v);
    assert!(!h.is_proper(&cfg).proper);
    assert!(
        h.with_all_policies(OnLinePolicy::SpecularCombination)
            .is_proper(&cfg)
            .proper
    );
}

#[test]
fn domain_restricts_cells() {
    let v = vars2();
    let u = pw("abs(x)", &v).with_domain(&[form(&[0.0, 1.0], 0.0)]);
    assert!(u.in_domain(&[1.0, 0.0]));
    assert!(!u.in_domain(&[1.0, -0.5]));
    let arr = u.arrangement().unwrap();
    assert!(arr.cells.iter().all(|c| c.sample[1] >= 0.0));
}

#[test]
fn describe_lists_entries() {
    let v = vars1();
    let d = pw("abs(x)", &v).describe();
    assert!(d.iter().any(|l| l.starts_with("[+]")));
    assert!(d.last().unwrap().starts_with("[*]"));
}
