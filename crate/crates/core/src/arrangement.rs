//! Cells of an arrangement of affine forms in one or two dimensions.
//!
//! Every point of the plane has a sign vector with respect to the forms; the
//! cells are the nonempty sets of points sharing one. Faces are found by
//! clipping a working box against each line in turn, edges by splitting each
//! line at its crossings, and vertices are those crossings. Optional domain
//! constraints `g >= 0` restrict everything to a closed convex region.

use crate::expr::{AffineForm, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub signs: Vec<Sign>,
    /// Topological dimension: 2 for faces, 1 for edges or intervals, 0 for
    /// vertices or points.
    pub dim: usize,
    pub sample: Vec<f64>,
    /// A few further interior points of the cell.
    pub extra: Vec<Vec<f64>>,
}

impl Cell {
    pub fn is_open(&self) -> bool {
        self.signs.iter().all(|&s| s != Sign::Zero)
    }

    pub fn zero_forms(&self) -> impl Iterator<Item = usize> + '_ {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == Sign::Zero)
            .map(|(k, _)| k)
    }

    pub fn samples(&self) -> impl Iterator<Item = &Vec<f64>> {
        std::iter::once(&self.sample).chain(self.extra.iter())
    }
}

#[derive(Debug, Clone)]
pub struct Arrangement {
    pub dim: usize,
    pub cells: Vec<Cell>,
    /// Box containing every vertex, used to clip unbounded faces.
    pub window: Vec<(f64, f64)>,
}

type Pt = [f64; 2];

fn vdc(mut n: u32) -> f64 {
    let mut x = 0.0;
    let mut f = 0.5;
    while n > 0 {
        if n & 1 == 1 {
            x += f;
        }
        n >>= 1;
        f *= 0.5;
    }
    x
}

/// Intersection of two lines `a.p = b` in the plane.
fn intersect(f: &AffineForm, g: &AffineForm) -> Option<Pt> {
    let (a, b) = (f.coeffs(), g.coeffs());
    let det = a[0] * b[1] - a[1] * b[0];
    let scale = (a[0].abs() + a[1].abs()) * (b[0].abs() + b[1].abs());
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    let (c, d) = (f.offset(), g.offset());
    Some([(c * b[1] - a[1] * d) / det, (a[0] * d - c * b[0]) / det])
}

/// Foot of the perpendicular from the origin and the unit direction.
fn line_frame(f: &AffineForm) -> (Pt, Pt) {
    let a = f.coeffs();
    let n2 = a[0] * a[0] + a[1] * a[1];
    let n = n2.sqrt();
    let p0 = [a[0] * f.offset() / n2, a[1] * f.offset() / n2];
    (p0, [-a[1] / n, a[0] / n])
}

fn at(p0: Pt, d: Pt, s: f64) -> Pt {
    [p0[0] + s * d[0], p0[1] + s * d[1]]
}

/// Parameter interval of the line `p0 + s d` inside a box and a set of
/// constraints `g >= 0`; `None` when empty.
fn clip_line(p0: Pt, d: Pt, window: &[(f64, f64)], domain: &[AffineForm]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for axis in 0..2 {
        let (wlo, whi) = window[axis];
        if d[axis].abs() > 1e-15 {
            let s1 = (wlo - p0[axis]) / d[axis];
            let s2 = (whi - p0[axis]) / d[axis];
            lo = lo.max(s1.min(s2));
            hi = hi.min(s1.max(s2));
        } else if p0[axis] < wlo || p0[axis] > whi {
            return None;
        }
    }
    for g in domain {
        let gp = g.eval(&p0);
        let slope = g.coeffs()[0] * d[0] + g.coeffs()[1] * d[1];
        if slope.abs() <= 1e-15 {
            if gp < -1e-12 * g.scale_at(&p0) {
                return None;
            }
        } else if slope > 0.0 {
            lo = lo.max(-gp / slope);
        } else {
            hi = hi.min(-gp / slope);
        }
    }
    (hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs()))).then_some((lo, hi))
}

fn clip_polygon(poly: &[Pt], f: &AffineForm, keep: f64) -> Vec<Pt> {
    let val = |p: &Pt| keep * f.eval(p);
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (vc, vp) = (val(&cur), val(&prev));
        let cross = |out: &mut Vec<Pt>| {
            let t = vp / (vp - vc);
            out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
        };
        if vc >= 0.0 {
            if vp < 0.0 {
                cross(&mut out);
            }
            out.push(cur);
        } else if vp >= 0.0 {
            cross(&mut out);
        }
    }
    out
}

fn area_centroid(poly: &[Pt]) -> (f64, Pt) {
    let n = poly.len();
    if n < 3 {
        return (0.0, [0.0, 0.0]);
    }
    // Shift to the first vertex for accuracy.
    let o = poly[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 1..n - 1 {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let q = [poly[i + 1][0] - o[0], poly[i + 1][1] - o[1]];
        let cr = p[0] * q[1] - q[0] * p[1];
        a += cr;
        cx += cr * (p[0] + q[0]);
        cy += cr * (p[1] + q[1]);
    }
    if a.abs() == 0.0 {
        return (0.0, o);
    }
    (a / 2.0, [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)])
}

/// Convex polygon pieces of `poly` cut by `forms`, each with its sign vector.
pub fn split_polygon(poly: &[Pt], forms: &[AffineForm]) -> Vec<(Vec<Pt>, Vec<Sign>)> {
    let (total, _) = area_centroid(poly);
    let min_area = 1e-13 * total.abs().max(1e-300);
    let mut pieces = vec![(poly.to_vec(), Vec::new())];
    for f in forms {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for (p, signs) in pieces {
            for (keep, s) in [(1.0, Sign::Pos), (-1.0, Sign::Neg)] {
                let q = clip_polygon(&p, f, keep);
                if area_centroid(&q).0.abs() > min_area {
                    let mut sv: Vec<Sign> = signs.clone();
                    sv.push(s);
                    next.push((q, sv));
                }
            }
        }
        pieces = next;
    }
    pieces
}

impl Arrangement {
    pub fn new(forms: &[AffineForm], dim: usize, domain: &[AffineForm]) -> Result<Self> {
        if forms.iter().chain(domain).any(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch(format!("forms must have {dim} coefficients")));
        }
        match dim {
            1 => Ok(Self::one_d(forms, domain)),
            2 => Ok(Self::two_d(forms, domain)),
            _ => Err(Error::DimensionMismatch(format!("dimension {dim} not supported"))),
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.is_open())
    }

    fn one_d(forms: &[AffineForm], domain: &[AffineForm]) -> Self {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for g in domain {
            let (a, b) = (g.coeffs()[0], g.offset());
            if a > 0.0 {
                lo = lo.max(b / a);
            } else {
                hi = hi.min(b / a);
            }
        }
        let mut pts: Vec<f64> = forms
            .iter()
            .map(|f| f.offset() / f.coeffs()[0])
            .filter(|&z| z >= lo - 1e-12 * (1.0 + z.abs()) && z <= hi + 1e-12 * (1.0 + z.abs()))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
        let span = match (pts.first(), pts.last()) {
            (Some(a), Some(b)) => 1.0 + (b - a),
            _ => 1.0,
        };
        let signs_at = |x: f64| forms.iter().map(|f| f.sign_at(&[x])).collect::<Vec<_>>();
        let mut cells = Vec::new();
        let mut bounds = vec![lo];
        bounds.extend(pts.iter().copied());
        bounds.push(hi);
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.is_finite() && b.is_finite() && b - a <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
                continue;
            }
            let (mid, extra) = match (a.is_finite(), b.is_finite()) {
                (true, true) => ((a + b) / 2.0, vec![a + 0.25 * (b - a), a + 0.75 * (b - a)]),
                (true, false) => (a + span, vec![a + 0.5 * span, a + 2.0 * span]),
                (false, true) => (b - span, vec![b - 0.5 * span, b - 2.0 * span]),
                (false, false) => (0.0, vec![-1.0, 1.0]),
            };
            cells.push(Cell {
                signs: signs_at(mid),
                dim: 1,
                sample: vec![mid],
                extra: extra.into_iter().map(|x| vec![x]).collect(),
            });
        }
        for &z in &pts {
            let signs = forms
                .iter()
                .map(|f| {
                    let v = f.eval(&[z]);
                    if v.abs() <= 1e-9 * f.scale_at(&[z]) {
                        Sign::Zero
                    } else {
                        Sign::of(v)
                    }
                })
                .collect();
            cells.push(Cell {
                signs,
                dim: 0,
                sample: vec![z],
                extra: vec![],
            });
        }
        let window = vec![(
            pts.first().map_or(-1.0, |a| a - span),
            pts.last().map_or(1.0, |b| b + span),
        )];
        Arrangement { dim: 1, cells, window }
    }

    fn two_d(forms: &[AffineForm], domain: &[AffineForm]) -> Self {
        let all: Vec<&AffineForm> = forms.iter().chain(domain).collect();
        let mut pts: Vec<Pt> = vec![[0.0, 0.0]];
        for (i, f) in all.iter().enumerate() {
            pts.push(line_frame(f).0);
            for g in &all[i + 1..] {
                if let Some(p) = intersect(f, g) {
                    pts.push(p);
                }
            }
        }
        let mut window = vec![(f64::INFINITY, f64::NEG_INFINITY); 2];
        for p in &pts {
            for k in 0..2 {
                window[k].0 = window[k].0.min(p[k]);
                window[k].1 = window[k].1.max(p[k]);
            }
        }
        let extent = (window[0].1 - window[0].0).max(window[1].1 - window[1].0);
        let margin = 1.0 + 0.5 * extent;
        for w in &mut window {
            w.0 -= margin;
            w.1 += margin;
        }

        let mut cells = Vec::new();

        // Faces.
        let mut region: Vec<Pt> = vec![
            [window[0].0, window[1].0],
            [window[0].1, window[1].0],
            [window[0].1, window[1].1],
            [window[0].0, window[1].1],
        ];
        for g in domain {
            region = clip_polygon(&region, g, 1.0);
        }
        if area_centroid(&region).0 > 0.0 {
            for (poly, signs) in split_polygon(&region, forms) {
                let (_, c) = area_centroid(&poly);
                let extra = poly
                    .iter()
                    .step_by((poly.len() / 4).max(1))
                    .take(4)
                    .map(|v| vec![0.5 * (c[0] + v[0]), 0.5 * (c[1] + v[1])])
                    .collect();
                cells.push(Cell {
                    signs,
                    dim: 2,
                    sample: c.to_vec(),
                    extra,
                });
            }
        }

        // Edges and vertices.
        let zero_signs = |p: &Pt, tol: f64| -> Vec<Sign> {
            forms
                .iter()
                .map(|f| {
                    let v = f.eval(p);
                    if v.abs() <= tol * f.scale_at(p) {
                        Sign::Zero
                    } else {
                        Sign::of(v)
                    }
                })
                .collect()
        };
        for (k, f) in forms.iter().enumerate() {
            let (p0, d) = line_frame(f);
            let Some((lo, hi)) = clip_line(p0, d, &window, domain) else {
                continue;
            };
            let mut breaks: Vec<f64> = Vec::new();
            for (j, g) in forms.iter().enumerate() {
                if j == k {
                    continue;
                }
                let slope = g.coeffs()[0] * d[0] + g.coeffs()[1] * d[1];
                if slope.abs() <= 1e-14 * (g.coeffs()[0].abs() + g.coeffs()[1].abs()) {
                    continue;
                }
                let s = -g.eval(&p0) / slope;
                let tol = 1e-12 * (1.0 + s.abs());
                if s >= lo - tol && s <= hi + tol {
                    breaks.push(s.clamp(lo, hi));
                }
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs()));
            let mut knots = vec![lo];
            knots.extend(breaks.iter().copied());
            knots.push(hi);
            for w in knots.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b - a <= 1e-9 * (1.0 + a.abs().max(b.abs())) {
                    continue;
                }
                let mid = at(p0, d, 0.5 * (a + b));
                let mut signs: Vec<Sign> = forms.iter().map(|g| g.sign_at(&mid)).collect();
                signs[k] = Sign::Zero;
                if cells.iter().any(|c: &Cell| c.signs == signs) {
                    continue;
                }
                let extra = [0.25, 0.75]
                    .iter()
                    .map(|q| at(p0, d, a + q * (b - a)).to_vec())
                    .collect();
                cells.push(Cell {
                    signs,
                    dim: 1,
                    sample: mid.to_vec(),
                    extra,
                });
            }
            for &s in &breaks {
                let p = at(p0, d, s);
                let mut signs = zero_signs(&p, 1e-9);
                signs[k] = Sign::Zero;
                if !cells.iter().any(|c| c.signs == signs) {
                    cells.push(Cell {
                        signs,
                        dim: 0,
                        sample: p.to_vec(),
                        extra: vec![],
                    });
                }
            }
        }
        Arrangement { dim: 2, cells, window }
    }
}

/// Deterministic sample points on the graph of `forms[k]` inside `bbox` and
/// the domain, skipping `exclusion`-neighborhoods of crossings with the other
/// forms. Points come from a base-2 van der Corput sequence along the line.
pub fn line_samples(
    forms: &[AffineForm],
    k: usize,
    domain: &[AffineForm],
    bbox: &[(f64, f64)],
    count: usize,
    exclusion: f64,
) -> Vec<Vec<f64>> {
    let f = &forms[k];
    if f.dim() == 1 {
        let z = f.offset() / f.coeffs()[0];
        let inside = z >= bbox[0].0 && z <= bbox[0].1 && domain.iter().all(|g| g.eval(&[z]) >= -1e-12);
        return if inside { vec![vec![z]] } else { vec![] };
    }
    let (p0, d) = line_frame(f);
    let Some((lo, hi)) = clip_line(p0, d, bbox, domain) else {
        return vec![];
    };
    let crossings: Vec<f64> = forms
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .filter_map(|(_, g)| {
            let slope = g.coeffs()[0] * d[0] + g.coeffs()[1] * d[1];
            (slope.abs() > 1e-14).then(|| -g.eval(&p0) / slope)
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut n = 1u32;
    while out.len() < count && n < 64 * count as u32 + 64 {
        let s = lo + vdc(n) * (hi - lo);
        n += 1;
        if crossings.iter().any(|c| (s - c).abs() < exclusion) {
            continue;
        }
        if s - lo < exclusion || hi - s < exclusion {
            continue;
        }
        out.push(at(p0, d, s).to_vec());
    }
    out
}
