//! Closed-form real/complex root finding for quadratics, cubics, and
//! quartics, plus the two-ellipse intersection kernel.
//!
//! Everything stays within the closed-form arithmetic budget (square roots,
//! cube roots, ATAN2 downstream); each root gets one Newton polish step
//! against the original polynomial to tighten residuals.

use std::fmt;

use arrayvec::ArrayVec;
use num_complex::Complex64;

/// A root is flagged real when `|Im| ≤ REAL_TOL · (1 + |Re|)`.
pub const REAL_TOL: f64 = 1e-8;
/// Leading coefficients at or below `DEGEN_TOL · max|cᵢ|` are treated as zero.
pub const DEGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum PolyError {
    IdenticallyZero,
    /// The two conics coincide; every point of one lies on the other.
    ContinuumOfIntersections,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::IdenticallyZero => write!(f, "identically zero polynomial"),
            PolyError::ContinuumOfIntersections => write!(f, "continuum of intersections"),
        }
    }
}

impl std::error::Error for PolyError {}

/// `c[0]·x⁴ + c[1]·x³ + c[2]·x² + c[3]·x + c[4]`; the leading coefficients
/// may be zero, signaling degree degeneration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartic {
    pub c: [f64; 5],
}

impl Quartic {
    pub fn new(c: [f64; 5]) -> Self {
        Quartic { c }
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.c[0], 0.0);
        for &c in &self.c[1..] {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_deriv(&self, x: Complex64) -> Complex64 {
        let d = [4.0 * self.c[0], 3.0 * self.c[1], 2.0 * self.c[2], self.c[3]];
        let mut acc = Complex64::new(d[0], 0.0);
        for &c in &d[1..] {
            acc = acc * x + c;
        }
        acc
    }

    pub fn max_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub is_real: bool,
}

/// Up to four roots; complex roots occur in conjugate pairs.
#[derive(Debug, Clone, Default)]
pub struct RootSet {
    pub roots: ArrayVec<Root, 4>,
}

impl RootSet {
    pub fn real_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().filter(|r| r.is_real).map(|r| r.value.re)
    }

    /// One representative (the `Im ≥ 0` member) per complex-conjugate pair.
    pub fn complex_pair_reps(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .filter(|r| !r.is_real && r.value.im > 0.0)
            .map(|r| r.value)
    }

    fn push(&mut self, value: Complex64) {
        let is_real = value.im.abs() <= REAL_TOL * (1.0 + value.re.abs());
        let value = if is_real {
            Complex64::new(value.re, 0.0)
        } else {
            value
        };
        self.roots.push(Root { value, is_real });
    }
}

fn solve_monic_quadratic(b: f64, c: f64, out: &mut RootSet) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = if b >= 0.0 { -(b + sq) / 2.0 } else { (-b + sq) / 2.0 };
        if q == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
            out.push(Complex64::new(-b, 0.0));
        } else {
            out.push(Complex64::new(q, 0.0));
            out.push(Complex64::new(c / q, 0.0));
        }
    } else {
        let re = -b / 2.0;
        let im = (-disc).sqrt() / 2.0;
        out.push(Complex64::new(re, im));
        out.push(Complex64::new(re, -im));
    }
}

/// Real roots only; a monic cubic always has at least one.
fn monic_cubic_real_roots(b: f64, c: f64, d: f64) -> ArrayVec<f64, 3> {
    let mut out = ArrayVec::new();
    // depressed: t = x + b/3, t³ + p t + q
    let p = c - b * b / 3.0;
    let q = d - b * c / 3.0 + 2.0 * b * b * b / 27.0;
    let shift = -b / 3.0;
    if p == 0.0 && q == 0.0 {
        out.push(shift);
        return out;
    }
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        out.push(u + v + shift);
    } else {
        // three real roots (p < 0 here)
        let r = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for k in 0..3 {
            let ang = phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            out.push(r * ang.cos() + shift);
        }
    }
    out
}

fn solve_monic_cubic(b: f64, c: f64, d: f64, out: &mut RootSet) {
    let p = c - b * b / 3.0;
    let q = d - b * c / 3.0 + 2.0 * b * b * b / 27.0;
    let shift = -b / 3.0;
    if p == 0.0 && q == 0.0 {
        for _ in 0..3 {
            out.push(Complex64::new(shift, 0.0));
        }
        return;
    }
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        let s = u + v;
        out.push(Complex64::new(s + shift, 0.0));
        let re = -s / 2.0 + shift;
        let im = 3f64.sqrt() / 2.0 * (u - v);
        out.push(Complex64::new(re, im));
        out.push(Complex64::new(re, -im));
    } else {
        let r = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for k in 0..3 {
            let ang = phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            out.push(Complex64::new(r * ang.cos() + shift, 0.0));
        }
    }
}

/// Monic depressed quartic `y⁴ + p y² + q y + r` via Ferrari's resolvent.
fn solve_depressed_quartic(p: f64, q: f64, r: f64, out: &mut RootSet) {
    let scale = p.abs().max(q.abs()).max(r.abs()).max(1.0);
    if q.abs() <= 1e-14 * scale {
        // biquadratic in y²
        let mut inner = RootSet::default();
        solve_monic_quadratic(p, r, &mut inner);
        for root in &inner.roots {
            let s = root.value.sqrt();
            out.push(s);
            out.push(-s);
        }
        return;
    }
    // resolvent: m³ + p m² + (p²/4 − r) m − q²/8 = 0; take the largest real
    // root, which is positive since the product of roots is q²/8 > 0.
    let roots = monic_cubic_real_roots(p, p * p / 4.0 - r, -q * q / 8.0);
    let m = roots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m = m.max(1e-300);
    let alpha = (2.0 * m).sqrt();
    let beta = q / (2.0 * alpha);
    solve_monic_quadratic(-alpha, p / 2.0 + m + beta, out);
    solve_monic_quadratic(alpha, p / 2.0 + m - beta, out);
}

/// All roots of the (possibly degenerated) polynomial, each polished by one
/// Newton step against the original coefficients.
pub fn solve_quartic(q: &Quartic) -> Result<RootSet, PolyError> {
    let scale = q.max_coeff();
    if scale == 0.0 {
        return Err(PolyError::IdenticallyZero);
    }
    let cutoff = DEGEN_TOL * scale;
    let c = &q.c;
    let mut roots = RootSet::default();
    if c[0].abs() > cutoff {
        // a small leading coefficient (huge root) ruins the monic form;
        // solve the reversed polynomial for 1/x instead
        let reversed = c[4].abs() > c[0].abs();
        let c = if reversed {
            [c[4], c[3], c[2], c[1], c[0]]
        } else {
            *c
        };
        let (b, cc, d, e) = (c[1] / c[0], c[2] / c[0], c[3] / c[0], c[4] / c[0]);
        // depress: x = y − b/4
        let b2 = b * b;
        let p = cc - 3.0 * b2 / 8.0;
        let qq = d - b * cc / 2.0 + b2 * b / 8.0;
        let r = e - b * d / 4.0 + b2 * cc / 16.0 - 3.0 * b2 * b2 / 256.0;
        let mut depressed = RootSet::default();
        solve_depressed_quartic(p, qq, r, &mut depressed);
        for root in &depressed.roots {
            let x = root.value - b / 4.0;
            roots.push(if reversed { x.inv() } else { x });
        }
    } else if c[1].abs() > cutoff {
        solve_monic_cubic(c[2] / c[1], c[3] / c[1], c[4] / c[1], &mut roots);
    } else if c[2].abs() > cutoff {
        solve_monic_quadratic(c[3] / c[2], c[4] / c[2], &mut roots);
    } else if c[3].abs() > cutoff {
        roots.push(Complex64::new(-c[4] / c[3], 0.0));
    } else {
        // constant, nonzero: no roots
        return Ok(roots);
    }

    let mut polished = RootSet::default();
    for root in &roots.roots {
        let x = root.value;
        let df = q.eval_deriv(x);
        let mut next = x;
        if df.norm() > 0.0 {
            let step = q.eval(x) / df;
            if step.norm() <= 1.0 + x.norm() {
                next = x - step;
            }
        }
        polished.push(next);
    }
    Ok(polished)
}

/// Conic `xx·ξ₁² + xy·ξ₁ξ₂ + yy·ξ₂² + x·ξ₁ + y·ξ₂ + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conic {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl Conic {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.xx * x1 * x1 + self.xy * x1 * x2 + self.yy * x2 * x2 + self.x * x1 + self.y * x2 + self.c
    }

    /// Positive-definite quadratic part, i.e. a genuine (possibly empty) ellipse.
    pub fn is_ellipse(&self) -> bool {
        self.xx > 0.0 && 4.0 * self.xx * self.yy - self.xy * self.xy > 0.0
    }

    fn coeffs(&self) -> [f64; 6] {
        [self.xx, self.xy, self.yy, self.x, self.y, self.c]
    }

    fn max_coeff(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Two conics over shared unknowns `(ξ₁, ξ₂)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipsePair {
    pub a: Conic,
    pub b: Conic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicPoint {
    pub x1: f64,
    pub x2: f64,
    /// Real part of a complex intersection; satisfies neither conic exactly.
    pub approx: bool,
}

/// Eliminates ξ₂ by the resultant of the two conics viewed as quadratics in
/// ξ₂, giving the quartic in ξ₁.
pub fn elimination_quartic(pair: &EllipsePair) -> Quartic {
    let a = &pair.a;
    let b = &pair.b;
    // conic as aq·ξ₂² + (bq₁·ξ₁ + bq₀)·ξ₂ + (cq₂·ξ₁² + cq₁·ξ₁ + cq₀)
    let (a1, b11, b10, c12, c11, c10) = (a.yy, a.xy, a.y, a.xx, a.x, a.c);
    let (a2, b21, b20, c22, c21, c20) = (b.yy, b.xy, b.y, b.xx, b.x, b.c);
    // u = a1·C2 − a2·C1 (quadratic), v = a1·B2 − a2·B1 (linear),
    // w = B1·C2 − B2·C1 (cubic); resultant = u² − v·w
    let u2 = a1 * c22 - a2 * c12;
    let u1 = a1 * c21 - a2 * c11;
    let u0 = a1 * c20 - a2 * c10;
    let v1 = a1 * b21 - a2 * b11;
    let v0 = a1 * b20 - a2 * b10;
    let w3 = b11 * c22 - b21 * c12;
    let w2 = b11 * c21 + b10 * c22 - (b21 * c11 + b20 * c12);
    let w1 = b11 * c20 + b10 * c21 - (b21 * c10 + b20 * c11);
    let w0 = b10 * c20 - b20 * c10;
    Quartic::new([
        u2 * u2 - v1 * w3,
        2.0 * u2 * u1 - (v1 * w2 + v0 * w3),
        u1 * u1 + 2.0 * u2 * u0 - (v1 * w1 + v0 * w2),
        2.0 * u1 * u0 - (v1 * w0 + v0 * w1),
        u0 * u0 - v0 * w0,
    ])
}

fn quadratic_in_x2(conic: &Conic, x1: f64) -> (f64, f64, f64) {
    (
        conic.yy,
        conic.xy * x1 + conic.y,
        conic.xx * x1 * x1 + conic.x * x1 + conic.c,
    )
}

/// Newton iteration on the pair of conic equations; recovers the digits the
/// resultant elimination loses.
fn refine_intersection(pair: &EllipsePair, mut x1: f64, mut x2: f64) -> (f64, f64) {
    for _ in 0..3 {
        let f1 = pair.a.eval(x1, x2);
        let f2 = pair.b.eval(x1, x2);
        let j11 = 2.0 * pair.a.xx * x1 + pair.a.xy * x2 + pair.a.x;
        let j12 = pair.a.xy * x1 + 2.0 * pair.a.yy * x2 + pair.a.y;
        let j21 = 2.0 * pair.b.xx * x1 + pair.b.xy * x2 + pair.b.x;
        let j22 = pair.b.xy * x1 + 2.0 * pair.b.yy * x2 + pair.b.y;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-14 {
            break;
        }
        let dx1 = (f1 * j22 - f2 * j12) / det;
        let dx2 = (j11 * f2 - j21 * f1) / det;
        if !(dx1.is_finite() && dx2.is_finite())
            || dx1.abs().max(dx2.abs()) > 0.5 * (1.0 + x1.abs() + x2.abs())
        {
            break;
        }
        x1 -= dx1;
        x2 -= dx2;
    }
    (x1, x2)
}

/// ξ₂ candidates at a given ξ₁: real roots of both conics' quadratics, plus
/// real parts of complex roots when `approx` is set.
fn x2_candidates(pair: &EllipsePair, x1: f64, approx: bool) -> ArrayVec<f64, 8> {
    let mut out = ArrayVec::new();
    for conic in [&pair.a, &pair.b] {
        let (qa, qb, qc) = quadratic_in_x2(conic, x1);
        let scale = qa.abs().max(qb.abs()).max(qc.abs());
        if scale == 0.0 {
            continue;
        }
        if qa.abs() <= DEGEN_TOL * scale {
            if qb.abs() > DEGEN_TOL * scale {
                let _ = out.try_push(-qc / qb);
            }
            continue;
        }
        let mut rs = RootSet::default();
        solve_monic_quadratic(qb / qa, qc / qa, &mut rs);
        for r in &rs.roots {
            if r.is_real || approx {
                let _ = out.try_push(r.value.re);
            }
        }
    }
    out
}

/// All intersections of two non-degenerate conics. In continuous mode,
/// complex-conjugate quartic root pairs contribute their real part, flagged
/// approximate.
pub fn intersect_ellipses(
    pair: &EllipsePair,
    continuous: bool,
) -> Result<ArrayVec<ConicPoint, 4>, PolyError> {
    let ca = pair.a.coeffs();
    let cb = pair.b.coeffs();
    let na: f64 = ca.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = cb.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dot: f64 = ca.iter().zip(&cb).map(|(p, q)| p * q).sum();
    if na > 0.0 && nb > 0.0 && na * nb - dot.abs() <= 1e-12 * na * nb {
        return Err(PolyError::ContinuumOfIntersections);
    }

    let quartic = elimination_quartic(pair);
    let roots = solve_quartic(&quartic)?;
    let coeff_scale = pair.a.max_coeff() + pair.b.max_coeff();
    let mut out: ArrayVec<ConicPoint, 4> = ArrayVec::new();

    let push_approx = |x1: f64, out: &mut ArrayVec<ConicPoint, 4>| {
        // keep the candidate minimizing the worse of the two residuals
        let candidates = x2_candidates(pair, x1, true);
        let best = candidates.iter().cloned().min_by(|&p, &q| {
            let rp = pair.a.eval(x1, p).abs().max(pair.b.eval(x1, p).abs());
            let rq = pair.a.eval(x1, q).abs().max(pair.b.eval(x1, q).abs());
            rp.total_cmp(&rq)
        });
        if let Some(x2) = best {
            push_dedup(out, ConicPoint { x1, x2, approx: true });
        }
    };

    for x1 in roots.real_values() {
        let mut any_exact = false;
        // complex-pair real parts also seed the refinement: near a tangency
        // the raw quartic root can sit on the wrong side of the boundary
        for &x2 in &x2_candidates(pair, x1, true) {
            let (x1r, x2r) = refine_intersection(pair, x1, x2);
            let tol = 1e-8 * coeff_scale * (1.0 + x1r.abs().max(x2r.abs())).powi(2);
            let resid = pair.a.eval(x1r, x2r).abs().max(pair.b.eval(x1r, x2r).abs());
            if resid <= tol {
                push_dedup(&mut out, ConicPoint { x1: x1r, x2: x2r, approx: false });
                any_exact = true;
            }
        }
        // a real ξ₁ whose ξ₂ went complex still contributes its real part
        if continuous && !any_exact {
            push_approx(x1, &mut out);
        }
    }
    if continuous {
        for rep in roots.complex_pair_reps() {
            push_approx(rep.re, &mut out);
        }
    }
    Ok(out)
}

fn push_dedup(out: &mut ArrayVec<ConicPoint, 4>, p: ConicPoint) {
    let tol = 1e-7 * (1.0 + p.x1.abs() + p.x2.abs());
    for q in out.iter() {
        if (q.x1 - p.x1).abs() <= tol && (q.x2 - p.x2).abs() <= tol {
            return;
        }
    }
    let _ = out.try_push(p);
}
