//! The six canonical geometric subproblems.
//!
//! | # | geometry          | unknowns | solutions |
//! |---|-------------------|----------|-----------|
//! | 1 | circle and point  | θ        | 1 (exact or LS) |
//! | 2 | two circles       | θ₁, θ₂   | ≤2 exact, or LS |
//! | 3 | circle and sphere | θ        | ≤2 exact, or 1 LS |
//! | 4 | circle and plane  | θ        | ≤2 exact, or 1 LS |
//! | 5 | three circles     | θ₁,θ₂,θ₃ | ≤4 |
//! | 6 | four circles      | θ₁, θ₂   | ≤4 |
//!
//! Subproblems 2 and 3 reduce to Subproblem 4. Subproblems 5 and 6 reduce to
//! intersecting two ellipses via a quartic; when a solution branch has no
//! exact solution they return the real part of the complex root pair, which
//! keeps the output continuous in the inputs. Subproblems 1–4 return
//! least-squares solutions instead.

use std::fmt;

use arrayvec::ArrayVec;
use nalgebra::{Matrix2, Vector2, Vector4};

use crate::geom::{angle_from_x, hat, linearize, rot, wrap_to_pi, TrigVec, UnitVec3, Vec3};

/// A branch is exact when its defining residual is at most
/// `EXACT_TOL · (1 + input magnitudes)`.
pub const EXACT_TOL: f64 = 1e-8;
/// `‖k × p‖ ≤ COLLINEAR_TOL · ‖p‖` means the circle radius is numerically zero.
pub const COLLINEAR_TOL: f64 = 1e-10;
/// Branches whose angles all agree within this (wrapped) are merged.
pub const DEDUP_TOL: f64 = 1e-7;
/// Coplanarity cutoff for the Subproblem 5 degenerate dispatch.
pub const COPLANAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SubproblemError {
    /// The solution set is a two-or-more parameter family; no discrete
    /// representative is meaningful.
    ContinuumOfSolutions { detail: String },
}

impl fmt::Display for SubproblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubproblemError::ContinuumOfSolutions { detail } => {
                write!(f, "continuum of solutions: {detail}")
            }
        }
    }
}

impl std::error::Error for SubproblemError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBranch<const N: usize> {
    pub angles: [f64; N],
    /// Least-squares / approximate branch (no exact solution).
    pub is_ls: bool,
}

/// Solution set of one subproblem call. Angles are wrapped to `[−π, π]`,
/// branches deduplicated and sorted lexicographically.
#[derive(Debug, Clone, Default)]
pub struct AngleSolutions<const N: usize> {
    pub branches: ArrayVec<AngleBranch<N>, 4>,
    /// Some angle is arbitrary (internal singularity); branches hold the
    /// zero-angle representative.
    pub is_continuum: bool,
}

pub type Solutions1 = AngleSolutions<1>;
pub type Solutions2 = AngleSolutions<2>;
pub type Solutions3 = AngleSolutions<3>;

impl<const N: usize> AngleSolutions<N> {
    pub fn push(&mut self, mut angles: [f64; N], is_ls: bool) {
        for a in &mut angles {
            *a = wrap_to_pi(*a);
        }
        for existing in &mut self.branches {
            if existing
                .angles
                .iter()
                .zip(&angles)
                .all(|(a, b)| crate::geom::angle_diff(*a, *b) <= DEDUP_TOL)
            {
                // exact wins over least-squares on merge
                existing.is_ls &= is_ls;
                return;
            }
        }
        if self.branches.try_push(AngleBranch { angles, is_ls }).is_err() {
            debug_assert!(false, "solution count above subproblem maximum");
        }
    }

    pub fn sort(&mut self) {
        self.branches.sort_by(|a, b| {
            a.angles
                .iter()
                .zip(&b.angles)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    pub fn any_exact(&self) -> bool {
        self.branches.iter().any(|b| !b.is_ls)
    }

    pub fn is_ls(&self) -> bool {
        !self.branches.is_empty() && self.branches.iter().all(|b| b.is_ls)
    }
}

fn collinear(k: &UnitVec3, p: &Vec3) -> bool {
    k.cross(p).norm() <= COLLINEAR_TOL * p.norm()
}

/// Subproblem 1, circle and point: θ minimizing `‖R(k,θ)p₁ − p₂‖`.
///
/// Exact iff `p₂` lies on the circle (`‖p₁‖ = ‖p₂‖` and `kᵀp₁ = kᵀp₂`).
/// Collinear `(k,p₁)` or `(k,p₂)` makes θ arbitrary.
pub fn sp1(p1: &Vec3, p2: &Vec3, k: &UnitVec3) -> Solutions1 {
    let mut out = Solutions1::default();
    let scale = 1.0 + p1.norm() + p2.norm();
    let tol = EXACT_TOL * scale;
    if collinear(k, p1) || collinear(k, p2) {
        out.is_continuum = true;
        out.push([0.0], (p1 - p2).norm() > tol);
        return out;
    }
    let kxp1 = k.cross(p1);
    let planar1 = p1 - k.as_vec() * k.dot(p1);
    let theta = kxp1.dot(p2).atan2(planar1.dot(p2));
    let is_ls = (p1.norm() - p2.norm()).abs() > tol || (k.dot(p1) - k.dot(p2)).abs() > tol;
    out.push([theta], is_ls);
    out
}

/// Subproblem 4, circle and plane: θ minimizing `|hᵀR(k,θ)p − d|`.
///
/// `h` need not be a unit vector. Two solutions when the plane cuts the
/// circle, one at tangency, one least-squares otherwise.
pub fn sp4(h: &Vec3, p: &Vec3, k: &UnitVec3, d: f64) -> Solutions1 {
    let mut out = Solutions1::default();
    let scale = 1.0 + d.abs() + h.norm() * p.norm();
    let tol = EXACT_TOL * scale;
    let h_degenerate = h.norm() == 0.0 || h.cross(k).norm() <= COLLINEAR_TOL * h.norm();
    if collinear(k, p) || h_degenerate {
        out.is_continuum = true;
        out.push([0.0], (h.dot(p) - d).abs() > tol);
        return out;
    }
    // hᵀR(k,θ)p = hᵀkkᵀp + a·x with a = hᵀ[k×p, −(k×)²p]
    let a = Vector2::new(h.dot(&k.cross(p)), h.dot(&(p - k.as_vec() * k.dot(p))));
    let b = d - h.dot(k) * k.dot(p);
    let n2 = a.norm_squared();
    if n2 == 0.0 {
        out.is_continuum = true;
        out.push([0.0], (h.dot(p) - d).abs() > tol);
        return out;
    }
    let disc = n2 - b * b;
    if disc > 0.0 {
        let root = disc.sqrt();
        let ja = Vector2::new(a.y, -a.x);
        for sign in [1.0, -1.0] {
            let x = a * b + sign * root * ja;
            out.push([angle_from_x(&x)], false);
        }
    } else {
        // tangent or no intersection; x_min direction, normalization skipped
        let x = a * b;
        let residual = (b.abs() - n2.sqrt()).abs();
        out.push([angle_from_x(&x)], residual > tol);
    }
    out.sort();
    out
}

/// Subproblem 3, circle and sphere: θ minimizing `|‖R(k,θ)p₁ − p₂‖ − d|`
/// for nonnegative `d`. Reduces to Subproblem 4 by the law of cosines;
/// `d = 0` recovers Subproblem 1.
pub fn sp3(p1: &Vec3, p2: &Vec3, k: &UnitVec3, d: f64) -> Solutions1 {
    let mut out = Solutions1::default();
    let scale = 1.0 + p1.norm() + p2.norm() + d.abs();
    let tol = EXACT_TOL * scale;
    if collinear(k, p1) || collinear(k, p2) {
        out.is_continuum = true;
        out.push([0.0], ((p1 - p2).norm() - d).abs() > tol);
        return out;
    }
    let d_plane = 0.5 * (p1.norm_squared() + p2.norm_squared() - d * d);
    let inner = sp4(p2, p1, k, d_plane);
    out.is_continuum = inner.is_continuum;
    for branch in &inner.branches {
        let theta = branch.angles[0];
        let residual = ((rot(k, theta).apply(p1) - p2).norm() - d).abs();
        out.push([theta], residual > tol);
    }
    out.sort();
    out
}

/// Subproblem 2, two circles: `(θ₁, θ₂)` minimizing
/// `‖R(k₁,θ₁)p₁ − R(k₂,θ₂)p₂‖`.
///
/// The minimizer is independent of the vector norms, so both are normalized
/// before projecting each circle onto the other circle's plane (two
/// Subproblem 4 calls). Collinear `(k₁,p₁)`, `(k₂,p₂)`, or `(k₁,k₂)` reduce
/// to Subproblem 1 with one angle (or a combination) arbitrary.
pub fn sp2(p1: &Vec3, p2: &Vec3, k1: &UnitVec3, k2: &UnitVec3) -> Solutions2 {
    let mut out = Solutions2::default();
    let scale = 1.0 + p1.norm() + p2.norm();
    let tol = EXACT_TOL * scale;
    let residual = |t1: f64, t2: f64| (rot(k1, t1).apply(p1) - rot(k2, t2).apply(p2)).norm();

    if collinear(k1, p1) {
        let inner = sp1(p2, p1, k2);
        out.is_continuum = true;
        for b in &inner.branches {
            out.push([0.0, b.angles[0]], residual(0.0, b.angles[0]) > tol);
        }
        return out;
    }
    if collinear(k2, p2) {
        let inner = sp1(p1, p2, k1);
        out.is_continuum = true;
        for b in &inner.branches {
            out.push([b.angles[0], 0.0], residual(b.angles[0], 0.0) > tol);
        }
        return out;
    }
    if k1.cross(k2.as_vec()).norm() <= COLLINEAR_TOL {
        // axes collinear: θ₁ ∓ θ₂ arbitrary
        let inner = sp1(p1, p2, k1);
        out.is_continuum = true;
        for b in &inner.branches {
            out.push([b.angles[0], 0.0], residual(b.angles[0], 0.0) > tol);
        }
        return out;
    }

    let p1n = p1 / p1.norm();
    let p2n = p2 / p2.norm();
    let sols1 = sp4(k2.as_vec(), &p1n, k1, k2.dot(&p2n));
    let sols2 = sp4(k1.as_vec(), &p2n, k2, k1.dot(&p1n));
    let t1: ArrayVec<f64, 2> = sols1.branches.iter().map(|b| b.angles[0]).collect();
    let t2: ArrayVec<f64, 2> = sols2.branches.iter().map(|b| b.angles[0]).collect();

    let mut pairs: ArrayVec<(f64, f64), 2> = ArrayVec::new();
    match (t1.len(), t2.len()) {
        (2, 2) => {
            // match the two branch orders by residual, re-pairing if the
            // swapped assignment wins
            let rn = |a: f64, b: f64| (rot(k1, a).apply(&p1n) - rot(k2, b).apply(&p2n)).norm();
            let straight = rn(t1[0], t2[0]).max(rn(t1[1], t2[1]));
            let swapped = rn(t1[0], t2[1]).max(rn(t1[1], t2[0]));
            if swapped < straight {
                pairs.push((t1[0], t2[1]));
                pairs.push((t1[1], t2[0]));
            } else {
                pairs.push((t1[0], t2[0]));
                pairs.push((t1[1], t2[1]));
            }
        }
        // counts can differ near tangency; duplicate the single solution
        (2, 1) => {
            pairs.push((t1[0], t2[0]));
            pairs.push((t1[1], t2[0]));
        }
        (1, 2) => {
            pairs.push((t1[0], t2[0]));
            pairs.push((t1[0], t2[1]));
        }
        (1, 1) => pairs.push((t1[0], t2[0])),
        _ => {}
    }
    for (a, b) in pairs {
        out.push([a, b], residual(a, b) > tol);
    }
    out.sort();
    out
}

/// Writes `p = a·u + b·v` for non-parallel unit vectors; the residual is the
/// out-of-plane component.
fn decompose_on_axes(p: &Vec3, u: &UnitVec3, v: &UnitVec3) -> (f64, f64, f64) {
    let uv = u.dot(v.as_vec());
    let det = 1.0 - uv * uv;
    let (pu, pv) = (u.dot(p), v.dot(p));
    let a = (pu - uv * pv) / det;
    let b = (pv - uv * pu) / det;
    let residual = (p - a * u.as_vec() - b * v.as_vec()).norm();
    (a, b, residual)
}

/// Subproblem 2 with an offset between the circle axes:
/// `p₀ + R(k₁,θ₁)p₁ = R(k₂,θ₂)p₂`.
///
/// Intersecting axes move the offset onto `p₁`/`p₂` and reduce to
/// Subproblem 2; parallel axes use Subproblems 3 and 1 (with a projected
/// least-squares variant); genuinely skew axes admit at most one solution,
/// cross-checked for extraneous candidates — an empty set is a valid outcome.
pub fn sp2_extended(
    p0: &Vec3,
    p1: &Vec3,
    p2: &Vec3,
    k1: &UnitVec3,
    k2: &UnitVec3,
) -> Solutions2 {
    let mut out = Solutions2::default();
    let scale = 1.0 + p0.norm() + p1.norm() + p2.norm();
    let tol = EXACT_TOL * scale;
    let residual = |t1: f64, t2: f64| (p0 + rot(k1, t1).apply(p1) - rot(k2, t2).apply(p2)).norm();

    if p0.norm() <= 1e-12 * scale {
        return sp2(p1, p2, k1, k2);
    }
    if collinear(k1, p1) {
        let target = p0 + p1;
        let inner = sp1(p2, &target, k2);
        out.is_continuum = true;
        for b in &inner.branches {
            out.push([0.0, b.angles[0]], residual(0.0, b.angles[0]) > tol);
        }
        return out;
    }
    if collinear(k2, p2) {
        let target = p2 - p0;
        let inner = sp1(p1, &target, k1);
        out.is_continuum = true;
        for b in &inner.branches {
            out.push([b.angles[0], 0.0], residual(b.angles[0], 0.0) > tol);
        }
        return out;
    }

    if k1.cross(k2.as_vec()).norm() <= COLLINEAR_TOL {
        // parallel axes; fold the ±k₂ sign into θ₂
        let sign = if k1.dot(k2.as_vec()) >= 0.0 { 1.0 } else { -1.0 };
        let axial = k1.dot(&(p0 + p1 - p2));
        let ls_forced = axial.abs() > tol;
        let kx2 = {
            let kx = hat(k1.as_vec());
            kx * kx
        };
        // exact solutions need kᵀ(p₀+p₁−p₂)=0; otherwise project everything
        // onto the circle plane and solve there, flagging least-squares
        let (q0, q1, q2) = if ls_forced {
            (-(kx2 * p0), -(kx2 * p1), -(kx2 * p2))
        } else {
            (*p0, *p1, *p2)
        };
        let sols = sp3(&q1, &(-q0), k1, q2.norm());
        out.is_continuum = sols.is_continuum;
        for b in &sols.branches {
            let t1 = b.angles[0];
            let reached = q0 + rot(k1, t1).apply(&q1);
            let inner = sp1(&q2, &reached, k2);
            out.is_continuum |= inner.is_continuum;
            for ib in &inner.branches {
                let t2 = sign * ib.angles[0];
                out.push([t1, t2], ls_forced || residual(t1, t2) > tol);
            }
        }
        out.sort();
        return out;
    }

    let triple = p0.dot(&k1.cross(k2.as_vec()));
    if triple.abs() <= COPLANAR_TOL * scale {
        // axes intersect: move the axis components of p₀ onto p₁ and p₂
        let (a, b, _) = decompose_on_axes(p0, k1, k2);
        return sp2(&(p1 + a * k1.as_vec()), &(p2 - b * k2.as_vec()), k1, k2);
    }

    // skew axes: project onto k₂ for θ₁ (Subproblem 4), then Subproblem 1
    // for θ₂; keep only candidates where both stages are exact
    let cands = sp4(k2.as_vec(), p1, k1, k2.dot(&(p2 - p0)));
    for cand in &cands.branches {
        if cand.is_ls {
            continue;
        }
        let t1 = cand.angles[0];
        let target = p0 + rot(k1, t1).apply(p1);
        let inner = sp1(p2, &target, k2);
        for ib in &inner.branches {
            if ib.is_ls {
                continue;
            }
            let t2 = ib.angles[0];
            if residual(t1, t2) <= tol {
                out.push([t1, t2], false);
            }
        }
    }
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// Subproblem 5
// ---------------------------------------------------------------------------

/// Degree-4 polynomial arithmetic over ascending coefficients with Neumaier
/// compensated accumulation; the Subproblem 5 quartic suffers cancellation
/// for long links otherwise.
#[derive(Debug, Clone, Copy)]
struct Poly4([f64; 5]);

impl Poly4 {

    fn from_linear(c0: f64, c1: f64) -> Self {
        Poly4([c0, c1, 0.0, 0.0, 0.0])
    }

    fn from_quadratic(c0: f64, c1: f64, c2: f64) -> Self {
        Poly4([c0, c1, c2, 0.0, 0.0])
    }

    fn mul(&self, other: &Poly4) -> Poly4 {
        let mut out = [0.0; 5];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut comp = 0.0;
            for i in 0..=k {
                let term = self.0[i] * other.0[k - i];
                let t = sum + term;
                comp += if sum.abs() >= term.abs() {
                    (sum - t) + term
                } else {
                    (term - t) + sum
                };
                sum = t;
            }
            *slot = sum + comp;
        }
        Poly4(out)
    }

    fn add_scaled(&self, other: &Poly4, factor: f64) -> Poly4 {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = self.0[i] + factor * other.0[i];
        }
        Poly4(out)
    }

    fn descending(&self) -> [f64; 5] {
        [self.0[4], self.0[3], self.0[2], self.0[1], self.0[0]]
    }
}

/// Per-circle data for Subproblem 5: the shifted center, plane basis, and the
/// ellipse-equation coefficients as functions of the height `z` along `k₂`.
struct Sp5Circle {
    shifted_center: Vec3,
    lin: crate::geom::CircleLinearization,
    /// `A_{k,p}ᵀ k₂`
    v: Vector2<f64>,
    v_norm2: f64,
    /// `k₂ᵀ p_S`
    delta: f64,
    alpha: f64,
    beta: f64,
    /// linear part `P(z)`
    p_poly: Poly4,
    /// radical part `R(z) = 4β²(W − (z−δ)²)`
    r_poly: Poly4,
}

impl Sp5Circle {
    /// `offset + R(k,θ)p` viewed from axis `k₂`; `offset` is `p₀` or `p₂`.
    fn new(offset: &Vec3, p: &Vec3, k: &UnitVec3, k2: &UnitVec3) -> Option<Self> {
        let lin = linearize(k, p);
        let shifted_center = offset + lin.center;
        let v = lin.basis.transpose() * k2.as_vec();
        let v_norm2 = v.norm_squared();
        let kxk2 = k.cross(k2.as_vec());
        let kxk2_n2 = kxk2.norm_squared();
        if kxk2_n2 <= COLLINEAR_TOL * COLLINEAR_TOL {
            return None; // axis parallel to k₂; handled by the coplanar path
        }
        let kx = hat(k.as_vec());
        let alpha = offset.dot(&(kx * kx * k2.as_vec())) / kxk2_n2;
        let beta = offset.dot(&kxk2) / kxk2_n2;
        let delta = k2.dot(&shifted_center);
        let radius2 = lin.radius() * lin.radius();
        let c = radius2 + shifted_center.norm_squared() + 2.0 * alpha * delta;
        let p_poly = Poly4::from_linear(c, -2.0 * alpha);
        let w = radius2 * kxk2_n2;
        let r_poly = Poly4::from_quadratic(
            4.0 * beta * beta * (w - delta * delta),
            8.0 * beta * beta * delta,
            -4.0 * beta * beta,
        );
        Some(Sp5Circle {
            shifted_center,
            lin,
            v,
            v_norm2,
            delta,
            alpha,
            beta,
            p_poly,
            r_poly,
        })
    }

    /// The two candidate `[sin θ, cos θ]` vectors at height `z`; a negative
    /// radicand clamps to the least-squares direction (non-unit, the caller
    /// flags it).
    fn trig_candidates(&self, z: f64) -> ([TrigVec; 2], bool) {
        let t = z - self.delta;
        let radicand = self.v_norm2 - t * t;
        let clamped = radicand.max(0.0);
        let root = clamped.sqrt();
        let jv = Vector2::new(self.v.y, -self.v.x);
        let base = self.v * t;
        let xs = [
            (base + root * jv) / self.v_norm2,
            (base - root * jv) / self.v_norm2,
        ];
        (xs, radicand < 0.0)
    }

    fn trig_at(&self, z: f64, sign: f64) -> TrigVec {
        let t = z - self.delta;
        let root = (self.v_norm2 - t * t).max(0.0).sqrt();
        let jv = Vector2::new(self.v.y, -self.v.x);
        (self.v * t + sign * root * jv) / self.v_norm2
    }

    fn point(&self, x: &TrigVec) -> Vec3 {
        self.shifted_center + self.lin.basis * x
    }

    /// One ellipse branch `E^σ(z) = P(z) + σ·2β·√(W − (z−δ)²)` and its
    /// derivative; σ is the same trig-candidate sign as in [`Self::trig_at`]
    /// (the signed β keeps that correspondence).
    fn branch_value(&self, z: f64, sign: f64) -> (f64, f64) {
        let p = self.p_poly.0[0] + self.p_poly.0[1] * z;
        let t = z - self.delta;
        let root = (self.v_norm2 - t * t).max(0.0).sqrt();
        let value = p + sign * 2.0 * self.beta * root;
        let deriv = -2.0 * self.alpha
            + if root > 1e-12 {
                sign * 2.0 * self.beta * (-t) / root
            } else {
                0.0
            };
        (value, deriv)
    }
}

/// Newton refinement of a quartic root on the unsquared branch equality
/// `E₁^{σ₁}(z) = E₃^{σ₃}(z)`; the double squaring that produced the quartic
/// costs several digits that this recovers.
fn refine_z(circle1: &Sp5Circle, circle3: &Sp5Circle, z0: f64, s1: f64, s3: f64) -> f64 {
    let mut z = z0;
    for _ in 0..3 {
        let (v1, d1) = circle1.branch_value(z, s1);
        let (v3, d3) = circle3.branch_value(z, s3);
        let g = v1 - v3;
        let dg = d1 - d3;
        if g == 0.0 || dg.abs() < 1e-14 {
            break;
        }
        let step = g / dg;
        if !step.is_finite() || step.abs() > 0.5 * (1.0 + z.abs()) {
            break;
        }
        z -= step;
    }
    z
}

/// Subproblem 5, three circles: all `(θ₁, θ₂, θ₃)` solving
/// `p₀ + R(k₁,θ₁)p₁ = R(k₂,θ₂)(p₂ + R(k₃,θ₃)p₃)`.
///
/// The generic path equates the two height-parameterized ellipse equations
/// into a quartic in the height `z` along `k₂`; complex root pairs yield
/// continuous approximate triples flagged `is_ls`. Coplanar or parallel axis
/// pairs dispatch to the Subproblem 3/2 or 4/3/1 reductions instead.
pub fn sp5(
    p0: &Vec3,
    p1: &Vec3,
    p2: &Vec3,
    p3: &Vec3,
    k1: &UnitVec3,
    k2: &UnitVec3,
    k3: &UnitVec3,
) -> Result<Solutions3, SubproblemError> {
    let scale = 1.0 + p0.norm() + p1.norm() + p2.norm() + p3.norm();
    let tol = EXACT_TOL * scale;
    let residual = |t: &[f64; 3]| {
        (p0 + rot(k1, t[0]).apply(p1)
            - rot(k2, t[1]).apply(&(p2 + rot(k3, t[2]).apply(p3))))
        .norm()
    };
    let guard_continuum = |out: &Solutions3, flags: usize, detail: &str| {
        if flags >= 2 && out.branches.iter().any(|b| !b.is_ls) {
            Err(SubproblemError::ContinuumOfSolutions {
                detail: detail.to_string(),
            })
        } else {
            Ok(())
        }
    };

    if collinear(k1, p1) {
        // θ₁ arbitrary: −p₂ + R(k₂,−θ₂)(p₀+p₁) = R(k₃,θ₃)p₃
        let inner = sp2_extended(&-p2, &(p0 + p1), p3, k2, k3);
        let mut out = Solutions3::default();
        out.is_continuum = true;
        for b in &inner.branches {
            let t = [0.0, -b.angles[0], b.angles[1]];
            out.push(t, residual(&t) > tol);
        }
        guard_continuum(&out, 1 + inner.is_continuum as usize, "circle 1 is a point")?;
        out.sort();
        return Ok(out);
    }
    if collinear(k3, p3) {
        // θ₃ arbitrary: p₀ + R(k₁,θ₁)p₁ = R(k₂,θ₂)(p₂+p₃)
        let inner = sp2_extended(p0, p1, &(p2 + p3), k1, k2);
        let mut out = Solutions3::default();
        out.is_continuum = true;
        for b in &inner.branches {
            let t = [b.angles[0], b.angles[1], 0.0];
            out.push(t, residual(&t) > tol);
        }
        guard_continuum(&out, 1 + inner.is_continuum as usize, "circle 3 is a point")?;
        out.sort();
        return Ok(out);
    }

    let pair12_parallel = k1.cross(k2.as_vec()).norm() <= COLLINEAR_TOL;
    let pair32_parallel = k3.cross(k2.as_vec()).norm() <= COLLINEAR_TOL;
    let pair12_coplanar =
        pair12_parallel || p0.dot(&k1.cross(k2.as_vec())).abs() <= COPLANAR_TOL * scale;
    let pair32_coplanar =
        pair32_parallel || p2.dot(&k3.cross(k2.as_vec())).abs() <= COPLANAR_TOL * scale;

    if pair12_coplanar {
        let mut out = Solutions3::default();
        let mut flags = 0usize;
        if pair12_parallel {
            // project onto the shared axis direction: Subproblem 4 for θ₃,
            // then Subproblems 3 and 1 for (θ₁, θ₂)
            let d = k2.dot(&(p0 - p2)) + k1.dot(p1) * k1.dot(k2.as_vec()).signum();
            let sols3 = sp4(k2.as_vec(), p3, k3, d);
            flags += sols3.is_continuum as usize;
            for b3 in &sols3.branches {
                let w = p2 + rot(k3, b3.angles[0]).apply(p3);
                let sols1 = sp3(p1, &-p0, k1, w.norm());
                flags += sols1.is_continuum as usize;
                for b1 in &sols1.branches {
                    let reached = p0 + rot(k1, b1.angles[0]).apply(p1);
                    let sols2 = sp1(&w, &reached, k2);
                    flags += sols2.is_continuum as usize;
                    for b2 in &sols2.branches {
                        let t = [b1.angles[0], b2.angles[0], b3.angles[0]];
                        out.push(t, residual(&t) > tol);
                    }
                }
            }
        } else {
            // axes 1 and 2 intersect: shift the offset away and use
            // Subproblem 3 then Subproblem 2
            let (a, b, _) = decompose_on_axes(p0, k1, k2);
            let p1s = p1 + a * k1.as_vec();
            let p2s = p2 - b * k2.as_vec();
            let sols3 = sp3(p3, &-p2s, k3, p1s.norm());
            flags += sols3.is_continuum as usize;
            for b3 in &sols3.branches {
                let q = p2s + rot(k3, b3.angles[0]).apply(p3);
                let pair = sp2(&p1s, &q, k1, k2);
                flags += pair.is_continuum as usize;
                for pb in &pair.branches {
                    let t = [pb.angles[0], pb.angles[1], b3.angles[0]];
                    out.push(t, residual(&t) > tol);
                }
            }
        }
        out.is_continuum = flags > 0;
        guard_continuum(&out, flags, "axes 1 and 2 coplanar with every stage degenerate")?;
        out.sort();
        return Ok(out);
    }

    if pair32_coplanar {
        let mut out = Solutions3::default();
        let mut flags = 0usize;
        if pair32_parallel {
            // k₂ᵀ RHS is constant: Subproblem 4 for θ₁, then 3 and 1
            let d = k2.dot(&(p2 - p0)) + k3.dot(p3) * k3.dot(k2.as_vec()).signum();
            let sols1 = sp4(k2.as_vec(), p1, k1, d);
            flags += sols1.is_continuum as usize;
            for b1 in &sols1.branches {
                let u = p0 + rot(k1, b1.angles[0]).apply(p1);
                let sols3 = sp3(p3, &-p2, k3, u.norm());
                flags += sols3.is_continuum as usize;
                for b3 in &sols3.branches {
                    let w = p2 + rot(k3, b3.angles[0]).apply(p3);
                    let sols2 = sp1(&w, &u, k2);
                    flags += sols2.is_continuum as usize;
                    for b2 in &sols2.branches {
                        let t = [b1.angles[0], b2.angles[0], b3.angles[0]];
                        out.push(t, residual(&t) > tol);
                    }
                }
            }
        } else {
            // axes 2 and 3 intersect
            let (a, b, _) = decompose_on_axes(p2, k2, k3);
            let p0s = p0 - a * k2.as_vec();
            let p3s = p3 + b * k3.as_vec();
            let sols1 = sp3(p1, &-p0s, k1, p3s.norm());
            flags += sols1.is_continuum as usize;
            for b1 in &sols1.branches {
                let u = p0s + rot(k1, b1.angles[0]).apply(p1);
                let pair = sp2(&p3s, &u, k3, k2);
                flags += pair.is_continuum as usize;
                for pb in &pair.branches {
                    let t = [b1.angles[0], -pb.angles[1], pb.angles[0]];
                    out.push(t, residual(&t) > tol);
                }
            }
        }
        out.is_continuum = flags > 0;
        guard_continuum(&out, flags, "axes 2 and 3 coplanar with every stage degenerate")?;
        out.sort();
        return Ok(out);
    }

    // generic path: quartic in the height z along k₂
    let circle1 = Sp5Circle::new(p0, p1, k1, k2).expect("parallel axes dispatched above");
    let circle3 = Sp5Circle::new(p2, p3, k3, k2).expect("parallel axes dispatched above");
    let diff = circle1.p_poly.add_scaled(&circle3.p_poly, -1.0);
    let diff2 = diff.mul(&diff);
    let diff4 = diff2.mul(&diff2);
    let r_sum = circle1.r_poly.add_scaled(&circle3.r_poly, 1.0);
    let r_diff = circle1.r_poly.add_scaled(&circle3.r_poly, -1.0);
    let quartic_poly = diff4
        .add_scaled(&diff2.mul(&r_sum), -2.0)
        .add_scaled(&r_diff.mul(&r_diff), 1.0);
    let quartic = crate::polyroot::Quartic::new(quartic_poly.descending());
    let roots = crate::polyroot::solve_quartic(&quartic).map_err(|_| {
        SubproblemError::ContinuumOfSolutions {
            detail: "height polynomial vanishes identically".to_string(),
        }
    })?;

    let mut out = Solutions3::default();
    let norm_tol = 1e-6 * scale * scale;
    // (angles, is_ls, rank key); deduped and capped at four afterwards
    let mut candidates: Vec<([f64; 3], bool, f64)> = Vec::new();
    let mut handle_z = |z: f64, approx: bool| {
        let mut best: Option<(f64, [f64; 3])> = None;
        let mut any_exact = false;
        for s1 in [1.0, -1.0] {
            for s3 in [1.0, -1.0] {
                let (g0, _) = {
                    let (v1, d1) = circle1.branch_value(z, s1);
                    let (v3, d3) = circle3.branch_value(z, s3);
                    (v1 - v3, d1 - d3)
                };
                if !approx && g0.abs() > 1e-2 * scale * scale {
                    continue; // this root belongs to another sign combination
                }
                let zr = if approx { z } else { refine_z(&circle1, &circle3, z, s1, s3) };
                let x1 = circle1.trig_at(zr, s1);
                let x3 = circle3.trig_at(zr, s3);
                let lhs = circle1.point(&x1);
                let rhs = circle3.point(&x3);
                let mismatch = (lhs.norm_squared() - rhs.norm_squared()).abs();
                let theta2 = sp1(&rhs, &lhs, k2);
                let t = [
                    angle_from_x(&x1),
                    theta2.branches[0].angles[0],
                    angle_from_x(&x3),
                ];
                let res = residual(&t);
                if !approx && mismatch <= norm_tol && res <= tol {
                    candidates.push((t, false, res));
                    any_exact = true;
                }
                match best {
                    Some((m, _)) if m <= mismatch => {}
                    _ => best = Some((mismatch, t)),
                }
            }
        }
        // complex pairs and real roots that fell off a circle's reachable
        // band both continue as approximate branches
        if !any_exact {
            if let Some((m, t)) = best {
                candidates.push((t, true, m));
            }
        }
    };

    for z in roots.real_values() {
        handle_z(z, false);
    }
    for rep in roots.complex_pair_reps() {
        handle_z(rep.re, true);
    }
    // exact branches first, then by rank; the push deduplicates, the cap
    // enforces the four-solution maximum when near-double roots split
    candidates.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.total_cmp(&b.2)));
    for (t, is_ls, _) in candidates {
        if out.branches.is_full() {
            break;
        }
        out.push(t, is_ls);
    }
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// Subproblem 6
// ---------------------------------------------------------------------------

/// The 2×4 linear system of Subproblem 6 with its null-space basis.
struct Sp6System {
    rows: [Vector4<f64>; 2],
    b: Vector2<f64>,
    x_min: Vector4<f64>,
    null_basis: [Vector4<f64>; 2],
}

impl Sp6System {
    /// Full-rank construction; orthonormalizes the rows and completes the
    /// basis of R⁴ deterministically (Gram–Schmidt over the standard basis).
    fn new(rows: [Vector4<f64>; 2], b: Vector2<f64>) -> Self {
        let gram = Matrix2::new(
            rows[0].dot(&rows[0]),
            rows[0].dot(&rows[1]),
            rows[1].dot(&rows[0]),
            rows[1].dot(&rows[1]),
        );
        let y = gram.try_inverse().expect("full-rank checked by caller") * b;
        let x_min = rows[0] * y.x + rows[1] * y.y;

        let u1 = rows[0].normalize();
        let mut u2 = rows[1] - u1 * u1.dot(&rows[1]);
        u2.normalize_mut();
        let mut basis: ArrayVec<Vector4<f64>, 2> = ArrayVec::new();
        let mut chosen = [u1, u2, Vector4::zeros(), Vector4::zeros()];
        let mut count = 2;
        while count < 4 {
            let mut best: Option<Vector4<f64>> = None;
            for i in 0..4 {
                let mut v = Vector4::zeros();
                v[i] = 1.0;
                for u in chosen.iter().take(count) {
                    v -= u * u.dot(&v);
                }
                if best.as_ref().map_or(true, |b| v.norm() > b.norm()) {
                    best = Some(v);
                }
            }
            let u = best.unwrap().normalize();
            chosen[count] = u;
            basis.push(u);
            count += 1;
        }
        debug_assert!((rows[0].dot(&basis[0])).abs() < 1e-10);
        debug_assert!((rows[1].dot(&basis[1])).abs() < 1e-10);
        debug_assert!(
            (rows[0].dot(&x_min) - b.x).abs() <= 1e-10 * (1.0 + b.x.abs() + rows[0].norm())
        );
        Sp6System {
            rows,
            b,
            x_min,
            null_basis: [basis[0], basis[1]],
        }
    }

    fn point(&self, xi1: f64, xi2: f64) -> Vector4<f64> {
        self.x_min + self.null_basis[0] * xi1 + self.null_basis[1] * xi2
    }

    /// `‖x₁‖ = 1` (half = 0) or `‖x₂‖ = 1` (half = 1) as a conic in (ξ₁, ξ₂).
    fn unit_norm_conic(&self, half: usize) -> crate::polyroot::Conic {
        let pick = |v: &Vector4<f64>| Vector2::new(v[2 * half], v[2 * half + 1]);
        let m = pick(&self.x_min);
        let n1 = pick(&self.null_basis[0]);
        let n2 = pick(&self.null_basis[1]);
        crate::polyroot::Conic {
            xx: n1.dot(&n1),
            xy: 2.0 * n1.dot(&n2),
            yy: n2.dot(&n2),
            x: 2.0 * n1.dot(&m),
            y: 2.0 * n2.dot(&m),
            c: m.dot(&m) - 1.0,
        }
    }
}

fn sp6_row(h: &Vec3, k: &UnitVec3, p: &Vec3) -> (Vector2<f64>, f64) {
    let lin = linearize(k, p);
    let c0: Vec3 = lin.basis.column(0).into_owned();
    let c1: Vec3 = lin.basis.column(1).into_owned();
    (Vector2::new(h.dot(&c0), h.dot(&c1)), h.dot(&lin.center))
}

/// Subproblem 6, four circles: `(θ₁, θ₂)` solving the pair of equations
/// `h₁ᵀR(k₁,θ₁)p₁ + h₂ᵀR(k₂,θ₂)p₂ = d₁`,
/// `h₃ᵀR(k₃,θ₁)p₃ + h₄ᵀR(k₄,θ₂)p₄ = d₂`.
///
/// The `hᵢ` need not be unit vectors. Rank-deficient systems flag a
/// continuum; a vanishing block reduces one equation to Subproblem 4.
pub fn sp6(h: &[Vec3; 4], k: &[UnitVec3; 4], p: &[Vec3; 4], d1: f64, d2: f64) -> Solutions2 {
    let mut out = Solutions2::default();
    let scale = 1.0
        + d1.abs()
        + d2.abs()
        + h.iter().zip(p).map(|(hi, pi)| hi.norm() * pi.norm()).sum::<f64>();
    let tol = EXACT_TOL * scale;

    let (block00, const00) = sp6_row(&h[0], &k[0], &p[0]);
    let (block01, const01) = sp6_row(&h[1], &k[1], &p[1]);
    let (block10, const10) = sp6_row(&h[2], &k[2], &p[2]);
    let (block11, const11) = sp6_row(&h[3], &k[3], &p[3]);
    let b1 = d1 - const00 - const01;
    let b2 = d2 - const10 - const11;

    let eq_residuals = |t1: f64, t2: f64| {
        let r1 = h[0].dot(&rot(&k[0], t1).apply(&p[0])) + h[1].dot(&rot(&k[1], t2).apply(&p[1]))
            - d1;
        let r2 = h[2].dot(&rot(&k[2], t1).apply(&p[2])) + h[3].dot(&rot(&k[3], t2).apply(&p[3]))
            - d2;
        r1.abs().max(r2.abs())
    };

    let block_scale = block00
        .norm()
        .max(block01.norm())
        .max(block10.norm())
        .max(block11.norm())
        .max(1e-300);
    let zero_block = |v: &Vector2<f64>| v.norm() <= 1e-10 * block_scale;

    // a vanishing block means that equation depends on one angle only:
    // solve it with Subproblem 4, substitute, and solve the other equation
    // with Subproblem 4 again
    let chain = |first_eq: usize, known_angle: usize, out: &mut Solutions2| {
        // first_eq's surviving angle is `known_angle`
        let (hh, kk, pp, dd, cc) = match (first_eq, known_angle) {
            (0, 0) => (&h[0], &k[0], &p[0], d1, const01),
            (0, 1) => (&h[1], &k[1], &p[1], d1, const00),
            (1, 0) => (&h[2], &k[2], &p[2], d2, const11),
            _ => (&h[3], &k[3], &p[3], d2, const10),
        };
        let first = sp4(hh, pp, kk, dd - cc);
        out.is_continuum |= first.is_continuum;
        for fb in &first.branches {
            let ta = fb.angles[0];
            let other_eq = 1 - first_eq;
            let other_angle = 1 - known_angle;
            let (hh2, kk2, pp2, dd2, hfix, kfix, pfix) = match (other_eq, other_angle) {
                (0, 0) => (&h[0], &k[0], &p[0], d1, &h[1], &k[1], &p[1]),
                (0, 1) => (&h[1], &k[1], &p[1], d1, &h[0], &k[0], &p[0]),
                (1, 0) => (&h[2], &k[2], &p[2], d2, &h[3], &k[3], &p[3]),
                _ => (&h[3], &k[3], &p[3], d2, &h[2], &k[2], &p[2]),
            };
            let fixed = hfix.dot(&rot(kfix, ta).apply(pfix));
            let second = sp4(hh2, pp2, kk2, dd2 - fixed);
            out.is_continuum |= second.is_continuum;
            for sb in &second.branches {
                let tb = sb.angles[0];
                let (t1, t2) = if known_angle == 0 { (ta, tb) } else { (tb, ta) };
                out.push([t1, t2], eq_residuals(t1, t2) > tol);
            }
        }
        out.sort();
    };

    if zero_block(&block00) {
        chain(0, 1, &mut out);
        return out;
    }
    if zero_block(&block01) {
        chain(0, 0, &mut out);
        return out;
    }
    if zero_block(&block10) {
        chain(1, 1, &mut out);
        return out;
    }
    if zero_block(&block11) {
        chain(1, 0, &mut out);
        return out;
    }

    let rows = [
        Vector4::new(block00.x, block00.y, block01.x, block01.y),
        Vector4::new(block10.x, block10.y, block11.x, block11.y),
    ];
    let gram_det = rows[0].norm_squared() * rows[1].norm_squared()
        - rows[0].dot(&rows[1]).powi(2);
    let rank_deficient =
        gram_det <= (1e-10 * rows[0].norm() * rows[1].norm()).powi(2).max(1e-300);

    let continuum_fallback = |out: &mut Solutions2| {
        // one equation is a scalar multiple of the other: fix θ₂ = 0 and
        // solve the larger-norm equation for θ₁ with Subproblem 4
        out.is_continuum = true;
        let use_first = rows[0].norm() >= rows[1].norm();
        let (hh, kk, pp, dd, hfix, pfix) = if use_first {
            (&h[0], &k[0], &p[0], d1, &h[1], &p[1])
        } else {
            (&h[2], &k[2], &p[2], d2, &h[3], &p[3])
        };
        let sols = sp4(hh, pp, kk, dd - hfix.dot(pfix));
        for sb in &sols.branches {
            out.push([sb.angles[0], 0.0], eq_residuals(sb.angles[0], 0.0) > tol);
        }
        out.sort();
    };

    if rank_deficient {
        continuum_fallback(&mut out);
        return out;
    }

    let system = Sp6System::new(rows, Vector2::new(b1, b2));
    let pair = crate::polyroot::EllipsePair {
        a: system.unit_norm_conic(0),
        b: system.unit_norm_conic(1),
    };
    match crate::polyroot::intersect_ellipses(&pair, true) {
        Ok(points) => {
            for pt in &points {
                let x = system.point(pt.x1, pt.x2);
                let t1 = angle_from_x(&Vector2::new(x[0], x[1]));
                let t2 = angle_from_x(&Vector2::new(x[2], x[3]));
                out.push([t1, t2], pt.approx || eq_residuals(t1, t2) > tol);
            }
            // linear-system invariant on exact points
            debug_assert!(points.iter().filter(|p| !p.approx).all(|p| {
                let x = system.point(p.x1, p.x2);
                (system.rows[0].dot(&x) - system.b.x).abs() < 1e-8 * scale
                    && (system.rows[1].dot(&x) - system.b.y).abs() < 1e-8 * scale
            }));
        }
        Err(_) => continuum_fallback(&mut out),
    }
    out.sort();
    out
}
