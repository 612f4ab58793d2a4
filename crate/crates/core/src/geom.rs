//! Minimal 3D vector/rotation layer plus the circle-to-plane linearization
//! that every subproblem builds on.
//!
//! A point `R(k,θ)p` sweeping a circle about the unit axis `k` can be written
//! as an affine function of `x = [sin θ, cos θ]`:
//!
//! ```text
//! R(k,θ)p = p_k + A x
//! ```
//!
//! where `p_k = k kᵀ p` points along the axis to the circle center and the
//! two columns of `A` span the circle plane with norm equal to the circle
//! radius. All angle extraction goes through ATAN2.

use std::fmt;

use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// `[sin θ, cos θ]` vector; only its direction matters for angle recovery.
pub type TrigVec = Vector2<f64>;

/// Unit-norm tolerance enforced on [`UnitVec3`] after construction.
pub const UNIT_TOL: f64 = 1e-8;
/// Constructors normalize inputs whose norm is within this distance of 1.
pub const UNIT_NORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// Vector norm too far from 1 to normalize silently.
    NotUnit { norm: f64 },
    /// Matrix is not orthonormal with determinant +1 within tolerance.
    NotRotation { orth_err: f64, det: f64 },
    /// A component is NaN or infinite.
    NonFinite,
}

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::NotUnit { norm } => write!(f, "vector norm {norm} is not within 1e-6 of 1"),
            GeomError::NotRotation { orth_err, det } => write!(
                f,
                "matrix is not a rotation (orthogonality error {orth_err:.3e}, det {det})"
            ),
            GeomError::NonFinite => write!(f, "non-finite component"),
        }
    }
}

impl std::error::Error for GeomError {}

/// A `Vec3` guaranteed unit length within [`UNIT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Accepts vectors with `|‖v‖ − 1| ≤ 1e-6` and renormalizes them; vectors
    /// already unit within [`UNIT_TOL`] are kept bit-exact so files round-trip.
    pub fn new(v: Vec3) -> Result<Self, GeomError> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() <= UNIT_TOL {
            return Ok(UnitVec3(v));
        }
        if (norm - 1.0).abs() > UNIT_NORMALIZE_TOL {
            return Err(GeomError::NotUnit { norm });
        }
        Ok(UnitVec3(v / norm))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_dir(v: Vec3) -> Result<Self, GeomError> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(GeomError::NotUnit { norm });
        }
        Ok(UnitVec3(v / norm))
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn flipped(&self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// A 3×3 matrix guaranteed orthonormal with determinant +1 within 1e-8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotMat(Mat3);

impl RotMat {
    pub fn new(m: Mat3) -> Result<Self, GeomError> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let orth_err = (m.transpose() * m - Mat3::identity()).norm();
        let det = m.determinant();
        if orth_err > UNIT_TOL || (det - 1.0).abs() > UNIT_TOL {
            return Err(GeomError::NotRotation { orth_err, det });
        }
        Ok(RotMat(m))
    }

    pub fn identity() -> Self {
        RotMat(Mat3::identity())
    }

    pub fn as_mat(&self) -> &Mat3 {
        &self.0
    }

    pub fn transposed(&self) -> RotMat {
        RotMat(self.0.transpose())
    }

    /// Composition; stays within tolerance for the chain lengths used here.
    pub fn compose(&self, other: &RotMat) -> RotMat {
        RotMat(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

impl std::ops::Deref for RotMat {
    type Target = Mat3;
    fn deref(&self) -> &Mat3 {
        &self.0
    }
}

/// Skew-symmetric cross-product matrix: `hat(k) v = k × v`.
pub fn hat(k: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -k.z, k.y, //
        k.z, 0.0, -k.x, //
        -k.y, k.x, 0.0,
    )
}

/// Rotation about the unit axis `k` by `theta`:
/// `kkᵀ + sin θ·k× − cos θ·(k×)²`.
pub fn rot(k: &UnitVec3, theta: f64) -> RotMat {
    let k = k.as_vec();
    let kx = hat(k);
    let kx2 = kx * kx;
    RotMat(k * k.transpose() + theta.sin() * kx - theta.cos() * kx2)
}

/// Affine form of a point sweeping a circle: `R(k,θ)p = center + basis·[s,c]`.
#[derive(Debug, Clone, Copy)]
pub struct CircleLinearization {
    /// `k kᵀ p`, along the circle axis pointing to the circle center.
    pub center: Vec3,
    /// Columns `[k×p, −(k×)²p]`, orthogonal with norm equal to the radius.
    pub basis: Matrix3x2<f64>,
}

impl CircleLinearization {
    pub fn eval(&self, x: &TrigVec) -> Vec3 {
        self.center + self.basis * x
    }

    pub fn at_angle(&self, theta: f64) -> Vec3 {
        self.eval(&TrigVec::new(theta.sin(), theta.cos()))
    }

    /// Circle radius `‖k × p‖`; zero when the axis and generator are collinear.
    pub fn radius(&self) -> f64 {
        self.basis.column(0).norm()
    }
}

/// Replaces the circle swept by `R(k,θ)p` with the plane in which it lies.
///
/// Collinear `k`, `p` yield a zero basis (zero-radius circle); callers detect
/// this through [`CircleLinearization::radius`].
pub fn linearize(k: &UnitVec3, p: &Vec3) -> CircleLinearization {
    let k = k.as_vec();
    let kxp = k.cross(p);
    let center = k * k.dot(p);
    // −(k×)²p = p − kkᵀp
    let minus_kx2p = p - center;
    CircleLinearization {
        center,
        basis: Matrix3x2::from_columns(&[kxp, minus_kx2p]),
    }
}

/// Angle of a `[sin θ, cos θ]` vector, invariant under positive scaling.
///
/// `(0,0)` maps to 0; callers flag the angle as arbitrary in that case.
pub fn angle_from_x(x: &TrigVec) -> f64 {
    x.x.atan2(x.y)
}

/// Wraps to `[−π, π]`; inputs already in range (including ±π) pass through.
pub fn wrap_to_pi(theta: f64) -> f64 {
    if (-std::f64::consts::PI..=std::f64::consts::PI).contains(&theta) {
        return theta;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = (theta + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    // rem_euclid can land on the upper boundary through rounding.
    w.clamp(-std::f64::consts::PI, std::f64::consts::PI)
}

/// Absolute difference of two angles on the circle, in `[0, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_to_pi(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_unit(rng: &mut impl Rng) -> UnitVec3 {
        let v: [f64; 3] = rand_distr::UnitSphere.sample(rng);
        UnitVec3::new(Vec3::new(v[0], v[1], v[2])).unwrap()
    }

    fn rand_vec(rng: &mut impl Rng) -> Vec3 {
        Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    #[test]
    fn rot_zero_angle_is_identity() {
        let k = UnitVec3::new(Vec3::z()).unwrap();
        assert!((rot(&k, 0.0).as_mat() - Mat3::identity()).norm() < 1e-15);
    }

    #[test]
    fn rot_quarter_turn_about_z() {
        let k = UnitVec3::new(Vec3::z()).unwrap();
        let r = rot(&k, PI / 2.0);
        assert!((r.apply(&Vec3::x()) - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn rot_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let k = rand_unit(&mut rng);
            let theta = rng.random_range(-PI..PI);
            let prod = rot(&k, theta).as_mat() * rot(&k, -theta).as_mat();
            assert!((prod - Mat3::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn rot_orthonormal_det_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100_000 {
            let k = rand_unit(&mut rng);
            let theta = rng.random_range(-PI..PI);
            let r = rot(&k, theta);
            assert!((r.transpose() * r.as_mat() - Mat3::identity()).norm() < 1e-10);
            assert!((r.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hat_matches_cross_product() {
        let k = Vec3::z();
        assert!((hat(&k) * Vec3::x() - Vec3::y()).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rand_vec(&mut rng);
            let v = rand_vec(&mut rng);
            assert!((hat(&k) * v - k.cross(&v)).norm() < 1e-15);
            assert!((hat(&k) * k).norm() < 1e-15);
            assert!((hat(&k) + hat(&k).transpose()).norm() == 0.0);
        }
    }

    #[test]
    fn hat_squared_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let k = rand_unit(&mut rng);
            let kx = hat(k.as_vec());
            let expect = k.as_vec() * k.as_vec().transpose() - Mat3::identity();
            assert!((kx * kx - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn linearize_planar_circle() {
        let k = UnitVec3::new(Vec3::z()).unwrap();
        let lin = linearize(&k, &Vec3::x());
        assert!(lin.center.norm() < 1e-15);
        assert!((lin.basis.column(0) - Vec3::y()).norm() < 1e-15);
        assert!((lin.basis.column(1) - Vec3::x()).norm() < 1e-15);
    }

    #[test]
    fn linearize_collinear_zero_radius() {
        let k = UnitVec3::new(Vec3::z()).unwrap();
        let lin = linearize(&k, &Vec3::z());
        assert!((lin.center - Vec3::z()).norm() < 1e-15);
        assert!(lin.basis.norm() < 1e-15);
        assert_eq!(lin.radius(), 0.0);
    }

    #[test]
    fn linearize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let k = rand_unit(&mut rng);
            let p = rand_vec(&mut rng);
            let theta = rng.random_range(-PI..PI);
            let direct = rot(&k, theta).apply(&p);
            let lin = linearize(&k, &p).at_angle(theta);
            assert!((direct - lin).norm() < 1e-10);
        }
    }

    #[test]
    fn angle_from_x_basics() {
        assert_eq!(angle_from_x(&TrigVec::new(0.0, 1.0)), 0.0);
        assert!((angle_from_x(&TrigVec::new(1.0, 0.0)) - PI / 2.0).abs() < 1e-15);
        assert_eq!(angle_from_x(&TrigVec::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn angle_from_x_recovers_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let theta = rng.random_range(-PI..PI);
            let alpha = rng.random_range(0.1..10.0);
            let x = TrigVec::new(alpha * theta.sin(), alpha * theta.cos());
            assert!((angle_from_x(&x) - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_from_x_scale_invariant_bitwise() {
        // grid-valued components leave mantissa headroom, so α·x is an
        // exact product and the scaled vector is exactly proportional
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let x = TrigVec::new(
                (rng.random_range(-2048..=2048) as f64) / 256.0,
                (rng.random_range(-2048..=2048) as f64) / 256.0,
            );
            let base = angle_from_x(&x);
            for alpha in [2.0, 10.0, 1e6] {
                assert_eq!(angle_from_x(&(alpha * x)).to_bits(), base.to_bits());
            }
        }
    }

    #[test]
    fn wrap_to_pi_basics() {
        assert!((wrap_to_pi(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_to_pi(-PI), -PI);
        assert_eq!(wrap_to_pi(PI), PI);
        let x = 7.0 * PI + 0.1;
        assert!((wrap_to_pi(x) - (PI + 0.1 - 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn wrap_to_pi_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let theta = rng.random_range(-50.0..50.0);
            let w = wrap_to_pi(theta);
            assert!((-PI..=PI).contains(&w));
            assert_eq!(wrap_to_pi(w), w);
            // congruent mod 2π
            let delta = (theta - w) / (2.0 * PI);
            assert!((delta - delta.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_vec_construction() {
        assert!(UnitVec3::new(Vec3::new(1.0 + 5e-7, 0.0, 0.0)).is_ok());
        assert!(UnitVec3::new(Vec3::new(1.1, 0.0, 0.0)).is_err());
        let u = UnitVec3::new(Vec3::new(1.0 + 5e-7, 0.0, 0.0)).unwrap();
        assert!((u.norm() - 1.0).abs() <= UNIT_TOL);
    }

    #[test]
    fn rot_mat_construction_rejects_non_rotation() {
        assert!(RotMat::new(Mat3::identity() * 1.1).is_err());
        assert!(RotMat::new(Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0)).is_err());
    }
}
