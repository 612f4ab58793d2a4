//! Robot parameter model, forward kinematics, kinematic-family
//! classification, and random robot/test-case generation.
//!
//! A robot is described by six unit joint axes `h₁..h₆` (each in its own
//! link frame), seven inter-origin offsets `p₀₁, p₁₂, …, p₅₆, p₆T`, and a
//! constant tool rotation `R₆T`. All frames share the world orientation in
//! the zero configuration, so forward kinematics is
//!
//! ```text
//! R₀T = R(h₁,q₁)···R(h₆,q₆)·R₆T
//! p₀T = p₀₁ + R₀₁p₁₂ + … + R₀₅p₅₆ + R₀₆p₆T
//! ```
//!
//! Origins may slide freely along their joint axes; classification exploits
//! that freedom to re-site origins so that detected intersections become
//! exact zero offsets.

use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::geom::{rot, wrap_to_pi, GeomError, RotMat, UnitVec3, Vec3};

/// Tolerance for detecting intersecting or parallel joint axes.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    /// Joint axes `h₁..h₆`, unit, each in its local frame.
    pub axes: [UnitVec3; 6],
    /// Offsets `p₀₁, p₁₂, …, p₅₆, p₆T`, length units.
    pub offsets: [Vec3; 7],
    /// Constant tool orientation `R₆T`.
    pub tool_rot: RotMat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: RotMat,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig(pub [f64; 6]);

impl JointConfig {
    pub fn wrapped(&self) -> JointConfig {
        let mut q = self.0;
        for a in &mut q {
            *a = wrap_to_pi(*a);
        }
        JointConfig(q)
    }

    /// Largest circular distance between corresponding joints.
    pub fn max_angle_diff(&self, other: &JointConfig) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| crate::geom::angle_diff(*a, *b))
            .fold(0.0, f64::max)
    }
}

/// The kinematic families with dedicated solvers, ordered fastest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    SphericalTwoIntersecting,
    SphericalTwoParallel,
    Spherical,
    ThreeParallelTwoIntersecting,
    ThreeParallel,
    TwoIntersecting,
    TwoParallel,
    TwoNonconsecutiveIntersecting,
    General6R,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 9] = [
        FamilyKind::SphericalTwoIntersecting,
        FamilyKind::SphericalTwoParallel,
        FamilyKind::Spherical,
        FamilyKind::ThreeParallelTwoIntersecting,
        FamilyKind::ThreeParallel,
        FamilyKind::TwoIntersecting,
        FamilyKind::TwoParallel,
        FamilyKind::TwoNonconsecutiveIntersecting,
        FamilyKind::General6R,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Spherical => "spherical",
            FamilyKind::SphericalTwoIntersecting => "spherical-2-intersecting",
            FamilyKind::SphericalTwoParallel => "spherical-2-parallel",
            FamilyKind::ThreeParallel => "3-parallel",
            FamilyKind::ThreeParallelTwoIntersecting => "3-parallel-2-intersecting",
            FamilyKind::TwoIntersecting => "2-intersecting",
            FamilyKind::TwoParallel => "2-parallel",
            FamilyKind::TwoNonconsecutiveIntersecting => "2-nonconsecutive-intersecting",
            FamilyKind::General6R => "general-6r",
        }
    }

    pub fn from_name(name: &str) -> Option<FamilyKind> {
        FamilyKind::ALL.iter().find(|k| k.name() == name).copied()
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(
            self,
            FamilyKind::Spherical
                | FamilyKind::SphericalTwoIntersecting
                | FamilyKind::SphericalTwoParallel
                | FamilyKind::ThreeParallel
                | FamilyKind::ThreeParallelTwoIntersecting
        )
    }

    /// 1-based joints carrying the family's defining condition, in chain
    /// order (before any reversal).
    fn condition_joints(&self) -> &'static [usize] {
        match self {
            FamilyKind::Spherical => &[4, 5, 6],
            FamilyKind::SphericalTwoIntersecting => &[1, 2, 4, 5, 6],
            FamilyKind::SphericalTwoParallel => &[2, 3, 4, 5, 6],
            FamilyKind::ThreeParallel => &[2, 3, 4],
            FamilyKind::ThreeParallelTwoIntersecting => &[2, 3, 4, 5, 6],
            FamilyKind::TwoIntersecting => &[5, 6],
            FamilyKind::TwoParallel => &[2, 3],
            FamilyKind::TwoNonconsecutiveIntersecting => &[4, 6],
            FamilyKind::General6R => &[],
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classification result: the family plus where its conditions sit.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTag {
    pub kind: FamilyKind,
    /// The pattern was found on the reversed chain (joints relabeled
    /// `i ↦ 7−i`); solvers run on the reversed robot and map angles back.
    pub reversed: bool,
}

impl FamilyTag {
    pub fn new(kind: FamilyKind) -> Self {
        FamilyTag { kind, reversed: false }
    }

    /// 1-based joint indices satisfying the family condition, in terms of
    /// the robot as given.
    pub fn condition_joints(&self) -> Vec<usize> {
        let mut joints: Vec<usize> = self
            .kind
            .condition_joints()
            .iter()
            .map(|&j| if self.reversed { 7 - j } else { j })
            .collect();
        joints.sort_unstable();
        joints
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind, if self.reversed { " (reversed)" } else { "" })
    }
}

/// Product-of-exponentials forward kinematics.
pub fn forward_kinematics(kin: &Kinematics, q: &JointConfig) -> Pose {
    let mut r = RotMat::identity();
    let mut p = kin.offsets[0];
    for i in 0..6 {
        r = r.compose(&rot(&kin.axes[i], q.0[i]));
        p += r.apply(&kin.offsets[i + 1]);
    }
    Pose { rotation: r.compose(&kin.tool_rot), position: p }
}

/// Strips base offset and tool transform:
/// `R₀₆ = R₀T R₆Tᵀ`, `p₀₆ = p₀T − p₀₁ − R₀₆ p₆T`.
pub fn reduce_pose(kin: &Kinematics, pose: &Pose) -> (RotMat, Vec3) {
    let r06 = pose.rotation.compose(&kin.tool_rot.transposed());
    let p06 = pose.position - kin.offsets[0] - r06.apply(&kin.offsets[6]);
    (r06, p06)
}

/// Rotation and position residual between a pose and `FK(kin, q)`.
pub fn fk_residual(kin: &Kinematics, q: &JointConfig, pose: &Pose) -> f64 {
    let fk = forward_kinematics(kin, q);
    let rot_err = (fk.rotation.as_mat() - pose.rotation.as_mat()).norm();
    let pos_err = (fk.position - pose.position).norm();
    rot_err + pos_err
}

/// Characteristic length of a robot, for scale-relative tolerances.
pub fn length_scale(kin: &Kinematics) -> f64 {
    1.0 + kin.offsets.iter().map(|p| p.norm()).sum::<f64>()
}

impl Kinematics {
    /// Zero-configuration origin positions `O₀..O₆` (world frame).
    fn zero_origins(&self) -> [Vec3; 7] {
        let mut origins = [Vec3::zeros(); 7];
        for i in 1..7 {
            origins[i] = origins[i - 1] + self.offsets[i - 1];
        }
        origins
    }

    /// View with base offset and tool transform stripped; solvers work on
    /// the reduced pose `(R₀₆, p₀₆)`.
    pub fn reduced(&self) -> Kinematics {
        let mut kin = self.clone();
        kin.offsets[0] = Vec3::zeros();
        kin.offsets[6] = Vec3::zeros();
        kin.tool_rot = RotMat::identity();
        kin
    }

    /// The same chain traversed tool-to-base. Joint `i` of the reversed
    /// robot is joint `7−i` with its angle negated, and a reduced target
    /// `(R₀₆, p₀₆)` maps to `(R₀₆ᵀ, −R₀₆ᵀ p₀₆)`.
    pub fn reversed(&self) -> Kinematics {
        let kin = self.reduced();
        let axes = [
            kin.axes[5], kin.axes[4], kin.axes[3], kin.axes[2], kin.axes[1], kin.axes[0],
        ];
        let offsets = [
            Vec3::zeros(),
            -kin.offsets[5],
            -kin.offsets[4],
            -kin.offsets[3],
            -kin.offsets[2],
            -kin.offsets[1],
            Vec3::zeros(),
        ];
        Kinematics { axes, offsets, tool_rot: RotMat::identity() }
    }
}

/// Maps a reversed-chain joint vector back to the original labeling.
pub fn unreverse_config(q: &JointConfig) -> JointConfig {
    JointConfig([-q.0[5], -q.0[4], -q.0[3], -q.0[2], -q.0[1], -q.0[0]])
}

fn parallel_pair(kin: &Kinematics, i: usize) -> bool {
    // same-direction axes only; solvers fold q_i + q_{i+1} together
    let a = kin.axes[i - 1];
    let b = kin.axes[i];
    a.cross(b.as_vec()).norm() <= CLASSIFY_TOL && a.dot(b.as_vec()) > 0.0
}

fn intersecting_pair(kin: &Kinematics, i: usize) -> bool {
    let a = kin.axes[i - 1];
    let b = kin.axes[i];
    let p = kin.offsets[i];
    if a.cross(b.as_vec()).norm() <= CLASSIFY_TOL {
        return false;
    }
    // an offset that is tiny against the robot scale intersects regardless
    // of its direction; the relative triple-product test would reject noise
    if p.norm() <= CLASSIFY_TOL * length_scale(kin) {
        return true;
    }
    p.dot(&a.cross(b.as_vec())).abs() <= CLASSIFY_TOL * p.norm()
}

/// Intersection point of joint axes `i`, `i+1` at zero configuration, if any.
fn pair_intersection(kin: &Kinematics, i: usize) -> Option<Vec3> {
    if !intersecting_pair(kin, i) {
        return None;
    }
    let origins = kin.zero_origins();
    let (oa, ob) = (origins[i - 1 + 1], origins[i + 1]);
    let (ha, hb) = (kin.axes[i - 1], kin.axes[i]);
    // solve min ‖oa + t·ha − ob − s·hb‖ via the 2×2 normal equations
    let d = ob - oa;
    let hh = ha.dot(hb.as_vec());
    let det = 1.0 - hh * hh;
    let t = (ha.dot(&d) - hh * hb.dot(&d)) / det;
    Some(oa + t * ha.as_vec())
}

fn distance_to_axis(kin: &Kinematics, joint: usize, point: &Vec3) -> f64 {
    let origins = kin.zero_origins();
    let o = origins[joint];
    let h = kin.axes[joint - 1];
    let d = point - o;
    (d - h.as_vec() * h.dot(&d)).norm()
}

/// Axes 4, 5, 6 concurrent at one point (spherical wrist).
fn spherical_wrist_center(kin: &Kinematics) -> Option<Vec3> {
    let c = pair_intersection(kin, 4)?;
    let scale = length_scale(kin);
    if intersecting_pair(kin, 5) && distance_to_axis(kin, 6, &c) <= CLASSIFY_TOL * scale {
        Some(c)
    } else {
        None
    }
}

/// Axes 4 and 6 intersect for every q₅.
pub(crate) fn always_intersecting_46(kin: &Kinematics) -> bool {
    // axes 4 and 6 orthogonal to axis 5 with no net offset along it: they
    // stay coplanar, hence intersecting, for every q₅
    let h4 = kin.axes[3];
    let h5 = kin.axes[4];
    let h6 = kin.axes[5];
    let scale = length_scale(kin);
    h4.dot(h5.as_vec()).abs() <= CLASSIFY_TOL
        && h6.dot(h5.as_vec()).abs() <= CLASSIFY_TOL
        && h5.dot(&(kin.offsets[4] + kin.offsets[5])).abs() <= CLASSIFY_TOL * scale
        && h4.cross(h5.as_vec()).norm() > CLASSIFY_TOL
        && h6.cross(h5.as_vec()).norm() > CLASSIFY_TOL
}

fn classify_oriented(kin: &Kinematics) -> FamilyKind {
    if spherical_wrist_center(kin).is_some() {
        if intersecting_pair(kin, 1) {
            return FamilyKind::SphericalTwoIntersecting;
        }
        if parallel_pair(kin, 2) {
            return FamilyKind::SphericalTwoParallel;
        }
        return FamilyKind::Spherical;
    }
    if parallel_pair(kin, 2) && parallel_pair(kin, 3) {
        if intersecting_pair(kin, 5) {
            return FamilyKind::ThreeParallelTwoIntersecting;
        }
        return FamilyKind::ThreeParallel;
    }
    if intersecting_pair(kin, 5) {
        return FamilyKind::TwoIntersecting;
    }
    if parallel_pair(kin, 2) {
        return FamilyKind::TwoParallel;
    }
    if always_intersecting_46(kin) {
        return FamilyKind::TwoNonconsecutiveIntersecting;
    }
    FamilyKind::General6R
}

/// Most specific applicable family, preferring closed-form over 1D-search
/// over 2D-search solvers. When the pattern only appears on the reversed
/// chain, the tag says so and solvers relabel joints accordingly.
pub fn classify(kin: &Kinematics) -> FamilyTag {
    let forward = classify_oriented(kin);
    let backward = classify_oriented(&kin.reversed());
    if backward < forward {
        FamilyTag { kind: backward, reversed: true }
    } else {
        FamilyTag { kind: forward, reversed: false }
    }
}

/// Slides origin `Oᵢ` (1-based joint) by `t` along its axis; forward
/// kinematics is invariant under this.
fn slide_origin(kin: &mut Kinematics, joint: usize, t: f64) {
    let h = *kin.axes[joint - 1].as_vec();
    kin.offsets[joint - 1] += t * h;
    kin.offsets[joint] -= t * h;
}

/// Re-sites origins so detected intersections become exact zero offsets and
/// snaps parallel axes bit-equal; solvers may then assume the conditions
/// literally. The perturbation is bounded by the classification tolerance.
pub fn canonicalize(kin: &Kinematics, kind: FamilyKind) -> Kinematics {
    let mut kin = kin.clone();
    match kind {
        FamilyKind::Spherical
        | FamilyKind::SphericalTwoIntersecting
        | FamilyKind::SphericalTwoParallel => {
            if let Some(c) = spherical_wrist_center(&kin) {
                let origins = kin.zero_origins();
                for joint in [4usize, 5, 6] {
                    let h = kin.axes[joint - 1];
                    let t = h.dot(&(c - origins[joint]));
                    slide_origin(&mut kin, joint, t);
                }
                kin.offsets[4] = Vec3::zeros();
                kin.offsets[5] = Vec3::zeros();
            }
            if kind == FamilyKind::SphericalTwoIntersecting {
                if let Some(c) = pair_intersection(&kin, 1) {
                    let origins = kin.zero_origins();
                    for joint in [1usize, 2] {
                        let h = kin.axes[joint - 1];
                        let t = h.dot(&(c - origins[joint]));
                        slide_origin(&mut kin, joint, t);
                    }
                    kin.offsets[1] = Vec3::zeros();
                }
            }
            if kind == FamilyKind::SphericalTwoParallel {
                kin.axes[2] = kin.axes[1];
            }
        }
        FamilyKind::ThreeParallel | FamilyKind::ThreeParallelTwoIntersecting => {
            kin.axes[2] = kin.axes[1];
            kin.axes[3] = kin.axes[1];
            if kind == FamilyKind::ThreeParallelTwoIntersecting {
                zero_pair_56(&mut kin);
            }
        }
        FamilyKind::TwoIntersecting => zero_pair_56(&mut kin),
        FamilyKind::TwoParallel => kin.axes[2] = kin.axes[1],
        FamilyKind::TwoNonconsecutiveIntersecting | FamilyKind::General6R => {}
    }
    kin
}

fn zero_pair_56(kin: &mut Kinematics) {
    if let Some(c) = pair_intersection(kin, 5) {
        let origins = kin.zero_origins();
        for joint in [5usize, 6] {
            let h = kin.axes[joint - 1];
            let t = h.dot(&(c - origins[joint]));
            slide_origin(kin, joint, t);
        }
        kin.offsets[5] = Vec3::zeros();
    }
}

// ---------------------------------------------------------------------------
// Random generation
// ---------------------------------------------------------------------------

fn rand_axis(rng: &mut ChaCha8Rng) -> UnitVec3 {
    let v: [f64; 3] = UnitSphere.sample(rng);
    UnitVec3::new(Vec3::new(v[0], v[1], v[2])).expect("unit sample")
}

fn rand_offset(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

fn rand_kinematics(rng: &mut ChaCha8Rng) -> Kinematics {
    let axes = [(); 6].map(|_| rand_axis(rng));
    let offsets = [(); 7].map(|_| rand_offset(rng));
    Kinematics { axes, offsets, tool_rot: RotMat::identity() }
}

/// Random kinematics satisfying the family's constraints exactly
/// (constructed, not filtered); deterministic under the seed.
pub fn gen_random_family(family: FamilyKind, seed: u64) -> Kinematics {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut kin = rand_kinematics(&mut rng);
        match family {
            FamilyKind::Spherical => {
                kin.offsets[4] = Vec3::zeros();
                kin.offsets[5] = Vec3::zeros();
            }
            FamilyKind::SphericalTwoIntersecting => {
                kin.offsets[4] = Vec3::zeros();
                kin.offsets[5] = Vec3::zeros();
                kin.offsets[1] = Vec3::zeros();
            }
            FamilyKind::SphericalTwoParallel => {
                kin.offsets[4] = Vec3::zeros();
                kin.offsets[5] = Vec3::zeros();
                kin.axes[2] = kin.axes[1];
            }
            FamilyKind::ThreeParallel => {
                kin.axes[2] = kin.axes[1];
                kin.axes[3] = kin.axes[1];
            }
            FamilyKind::ThreeParallelTwoIntersecting => {
                kin.axes[2] = kin.axes[1];
                kin.axes[3] = kin.axes[1];
                kin.offsets[5] = Vec3::zeros();
            }
            FamilyKind::TwoIntersecting => {
                kin.offsets[5] = Vec3::zeros();
            }
            FamilyKind::TwoParallel => {
                kin.axes[2] = kin.axes[1];
            }
            FamilyKind::TwoNonconsecutiveIntersecting => {
                let h5 = kin.axes[4];
                let strip = |v: &UnitVec3| {
                    UnitVec3::from_dir(v.as_vec() - h5.as_vec() * h5.dot(v.as_vec()))
                };
                match (strip(&kin.axes[3]), strip(&kin.axes[5])) {
                    (Ok(h4), Ok(h6)) => {
                        kin.axes[3] = h4;
                        kin.axes[5] = h6;
                    }
                    _ => continue,
                }
                let axial = h5.dot(&(kin.offsets[4] + kin.offsets[5]));
                kin.offsets[5] -= axial * h5.as_vec();
            }
            FamilyKind::General6R => {}
        }
        let tag = classify(&kin);
        if tag.kind == family && !tag.reversed {
            return kin;
        }
    }
}

/// One test case: a random joint vector and its forward-kinematics pose, so
/// every case has at least one exact solution by construction.
pub fn gen_test_case(kin: &Kinematics, seed: u64) -> (Pose, JointConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = JointConfig([(); 6].map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
    (forward_kinematics(kin, &q), q)
}

// ---------------------------------------------------------------------------
// Robot description files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<(usize, GeomError)> for ParseError {
    fn from((line, e): (usize, GeomError)) -> Self {
        ParseError { line, message: e.to_string() }
    }
}

/// Plain-text robot description:
///
/// ```text
/// # comment
/// H        followed by 6 lines of 3 decimals (joint axes)
/// P        followed by 7 lines of 3 decimals (p01 .. p56, p6T)
/// R6T      optional, followed by 3 rows of 3 decimals (default identity)
/// ```
pub fn parse_robot_file(text: &str) -> Result<Kinematics, ParseError> {
    // (line number, content) with comments stripped
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut pos = 0usize;
    let err = |line: usize, message: &str| ParseError { line, message: message.to_string() };

    let take_vec = |pos: &mut usize, what: &str| -> Result<(usize, Vec3), ParseError> {
        let &(line, content) = lines
            .get(*pos)
            .ok_or_else(|| err(lines.last().map_or(1, |l| l.0), &format!("missing {what}")))?;
        *pos += 1;
        let nums: Result<Vec<f64>, _> = content.split_whitespace().map(str::parse).collect();
        match nums {
            Ok(v) if v.len() == 3 => Ok((line, Vec3::new(v[0], v[1], v[2]))),
            Ok(v) => Err(err(line, &format!("expected 3 numbers for {what}, got {}", v.len()))),
            Err(e) => Err(err(line, &format!("bad number in {what}: {e}"))),
        }
    };

    let expect_keyword = |pos: &mut usize, word: &str| -> Result<(), ParseError> {
        match lines.get(*pos) {
            Some(&(line, content)) => {
                if content.eq_ignore_ascii_case(word) {
                    *pos += 1;
                    Ok(())
                } else {
                    Err(err(line, &format!("expected '{word}', found '{content}'")))
                }
            }
            None => Err(err(lines.last().map_or(1, |l| l.0), &format!("missing '{word}' section"))),
        }
    };

    expect_keyword(&mut pos, "H")?;
    let mut axes: Vec<UnitVec3> = Vec::with_capacity(6);
    for i in 0..6 {
        let (line, v) = take_vec(&mut pos, &format!("axis h{}", i + 1))?;
        axes.push(UnitVec3::new(v).map_err(|e| ParseError::from((line, e)))?);
    }
    expect_keyword(&mut pos, "P")?;
    let mut offsets = [Vec3::zeros(); 7];
    let names = ["p01", "p12", "p23", "p34", "p45", "p56", "p6T"];
    for (i, name) in names.iter().enumerate() {
        let (_, v) = take_vec(&mut pos, name)?;
        offsets[i] = v;
    }
    let mut tool_rot = RotMat::identity();
    if let Some(&(_, content)) = lines.get(pos) {
        if content.eq_ignore_ascii_case("R6T") {
            pos += 1;
            let mut rows = [Vec3::zeros(); 3];
            for (i, row) in rows.iter_mut().enumerate() {
                let (_, v) = take_vec(&mut pos, &format!("R6T row {}", i + 1))?;
                *row = v;
            }
            let first_line = lines.get(pos.saturating_sub(3)).map_or(1, |l| l.0);
            let m = crate::geom::Mat3::new(
                rows[0].x, rows[0].y, rows[0].z, rows[1].x, rows[1].y, rows[1].z, rows[2].x,
                rows[2].y, rows[2].z,
            );
            tool_rot = RotMat::new(m).map_err(|e| ParseError::from((first_line, e)))?;
        }
    }
    if let Some(&(line, content)) = lines.get(pos) {
        return Err(err(line, &format!("unexpected trailing content '{content}'")));
    }
    Ok(Kinematics {
        axes: axes.try_into().expect("six axes"),
        offsets,
        tool_rot,
    })
}

/// 17 significant digits, losslessly round-trippable.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_robot_file(kin: &Kinematics) -> String {
    let mut out = String::new();
    let vec_line = |v: &Vec3| format!("{} {} {}\n", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z));
    out.push_str("H\n");
    for h in &kin.axes {
        out.push_str(&vec_line(h.as_vec()));
    }
    out.push_str("P\n");
    for p in &kin.offsets {
        out.push_str(&vec_line(p));
    }
    if kin.tool_rot != RotMat::identity() {
        out.push_str("R6T\n");
        for i in 0..3 {
            let row = kin.tool_rot.as_mat().row(i);
            out.push_str(&format!(
                "{} {} {}\n",
                fmt_f64(row[0]),
                fmt_f64(row[1]),
                fmt_f64(row[2])
            ));
        }
    }
    out
}
