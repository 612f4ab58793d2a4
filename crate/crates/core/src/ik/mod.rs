//! Inverse kinematics solvers: closed form for the five families with three
//! intersecting or parallel axes, 1D/2D search for the rest.

pub mod closed_form;
pub mod search;

use std::fmt;

use crate::geom::{angle_diff, RotMat, Vec3};
use crate::kinematics::{
    canonicalize, classify, fk_residual, length_scale, reduce_pose, unreverse_config, FamilyKind,
    FamilyTag, JointConfig, Kinematics, Pose,
};
pub use search::SearchConfig;

/// One IK branch: joint angles, exact/least-squares flag, and the
/// forward-kinematics residual used for ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct IkSolution {
    pub q: JointConfig,
    pub is_ls: bool,
    pub fk_residual: f64,
    /// Some stage had an arbitrary angle (internal singularity) resolved to 0.
    pub from_continuum: bool,
}

/// All branches for one pose, sorted lexicographically by wrapped angles.
#[derive(Debug, Clone, Default)]
pub struct SolutionSet {
    pub solutions: Vec<IkSolution>,
    /// Which subproblem stages flagged a continuum, for diagnostics.
    pub continuum_stages: Vec<&'static str>,
}

impl SolutionSet {
    pub fn push(&mut self, sol: IkSolution) {
        let q = sol.q.wrapped();
        for existing in &mut self.solutions {
            if existing
                .q
                .0
                .iter()
                .zip(&q.0)
                .all(|(a, b)| angle_diff(*a, *b) <= crate::subproblems::DEDUP_TOL)
            {
                if sol.fk_residual < existing.fk_residual {
                    existing.fk_residual = sol.fk_residual;
                    existing.is_ls &= sol.is_ls;
                    existing.from_continuum |= sol.from_continuum;
                }
                return;
            }
        }
        self.solutions.push(IkSolution { q, ..sol });
    }

    pub fn note_continuum(&mut self, stage: &'static str) {
        if !self.continuum_stages.contains(&stage) {
            self.continuum_stages.push(stage);
        }
    }

    pub fn sort(&mut self) {
        self.solutions.sort_by(|a, b| {
            a.q.0
                .iter()
                .zip(&b.q.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    pub fn exact_count(&self) -> usize {
        self.solutions.iter().filter(|s| !s.is_ls).count()
    }

    /// Best branch containing `q` within `tol` (wrapped), if any.
    pub fn contains_config(&self, q: &JointConfig, tol: f64) -> bool {
        self.solutions.iter().any(|s| s.q.max_angle_diff(q) <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// A forced family whose conditions the kinematics do not satisfy.
    FamilyMismatch { requested: FamilyKind, detected: FamilyKind },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::FamilyMismatch { requested, detected } => write!(
                f,
                "family '{requested}' does not apply to this robot (detected '{detected}')"
            ),
        }
    }
}

impl std::error::Error for SolveError {}

/// Does `kind`'s solver apply to this robot as labeled (no reversal)?
fn family_applies(kin: &Kinematics, kind: FamilyKind) -> bool {
    use crate::kinematics as km;
    let scale = length_scale(kin);
    let canon = canonicalize(kin, kind);
    let near_zero = |i: usize| canon.offsets[i].norm() <= 1e-7 * scale;
    let parallel = |i: usize| {
        kin.axes[i - 1].cross(kin.axes[i].as_vec()).norm() <= km::CLASSIFY_TOL
            && kin.axes[i - 1].dot(kin.axes[i].as_vec()) > 0.0
    };
    match kind {
        FamilyKind::Spherical => near_zero(4) && near_zero(5),
        FamilyKind::SphericalTwoIntersecting => near_zero(4) && near_zero(5) && near_zero(1),
        FamilyKind::SphericalTwoParallel => near_zero(4) && near_zero(5) && parallel(2),
        FamilyKind::ThreeParallel => parallel(2) && parallel(3),
        FamilyKind::ThreeParallelTwoIntersecting => parallel(2) && parallel(3) && near_zero(5),
        FamilyKind::TwoIntersecting => near_zero(5),
        FamilyKind::TwoParallel => parallel(2),
        FamilyKind::TwoNonconsecutiveIntersecting => km::always_intersecting_46(kin),
        FamilyKind::General6R => true,
    }
}

/// Full pipeline: classify (or honor a forced family), reduce the pose,
/// reverse and canonicalize as needed, dispatch, and re-verify every branch
/// against the original kinematics.
pub fn solve(
    kin: &Kinematics,
    pose: &Pose,
    family: Option<FamilyKind>,
    cfg: &SearchConfig,
) -> Result<(SolutionSet, FamilyTag), SolveError> {
    let tag = match family {
        None => classify(kin),
        Some(kind) => {
            if family_applies(kin, kind) {
                FamilyTag { kind, reversed: false }
            } else {
                return Err(SolveError::FamilyMismatch {
                    requested: kind,
                    detected: classify(kin).kind,
                });
            }
        }
    };

    let (mut r06, mut p06) = reduce_pose(kin, pose);
    let mut work = kin.reduced();
    if tag.reversed {
        work = work.reversed();
        let rt = r06.transposed();
        p06 = -rt.apply(&p06);
        r06 = rt;
    }
    let canon = canonicalize(&work, tag.kind);

    let mut set = match tag.kind {
        FamilyKind::Spherical => closed_form::ik_spherical(&r06, &p06, &canon),
        FamilyKind::SphericalTwoIntersecting => {
            closed_form::ik_spherical_2_intersecting(&r06, &p06, &canon)
        }
        FamilyKind::SphericalTwoParallel => {
            closed_form::ik_spherical_2_parallel(&r06, &p06, &canon)
        }
        FamilyKind::ThreeParallel => closed_form::ik_3_parallel(&r06, &p06, &canon),
        FamilyKind::ThreeParallelTwoIntersecting => {
            closed_form::ik_3_parallel_2_intersecting(&r06, &p06, &canon)
        }
        FamilyKind::TwoIntersecting => search::ik_2_intersecting(&r06, &p06, &canon, cfg),
        FamilyKind::TwoParallel => search::ik_2_parallel(&r06, &p06, &canon, cfg),
        FamilyKind::TwoNonconsecutiveIntersecting => {
            search::ik_2_nonconsecutive(&r06, &p06, &canon, cfg)
        }
        FamilyKind::General6R => search::ik_general_6r(&r06, &p06, &canon, cfg),
    };

    if tag.reversed {
        for sol in &mut set.solutions {
            sol.q = unreverse_config(&sol.q);
        }
    }
    // final gate against the robot as given
    let tol = 1e-8 * length_scale(kin);
    for sol in &mut set.solutions {
        sol.fk_residual = fk_residual(kin, &sol.q, pose);
        if !sol.is_ls && sol.fk_residual > tol {
            sol.is_ls = true;
        }
    }
    set.sort();
    Ok((set, tag))
}

/// Rotation-plus-position residual of a reduced target, used by the solvers.
pub(crate) fn reduced_residual(
    kin: &Kinematics,
    q: &JointConfig,
    r06: &RotMat,
    p06: &Vec3,
) -> f64 {
    let fk = crate::kinematics::forward_kinematics(kin, q);
    (fk.rotation.as_mat() - r06.as_mat()).norm() + (fk.position - p06).norm()
}
