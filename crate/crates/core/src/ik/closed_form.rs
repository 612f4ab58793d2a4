//! Closed-form IK for robots with three intersecting or parallel axes.
//!
//! All solvers take the reduced target `(R₀₆, p₀₆)` and canonicalized
//! kinematics (intersections re-sited to exact zero offsets, parallel axes
//! bit-equal). Every subproblem's full solution list is expanded, a branch
//! is least-squares if any stage was, and a final forward-kinematics
//! residual check classifies each branch.

use arrayvec::ArrayVec;

use super::{IkSolution, SolutionSet};
use crate::geom::{rot, wrap_to_pi, RotMat, UnitVec3, Vec3};
use crate::kinematics::{length_scale, JointConfig, Kinematics};
use crate::subproblems::{sp1, sp2, sp3, sp4, sp5, sp6};

fn exact_tol(kin: &Kinematics) -> f64 {
    1e-8 * length_scale(kin)
}

/// Wrist angles `(q₄, q₅, q₆)` from the orientation remainder `R₃₆`.
///
/// Up to two `(q₄, q₅)` pairs come from projecting onto `h₆`; `q₆` follows
/// from the residual rotation. At a wrist singularity (axes 4 and 6
/// collinear for the solved `q₅`) `q₄` is arbitrary and pinned to 0.
fn wrist_angles(
    r36: &RotMat,
    h4: &UnitVec3,
    h5: &UnitVec3,
    h6: &UnitVec3,
) -> (ArrayVec<([f64; 3], bool), 2>, bool) {
    let mut out = ArrayVec::new();
    let target = r36.apply(h6.as_vec());
    // R(h₄,−q₄)·R₃₆h₆ = R(h₅,q₅)h₆
    let pairs = sp2(&target, h6.as_vec(), h4, h5);
    let mut continuum = pairs.is_continuum;
    for pb in pairs.branches.iter().take(2) {
        let q4 = -pb.angles[0];
        let q5 = pb.angles[1];
        // R(h₆,q₆) = (R₃₄R₄₅)ᵀ R₃₆ applied to a vector off the h₆ axis
        let m = rot(h4, q4).compose(&rot(h5, q5)).transposed().compose(r36);
        let probe = if h5.cross(h6.as_vec()).norm() > 1e-6 {
            *h5.as_vec()
        } else {
            least_collinear_axis(h6)
        };
        let sols6 = sp1(&probe, &m.apply(&probe), h6);
        continuum |= sols6.is_continuum;
        let b6 = &sols6.branches[0];
        out.push(([q4, q5, b6.angles[0]], pb.is_ls || b6.is_ls));
    }
    (out, continuum)
}

fn least_collinear_axis(h: &UnitVec3) -> Vec3 {
    let mut best = Vec3::x();
    let mut best_dot = f64::INFINITY;
    for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
        let d = h.dot(&axis).abs();
        if d < best_dot {
            best_dot = d;
            best = axis;
        }
    }
    best
}

fn finish_branch(
    set: &mut SolutionSet,
    kin: &Kinematics,
    r06: &RotMat,
    p06: &Vec3,
    q: [f64; 6],
    stage_ls: bool,
    from_continuum: bool,
) {
    let q = JointConfig(q);
    let residual = super::reduced_residual(kin, &q, r06, p06);
    let is_ls = stage_ls || residual > exact_tol(kin);
    set.push(IkSolution { q, is_ls, fk_residual: residual, from_continuum });
}

/// Spherical wrist (axes 4, 5, 6 concurrent, `p₄₅ = p₅₆ = 0`):
/// position via Subproblem 5, wrist via Subproblems 2 and 1; ≤8 branches.
pub fn ik_spherical(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> SolutionSet {
    let mut set = SolutionSet::default();
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    // −p₁₂ + R(h₁,−q₁)p₀₆ = R(h₂,q₂)(p₂₃ + R(h₃,q₃)p₃₄)
    let position = sp5(
        &-kin.offsets[1],
        p06,
        &kin.offsets[2],
        &kin.offsets[3],
        &h1,
        &h2,
        &h3,
    );
    let position = match position {
        Ok(p) => p,
        Err(_) => {
            set.note_continuum("position (three circles)");
            return set;
        }
    };
    if position.is_continuum {
        set.note_continuum("position (three circles)");
    }
    for pb in &position.branches {
        let (q1, q2, q3) = (-pb.angles[0], pb.angles[1], pb.angles[2]);
        let r03 = rot(&h1, q1).compose(&rot(&h2, q2)).compose(&rot(&h3, q3));
        let r36 = r03.transposed().compose(r06);
        let (wrist, wrist_continuum) = wrist_angles(&r36, &h4, &h5, &h6);
        if wrist_continuum {
            set.note_continuum("wrist (two circles)");
        }
        for (w, w_ls) in &wrist {
            finish_branch(
                &mut set,
                kin,
                r06,
                p06,
                [q1, q2, q3, w[0], w[1], w[2]],
                pb.is_ls || *w_ls,
                position.is_continuum || wrist_continuum,
            );
        }
    }
    set.sort();
    set
}

/// Spherical wrist plus intersecting axes 1, 2 (`p₁₂ = 0`):
/// `q₃` via Subproblem 3, `(q₁,q₂)` via Subproblem 2; ≤8 branches.
pub fn ik_spherical_2_intersecting(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> SolutionSet {
    let mut set = SolutionSet::default();
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    let (p23, p34) = (kin.offsets[2], kin.offsets[3]);
    // ‖p₀₆‖ = ‖p₂₃ + R(h₃,q₃)p₃₄‖
    let sols3 = sp3(&p34, &-p23, &h3, p06.norm());
    if sols3.is_continuum {
        set.note_continuum("elbow (circle and sphere)");
    }
    for b3 in &sols3.branches {
        let q3 = b3.angles[0];
        let reach = p23 + rot(&h3, q3).apply(&p34);
        // R(h₁,−q₁)p₀₆ = R(h₂,q₂)·reach
        let pairs = sp2(p06, &reach, &h1, &h2);
        if pairs.is_continuum {
            set.note_continuum("shoulder (two circles)");
        }
        for pb in &pairs.branches {
            let (q1, q2) = (-pb.angles[0], pb.angles[1]);
            let r03 = rot(&h1, q1).compose(&rot(&h2, q2)).compose(&rot(&h3, q3));
            let r36 = r03.transposed().compose(r06);
            let (wrist, wrist_continuum) = wrist_angles(&r36, &h4, &h5, &h6);
            if wrist_continuum {
                set.note_continuum("wrist (two circles)");
            }
            for (w, w_ls) in &wrist {
                finish_branch(
                    &mut set,
                    kin,
                    r06,
                    p06,
                    [q1, q2, q3, w[0], w[1], w[2]],
                    b3.is_ls || pb.is_ls || *w_ls,
                    sols3.is_continuum || pairs.is_continuum || wrist_continuum,
                );
            }
        }
    }
    set.sort();
    set
}

/// Spherical wrist plus parallel axes 2, 3 (`h₂ = h₃`):
/// `q₁` via Subproblem 4, `q₃` via Subproblem 3, `q₂` via Subproblem 1;
/// ≤8 branches.
pub fn ik_spherical_2_parallel(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> SolutionSet {
    let mut set = SolutionSet::default();
    let [h1, h2, _h3, h4, h5, h6] = kin.axes;
    let (p12, p23, p34) = (kin.offsets[1], kin.offsets[2], kin.offsets[3]);
    // h₂ᵀR(h₁,−q₁)p₀₆ = h₂ᵀ(p₁₂+p₂₃+p₃₄)
    let sols1 = sp4(h2.as_vec(), p06, &h1, h2.dot(&(p12 + p23 + p34)));
    if sols1.is_continuum {
        set.note_continuum("shoulder (circle and plane)");
    }
    for b1 in &sols1.branches {
        let q1 = -b1.angles[0];
        let v = rot(&h1, -q1).apply(p06) - p12;
        let sols3 = sp3(&p34, &-p23, &h2, v.norm());
        if sols3.is_continuum {
            set.note_continuum("elbow (circle and sphere)");
        }
        for b3 in &sols3.branches {
            let q3 = b3.angles[0];
            let reach = p23 + rot(&h2, q3).apply(&p34);
            let sols2 = sp1(&reach, &v, &h2);
            if sols2.is_continuum {
                set.note_continuum("elbow (circle and point)");
            }
            let b2 = &sols2.branches[0];
            let q2 = b2.angles[0];
            let r03 = rot(&h1, q1).compose(&rot(&h2, q2)).compose(&rot(&h2, q3));
            let r36 = r03.transposed().compose(r06);
            let (wrist, wrist_continuum) = wrist_angles(&r36, &h4, &h5, &h6);
            if wrist_continuum {
                set.note_continuum("wrist (two circles)");
            }
            for (w, w_ls) in &wrist {
                finish_branch(
                    &mut set,
                    kin,
                    r06,
                    p06,
                    [q1, q2, q3, w[0], w[1], w[2]],
                    b1.is_ls || b3.is_ls || b2.is_ls || *w_ls,
                    sols1.is_continuum
                        || sols3.is_continuum
                        || sols2.is_continuum
                        || wrist_continuum,
                );
            }
        }
    }
    set.sort();
    set
}

/// `(q₁, q₅)` candidates for the three-parallel family.
fn three_parallel_q1_q5_sp4(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> Vec<Stage2> {
    let [h1, h2, _, _, h5, h6] = kin.axes;
    let d1 = h2.dot(&(kin.offsets[1] + kin.offsets[2] + kin.offsets[3] + kin.offsets[4]));
    let mut out = Vec::new();
    let sols1 = sp4(h2.as_vec(), p06, &h1, d1);
    for b1 in &sols1.branches {
        let q1 = -b1.angles[0];
        let m = rot(&h1, -q1).compose(r06).apply(h6.as_vec());
        let sols5 = sp4(h2.as_vec(), h6.as_vec(), &h5, h2.dot(&m));
        for b5 in &sols5.branches {
            out.push(Stage2 {
                q: [q1, b5.angles[0]],
                is_ls: b1.is_ls || b5.is_ls,
                continuum: sols1.is_continuum || sols5.is_continuum,
            });
        }
    }
    out
}

fn three_parallel_q1_q5_sp6(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> Vec<Stage2> {
    let [h1, h2, _, _, h5, h6] = kin.axes;
    let p56 = kin.offsets[5];
    let d1 = h2.dot(&(kin.offsets[1] + kin.offsets[2] + kin.offsets[3] + kin.offsets[4]));
    // θ₁ = −q₁ about h₁, θ₂ = q₅ about h₅:
    //   h₂ᵀR(h₁,θ₁)p₀₆ − h₂ᵀR(h₅,θ₂)p₅₆ = d₁
    //   h₂ᵀR(h₁,θ₁)(R₀₆h₆) − h₂ᵀR(h₅,θ₂)h₆ = 0
    let sols = sp6(
        &[*h2.as_vec(), -h2.as_vec(), *h2.as_vec(), -h2.as_vec()],
        &[h1, h5, h1, h5],
        &[*p06, p56, r06.apply(h6.as_vec()), *h6.as_vec()],
        d1,
        0.0,
    );
    sols.branches
        .iter()
        .map(|b| Stage2 {
            q: [-b.angles[0], b.angles[1]],
            is_ls: b.is_ls,
            continuum: sols.is_continuum,
        })
        .collect()
}

struct Stage2 {
    q: [f64; 2],
    is_ls: bool,
    continuum: bool,
}

fn three_parallel_assemble(
    set: &mut SolutionSet,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
    stages: Vec<Stage2>,
) {
    let [h1, h2, _, h4, h5, h6] = kin.axes;
    let (p12, p23, p34, p45, p56) =
        (kin.offsets[1], kin.offsets[2], kin.offsets[3], kin.offsets[4], kin.offsets[5]);
    for st in stages {
        if st.continuum {
            set.note_continuum("base/wrist pair (four circles)");
        }
        let [q1, q5] = st.q;
        let r10 = rot(&h1, -q1);
        let r45 = rot(&h5, q5);
        // q₂+q₃+q₄ from R₁₄R₄₅h₆ = R₁₀R₀₆h₆
        let sum_sols = sp1(&r45.apply(h6.as_vec()), &r10.compose(r06).apply(h6.as_vec()), &h2);
        if sum_sols.is_continuum {
            set.note_continuum("arm sum angle (circle and point)");
        }
        let sum = sum_sols.branches[0].angles[0];
        // q₆ from R₆₅R₅₄h₂ = R₀₆ᵀR₀₁h₂
        let u = r45.transposed().apply(h2.as_vec());
        let z = r06.transposed().compose(&rot(&h1, q1)).apply(h2.as_vec());
        let sols6 = sp1(&u, &z, &h6);
        let q6 = -sols6.branches[0].angles[0];
        let r14 = rot(&h2, sum);
        let rhs = r10.apply(p06) - p12 - r14.apply(&p45) - r14.compose(&r45).apply(&p56);
        let sols3 = sp3(&p34, &-p23, &h2, rhs.norm());
        if sols3.is_continuum {
            set.note_continuum("elbow (circle and sphere)");
        }
        for b3 in &sols3.branches {
            let q3 = b3.angles[0];
            let reach = p23 + rot(&h2, q3).apply(&p34);
            let sols2 = sp1(&reach, &rhs, &h2);
            let q2 = sols2.branches[0].angles[0];
            let q4 = wrap_to_pi(sum - q2 - q3);
            finish_branch(
                set,
                kin,
                r06,
                p06,
                [q1, q2, q3, q4, q5, q6],
                st.is_ls
                    || sum_sols.branches[0].is_ls
                    || sols6.branches[0].is_ls
                    || b3.is_ls
                    || sols2.branches[0].is_ls,
                st.continuum || sum_sols.is_continuum || sols3.is_continuum,
            );
        }
        let _ = h4;
    }
}

/// Three parallel axes (`h₂ = h₃ = h₄`): `(q₁,q₅)` via Subproblem 6 (or two
/// Subproblem 4 calls when `p₅₆ = 0`), sum angle and `q₆` via Subproblem 1,
/// `q₃` via Subproblem 3, `q₂` via Subproblem 1, `q₄` by subtraction;
/// ≤8 branches.
pub fn ik_3_parallel(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> SolutionSet {
    let mut set = SolutionSet::default();
    let stages = if kin.offsets[5].norm() <= 1e-12 * length_scale(kin) {
        three_parallel_q1_q5_sp4(r06, p06, kin)
    } else {
        three_parallel_q1_q5_sp6(r06, p06, kin)
    };
    three_parallel_assemble(&mut set, r06, p06, kin, stages);
    set.sort();
    set
}

/// Three parallel axes plus intersecting axes 5, 6 (`p₅₆ = 0`, UR5-like):
/// the `(q₁, q₅)` extraction collapses to two Subproblem 4 calls.
pub fn ik_3_parallel_2_intersecting(r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> SolutionSet {
    let mut set = SolutionSet::default();
    let stages = three_parallel_q1_q5_sp4(r06, p06, kin);
    three_parallel_assemble(&mut set, r06, p06, kin, stages);
    set.sort();
    set
}
