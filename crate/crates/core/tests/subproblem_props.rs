//! Forward-construction round trips, least-squares grid oracles,
//! cross-path equivalences, and solution-count bounds for the six
//! subproblems.

use std::f64::consts::PI;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use sixr_core::geom::{angle_diff, rot, UnitVec3, Vec3};
use sixr_core::subproblems::{sp1, sp2, sp2_extended, sp3, sp4, sp5, sp6};

fn rand_unit(rng: &mut impl Rng) -> UnitVec3 {
    let v: [f64; 3] = UnitSphere.sample(rng);
    UnitVec3::new(Vec3::new(v[0], v[1], v[2])).unwrap()
}

fn rand_vec(rng: &mut impl Rng) -> Vec3 {
    Vec3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

/// Coarse scan plus golden-section refinement; the brute-force oracle for
/// the least-squares angle of the scalar subproblems.
fn grid_golden_argmin(f: &dyn Fn(f64) -> f64, n: usize) -> f64 {
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..n {
        let theta = -PI + 2.0 * PI * i as f64 / n as f64;
        let v = f(theta);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = 2.0 * PI / n as f64;
    let center = -PI + step * best_i as f64;
    let (mut a, mut b) = (center - step, center + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[test]
fn sp1_forward_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..10_000 {
        let k = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        if k.cross(&p1).norm() < 1e-3 {
            continue;
        }
        let theta = rng.random_range(-PI..PI);
        let p2 = rot(&k, theta).apply(&p1);
        let sols = sp1(&p1, &p2, &k);
        assert_eq!(sols.branches.len(), 1);
        assert!(!sols.branches[0].is_ls);
        assert!(angle_diff(sols.branches[0].angles[0], theta) < 1e-10);
    }
}

#[test]
fn sp2_forward_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..10_000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        if k1.cross(&p1).norm() < 1e-3 || k1.cross(k2.as_vec()).norm() < 1e-3 {
            continue;
        }
        let t1 = rng.random_range(-PI..PI);
        let t2 = rng.random_range(-PI..PI);
        // p₂ = R(k₂,θ₂)ᵀ R(k₁,θ₁) p₁ makes (θ₁, θ₂) a solution
        let p2 = rot(&k2, -t2).apply(&rot(&k1, t1).apply(&p1));
        if k2.cross(&p2).norm() < 1e-3 {
            continue;
        }
        let sols = sp2(&p1, &p2, &k1, &k2);
        assert!(sols.branches.len() <= 2);
        assert!(
            sols.branches
                .iter()
                .any(|b| !b.is_ls
                    && angle_diff(b.angles[0], t1) < 1e-8
                    && angle_diff(b.angles[1], t2) < 1e-8),
            "seeded ({t1}, {t2}) missing from {sols:?}"
        );
    }
}

#[test]
fn sp2_least_squares_matches_grid_oracle() {
    // non-intersecting circles: equal norms, orthogonal axes, narrow cones
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut checked = 0;
    for _ in 0..40 {
        let k1 = UnitVec3::new(Vec3::z()).unwrap();
        let k2 = UnitVec3::new(Vec3::x()).unwrap();
        let tilt1 = rng.random_range(0.05..0.3);
        let tilt2 = rng.random_range(0.05..0.3);
        let p1 = rot(&UnitVec3::new(Vec3::y()).unwrap(), tilt1).apply(&Vec3::z());
        let p2 = rot(&UnitVec3::new(Vec3::y()).unwrap(), tilt2).apply(&Vec3::x());
        let sols = sp2(&p1, &p2, &k1, &k2);
        if !sols.branches.iter().all(|b| b.is_ls) {
            continue;
        }
        checked += 1;
        let objective =
            |a: f64, b: f64| (rot(&k1, a).apply(&p1) - rot(&k2, b).apply(&p2)).norm();
        // 1000×1000 grid argmin, then compare against the returned branch
        let n = 1000;
        let mut best = (0.0, 0.0, f64::INFINITY);
        for i in 0..n {
            let a = -PI + 2.0 * PI * i as f64 / n as f64;
            for j in 0..n {
                let b = -PI + 2.0 * PI * j as f64 / n as f64;
                let v = objective(a, b);
                if v < best.2 {
                    best = (a, b, v);
                }
            }
        }
        assert!(
            sols.branches.iter().any(|br| {
                angle_diff(br.angles[0], best.0) < 1e-3 && angle_diff(br.angles[1], best.1) < 1e-3
            }),
            "grid argmin ({}, {}) not near {sols:?}",
            best.0,
            best.1
        );
    }
    assert!(checked >= 10, "too few genuinely non-intersecting cases: {checked}");
}

#[test]
fn sp2_extended_zero_offset_reduces_to_sp2() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..1000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let plain = sp2(&p1, &p2, &k1, &k2);
        let extended = sp2_extended(&Vec3::zeros(), &p1, &p2, &k1, &k2);
        assert_eq!(plain.branches.len(), extended.branches.len());
        for (a, b) in plain.branches.iter().zip(&extended.branches) {
            assert!(angle_diff(a.angles[0], b.angles[0]) < 1e-12);
            assert!(angle_diff(a.angles[1], b.angles[1]) < 1e-12);
        }
    }
}

#[test]
fn sp2_extended_parallel_axes() {
    // k₁ = k₂ = e_z with a consistent instance: p₀ + R₁p₁ = R₂p₂
    let k = UnitVec3::new(Vec3::z()).unwrap();
    let p0 = Vec3::x();
    let p1 = Vec3::x();
    let p2 = 2.0 * Vec3::x();
    let sols = sp2_extended(&p0, &p1, &p2, &k, &k);
    assert!(!sols.branches.is_empty());
    for b in &sols.branches {
        assert!(!b.is_ls);
        let residual =
            (p0 + rot(&k, b.angles[0]).apply(&p1) - rot(&k, b.angles[1]).apply(&p2)).norm();
        assert!(residual < 1e-8, "residual {residual}");
    }

    // axial mismatch forces the projected least-squares variant
    let sols = sp2_extended(&(p0 + 0.3 * Vec3::z()), &p1, &p2, &k, &k);
    assert!(!sols.branches.is_empty());
    assert!(sols.branches.iter().all(|b| b.is_ls));
}

#[test]
fn sp2_extended_skew_forward_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut found = 0;
    for _ in 0..10_000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        if k1.cross(&p1).norm() < 1e-2
            || k2.cross(&p2).norm() < 1e-2
            || k1.cross(k2.as_vec()).norm() < 1e-2
        {
            continue;
        }
        let t1 = rng.random_range(-PI..PI);
        let t2 = rng.random_range(-PI..PI);
        // choose the offset to make (θ₁, θ₂) consistent, keeping it skew
        let p0 = rot(&k2, t2).apply(&p2) - rot(&k1, t1).apply(&p1);
        if p0.dot(&k1.cross(k2.as_vec())).abs() < 1e-3 {
            continue;
        }
        let sols = sp2_extended(&p0, &p1, &p2, &k1, &k2);
        assert!(
            sols.branches
                .iter()
                .any(|b| angle_diff(b.angles[0], t1) < 1e-8 && angle_diff(b.angles[1], t2) < 1e-8),
            "seeded pair missing: {sols:?}"
        );
        found += 1;
    }
    assert!(found > 5000);
}

#[test]
fn sp3_equals_sp1_at_zero_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..1000 {
        let k = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let a = sp3(&p1, &p2, &k, 0.0);
        let b = sp1(&p1, &p2, &k);
        // the circle-point minimizer is the d = 0 circle-sphere minimizer
        assert!(angle_diff(a.branches[0].angles[0], b.branches[0].angles[0]) < 1e-10);
    }
}

#[test]
fn sp3_sp4_least_squares_match_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut ls3 = 0;
    let mut ls4 = 0;
    for _ in 0..300 {
        let k = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        if k.cross(&p1).norm() < 1e-2 || k.cross(&p2).norm() < 1e-2 {
            continue;
        }
        // distance larger than the farthest reachable point forces LS
        let d = p1.norm() + p2.norm() + rng.random_range(0.5..2.0);
        let sols = sp3(&p1, &p2, &k, d);
        if sols.branches.len() == 1 && sols.branches[0].is_ls {
            ls3 += 1;
            let f = |t: f64| ((rot(&k, t).apply(&p1) - p2).norm() - d).abs();
            let oracle = grid_golden_argmin(&f, 100_000);
            assert!(
                angle_diff(sols.branches[0].angles[0], oracle) < 1e-6,
                "sp3 LS {} vs oracle {}",
                sols.branches[0].angles[0],
                oracle
            );
        }

        let h = rand_vec(&mut rng);
        let d4 = h.norm() * p1.norm() + rng.random_range(0.5..2.0);
        let sols = sp4(&h, &p1, &k, d4);
        if sols.branches.len() == 1 && sols.branches[0].is_ls {
            ls4 += 1;
            let f = |t: f64| (h.dot(&rot(&k, t).apply(&p1)) - d4).abs();
            let oracle = grid_golden_argmin(&f, 100_000);
            assert!(
                angle_diff(sols.branches[0].angles[0], oracle) < 1e-6,
                "sp4 LS {} vs oracle {}",
                sols.branches[0].angles[0],
                oracle
            );
        }
    }
    assert!(ls3 > 100 && ls4 > 100);
}

#[test]
fn sp1_least_squares_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for _ in 0..300 {
        let k = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        if k.cross(&p1).norm() < 1e-2 || k.cross(&p2).norm() < 1e-2 {
            continue;
        }
        let sols = sp1(&p1, &p2, &k);
        if !sols.branches[0].is_ls {
            continue;
        }
        let f = |t: f64| (rot(&k, t).apply(&p1) - p2).norm();
        let oracle = grid_golden_argmin(&f, 100_000);
        assert!(angle_diff(sols.branches[0].angles[0], oracle) < 1e-6);
    }
}

#[test]
fn exactness_flags_flip_off_the_manifold() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..2000 {
        let k = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        if k.cross(&p1).norm() < 1e-2 {
            continue;
        }
        let theta = rng.random_range(-PI..PI);
        let p2 = rot(&k, theta).apply(&p1);
        assert!(!sp1(&p1, &p2, &k).branches[0].is_ls);
        // perturb off the solution manifold
        let off = p2 + 1e-3 * *rand_unit(&mut rng).as_vec();
        assert!(sp1(&p1, &off, &k).branches[0].is_ls);

        let d = (rot(&k, theta).apply(&p1) - p2 * 0.5).norm();
        let exact3 = sp3(&p1, &(p2 * 0.5), &k, d);
        assert!(exact3.branches.iter().any(|b| !b.is_ls));
    }
}

#[test]
fn sp5_forward_round_trip_and_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut tested = 0;
    for _ in 0..10_000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let p3 = rand_vec(&mut rng);
        let (t1, t2, t3) = (
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        );
        // p₀ chosen to satisfy the equation at the seeded triple
        let p0 = rot(&k2, t2).apply(&(p2 + rot(&k3, t3).apply(&p3))) - rot(&k1, t1).apply(&p1);
        let scale = 1.0 + p0.norm() + p1.norm() + p2.norm() + p3.norm();
        let Ok(sols) = sp5(&p0, &p1, &p2, &p3, &k1, &k2, &k3) else {
            continue;
        };
        tested += 1;
        assert!(sols.branches.len() <= 4);
        assert!(
            sols.branches.iter().any(|b| !b.is_ls
                && angle_diff(b.angles[0], t1) < 1e-8
                && angle_diff(b.angles[1], t2) < 1e-8
                && angle_diff(b.angles[2], t3) < 1e-8),
            "seeded triple missing from {sols:?}"
        );
        for b in sols.branches.iter().filter(|b| !b.is_ls) {
            let lhs = p0 + rot(&k1, b.angles[0]).apply(&p1);
            let rhs = rot(&k2, b.angles[1]).apply(&(p2 + rot(&k3, b.angles[2]).apply(&p3)));
            assert!((lhs - rhs).norm() <= 1e-8 * scale);
        }
    }
    assert!(tested > 9900);
}

#[test]
fn sp5_coplanar_matches_explicit_sp3_sp2_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..2000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        if k1.cross(k2.as_vec()).norm() < 1e-2 || k3.cross(k2.as_vec()).norm() < 1e-2 {
            continue;
        }
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let p3 = rand_vec(&mut rng);
        if k1.cross(&p1).norm() < 1e-2 || k3.cross(&p3).norm() < 1e-2 || p2.norm() < 1e-2 {
            continue;
        }
        // axes 1 and 2 intersect (p₀ = 0)
        let Ok(sols) = sp5(&Vec3::zeros(), &p1, &p2, &p3, &k1, &k2, &k3) else {
            continue;
        };
        // independent route: Subproblem 3 for θ₃, then Subproblem 2
        let mut expected: Vec<[f64; 3]> = Vec::new();
        let sols3 = sp3(&p3, &-p2, &k3, p1.norm());
        for b3 in sols3.branches.iter().filter(|b| !b.is_ls) {
            let q = p2 + rot(&k3, b3.angles[0]).apply(&p3);
            for pb in sp2(&p1, &q, &k1, &k2).branches.iter().filter(|b| !b.is_ls) {
                expected.push([pb.angles[0], pb.angles[1], b3.angles[0]]);
            }
        }
        let got: Vec<[f64; 3]> = sols
            .branches
            .iter()
            .filter(|b| !b.is_ls)
            .map(|b| b.angles)
            .collect();
        assert_eq!(got.len(), expected.len(), "count mismatch: {got:?} vs {expected:?}");
        for e in &expected {
            assert!(
                got.iter()
                    .any(|g| (0..3).all(|i| angle_diff(g[i], e[i]) < 1e-8)),
                "missing {e:?} in {got:?}"
            );
        }
    }
}

#[test]
fn sp5_nested_rotation_degeneration() {
    // p₀ = p₂ = 0 and ‖p₁‖ = ‖p₃‖: solutions are the Subproblem 2 pairs
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    for _ in 0..200 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        if k1.cross(&p1).norm() < 1e-2 {
            continue;
        }
        let p3 = p1.norm() * *rand_unit(&mut rng).as_vec();
        if k3.cross(&p3).norm() < 1e-2 {
            continue;
        }
        let Ok(sols) = sp5(&Vec3::zeros(), &p1, &Vec3::zeros(), &p3, &k1, &k2, &k3) else {
            continue;
        };
        assert!(sols.is_continuum);
        let pairs = sp2(&p1, &p3, &k1, &k2);
        for pb in pairs.branches.iter().filter(|b| !b.is_ls) {
            assert!(
                sols.branches.iter().any(|b| angle_diff(b.angles[0], pb.angles[0]) < 1e-8
                    && angle_diff(b.angles[1], pb.angles[1]) < 1e-8
                    && b.angles[2].abs() < 1e-12),
                "sp2 pair {pb:?} missing from {sols:?}"
            );
        }
    }
}

#[test]
fn sp6_forward_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..10_000 {
        let k = [(); 4].map(|_| rand_unit(&mut rng));
        let p = [(); 4].map(|_| rand_vec(&mut rng));
        let h = [(); 4].map(|_| rand_vec(&mut rng));
        let (t1, t2) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let d1 = h[0].dot(&rot(&k[0], t1).apply(&p[0])) + h[1].dot(&rot(&k[1], t2).apply(&p[1]));
        let d2 = h[2].dot(&rot(&k[2], t1).apply(&p[2])) + h[3].dot(&rot(&k[3], t2).apply(&p[3]));
        let sols = sp6(&h, &k, &p, d1, d2);
        assert!(sols.branches.len() <= 4);
        let found = sols.branches.iter().any(|b| {
            !b.is_ls && angle_diff(b.angles[0], t1) < 1e-8 && angle_diff(b.angles[1], t2) < 1e-8
        });
        assert!(found, "seeded pair ({t1}, {t2}) missing from {sols:?}");
        for b in sols.branches.iter().filter(|b| !b.is_ls) {
            let r1 = h[0].dot(&rot(&k[0], b.angles[0]).apply(&p[0]))
                + h[1].dot(&rot(&k[1], b.angles[1]).apply(&p[1]))
                - d1;
            let r2 = h[2].dot(&rot(&k[2], b.angles[0]).apply(&p[2]))
                + h[3].dot(&rot(&k[3], b.angles[1]).apply(&p[3]))
                - d2;
            assert!(r1.abs().max(r2.abs()) <= 1e-7, "residuals {r1} {r2}");
        }
    }
}

#[test]
fn sp6_simplified_case_matches_sp4_chain() {
    // h₁ ∥ k₁ collapses the first equation to a single-angle problem
    let mut rng = ChaCha8Rng::seed_from_u64(114);
    for _ in 0..1000 {
        let k = [(); 4].map(|_| rand_unit(&mut rng));
        let p = [(); 4].map(|_| rand_vec(&mut rng));
        let mut h = [(); 4].map(|_| rand_vec(&mut rng));
        h[0] = 1.3 * *k[0].as_vec();
        let (t1, t2) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let d1 = h[0].dot(&rot(&k[0], t1).apply(&p[0])) + h[1].dot(&rot(&k[1], t2).apply(&p[1]));
        let d2 = h[2].dot(&rot(&k[2], t1).apply(&p[2])) + h[3].dot(&rot(&k[3], t2).apply(&p[3]));
        let sols = sp6(&h, &k, &p, d1, d2);
        // independent route: Subproblem 4 for θ₂ from equation 1, then
        // Subproblem 4 for θ₁ from equation 2
        let mut expected: Vec<[f64; 2]> = Vec::new();
        let first = sp4(&h[1], &p[1], &k[1], d1 - h[0].dot(&p[0]));
        for fb in first.branches.iter().filter(|b| !b.is_ls) {
            let rest = d2 - h[3].dot(&rot(&k[3], fb.angles[0]).apply(&p[3]));
            for sb in sp4(&h[2], &p[2], &k[2], rest).branches.iter().filter(|b| !b.is_ls) {
                expected.push([sb.angles[0], fb.angles[0]]);
            }
        }
        for e in &expected {
            assert!(
                sols.branches
                    .iter()
                    .any(|b| angle_diff(b.angles[0], e[0]) < 1e-8
                        && angle_diff(b.angles[1], e[1]) < 1e-8),
                "chain solution {e:?} missing from {sols:?}"
            );
        }
        assert!(sols
            .branches
            .iter()
            .any(|b| angle_diff(b.angles[0], t1) < 1e-8 && angle_diff(b.angles[1], t2) < 1e-8));
    }
}

#[test]
fn sp5_matches_sp6_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(115);
    let mut tested = 0;
    for _ in 0..1000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let p3 = rand_vec(&mut rng);
        let (t1, t2, t3) = (
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        );
        let p0 = rot(&k2, t2).apply(&(p2 + rot(&k3, t3).apply(&p3))) - rot(&k1, t1).apply(&p1);
        let Ok(direct) = sp5(&p0, &p1, &p2, &p3, &k1, &k2, &k3) else {
            continue;
        };
        // half the squared norm of both sides, and the projection onto k₂
        let d1 = 0.5
            * (p2.norm_squared() + p3.norm_squared() - p0.norm_squared() - p1.norm_squared());
        let d2 = k2.dot(&p2) - k2.dot(&p0);
        let pair = sp6(
            &[p0, -p2, *k2.as_vec(), -k2.as_vec()],
            &[k1, k3, k1, k3],
            &[p1, p3, p1, p3],
            d1,
            d2,
        );
        let mut via_sp6: Vec<[f64; 3]> = Vec::new();
        for b in pair.branches.iter().filter(|b| !b.is_ls) {
            let lhs = p0 + rot(&k1, b.angles[0]).apply(&p1);
            let rhs = p2 + rot(&k3, b.angles[1]).apply(&p3);
            let mid = sp1(&rhs, &lhs, &k2);
            if !mid.branches[0].is_ls {
                via_sp6.push([b.angles[0], mid.branches[0].angles[0], b.angles[1]]);
            }
        }
        let direct_exact: Vec<[f64; 3]> = direct
            .branches
            .iter()
            .filter(|b| !b.is_ls)
            .map(|b| b.angles)
            .collect();
        if direct_exact.is_empty() {
            continue;
        }
        tested += 1;
        for d in &direct_exact {
            assert!(
                via_sp6
                    .iter()
                    .any(|v| (0..3).all(|i| angle_diff(v[i], d[i]) < 1e-6)),
                "direct {d:?} missing from sp6 route {via_sp6:?}"
            );
        }
    }
    assert!(tested > 900, "only {tested} instances compared");
}

#[test]
fn solution_count_bounds_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(116);
    for _ in 0..100_000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        assert!(sp1(&p1, &p2, &k1).branches.len() <= 1);
        assert!(sp2(&p1, &p2, &k1, &k2).branches.len() <= 2);
        assert!(sp3(&p1, &p2, &k1, rng.random_range(0.0..2.0)).branches.len() <= 2);
        assert!(sp4(&p2, &p1, &k1, rng.random_range(-2.0..2.0)).branches.len() <= 2);
    }
    for _ in 0..100_000 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        let p0 = rand_vec(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let p3 = rand_vec(&mut rng);
        if let Ok(sols) = sp5(&p0, &p1, &p2, &p3, &k1, &k2, &k3) {
            assert!(sols.branches.len() <= 4);
        }
    }
    for _ in 0..100_000 {
        let k = [(); 4].map(|_| rand_unit(&mut rng));
        let p = [(); 4].map(|_| rand_vec(&mut rng));
        let h = [(); 4].map(|_| rand_vec(&mut rng));
        let sols = sp6(&h, &k, &p, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        assert!(sols.branches.len() <= 4);
    }
}

#[test]
fn sp5_continuity_across_solvability_boundary() {
    // a one-parameter family p₀(s) = s·p₀ sweeping from solvable to not;
    // near the boundary the returned (real-part) angles move by O(√ε)
    let mut rng = ChaCha8Rng::seed_from_u64(117);
    let mut boundaries = 0;
    'outer: for _ in 0..200 {
        let k1 = rand_unit(&mut rng);
        let k2 = rand_unit(&mut rng);
        let k3 = rand_unit(&mut rng);
        let p1 = rand_vec(&mut rng);
        let p2 = rand_vec(&mut rng);
        let p3 = rand_vec(&mut rng);
        let (t1, t2, t3) = (
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        );
        let p0 = rot(&k2, t2).apply(&(p2 + rot(&k3, t3).apply(&p3))) - rot(&k1, t1).apply(&p1);
        let count_exact = |s: f64| -> Option<usize> {
            sp5(&(s * p0), &p1, &p2, &p3, &k1, &k2, &k3)
                .ok()
                .map(|r| r.branches.iter().filter(|b| !b.is_ls).count())
        };
        let (Some(at_one), Some(at_three)) = (count_exact(1.0), count_exact(3.0)) else {
            continue;
        };
        if at_one == at_three || at_one == 0 {
            continue;
        }
        // bisect the boundary
        let (mut lo, mut hi) = (1.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match count_exact(mid) {
                Some(c) if c == at_one => lo = mid,
                _ => hi = mid,
            }
        }
        boundaries += 1;
        let eps: f64 = 1e-6;
        let max_jump = 10.0 * eps.sqrt();
        let mut prev: Option<Vec<[f64; 3]>> = None;
        for step in -50..=50 {
            let s = lo + eps * step as f64;
            let Ok(sols) = sp5(&(s * p0), &p1, &p2, &p3, &k1, &k2, &k3) else {
                continue 'outer;
            };
            let angles: Vec<[f64; 3]> = sols.branches.iter().map(|b| b.angles).collect();
            if let Some(prev) = &prev {
                // every previous branch has a continuation within the jump bound
                for pa in prev {
                    let nearest = angles
                        .iter()
                        .map(|a| (0..3).map(|i| angle_diff(a[i], pa[i])).fold(0.0, f64::max))
                        .fold(f64::INFINITY, f64::min);
                    assert!(
                        nearest <= max_jump,
                        "branch jump {nearest:.2e} at s = {s} exceeds {max_jump:.2e}"
                    );
                }
            }
            prev = Some(angles);
        }
        if boundaries >= 25 {
            break;
        }
    }
    assert!(boundaries >= 10, "too few boundary crossings: {boundaries}");
}
