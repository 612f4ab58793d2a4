//! Error functions and 1D/2D search machinery for the families without
//! three intersecting or parallel axes.
//!
//! Fixing one (or two) joint angles turns the rest of the chain into a
//! closed-form problem; the error measures how far the remaining rotation
//! constraint is from solvable. IK solutions are the zeros of that error.
//! The error has up to four branches (one per Subproblem 5/6 solution) and
//! may be undefined where the fixed angle admits no exact solution.

use arrayvec::ArrayVec;

use super::{IkSolution, SolutionSet};
use crate::geom::{rot, wrap_to_pi, RotMat, Vec3};
use crate::kinematics::{length_scale, JointConfig, Kinematics};
use crate::subproblems::{sp1, sp5, sp6};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// 1D sample count over `[−π, π)`.
    pub samples_1d: usize,
    /// 2D grid resolution per coordinate.
    pub grid_2d: usize,
    /// Stop refining when the bracket is this narrow (radians).
    pub bracket_tol: f64,
    /// Stop refining when the error magnitude drops below this.
    pub error_tol: f64,
    /// A refined/minimized point counts as a zero below this.
    pub accept_tol: f64,
    /// 2D minimization stops when the simplex is this small (radians).
    pub min_step_2d: f64,
    /// Grid samples below this near an accepted zero are consumed;
    /// `None` uses the candidate threshold (median grid value × 0.1).
    pub neighbor_removal: Option<f64>,
    /// Search only near this guess instead of sampling the whole space
    /// (first entry for 1D searches).
    pub initial_guess: Option<[f64; 2]>,
    /// Largest error-value jump still associated to the same branch across
    /// adjacent samples.
    pub branch_jump_cap: f64,
    /// Recover zero-touching extrema by minimizing |e| on low branches.
    pub touching_zero_pass: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            samples_1d: 200,
            grid_2d: 100,
            bracket_tol: 1e-14,
            error_tol: 1e-12,
            accept_tol: 1e-8,
            min_step_2d: 1e-12,
            neighbor_removal: None,
            initial_guess: None,
            branch_jump_cap: 1.0,
            touching_zero_pass: false,
        }
    }
}

/// Sampled error values over one or two joint angles with branch
/// connectivity labels (nearest-value association along the first axis).
#[derive(Debug, Clone)]
pub struct ErrorCurve {
    /// `[n₁, n₂]`; 1D curves have `n₂ = 1`.
    pub grid: [usize; 2],
    pub angles1: Vec<f64>,
    pub angles2: Vec<f64>,
    /// Scalar error per branch (1D) or error norm per branch (2D),
    /// row-major over `(i₁, i₂)`.
    pub values: Vec<ArrayVec<f64, 4>>,
    /// Raw error vectors, kept for 2D curves.
    pub vectors: Option<Vec<ArrayVec<Vec3, 4>>>,
    pub labels: Vec<ArrayVec<usize, 4>>,
    pub branch_count: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Zero1d {
    pub angle: f64,
    pub value: f64,
    pub branch: usize,
    /// Central-difference slope; near zero means a robot singularity.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Zero2d {
    pub angles: [f64; 2],
    pub value: f64,
    /// Smallest singular value of the 3×2 error Jacobian.
    pub min_singular_value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Search1dResult {
    pub zeros: Vec<Zero1d>,
    /// Brackets dropped because branch association failed mid-refinement.
    pub aborted_brackets: usize,
}

/// Matches new sample values to the previous sample's branches: maximum
/// matching, then minimum total value distance, per-match capped. Unmatched
/// values start new branch segments.
fn associate(
    prev_vals: &[f64],
    prev_labels: &[usize],
    new_vals: &[f64],
    cap: f64,
    next_label: &mut usize,
) -> ArrayVec<usize, 4> {
    let n_new = new_vals.len();
    let n_prev = prev_vals.len();
    // assignment[i] = Some(prev index) or None, built by exhaustive search
    let mut best: (usize, f64, Vec<Option<usize>>) = (0, f64::INFINITY, vec![None; n_new]);
    let mut current: Vec<Option<usize>> = vec![None; n_new];
    fn recurse(
        i: usize,
        used: &mut [bool],
        current: &mut Vec<Option<usize>>,
        best: &mut (usize, f64, Vec<Option<usize>>),
        prev_vals: &[f64],
        new_vals: &[f64],
        cap: f64,
        matched: usize,
        cost: f64,
    ) {
        if i == new_vals.len() {
            if matched > best.0 || (matched == best.0 && cost < best.1) {
                *best = (matched, cost, current.clone());
            }
            return;
        }
        for j in 0..prev_vals.len() {
            let d = (new_vals[i] - prev_vals[j]).abs();
            if !used[j] && d <= cap {
                used[j] = true;
                current[i] = Some(j);
                recurse(i + 1, used, current, best, prev_vals, new_vals, cap, matched + 1, cost + d);
                used[j] = false;
            }
        }
        current[i] = None;
        recurse(i + 1, used, current, best, prev_vals, new_vals, cap, matched, cost);
    }
    let mut used = vec![false; n_prev];
    recurse(0, &mut used, &mut current, &mut best, prev_vals, new_vals, cap, 0, 0.0);

    let mut labels = ArrayVec::new();
    for slot in best.2.iter().take(n_new) {
        match slot {
            Some(j) => labels.push(prev_labels[*j]),
            None => {
                labels.push(*next_label);
                *next_label += 1;
            }
        }
    }
    labels
}

/// Samples a scalar error function over `[−π, π)` and labels its branches.
pub fn sample_curve_1d(
    f: &dyn Fn(f64) -> ArrayVec<f64, 4>,
    n: usize,
    cap: f64,
) -> ErrorCurve {
    let mut angles1 = Vec::with_capacity(n);
    let mut values: Vec<ArrayVec<f64, 4>> = Vec::with_capacity(n);
    let mut labels: Vec<ArrayVec<usize, 4>> = Vec::with_capacity(n);
    let mut next_label = 0usize;
    for i in 0..n {
        let theta = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let vals = f(theta);
        let lab = if i == 0 {
            let mut l = ArrayVec::new();
            for _ in 0..vals.len() {
                l.push(next_label);
                next_label += 1;
            }
            l
        } else {
            associate(&values[i - 1], &labels[i - 1], &vals, cap, &mut next_label)
        };
        angles1.push(theta);
        values.push(vals);
        labels.push(lab);
    }
    ErrorCurve {
        grid: [n, 1],
        angles1,
        angles2: Vec::new(),
        values,
        vectors: None,
        labels,
        branch_count: next_label,
    }
}

/// Samples a vector error over the torus; branch labels are per-sample
/// indices (no cross-sample association in 2D).
pub fn sample_curve_2d(f: &dyn Fn(f64, f64) -> ArrayVec<Vec3, 4>, n: usize) -> ErrorCurve {
    let axis: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    let mut values = Vec::with_capacity(n * n);
    let mut vectors = Vec::with_capacity(n * n);
    let mut labels = Vec::with_capacity(n * n);
    let mut branch_count = 0;
    for &a1 in &axis {
        for &a2 in &axis {
            let vecs = f(a1, a2);
            let mut vals = ArrayVec::new();
            let mut lab = ArrayVec::new();
            for (i, v) in vecs.iter().enumerate() {
                vals.push(v.norm());
                lab.push(i);
            }
            branch_count = branch_count.max(vecs.len());
            values.push(vals);
            vectors.push(vecs);
            labels.push(lab);
        }
    }
    ErrorCurve {
        grid: [n, n],
        angles1: axis.clone(),
        angles2: axis,
        values,
        vectors: Some(vectors),
        labels,
        branch_count,
    }
}

/// Sign-change brackets on matching branch segments, including the
/// wrap-around interval. Returns `(left index, branch label)` pairs.
pub fn curve_brackets(curve: &ErrorCurve) -> Vec<(usize, usize)> {
    let n = curve.grid[0];
    let mut out = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        for (slot_a, &label) in curve.labels[i].iter().enumerate() {
            if let Some(slot_b) = curve.labels[j].iter().position(|&l| l == label) {
                let va = curve.values[i][slot_a];
                let vb = curve.values[j][slot_b];
                if va.is_finite() && vb.is_finite() && va * vb < 0.0 {
                    out.push((i, label));
                }
            }
        }
    }
    out
}

/// Branch-tracked evaluation: the value nearest to `pred`, within the cap.
fn branch_value(vals: &ArrayVec<f64, 4>, pred: f64, cap: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &v in vals {
        if (v - pred).abs() <= cap && best.is_none_or(|b| (v - pred).abs() < (b - pred).abs()) {
            best = Some(v);
        }
    }
    best
}

/// Illinois-modified false position on one branch segment. `None` means the
/// bracket was abandoned because branch association failed.
fn illinois(
    f: &dyn Fn(f64) -> ArrayVec<f64, 4>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    cfg: &SearchConfig,
) -> Option<(f64, f64)> {
    debug_assert!(fa * fb < 0.0);
    let mut side = 0i8;
    for _ in 0..100 {
        let x = b - fb * (b - a) / (fb - fa);
        let pred = 0.0;
        let fx = branch_value(&f(x), pred, cfg.branch_jump_cap)?;
        if fx.abs() <= cfg.error_tol || (b - a).abs() <= cfg.bracket_tol {
            return Some((x, fx));
        }
        if fx * fb < 0.0 {
            a = b;
            fa = fb;
            side = -1;
        } else {
            // stagnating on the same side: halve the retained ordinate
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        b = x;
        fb = fx;
    }
    Some((b, fb))
}

/// Central-difference slope of the branch passing through each zero.
pub fn singularity_proximity_1d(
    f: &dyn Fn(f64) -> ArrayVec<f64, 4>,
    zeros: &[Zero1d],
) -> Vec<f64> {
    let h = 1e-6;
    zeros
        .iter()
        .map(|z| {
            let left = branch_value(&f(z.angle - h), z.value, f64::INFINITY);
            let right = branch_value(&f(z.angle + h), z.value, f64::INFINITY);
            match (left, right) {
                (Some(l), Some(r)) => (r - l) / (2.0 * h),
                _ => f64::NAN,
            }
        })
        .collect()
}

/// Smallest singular value of the 3×2 Jacobian of the branch error at each
/// zero (the square root of the smaller eigenvalue of JᵀJ).
pub fn singularity_proximity_2d(
    f: &dyn Fn(f64, f64) -> ArrayVec<Vec3, 4>,
    zeros: &[Zero2d],
) -> Vec<f64> {
    let h = 1e-6;
    let nearest = |a: f64, b: f64| -> Option<Vec3> {
        f(a, b).iter().min_by(|x, y| x.norm().total_cmp(&y.norm())).copied()
    };
    zeros
        .iter()
        .map(|z| {
            let [a, b] = z.angles;
            let cols = [
                (nearest(a + h, b), nearest(a - h, b)),
                (nearest(a, b + h), nearest(a, b - h)),
            ];
            let mut j = [Vec3::zeros(); 2];
            for (i, (plus, minus)) in cols.iter().enumerate() {
                match (plus, minus) {
                    (Some(p), Some(m)) => j[i] = (p - m) / (2.0 * h),
                    _ => return f64::NAN,
                }
            }
            // eigenvalues of the 2×2 Gram matrix
            let (g11, g12, g22) = (j[0].dot(&j[0]), j[0].dot(&j[1]), j[1].dot(&j[1]));
            let tr = g11 + g22;
            let det = g11 * g22 - g12 * g12;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            (tr / 2.0 - disc).max(0.0).sqrt()
        })
        .collect()
}

/// Finds the zeros of a multi-branch scalar error over the circle.
///
/// Samples `N` points, associates branches across neighbors, brackets sign
/// changes on matching segments (wrap-around included), and refines each
/// bracket by Illinois false position. Zero-touching extrema are missed
/// unless the optional minimization pass is enabled.
pub fn search_1d(f: &dyn Fn(f64) -> ArrayVec<f64, 4>, cfg: &SearchConfig) -> Search1dResult {
    let mut result = Search1dResult::default();
    if let Some(guess) = cfg.initial_guess {
        // local scan around the guess only
        let g = guess[0];
        let half_window = 0.12;
        let steps = 25;
        let fl = |i: usize| g - half_window + 2.0 * half_window * i as f64 / (steps - 1) as f64;
        let local: Vec<(f64, ArrayVec<f64, 4>)> = (0..steps).map(|i| (fl(i), f(fl(i)))).collect();
        for w in local.windows(2) {
            let (a, ref va) = w[0];
            let (b, ref vb) = w[1];
            for &fa in va {
                if let Some(fb) = branch_value(vb, fa, cfg.branch_jump_cap) {
                    if fa.abs() <= cfg.error_tol {
                        push_zero(&mut result.zeros, a, fa, 0, cfg);
                    } else if fa * fb < 0.0 {
                        match illinois(f, a, fa, b, fb, cfg) {
                            Some((x, fx)) => push_zero(&mut result.zeros, x, fx, 0, cfg),
                            None => result.aborted_brackets += 1,
                        }
                    }
                }
            }
        }
        let slopes = singularity_proximity_1d(f, &result.zeros);
        for (z, s) in result.zeros.iter_mut().zip(slopes) {
            z.slope = s;
        }
        result
            .zeros
            .sort_by(|p, q| (p.angle - g).abs().total_cmp(&(q.angle - g).abs()));
        return result;
    }

    let curve = sample_curve_1d(f, cfg.samples_1d, cfg.branch_jump_cap);
    let n = curve.grid[0];
    let two_pi = 2.0 * std::f64::consts::PI;
    // direct hits at samples
    for i in 0..n {
        for (slot, &v) in curve.values[i].iter().enumerate() {
            if v.abs() <= cfg.error_tol {
                push_zero(&mut result.zeros, curve.angles1[i], v, curve.labels[i][slot], cfg);
            }
        }
    }
    for (i, label) in curve_brackets(&curve) {
        let j = (i + 1) % n;
        let a = curve.angles1[i];
        let b = if j == 0 { curve.angles1[0] + two_pi } else { curve.angles1[j] };
        let slot_a = curve.labels[i].iter().position(|&l| l == label).unwrap();
        let slot_b = curve.labels[j].iter().position(|&l| l == label).unwrap();
        let fa = curve.values[i][slot_a];
        let fb = curve.values[j][slot_b];
        match illinois(&|x| f(wrap_to_pi(x)), a, fa, b, fb, cfg) {
            Some((x, fx)) => {
                if fx.abs() <= cfg.accept_tol {
                    push_zero(&mut result.zeros, wrap_to_pi(x), fx, label, cfg);
                }
            }
            None => result.aborted_brackets += 1,
        }
    }
    if cfg.touching_zero_pass {
        touching_zero_scan(f, &curve, cfg, &mut result);
    }
    let slopes = singularity_proximity_1d(f, &result.zeros);
    for (z, s) in result.zeros.iter_mut().zip(slopes) {
        z.slope = s;
    }
    result.zeros.sort_by(|p, q| p.angle.total_cmp(&q.angle));
    result
}

fn push_zero(zeros: &mut Vec<Zero1d>, angle: f64, value: f64, branch: usize, _cfg: &SearchConfig) {
    let angle = wrap_to_pi(angle);
    if zeros
        .iter()
        .any(|z| crate::geom::angle_diff(z.angle, angle) <= 1e-9)
    {
        return;
    }
    zeros.push(Zero1d { angle, value, branch, slope: f64::NAN });
}

/// Golden-section |e| minimization on branch segments whose smallest sample
/// is already low; recovers zeros that touch without crossing.
fn touching_zero_scan(
    f: &dyn Fn(f64) -> ArrayVec<f64, 4>,
    curve: &ErrorCurve,
    cfg: &SearchConfig,
    result: &mut Search1dResult,
) {
    let n = curve.grid[0];
    for i in 0..n {
        for (slot, &v) in curve.values[i].iter().enumerate() {
            if !v.is_finite() || v.abs() > 1e-3 {
                continue;
            }
            let label = curve.labels[i][slot];
            let lo = curve.angles1[i] - 2.0 * std::f64::consts::PI / n as f64;
            let hi = curve.angles1[i] + 2.0 * std::f64::consts::PI / n as f64;
            let eval = |x: f64| {
                branch_value(&f(wrap_to_pi(x)), v, cfg.branch_jump_cap)
                    .map_or(f64::INFINITY, f64::abs)
            };
            let (mut a, mut b) = (lo, hi);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
            let (mut fc, mut fd) = (eval(c), eval(d));
            for _ in 0..80 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = eval(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = eval(d);
                }
            }
            let x = 0.5 * (a + b);
            let fx = eval(x);
            if fx <= cfg.accept_tol {
                push_zero(&mut result.zeros, x, fx, label, cfg);
            }
        }
    }
}

/// Nelder–Mead on the torus over the branch-minimum error norm.
fn minimize_2d(
    f: &dyn Fn(f64, f64) -> f64,
    start: [f64; 2],
    step: f64,
    cfg: &SearchConfig,
) -> ([f64; 2], f64) {
    let eval = |p: [f64; 2]| f(wrap_to_pi(p[0]), wrap_to_pi(p[1]));
    let mut simplex = [
        (start, eval(start)),
        ([start[0] + step, start[1]], eval([start[0] + step, start[1]])),
        ([start[0], start[1] + step], eval([start[0], start[1] + step])),
    ];
    for _ in 0..250 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0];
        if best.1 <= 1e-10 {
            break;
        }
        let diameter = simplex
            .iter()
            .map(|(p, _)| {
                ((p[0] - best.0[0]).powi(2) + (p[1] - best.0[1]).powi(2)).sqrt()
            })
            .fold(0.0, f64::max);
        if diameter <= cfg.min_step_2d {
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let reflect = [
            centroid[0] + (centroid[0] - worst.0[0]),
            centroid[1] + (centroid[1] - worst.0[1]),
        ];
        let fr = eval(reflect);
        if fr < simplex[0].1 {
            let expand = [
                centroid[0] + 2.0 * (centroid[0] - worst.0[0]),
                centroid[1] + 2.0 * (centroid[1] - worst.0[1]),
            ];
            let fe = eval(expand);
            simplex[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            let contract = [
                centroid[0] + 0.5 * (worst.0[0] - centroid[0]),
                centroid[1] + 0.5 * (worst.0[1] - centroid[1]),
            ];
            let fc = eval(contract);
            if fc < worst.1 {
                simplex[2] = (contract, fc);
            } else {
                // shrink toward the best point
                for i in 1..3 {
                    let p = [
                        simplex[0].0[0] + 0.5 * (simplex[i].0[0] - simplex[0].0[0]),
                        simplex[0].0[1] + 0.5 * (simplex[i].0[1] - simplex[0].0[1]),
                    ];
                    simplex[i] = (p, eval(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    ([wrap_to_pi(simplex[0].0[0]), wrap_to_pi(simplex[0].0[1])], simplex[0].1)
}

/// Grid-seeded zero finding of `‖e(q_i, q_j)‖` on the torus: repeatedly run
/// derivative-free minimization from the smallest remaining sample, accept
/// minima below the tolerance, and consume neighboring samples under the
/// removal threshold. Deterministic value-then-index processing order.
pub fn search_2d(f: &dyn Fn(f64, f64) -> ArrayVec<Vec3, 4>, cfg: &SearchConfig) -> Vec<Zero2d> {
    let scalar = |a: f64, b: f64| -> f64 {
        f(a, b)
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    };
    let mut zeros: Vec<Zero2d> = Vec::new();
    let accept = |point: [f64; 2], value: f64, zeros: &mut Vec<Zero2d>| {
        if value > cfg.accept_tol {
            return;
        }
        if zeros.iter().any(|z| {
            crate::geom::angle_diff(z.angles[0], point[0]).max(
                crate::geom::angle_diff(z.angles[1], point[1]),
            ) <= 1e-6
        }) {
            return;
        }
        zeros.push(Zero2d { angles: point, value, min_singular_value: f64::NAN });
    };

    if let Some(guess) = cfg.initial_guess {
        let (point, value) = minimize_2d(&scalar, guess, 0.02, cfg);
        accept(point, value, &mut zeros);
        let svs = singularity_proximity_2d(f, &zeros);
        for (z, s) in zeros.iter_mut().zip(svs) {
            z.min_singular_value = s;
        }
        return zeros;
    }

    let n = cfg.grid_2d;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let axis: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::PI + step * i as f64)
        .collect();
    let mut values = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = scalar(axis[i], axis[j]);
        }
    }
    let mut finite: Vec<f64> = values.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return zeros;
    }
    finite.sort_by(f64::total_cmp);
    let candidate_threshold = finite[finite.len() / 2] * 0.1;
    let removal_threshold = cfg.neighbor_removal.unwrap_or(candidate_threshold);

    let mut order: Vec<usize> = (0..n * n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut consumed = vec![false; n * n];
    for &idx in &order {
        if consumed[idx] || !values[idx].is_finite() || values[idx] > candidate_threshold {
            if values[idx] > candidate_threshold {
                break;
            }
            continue;
        }
        consumed[idx] = true;
        let start = [axis[idx / n], axis[idx % n]];
        let (point, value) = minimize_2d(&scalar, start, step * 0.5, cfg);
        if value <= cfg.accept_tol {
            accept(point, value, &mut zeros);
            // consume the 3×3 grid neighborhood of the zero
            let gi = (((point[0] + std::f64::consts::PI) / step).round() as isize).rem_euclid(n as isize);
            let gj = (((point[1] + std::f64::consts::PI) / step).round() as isize).rem_euclid(n as isize);
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    let ii = (gi + di).rem_euclid(n as isize) as usize;
                    let jj = (gj + dj).rem_euclid(n as isize) as usize;
                    let nidx = ii * n + jj;
                    if values[nidx] <= removal_threshold {
                        consumed[nidx] = true;
                    }
                }
            }
        }
    }
    let svs = singularity_proximity_2d(f, &zeros);
    for (z, s) in zeros.iter_mut().zip(svs) {
        z.min_singular_value = s;
    }
    zeros.sort_by(|a, b| {
        a.angles[0]
            .total_cmp(&b.angles[0])
            .then(a.angles[1].total_cmp(&b.angles[1]))
    });
    zeros
}

// ---------------------------------------------------------------------------
// Error functions
// ---------------------------------------------------------------------------

/// Per-branch data at one sample of the two-intersecting search.
struct Candidate123 {
    q123: [f64; 3],
    error: f64,
}

/// Axes 5 and 6 intersect (`p₅₆ = 0`); for a fixed `q₄` Subproblem 5 gives
/// up to four `(q₁,q₂,q₃)` and the error is the residual of the remaining
/// orientation constraint projected onto `h₅` and `h₆`.
fn two_intersecting_candidates(
    q4: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<Candidate123, 4> {
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    let p3 = kin.offsets[3] + rot(&h4, q4).apply(&kin.offsets[4]);
    let mut out = ArrayVec::new();
    let Ok(sols) = sp5(&-kin.offsets[1], p06, &kin.offsets[2], &p3, &h1, &h2, &h3) else {
        return out;
    };
    for b in &sols.branches {
        if b.is_ls {
            continue;
        }
        let (q1, q2, q3) = (-b.angles[0], b.angles[1], b.angles[2]);
        let r04 = rot(&h1, q1)
            .compose(&rot(&h2, q2))
            .compose(&rot(&h3, q3))
            .compose(&rot(&h4, q4));
        let error = h5.dot(&r04.transposed().compose(r06).apply(h6.as_vec())) - h5.dot(h6.as_vec());
        if out.try_push(Candidate123 { q123: [q1, q2, q3], error }).is_err() {
            break;
        }
    }
    out
}

pub fn err_2_intersecting(q4: f64, r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> ArrayVec<f64, 4> {
    two_intersecting_candidates(q4, r06, p06, kin)
        .iter()
        .map(|c| c.error)
        .collect()
}

struct CandidateParallel {
    q4: f64,
    q6: f64,
    sum23: f64,
    error: f64,
}

/// Axes 2 and 3 parallel; for a fixed `q₁` Subproblem 6 gives up to four
/// `(q₄, q₆)` and the error compares the reachable and required elbow
/// offset norms.
fn two_parallel_candidates(
    q1: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<CandidateParallel, 4> {
    let [h1, h2, _h3, h4, _h5, h6] = kin.axes;
    let (p12, p23, p34, p45, p56) =
        (kin.offsets[1], kin.offsets[2], kin.offsets[3], kin.offsets[4], kin.offsets[5]);
    let r10 = rot(&h1, -q1);
    let w = r06.transposed().compose(&rot(&h1, q1)).apply(h2.as_vec());
    let d1 = h2.dot(&(r10.apply(p06) - p12 - p23 - p34));
    // θ₁ = q₄ about h₄, θ₂ = −q₆ about h₆
    let sols = sp6(
        &[*h2.as_vec(), w, -h2.as_vec(), w],
        &[h4, h6, h4, h6],
        &[p45, p56, *kin.axes[4].as_vec(), *kin.axes[4].as_vec()],
        d1,
        0.0,
    );
    let mut out = ArrayVec::new();
    for b in &sols.branches {
        if b.is_ls {
            continue;
        }
        let (q4, q6) = (b.angles[0], -b.angles[1]);
        // q₂+q₃ from R₁₃R₃₄h₅ = R₁₀R₀₆R₆₅h₅
        let h5 = kin.axes[4];
        let lhs_vec = rot(&h4, q4).apply(h5.as_vec());
        let rhs_vec = r10
            .compose(r06)
            .compose(&rot(&h6, -q6))
            .apply(h5.as_vec());
        let sum_sols = sp1(&lhs_vec, &rhs_vec, &h2);
        let sum23 = sum_sols.branches[0].angles[0];
        let r13 = rot(&h2, sum23);
        let r14 = r13.compose(&rot(&h4, q4));
        let v = r10.apply(p06)
            - p12
            - r13.apply(&p34)
            - r14.apply(&p45)
            - r10.compose(r06).compose(&rot(&h6, -q6)).apply(&p56);
        let error = v.norm() - p23.norm();
        if out.try_push(CandidateParallel { q4, q6, sum23, error }).is_err() {
            break;
        }
    }
    out
}

pub fn err_2_parallel(q1: f64, r06: &RotMat, p06: &Vec3, kin: &Kinematics) -> ArrayVec<f64, 4> {
    two_parallel_candidates(q1, r06, p06, kin)
        .iter()
        .map(|c| c.error)
        .collect()
}

/// Axes 4 and 6 always intersect; shifting both origins to the intersection
/// point (for the given `q₅`) reduces the position problem to Subproblem 5.
/// Near the isolated `q₅` where the axes turn parallel the intersection is
/// replaced by the regularized nearest-approach point, keeping every branch
/// value finite.
fn nonconsecutive_candidates(
    q5: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<Candidate123, 4> {
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    let r45 = rot(&h5, q5);
    let a6 = r45.apply(h6.as_vec());
    let rhs = kin.offsets[4] + r45.apply(&kin.offsets[5]);
    // t·h₄ − u·a₆ = rhs (normal equations, Tikhonov-regularized near parallel)
    let c = h4.dot(&a6);
    let det = 1.0 - c * c;
    let lambda = if det <= 1e-12 { 1e-9 } else { 0.0 };
    let rhs_t = h4.dot(&rhs);
    let rhs_u = -a6.dot(&rhs);
    let denom = (1.0 + lambda) * (1.0 + lambda) - c * c;
    let t = ((1.0 + lambda) * rhs_t + c * rhs_u) / denom;
    let u = (c * rhs_t + (1.0 + lambda) * rhs_u) / denom;

    let p04 = p06 + u * r06.apply(h6.as_vec());
    let p34 = kin.offsets[3] + t * h4.as_vec();
    let mut out = ArrayVec::new();
    let Ok(sols) = sp5(&-kin.offsets[1], &p04, &kin.offsets[2], &p34, &h1, &h2, &h3) else {
        return out;
    };
    for b in &sols.branches {
        if b.is_ls {
            continue;
        }
        let (q1, q2, q3) = (-b.angles[0], b.angles[1], b.angles[2]);
        let r03 = rot(&h1, q1).compose(&rot(&h2, q2)).compose(&rot(&h3, q3));
        let error = h4.dot(&r03.transposed().compose(r06).apply(h6.as_vec())) - h4.dot(&a6);
        if out.try_push(Candidate123 { q123: [q1, q2, q3], error }).is_err() {
            break;
        }
    }
    out
}

pub fn err_2_nonconsecutive(
    q5: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<f64, 4> {
    nonconsecutive_candidates(q5, r06, p06, kin)
        .iter()
        .map(|c| c.error)
        .collect()
}

struct Candidate345 {
    q345: [f64; 3],
    error: Vec3,
}

/// Fully general 6R: for fixed `(q₁, q₂)` Subproblem 5 gives up to four
/// `(q₃,q₄,q₅)`; the error is the mismatch of the rotated tool axis.
fn general_candidates(
    q1: f64,
    q2: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<Candidate345, 4> {
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    let v = rot(&h2, -q2).apply(&(rot(&h1, -q1).apply(p06) - kin.offsets[1])) - kin.offsets[2];
    let mut out = ArrayVec::new();
    let Ok(sols) = sp5(&-kin.offsets[3], &v, &kin.offsets[4], &kin.offsets[5], &h3, &h4, &h5)
    else {
        return out;
    };
    for b in &sols.branches {
        if b.is_ls {
            continue;
        }
        let (q3, q4, q5) = (-b.angles[0], b.angles[1], b.angles[2]);
        let r05 = rot(&h1, q1)
            .compose(&rot(&h2, q2))
            .compose(&rot(&h3, q3))
            .compose(&rot(&h4, q4))
            .compose(&rot(&h5, q5));
        let error = r05.apply(h6.as_vec()) - r06.apply(h6.as_vec());
        if out.try_push(Candidate345 { q345: [q3, q4, q5], error }).is_err() {
            break;
        }
    }
    out
}

pub fn err_general(
    q1: f64,
    q2: f64,
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
) -> ArrayVec<Vec3, 4> {
    general_candidates(q1, q2, r06, p06, kin)
        .iter()
        .map(|c| c.error)
        .collect()
}

// ---------------------------------------------------------------------------
// Search-based IK solvers
// ---------------------------------------------------------------------------

fn gate_and_push(
    set: &mut SolutionSet,
    kin: &Kinematics,
    r06: &RotMat,
    p06: &Vec3,
    q: [f64; 6],
    from_continuum: bool,
) {
    let q = JointConfig(q);
    let residual = super::reduced_residual(kin, &q, r06, p06);
    // search solutions are exact by intent: anything failing the forward
    // kinematics gate is a false positive and is dropped
    if residual <= 1e-8 * length_scale(kin) {
        set.push(IkSolution { q, is_ls: false, fk_residual: residual, from_continuum });
    }
}

/// 1D search over `q₄` for robots with axes 5 and 6 intersecting.
pub fn ik_2_intersecting(
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
    cfg: &SearchConfig,
) -> SolutionSet {
    let mut set = SolutionSet::default();
    let f = |q4: f64| err_2_intersecting(q4, r06, p06, kin);
    let result = search_1d(&f, cfg);
    if result.aborted_brackets > 0 {
        set.note_continuum("bracket association failure");
    }
    let [_, _, _, h4, h5, h6] = kin.axes;
    for zero in &result.zeros {
        let q4 = zero.angle;
        for cand in &two_intersecting_candidates(q4, r06, p06, kin) {
            let [q1, q2, q3] = cand.q123;
            let r04 = rot(&kin.axes[0], q1)
                .compose(&rot(&kin.axes[1], q2))
                .compose(&rot(&kin.axes[2], q3))
                .compose(&rot(&h4, q4));
            let m = r04.transposed().compose(r06);
            // R₄₅h₆ = R₀₄ᵀR₀₆h₆ and R₆₅h₅ = R₀₆ᵀR₀₄h₅
            let sols5 = sp1(h6.as_vec(), &m.apply(h6.as_vec()), &h5);
            let sols6 = sp1(h5.as_vec(), &m.transposed().apply(h5.as_vec()), &h6);
            let continuum = sols5.is_continuum || sols6.is_continuum;
            if continuum {
                set.note_continuum("wrist pair (circle and point)");
            }
            let q5 = sols5.branches[0].angles[0];
            let q6 = -sols6.branches[0].angles[0];
            gate_and_push(&mut set, kin, r06, p06, [q1, q2, q3, q4, q5, q6], continuum);
        }
    }
    set.sort();
    set
}

/// 1D search over `q₁` for robots with axes 2 and 3 parallel.
pub fn ik_2_parallel(
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
    cfg: &SearchConfig,
) -> SolutionSet {
    let mut set = SolutionSet::default();
    let f = |q1: f64| err_2_parallel(q1, r06, p06, kin);
    let result = search_1d(&f, cfg);
    if result.aborted_brackets > 0 {
        set.note_continuum("bracket association failure");
    }
    let [h1, h2, _h3, h4, h5, h6] = kin.axes;
    for zero in &result.zeros {
        let q1 = zero.angle;
        for cand in &two_parallel_candidates(q1, r06, p06, kin) {
            let (q4, q6, sum23) = (cand.q4, cand.q6, cand.sum23);
            // q₅ from h₂ᵀR₃₄R₄₅ = h₂ᵀR₁₀R₀₆R₆₅
            let u = rot(&h4, -q4).apply(h2.as_vec());
            let z = rot(&h6, q6)
                .compose(&r06.transposed())
                .compose(&rot(&h1, q1))
                .apply(h2.as_vec());
            let sols5 = sp1(&u, &z, &h5);
            let continuum = sols5.is_continuum;
            if continuum {
                set.note_continuum("forearm (circle and point)");
            }
            let q5 = -sols5.branches[0].angles[0];
            let r13 = rot(&h2, sum23);
            let r15 = r13.compose(&rot(&h4, q4)).compose(&rot(&h5, q5));
            let v = rot(&h1, -q1).apply(p06)
                - kin.offsets[1]
                - r13.apply(&kin.offsets[3])
                - r13.compose(&rot(&h4, q4)).apply(&kin.offsets[4])
                - r15.apply(&kin.offsets[5]);
            let sols2 = sp1(&kin.offsets[2], &v, &h2);
            let q2 = sols2.branches[0].angles[0];
            let q3 = wrap_to_pi(sum23 - q2);
            gate_and_push(&mut set, kin, r06, p06, [q1, q2, q3, q4, q5, q6], continuum);
        }
    }
    set.sort();
    set
}

/// 1D search over `q₅` for robots whose axes 4 and 6 always intersect.
pub fn ik_2_nonconsecutive(
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
    cfg: &SearchConfig,
) -> SolutionSet {
    let mut set = SolutionSet::default();
    let f = |q5: f64| err_2_nonconsecutive(q5, r06, p06, kin);
    let result = search_1d(&f, cfg);
    if result.aborted_brackets > 0 {
        set.note_continuum("bracket association failure");
    }
    let [h1, h2, h3, h4, h5, h6] = kin.axes;
    for zero in &result.zeros {
        let q5 = zero.angle;
        let a6 = rot(&h5, q5).apply(h6.as_vec());
        for cand in &nonconsecutive_candidates(q5, r06, p06, kin) {
            let [q1, q2, q3] = cand.q123;
            let r03 = rot(&h1, q1).compose(&rot(&h2, q2)).compose(&rot(&h3, q3));
            let m = r03.transposed().compose(r06);
            // R₃₄R₄₅h₆ = R₀₃ᵀR₀₆h₆ and R₆₅R₅₄h₄ = R₀₆ᵀR₀₃h₄
            let sols4 = sp1(&a6, &m.apply(h6.as_vec()), &h4);
            let sols6 = sp1(
                &rot(&h5, -q5).apply(h4.as_vec()),
                &m.transposed().apply(h4.as_vec()),
                &h6,
            );
            let continuum = sols4.is_continuum || sols6.is_continuum;
            if continuum {
                set.note_continuum("parallel wrist pair (circle and point)");
            }
            let q4 = sols4.branches[0].angles[0];
            let q6 = -sols6.branches[0].angles[0];
            gate_and_push(&mut set, kin, r06, p06, [q1, q2, q3, q4, q5, q6], continuum);
        }
    }
    set.sort();
    set
}

/// 2D search over `(q₁, q₂)` for fully general 6R robots.
pub fn ik_general_6r(
    r06: &RotMat,
    p06: &Vec3,
    kin: &Kinematics,
    cfg: &SearchConfig,
) -> SolutionSet {
    let mut set = SolutionSet::default();
    let f = |q1: f64, q2: f64| err_general(q1, q2, r06, p06, kin);
    let zeros = search_2d(&f, cfg);
    let h6 = kin.axes[5];
    let probe = {
        let mut best = Vec3::x();
        let mut best_dot = f64::INFINITY;
        for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
            let d = h6.dot(&axis).abs();
            if d < best_dot {
                best_dot = d;
                best = axis;
            }
        }
        best
    };
    for zero in &zeros {
        let [q1, q2] = zero.angles;
        for cand in &general_candidates(q1, q2, r06, p06, kin) {
            let [q3, q4, q5] = cand.q345;
            let r05 = rot(&kin.axes[0], q1)
                .compose(&rot(&kin.axes[1], q2))
                .compose(&rot(&kin.axes[2], q3))
                .compose(&rot(&kin.axes[3], q4))
                .compose(&rot(&kin.axes[4], q5));
            // R₅₆ p = R₀₅ᵀ R₀₆ p for p off the h₆ axis
            let target = r05.transposed().compose(r06).apply(&probe);
            let sols6 = sp1(&probe, &target, &h6);
            let continuum = sols6.is_continuum;
            if continuum {
                set.note_continuum("flange (circle and point)");
            }
            let q6 = sols6.branches[0].angles[0];
            gate_and_push(&mut set, kin, r06, p06, [q1, q2, q3, q4, q5, q6], continuum);
        }
    }
    set.sort();
    set
}
