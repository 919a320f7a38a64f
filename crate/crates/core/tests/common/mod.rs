//! Independent oracles shared by the integration tests. Nothing here calls
//! the code path it is used to check.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use cmpcc::corridor::{Corridor, Halfspace, Polyhedron};
use cmpcc::mpcc::{idx, AugmentedState, ControlInput, MpccConfig};
use cmpcc::qp::{CscMatrix, QpProblem};
use cmpcc::trajectory::{PolySegment, ReferenceTrajectory};
use cmpcc::io::{load_scenario, LoadedScenario};
use cmpcc::Vec3;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn load_bundled(name: &str) -> LoadedScenario<f64> {
    let path = data_dir().join(format!("{name}.json"));
    load_scenario(&path).unwrap_or_else(|e| panic!("{e}"))
}

// ---------------------------------------------------------------- trajectory

/// Piecewise polynomial as plain data, evaluated by a linear segment scan and
/// Horner's rule on explicitly differentiated coefficients.
pub struct BrutePoly {
    pub t0: f64,
    /// (duration, [x, y, z] ascending coefficients)
    pub segments: Vec<(f64, [Vec<f64>; 3])>,
}

fn differentiate(c: &[f64], order: u8) -> Vec<f64> {
    let mut c = c.to_vec();
    for _ in 0..order {
        c = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

impl BrutePoly {
    pub fn tm(&self) -> f64 {
        self.t0 + self.segments.iter().map(|s| s.0).sum::<f64>()
    }

    pub fn eval(&self, t: f64, order: u8) -> [f64; 3] {
        let tm = self.tm();
        if order > 0 && (t > tm || t < self.t0) {
            return [0.0; 3];
        }
        let t = t.clamp(self.t0, tm);
        let mut start = self.t0;
        for (i, (dur, coeffs)) in self.segments.iter().enumerate() {
            let last = i + 1 == self.segments.len();
            if t < start + dur || last {
                let tau = t - start;
                return std::array::from_fn(|a| horner(&differentiate(&coeffs[a], order), tau));
            }
            start += dur;
        }
        unreachable!()
    }
}

// ------------------------------------------------------------------ geometry

/// Random bounded polytope with `faces` faces containing the ball of radius
/// 0.5 around `center`.
pub fn random_polytope(rng: &mut impl Rng, faces: usize, center: Vec3<f64>) -> Polyhedron<f64> {
    loop {
        let hs: Vec<Halfspace<f64>> = (0..faces)
            .map(|_| {
                let n = random_unit(rng);
                let d = rng.random_range(0.5..1.5);
                Halfspace::new(n, n.dot(&center) + d)
            })
            .collect();
        if dd_vertices(&hs).is_some() {
            return Polyhedron::new(hs).expect("bounded with interior");
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

#[derive(Clone)]
struct DdVertex {
    p: Vec3<f64>,
    active: Vec<usize>,
}

const DD_BOX: f64 = 1e3;
const DD_EPS: f64 = 1e-9;

/// Vertex set by the double-description method: start from a large box and
/// cut it by one halfspace at a time, creating a vertex on every edge that
/// crosses the cutting plane. Edges are recognized combinatorially (two
/// vertices sharing at least two active planes that no third vertex also
/// has). `None` when a vertex of the result still touches the box.
pub fn dd_vertices(faces: &[Halfspace<f64>]) -> Option<Vec<Vec3<f64>>> {
    let nf = faces.len();
    // Box planes get ids nf..nf+6: +x, -x, +y, -y, +z, -z.
    let mut verts: Vec<DdVertex> = Vec::new();
    for mask in 0..8 {
        let s = |b: usize| if mask >> b & 1 == 1 { 1.0 } else { -1.0 };
        let p = Vec3::new(s(0) * DD_BOX, s(1) * DD_BOX, s(2) * DD_BOX);
        let active = (0..3).map(|a| nf + 2 * a + usize::from(s(a) < 0.0)).collect();
        verts.push(DdVertex { p, active });
    }
    for (id, f) in faces.iter().enumerate() {
        let nn = f.normal.norm();
        let slack: Vec<f64> = verts.iter().map(|v| (f.normal.dot(&v.p) - f.offset) / nn).collect();
        let mut next: Vec<DdVertex> = Vec::new();
        for (v, &s) in verts.iter().zip(&slack) {
            if s <= DD_EPS {
                let mut v = v.clone();
                if s.abs() <= DD_EPS {
                    v.active.push(id);
                }
                next.push(v);
            }
        }
        for i in 0..verts.len() {
            for j in 0..verts.len() {
                if !(slack[i] < -DD_EPS && slack[j] > DD_EPS) {
                    continue;
                }
                let common: Vec<usize> = verts[i]
                    .active
                    .iter()
                    .copied()
                    .filter(|a| verts[j].active.contains(a))
                    .collect();
                if common.len() < 2 {
                    continue;
                }
                let adjacent = verts
                    .iter()
                    .enumerate()
                    .all(|(k, w)| k == i || k == j || !common.iter().all(|a| w.active.contains(a)));
                if !adjacent {
                    continue;
                }
                let lambda = slack[i] / (slack[i] - slack[j]);
                let p = verts[i].p + (verts[j].p - verts[i].p) * lambda;
                let mut active = common;
                active.push(id);
                next.push(DdVertex { p, active });
            }
        }
        verts = next;
        if verts.is_empty() {
            return None;
        }
    }
    if verts.iter().any(|v| v.active.iter().any(|&a| a >= nf)) {
        return None;
    }
    let mut out: Vec<Vec3<f64>> = Vec::new();
    for v in verts {
        if !out.iter().any(|w| (*w - v.p).norm_inf() < 1e-9) {
            out.push(v.p);
        }
    }
    Some(out)
}

/// Every point of `a` has a partner in `b` within `tol` and vice versa.
pub fn same_point_set(a: &[Vec3<f64>], b: &[Vec3<f64>], tol: f64) -> bool {
    let covered = |x: &[Vec3<f64>], y: &[Vec3<f64>]| x.iter().all(|p| y.iter().any(|q| (*p - *q).norm_inf() <= tol));
    covered(a, b) && covered(b, a)
}

/// Cross-section of a polytope by clipping a large regular polygon in the
/// plane through `point` (spanned by `e1`, `e2`) against every face, then
/// dropping repeated and collinear points. Returns in-plane coordinates.
pub fn clip_section(
    faces: &[Halfspace<f64>],
    point: Vec3<f64>,
    e1: Vec3<f64>,
    e2: Vec3<f64>,
) -> Vec<[f64; 2]> {
    const DISC_SIDES: usize = 64;
    const DISC_RADIUS: f64 = 1e3;
    let mut poly: Vec<[f64; 2]> = (0..DISC_SIDES)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / DISC_SIDES as f64;
            [DISC_RADIUS * a.cos(), DISC_RADIUS * a.sin()]
        })
        .collect();
    for f in faces {
        let a = f.normal.dot(&e1);
        let b = f.normal.dot(&e2);
        let c = f.offset - f.normal.dot(&point);
        let val = |p: [f64; 2]| a * p[0] + b * p[1] - c;
        let mut out = Vec::new();
        for i in 0..poly.len() {
            let cur = poly[i];
            let nxt = poly[(i + 1) % poly.len()];
            let (vc, vn) = (val(cur), val(nxt));
            if vc <= 0.0 {
                out.push(cur);
            }
            if (vc < 0.0 && vn > 0.0) || (vc > 0.0 && vn < 0.0) {
                let t = vc / (vc - vn);
                out.push([cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])]);
            }
        }
        poly = out;
        if poly.is_empty() {
            return poly;
        }
    }
    simplify_polygon(poly)
}

fn simplify_polygon(mut poly: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let close = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()) < 1e-10;
    loop {
        let n = poly.len();
        if n < 3 {
            return poly;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = poly[(i + n - 1) % n];
            let cur = poly[i];
            let next = poly[(i + 1) % n];
            let cross = (cur[0] - prev[0]) * (next[1] - cur[1]) - (cur[1] - prev[1]) * (next[0] - cur[0]);
            let scale = 1.0_f64
                .max((cur[0] - prev[0]).hypot(cur[1] - prev[1]))
                .max((next[0] - cur[0]).hypot(next[1] - cur[1]));
            if close(prev, cur) || cross.abs() < 1e-12 * scale * scale {
                poly.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return poly;
        }
    }
}

// ------------------------------------------------------------------------ QP

/// Dense QP `min ½xᵀPx + qᵀx` s.t. `l <= Ax <= u`.
pub struct DenseQp {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub a: DMatrix<f64>,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
}

const BIG: f64 = 1e20;

/// Solves a strictly convex QP by enumerating working sets in order of size.
/// For each set (row, side) the equality-constrained KKT system is solved
/// densely; the first primal-feasible point with correctly signed
/// multipliers is the unique optimum. Equality rows are always in the set.
pub fn active_set_oracle(qp: &DenseQp, max_active: usize) -> Option<DVector<f64>> {
    let m = qp.a.nrows();
    let eq: Vec<usize> = (0..m).filter(|&i| qp.u[i] - qp.l[i] <= 1e-12).collect();
    let ineq: Vec<usize> = (0..m).filter(|i| !eq.contains(i)).collect();
    for size in 0..=max_active.min(ineq.len()) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            // Each chosen row at its lower (false) or upper (true) bound.
            for sides in 0..(1u32 << size) {
                let mut rows: Vec<(usize, Option<bool>)> = eq.iter().map(|&i| (i, None)).collect();
                let mut skip = false;
                for (b, &c) in combo.iter().enumerate() {
                    let i = ineq[c];
                    let upper = sides >> b & 1 == 1;
                    let bound = if upper { qp.u[i] } else { qp.l[i] };
                    if bound.abs() >= BIG {
                        skip = true;
                        break;
                    }
                    rows.push((i, Some(upper)));
                }
                if skip {
                    continue;
                }
                if let Some(x) = try_working_set(qp, &rows) {
                    return Some(x);
                }
            }
            if !next_combination(&mut combo, ineq.len()) {
                break;
            }
        }
    }
    None
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn try_working_set(qp: &DenseQp, rows: &[(usize, Option<bool>)]) -> Option<DVector<f64>> {
    let n = qp.p.nrows();
    let w = rows.len();
    let mut kkt = DMatrix::zeros(n + w, n + w);
    let mut rhs = DVector::zeros(n + w);
    kkt.view_mut((0, 0), (n, n)).copy_from(&qp.p);
    for i in 0..n {
        rhs[i] = -qp.q[i];
    }
    for (r, &(row, side)) in rows.iter().enumerate() {
        for j in 0..n {
            kkt[(n + r, j)] = qp.a[(row, j)];
            kkt[(j, n + r)] = qp.a[(row, j)];
        }
        rhs[n + r] = match side {
            Some(true) | None => qp.u[row],
            Some(false) => qp.l[row],
        };
    }
    let sol = kkt.lu().solve(&rhs)?;
    if !sol.iter().all(|v| v.is_finite()) {
        return None;
    }
    let x = sol.rows(0, n).into_owned();
    let ax = &qp.a * &x;
    let tol = 1e-9 * (1.0 + x.amax());
    for i in 0..qp.a.nrows() {
        if ax[i] < qp.l[i] - tol || ax[i] > qp.u[i] + tol {
            return None;
        }
    }
    // Stationarity Px + q + Aᵀy = 0: upper-active rows need y >= 0.
    for (r, &(_, side)) in rows.iter().enumerate() {
        let y = sol[n + r];
        match side {
            Some(true) if y < -1e-9 => return None,
            Some(false) if y > 1e-9 => return None,
            _ => {}
        }
    }
    Some(x)
}

/// Random strictly convex QP with a planted solution whose active set has at
/// most `max_active` inequality rows. Returns the problem and the planted
/// primal.
pub fn planted_qp(rng: &mut impl Rng, n: usize, m: usize, max_active: usize) -> (DenseQp, DVector<f64>) {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let g = DMatrix::from_fn(n, n, |_, _| r(-1.0, 1.0));
    let p = g.transpose() * &g + DMatrix::identity(n, n) * 0.1;
    let a = DMatrix::from_fn(m, n, |_, _| r(-1.0, 1.0));
    let x = DVector::from_fn(n, |_, _| r(-2.0, 2.0));
    let ax = &a * &x;

    let n_eq = if m > 2 && r(0.0, 1.0) < 0.3 { 1 } else { 0 };
    let n_act = (r(0.0, (max_active.min(n - n_eq) + 1) as f64) as usize).min(max_active);
    let mut y = DVector::zeros(m);
    let mut l = vec![0.0; m];
    let mut u = vec![0.0; m];
    for i in 0..m {
        let gap_lo = r(0.1, 2.0);
        let gap_hi = r(0.1, 2.0);
        let one_sided = r(0.0, 1.0);
        if i < n_eq {
            l[i] = ax[i];
            u[i] = ax[i];
            y[i] = r(-1.0, 1.0);
        } else if i < n_eq + n_act {
            if r(0.0, 1.0) < 0.5 {
                u[i] = ax[i];
                l[i] = if one_sided < 0.3 { -1e30 } else { ax[i] - gap_lo };
                y[i] = r(0.1, 2.0);
            } else {
                l[i] = ax[i];
                u[i] = if one_sided < 0.3 { 1e30 } else { ax[i] + gap_hi };
                y[i] = -r(0.1, 2.0);
            }
        } else {
            l[i] = if one_sided < 0.2 { -1e30 } else { ax[i] - gap_lo };
            u[i] = if one_sided > 0.8 { 1e30 } else { ax[i] + gap_hi };
        }
    }
    let q = -(&p * &x) - a.transpose() * &y;
    (DenseQp { p, q, a, l, u }, x)
}

pub fn to_sparse(qp: &DenseQp) -> QpProblem<f64> {
    let n = qp.p.nrows();
    let mut p = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            p.push((i, j, qp.p[(i, j)]));
        }
    }
    let mut a = Vec::new();
    for i in 0..qp.a.nrows() {
        for j in 0..n {
            a.push((i, j, qp.a[(i, j)]));
        }
    }
    QpProblem::new(
        CscMatrix::from_triplets(n, n, &p),
        qp.q.iter().copied().collect(),
        CscMatrix::from_triplets(qp.a.nrows(), n, &a),
        qp.l.clone(),
        qp.u.clone(),
    )
    .unwrap()
}

// ------------------------------------------------------------------ controller

/// `Σ ‖μ − p(t)‖² − ρ v_t`, written out independently of the library.
pub fn nonlinear(traj: &ReferenceTrajectory<f64>, rho: f64, states: &[AugmentedState<f64>]) -> f64 {
    states
        .iter()
        .map(|x| {
            let p = traj.position(x[idx::T]);
            (x[idx::X] - p[0]).powi(2) + (x[idx::Y] - p[1]).powi(2) + (x[idx::Z] - p[2]).powi(2) - rho * x[idx::VT]
        })
        .sum()
}

/// The explicit linearized cost plus the smoothing terms, for finite
/// differences.
pub fn linearized(
    traj: &ReferenceTrajectory<f64>,
    config: &MpccConfig<f64>,
    thetas: &[f64],
    states: &[AugmentedState<f64>],
    inputs: &[ControlInput<f64>],
) -> f64 {
    let mut j = 0.0;
    for (x, &th) in states.iter().zip(thetas) {
        let th = traj.clamp_time(th);
        let p = traj.position(th);
        let d = traj.velocity(th);
        let a = traj.acceleration(th);
        let dt = x[idx::T] - th;
        for axis in 0..3 {
            j += (x[idx::POS[axis]] - (p[axis] + d[axis] * dt)).powi(2);
            j += config.accel_weight * (x[idx::ACC[axis]] - a[axis]).powi(2);
        }
        j += config.accel_weight * x[idx::AT].powi(2);
        j -= config.rho * x[idx::VT];
    }
    for u in inputs {
        j += config.jerk_weight * u.iter().map(|v| v * v).sum::<f64>();
    }
    j
}

pub fn smoothing(
    traj: &ReferenceTrajectory<f64>,
    config: &MpccConfig<f64>,
    thetas: &[f64],
    states: &[AugmentedState<f64>],
    inputs: &[ControlInput<f64>],
) -> f64 {
    linearized(traj, &MpccConfig { rho: 0.0, ..*config }, thetas, states, inputs)
        - linearized(
            traj,
            &MpccConfig {
                rho: 0.0,
                accel_weight: 0.0,
                jerk_weight: 0.0,
                ..*config
            },
            thetas,
            states,
            inputs,
        )
}

/// Random cubic chain, possibly discontinuous, well inside `wide_box`.
pub fn random_reference(rng: &mut impl Rng) -> ReferenceTrajectory<f64> {
    let segs = rng.random_range(1..4);
    let start = rng.random_range(-2.0..2.0);
    let out = (0..segs)
        .map(|i| {
            let d = rng.random_range(0.5..2.0);
            let c = std::array::from_fn(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
            PolySegment::new(d, c, i)
        })
        .collect();
    ReferenceTrajectory::new_unchecked(start, out)
}

pub fn wide_box(n: usize) -> Corridor<f64> {
    let b = Polyhedron::axis_box(Vec3::new(-100.0, -100.0, -100.0), Vec3::new(100.0, 100.0, 100.0)).unwrap();
    Corridor::new(vec![b; n]).unwrap()
}

pub fn sorted_thetas(rng: &mut impl Rng, traj: &ReferenceTrajectory<f64>, n: usize) -> Vec<f64> {
    let mut th: Vec<f64> = (0..n).map(|_| rng.random_range(traj.t0()..traj.tm())).collect();
    th.sort_by(f64::total_cmp);
    th
}

pub fn random_state(rng: &mut impl Rng) -> AugmentedState<f64> {
    std::array::from_fn(|_| rng.random_range(-2.0..2.0))
}
