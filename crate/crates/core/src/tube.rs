//! Polygon-tube safety constraints: the section of a corridor polyhedron
//! with the plane normal to the reference velocity, swept along that
//! velocity into halfspaces.

use std::cmp::Ordering;

use thiserror::Error;

use crate::corridor::{Corridor, Halfspace, Polyhedron};
use crate::scalar::Real;
use crate::trajectory::{ReferenceTrajectory, TrajectoryError};
use crate::vec3::Vec3;

const MIN_DIRECTION: f64 = 1e-9;
/// Reference speed below which `tube_at` uses the raw polyhedron.
pub const HOVER_SPEED: f64 = 1e-6;
const POINT_TOL: f64 = 1e-6;
const PARALLEL_TOL: f64 = 1e-9;
const VERTEX_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TubeError {
    #[error("section direction has near-zero length")]
    ZeroDirection,
    #[error("degenerate section: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("corridor index {index} out of range ({len} polyhedra)")]
    CorridorIndex { index: usize, len: usize },
}

/// Convex polygon in the plane through `plane_point` normal to `axis`,
/// expressed in the orthonormal basis `(e1, e2)` with `e1 × e2 = axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection<T> {
    pub plane_point: Vec3<T>,
    pub axis: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    /// Counter-clockwise.
    pub vertices2d: Vec<[T; 2]>,
}

impl<T: Real> CrossSection<T> {
    pub fn lift(&self, v: [T; 2]) -> Vec3<T> {
        self.plane_point + self.e1 * v[0] + self.e2 * v[1]
    }

    /// In-plane coordinates of the orthogonal projection of `q`.
    pub fn project(&self, q: Vec3<T>) -> [T; 2] {
        let d = q - self.plane_point;
        [d.dot(&self.e1), d.dot(&self.e2)]
    }

    pub fn vertices3d(&self) -> Vec<Vec3<T>> {
        self.vertices2d.iter().map(|&v| self.lift(v)).collect()
    }
}

/// Per-step safety rows `C q <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeConstraints<T> {
    pub rows: Vec<Halfspace<T>>,
    /// Set when the rows are the polyhedron's own faces.
    pub fallback: bool,
    pub polyhedron: usize,
    pub section: Option<CrossSection<T>>,
}

impl<T: Real> TubeConstraints<T> {
    /// Smallest normalized slack `(b - n·q)/‖n‖`; negative when violated.
    pub fn min_slack(&self, q: Vec3<T>) -> T {
        self.rows
            .iter()
            .map(|r| -r.signed_distance(q))
            .fold(T::infinity(), T::min)
    }

    pub fn contains(&self, q: Vec3<T>, tol: T) -> bool {
        self.rows
            .iter()
            .all(|r| r.normal.dot(&q) <= r.offset + tol * r.normal.norm())
    }
}

#[derive(Clone, Copy)]
struct Line<T> {
    n: [T; 2],
    h: T,
}

fn cross2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

pub fn cross_section<T: Real>(
    poly: &Polyhedron<T>,
    point: Vec3<T>,
    direction: Vec3<T>,
) -> Result<CrossSection<T>, TubeError> {
    let axis = direction
        .normalized(T::of(MIN_DIRECTION))
        .ok_or(TubeError::ZeroDirection)?;
    let (face, dist) = poly.worst_face(point);
    if dist > T::of(POINT_TOL) {
        return Err(TubeError::Degenerate(format!(
            "point lies {:.3e} outside face {face}",
            dist.to_f64_lossy()
        )));
    }
    let e1 = axis
        .any_orthogonal()
        .normalized(T::of(MIN_DIRECTION))
        .ok_or(TubeError::ZeroDirection)?;
    let e2 = axis.cross(&e1);

    let mut lines: Vec<Line<T>> = Vec::with_capacity(poly.faces().len());
    for (i, f) in poly.faces().iter().enumerate() {
        let nn = f.normal.norm();
        let m = [f.normal.dot(&e1) / nn, f.normal.dot(&e2) / nn];
        let h = (f.offset - f.normal.dot(&point)) / nn;
        let len = m[0].hypot(m[1]);
        if len < T::of(PARALLEL_TOL) {
            if h < -T::of(PARALLEL_TOL) {
                return Err(TubeError::Degenerate(format!("face {i} is parallel to the plane and excludes it")));
            }
            continue;
        }
        lines.push(Line {
            n: [m[0] / len, m[1] / len],
            h: h / len,
        });
    }

    let scale = lines.iter().fold(T::one(), |s, l| s.max(l.h.abs()));
    let tol = T::of(VERTEX_TOL) * scale;
    let mut pts: Vec<[T; 2]> = Vec::new();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a, b) = (lines[i], lines[j]);
            let det = cross2(a.n, b.n);
            if det.abs() < T::of(1e-12) {
                continue;
            }
            let v = [(a.h * b.n[1] - b.h * a.n[1]) / det, (a.n[0] * b.h - b.n[0] * a.h) / det];
            if !lines.iter().all(|l| l.n[0] * v[0] + l.n[1] * v[1] <= l.h + tol) {
                continue;
            }
            let dup = pts
                .iter()
                .any(|w| (w[0] - v[0]).abs().max((w[1] - v[1]).abs()) <= T::of(DEDUP_TOL) * scale);
            if !dup {
                pts.push(v);
            }
        }
    }
    if pts.len() < 3 {
        return Err(TubeError::Degenerate(format!("section has {} vertices", pts.len())));
    }

    let k = T::of(pts.len() as f64);
    let cx = pts.iter().map(|p| p[0]).sum::<T>() / k;
    let cy = pts.iter().map(|p| p[1]).sum::<T>() / k;
    pts.sort_by(|a, b| {
        let (ax, ay) = (a[0] - cx, a[1] - cy);
        let (bx, by) = (b[0] - cx, b[1] - cy);
        ay.atan2(ax)
            .partial_cmp(&by.atan2(bx))
            .unwrap_or(Ordering::Equal)
            .then((ax * ax + ay * ay).partial_cmp(&(bx * bx + by * by)).unwrap_or(Ordering::Equal))
    });
    drop_collinear(&mut pts, tol);
    if pts.len() < 3 {
        return Err(TubeError::Degenerate("section has no area".into()));
    }

    Ok(CrossSection {
        plane_point: point,
        axis,
        e1,
        e2,
        vertices2d: pts,
    })
}

/// Removes vertices lying on the segment between their neighbours.
fn drop_collinear<T: Real>(pts: &mut Vec<[T; 2]>, tol: T) {
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let d1 = [cur[0] - prev[0], cur[1] - prev[1]];
            let d2 = [next[0] - cur[0], next[1] - cur[1]];
            let base = (next[0] - prev[0]).hypot(next[1] - prev[1]);
            if cross2(d1, d2) <= tol * base {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
}

/// One unit-normal row per polygon edge.
pub fn sweep<T: Real>(section: &CrossSection<T>) -> Vec<Halfspace<T>> {
    let v = &section.vertices2d;
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = d[0].hypot(d[1]);
            let n2 = [d[1] / len, -d[0] / len];
            let support = n2[0] * a[0] + n2[1] * a[1];
            let normal = section.e1 * n2[0] + section.e2 * n2[1];
            Halfspace::new(normal, support + normal.dot(&section.plane_point))
        })
        .collect()
}

/// Tube for reference time `theta`, falling back to the polyhedron's faces
/// at hover points or when the section degenerates.
pub fn tube_at<T: Real>(
    corridor: &Corridor<T>,
    traj: &ReferenceTrajectory<T>,
    theta: T,
) -> Result<TubeConstraints<T>, TubeError> {
    let index = traj.corridor_index_at(theta);
    let poly = corridor.get(index).ok_or(TubeError::CorridorIndex {
        index,
        len: corridor.len(),
    })?;
    let point = traj.position(theta);
    let direction = traj.velocity(theta);
    let fallback = || TubeConstraints {
        rows: poly.faces().to_vec(),
        fallback: true,
        polyhedron: index,
        section: None,
    };
    if direction.norm() < T::of(HOVER_SPEED) {
        return Ok(fallback());
    }
    match cross_section(poly, point, direction) {
        Ok(section) => Ok(TubeConstraints {
            rows: sweep(&section),
            fallback: false,
            polyhedron: index,
            section: Some(section),
        }),
        Err(TubeError::Degenerate(reason)) => {
            log::debug!("tube at theta={:.4}: {reason}; using polyhedron faces", theta.to_f64_lossy());
            Ok(fallback())
        }
        Err(e) => Err(e),
    }
}
