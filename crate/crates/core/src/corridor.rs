//! Flight corridor: an ordered list of overlapping convex polyhedra in
//! halfspace form.

use thiserror::Error;

use crate::qp::{self, CscMatrix, QpProblem, Status};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Smallest inscribed radius accepted for a polyhedron or an overlap.
pub const MIN_INTERIOR_RADIUS: f64 = 1e-6;
const VERTEX_FEASIBILITY_TOL: f64 = 1e-9;
const VERTEX_DEDUP_TOL: f64 = 1e-7;
/// Half-width of the artificial box used to detect unbounded polyhedra.
const ESCAPE_BOX: f64 = 1e5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("face {face}: normal has zero length")]
    ZeroNormal { face: usize },
    #[error("polyhedron needs at least 4 faces, got {0}")]
    TooFewFaces(usize),
    #[error("polyhedron is empty")]
    Empty,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("polyhedron interior too thin (Chebyshev radius {0:.3e})")]
    NoInterior(f64),
    #[error("polyhedron {index}: {source}")]
    Polyhedron {
        index: usize,
        #[source]
        source: Box<GeometryError>,
    },
    #[error("polyhedra {first} and {second} do not overlap (Chebyshev radius of intersection {radius:.3e})")]
    NoOverlap { first: usize, second: usize, radius: f64 },
    #[error("corridor has no polyhedra")]
    EmptyCorridor,
    #[error("Chebyshev linear program failed: {0}")]
    Solver(String),
}

/// The closed halfspace `{q : normal·q <= offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfspace<T> {
    pub normal: Vec3<T>,
    pub offset: T,
}

impl<T: Real> Halfspace<T> {
    pub fn new(normal: Vec3<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    /// Signed Euclidean distance of `point` beyond the boundary plane
    /// (negative inside).
    pub fn signed_distance(&self, point: Vec3<T>) -> T {
        (self.normal.dot(&point) - self.offset) / self.normal.norm()
    }
}

/// Convex polyhedron as an intersection of halfspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron<T> {
    faces: Vec<Halfspace<T>>,
}

impl<T: Real> Polyhedron<T> {
    /// Builds a polyhedron and checks that it is bounded with a non-empty
    /// interior.
    pub fn new(faces: Vec<Halfspace<T>>) -> Result<Self, GeometryError> {
        let poly = Self::from_faces_unchecked(faces)?;
        if poly.faces.len() < 4 {
            return Err(GeometryError::TooFewFaces(poly.faces.len()));
        }
        poly.vertices()?;
        let (_, radius) = poly.chebyshev_center()?;
        if radius.to_f64_lossy() <= MIN_INTERIOR_RADIUS {
            return Err(GeometryError::NoInterior(radius.to_f64_lossy()));
        }
        Ok(poly)
    }

    /// Only rejects zero normals.
    pub fn from_faces_unchecked(faces: Vec<Halfspace<T>>) -> Result<Self, GeometryError> {
        for (i, f) in faces.iter().enumerate() {
            if !(f.normal.norm().to_f64_lossy() > 1e-12) {
                return Err(GeometryError::ZeroNormal { face: i });
            }
        }
        Ok(Self { faces })
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn axis_box(lo: Vec3<T>, hi: Vec3<T>) -> Result<Self, GeometryError> {
        let mut faces = Vec::with_capacity(6);
        for axis in 0..3 {
            let mut n = Vec3::zero();
            n[axis] = T::one();
            faces.push(Halfspace::new(n, hi[axis]));
            faces.push(Halfspace::new(-n, -lo[axis]));
        }
        Self::new(faces)
    }

    pub fn faces(&self) -> &[Halfspace<T>] {
        &self.faces
    }

    /// `normal·point <= offset + tol·‖normal‖` for every face.
    pub fn contains(&self, point: Vec3<T>, tol: T) -> bool {
        self.faces
            .iter()
            .all(|f| f.normal.dot(&point) <= f.offset + tol * f.normal.norm())
    }

    /// Largest signed face distance; negative when strictly inside.
    pub fn max_violation(&self, point: Vec3<T>) -> T {
        self.faces
            .iter()
            .map(|f| f.signed_distance(point))
            .fold(T::neg_infinity(), T::max)
    }

    /// Index and signed distance of the most violated face.
    pub fn worst_face(&self, point: Vec3<T>) -> (usize, T) {
        self.faces
            .iter()
            .enumerate()
            .map(|(i, f)| (i, f.signed_distance(point)))
            .fold((0, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    /// Center and radius of the largest inscribed ball, from the linear
    /// program `max r s.t. n̂ᵢ·c + r <= bᵢ/‖nᵢ‖`.
    pub fn chebyshev_center(&self) -> Result<(Vec3<T>, T), GeometryError> {
        chebyshev_center_of(&self.faces)
    }

    /// All vertices, by enumerating face triples. Unbounded polyhedra are
    /// detected by clipping with a large box and checking whether any vertex
    /// lands on it.
    pub fn vertices(&self) -> Result<Vec<Vec3<T>>, GeometryError> {
        let big = T::of(ESCAPE_BOX);
        let mut all = self.faces.clone();
        let original = all.len();
        for axis in 0..3 {
            let mut n = Vec3::zero();
            n[axis] = T::one();
            all.push(Halfspace::new(n, big));
            all.push(Halfspace::new(-n, big));
        }
        let norms: Vec<T> = all.iter().map(|f| f.normal.norm()).collect();
        let feas_tol = T::of(VERTEX_FEASIBILITY_TOL);
        let dedup_tol = T::of(VERTEX_DEDUP_TOL);

        let mut vertices: Vec<Vec3<T>> = Vec::new();
        let mut escaped = false;
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                for k in (j + 1)..all.len() {
                    if i >= original {
                        // Triples made only of box faces are box corners.
                        continue;
                    }
                    let Some(v) = intersect_planes(&all[i], &all[j], &all[k]) else {
                        continue;
                    };
                    let scale = T::one().max(v.norm_inf());
                    let inside = all
                        .iter()
                        .zip(&norms)
                        .all(|(f, &nn)| f.normal.dot(&v) - f.offset <= feas_tol * nn * scale);
                    if !inside {
                        continue;
                    }
                    if k >= original {
                        escaped = true;
                        continue;
                    }
                    if !vertices.iter().any(|w| (*w - v).norm_inf() <= dedup_tol * scale) {
                        vertices.push(v);
                    }
                }
            }
        }
        if escaped {
            return Err(GeometryError::Unbounded);
        }
        if vertices.is_empty() {
            return Err(GeometryError::Empty);
        }
        Ok(vertices)
    }
}

/// Solves the 3×3 system of three face planes; `None` when singular.
pub(crate) fn intersect_planes<T: Real>(a: &Halfspace<T>, b: &Halfspace<T>, c: &Halfspace<T>) -> Option<Vec3<T>> {
    let bc = b.normal.cross(&c.normal);
    let det = a.normal.dot(&bc);
    let scale = a.normal.norm() * b.normal.norm() * c.normal.norm();
    if det.abs() <= T::of(1e-12) * scale {
        return None;
    }
    let ca = c.normal.cross(&a.normal);
    let ab = a.normal.cross(&b.normal);
    let v = (bc * a.offset + ca * b.offset + ab * c.offset) * (T::one() / det);
    v.is_finite().then_some(v)
}

/// Chebyshev center of an arbitrary face list (no face-count requirement).
pub fn chebyshev_center_of<T: Real>(faces: &[Halfspace<T>]) -> Result<(Vec3<T>, T), GeometryError> {
    let m = faces.len();
    let mut trip = Vec::with_capacity(4 * m + 1);
    let mut upper = Vec::with_capacity(m + 1);
    for (i, f) in faces.iter().enumerate() {
        let nn = f.normal.norm();
        for axis in 0..3 {
            trip.push((i, axis, f.normal[axis] / nn));
        }
        trip.push((i, 3, T::one()));
        upper.push(f.offset / nn);
    }
    let a = CscMatrix::from_triplets(m, 4, &trip);
    let lower = vec![-T::infinity_bound(); m];
    let problem = QpProblem::new(
        CscMatrix::zeros(4, 4),
        vec![T::zero(), T::zero(), T::zero(), -T::one()],
        a,
        lower,
        upper,
    )
    .map_err(|e| GeometryError::Solver(e.to_string()))?;
    let settings = qp::Settings {
        eps_abs: T::of(1e-9),
        eps_rel: T::of(1e-9),
        max_iter: 20_000,
        polish: true,
        ..qp::Settings::default()
    };
    let sol = qp::solve(&problem, None, &settings).map_err(|e| GeometryError::Solver(e.to_string()))?;
    match sol.status {
        Status::DualInfeasible => return Err(GeometryError::Unbounded),
        Status::PrimalInfeasible => return Err(GeometryError::Empty),
        Status::Solved | Status::MaxIterations => {}
    }
    let center = Vec3::new(sol.primal[0], sol.primal[1], sol.primal[2]);
    if !center.is_finite() {
        return Err(GeometryError::Solver("non-finite center".into()));
    }
    // Report the radius actually achieved at this center.
    let radius = faces
        .iter()
        .map(|f| -f.signed_distance(center))
        .fold(T::infinity(), T::min);
    if sol.status == Status::MaxIterations && radius <= T::zero() {
        return Err(GeometryError::Solver("Chebyshev program did not converge".into()));
    }
    if radius <= T::zero() {
        return Err(GeometryError::Empty);
    }
    Ok((center, radius))
}

/// Ordered polyhedra covering the free space around the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor<T> {
    polyhedra: Vec<Polyhedron<T>>,
}

impl<T: Real> Corridor<T> {
    /// Checks that consecutive polyhedra overlap with non-empty interior.
    pub fn new(polyhedra: Vec<Polyhedron<T>>) -> Result<Self, GeometryError> {
        let corridor = Self::new_unchecked(polyhedra)?;
        if let Some(err) = corridor.overlap_failures().into_iter().next() {
            return Err(err);
        }
        Ok(corridor)
    }

    pub fn new_unchecked(polyhedra: Vec<Polyhedron<T>>) -> Result<Self, GeometryError> {
        if polyhedra.is_empty() {
            return Err(GeometryError::EmptyCorridor);
        }
        Ok(Self { polyhedra })
    }

    /// Every consecutive pair whose intersection lacks an interior.
    pub fn overlap_failures(&self) -> Vec<GeometryError> {
        let mut out = Vec::new();
        for i in 1..self.polyhedra.len() {
            let mut faces = self.polyhedra[i - 1].faces.clone();
            faces.extend_from_slice(&self.polyhedra[i].faces);
            let radius = match chebyshev_center_of(&faces) {
                Ok((_, r)) => r.to_f64_lossy(),
                Err(_) => f64::NEG_INFINITY,
            };
            if !(radius > MIN_INTERIOR_RADIUS) {
                out.push(GeometryError::NoOverlap {
                    first: i - 1,
                    second: i,
                    radius,
                });
            }
        }
        out
    }

    pub fn polyhedra(&self) -> &[Polyhedron<T>] {
        &self.polyhedra
    }

    pub fn len(&self) -> usize {
        self.polyhedra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polyhedra.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Polyhedron<T>> {
        self.polyhedra.get(index)
    }

    /// Depth of `point` inside the union of polyhedra: the largest over
    /// polyhedra of the smallest face clearance. Negative outside.
    pub fn margin(&self, point: Vec3<T>) -> T {
        self.polyhedra
            .iter()
            .map(|p| -p.max_violation(point))
            .fold(T::neg_infinity(), T::max)
    }

    /// Index of the first polyhedron containing `point` within `tol`.
    pub fn locate(&self, point: Vec3<T>, tol: T) -> Option<usize> {
        self.polyhedra.iter().position(|p| p.contains(point, tol))
    }
}
