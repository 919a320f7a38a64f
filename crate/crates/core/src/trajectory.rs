//! Piecewise-polynomial global reference trajectory `p(t)`.
//!
//! Each segment stores ascending-power coefficients per axis, evaluated on the
//! segment's local time `[0, duration]`. Queries outside `[t0, tm]` hold the
//! nearest endpoint and report zero derivatives.

use thiserror::Error;

use crate::scalar::Real;
use crate::vec3::Vec3;

/// Joint position gap accepted at load time (m).
pub const POSITION_CONTINUITY_TOL: f64 = 1e-6;
/// Joint velocity/acceleration gap accepted at load time.
pub const DERIVATIVE_CONTINUITY_TOL: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory has no segments")]
    Empty,
    #[error("segment {segment}: duration {duration} must be positive")]
    NonPositiveDuration { segment: usize, duration: f64 },
    #[error("segment {segment}: axes have different polynomial degrees ({x}, {y}, {z} coefficients)")]
    DegreeMismatch {
        segment: usize,
        x: usize,
        y: usize,
        z: usize,
    },
    #[error("segment {segment}: non-finite coefficient or duration")]
    NonFinite { segment: usize },
    #[error("joint {joint} (between segments {joint} and {next}): order-{order} discontinuity of {gap:.3e}", next = joint + 1)]
    Discontinuity { joint: usize, order: u8, gap: f64 },
    #[error("segment {segment}: corridor_index {index} out of range for {len} polyhedra")]
    CorridorIndex {
        segment: usize,
        index: usize,
        len: usize,
    },
    #[error("derivative order {0} not supported (expected 0, 1 or 2)")]
    InvalidOrder(u8),
    #[error("projection window must be positive, got {0}")]
    InvalidWindow(f64),
}

/// One polynomial piece of the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySegment<T> {
    pub duration: T,
    /// Ascending-power coefficients for x, y and z.
    pub coeffs: [Vec<T>; 3],
    pub corridor_index: usize,
}

impl<T: Real> PolySegment<T> {
    pub fn new(duration: T, coeffs: [Vec<T>; 3], corridor_index: usize) -> Self {
        Self {
            duration,
            coeffs,
            corridor_index,
        }
    }

    /// Derivative of the given order at local time `tau`.
    pub fn eval_local(&self, tau: T, order: u8) -> Vec3<T> {
        Vec3(std::array::from_fn(|axis| {
            horner_derivative(&self.coeffs[axis], tau, order as usize)
        }))
    }

    pub fn degree(&self) -> usize {
        self.coeffs[0].len().saturating_sub(1)
    }
}

/// Evaluates the `order`-th derivative of an ascending-power polynomial.
fn horner_derivative<T: Real>(coeffs: &[T], tau: T, order: usize) -> T {
    if coeffs.len() <= order {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in (order..coeffs.len()).rev() {
        // i! / (i - order)!
        let mut falling = T::one();
        for k in 0..order {
            falling *= T::of((i - k) as f64);
        }
        acc = acc * tau + coeffs[i] * falling;
    }
    acc
}

/// The global trajectory the controller tracks. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory<T> {
    t0: T,
    segments: Vec<PolySegment<T>>,
    /// Absolute start time of every segment.
    starts: Vec<T>,
    tm: T,
}

impl<T: Real> ReferenceTrajectory<T> {
    /// Builds a trajectory and checks every load-time invariant, reporting the
    /// first violation.
    pub fn new(t0: T, segments: Vec<PolySegment<T>>) -> Result<Self, TrajectoryError> {
        if segments.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        for (i, seg) in segments.iter().enumerate() {
            let finite = seg.duration.is_finite()
                && seg.coeffs.iter().flatten().all(|c| c.is_finite());
            if !finite {
                return Err(TrajectoryError::NonFinite { segment: i });
            }
            if seg.duration <= T::zero() {
                return Err(TrajectoryError::NonPositiveDuration {
                    segment: i,
                    duration: seg.duration.to_f64_lossy(),
                });
            }
            let [x, y, z] = [0, 1, 2].map(|a| seg.coeffs[a].len());
            if x != y || y != z || x == 0 {
                return Err(TrajectoryError::DegreeMismatch {
                    segment: i,
                    x,
                    y,
                    z,
                });
            }
        }
        let traj = Self::new_unchecked(t0, segments);
        traj.check_continuity()?;
        Ok(traj)
    }

    /// Builds without the continuity check. Used by validators that want to
    /// report every problem rather than the first.
    pub fn new_unchecked(t0: T, segments: Vec<PolySegment<T>>) -> Self {
        let mut starts = Vec::with_capacity(segments.len());
        let mut t = t0;
        for seg in &segments {
            starts.push(t);
            t += seg.duration;
        }
        Self {
            t0,
            segments,
            starts,
            tm: t,
        }
    }

    /// All joint discontinuities above tolerance, as `(joint, order, gap)`.
    pub fn continuity_gaps(&self) -> Vec<(usize, u8, f64)> {
        let mut gaps = Vec::new();
        for (j, pair) in self.segments.windows(2).enumerate() {
            for order in 0..3u8 {
                let end = pair[0].eval_local(pair[0].duration, order);
                let start = pair[1].eval_local(T::zero(), order);
                let gap = (end - start).norm().to_f64_lossy();
                let tol = if order == 0 {
                    POSITION_CONTINUITY_TOL
                } else {
                    DERIVATIVE_CONTINUITY_TOL
                };
                if !(gap <= tol) {
                    gaps.push((j, order, gap));
                }
            }
        }
        gaps
    }

    pub fn check_continuity(&self) -> Result<(), TrajectoryError> {
        match self.continuity_gaps().first() {
            Some(&(joint, order, gap)) => Err(TrajectoryError::Discontinuity { joint, order, gap }),
            None => Ok(()),
        }
    }

    /// Checks every `corridor_index` against a corridor of `len` polyhedra.
    pub fn check_corridor_indices(&self, len: usize) -> Result<(), TrajectoryError> {
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.corridor_index >= len {
                return Err(TrajectoryError::CorridorIndex {
                    segment: i,
                    index: seg.corridor_index,
                    len,
                });
            }
        }
        Ok(())
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn tm(&self) -> T {
        self.tm
    }

    pub fn duration(&self) -> T {
        self.tm - self.t0
    }

    pub fn segments(&self) -> &[PolySegment<T>] {
        &self.segments
    }

    pub fn segment_start(&self, index: usize) -> T {
        self.starts[index]
    }

    pub fn clamp_time(&self, t: T) -> T {
        t.max(self.t0).min(self.tm)
    }

    /// Index of the segment containing the clamped time. At a joint the later
    /// segment wins.
    pub fn segment_index(&self, t: T) -> usize {
        let t = self.clamp_time(t);
        // Last segment whose start is <= t.
        let idx = self.starts.partition_point(|&s| s <= t);
        idx.saturating_sub(1).min(self.segments.len() - 1)
    }

    /// Position (order 0), velocity (1) or acceleration (2) at `t`.
    pub fn eval(&self, t: T, order: u8) -> Result<Vec3<T>, TrajectoryError> {
        if order > 2 {
            return Err(TrajectoryError::InvalidOrder(order));
        }
        Ok(self.eval_unchecked(t, order))
    }

    fn eval_unchecked(&self, t: T, order: u8) -> Vec3<T> {
        let outside = t > self.tm || t < self.t0;
        if outside && order > 0 {
            return Vec3::zero();
        }
        let i = self.segment_index(t);
        let tau = (self.clamp_time(t) - self.starts[i])
            .max(T::zero())
            .min(self.segments[i].duration);
        self.segments[i].eval_local(tau, order)
    }

    pub fn position(&self, t: T) -> Vec3<T> {
        self.eval_unchecked(t, 0)
    }

    pub fn velocity(&self, t: T) -> Vec3<T> {
        self.eval_unchecked(t, 1)
    }

    pub fn acceleration(&self, t: T) -> Vec3<T> {
        self.eval_unchecked(t, 2)
    }

    pub fn corridor_index_at(&self, t: T) -> usize {
        self.segments[self.segment_index(t)].corridor_index
    }

    /// Time in `[t_guess - window, t_guess + window] ∩ [t0, tm]` closest to
    /// `point`: dense sampling followed by ternary refinement around the best
    /// sample.
    pub fn project(&self, point: Vec3<T>, t_guess: T, window: T) -> Result<T, TrajectoryError> {
        if !(window > T::zero()) {
            return Err(TrajectoryError::InvalidWindow(window.to_f64_lossy()));
        }
        let mut lo = (t_guess - window).max(self.t0);
        let mut hi = (t_guess + window).min(self.tm);
        if lo > hi {
            let c = self.clamp_time(t_guess);
            lo = c;
            hi = c;
        }
        let dist2 = |t: T| (self.position(t) - point).norm_squared();
        if hi <= lo {
            return Ok(lo);
        }

        let span = (hi - lo).to_f64_lossy();
        let samples = ((span / 2e-3).ceil() as usize).clamp(200, 50_000);
        let h = (hi - lo) / T::of(samples as f64);
        let mut best_t = lo;
        let mut best_d = dist2(lo);
        for i in 1..=samples {
            let t = if i == samples { hi } else { lo + h * T::of(i as f64) };
            let d = dist2(t);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }

        let mut a = (best_t - h).max(lo);
        let mut b = (best_t + h).min(hi);
        for _ in 0..100 {
            if b - a <= T::epsilon() * (T::one() + b.abs()) {
                break;
            }
            let third = (b - a) / T::of(3.0);
            let m1 = a + third;
            let m2 = b - third;
            if dist2(m1) <= dist2(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let refined = (a + b) / T::of(2.0);
        Ok(if dist2(refined) <= best_d {
            refined
        } else {
            best_t
        })
    }
}
