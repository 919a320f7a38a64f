//! Receding-horizon contouring controller over the corridor tube.
//!
//! Decision vector per horizon step `k = 1..N` is `[x⁽ᵏ⁾ (12), u⁽ᵏ⁾ (4)]`,
//! stacked in step order, optionally followed by safety slacks in recovery
//! mode.

mod assemble;
mod controller;
mod model;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qp::QpError;
use crate::scalar::Real;
use crate::trajectory::TrajectoryError;
use crate::tube::TubeError;

pub use assemble::{
    assemble, assemble_recovery, linearized_objective, nonlinear_objective, smoothing_cost, stack, Assembly, Layout, StepRows,
};
pub use controller::{Controller, HorizonPlan, RECOVERY_SLACK_WEIGHT};
pub use model::{cost_blocks, dynamics_matrices, propagate, CostBlocks};

pub const STATE_DIM: usize = 12;
pub const INPUT_DIM: usize = 4;
pub const STEP_VARS: usize = STATE_DIM + INPUT_DIM;
/// Default weights of the acceleration and jerk penalties. Without them the
/// optimum is bang-bang at the limits and operator splitting converges too
/// slowly for a 20 Hz loop. Larger jerk weights visibly lag the reference.
pub const DEFAULT_ACCEL_WEIGHT: f64 = 0.1;
pub const DEFAULT_JERK_WEIGHT: f64 = 0.001;

/// `[x, v_x, a_x, y, v_y, a_y, z, v_z, a_z, t, v_t, a_t]`
pub type AugmentedState<T> = [T; STATE_DIM];
/// `[j_x, j_y, j_z, j_t]`
pub type ControlInput<T> = [T; INPUT_DIM];

/// Offsets into [`AugmentedState`].
pub mod idx {
    pub const X: usize = 0;
    pub const VX: usize = 1;
    pub const AX: usize = 2;
    pub const Y: usize = 3;
    pub const VY: usize = 4;
    pub const AY: usize = 5;
    pub const Z: usize = 6;
    pub const VZ: usize = 7;
    pub const AZ: usize = 8;
    pub const T: usize = 9;
    pub const VT: usize = 10;
    pub const AT: usize = 11;
    /// Position offsets per spatial axis.
    pub const POS: [usize; 3] = [X, Y, Z];
    pub const VEL: [usize; 3] = [VX, VY, VZ];
    pub const ACC: [usize; 3] = [AX, AY, AZ];
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpccError {
    /// `field` is a dotted path inside the controller config block.
    #[error("invalid controller configuration: {field} {reason}")]
    Config { field: String, reason: &'static str },
    #[error("state has non-finite entries")]
    NonFiniteState,
    #[error("expected {expected} thetas, got {found}")]
    ThetaCount { expected: usize, found: usize },
    #[error("start position is outside the corridor: {distance:.4} m beyond face {face} of polyhedron {polyhedron}")]
    StartOutsideCorridor { polyhedron: usize, face: usize, distance: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Tube(#[from] TubeError),
    #[error(transparent)]
    Qp(#[from] QpError),
}

/// Symmetric per-axis bounds on the spatial derivatives and the virtual-time
/// bounds `v_t ∈ [0, v_t_max]`, `|a_t| <= a_t_max`, `|j_t| <= j_t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Limits<T> {
    pub v_max: T,
    pub a_max: T,
    pub j_max: T,
    pub v_t_max: T,
    pub a_t_max: T,
    pub j_t_max: T,
}

impl<T: Real> Default for Limits<T> {
    fn default() -> Self {
        Self {
            v_max: T::of(3.0),
            a_max: T::of(6.0),
            j_max: T::of(30.0),
            v_t_max: T::of(3.0),
            a_t_max: T::of(5.0),
            j_t_max: T::of(50.0),
        }
    }
}

impl<T: Real> Limits<T> {
    pub fn validate(&self) -> Result<(), MpccError> {
        let named = [
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("j_max", self.j_max),
            ("v_t_max", self.v_t_max),
            ("a_t_max", self.a_t_max),
            ("j_t_max", self.j_t_max),
        ];
        for (name, v) in named {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(MpccError::Config {
                    field: format!("limits.{name}"),
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct MpccConfig<T> {
    #[serde(rename = "N")]
    pub horizon: usize,
    pub dt: T,
    pub rho: T,
    pub limits: Limits<T>,
    pub terminal_eps: T,
    /// Quadratic weight on every acceleration state's deviation from the
    /// reference acceleration (zero for the virtual chain).
    pub accel_weight: T,
    /// Quadratic weight on every jerk input.
    pub jerk_weight: T,
}

impl<T: Real> Default for MpccConfig<T> {
    fn default() -> Self {
        Self {
            horizon: 20,
            dt: T::of(0.05),
            rho: T::one(),
            limits: Limits::default(),
            terminal_eps: T::of(0.1),
            accel_weight: T::of(DEFAULT_ACCEL_WEIGHT),
            jerk_weight: T::of(DEFAULT_JERK_WEIGHT),
        }
    }
}

fn config_error(field: &str, reason: &'static str) -> MpccError {
    MpccError::Config {
        field: field.to_string(),
        reason,
    }
}

impl<T: Real> MpccConfig<T> {
    pub fn validate(&self) -> Result<(), MpccError> {
        if self.horizon < 2 {
            return Err(config_error("N", "must be at least 2"));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(config_error("dt", "must be positive"));
        }
        if !(self.rho >= T::zero()) || !self.rho.is_finite() {
            return Err(config_error("rho", "must be non-negative"));
        }
        for (name, v) in [
            ("terminal_eps", self.terminal_eps),
            ("accel_weight", self.accel_weight),
            ("jerk_weight", self.jerk_weight),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(config_error(name, "must be non-negative"));
            }
        }
        self.limits.validate()
    }

    pub fn num_vars(&self) -> usize {
        STEP_VARS * self.horizon
    }
}
