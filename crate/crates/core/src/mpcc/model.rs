use super::{idx, AugmentedState, ControlInput, INPUT_DIM, STATE_DIM};
use crate::scalar::Real;
use crate::trajectory::ReferenceTrajectory;

/// Discrete transition `x⁺ = A x + B u`: four integrator chains
/// `[[1, dt, dt²/2], [0, 1, dt], [0, 0, 1]]`, with jerk entering the
/// acceleration only.
pub fn dynamics_matrices<T: Real>(dt: T) -> ([[T; STATE_DIM]; STATE_DIM], [[T; INPUT_DIM]; STATE_DIM]) {
    let mut a = [[T::zero(); STATE_DIM]; STATE_DIM];
    let mut b = [[T::zero(); INPUT_DIM]; STATE_DIM];
    for chain in 0..4 {
        let o = 3 * chain;
        a[o][o] = T::one();
        a[o][o + 1] = dt;
        a[o][o + 2] = dt * dt * T::of(0.5);
        a[o + 1][o + 1] = T::one();
        a[o + 1][o + 2] = dt;
        a[o + 2][o + 2] = T::one();
        b[o + 2][chain] = dt;
    }
    (a, b)
}

/// One step of the controller model.
pub fn propagate<T: Real>(dt: T, x: &AugmentedState<T>, u: &ControlInput<T>) -> AugmentedState<T> {
    let (a, b) = dynamics_matrices(dt);
    let mut out = [T::zero(); STATE_DIM];
    for i in 0..STATE_DIM {
        out[i] = (0..STATE_DIM).map(|j| a[i][j] * x[j]).sum::<T>() + (0..INPUT_DIM).map(|j| b[i][j] * u[j]).sum::<T>();
    }
    out
}

/// Per-step cost of the contouring objective linearized at `theta`:
/// `‖s − p(θ) − p'(θ)(t − θ)‖² − ρ v_t
///   = wᵀ Q w + q · (x, y, z, t, v_t) + constant` with `w = (x, y, z, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBlocks<T> {
    pub q_mat: [[T; 4]; 4],
    pub q_vec: [T; 5],
    /// `‖c‖²`, dropped by the QP but needed to match the nonlinear cost.
    pub constant: T,
}

impl<T: Real> CostBlocks<T> {
    pub fn eval(&self, x: &AugmentedState<T>) -> T {
        let w = [x[idx::X], x[idx::Y], x[idx::Z], x[idx::T]];
        let s = [x[idx::X], x[idx::Y], x[idx::Z], x[idx::T], x[idx::VT]];
        let mut quad = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                quad += w[i] * self.q_mat[i][j] * w[j];
            }
        }
        quad + (0..5).map(|i| self.q_vec[i] * s[i]).sum::<T>() + self.constant
    }
}

pub fn cost_blocks<T: Real>(traj: &ReferenceTrajectory<T>, theta: T, rho: T) -> CostBlocks<T> {
    let theta = traj.clamp_time(theta);
    let p = traj.position(theta);
    let d = traj.velocity(theta);
    let c = d * theta - p;
    let mut q_mat = [[T::zero(); 4]; 4];
    for i in 0..3 {
        q_mat[i][i] = T::one();
        q_mat[i][3] = -d[i];
        q_mat[3][i] = -d[i];
    }
    q_mat[3][3] = d.norm_squared();
    let two = T::of(2.0);
    let q_vec = [two * c[0], two * c[1], two * c[2], -two * d.dot(&c), -rho];
    CostBlocks {
        q_mat,
        q_vec,
        constant: c.norm_squared(),
    }
}
