use crate::scalar::Real;
use crate::trajectory::ReferenceTrajectory;
use crate::vec3::Vec3;

use super::plant::PlantState;

pub const BASELINE_KP: f64 = 4.0;
pub const BASELINE_KV: f64 = 3.0;

/// Feedback tracker on the global reference at nominal timing
/// `t = t0 + sim_time`. The commanded acceleration
/// `a_ref + kp (p_ref − p) + kv (v_ref − v)` is turned into jerk by a first
/// difference, unclamped and blind to the corridor.
pub struct BaselineTracker<'a, T> {
    traj: &'a ReferenceTrajectory<T>,
    dt: T,
    last_command: Vec3<T>,
}

impl<'a, T: Real> BaselineTracker<'a, T> {
    pub fn new(traj: &'a ReferenceTrajectory<T>, dt: T) -> Self {
        Self {
            traj,
            dt,
            last_command: Vec3::zero(),
        }
    }

    pub fn reference_time(&self, sim_time: T) -> T {
        self.traj.clamp_time(self.traj.t0() + sim_time)
    }

    /// Jerk for the tick starting at `sim_time`.
    pub fn step(&mut self, plant: &PlantState<T>, sim_time: T) -> Vec3<T> {
        let t = self.reference_time(sim_time);
        let command = self.traj.acceleration(t)
            + (self.traj.position(t) - plant.position) * T::of(BASELINE_KP)
            + (self.traj.velocity(t) - plant.velocity) * T::of(BASELINE_KV);
        let jerk = (command - self.last_command) * (T::one() / self.dt);
        self.last_command = command;
        jerk
    }
}
