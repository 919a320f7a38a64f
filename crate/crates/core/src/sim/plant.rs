use crate::scalar::Real;
use crate::vec3::Vec3;

/// Physical point-mass state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState<T> {
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub acceleration: Vec3<T>,
}

impl<T: Real> PlantState<T> {
    pub fn at_rest(position: Vec3<T>) -> Self {
        Self {
            position,
            velocity: Vec3::zero(),
            acceleration: Vec3::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()
    }
}

/// Exact integration over `dt` of constant jerk plus a constant disturbance
/// acceleration. The disturbance does not persist into the acceleration
/// state.
pub fn plant_step<T: Real>(state: &PlantState<T>, jerk: Vec3<T>, disturbance: Vec3<T>, dt: T) -> PlantState<T> {
    let half = T::of(0.5);
    let sixth = T::one() / T::of(6.0);
    let a_eff = state.acceleration + disturbance;
    PlantState {
        position: state.position + state.velocity * dt + a_eff * (half * dt * dt) + jerk * (sixth * dt * dt * dt),
        velocity: state.velocity + a_eff * dt + jerk * (half * dt * dt),
        acceleration: state.acceleration + jerk * dt,
    }
}
