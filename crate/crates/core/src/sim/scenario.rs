use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::baseline::BaselineTracker;
use super::log::{Outcome, ScenarioLog, TickRecord};
use super::plant::{plant_step, PlantState};
use crate::corridor::Corridor;
use crate::mpcc::{idx, AugmentedState, Controller, HorizonPlan, MpccConfig, MpccError};
use crate::scalar::Real;
use crate::trajectory::ReferenceTrajectory;
use crate::vec3::Vec3;

/// Goal radius around `p(tm)` in metres.
pub const GOAL_RADIUS: f64 = 0.1;
/// Goal speed in m/s.
pub const GOAL_SPEED: f64 = 0.1;
/// Consecutive distressed ticks tolerated before aborting.
pub const MAX_DISTRESSED_TICKS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    Impulse,
    Wind,
}

/// Additive plant acceleration over `[start, start + duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Disturbance<T> {
    pub kind: DisturbanceKind,
    pub start: T,
    pub duration: T,
    pub accel: [T; 3],
    /// Per-tick uniform noise half-width added to each axis while active,
    /// drawn from the scenario seed.
    #[serde(default = "zero")]
    pub gust: T,
}

fn zero<T: Real>() -> T {
    T::zero()
}

impl<T: Real> Disturbance<T> {
    /// Active on the tick starting at `time`. Boundaries carry a small
    /// tolerance so tick times accumulated in floating point still land.
    pub fn active_at(&self, time: T) -> bool {
        let eps = T::of(1e-9);
        time + eps >= self.start && time + eps < self.start + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Cmpcc,
    /// Position-velocity feedback on the reference, no corridor awareness.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct StartState<T> {
    pub position: [T; 3],
    #[serde(default = "zero3")]
    pub velocity: [T; 3],
}

fn zero3<T: Real>() -> [T; 3] {
    [T::zero(); 3]
}

/// Scenario file contents. Paths are relative to the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Scenario<T> {
    #[serde(default)]
    pub name: Option<String>,
    pub trajectory: PathBuf,
    pub corridor: PathBuf,
    #[serde(default)]
    pub mpcc: MpccConfig<T>,
    pub start: StartState<T>,
    #[serde(default)]
    pub disturbances: Vec<Disturbance<T>>,
    pub duration_s: T,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub controller: ControllerKind,
    /// Gain in [0, 1] of the first-order disturbance estimator. The estimate
    /// is the filtered one-tick velocity residual and is added to the
    /// acceleration the controller sees. 0 feeds back the plant state only.
    #[serde(default = "zero")]
    pub estimator_gain: T,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    /// `pointer` locates the offending value in the scenario file.
    #[error("invalid scenario: {pointer}: {message}")]
    Invalid { pointer: String, message: String },
    #[error(transparent)]
    Controller(#[from] MpccError),
}

fn invalid(pointer: &str, message: &str) -> ScenarioError {
    ScenarioError::Invalid {
        pointer: pointer.into(),
        message: message.into(),
    }
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.mpcc.validate()?;
        if !(self.duration_s.is_finite() && self.duration_s > T::zero()) {
            return Err(invalid("/duration_s", "must be positive"));
        }
        let finite = |v: &[T; 3]| v.iter().all(|x| x.is_finite());
        if !finite(&self.start.position) || !finite(&self.start.velocity) {
            return Err(invalid("/start", "position and velocity must be finite"));
        }
        for (i, d) in self.disturbances.iter().enumerate() {
            if !(d.duration.is_finite() && d.duration > T::zero()) {
                return Err(invalid(&format!("/disturbances/{i}/duration"), "must be positive"));
            }
            if !d.start.is_finite() || !finite(&d.accel) || !(d.gust.is_finite() && d.gust >= T::zero()) {
                return Err(invalid(
                    &format!("/disturbances/{i}"),
                    "start, accel and gust must be finite and gust nonnegative",
                ));
            }
        }
        if !(self.estimator_gain >= T::zero() && self.estimator_gain <= T::one()) {
            return Err(invalid("/estimator_gain", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Allow the slack-relaxed recovery problem.
    pub recovery: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { recovery: true }
    }
}

enum Driver<'a, T> {
    Cmpcc(Box<Controller<'a, T>>, [T; 3]),
    Baseline(BaselineTracker<'a, T>),
}

/// Runs the closed loop. Controller initialization failures are errors;
/// everything after the first tick ends up in the log's outcome.
pub fn run_scenario<T: Real>(
    scenario: &Scenario<T>,
    traj: &ReferenceTrajectory<T>,
    corridor: &Corridor<T>,
    options: RunOptions,
) -> Result<ScenarioLog<T>, ScenarioError> {
    run_scenario_observed(scenario, traj, corridor, options, |_| {})
}

/// As [`run_scenario`], handing every controller plan to `observe`.
pub fn run_scenario_observed<T: Real>(
    scenario: &Scenario<T>,
    traj: &ReferenceTrajectory<T>,
    corridor: &Corridor<T>,
    options: RunOptions,
    mut observe: impl FnMut(&HorizonPlan<T>),
) -> Result<ScenarioLog<T>, ScenarioError> {
    scenario.validate()?;
    let dt = scenario.mpcc.dt;
    let mut plant = PlantState {
        position: scenario.start.position.into(),
        velocity: scenario.start.velocity.into(),
        acceleration: Vec3::zero(),
    };
    let mut driver = match scenario.controller {
        ControllerKind::Cmpcc => {
            let mut c = Controller::init(scenario.mpcc, traj, corridor, &augmented(&plant, [T::zero(); 3]))?;
            c.set_recovery(options.recovery);
            let virt = c.initial_virtual_state();
            Driver::Cmpcc(Box::new(c), virt)
        }
        ControllerKind::Baseline => {
            traj.check_corridor_indices(corridor.len()).map_err(MpccError::from)?;
            Driver::Baseline(BaselineTracker::new(traj, dt))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let goal = traj.position(traj.tm());
    let ticks = (scenario.duration_s / dt).round().to_usize().unwrap_or(0).max(1);
    let mut records = Vec::with_capacity(ticks);
    let mut distressed = 0usize;
    let mut outcome = Outcome::TimedOut;
    let gain = scenario.estimator_gain;
    let mut estimate = Vec3::zero();

    for tick in 0..ticks {
        let now = dt * T::of(tick as f64);
        let mut disturbance = Vec3::zero();
        for d in scenario.disturbances.iter().filter(|d| d.active_at(now)) {
            disturbance += Vec3::from(d.accel);
            if d.gust > T::zero() {
                let g = d.gust.to_f64_lossy();
                let noise: [f64; 3] = std::array::from_fn(|_| rng.random_range(-g..=g));
                disturbance += Vec3::from_f64(noise);
            }
        }

        let (jerk, t, v_t, iterations, solve_time_ms, recovery, status, trouble) = match &mut driver {
            Driver::Cmpcc(c, virt) => {
                let seen = PlantState {
                    acceleration: plant.acceleration + estimate,
                    ..plant
                };
                let current = augmented(&seen, *virt);
                let (u, plan) = match c.step(&current) {
                    Ok(r) => r,
                    Err(e) => {
                        outcome = Outcome::Aborted(format!("tick {tick}: {e}"));
                        break;
                    }
                };
                observe(&plan);
                let first = &plan.states[0];
                *virt = [first[idx::T], first[idx::VT], first[idx::AT]];
                let trouble = plan.recovery || !plan.solved();
                (
                    Vec3::new(u[0], u[1], u[2]),
                    virt[0],
                    virt[1],
                    plan.iterations,
                    plan.solve_time * 1e3,
                    plan.recovery,
                    plan.status.as_str(),
                    trouble,
                )
            }
            Driver::Baseline(b) => {
                let jerk = b.step(&plant, now);
                let t_end = b.reference_time(now + dt);
                (jerk, t_end, T::one(), 0, 0.0, false, "baseline", false)
            }
        };

        let nominal = plant_step(&plant, jerk, Vec3::zero(), dt);
        plant = plant_step(&plant, jerk, disturbance, dt);
        // Mean unmodelled acceleration over the tick, from velocity alone.
        let residual = (plant.velocity - nominal.velocity) * (T::one() / dt);
        estimate = estimate + (residual - estimate) * gain;
        let sim_time = dt * T::of((tick + 1) as f64);
        records.push(TickRecord {
            tick,
            sim_time,
            position: plant.position,
            velocity: plant.velocity,
            acceleration: plant.acceleration,
            jerk,
            t,
            v_t,
            tracking_error: (plant.position - traj.position(t)).norm(),
            min_margin: corridor.margin(plant.position),
            iterations,
            solve_time_ms,
            recovery,
            status,
        });

        if !plant.is_finite() {
            outcome = Outcome::Aborted(format!("tick {tick}: plant state is not finite"));
            break;
        }
        distressed = if trouble { distressed + 1 } else { 0 };
        if distressed > MAX_DISTRESSED_TICKS {
            outcome = Outcome::Aborted(format!(
                "tick {tick}: {distressed} consecutive ticks in recovery or unsolved (last status {status})"
            ));
            break;
        }
        if (plant.position - goal).norm() < T::of(GOAL_RADIUS) && plant.velocity.norm() < T::of(GOAL_SPEED) {
            outcome = Outcome::GoalReached;
            break;
        }
    }

    if let Outcome::Aborted(reason) = &outcome {
        log::warn!("scenario aborted: {reason}");
    }
    Ok(ScenarioLog {
        name: scenario.name.clone().unwrap_or_else(|| "scenario".into()),
        records,
        outcome,
    })
}

/// Controller state from the plant and the controller-owned virtual time.
pub fn augmented<T: Real>(plant: &PlantState<T>, virt: [T; 3]) -> AugmentedState<T> {
    let mut x = [T::zero(); 12];
    for a in 0..3 {
        x[idx::POS[a]] = plant.position[a];
        x[idx::VEL[a]] = plant.velocity[a];
        x[idx::ACC[a]] = plant.acceleration[a];
    }
    x[idx::T] = virt[0];
    x[idx::VT] = virt[1];
    x[idx::AT] = virt[2];
    x
}
