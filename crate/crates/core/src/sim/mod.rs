//! Point-mass closed loop: plant, disturbances, scenario runner and logs.

mod baseline;
mod log;
mod plant;
mod scenario;

pub use baseline::{BaselineTracker, BASELINE_KP, BASELINE_KV};
pub use log::{Outcome, RunSummary, ScenarioLog, TickRecord, CSV_COLUMNS};
pub use plant::{plant_step, PlantState};
pub use scenario::{
    augmented, run_scenario, run_scenario_observed, ControllerKind, Disturbance, DisturbanceKind, RunOptions, Scenario, ScenarioError,
    StartState, GOAL_RADIUS, GOAL_SPEED, MAX_DISTRESSED_TICKS,
};
