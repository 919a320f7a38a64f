use std::io::{self, Write};

use crate::scalar::Real;
use crate::vec3::Vec3;

/// CSV column order of [`TickRecord`].
pub const CSV_COLUMNS: [&str; 22] = [
    "tick",
    "sim_time",
    "px",
    "py",
    "pz",
    "vx",
    "vy",
    "vz",
    "ax",
    "ay",
    "az",
    "jx",
    "jy",
    "jz",
    "t",
    "v_t",
    "tracking_error",
    "min_margin",
    "iterations",
    "solve_time_ms",
    "recovery",
    "status",
];

/// One control tick: the plant state at the end of the tick, the jerk
/// applied during it and the controller's virtual time after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord<T> {
    pub tick: usize,
    pub sim_time: T,
    pub position: Vec3<T>,
    pub velocity: Vec3<T>,
    pub acceleration: Vec3<T>,
    pub jerk: Vec3<T>,
    pub t: T,
    pub v_t: T,
    /// `‖position − p(t)‖`
    pub tracking_error: T,
    /// Depth inside the corridor; negative outside.
    pub min_margin: T,
    pub iterations: usize,
    pub solve_time_ms: f64,
    pub recovery: bool,
    pub status: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    GoalReached,
    /// Ran for the configured duration without reaching the goal.
    TimedOut,
    Aborted(String),
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal_reached",
            Outcome::TimedOut => "timed_out",
            Outcome::Aborted(_) => "aborted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioLog<T> {
    pub name: String,
    pub records: Vec<TickRecord<T>>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub ticks: usize,
    pub goal_reached: bool,
    pub outcome: Outcome,
    pub max_tracking_error: f64,
    pub min_margin: f64,
    pub mean_solve_ms: f64,
    pub max_solve_ms: f64,
    pub recovery_ticks: usize,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} after {} ticks; goal_reached={} max_tracking_error={:.4} m min_margin={:.4} m \
             solve_ms mean={:.2} max={:.2} recovery_ticks={}",
            self.name,
            self.outcome.as_str(),
            self.ticks,
            self.goal_reached,
            self.max_tracking_error,
            self.min_margin,
            self.mean_solve_ms,
            self.max_solve_ms,
            self.recovery_ticks
        )?;
        if let Outcome::Aborted(reason) = &self.outcome {
            write!(f, " ({reason})")?;
        }
        Ok(())
    }
}

impl<T: Real> ScenarioLog<T> {
    pub fn summary(&self) -> RunSummary {
        let n = self.records.len();
        let fold = |init: f64, f: fn(f64, f64) -> f64, g: fn(&TickRecord<T>) -> f64| {
            self.records.iter().map(g).fold(init, f)
        };
        RunSummary {
            name: self.name.clone(),
            ticks: n,
            goal_reached: self.outcome == Outcome::GoalReached,
            outcome: self.outcome.clone(),
            max_tracking_error: fold(0.0, f64::max, |r| r.tracking_error.to_f64_lossy()),
            min_margin: fold(f64::INFINITY, f64::min, |r| r.min_margin.to_f64_lossy()),
            mean_solve_ms: if n > 0 {
                self.records.iter().map(|r| r.solve_time_ms).sum::<f64>() / n as f64
            } else {
                0.0
            },
            max_solve_ms: fold(0.0, f64::max, |r| r.solve_time_ms),
            recovery_ticks: self.records.iter().filter(|r| r.recovery).count(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", CSV_COLUMNS.join(","))?;
        for r in &self.records {
            let v = |x: T| x.to_f64_lossy();
            writeln!(
                out,
                "{},{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6e},{:.6},{},{:.3},{},{}",
                r.tick,
                v(r.sim_time),
                v(r.position[0]),
                v(r.position[1]),
                v(r.position[2]),
                v(r.velocity[0]),
                v(r.velocity[1]),
                v(r.velocity[2]),
                v(r.acceleration[0]),
                v(r.acceleration[1]),
                v(r.acceleration[2]),
                v(r.jerk[0]),
                v(r.jerk[1]),
                v(r.jerk[2]),
                v(r.t),
                v(r.v_t),
                v(r.tracking_error),
                v(r.min_margin),
                r.iterations,
                r.solve_time_ms,
                u8::from(r.recovery),
                r.status
            )?;
        }
        Ok(())
    }
}
