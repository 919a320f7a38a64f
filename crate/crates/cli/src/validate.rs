use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use cmpcc::corridor::{Corridor, Halfspace, Polyhedron};
use cmpcc::io::{load_corridor_file, load_trajectory_file, CorridorFile};
use cmpcc::vec3::Vec3;
use cmpcc::trajectory::ReferenceTrajectory;

use crate::CliError;

/// Reference samples checked against their annotated polyhedron.
pub const INSIDE_SAMPLES: usize = 200;
const INSIDE_TOL: f64 = 1e-6;

struct Report {
    failed: bool,
}

/// A closed stdout (`| head`) must not turn a report into a panic.
fn say(line: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

impl Report {
    fn pass(&mut self, check: &str) {
        say(format_args!("PASS {check}"));
    }

    fn fail(&mut self, check: &str, detail: impl std::fmt::Display) {
        self.failed = true;
        say(format_args!("FAIL {check}: {detail}"));
    }

    fn skip(&mut self, check: &str, why: &str) {
        self.failed = true;
        say(format_args!("SKIP {check}: {why}"));
    }
}

/// Runs every load-time check, continuing past failures where the later
/// checks still make sense. Exit 1 when anything fails.
pub fn cmd_validate(trajectory: &Path, corridor: &Path) -> Result<ExitCode, CliError> {
    let mut report = Report { failed: false };

    let traj = match load_trajectory_file::<f64>(trajectory).and_then(|f| f.build_without_continuity(trajectory)) {
        Ok(t) => {
            report.pass("trajectory.structure");
            Some(t)
        }
        Err(e) => {
            report.fail("trajectory.structure", e);
            None
        }
    };
    match &traj {
        Some(t) => check_continuity(&mut report, t),
        None => report.skip("trajectory.continuity", "trajectory did not load"),
    }

    let polyhedra = match load_corridor_file::<f64>(corridor) {
        Ok(file) => check_polyhedra(&mut report, &file),
        Err(e) => {
            report.fail("corridor.polyhedra", e);
            None
        }
    };
    let corr = match polyhedra {
        Some(p) => {
            let c = Corridor::new_unchecked(p).expect("non-empty by check_polyhedra");
            let gaps = c.overlap_failures();
            if gaps.is_empty() {
                report.pass("corridor.overlap");
            } else {
                for g in gaps {
                    report.fail("corridor.overlap", g);
                }
            }
            Some(c)
        }
        None => {
            report.skip("corridor.overlap", "corridor did not load");
            None
        }
    };

    match (&traj, &corr) {
        (Some(t), Some(c)) => match t.check_corridor_indices(c.len()) {
            Ok(()) => {
                report.pass("trajectory.corridor_index");
                check_inside(&mut report, t, c);
            }
            Err(e) => {
                report.fail("trajectory.corridor_index", e);
                report.skip("reference.inside_corridor", "corridor indices out of range");
            }
        },
        _ => {
            report.skip("trajectory.corridor_index", "inputs did not load");
            report.skip("reference.inside_corridor", "inputs did not load");
        }
    }

    Ok(if report.failed {
        ExitCode::from(crate::EXIT_INPUT)
    } else {
        ExitCode::SUCCESS
    })
}

fn check_continuity(report: &mut Report, traj: &ReferenceTrajectory<f64>) {
    let gaps = traj.continuity_gaps();
    if gaps.is_empty() {
        report.pass("trajectory.continuity");
    }
    for (joint, order, gap) in gaps {
        let what = ["position", "velocity", "acceleration"][order as usize];
        report.fail(
            "trajectory.continuity",
            format!("joint {joint} (segments {joint} and {}): {what} gap {gap:.3e}", joint + 1),
        );
    }
}

fn check_polyhedra(report: &mut Report, file: &CorridorFile<f64>) -> Option<Vec<Polyhedron<f64>>> {
    if file.polyhedra.is_empty() {
        report.fail("corridor.polyhedra", "corridor has no polyhedra");
        return None;
    }
    // Every bad polyhedron is listed, not just the first.
    let mut out = Vec::new();
    for (i, p) in file.polyhedra.iter().enumerate() {
        let faces = p
            .faces
            .iter()
            .map(|f| Halfspace::new(Vec3::from(f.normal), f.offset))
            .collect();
        match Polyhedron::new(faces) {
            Ok(poly) => out.push(poly),
            Err(e) => report.fail("corridor.polyhedra", format!("polyhedron {i}: {e}")),
        }
    }
    if out.len() == file.polyhedra.len() {
        report.pass("corridor.polyhedra");
        Some(out)
    } else {
        None
    }
}

fn check_inside(report: &mut Report, traj: &ReferenceTrajectory<f64>, corridor: &Corridor<f64>) {
    let span = traj.duration();
    let mut bad = Vec::new();
    for i in 0..INSIDE_SAMPLES {
        let t = traj.t0() + span * i as f64 / (INSIDE_SAMPLES - 1) as f64;
        let index = traj.corridor_index_at(t);
        let p = traj.position(t);
        let poly = &corridor.polyhedra()[index];
        if !poly.contains(p, INSIDE_TOL) {
            bad.push((t, index, poly.max_violation(p)));
        }
    }
    match bad.first() {
        None => report.pass("reference.inside_corridor"),
        Some(&(t, index, dist)) => report.fail(
            "reference.inside_corridor",
            format!(
                "{} of {INSIDE_SAMPLES} samples outside; first at t = {t:.4} s, {dist:.3e} m outside polyhedron {index}",
                bad.len()
            ),
        ),
    }
}
