use std::time::Instant;

use super::assemble::{assemble, assemble_recovery, Assembly, Layout};
use super::model::propagate;
use super::{idx, AugmentedState, ControlInput, MpccConfig, MpccError, INPUT_DIM, STEP_VARS};
use crate::corridor::Corridor;
use crate::qp::{QpSolution, Settings, Solver, Status};
use crate::scalar::Real;
use crate::trajectory::ReferenceTrajectory;
use crate::tube::TubeConstraints;
use crate::vec3::Vec3;

/// Linear cost per metre of safety slack in recovery mode.
pub const RECOVERY_SLACK_WEIGHT: f64 = 1e4;
/// Tolerance for the start position lying inside the corridor.
pub const START_TOLERANCE: f64 = 1e-3;
/// An unconverged solve with a larger primal residual is treated as
/// infeasible.
const STALLED_RESIDUAL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct HorizonPlan<T> {
    pub states: Vec<AugmentedState<T>>,
    pub inputs: Vec<ControlInput<T>>,
    /// Linearization points for the next cycle.
    pub thetas: Vec<T>,
    /// Linearization points this plan was built with.
    pub linearization: Vec<T>,
    /// Wall-clock seconds for assembly and solve.
    pub solve_time: f64,
    pub status: Status,
    pub iterations: usize,
    pub recovery: bool,
    /// Largest safety slack in metres (zero outside recovery).
    pub max_slack: T,
    pub widened: bool,
    pub polished: bool,
    /// Safety rows each planned position was constrained by.
    pub tubes: Vec<TubeConstraints<T>>,
}

impl<T: Real> HorizonPlan<T> {
    pub fn solved(&self) -> bool {
        self.status == Status::Solved
    }
}

struct WarmStart<T> {
    primal: Vec<T>,
    dual: Vec<T>,
    layout: Layout,
}

/// Receding-horizon controller. Owns its linearization points and warm-start
/// memory.
pub struct Controller<'a, T> {
    config: MpccConfig<T>,
    traj: &'a ReferenceTrajectory<T>,
    corridor: &'a Corridor<T>,
    thetas: Vec<T>,
    warm: Option<WarmStart<T>>,
    recovery_enabled: bool,
    radii: Vec<T>,
    settings: Settings<T>,
}

impl<'a, T: Real> Controller<'a, T> {
    /// Seeds `θ⁽ᵏ⁾ = clamp(t* + (k−1)·dt)` with `t*` the projection of the
    /// start position onto the whole reference.
    pub fn init(
        config: MpccConfig<T>,
        traj: &'a ReferenceTrajectory<T>,
        corridor: &'a Corridor<T>,
        current: &AugmentedState<T>,
    ) -> Result<Self, MpccError> {
        config.validate()?;
        traj.check_corridor_indices(corridor.len())?;
        if !current.iter().all(|v| v.is_finite()) {
            return Err(MpccError::NonFiniteState);
        }
        let pos = position(current);
        if corridor.locate(pos, T::of(START_TOLERANCE)).is_none() {
            let (polyhedron, face, distance) = corridor
                .polyhedra()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let (f, d) = p.worst_face(pos);
                    (i, f, d)
                })
                .fold((0, 0, T::infinity()), |best, cur| if cur.2 < best.2 { cur } else { best });
            return Err(MpccError::StartOutsideCorridor {
                polyhedron,
                face,
                distance: distance.to_f64_lossy(),
            });
        }
        let span = traj.duration();
        let t_star = traj.project(pos, traj.t0(), span)?;
        let thetas = (0..config.horizon)
            .map(|k| traj.clamp_time(t_star + config.dt * T::of(k as f64)))
            .collect();
        let radii = corridor
            .polyhedra()
            .iter()
            .map(|p| p.chebyshev_center().map(|(_, r)| r).unwrap_or(T::of(1e-6)))
            .collect();
        Ok(Self {
            config,
            traj,
            corridor,
            thetas,
            warm: None,
            recovery_enabled: true,
            radii,
            settings: Settings {
                polish: true,
                ..Settings::default()
            },
        })
    }

    pub fn config(&self) -> &MpccConfig<T> {
        &self.config
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }

    pub fn set_recovery(&mut self, enabled: bool) {
        self.recovery_enabled = enabled;
    }

    pub fn settings_mut(&mut self) -> &mut Settings<T> {
        &mut self.settings
    }

    /// Virtual-time state at the start: on the projected reference time,
    /// progressing at the nominal rate.
    pub fn initial_virtual_state(&self) -> [T; 3] {
        [self.thetas[0], T::one(), T::zero()]
    }

    /// Solves one horizon from `current` and returns the first input.
    pub fn step(&mut self, current: &AugmentedState<T>) -> Result<(ControlInput<T>, HorizonPlan<T>), MpccError> {
        let clock = Instant::now();
        let mut cur = *current;
        cur[idx::T] = self.traj.clamp_time(cur[idx::T]);

        let nominal = assemble(&self.config, self.traj, self.corridor, &cur, &self.thetas)?;
        let predicted = position(&propagate(self.config.dt, &cur, &[T::zero(); INPUT_DIM]));
        let tol = T::of(1e-6);
        let first_step_unsafe = !nominal.tubes[0].contains(predicted, tol);

        let mut iterations = 0;
        let (asm, sol) = if first_step_unsafe && self.recovery_enabled {
            self.solve_recovery(&cur, predicted, &mut iterations)?
        } else {
            let sol = self.solve(&nominal)?;
            iterations += sol.iterations;
            if self.recovery_enabled && needs_recovery(&sol) {
                self.solve_recovery(&cur, predicted, &mut iterations)?
            } else {
                (nominal, sol)
            }
        };

        let (states, inputs) = asm.split(&sol.primal);
        let usable = matches!(sol.status, Status::Solved | Status::MaxIterations);
        let n = self.config.horizon;
        let mut next = Vec::with_capacity(n);
        if usable {
            for k in 1..n {
                next.push(states[k][idx::T]);
            }
            let last = &states[n - 1];
            next.push(last[idx::T] + self.config.dt * last[idx::VT]);
        } else {
            next.extend_from_slice(&self.thetas[1..]);
            next.push(self.thetas[n - 1] + self.config.dt);
        }
        let mut floor = T::neg_infinity();
        for th in next.iter_mut() {
            *th = self.traj.clamp_time(*th).max(floor);
            floor = *th;
        }

        let max_slack = if asm.recovery {
            asm.layout
                .steps
                .iter()
                .flat_map(|s| s.slack_vars.clone())
                .map(|i| sol.primal[i])
                .fold(T::zero(), T::max)
        } else {
            T::zero()
        };

        let l = &self.config.limits;
        let mut apply = inputs[0];
        for j in 0..3 {
            apply[j] = apply[j].max(-l.j_max).min(l.j_max);
        }
        apply[3] = apply[3].max(-l.j_t_max).min(l.j_t_max);

        if usable {
            self.warm = Some(WarmStart {
                primal: sol.primal.clone(),
                dual: sol.dual.clone(),
                layout: asm.layout.clone(),
            });
        } else {
            self.warm = None;
        }
        let linearization = std::mem::replace(&mut self.thetas, next.clone());

        let plan = HorizonPlan {
            states,
            inputs,
            thetas: next,
            linearization,
            solve_time: clock.elapsed().as_secs_f64(),
            status: sol.status,
            iterations,
            recovery: asm.recovery,
            max_slack,
            widened: asm.widened,
            polished: sol.polished,
            tubes: asm.tubes,
        };
        Ok((apply, plan))
    }

    fn solve(&self, asm: &Assembly<T>) -> Result<QpSolution<T>, MpccError> {
        let mut solver = Solver::new(&asm.problem, self.settings.clone())?;
        if let Some(warm) = &self.warm {
            let (primal, dual) = shift_warm_start(warm, &asm.layout);
            solver.warm_start(&primal, &dual)?;
        }
        Ok(solver.solve()?)
    }

    fn solve_recovery(
        &self,
        cur: &AugmentedState<T>,
        predicted: Vec3<T>,
        iterations: &mut usize,
    ) -> Result<(Assembly<T>, QpSolution<T>), MpccError> {
        let polyhedra: Vec<usize> = self
            .thetas
            .iter()
            .map(|&th| self.recovery_polyhedron(self.traj.corridor_index_at(th), predicted))
            .collect();
        let asm = assemble_recovery(
            &self.config,
            self.traj,
            self.corridor,
            cur,
            &self.thetas,
            &polyhedra,
            T::of(RECOVERY_SLACK_WEIGHT),
        )?;
        let sol = self.solve(&asm)?;
        *iterations += sol.iterations;
        Ok((asm, sol))
    }

    /// Among the annotated polyhedron and its neighbours, the one with the
    /// smallest violation at `point` relative to its inscribed radius.
    fn recovery_polyhedron(&self, annotated: usize, point: Vec3<T>) -> usize {
        let last = self.corridor.len() - 1;
        let mut candidates = vec![annotated];
        if annotated < last {
            candidates.push(annotated + 1);
        }
        if annotated > 0 {
            candidates.push(annotated - 1);
        }
        let score = |i: usize| self.corridor.polyhedra()[i].max_violation(point).max(T::zero()) / self.radii[i];
        candidates
            .into_iter()
            .fold((annotated, T::infinity()), |best, i| {
                let s = score(i);
                if s < best.1 {
                    (i, s)
                } else {
                    best
                }
            })
            .0
    }
}

fn position<T: Real>(x: &AugmentedState<T>) -> Vec3<T> {
    Vec3::new(x[idx::X], x[idx::Y], x[idx::Z])
}

fn needs_recovery<T: Real>(sol: &QpSolution<T>) -> bool {
    match sol.status {
        Status::PrimalInfeasible => true,
        Status::MaxIterations => sol.primal_residual > T::of(STALLED_RESIDUAL),
        Status::Solved | Status::DualInfeasible => false,
    }
}

/// Previous solution advanced by one step with the last step repeated.
/// Row blocks whose size changed start from zero multipliers.
fn shift_warm_start<T: Real>(warm: &WarmStart<T>, layout: &Layout) -> (Vec<T>, Vec<T>) {
    let n = layout.horizon;
    let mut primal = vec![T::zero(); layout.num_vars];
    let mut dual = vec![T::zero(); layout.num_rows];
    if warm.layout.horizon != n {
        return (primal, dual);
    }
    for k in 0..n {
        let src = (k + 1).min(n - 1);
        let (s, d) = (STEP_VARS * src, STEP_VARS * k);
        primal[d..d + STEP_VARS].copy_from_slice(&warm.primal[s..s + STEP_VARS]);
        let old = &warm.layout.steps[src];
        let new = &layout.steps[k];
        for (from, to) in [
            (&old.dynamics, &new.dynamics),
            (&old.safety, &new.safety),
            (&old.limits, &new.limits),
        ] {
            if from.len() == to.len() {
                dual[to.clone()].copy_from_slice(&warm.dual[from.clone()]);
            }
        }
    }
    let (old_term, new_term) = (&warm.layout.steps[n - 1].terminal, &layout.steps[n - 1].terminal);
    if old_term.len() == new_term.len() {
        dual[new_term.clone()].copy_from_slice(&warm.dual[old_term.clone()]);
    }
    (primal, dual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corridor::Polyhedron;
    use crate::trajectory::PolySegment;

    fn straight() -> (ReferenceTrajectory<f64>, Corridor<f64>) {
        let seg = PolySegment::new(10.0, [vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]], 0);
        let traj = ReferenceTrajectory::new(0.0, vec![seg]).unwrap();
        let corridor =
            Corridor::new(vec![Polyhedron::axis_box(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(11.0, 1.0, 1.0)).unwrap()])
                .unwrap();
        (traj, corridor)
    }

    fn state_at(traj: &ReferenceTrajectory<f64>, t: f64) -> AugmentedState<f64> {
        let p = traj.position(t);
        let v = traj.velocity(t);
        let mut x = [0.0; 12];
        for a in 0..3 {
            x[idx::POS[a]] = p[a];
            x[idx::VEL[a]] = v[a];
        }
        x[idx::T] = t;
        x[idx::VT] = 1.0;
        x
    }

    #[test]
    fn init_seeds_thetas_from_projection() {
        let (traj, corridor) = straight();
        let c = Controller::init(MpccConfig::default(), &traj, &corridor, &state_at(&traj, 0.0)).unwrap();
        assert_eq!(c.thetas().len(), 20);
        for (k, th) in c.thetas().iter().enumerate() {
            assert!((th - 0.05 * k as f64).abs() < 1e-6);
        }
        let mut x = state_at(&traj, 5.0);
        x[idx::Y] = 0.3;
        let c = Controller::init(MpccConfig::default(), &traj, &corridor, &x).unwrap();
        assert!((c.thetas()[0] - 5.0).abs() < 1e-2);
    }

    #[test]
    fn init_rejects_start_outside_corridor() {
        let (traj, corridor) = straight();
        let mut x = state_at(&traj, 5.0);
        x[idx::Y] = 1.5;
        match Controller::init(MpccConfig::default(), &traj, &corridor, &x) {
            Err(MpccError::StartOutsideCorridor { polyhedron: 0, face: 2, distance }) => {
                assert!((distance - 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected {:?}", other.err()),
        }
    }

    #[test]
    fn step_from_reference_tracks_and_advances() {
        let (traj, corridor) = straight();
        let mut c = Controller::init(MpccConfig::default(), &traj, &corridor, &state_at(&traj, 1.0)).unwrap();
        let (u, plan) = c.step(&state_at(&traj, 1.0)).unwrap();
        assert_eq!(plan.status, Status::Solved);
        assert!(!plan.recovery);
        assert!(u.iter().all(|v| v.is_finite()));
        assert!(plan.thetas.windows(2).all(|w| w[0] <= w[1]));
        assert!(plan.thetas[0] > 1.0);
        // Warm-started second step.
        let (_, plan2) = c.step(&plan.states[0]).unwrap();
        assert_eq!(plan2.status, Status::Solved);
    }

    #[test]
    fn displaced_start_reduces_error_over_horizon() {
        let (traj, corridor) = straight();
        let mut x = state_at(&traj, 3.0);
        x[idx::Y] = 0.3;
        let config = MpccConfig {
            rho: 0.01,
            ..MpccConfig::default()
        };
        let mut c = Controller::init(config, &traj, &corridor, &x).unwrap();
        let (_, plan) = c.step(&x).unwrap();
        assert_eq!(plan.status, Status::Solved);
        let last = plan.states.last().unwrap();
        let err = (position(last) - traj.position(last[idx::T])).norm();
        assert!(err < 0.3, "terminal error {err}");
    }
}
