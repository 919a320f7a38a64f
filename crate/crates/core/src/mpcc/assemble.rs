use std::ops::Range;

use super::model::{cost_blocks, dynamics_matrices};
use super::{idx, AugmentedState, ControlInput, MpccConfig, MpccError, INPUT_DIM, STATE_DIM, STEP_VARS};
use crate::corridor::Corridor;
use crate::qp::{CscMatrix, QpProblem};
use crate::scalar::Real;
use crate::trajectory::ReferenceTrajectory;
use crate::tube::{tube_at, TubeConstraints};

/// Constraint rows and slack variables owned by one horizon step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRows {
    pub dynamics: Range<usize>,
    pub safety: Range<usize>,
    pub limits: Range<usize>,
    /// Empty except on the last step.
    pub terminal: Range<usize>,
    /// Slack variables of this step's safety rows (recovery only).
    pub slack_vars: Range<usize>,
}

impl StepRows {
    pub fn rows(&self) -> Range<usize> {
        self.dynamics.start..self.terminal.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub horizon: usize,
    pub steps: Vec<StepRows>,
    /// Nonnegativity rows of the slacks, after all step rows.
    pub slack_rows: Range<usize>,
    pub num_vars: usize,
    pub num_rows: usize,
}

impl Layout {
    /// Variable index of state component `i` at zero-based step `k`.
    pub fn state_var(k: usize, i: usize) -> usize {
        STEP_VARS * k + i
    }

    pub fn input_var(k: usize, j: usize) -> usize {
        STEP_VARS * k + STATE_DIM + j
    }

    pub fn num_slacks(&self) -> usize {
        self.slack_rows.len()
    }
}

#[derive(Debug, Clone)]
pub struct Assembly<T> {
    pub problem: QpProblem<T>,
    /// Added to the QP objective to recover the contouring cost.
    pub constant: T,
    pub layout: Layout,
    /// Safety rows used at each step.
    pub tubes: Vec<TubeConstraints<T>>,
    /// First-step limits were relaxed to contain the uncontrollable
    /// prediction.
    pub widened: bool,
    pub recovery: bool,
}

impl<T: Real> Assembly<T> {
    pub fn objective(&self, z: &[T]) -> T {
        self.problem.objective(z) + self.constant
    }

    pub fn split(&self, z: &[T]) -> (Vec<AugmentedState<T>>, Vec<ControlInput<T>>) {
        split(self.layout.horizon, z)
    }
}

pub(crate) fn split<T: Real>(horizon: usize, z: &[T]) -> (Vec<AugmentedState<T>>, Vec<ControlInput<T>>) {
    let mut states = Vec::with_capacity(horizon);
    let mut inputs = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let mut x = [T::zero(); STATE_DIM];
        x.copy_from_slice(&z[Layout::state_var(k, 0)..Layout::state_var(k, STATE_DIM)]);
        let mut u = [T::zero(); INPUT_DIM];
        u.copy_from_slice(&z[Layout::input_var(k, 0)..Layout::input_var(k, INPUT_DIM)]);
        states.push(x);
        inputs.push(u);
    }
    (states, inputs)
}

/// Stacks per-step states and inputs into the decision vector.
pub fn stack<T: Real>(states: &[AugmentedState<T>], inputs: &[ControlInput<T>]) -> Vec<T> {
    let mut z = Vec::with_capacity(STEP_VARS * states.len());
    for (x, u) in states.iter().zip(inputs) {
        z.extend_from_slice(x);
        z.extend_from_slice(u);
    }
    z
}

/// `Σₖ ‖(x, y, z)⁽ᵏ⁾ − p(t⁽ᵏ⁾)‖² − ρ v_t⁽ᵏ⁾`
pub fn nonlinear_objective<T: Real>(traj: &ReferenceTrajectory<T>, rho: T, states: &[AugmentedState<T>]) -> T {
    states
        .iter()
        .map(|x| {
            let p = traj.position(x[idx::T]);
            idx::POS.iter().enumerate().map(|(a, &i)| (x[i] - p[a]).powi(2)).sum::<T>() - rho * x[idx::VT]
        })
        .sum()
}

/// `w_a Σₖ ‖a⁽ᵏ⁾ − a_ref(θ⁽ᵏ⁾)‖² + w_j Σₖ ‖u⁽ᵏ⁾‖²`, where `a_ref` is the
/// reference acceleration for the spatial chains and zero for the virtual one.
pub fn smoothing_cost<T: Real>(
    config: &MpccConfig<T>,
    traj: &ReferenceTrajectory<T>,
    thetas: &[T],
    states: &[AugmentedState<T>],
    inputs: &[ControlInput<T>],
) -> T {
    let acc: T = states
        .iter()
        .zip(thetas)
        .map(|(x, &th)| {
            let target = reference_accel(traj, th);
            SMOOTHED_STATES.iter().zip(target).map(|(&i, r)| (x[i] - r).powi(2)).sum::<T>()
        })
        .sum();
    let jerk: T = inputs.iter().map(|u| u.iter().map(|&j| j * j).sum::<T>()).sum();
    config.accel_weight * acc + config.jerk_weight * jerk
}

/// Acceleration the smoothing penalty pulls toward, ordered as
/// `SMOOTHED_STATES`.
fn reference_accel<T: Real>(traj: &ReferenceTrajectory<T>, theta: T) -> [T; 4] {
    let a = traj.acceleration(traj.clamp_time(theta));
    [a[0], a[1], a[2], T::zero()]
}

const SMOOTHED_STATES: [usize; 4] = [idx::AX, idx::AY, idx::AZ, idx::AT];

/// Contouring cost with `p(t)` replaced by its first-order expansion about
/// `θ⁽ᵏ⁾`.
pub fn linearized_objective<T: Real>(
    traj: &ReferenceTrajectory<T>,
    rho: T,
    thetas: &[T],
    states: &[AugmentedState<T>],
) -> T {
    states
        .iter()
        .zip(thetas)
        .map(|(x, &theta)| {
            let theta = traj.clamp_time(theta);
            let p = traj.position(theta);
            let d = traj.velocity(theta);
            let dt = x[idx::T] - theta;
            idx::POS
                .iter()
                .enumerate()
                .map(|(a, &i)| (x[i] - p[a] - d[a] * dt).powi(2))
                .sum::<T>()
                - rho * x[idx::VT]
        })
        .sum()
}

/// Builds the horizon QP with polygon-tube safety rows.
pub fn assemble<T: Real>(
    config: &MpccConfig<T>,
    traj: &ReferenceTrajectory<T>,
    corridor: &Corridor<T>,
    current: &AugmentedState<T>,
    thetas: &[T],
) -> Result<Assembly<T>, MpccError> {
    check_inputs(config, current, thetas)?;
    let tubes = thetas
        .iter()
        .map(|&th| tube_at(corridor, traj, th))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(build(config, traj, current, thetas, tubes, false))
}

/// Builds the horizon QP with the faces of `polyhedra[k]` as step `k`'s
/// safety rows, each relaxed by a penalized nonnegative slack.
pub fn assemble_recovery<T: Real>(
    config: &MpccConfig<T>,
    traj: &ReferenceTrajectory<T>,
    corridor: &Corridor<T>,
    current: &AugmentedState<T>,
    thetas: &[T],
    polyhedra: &[usize],
    slack_weight: T,
) -> Result<Assembly<T>, MpccError> {
    check_inputs(config, current, thetas)?;
    if polyhedra.len() != thetas.len() {
        return Err(MpccError::ThetaCount {
            expected: thetas.len(),
            found: polyhedra.len(),
        });
    }
    let tubes = polyhedra
        .iter()
        .map(|&i| {
            let poly = corridor.get(i).ok_or(crate::tube::TubeError::CorridorIndex {
                index: i,
                len: corridor.len(),
            })?;
            Ok(TubeConstraints {
                rows: poly.faces().to_vec(),
                fallback: true,
                polyhedron: i,
                section: None,
            })
        })
        .collect::<Result<Vec<_>, MpccError>>()?;
    let mut asm = build(config, traj, current, thetas, tubes, true);
    for s in asm.layout.steps.iter().flat_map(|s| s.slack_vars.clone()) {
        asm.problem.q[s] = slack_weight;
    }
    Ok(asm)
}

fn check_inputs<T: Real>(config: &MpccConfig<T>, current: &AugmentedState<T>, thetas: &[T]) -> Result<(), MpccError> {
    config.validate()?;
    if thetas.len() != config.horizon {
        return Err(MpccError::ThetaCount {
            expected: config.horizon,
            found: thetas.len(),
        });
    }
    if !current.iter().all(|v| v.is_finite()) || !thetas.iter().all(|v| v.is_finite()) {
        return Err(MpccError::NonFiniteState);
    }
    Ok(())
}

struct LimitRow<T> {
    var: usize,
    lo: T,
    hi: T,
    /// Half-width of the first-step values reachable through one input.
    reach: T,
}

fn limit_rows<T: Real>(config: &MpccConfig<T>, t0: T, tm: T) -> Vec<LimitRow<T>> {
    let l = &config.limits;
    let dt = config.dt;
    let row = |var, lo, hi, reach| LimitRow { var, lo, hi, reach };
    let mut rows = Vec::with_capacity(13);
    for &v in &idx::VEL {
        rows.push(row(v, -l.v_max, l.v_max, T::zero()));
    }
    for &a in &idx::ACC {
        rows.push(row(a, -l.a_max, l.a_max, l.j_max * dt));
    }
    for j in 0..3 {
        rows.push(row(STATE_DIM + j, -l.j_max, l.j_max, T::zero()));
    }
    rows.push(row(STATE_DIM + 3, -l.j_t_max, l.j_t_max, T::zero()));
    rows.push(row(idx::VT, T::zero(), l.v_t_max, T::zero()));
    rows.push(row(idx::AT, -l.a_t_max, l.a_t_max, l.j_t_max * dt));
    rows.push(row(idx::T, t0, tm, T::zero()));
    rows
}

fn build<T: Real>(
    config: &MpccConfig<T>,
    traj: &ReferenceTrajectory<T>,
    current: &AugmentedState<T>,
    thetas: &[T],
    tubes: Vec<TubeConstraints<T>>,
    slacked: bool,
) -> Assembly<T> {
    let horizon = config.horizon;
    let (a_d, b_d) = dynamics_matrices(config.dt);
    let inf = T::infinity_bound();

    let mut predicted = [T::zero(); STATE_DIM];
    for i in 0..STATE_DIM {
        predicted[i] = (0..STATE_DIM).map(|j| a_d[i][j] * current[j]).sum();
    }

    let total_safety: usize = tubes.iter().map(|t| t.rows.len()).sum();
    let num_slacks = if slacked { total_safety } else { 0 };
    let num_vars = STEP_VARS * horizon + num_slacks;

    let mut trip: Vec<(usize, usize, T)> = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut steps = Vec::with_capacity(horizon);
    let mut next_slack = STEP_VARS * horizon;
    let mut widened = false;
    let limits = limit_rows(config, traj.t0(), traj.tm());

    for k in 0..horizon {
        let start = lower.len();
        for i in 0..STATE_DIM {
            let r = lower.len();
            trip.push((r, Layout::state_var(k, i), T::one()));
            for j in 0..INPUT_DIM {
                if b_d[i][j] != T::zero() {
                    trip.push((r, Layout::input_var(k, j), -b_d[i][j]));
                }
            }
            let rhs = if k == 0 {
                predicted[i]
            } else {
                for j in 0..STATE_DIM {
                    if a_d[i][j] != T::zero() {
                        trip.push((r, Layout::state_var(k - 1, j), -a_d[i][j]));
                    }
                }
                T::zero()
            };
            lower.push(rhs);
            upper.push(rhs);
        }
        let dynamics = start..lower.len();

        let safety_start = lower.len();
        let slack_start = next_slack;
        for h in &tubes[k].rows {
            let r = lower.len();
            for (axis, &i) in idx::POS.iter().enumerate() {
                if h.normal[axis] != T::zero() {
                    trip.push((r, Layout::state_var(k, i), h.normal[axis]));
                }
            }
            if slacked {
                trip.push((r, next_slack, -h.normal.norm()));
                next_slack += 1;
            }
            lower.push(-inf);
            upper.push(h.offset);
        }
        let safety = safety_start..lower.len();

        let limits_start = lower.len();
        for row in &limits {
            let (mut lo, mut hi) = (row.lo, row.hi);
            if k == 0 && row.var < STATE_DIM {
                let pred = predicted[row.var];
                let (reach_lo, reach_hi) = (pred - row.reach, pred + row.reach);
                if reach_hi < lo {
                    lo = reach_hi;
                    widened = true;
                }
                if reach_lo > hi {
                    hi = reach_lo;
                    widened = true;
                }
            }
            trip.push((lower.len(), STEP_VARS * k + row.var, T::one()));
            lower.push(lo);
            upper.push(hi);
        }
        let limits_range = limits_start..lower.len();

        let terminal_start = lower.len();
        if k + 1 == horizon {
            let d = traj.velocity(thetas[k]);
            for (axis, &i) in idx::VEL.iter().enumerate() {
                let bound = d[axis].abs() + config.terminal_eps;
                trip.push((lower.len(), Layout::state_var(k, i), T::one()));
                lower.push(-bound);
                upper.push(bound);
            }
        }
        steps.push(StepRows {
            dynamics,
            safety,
            limits: limits_range,
            terminal: terminal_start..lower.len(),
            slack_vars: slack_start..next_slack,
        });
    }

    let slack_start = lower.len();
    for s in 0..num_slacks {
        trip.push((lower.len(), STEP_VARS * horizon + s, T::one()));
        lower.push(T::zero());
        upper.push(inf);
    }
    let slack_rows = slack_start..lower.len();

    let mut p_trip = Vec::new();
    let mut q = vec![T::zero(); num_vars];
    let mut constant = T::zero();
    let two = T::of(2.0);
    let cost_vars = [idx::X, idx::Y, idx::Z, idx::T];
    for (k, &theta) in thetas.iter().enumerate() {
        let cb = cost_blocks(traj, theta, config.rho);
        for (a, &va) in cost_vars.iter().enumerate() {
            for (b, &vb) in cost_vars.iter().enumerate() {
                if va <= vb && cb.q_mat[a][b] != T::zero() {
                    p_trip.push((Layout::state_var(k, va), Layout::state_var(k, vb), two * cb.q_mat[a][b]));
                }
            }
        }
        for (a, &v) in [idx::X, idx::Y, idx::Z, idx::T, idx::VT].iter().enumerate() {
            q[Layout::state_var(k, v)] = cb.q_vec[a];
        }
        constant += cb.constant;
        let two_wa = two * config.accel_weight;
        let two_wj = two * config.jerk_weight;
        if config.accel_weight != T::zero() {
            let target = reference_accel(traj, theta);
            for (&i, r) in SMOOTHED_STATES.iter().zip(target) {
                p_trip.push((Layout::state_var(k, i), Layout::state_var(k, i), two_wa));
                q[Layout::state_var(k, i)] = -two_wa * r;
                constant += config.accel_weight * r * r;
            }
        }
        for j in 0..INPUT_DIM {
            if two_wj != T::zero() {
                p_trip.push((Layout::input_var(k, j), Layout::input_var(k, j), two_wj));
            }
        }
    }

    let m = lower.len();
    let problem = QpProblem {
        p: CscMatrix::from_triplets(num_vars, num_vars, &p_trip),
        q,
        a: CscMatrix::from_triplets(m, num_vars, &trip),
        l: lower,
        u: upper,
    };
    debug_assert!(problem.validate().is_ok());
    Assembly {
        problem,
        constant,
        layout: Layout {
            horizon,
            steps,
            slack_rows,
            num_vars,
            num_rows: m,
        },
        tubes,
        widened,
        recovery: slacked,
    }
}
