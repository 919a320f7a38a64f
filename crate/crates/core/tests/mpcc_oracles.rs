mod common;

use common::{linearized, nonlinear, random_reference, random_state, smoothing, sorted_thetas, wide_box};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmpcc::mpcc::{
    assemble, cost_blocks, idx, stack, AugmentedState, ControlInput, Controller, MpccConfig, INPUT_DIM, STATE_DIM,
};
use cmpcc::qp::{solve, Settings};
use cmpcc::sim::{augmented, plant_step, PlantState};
use cmpcc::trajectory::{PolySegment, ReferenceTrajectory};
use cmpcc::Vec3;

#[test]
fn cost_blocks_match_symbolic_linearization() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let traj = random_reference(&mut rng);
    for _ in 0..100 {
        let theta = rng.random_range(traj.t0()..traj.tm());
        let rho = rng.random_range(0.0..5.0);
        let blocks = cost_blocks(&traj, theta, rho);
        let x = random_state(&mut rng);
        let p = traj.position(theta);
        let d = traj.velocity(theta);
        let dt = x[idx::T] - theta;
        let want: f64 = (0..3).map(|a| (x[idx::POS[a]] - (p[a] + d[a] * dt)).powi(2)).sum::<f64>() - rho * x[idx::VT];
        assert!((blocks.eval(&x) - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {want}", blocks.eval(&x));
    }
}

/// At t⁽ᵏ⁾ = θ⁽ᵏ⁾ the assembled objective equals the nonlinear one (plus the
/// smoothing terms when they are on).
#[test]
fn assembled_objective_is_exact_at_linearization_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for weights in [(0.0, 0.0), (0.1, 0.001)] {
        for case in 0..50 {
            let traj = random_reference(&mut rng);
            let corridor = wide_box(traj.segments().len());
            let n = rng.random_range(2..=20);
            let config = MpccConfig {
                horizon: n,
                rho: rng.random_range(0.0..3.0),
                accel_weight: weights.0,
                jerk_weight: weights.1,
                ..MpccConfig::default()
            };
            let thetas = sorted_thetas(&mut rng, &traj, n);
            let mut current = random_state(&mut rng);
            current[idx::T] = traj.t0();
            let asm = assemble(&config, &traj, &corridor, &current, &thetas).unwrap();
            let states: Vec<AugmentedState<f64>> = thetas
                .iter()
                .map(|&th| {
                    let mut x = random_state(&mut rng);
                    x[idx::T] = th;
                    x
                })
                .collect();
            let inputs: Vec<ControlInput<f64>> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-5.0..5.0))).collect();
            let z = stack(&states, &inputs);
            let got = asm.objective(&z);
            let want = nonlinear(&traj, config.rho, &states) + smoothing(&traj, &config, &thetas, &states, &inputs);
            assert!((got - want).abs() <= 1e-9, "weights {weights:?} case {case}: {got} vs {want}");
        }
    }
}

#[test]
fn assembled_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..20 {
        let traj = random_reference(&mut rng);
        let corridor = wide_box(traj.segments().len());
        let n = rng.random_range(2..=8);
        let config = MpccConfig {
            horizon: n,
            rho: rng.random_range(0.0..3.0),
            ..MpccConfig::default()
        };
        let thetas = sorted_thetas(&mut rng, &traj, n);
        let mut current = random_state(&mut rng);
        current[idx::T] = traj.t0();
        let asm = assemble(&config, &traj, &corridor, &current, &thetas).unwrap();
        let states: Vec<AugmentedState<f64>> = (0..n).map(|_| random_state(&mut rng)).collect();
        let inputs: Vec<ControlInput<f64>> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-5.0..5.0))).collect();
        let z = stack(&states, &inputs);

        let mut grad = vec![0.0; z.len()];
        asm.problem.p.sym_upper_mul_vec(&z, &mut grad);
        for (g, q) in grad.iter_mut().zip(&asm.problem.q) {
            *g += q;
        }
        let f = |z: &[f64]| {
            let (s, u) = asm.split(z);
            linearized(&traj, &config, &thetas, &s, &u)
        };
        let h = 1e-5;
        for i in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let fd = (f(&zp) - f(&zm)) / (2.0 * h);
            let rel = (fd - grad[i]).abs() / grad[i].abs().max(1.0);
            assert!(rel <= 1e-5, "case {case} var {i}: fd {fd} vs {}", grad[i]);
        }
    }
}

/// `x = t`, `y = 0.02t² − 0.001t³`, `z = 1` over 20 s.
fn gentle_cubic() -> ReferenceTrajectory<f64> {
    ReferenceTrajectory::new(
        0.0,
        vec![PolySegment::new(
            20.0,
            [vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.02, -0.001], vec![1.0, 0.0, 0.0, 0.0]],
            0,
        )],
    )
    .unwrap()
}

fn on_reference(traj: &ReferenceTrajectory<f64>, t: f64) -> PlantState<f64> {
    PlantState {
        position: traj.position(t),
        velocity: traj.velocity(t),
        acceleration: traj.acceleration(t),
    }
}

#[test]
fn zero_progress_weight_tracks_reference_exactly() {
    let traj = gentle_cubic();
    let corridor = wide_box(1);
    let config = MpccConfig {
        rho: 0.0,
        ..MpccConfig::default()
    };
    let mut plant = on_reference(&traj, 0.0);
    let mut c = Controller::init(config, &traj, &corridor, &augmented(&plant, [0.0; 3])).unwrap();
    let mut virt = c.initial_virtual_state();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (u, plan) = c.step(&augmented(&plant, virt)).unwrap();
        assert!(plan.solved());
        virt = [plan.states[0][idx::T], plan.states[0][idx::VT], plan.states[0][idx::AT]];
        plant = plant_step(&plant, Vec3::new(u[0], u[1], u[2]), Vec3::zero(), config.dt);
        worst = worst.max((plant.position - traj.position(virt[0])).norm());
    }
    assert!(worst <= 1e-3, "worst tracking error {worst}");
}

#[test]
fn large_progress_weight_runs_ahead_within_limits() {
    // 0.5 m/s line in a wide corridor.
    let traj = ReferenceTrajectory::new(
        0.0,
        vec![PolySegment::new(40.0, [vec![0.0, 0.5], vec![0.0, 0.0], vec![1.0, 0.0]], 0)],
    )
    .unwrap();
    let corridor = wide_box(1);
    let config = MpccConfig {
        rho: 10.0,
        ..MpccConfig::default()
    };
    let mut plant = on_reference(&traj, 0.0);
    let mut c = Controller::init(config, &traj, &corridor, &augmented(&plant, [0.0; 3])).unwrap();
    let mut virt = c.initial_virtual_state();
    let l = config.limits;
    let tol = 1e-5;
    for _ in 0..20 {
        let (u, plan) = c.step(&augmented(&plant, virt)).unwrap();
        assert!(plan.solved());
        let mean_vt = plan.states.iter().map(|x| x[idx::VT]).sum::<f64>() / plan.states.len() as f64;
        assert!(mean_vt > 1.0, "mean v_t {mean_vt}");
        for (x, u) in plan.states.iter().zip(&plan.inputs) {
            for a in 0..3 {
                assert!(x[idx::VEL[a]].abs() <= l.v_max + tol);
                assert!(x[idx::ACC[a]].abs() <= l.a_max + tol);
                assert!(u[a].abs() <= l.j_max + tol);
            }
            assert!(
                x[idx::VT] >= -tol && x[idx::VT] <= l.v_t_max + tol,
                "v_t {} widened {} polished {} iters {} status {:?}",
                x[idx::VT],
                plan.widened,
                plan.polished,
                plan.iterations,
                plan.status
            );
        }
        virt = [plan.states[0][idx::T], plan.states[0][idx::VT], plan.states[0][idx::AT]];
        plant = plant_step(&plant, Vec3::new(u[0], u[1], u[2]), Vec3::zero(), config.dt);
    }
}

#[test]
fn start_near_mid_trajectory_projects_to_it() {
    let traj = gentle_cubic();
    let corridor = wide_box(1);
    // Off the curve along its normal plane at t = 5.
    let d = traj.velocity(5.0);
    let side = Vec3::new(-d[1], d[0], 0.0) * (0.15 / d.norm());
    let start = traj.position(5.0) + side + Vec3::new(0.0, 0.0, -0.1);
    const SAMPLES: usize = 100_000;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=SAMPLES {
        let t = 20.0 * i as f64 / SAMPLES as f64;
        let d = (traj.position(t) - start).norm();
        if d < best.0 {
            best = (d, t);
        }
    }
    let c = Controller::init(
        MpccConfig::default(),
        &traj,
        &corridor,
        &augmented(&PlantState::at_rest(start), [0.0; 3]),
    )
    .unwrap();
    let theta = c.thetas()[0];
    assert!((theta - best.1).abs() < 1e-3, "{theta} vs sampled {}", best.1);
    assert!((theta - 5.0).abs() < 1e-2);
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn warm_start_needs_no_more_iterations_than_cold() {
    let loaded = common::load_bundled("nominal");
    let (traj, corridor) = (&loaded.trajectory, &loaded.corridor);
    let config = loaded.scenario.mpcc;
    let mut plant = PlantState::at_rest(loaded.scenario.start.position.into());
    let mut c = Controller::init(config, traj, corridor, &augmented(&plant, [0.0; 3])).unwrap();
    let settings = Settings {
        polish: true,
        ..Settings::default()
    };
    let mut virt = c.initial_virtual_state();
    let (mut warm, mut cold) = (Vec::new(), Vec::new());
    for _ in 0..150 {
        let mut current = augmented(&plant, virt);
        current[idx::T] = traj.clamp_time(current[idx::T]);
        let asm = assemble(&config, traj, corridor, &current, c.thetas()).unwrap();
        cold.push(solve(&asm.problem, None, &settings).unwrap().iterations);

        let (u, plan) = c.step(&current).unwrap();
        assert!(!plan.recovery);
        warm.push(plan.iterations);
        virt = [plan.states[0][idx::T], plan.states[0][idx::VT], plan.states[0][idx::AT]];
        plant = plant_step(&plant, Vec3::new(u[0], u[1], u[2]), Vec3::zero(), config.dt);
    }
    let (mw, mc) = (median(warm), median(cold));
    println!("median iterations: warm {mw}, cold {mc}");
    assert!(mw <= mc);
}

#[test]
fn layout_sizes_are_consistent() {
    let traj = gentle_cubic();
    let corridor = wide_box(1);
    let config = MpccConfig::default();
    let current = augmented(&on_reference(&traj, 0.0), [0.0, 1.0, 0.0]);
    let thetas: Vec<f64> = (0..config.horizon).map(|k| k as f64 * config.dt).collect();
    let asm = assemble(&config, &traj, &corridor, &current, &thetas).unwrap();
    assert_eq!(asm.problem.num_vars(), config.horizon * (STATE_DIM + INPUT_DIM));
    assert_eq!(asm.layout.num_rows, asm.problem.num_constraints());
}
