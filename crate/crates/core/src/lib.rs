//! Corridor-based model predictive contouring control: reference
//! trajectories, safe flight corridors, tube constraints, a sparse QP solver,
//! the receding-horizon controller and a point-mass simulator.
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

pub mod corridor;
pub mod io;
pub mod mpcc;
pub mod qp;
pub mod scalar;
pub mod sim;
pub mod trajectory;
pub mod tube;
pub mod vec3;

pub use scalar::Real;
pub use vec3::Vec3;

pub type Vector3 = vec3::Vec3<f64>;
pub type ReferenceTrajectory = trajectory::ReferenceTrajectory<f64>;
pub type PolySegment = trajectory::PolySegment<f64>;
pub type Halfspace = corridor::Halfspace<f64>;
pub type Polyhedron = corridor::Polyhedron<f64>;
pub type Corridor = corridor::Corridor<f64>;
pub type TubeConstraints = tube::TubeConstraints<f64>;
pub type QpProblem = qp::QpProblem<f64>;
pub type QpSolution = qp::QpSolution<f64>;
pub type MpccConfig = mpcc::MpccConfig<f64>;
pub type Controller<'a> = mpcc::Controller<'a, f64>;
pub type HorizonPlan = mpcc::HorizonPlan<f64>;
pub type Scenario = sim::Scenario<f64>;
pub type ScenarioLog = sim::ScenarioLog<f64>;
pub type PlantState = sim::PlantState<f64>;
