//! Forward solvers for the passive measurement models, the recording
//! operator, and the finite-speed diagnostic.

pub mod finite_speed;
pub mod recording;
pub mod solve;

pub use finite_speed::{finite_speed_check, FiniteSpeedReport};
pub use recording::{record, Noise, PassiveRecording};
pub use solve::{
    evolve_on, heat_solve, schrodinger_solve, uniform_step, wave_kernel, wave_solve, wave_source_solve, wave_velocity,
    Equation, Trajectory,
};
