//! Heterogeneous Poisson virus-protection game: safe sets, payoffs,
//! equilibria, replicator dynamics and price control.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); recovery
//! and contamination rates are kept as exact rationals so the safe-set
//! boundary is decided without rounding. The `*F64` aliases below fix the
//! scalar to `f64`.

pub mod control;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod lambert;
pub mod model;
pub mod payoff;
pub mod scalar;
pub mod schedule;
pub mod solve;

pub use control::{
    concavity_check, optimize_exact, optimize_revenue, revenue, revenue_concavity, run_on_game,
    run_two_timescale, spsa_gradient, Arm, ConcavityReport, ControlMode, ControlStep,
    ControllerSettings, ControllerState, EquilibriumRevenue, FnRevenue, Observation, Optimum,
    ReplicatorMarket, RevenueOracle,
};
pub use dynamics::{
    default_dt, discrete_replicator, discrete_replicator_strided, discrete_replicator_with, integrate_replicator,
    population_step_offset, replicator_rhs, settle_discrete, Settled, Trajectory,
};
pub use equilibrium::{
    check_dominance, closed_form_high_tau, closed_form_mid_tau, interior_exists, pure_off_onset,
    solve_equilibrium, verify_ess, ClosedForm, EquilibriumKind, EquilibriumResult, EssReport,
};
pub use error::{Error, Result};
pub use lambert::lambert_w_minus1;
pub use model::{
    critical_threshold_homogeneous, effective_rates, Convention, ModelConfig, OutcomeVector,
    PlayerType, PopulationModel, Rate, SafeSet,
};
pub use payoff::PayoffEngine;
pub use scalar::Scalar;
pub use schedule::{validate_schedule, validate_schedule_name, ScheduleFamily, ScheduleFlags, StepSchedule};

pub type ModelF64 = PopulationModel<f64>;
pub type SafeSetF64 = SafeSet<f64>;
pub type EngineF64 = PayoffEngine<f64>;
pub type EquilibriumF64 = EquilibriumResult<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ControllerStateF64 = ControllerState<f64>;

pub type ModelF32 = PopulationModel<f32>;
pub type EngineF32 = PayoffEngine<f32>;
