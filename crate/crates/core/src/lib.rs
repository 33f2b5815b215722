//! Solvers for the two-stage fee game between an edge server (leader) that
//! sets mining fees and the mobile devices (followers) it recruits, which
//! answer with computing power.
//!
//! * [`model`]: shared types and the share, success-probability and utility
//!   primitives.
//! * [`uniform`]: one fee for the aggregate follower.
//! * [`discriminatory`]: per-miner fees and the closed-form Nash equilibrium.
//! * [`search`]: fee ascent, best-response dynamics, scalar maximizers.
//! * [`sim`]: Monte-Carlo mining and the device-only baseline.

pub mod discriminatory;
pub mod error;
pub mod model;
pub mod search;
pub mod sim;
pub mod uniform;

pub use discriminatory::{optimal_fees_discriminatory, AscentConfig, DiscriminatoryGame, FeeVectorOptimum, PaymentMode};
pub use error::{GameError, Result};
pub use model::{
    compensated_sum, edge_utility, miner_utility, mining_success_prob, power_share, Certificate, Condition, EquilibriumResult,
    GameParams, Objective, PowerProfile,
};
pub use search::{
    fee_ascent_search, best_response_dynamics, golden_section_max, grid_argmax, FeeEvaluation, SearchConfig,
    SearchTrace, Termination, TraceStep,
};
pub use sim::{
    emg_vs_mdg_row, emg_vs_mdg_sweep, empirical_success_prob, mdg_baseline_profit, simulate_mining, ComparisonRow,
    FeeModel, SimConfig, SimOutcome,
};
pub use uniform::{optimal_fee_uniform, optimal_fee_uniform_ascent, FeeBracket, FeeOptimum, UniformGame};
