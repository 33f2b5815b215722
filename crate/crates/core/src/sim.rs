//! Monte-Carlo block mining and the baseline in which the edge server
//! contributes no computing power of its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discriminatory::DiscriminatoryGame;
use crate::error::{require, GameError, Result};
use crate::model::{compensated_sum, GameParams, PowerProfile};
use crate::uniform::UniformGame;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_blocks: u64,
    pub tx_per_block: u32,
    pub seed: u64,
    pub params: GameParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { n_blocks: 1000, tx_per_block: 10, seed: 0, params: GameParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub wins: Vec<u64>,
    /// Rounds in which no miner succeeded.
    pub orphans: u64,
    pub n_blocks: u64,
}

impl SimOutcome {
    pub fn frequencies(&self) -> Vec<f64> {
        self.wins.iter().map(|&w| w as f64 / self.n_blocks as f64).collect()
    }
}

/// One categorical draw per block: miner `i` wins with probability
/// `share_i·e^(−γ·z·tx)` and nobody wins with the residual probability.
///
/// Miner `i`'s winning interval is `[d·Σ_{j<i} share_j, d·Σ_{j≤i} share_j)`
/// on a shared uniform draw, so with a fixed seed the first miner's win
/// count is nondecreasing in its share.
pub fn simulate_mining(profile: &PowerProfile, cfg: &SimConfig) -> Result<SimOutcome> {
    cfg.params.validate()?;
    require(cfg.n_blocks >= 1, "n_blocks", cfg.n_blocks as f64, "must be >= 1")?;
    require(cfg.tx_per_block >= 1, "tx_per_block", cfg.tx_per_block as f64, "must be >= 1")?;
    let discount = cfg.params.discount_for(cfg.tx_per_block as f64);
    let shares = profile.shares();
    let mut upper = Vec::with_capacity(shares.len());
    let mut acc = 0.0;
    for s in &shares {
        acc += s;
        upper.push(discount * acc);
    }
    if let Some(last) = shares.iter().rposition(|&s| s > 0.0) {
        upper[last] = discount;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut wins = vec![0u64; shares.len()];
    let mut orphans = 0u64;
    for _ in 0..cfg.n_blocks {
        let u: f64 = rng.random();
        match upper.iter().position(|&b| u < b) {
            Some(i) => wins[i] += 1,
            None => orphans += 1,
        }
    }
    Ok(SimOutcome { wins, orphans, n_blocks: cfg.n_blocks })
}

pub fn empirical_success_prob(outcome: &SimOutcome, i: usize) -> Result<f64> {
    let wins = outcome
        .wins
        .get(i)
        .ok_or(GameError::IndexOutOfRange { index: i, len: outcome.wins.len() })?;
    Ok(*wins as f64 / outcome.n_blocks as f64)
}

/// Leader profit when all power comes from devices and the round suffers a
/// delay exponent scaled by `delay_multiplier`.
pub fn mdg_baseline_profit(total_power: f64, fees: &[f64], params: &GameParams, delay_multiplier: f64) -> Result<f64> {
    require(total_power.is_finite() && total_power > 0.0, "total_power", total_power, "must be finite and > 0")?;
    require(delay_multiplier >= 1.0, "mdg_delay_mult", delay_multiplier, "must be >= 1")?;
    let discount = params.discount_for(params.tx_per_block as f64 * delay_multiplier);
    Ok(params.total_reward() * discount - compensated_sum(fees.iter().copied()) - params.edge_overhead)
}

/// How the leader prices the device power in a comparison row.
#[derive(Debug, Clone, PartialEq)]
pub enum FeeModel {
    /// One fee to the aggregate follower, chosen so its best response is the
    /// row's device power.
    Uniform { unit_cost: f64 },
    /// Fees proportional to `weights`, scaled so the device equilibrium total
    /// is the row's device power.
    Discriminatory { unit_cost: f64, weights: Vec<f64> },
}

impl FeeModel {
    /// Total fee paid for `device_power` next to `edge_power`.
    pub fn total_fee(&self, edge_power: f64, device_power: f64, params: &GameParams) -> Result<f64> {
        match self {
            FeeModel::Uniform { unit_cost } => {
                UniformGame::new(edge_power, 1.0, *unit_cost, *params)?;
                Ok(UniformGame::inducing_fee(edge_power, *unit_cost, params, device_power))
            }
            FeeModel::Discriminatory { unit_cost, weights } => {
                if device_power == 0.0 {
                    return Ok(0.0);
                }
                let game = DiscriminatoryGame::inducing_fees(weights, *unit_cost, params, device_power)?;
                game.nash_equilibrium()?;
                Ok(compensated_sum(game.fees().iter().copied()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub total_power: f64,
    pub edge_power: f64,
    pub device_power: f64,
    pub fee: f64,
    pub emg_profit: f64,
    pub mdg_profit: f64,
}

/// One point of the EMG/MDG comparison at equal total power and equal fees.
///
/// In EMG the edge server's own fraction of the power mines with the base
/// delay and the device fraction carries the MDG delay multiplier; in MDG
/// all power carries it.
pub fn emg_vs_mdg_row(
    total_power: f64,
    edge_fraction: f64,
    params: &GameParams,
    delay_multiplier: f64,
    fees: &FeeModel,
) -> Result<ComparisonRow> {
    require(
        edge_fraction > 0.0 && edge_fraction < 1.0,
        "edge_fraction",
        edge_fraction,
        "must lie strictly inside (0, 1)",
    )?;
    let edge_power = edge_fraction * total_power;
    let device_power = total_power - edge_power;
    let fee = fees.total_fee(edge_power, device_power, params)?;
    let mdg_profit = mdg_baseline_profit(total_power, &[fee], params, delay_multiplier)?;
    let base = params.edge_discount();
    let delayed = params.discount_for(params.tx_per_block as f64 * delay_multiplier);
    let success = edge_fraction * base + (1.0 - edge_fraction) * delayed;
    let emg_profit = params.total_reward() * success - fee - params.edge_overhead;
    Ok(ComparisonRow { total_power, edge_power, device_power, fee, emg_profit, mdg_profit })
}

pub fn emg_vs_mdg_sweep(
    total_power_grid: &[f64],
    edge_fraction: f64,
    params: &GameParams,
    delay_multiplier: f64,
    fees: &FeeModel,
) -> Result<Vec<ComparisonRow>> {
    let mut grid = total_power_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&w| emg_vs_mdg_row(w, edge_fraction, params, delay_multiplier, fees))
        .collect()
}
