//! Shared domain types and the primitive formulas of the mining model: power
//! shares, delay-discounted success probability, and the raw utilities of the
//! edge server and of a mobile miner.

use crate::error::{require, GameError, Result};

/// Global economic and physical constants of one mining round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    /// Fixed block reward `R`.
    pub fixed_reward: f64,
    /// Variable transaction reward `TR`.
    pub tx_reward: f64,
    /// Poisson rate of puzzle solving `γ`.
    pub poisson_rate: f64,
    /// Transmission delay per transaction `z`.
    pub delay_factor: f64,
    /// Transactions per block `T`, used by the edge server's delay discount.
    pub tx_per_block: u32,
    /// Transaction load `T_m` seen by mobile miners.
    pub mobile_tx_load: u32,
    /// Electricity and other fixed costs of the edge server `Φ`.
    pub edge_overhead: f64,
    /// Minimum consumption of a mobile miner `ω_min`.
    pub min_consumption: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            fixed_reward: 10.0,
            tx_reward: 2.0,
            poisson_rate: 0.01,
            delay_factor: 1.0,
            tx_per_block: 10,
            mobile_tx_load: 10,
            edge_overhead: 0.0,
            min_consumption: 0.0,
        }
    }
}

impl GameParams {
    /// Checks every field. The delay rate and factor may be zero so that
    /// delay-free instances stay expressible.
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| require(v.is_finite() && v >= 0.0, name, v, "must be finite and >= 0");
        nonneg("fixed_reward", self.fixed_reward)?;
        nonneg("tx_reward", self.tx_reward)?;
        nonneg("poisson_rate", self.poisson_rate)?;
        nonneg("delay_factor", self.delay_factor)?;
        nonneg("edge_overhead", self.edge_overhead)?;
        nonneg("min_consumption", self.min_consumption)?;
        require(self.tx_per_block >= 1, "tx_per_block", self.tx_per_block as f64, "must be >= 1")?;
        require(self.mobile_tx_load >= 1, "mobile_tx_load", self.mobile_tx_load as f64, "must be >= 1")?;
        Ok(())
    }

    /// `R + TR`.
    pub fn total_reward(&self) -> f64 {
        self.fixed_reward + self.tx_reward
    }

    /// `e^(−γ·z·n)` for an arbitrary transaction count.
    pub fn discount_for(&self, tx_count: f64) -> f64 {
        (-self.poisson_rate * self.delay_factor * tx_count).exp()
    }

    /// Edge-side delay discount `e^(−γ·z·T)`.
    pub fn edge_discount(&self) -> f64 {
        self.discount_for(self.tx_per_block as f64)
    }

    /// Miner-side delay discount `e^(−γ·z·T_m)`.
    pub fn mobile_discount(&self) -> f64 {
        self.discount_for(self.mobile_tx_load as f64)
    }

    /// Delay-discounted reward seen by the leader, `a = (R+TR)·e^(−γ·z·T_m)`.
    pub fn reward_coefficient(&self) -> f64 {
        self.total_reward() * self.mobile_discount()
    }
}

/// Nonnegative computing powers with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    powers: Vec<f64>,
    total: f64,
}

impl PowerProfile {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        for &x in &powers {
            require(x.is_finite() && x >= 0.0, "power", x, "must be finite and >= 0")?;
        }
        let total = compensated_sum(powers.iter().copied());
        if total <= 0.0 {
            return Err(GameError::DegenerateProfile);
        }
        Ok(PowerProfile { powers, total })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn power(&self, i: usize) -> Result<f64> {
        self.powers
            .get(i)
            .copied()
            .ok_or(GameError::IndexOutOfRange { index: i, len: self.powers.len() })
    }

    /// `Σ_{j≠i} x_j`, computed without cancellation.
    pub fn others_sum(&self, i: usize) -> Result<f64> {
        self.power(i)?;
        Ok(compensated_sum(
            self.powers.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x),
        ))
    }

    pub fn share(&self, i: usize) -> Result<f64> {
        Ok(self.power(i)? / self.total)
    }

    pub fn shares(&self) -> Vec<f64> {
        self.powers.iter().map(|x| x / self.total).collect()
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Which leader objective to optimize or report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Additional reward share minus the fee paid.
    #[default]
    Full,
    /// The reduced form that drops the fee term after substituting the
    /// follower equilibrium.
    Simplified,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Objective::Full),
            "simplified" => Ok(Objective::Simplified),
            other => Err(format!("unknown objective `{other}` (expected full|simplified)")),
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Full => "full",
            Objective::Simplified => "simplified",
        })
    }
}

/// One inequality checked by a uniqueness certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs < rhs`
    pub passed: bool,
}

impl Condition {
    pub fn strict_less(label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Condition { label: label.into(), lhs, rhs, passed: lhs < rhs }
    }
}

/// Outcome of a sufficient condition for equilibrium uniqueness.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub certified: bool,
    pub conditions: Vec<Condition>,
}

/// Follower allocation and leader payoffs at a Stage II equilibrium.
///
/// `follower_powers` may be all zero (nobody participates in the uniform
/// game), so it is a plain vector rather than a [`PowerProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub follower_powers: Vec<f64>,
    pub follower_utilities: Vec<f64>,
    pub leader_profit_full: f64,
    pub leader_profit_simplified: f64,
    pub uniqueness_certified: bool,
    pub certificate: Certificate,
}

impl EquilibriumResult {
    pub fn leader_profit(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Full => self.leader_profit_full,
            Objective::Simplified => self.leader_profit_simplified,
        }
    }
}

pub fn power_share(profile: &PowerProfile, i: usize) -> Result<f64> {
    profile.share(i)
}

/// `share · e^(−γ·z·tx_count)`.
pub fn mining_success_prob(share: f64, params: &GameParams, tx_count: u32) -> Result<f64> {
    require((0.0..=1.0).contains(&share), "share", share, "must lie in [0, 1]")?;
    Ok(share * params.discount_for(tx_count as f64))
}

/// Edge server utility `(R+TR)·e^(−γzT) − Σ fees − Φ`. Fees are paid
/// whether or not the block is won.
pub fn edge_utility(params: &GameParams, fees: &[f64]) -> f64 {
    params.total_reward() * params.edge_discount() - compensated_sum(fees.iter().copied()) - params.edge_overhead
}

/// Mobile miner utility `f_i·α_i·e^(−γzT_m) − φ·x_i`.
pub fn miner_utility(
    fee: f64,
    profile: &PowerProfile,
    i: usize,
    unit_cost: f64,
    params: &GameParams,
) -> Result<f64> {
    let share = profile.share(i)?;
    Ok(fee * share * params.mobile_discount() - unit_cost * profile.power(i)?)
}
