//! Uniform-fee game: all recruited miners act as one aggregate follower that
//! receives a single expected fee `P` and competes against the edge server's
//! own power `X`.

use crate::error::{require, GameError, Result};
use crate::model::{Certificate, Condition, EquilibriumResult, GameParams, Objective};
use crate::search::{fee_ascent_search, golden_section_max, FeeEvaluation, SearchConfig, SearchTrace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGame {
    edge_power: f64,
    fee: f64,
    unit_cost: f64,
    params: GameParams,
}

impl UniformGame {
    pub fn new(edge_power: f64, fee: f64, unit_cost: f64, params: GameParams) -> Result<Self> {
        params.validate()?;
        let positive = |name, v: f64| require(v.is_finite() && v > 0.0, name, v, "must be finite and > 0");
        positive("edge_power", edge_power)?;
        positive("fee", fee)?;
        positive("unit_cost", unit_cost)?;
        let game = UniformGame { edge_power, fee, unit_cost, params };
        require(game.kappa() > 0.0, "fee", fee, "discounted fee underflows to zero")?;
        Ok(game)
    }

    pub fn edge_power(&self) -> f64 {
        self.edge_power
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn unit_cost(&self) -> f64 {
        self.unit_cost
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn with_fee(&self, fee: f64) -> Result<Self> {
        UniformGame::new(self.edge_power, fee, self.unit_cost, self.params)
    }

    /// Discounted fee `κ = P·e^(−γzT_m)`.
    pub fn kappa(&self) -> f64 {
        self.fee * self.params.mobile_discount()
    }

    /// Aggregate follower utility `P·Y/(X+Y)·e^(−γzT_m) − φ1·Y`.
    pub fn aggregate_miner_utility(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        self.kappa() * y / (self.edge_power + y) - self.unit_cost * y
    }

    /// Unclamped response map `F(X) = √(κX/φ1) − X`.
    pub fn response_map(&self, edge_power: f64) -> f64 {
        (self.kappa() * edge_power / self.unit_cost).sqrt() - edge_power
    }

    /// Follower best response `Y* = max(0, √(κX/φ1) − X)`.
    pub fn best_response(&self) -> f64 {
        self.response_map(self.edge_power).max(0.0)
    }

    /// Sufficient condition for a unique follower equilibrium. The operative
    /// bound is `X < κ/(4φ1)`; the weaker positivity bound `X < κ/φ1` is
    /// reported alongside.
    pub fn uniqueness_certificate(&self) -> Certificate {
        let ratio = self.kappa() / self.unit_cost;
        let operative = Condition::strict_less("X < κ/(4φ1)", self.edge_power, ratio / 4.0);
        let positivity = Condition::strict_less("X < κ/φ1", self.edge_power, ratio);
        Certificate { certified: operative.passed, conditions: vec![operative, positivity] }
    }

    /// Leader's additional profit from recruiting the followers at this fee.
    pub fn leader_delta_utility(&self, objective: Objective) -> f64 {
        let a = self.params.reward_coefficient();
        match objective {
            Objective::Simplified => a * (1.0 - (self.edge_power * self.unit_cost / self.kappa()).sqrt()),
            Objective::Full => {
                let y = self.best_response();
                a * (y / (self.edge_power + y)) - self.fee
            }
        }
    }

    pub fn solve(&self) -> EquilibriumResult {
        let y = self.best_response();
        let certificate = self.uniqueness_certificate();
        EquilibriumResult {
            follower_powers: vec![y],
            follower_utilities: vec![self.aggregate_miner_utility(y)],
            leader_profit_full: self.leader_delta_utility(Objective::Full),
            leader_profit_simplified: self.leader_delta_utility(Objective::Simplified),
            uniqueness_certified: certificate.certified,
            certificate,
        }
    }

    /// Fee at which the aggregate follower's best response is exactly
    /// `follower_power` (inverse of the best-response map).
    pub fn inducing_fee(edge_power: f64, unit_cost: f64, params: &GameParams, follower_power: f64) -> f64 {
        let total = edge_power + follower_power;
        unit_cost * total * total / (edge_power * params.mobile_discount())
    }

    /// Highest fee at which followers stay out (`Y* = 0`).
    pub fn participation_threshold(edge_power: f64, unit_cost: f64, params: &GameParams) -> f64 {
        edge_power * unit_cost / params.mobile_discount()
    }
}

/// Fee interval searched by the leader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeBracket {
    pub lo: f64,
    pub hi: f64,
    /// Final bracket width relative to `hi − lo`.
    pub tolerance: f64,
}

impl FeeBracket {
    /// `[max(ω_min, 1e−6), 100·a]`.
    pub fn for_params(params: &GameParams) -> Self {
        FeeBracket {
            lo: params.min_consumption.max(1e-6),
            hi: 100.0 * params.reward_coefficient(),
            tolerance: 1e-10,
        }
    }

    pub fn validate(&self, params: &GameParams) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.lo < self.hi) {
            return Err(GameError::InvalidBracket { lo: self.lo, hi: self.hi });
        }
        if self.lo < params.min_consumption {
            return Err(GameError::BelowParticipation { fee: self.lo, min_consumption: params.min_consumption });
        }
        require(self.tolerance > 0.0, "tolerance", self.tolerance, "must be > 0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeeOptimum {
    pub fee: f64,
    pub profit: f64,
    pub equilibrium: EquilibriumResult,
}

fn optimum_at(edge_power: f64, unit_cost: f64, params: &GameParams, fee: f64, objective: Objective) -> Result<FeeOptimum> {
    let game = UniformGame::new(edge_power, fee, unit_cost, *params)?;
    Ok(FeeOptimum { fee, profit: game.leader_delta_utility(objective), equilibrium: game.solve() })
}

/// Leader-optimal uniform fee over a bracket.
///
/// The full objective is `−P` below the participation threshold and concave
/// above it, so the concave branch is searched by golden section and compared
/// against the bracket's lower end.
pub fn optimal_fee_uniform(
    edge_power: f64,
    unit_cost: f64,
    params: &GameParams,
    objective: Objective,
    bracket: &FeeBracket,
) -> Result<FeeOptimum> {
    bracket.validate(params)?;
    // validates the remaining inputs once
    let probe = UniformGame::new(edge_power, bracket.lo, unit_cost, *params)?;
    let profit = |p: f64| match probe.with_fee(p) {
        Ok(g) => g.leader_delta_utility(objective),
        Err(_) => f64::NEG_INFINITY,
    };
    let fee = match objective {
        Objective::Simplified => golden_section_max(profit, bracket.lo, bracket.hi, bracket.tolerance).0,
        Objective::Full => {
            let threshold = UniformGame::participation_threshold(edge_power, unit_cost, params);
            let lo = bracket.lo.max(threshold);
            let at_lo = (bracket.lo, profit(bracket.lo));
            if lo < bracket.hi {
                let inner = golden_section_max(profit, lo, bracket.hi, bracket.tolerance);
                if inner.1 > at_lo.1 { inner.0 } else { at_lo.0 }
            } else {
                at_lo.0
            }
        }
    };
    optimum_at(edge_power, unit_cost, params, fee, objective)
}

/// Leader-optimal uniform fee found by multiplicative ascent. Fees below the
/// minimum consumption score `−∞`.
pub fn optimal_fee_uniform_ascent(
    edge_power: f64,
    unit_cost: f64,
    params: &GameParams,
    objective: Objective,
    cfg: &SearchConfig,
) -> Result<(FeeOptimum, SearchTrace)> {
    if cfg.initial_fee < params.min_consumption {
        return Err(GameError::BelowParticipation { fee: cfg.initial_fee, min_consumption: params.min_consumption });
    }
    let probe = UniformGame::new(edge_power, cfg.initial_fee, unit_cost, *params)?;
    let (fee, trace) = fee_ascent_search(cfg, |p| {
        match probe.with_fee(p) {
            Ok(g) if p >= params.min_consumption => FeeEvaluation {
                leader_profit: g.leader_delta_utility(objective),
                follower_power_total: Some(g.best_response()),
            },
            _ => FeeEvaluation::profit_only(f64::NEG_INFINITY),
        }
    })?;
    Ok((optimum_at(edge_power, unit_cost, params, fee, objective)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::grid_argmax;

    fn zero_delay(reward: f64) -> GameParams {
        GameParams { fixed_reward: reward, tx_reward: 0.0, poisson_rate: 0.0, ..GameParams::default() }
    }

    fn game(x: f64, p: f64, phi: f64) -> UniformGame {
        UniformGame::new(x, p, phi, zero_delay(10.0)).unwrap()
    }

    #[test]
    fn rejects_invalid_instances() {
        assert!(UniformGame::new(0.0, 1.0, 1.0, GameParams::default()).is_err());
        assert!(UniformGame::new(1.0, -1.0, 1.0, GameParams::default()).is_err());
        assert!(UniformGame::new(1.0, 1.0, f64::INFINITY, GameParams::default()).is_err());
    }

    #[test]
    fn aggregate_utility_values() {
        let g = game(1.0, 4.0, 1.0);
        assert_eq!(g.aggregate_miner_utility(0.0), 0.0);
        assert_eq!(g.aggregate_miner_utility(1.0), 1.0);
        assert_eq!(g.aggregate_miner_utility(3.0), 0.0);
    }

    #[test]
    fn best_response_values() {
        let g = game(1.0, 4.0, 1.0);
        assert_eq!(g.best_response(), 1.0);
        let (y, _) = grid_argmax(|y| g.aggregate_miner_utility(y), 0.0, 10.0, 1e-4);
        assert!((y - 1.0).abs() <= 1e-3);
        assert_eq!(game(1.0, 1.0, 1.0).best_response(), 0.0);
        assert_eq!(game(2.0, 1.0, 1.0).best_response(), 0.0);
    }

    #[test]
    fn certificate_values() {
        let c = game(0.5, 4.0, 1.0).uniqueness_certificate();
        assert!(c.certified);
        assert_eq!(c.conditions[0].rhs, 1.0);
        let c = game(1.5, 4.0, 1.0).uniqueness_certificate();
        assert!(!c.certified);
        assert!(c.conditions[1].passed);
        assert!(game(1e-12, 1e-3, 1.0).uniqueness_certificate().certified);
    }

    #[test]
    fn leader_delta_values() {
        let g = game(1.0, 4.0, 1.0);
        assert_eq!(g.leader_delta_utility(Objective::Simplified), 5.0);
        assert_eq!(g.leader_delta_utility(Objective::Full), 1.0);
        assert_eq!(game(2.0, 2.0, 1.0).leader_delta_utility(Objective::Simplified), 0.0);
        // no participation: literal full objective still pays the fee
        assert_eq!(game(2.0, 1.0, 1.0).leader_delta_utility(Objective::Full), -1.0);
    }

    #[test]
    fn inducing_fee_inverts_best_response() {
        let params = GameParams::default();
        let p = UniformGame::inducing_fee(50.0, 0.001, &params, 30.0);
        let y = UniformGame::new(50.0, p, 0.001, params).unwrap().best_response();
        assert!((y - 30.0).abs() < 1e-9);
    }

    #[test]
    fn optimal_fee_full_objective() {
        let params = zero_delay(10.0);
        let bracket = FeeBracket::for_params(&params);
        let opt = optimal_fee_uniform(1.0, 1.0, &params, Objective::Full, &bracket).unwrap();
        assert!((opt.fee - 5f64.powf(2.0 / 3.0)).abs() < 1e-6);
        let expected = 10.0 * (1.0 - 5f64.powf(-1.0 / 3.0)) - 5f64.powf(2.0 / 3.0);
        assert!((opt.profit - expected).abs() < 1e-9);
    }

    #[test]
    fn optimal_fee_simplified_hits_bracket_top() {
        let params = zero_delay(10.0);
        let bracket = FeeBracket { lo: 0.5, hi: 40.0, tolerance: 1e-10 };
        let opt = optimal_fee_uniform(1.0, 1.0, &params, Objective::Simplified, &bracket).unwrap();
        assert_eq!(opt.fee, 40.0);
    }

    #[test]
    fn optimal_fee_without_reward_is_minimal() {
        let params = zero_delay(0.0);
        let bracket = FeeBracket { lo: 0.1, hi: 10.0, tolerance: 1e-10 };
        let opt = optimal_fee_uniform(1.0, 1.0, &params, Objective::Full, &bracket).unwrap();
        assert_eq!(opt.fee, 0.1);
        assert!(opt.profit <= 0.0);
    }

    #[test]
    fn bracket_errors() {
        let params = zero_delay(10.0);
        let inverted = FeeBracket { lo: 5.0, hi: 1.0, tolerance: 1e-9 };
        assert!(matches!(
            optimal_fee_uniform(1.0, 1.0, &params, Objective::Full, &inverted),
            Err(GameError::InvalidBracket { .. })
        ));
        let params = GameParams { min_consumption: 2.0, ..params };
        let low = FeeBracket { lo: 1.0, hi: 10.0, tolerance: 1e-9 };
        assert!(matches!(
            optimal_fee_uniform(1.0, 1.0, &params, Objective::Full, &low),
            Err(GameError::BelowParticipation { .. })
        ));
        assert_eq!(FeeBracket::for_params(&params).lo, 2.0);
    }

    #[test]
    fn ascent_agrees_with_golden_section() {
        let params = zero_delay(10.0);
        let cfg = SearchConfig { initial_fee: 1.5, step_factor: 0.1, tolerance: 1e-6, max_iters: 10_000 };
        let (opt, trace) = optimal_fee_uniform_ascent(1.0, 1.0, &params, Objective::Full, &cfg).unwrap();
        assert!((opt.fee - 5f64.powf(2.0 / 3.0)).abs() < 1e-3);
        assert!(trace.steps.iter().all(|s| s.follower_power_total.is_some()));
    }
}
