//! Discriminatory-fee game: each recruited miner `i` receives its own expected
//! fee `p_i` and the miners play a Nash game in computing power.
//!
//! With `c_i = φ2 / (p_i·e^(−γzT_m))` the interior equilibrium has total power
//! `(M−1)/Σc_j` and allocations `x_i = total − c_i·total²`.

use crate::error::{require, GameError, Result};
use crate::model::{compensated_sum, Certificate, Condition, EquilibriumResult, GameParams, Objective, PowerProfile};
use crate::search::golden_section_max;
use crate::uniform::FeeBracket;

/// How the leader's payment to miner `i` enters its profit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaymentMode {
    /// `p_i` is paid once per round.
    #[default]
    LumpSum,
    /// `p_i` is paid per unit of computing power, i.e. `p_i·x_i`.
    PerUnit,
}

impl std::str::FromStr for PaymentMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lump" | "lump-sum" => Ok(PaymentMode::LumpSum),
            "per-unit" => Ok(PaymentMode::PerUnit),
            other => Err(format!("unknown payment mode `{other}` (expected lump-sum|per-unit)")),
        }
    }
}

impl std::fmt::Display for PaymentMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PaymentMode::LumpSum => "lump-sum",
            PaymentMode::PerUnit => "per-unit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatoryGame {
    fees: Vec<f64>,
    unit_cost: f64,
    params: GameParams,
    payment: PaymentMode,
}

impl DiscriminatoryGame {
    pub fn new(fees: Vec<f64>, unit_cost: f64, params: GameParams) -> Result<Self> {
        params.validate()?;
        require(fees.len() >= 2, "miners", fees.len() as f64, "at least two miners are required")?;
        for &p in &fees {
            require(p.is_finite() && p > 0.0, "fee", p, "must be finite and > 0")?;
        }
        require(unit_cost.is_finite() && unit_cost > 0.0, "unit_cost", unit_cost, "must be finite and > 0")?;
        let game = DiscriminatoryGame { fees, unit_cost, params, payment: PaymentMode::default() };
        for c in game.coefficients() {
            require(c.is_finite() && c > 0.0, "fee", c, "cost coefficient must be finite and > 0")?;
        }
        Ok(game)
    }

    pub fn with_payment(mut self, payment: PaymentMode) -> Self {
        self.payment = payment;
        self
    }

    pub fn miners(&self) -> usize {
        self.fees.len()
    }

    pub fn fees(&self) -> &[f64] {
        &self.fees
    }

    pub fn unit_cost(&self) -> f64 {
        self.unit_cost
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn payment(&self) -> PaymentMode {
        self.payment
    }

    /// `c_i = φ2 / (p_i·e^(−γzT_m))`.
    pub fn coefficients(&self) -> Vec<f64> {
        let discount = self.params.mobile_discount();
        self.fees.iter().map(|p| self.unit_cost / (p * discount)).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.miners() {
            Ok(())
        } else {
            Err(GameError::IndexOutOfRange { index: i, len: self.miners() })
        }
    }

    /// `p_i·α_i·e^(−γzT_m) − φ2·x_i`.
    pub fn miner_utility(&self, profile: &PowerProfile, i: usize) -> Result<f64> {
        if profile.len() != self.miners() {
            return Err(GameError::LengthMismatch { expected: self.miners(), actual: profile.len() });
        }
        self.check_index(i)?;
        let reward = self.fees[i] * profile.share(i)? * self.params.mobile_discount();
        Ok(reward - self.unit_cost * profile.power(i)?)
    }

    /// `max(0, √(others/c_i) − others)`.
    pub fn best_response(&self, others_sum: f64, i: usize) -> Result<f64> {
        self.check_index(i)?;
        if others_sum.is_nan() || others_sum <= 0.0 {
            return Err(GameError::DegenerateProfile);
        }
        let c = self.unit_cost / (self.fees[i] * self.params.mobile_discount());
        Ok(((others_sum / c).sqrt() - others_sum).max(0.0))
    }

    /// Equilibrium total power `(M−1)/Σc_j`.
    pub fn equilibrium_total(&self) -> f64 {
        (self.miners() as f64 - 1.0) / compensated_sum(self.coefficients())
    }

    /// Closed-form interior equilibrium. Allocations that come out negative
    /// are reported as an error rather than clamped.
    pub fn nash_equilibrium(&self) -> Result<PowerProfile> {
        let total = self.equilibrium_total();
        let raw: Vec<f64> = self.coefficients().iter().map(|c| total - c * total * total).collect();
        let slack = 1e-12 * total;
        let negative: Vec<usize> = raw.iter().enumerate().filter(|&(_, &x)| x < -slack).map(|(i, _)| i).collect();
        if !negative.is_empty() {
            return Err(GameError::InfeasibleEquilibrium { indices: negative });
        }
        PowerProfile::new(raw.into_iter().map(|x| x.max(0.0)).collect())
    }

    /// Per-miner condition `2(M−1)/p_i < Σ_j 1/p_j`. Reported only; it never
    /// gates the equilibrium computation.
    pub fn uniqueness_certificate(&self) -> Certificate {
        let m1 = self.miners() as f64 - 1.0;
        let inv_sum = compensated_sum(self.fees.iter().map(|p| 1.0 / p));
        let conditions: Vec<Condition> = self
            .fees
            .iter()
            .enumerate()
            .map(|(i, p)| Condition::strict_less(format!("miner {i}: 2(M-1)/p_i < Σ 1/p_j"), 2.0 * m1 / p, inv_sum))
            .collect();
        Certificate { certified: conditions.iter().all(|c| c.passed), conditions }
    }

    /// `1 − (M−1)/(p_i·Σ_j 1/p_j)`, the equilibrium share of miner `i`
    /// expressed through fees alone.
    pub fn share_from_fees(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let inv_sum = compensated_sum(self.fees.iter().map(|p| 1.0 / p));
        Ok(1.0 - (self.miners() as f64 - 1.0) / (self.fees[i] * inv_sum))
    }

    /// Leader's additional profit from miner `i` at the closed-form equilibrium.
    pub fn leader_delta_utility(&self, i: usize, objective: Objective) -> Result<f64> {
        self.check_index(i)?;
        let eq = self.nash_equilibrium()?;
        Ok(self.delta_at(&eq, i, objective))
    }

    fn delta_at(&self, eq: &PowerProfile, i: usize, objective: Objective) -> f64 {
        let a = self.params.reward_coefficient();
        match objective {
            Objective::Simplified => a * self.share_from_fees(i).expect("index checked"),
            Objective::Full => {
                let share = eq.powers()[i] / eq.total();
                debug_assert!((share - self.share_from_fees(i).unwrap()).abs() < 1e-9);
                let payment = match self.payment {
                    PaymentMode::LumpSum => self.fees[i],
                    PaymentMode::PerUnit => self.fees[i] * eq.powers()[i],
                };
                a * share - payment
            }
        }
    }

    /// Sum of the per-miner additional profits.
    pub fn leader_profit_total(&self, objective: Objective) -> Result<f64> {
        let eq = self.nash_equilibrium()?;
        Ok(compensated_sum((0..self.miners()).map(|i| self.delta_at(&eq, i, objective))))
    }

    pub fn solve(&self) -> Result<EquilibriumResult> {
        let eq = self.nash_equilibrium()?;
        let utilities = (0..self.miners()).map(|i| self.miner_utility(&eq, i)).collect::<Result<Vec<_>>>()?;
        let total = |objective| compensated_sum((0..self.miners()).map(|i| self.delta_at(&eq, i, objective)));
        let certificate = self.uniqueness_certificate();
        Ok(EquilibriumResult {
            leader_profit_full: total(Objective::Full),
            leader_profit_simplified: total(Objective::Simplified),
            follower_powers: eq.powers().to_vec(),
            follower_utilities: utilities,
            uniqueness_certified: certificate.certified,
            certificate,
        })
    }

    /// Fees proportional to `weights`, scaled so the closed-form equilibrium
    /// total equals `total_power`.
    pub fn inducing_fees(weights: &[f64], unit_cost: f64, params: &GameParams, total_power: f64) -> Result<Self> {
        require(total_power.is_finite() && total_power > 0.0, "total_power", total_power, "must be finite and > 0")?;
        require(weights.len() >= 2, "miners", weights.len() as f64, "at least two miners are required")?;
        let inv_sum = compensated_sum(weights.iter().map(|w| 1.0 / w));
        let scale = total_power * unit_cost * inv_sum / ((weights.len() as f64 - 1.0) * params.mobile_discount());
        DiscriminatoryGame::new(weights.iter().map(|w| scale * w).collect(), unit_cost, *params)
    }

    /// Range of `p_i` (others fixed) on which every closed-form allocation
    /// stays nonnegative.
    fn feasible_fee_range(&self, i: usize) -> (f64, f64) {
        let m1 = self.miners() as f64 - 1.0;
        let others: f64 = compensated_sum(self.fees.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| 1.0 / p));
        let lo = (m1 - 1.0) / others;
        let hi = self
            .fees
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, pk)| m1 / pk - others)
            .filter(|r| *r > 0.0)
            .map(|r| 1.0 / r)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }
}

/// Settings for the per-coordinate fee ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    pub bracket: FeeBracket,
    /// Starting fees; defaults to the symmetric point `a(M−1)²/M²` at which
    /// every own term is stationary when all fees are equal, clamped into
    /// the bracket.
    pub start: Option<Vec<f64>>,
    /// Sweeps stop once no fee moves by more than this relative amount.
    pub tolerance: f64,
    /// Relative perturbation used by the final stationarity check.
    pub delta: f64,
    pub max_iters: usize,
    pub payment: PaymentMode,
}

impl AscentConfig {
    pub fn for_params(params: &GameParams) -> Self {
        AscentConfig {
            bracket: FeeBracket::for_params(params),
            start: None,
            tolerance: 1e-9,
            delta: 1e-4,
            max_iters: 10_000,
            payment: PaymentMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeeVectorOptimum {
    pub fees: Vec<f64>,
    /// Sum of per-miner additional profits at `fees`.
    pub profit: f64,
    pub sweeps: usize,
    /// No single fee moved by `±delta` (relative) raises that miner's own
    /// profit term.
    pub stationary: bool,
    pub equilibrium: EquilibriumResult,
}

/// Per-miner fee optimization by cyclic coordinate ascent.
///
/// Each sweep replaces `p_i` by the maximizer of miner `i`'s own additional
/// profit term with the other fees fixed, searched by golden section over
/// the bracket intersected with the range where the closed-form
/// equilibrium stays feasible.
pub fn optimal_fees_discriminatory(
    miners: usize,
    unit_cost: f64,
    params: &GameParams,
    objective: Objective,
    cfg: &AscentConfig,
) -> Result<FeeVectorOptimum> {
    cfg.bracket.validate(params)?;
    require(cfg.tolerance > 0.0, "tolerance", cfg.tolerance, "must be > 0")?;
    require(cfg.delta > 0.0, "delta", cfg.delta, "must be > 0")?;
    let start = match &cfg.start {
        Some(s) => {
            if s.len() != miners {
                return Err(GameError::LengthMismatch { expected: miners, actual: s.len() });
            }
            s.clone()
        }
        None => {
            let m = miners as f64;
            let symmetric = params.reward_coefficient() * (m - 1.0) * (m - 1.0) / (m * m);
            vec![symmetric.clamp(cfg.bracket.lo, cfg.bracket.hi); miners]
        }
    };
    let mut game = DiscriminatoryGame::new(start, unit_cost, *params)?.with_payment(cfg.payment);
    game.nash_equilibrium()?;

    let own_term = |game: &DiscriminatoryGame, i: usize, p: f64| -> f64 {
        let mut trial = game.clone();
        trial.fees[i] = p;
        trial.leader_delta_utility(i, objective).unwrap_or(f64::NEG_INFINITY)
    };

    let mut sweeps = 0;
    loop {
        if sweeps >= cfg.max_iters {
            return Err(GameError::AscentNotConverged { max_iters: cfg.max_iters, last: game.fees });
        }
        sweeps += 1;
        let mut largest_move = 0.0_f64;
        for i in 0..miners {
            let (flo, fhi) = game.feasible_fee_range(i);
            let lo = cfg.bracket.lo.max(flo);
            let hi = cfg.bracket.hi.min(fhi);
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                continue;
            }
            let current = game.fees[i];
            let (best, value) = golden_section_max(|p| own_term(&game, i, p), lo, hi, cfg.bracket.tolerance);
            if value > own_term(&game, i, current) {
                largest_move = largest_move.max((best - current).abs() / current);
                game.fees[i] = best;
            }
        }
        if largest_move < cfg.tolerance {
            break;
        }
    }

    let stationary = (0..miners).all(|i| {
        let p = game.fees[i];
        let here = own_term(&game, i, p);
        [p * (1.0 - cfg.delta), p * (1.0 + cfg.delta)]
            .into_iter()
            .filter(|q| (cfg.bracket.lo..=cfg.bracket.hi).contains(q))
            .all(|q| own_term(&game, i, q) <= here + 1e-12 * here.abs().max(1.0))
    });
    let equilibrium = game.solve()?;
    Ok(FeeVectorOptimum {
        profit: equilibrium.leader_profit(objective),
        fees: game.fees,
        sweeps,
        stationary,
        equilibrium,
    })
}
