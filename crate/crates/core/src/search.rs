//! Numerical machinery: multiplicative fee ascent, best-response dynamics for
//! the discriminatory game, and two scalar maximizers (exhaustive grid and
//! golden section) that double as oracles.

use crate::discriminatory::DiscriminatoryGame;
use crate::error::{require, GameError, Result};
use crate::model::PowerProfile;

/// Parameters of the multiplicative fee ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub initial_fee: f64,
    /// Relative probe step `θ ∈ (0, 1)`.
    pub step_factor: f64,
    /// Relative step size below which the search stops.
    pub tolerance: f64,
    /// Maximum number of profit evaluations.
    pub max_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            initial_fee: 1.0,
            step_factor: 0.05,
            tolerance: 1e-6,
            max_iters: 10_000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        require(
            self.initial_fee.is_finite() && self.initial_fee > 0.0,
            "initial_fee",
            self.initial_fee,
            "must be finite and > 0",
        )?;
        require(
            self.step_factor > 0.0 && self.step_factor < 1.0,
            "step_factor",
            self.step_factor,
            "must lie strictly inside (0, 1)",
        )?;
        require(
            self.tolerance.is_finite() && self.tolerance > 0.0,
            "tolerance",
            self.tolerance,
            "must be finite and > 0",
        )?;
        require(self.max_iters >= 1, "max_iters", self.max_iters as f64, "must be >= 1")?;
        Ok(())
    }
}

/// Leader profit at one fee, with the follower response that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeEvaluation {
    pub leader_profit: f64,
    pub follower_power_total: Option<f64>,
}

impl FeeEvaluation {
    pub fn profit_only(leader_profit: f64) -> Self {
        FeeEvaluation { leader_profit, follower_power_total: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub fee: f64,
    pub follower_power_total: Option<f64>,
    pub leader_profit: f64,
    pub improved: bool,
    /// Whether the literal stopping test `p_{k+1} − p_k < 0 ∧ |p_{k+1} − p_k|/p_k < ε`
    /// would have fired at this probe.
    pub literal_stop: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The probe step shrank below the tolerance.
    StepBelowTolerance,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    pub termination: Termination,
}

impl SearchTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| s.improved)
    }
}

/// Multiplicative hill climbing on the leader fee.
///
/// The fee is multiplied by `1 + θ` while profit strictly improves. On the
/// first failure the opposite direction (`p / (1 + θ)`) is probed, and when
/// neither direction improves the step is halved. The search ends once the
/// relative step is below `ε`. The first trace entry is the initial fee and
/// counts as accepted.
pub fn fee_ascent_search<F>(cfg: &SearchConfig, mut profit_fn: F) -> Result<(f64, SearchTrace)>
where
    F: FnMut(f64) -> FeeEvaluation,
{
    cfg.validate()?;
    let mut fee = cfg.initial_fee;
    let first = profit_fn(fee);
    let mut best = first.leader_profit;
    let mut steps = vec![TraceStep {
        fee,
        follower_power_total: first.follower_power_total,
        leader_profit: best,
        improved: true,
        literal_stop: false,
    }];
    let mut step = cfg.step_factor;
    let mut upward = true;
    // directions already probed without success at the current step size
    let mut failed = 0u8;

    loop {
        if step < cfg.tolerance {
            return Ok((fee, SearchTrace { steps, termination: Termination::StepBelowTolerance }));
        }
        if steps.len() >= cfg.max_iters {
            let trace = SearchTrace { steps, termination: Termination::MaxIterations };
            return Err(GameError::FeeSearchExhausted {
                max_iters: cfg.max_iters,
                last_fee: fee,
                trace: Box::new(trace),
            });
        }
        let candidate = if upward { fee * (1.0 + step) } else { fee / (1.0 + step) };
        let eval = profit_fn(candidate);
        let improved = candidate.is_finite() && eval.leader_profit > best;
        let delta = candidate - fee;
        steps.push(TraceStep {
            fee: candidate,
            follower_power_total: eval.follower_power_total,
            leader_profit: eval.leader_profit,
            improved,
            literal_stop: delta < 0.0 && delta.abs() / fee < cfg.tolerance,
        });
        if improved {
            fee = candidate;
            best = eval.leader_profit;
            failed = 0;
        } else {
            failed += 1;
            upward = !upward;
            if failed == 2 {
                step *= 0.5;
                failed = 0;
            }
        }
    }
}

/// Exhaustive evaluation at `lo, lo + step, …` up to `hi`. Ties go to the
/// smallest point.
pub fn grid_argmax<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    assert!(lo < hi && step > 0.0, "grid_argmax needs lo < hi and step > 0");
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut best = (lo, f(lo));
    for k in 1..=n {
        let x = lo + k as f64 * step;
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function. The bracket is
/// narrowed until its width is below `eps · (hi − lo)`; the endpoints are
/// compared against the interior estimate so monotone objectives return the
/// exact boundary.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, eps: f64) -> (f64, f64) {
    assert!(lo < hi && eps > 0.0, "golden_section_max needs lo < hi and eps > 0");
    let target = eps * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a >= target {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Relaxed synchronous best-response iteration for the discriminatory game.
///
/// Every miner's best response is computed against the current profile, then
/// each coordinate moves a fraction `2(M−1)/M²` of the way towards it. Plain
/// synchronous updates oscillate for `M ≥ 4`. Stops once the largest
/// best-response residual `|BR_i(x) − x_i|` is below `tol`.
pub fn best_response_dynamics(
    game: &DiscriminatoryGame,
    start: &PowerProfile,
    tol: f64,
    max_iters: usize,
) -> Result<PowerProfile> {
    let m = game.miners();
    if start.len() != m {
        return Err(GameError::LengthMismatch { expected: m, actual: start.len() });
    }
    require(tol > 0.0, "tol", tol, "must be > 0")?;
    for &x in start.powers() {
        require(x > 0.0, "start", x, "starting powers must be strictly positive")?;
    }
    let relax = 2.0 * (m as f64 - 1.0) / (m * m) as f64;
    let mut current = start.powers().to_vec();
    let mut previous = current.clone();
    let mut residual = f64::INFINITY;

    for _ in 0..max_iters {
        let total: f64 = crate::model::compensated_sum(current.iter().copied());
        let mut next = Vec::with_capacity(m);
        residual = 0.0;
        for (i, &x) in current.iter().enumerate() {
            let others = (total - x).max(f64::MIN_POSITIVE);
            let br = game.best_response(others, i)?;
            residual = f64::max(residual, (br - x).abs());
            next.push(x + relax * (br - x));
        }
        if residual < tol {
            return PowerProfile::new(current);
        }
        previous = std::mem::replace(&mut current, next);
    }
    Err(GameError::DynamicsNotConverged { max_iters, residual, last: current, previous })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: f64) -> f64 {
        10.0 * (1.0 - p.powf(-0.5)) - p
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let bad = SearchConfig { step_factor: 1.5, ..SearchConfig::default() };
        assert!(matches!(bad.validate(), Err(GameError::InvalidParameter { name: "step_factor", .. })));
        let bad = SearchConfig { tolerance: 0.0, ..SearchConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fee_search_finds_analytic_optimum() {
        let cfg = SearchConfig { initial_fee: 0.5, step_factor: 0.1, tolerance: 1e-6, max_iters: 10_000 };
        let (p, trace) = fee_ascent_search(&cfg, |p| FeeEvaluation::profit_only(g(p))).unwrap();
        assert!((p - 5f64.powf(2.0 / 3.0)).abs() < 1e-3, "{p}");
        assert_eq!(trace.termination, Termination::StepBelowTolerance);
        assert!(trace.steps.len() <= cfg.max_iters);
        let profits: Vec<f64> = trace.accepted().map(|s| s.leader_profit).collect();
        assert!(profits.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fee_search_on_increasing_profit_exhausts() {
        let cfg = SearchConfig { initial_fee: 0.5, step_factor: 0.1, tolerance: 1e-6, max_iters: 500 };
        match fee_ascent_search(&cfg, FeeEvaluation::profit_only) {
            Err(GameError::FeeSearchExhausted { trace, .. }) => {
                assert_eq!(trace.steps.len(), 500);
                assert_eq!(trace.termination, Termination::MaxIterations);
                assert!(trace.steps.windows(2).all(|w| w[1].fee > w[0].fee));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn fee_search_on_constant_profit_stays_put() {
        let cfg = SearchConfig { initial_fee: 0.5, ..SearchConfig::default() };
        let (p, trace) = fee_ascent_search(&cfg, |_| FeeEvaluation::profit_only(3.0)).unwrap();
        assert_eq!(p, 0.5);
        assert_eq!(trace.accepted().count(), 1);
    }

    #[test]
    fn grid_argmax_cases() {
        let (x, _) = grid_argmax(|x| -(x - 1.0) * (x - 1.0), 0.0, 2.0, 1e-3);
        assert!((x - 1.0).abs() <= 1e-3);
        assert_eq!(grid_argmax(|_| 2.0, 0.5, 2.0, 0.1).0, 0.5);
    }

    #[test]
    fn golden_section_cases() {
        let (x, _) = golden_section_max(g, 0.1, 50.0, 1e-10);
        assert!((x - 5f64.powf(2.0 / 3.0)).abs() < 1e-6, "{x}");
        assert_eq!(golden_section_max(|x| x, 0.0, 1.0, 1e-9).0, 1.0);
        assert_eq!(golden_section_max(|x| -x, 0.0, 1.0, 1e-9).0, 0.0);
    }
}
