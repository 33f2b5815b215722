//! Worked instances checked against brute-force oracles.

use emg_core::*;

fn zero_delay(reward: f64) -> GameParams {
    GameParams { fixed_reward: reward, tx_reward: 0.0, poisson_rate: 0.0, ..GameParams::default() }
}

#[test]
fn uniform_best_response_matches_grid() {
    let g = UniformGame::new(1.0, 4.0, 1.0, zero_delay(10.0)).unwrap();
    let (y, _) = grid_argmax(|y| g.aggregate_miner_utility(y), 0.0, 10.0, 1e-4);
    assert!((g.best_response() - y).abs() <= 1e-3);
    // clamped case: marginal utility at the origin is κ/X − φ1 = −0.5
    let g = UniformGame::new(2.0, 1.0, 1.0, zero_delay(10.0)).unwrap();
    let (y, _) = grid_argmax(|y| g.aggregate_miner_utility(y), 0.0, 10.0, 1e-4);
    assert_eq!(y, 0.0);
    assert_eq!(g.best_response(), 0.0);
}

#[test]
fn disc_best_response_matches_grid() {
    let g = DiscriminatoryGame::new(vec![4.0, 8.0], 1.0, zero_delay(10.0)).unwrap();
    let others = 16.0 / 9.0;
    let utility = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        g.miner_utility(&PowerProfile::new(vec![x, others]).unwrap(), 0).unwrap()
    };
    let (x, _) = grid_argmax(utility, 0.0, 5.0, 1e-4);
    assert!((g.best_response(others, 0).unwrap() - x).abs() <= 1e-3);
    assert!((x - 8.0 / 9.0).abs() <= 1e-3);
}

#[test]
fn three_miner_symmetric_closed_form_matches_dynamics() {
    // p·e/φ2 = 9
    let g = DiscriminatoryGame::new(vec![9.0; 3], 1.0, zero_delay(10.0)).unwrap();
    let start = PowerProfile::new(vec![0.5, 3.0, 7.0]).unwrap();
    let found = best_response_dynamics(&g, &start, 1e-12, 10_000).unwrap();
    for &x in found.powers() {
        assert!((x - 2.0).abs() < 1e-9);
    }
}

#[test]
fn dynamics_examples() {
    let g = DiscriminatoryGame::new(vec![4.0, 8.0], 1.0, zero_delay(10.0)).unwrap();
    let found = best_response_dynamics(&g, &PowerProfile::new(vec![1.0, 1.0]).unwrap(), 1e-9, 10_000).unwrap();
    assert!((found.powers()[0] - 8.0 / 9.0).abs() < 1e-6);
    assert!((found.powers()[1] - 16.0 / 9.0).abs() < 1e-6);

    let at_fixed_point = g.nash_equilibrium().unwrap();
    let again = best_response_dynamics(&g, &at_fixed_point, 1e-9, 1).unwrap();
    assert_eq!(again, at_fixed_point);

    let g = DiscriminatoryGame::new(vec![4.0, 4.0], 1.0, zero_delay(10.0)).unwrap();
    let found = best_response_dynamics(&g, &PowerProfile::new(vec![0.01, 5.0]).unwrap(), 1e-9, 10_000).unwrap();
    assert!((found.powers()[0] - 1.0).abs() < 1e-6);
    assert!((found.powers()[1] - 1.0).abs() < 1e-6);
}

#[test]
fn dynamics_reports_non_convergence() {
    let g = DiscriminatoryGame::new(vec![4.0, 8.0], 1.0, zero_delay(10.0)).unwrap();
    let err = best_response_dynamics(&g, &PowerProfile::new(vec![5.0, 5.0]).unwrap(), 1e-12, 2).unwrap_err();
    match err {
        GameError::DynamicsNotConverged { last, previous, .. } => {
            assert_eq!(last.len(), 2);
            assert_ne!(last, previous);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn uniform_fee_optimum_is_analytic() {
    let params = zero_delay(10.0);
    let analytic = 5f64.powf(2.0 / 3.0);
    let opt = optimal_fee_uniform(1.0, 1.0, &params, Objective::Full, &FeeBracket::for_params(&params)).unwrap();
    assert!((opt.fee - analytic).abs() < 1e-6);
    let (p, _) = grid_argmax(
        |p| UniformGame::new(1.0, p, 1.0, params).unwrap().leader_delta_utility(Objective::Full),
        0.01,
        20.0,
        1e-4,
    );
    assert!((p - analytic).abs() < 1e-3);
    for delta in [1e-3, -1e-3] {
        let nearby = UniformGame::new(1.0, opt.fee * (1.0 + delta), 1.0, params).unwrap();
        assert!(nearby.leader_delta_utility(Objective::Full) <= opt.profit);
    }
}

/// Per-miner fee ascent for M = 2 with the full objective: the result is a
/// symmetric vector at which each fee is the grid argmax of that miner's own
/// profit term.
#[test]
fn disc_fee_ascent_is_symmetric_and_coordinatewise_optimal() {
    let params = zero_delay(10.0);
    let cfg = AscentConfig {
        bracket: FeeBracket { lo: 0.01, hi: 10.0, tolerance: 1e-10 },
        start: Some(vec![1.0, 6.0]),
        ..AscentConfig::for_params(&params)
    };
    let opt = optimal_fees_discriminatory(2, 1.0, &params, Objective::Full, &cfg).unwrap();
    assert!(opt.stationary);
    assert!((opt.fees[0] - opt.fees[1]).abs() < 1e-6, "{:?}", opt.fees);

    for i in 0..2 {
        let own = |p: f64| {
            let mut fees = opt.fees.clone();
            fees[i] = p;
            DiscriminatoryGame::new(fees, 1.0, params).unwrap().leader_delta_utility(i, Objective::Full).unwrap()
        };
        let (best, _) = grid_argmax(own, 0.01, 10.0, 1e-2);
        assert!((best - opt.fees[i]).abs() <= 1e-2, "miner {i}: grid {best} vs {}", opt.fees[i]);
    }

    // brute-force search on the diagonal for the fee that is its own best reply
    let mut diagonal_best = (0.0, f64::INFINITY);
    let mut p = 0.01;
    while p <= 10.0 {
        let (reply, _) = grid_argmax(
            |q| DiscriminatoryGame::new(vec![q, p], 1.0, params).unwrap().leader_delta_utility(0, Objective::Full).unwrap(),
            0.01,
            10.0,
            1e-2,
        );
        let gap = (reply - p).abs();
        if gap < diagonal_best.1 {
            diagonal_best = (p, gap);
        }
        p += 1e-2;
    }
    assert!((diagonal_best.0 - opt.fees[0]).abs() <= 2e-2, "{diagonal_best:?} vs {:?}", opt.fees);
}

#[test]
fn disc_simplified_ascent_from_symmetric_start() {
    let params = zero_delay(10.0);
    let cfg = AscentConfig {
        bracket: FeeBracket { lo: 0.5, hi: 25.0, tolerance: 1e-10 },
        ..AscentConfig::for_params(&params)
    };
    let opt = optimal_fees_discriminatory(2, 1.0, &params, Objective::Simplified, &cfg).unwrap();
    assert_eq!(opt.fees, vec![25.0, 25.0]);
}

#[test]
fn simplified_disc_objective_increasing_concave_in_own_fee() {
    for fees in [vec![4.0, 8.0], vec![3.0, 4.0, 5.0], vec![10.0, 12.0, 9.0, 11.0]] {
        let params = zero_delay(10.0);
        let term = |p: f64| {
            let mut f = fees.clone();
            f[0] = p;
            DiscriminatoryGame::new(f, 1.0, params).unwrap().share_from_fees(0).unwrap() * 10.0
        };
        let p = fees[0];
        let h = 1e-2 * p;
        assert!(term(p + h) > term(p));
        assert!(term(p + h) - 2.0 * term(p) + term(p - h) < 0.0);
    }
}
