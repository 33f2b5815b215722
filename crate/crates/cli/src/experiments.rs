//! Experiment drivers. Every driver returns a [`Report`]; failures of a
//! single instance become error rows and the run carries on.

use emg_core::{
    compensated_sum, emg_vs_mdg_row, mining_success_prob, optimal_fee_uniform, optimal_fee_uniform_ascent,
    optimal_fees_discriminatory, simulate_mining, AscentConfig, DiscriminatoryGame, FeeBracket, FeeModel,
    FeeOptimum, GameError, GameParams, Objective, PowerProfile, SimConfig, UniformGame,
};

use crate::config::{ExperimentConfig, ExperimentKind, FeeMethod, FeeModelKind};
use crate::table::{Cell, Report};

pub fn run_experiment(cfg: &ExperimentConfig) -> Report {
    let mut report = match cfg.kind {
        ExperimentKind::SolveUniform => solve_uniform(cfg),
        ExperimentKind::SolveDisc => solve_disc(cfg),
        ExperimentKind::Simulate => simulate(cfg),
        ExperimentKind::Fig(1) => fig1(cfg),
        ExperimentKind::Fig(2) => fig2(cfg),
        ExperimentKind::Fig(3) => fee_comparison(cfg, false),
        ExperimentKind::Fig(4) => fee_comparison(cfg, true),
        ExperimentKind::Fig(5) => emg_vs_mdg(cfg, FeeModelKind::Discriminatory),
        ExperimentKind::Fig(6) => emg_vs_mdg(cfg, FeeModelKind::Uniform),
        ExperimentKind::CompareMdg => emg_vs_mdg(cfg, cfg.fee_model),
        ExperimentKind::Fig(n) => unreachable!("fig{n} rejected by the config parser"),
    };
    let mut summary = vec![format!(
        "{}: {} rows, {} with errors",
        cfg.kind,
        report.rows.len(),
        report.error_rows()
    )];
    summary.append(&mut report.summary);
    report.summary = summary;
    report
}

fn bracket(cfg: &ExperimentConfig, params: &GameParams) -> FeeBracket {
    let default = FeeBracket::for_params(params);
    FeeBracket { lo: cfg.fee_lo.unwrap_or(default.lo), hi: cfg.fee_hi.unwrap_or(default.hi), ..default }
}

/// Leader-optimal uniform fee with the configured method.
pub fn uniform_optimum(cfg: &ExperimentConfig, edge_power: f64, params: &GameParams) -> Result<FeeOptimum, GameError> {
    let bracket = bracket(cfg, params);
    match cfg.method {
        FeeMethod::Golden => optimal_fee_uniform(edge_power, cfg.unit_cost, params, cfg.objective, &bracket),
        FeeMethod::Ascent => {
            let threshold = UniformGame::participation_threshold(edge_power, cfg.unit_cost, params);
            let initial_fee = cfg.initial_fee.unwrap_or((1.05 * threshold).max(bracket.lo));
            let search = emg_core::SearchConfig { initial_fee, ..cfg.search };
            optimal_fee_uniform_ascent(edge_power, cfg.unit_cost, params, cfg.objective, &search).map(|(opt, _)| opt)
        }
    }
}

fn solve_uniform(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::new(&[
        "edge_power",
        "fee",
        "unit_cost",
        "follower_power",
        "follower_utility",
        "leader_profit_full",
        "leader_profit_simplified",
        "certified",
        "bound_quarter",
        "bound_full",
    ]);
    let head = || vec![cfg.edge_power.into()];
    let solved = match cfg.fee {
        Some(fee) => UniformGame::new(cfg.edge_power, fee, cfg.unit_cost, cfg.params).map(|g| (fee, g.solve())),
        None => uniform_optimum(cfg, cfg.edge_power, &cfg.params).map(|opt| (opt.fee, opt.equilibrium)),
    };
    match solved {
        Ok((fee, eq)) => {
            let bounds = &eq.certificate.conditions;
            report.push_ok(vec![
                cfg.edge_power.into(),
                fee.into(),
                cfg.unit_cost.into(),
                eq.follower_powers[0].into(),
                eq.follower_utilities[0].into(),
                eq.leader_profit_full.into(),
                eq.leader_profit_simplified.into(),
                eq.uniqueness_certified.into(),
                bounds[0].rhs.into(),
                bounds[1].rhs.into(),
            ]);
            if cfg.fee.is_none() {
                report.summary.push(format!("optimal fee ({} objective): {fee}", cfg.objective));
            }
            report.summary.push(format!(
                "follower power {}, leader profit {}",
                eq.follower_powers[0],
                eq.leader_profit(cfg.objective)
            ));
        }
        Err(e) => report.push_error(head(), e),
    }
    report
}

fn solve_disc(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::new(&[
        "miner",
        "fee",
        "power",
        "share",
        "utility",
        "leader_delta_full",
        "leader_delta_simplified",
        "certificate_passed",
    ]);
    let game = match &cfg.fees {
        Some(fees) => DiscriminatoryGame::new(fees.clone(), cfg.unit_cost, cfg.params)
            .map(|g| g.with_payment(cfg.payment)),
        None => {
            let ascent = AscentConfig {
                bracket: bracket(cfg, &cfg.params),
                max_iters: cfg.search.max_iters,
                payment: cfg.payment,
                ..AscentConfig::for_params(&cfg.params)
            };
            optimal_fees_discriminatory(cfg.miners, cfg.unit_cost, &cfg.params, cfg.objective, &ascent).and_then(|opt| {
                report.summary.push(format!(
                    "optimized fees after {} sweeps, stationary: {}",
                    opt.sweeps, opt.stationary
                ));
                DiscriminatoryGame::new(opt.fees, cfg.unit_cost, cfg.params).map(|g| g.with_payment(cfg.payment))
            })
        }
    };
    let game = match game {
        Ok(g) => g,
        Err(e) => {
            report.push_error(vec![], e);
            return report;
        }
    };
    let result = game.solve();
    let certificate = game.uniqueness_certificate();
    for i in 0..game.miners() {
        let head = vec![i.into(), game.fees()[i].into()];
        match &result {
            Ok(eq) => {
                let total = compensated_sum(eq.follower_powers.iter().copied());
                let row = (|| -> Result<Vec<Cell>, GameError> {
                    let mut cells = head.clone();
                    cells.extend([
                        eq.follower_powers[i].into(),
                        (eq.follower_powers[i] / total).into(),
                        eq.follower_utilities[i].into(),
                        game.leader_delta_utility(i, Objective::Full)?.into(),
                        game.leader_delta_utility(i, Objective::Simplified)?.into(),
                        certificate.conditions[i].passed.into(),
                    ]);
                    Ok(cells)
                })();
                match row {
                    Ok(cells) => report.push_ok(cells),
                    Err(e) => report.push_error(head, e),
                }
            }
            Err(e) => report.push_error(head, e),
        }
    }
    if let Ok(eq) = &result {
        report.summary.push(format!(
            "total power {}, leader profit {} ({}), certified: {}",
            compensated_sum(eq.follower_powers.iter().copied()),
            eq.leader_profit(cfg.objective),
            cfg.objective,
            eq.uniqueness_certified
        ));
    }
    report
}

fn sim_config(cfg: &ExperimentConfig, seed: u64) -> SimConfig {
    SimConfig { n_blocks: cfg.n_blocks, tx_per_block: cfg.params.tx_per_block, seed, params: cfg.params }
}

fn simulate(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::new(&["miner", "power", "share", "expected_prob", "wins", "empirical_prob"]);
    let outcome = PowerProfile::new(cfg.powers.clone())
        .and_then(|p| simulate_mining(&p, &sim_config(cfg, cfg.seed)).map(|o| (p, o)));
    match outcome {
        Ok((profile, out)) => {
            for (i, share) in profile.shares().into_iter().enumerate() {
                let expected = share * cfg.params.edge_discount();
                report.push_ok(vec![
                    i.into(),
                    profile.powers()[i].into(),
                    share.into(),
                    expected.into(),
                    out.wins[i].into(),
                    (out.wins[i] as f64 / out.n_blocks as f64).into(),
                ]);
            }
            report.summary.push(format!("{} blocks, {} orphaned, seed {}", out.n_blocks, out.orphans, cfg.seed));
        }
        Err(e) => report.push_error(vec![], e),
    }
    report
}

/// Edge success probability against one device as the edge power grows.
/// Every grid point reuses the same seeds.
fn fig1(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::new(&["edge_power", "device_power", "edge_share", "analytic_prob", "empirical_prob"]);
    for x in cfg.grid.points() {
        let head = vec![x.into(), cfg.fixed_power.into()];
        let row = (|| -> Result<Vec<Cell>, GameError> {
            let profile = PowerProfile::new(vec![x, cfg.fixed_power])?;
            let share = profile.share(0)?;
            let analytic = mining_success_prob(share, &cfg.params, cfg.params.tx_per_block)?;
            let mut freq = Vec::with_capacity(cfg.seeds as usize);
            for k in 0..cfg.seeds {
                let out = simulate_mining(&profile, &sim_config(cfg, cfg.seed.wrapping_add(k)))?;
                freq.push(out.wins[0] as f64 / out.n_blocks as f64);
            }
            let empirical = compensated_sum(freq) / cfg.seeds as f64;
            Ok(vec![x.into(), cfg.fixed_power.into(), share.into(), analytic.into(), empirical.into()])
        })();
        match row {
            Ok(cells) => report.push_ok(cells),
            Err(e) => report.push_error(head, e),
        }
    }
    report
}

/// Optimal uniform fee as the fixed block reward grows.
fn fig2(cfg: &ExperimentConfig) -> Report {
    let mut report = Report::new(&["fixed_reward", "optimal_fee", "follower_power", "leader_profit", "certified"]);
    for r in cfg.grid.points() {
        let params = GameParams { fixed_reward: r, ..cfg.params };
        match uniform_optimum(cfg, cfg.edge_power, &params) {
            Ok(opt) => report.push_ok(vec![
                r.into(),
                opt.fee.into(),
                opt.equilibrium.follower_powers[0].into(),
                opt.profit.into(),
                opt.equilibrium.uniqueness_certified.into(),
            ]),
            Err(e) => report.push_error(vec![r.into()], e),
        }
    }
    report
}

/// Leader profit from a given device power under one uniform fee and under
/// per-miner fees. Device power sits next to the edge's own power in the
/// winning share.
fn fee_comparison(cfg: &ExperimentConfig, sweep_edge: bool) -> Report {
    let power_cols = if sweep_edge { ["edge_power", "device_power"] } else { ["device_power", "edge_power"] };
    let mut report = Report::new(&[
        power_cols[0],
        power_cols[1],
        "fee_same",
        "profit_same_fee",
        "fee_diff_total",
        "profit_diff_fee",
    ]);
    let diff = FeeModel::Discriminatory { unit_cost: cfg.unit_cost, weights: cfg.fee_weights.clone() };
    for v in cfg.grid.points() {
        let (edge, device) = if sweep_edge { (v, cfg.fixed_power) } else { (cfg.fixed_power, v) };
        let head = vec![v.into(), cfg.fixed_power.into()];
        let row = (|| -> Result<Vec<Cell>, GameError> {
            let gain = cfg.params.reward_coefficient() * device / (edge + device);
            UniformGame::new(edge, 1.0, cfg.unit_cost, cfg.params)?;
            let fee_same = UniformGame::inducing_fee(edge, cfg.unit_cost, &cfg.params, device);
            let fee_diff = diff.total_fee(edge, device, &cfg.params)?;
            Ok(vec![
                v.into(),
                cfg.fixed_power.into(),
                fee_same.into(),
                (gain - fee_same).into(),
                fee_diff.into(),
                (gain - fee_diff).into(),
            ])
        })();
        match row {
            Ok(cells) => report.push_ok(cells),
            Err(e) => report.push_error(head, e),
        }
    }
    report
}

fn emg_vs_mdg(cfg: &ExperimentConfig, model: FeeModelKind) -> Report {
    let mut report = Report::new(&[
        "edge_fraction",
        "total_power",
        "edge_power",
        "device_power",
        "fee",
        "emg_profit",
        "mdg_profit",
        "advantage",
    ]);
    let fees = match model {
        FeeModelKind::Uniform => FeeModel::Uniform { unit_cost: cfg.unit_cost },
        FeeModelKind::Discriminatory => {
            FeeModel::Discriminatory { unit_cost: cfg.unit_cost, weights: cfg.fee_weights.clone() }
        }
    };
    for &frac in &cfg.edge_fractions {
        for w in cfg.grid.points() {
            match emg_vs_mdg_row(w, frac, &cfg.params, cfg.mdg_delay_mult, &fees) {
                Ok(row) => report.push_ok(vec![
                    frac.into(),
                    w.into(),
                    row.edge_power.into(),
                    row.device_power.into(),
                    row.fee.into(),
                    row.emg_profit.into(),
                    row.mdg_profit.into(),
                    (row.emg_profit - row.mdg_profit).into(),
                ]),
                Err(e) => report.push_error(vec![frac.into(), w.into()], e),
            }
        }
    }
    report.summary.push(format!("delay multiplier {}", cfg.mdg_delay_mult));
    report
}
