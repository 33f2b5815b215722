use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emg_cli::config::{build_config, parse_entries, Entry, ExperimentKind};
use emg_cli::{execute, exit};

/// Stackelberg fee games between an edge server and mobile miners.
#[derive(Parser)]
#[command(name = "emg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the single-fee game, or optimize the fee when none is given.
    SolveUniform(Flags),
    /// Solve the per-miner fee game, or optimize the fees when none are given.
    SolveDisc(Flags),
    /// Monte-Carlo block mining for a power profile.
    Simulate(Flags),
    /// Regenerate one of the figure sweeps (1 to 6).
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        number: u8,
        #[command(flatten)]
        flags: Flags,
    },
    /// Edge-assisted mining against the device-only baseline.
    CompareMdg(Flags),
    /// Run whatever `kind` the config file names.
    Run(Flags),
}

macro_rules! flags {
    ($($field:ident => $key:literal),* $(,)?) => {
        #[derive(Args)]
        struct Flags {
            /// `key = value` config file; flags override it.
            #[arg(long)]
            config: Option<PathBuf>,
            /// Extra `key=value` assignment (repeatable).
            #[arg(long = "set", value_name = "KEY=VALUE")]
            set: Vec<String>,
            $(
                #[arg(long, value_name = "VALUE")]
                $field: Option<String>,
            )*
        }

        impl Flags {
            fn entries(&self) -> Result<Vec<Entry>, String> {
                let mut out = Vec::new();
                for kv in &self.set {
                    let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
                    out.push(Entry::flag(k.trim(), v.trim()));
                }
                $(
                    if let Some(v) = &self.$field {
                        out.push(Entry::flag($key, v.as_str()));
                    }
                )*
                Ok(out)
            }
        }
    };
}

flags! {
    fixed_reward => "fixed_reward",
    tx_reward => "tx_reward",
    poisson_rate => "poisson_rate",
    delay_factor => "delay_factor",
    tx_per_block => "tx_per_block",
    mobile_tx_load => "mobile_tx_load",
    edge_overhead => "edge_overhead",
    min_consumption => "min_consumption",
    edge_power => "edge_power",
    fee => "fee",
    unit_cost => "unit_cost",
    fees => "fees",
    miners => "miners",
    fee_weights => "fee_weights",
    payment => "payment",
    objective => "objective",
    method => "method",
    fee_lo => "fee_lo",
    fee_hi => "fee_hi",
    initial_fee => "initial_fee",
    step_factor => "step_factor",
    tolerance => "tolerance",
    max_iters => "max_iters",
    powers => "powers",
    n_blocks => "n_blocks",
    seed => "seed",
    seeds => "seeds",
    grid_start => "grid_start",
    grid_stop => "grid_stop",
    grid_steps => "grid_steps",
    fixed_power => "fixed_power",
    edge_fractions => "edge_fractions",
    fee_model => "fee_model",
    mdg_delay_mult => "mdg_delay_mult",
    out => "out",
    format => "format",
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::SolveUniform(f) => (Some(ExperimentKind::SolveUniform), f),
        Command::SolveDisc(f) => (Some(ExperimentKind::SolveDisc), f),
        Command::Simulate(f) => (Some(ExperimentKind::Simulate), f),
        Command::Fig { number, flags } => (Some(ExperimentKind::Fig(*number)), flags),
        Command::CompareMdg(f) => (Some(ExperimentKind::CompareMdg), f),
        Command::Run(f) => (None, f),
    };

    let mut entries = Vec::new();
    if let Some(path) = &flags.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(exit::CONFIG as u8);
            }
        };
        match parse_entries(&text) {
            Ok(e) => entries = e,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(exit::CONFIG as u8);
            }
        }
    }
    match flags.entries() {
        Ok(mut e) => entries.append(&mut e),
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    }
    let cfg = match build_config(kind, &entries) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    };

    match execute(&cfg, &mut io::stdout().lock(), &mut io::stderr().lock()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::IO as u8)
        }
    }
}
