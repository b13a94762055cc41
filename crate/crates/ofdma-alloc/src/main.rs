//! Command-line front end: instance generation, single-instance solving and
//! Monte-Carlo simulation.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ofdma_alloc::exact::{exhaustive_oracle, solve_ilp, solve_lp, LpStatus};
use ofdma_alloc::harness::config::parse_scenario_config;
use ofdma_alloc::harness::report::emit_reports;
use ofdma_alloc::harness::{
    calibrate_feasible_power, grid_scenarios, run_scenario, AlgorithmId, GridProfile,
    ScenarioConfig, DEFAULT_POWER_BRACKET,
};
use ofdma_alloc::heuristics::{heur1, heur2, random_baseline, Heur1Options};
use ofdma_alloc::problem::{
    allocation_to_csv, comparison_objective, instance_from_csv, instance_to_csv, Allocation,
    Infeasible, Instance,
};
use ofdma_alloc::rate::build_rate_matrix;
use ofdma_alloc::{channel, seed};
use std::fs;
use std::path::PathBuf;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(
    name = "ofdma-alloc",
    version,
    about = "OFDMA downlink subchannel allocation: heuristics, exact solver, Monte-Carlo harness"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a calibrated problem instance CSV from a scenario config.
    Gen {
        /// Scenario configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Output instance CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance CSV with a chosen algorithm.
    ///
    /// Prints `value,nodes,proven,seconds` on stdout (`infeasible` in the
    /// value slot when no feasible allocation exists).
    Solve {
        /// Instance CSV path.
        #[arg(long)]
        instance: PathBuf,
        /// heur1 | heur1-noswap | heur2 | random | ip | lp | oracle
        #[arg(long)]
        alg: String,
        /// Seed for the random baseline.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Wall-clock limit in seconds for the exact solver.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Relative optimality gap tolerance for the exact solver.
        #[arg(long, default_value_t = 0.0)]
        gap_tol: f64,
        /// Write the resulting allocation CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Monte-Carlo evaluation and emit CSV reports.
    Simulate {
        /// Scenario configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the report CSVs.
        #[arg(long)]
        out_dir: PathBuf,
        /// Use the full-scale grid (N=100, K1 in {6..12}, 100 frames/drop).
        #[arg(long)]
        paper_scale: bool,
        /// Run only the config's own scenario instead of a grid.
        #[arg(long)]
        single: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen { config, out } => gen(config, out),
        Cmd::Solve {
            instance,
            alg,
            seed,
            time_limit,
            gap_tol,
            out,
        } => solve(instance, &alg, seed, time_limit, gap_tol, out),
        Cmd::Simulate {
            config,
            out_dir,
            paper_scale,
            single,
        } => simulate(config, out_dir, paper_scale, single),
    }
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    parse_scenario_config(&text).with_context(|| format!("parsing {path:?}"))
}

/// Builds the first-frame instance of drop 0 under the config's calibrated
/// power, exactly as the simulation would.
fn gen(config: PathBuf, out: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let dseed = seed::drop_seed(cfg.seed, 0);
    let placement = channel::place_users(
        cfg.users(),
        &cfg.channel,
        seed::stream_seed(dseed, seed::STREAM_PLACEMENT, 0),
    )?;
    let frames = channel::generate_drop_gains(
        &placement,
        cfg.subchannels,
        &cfg.channel,
        seed::stream_seed(dseed, seed::STREAM_FADING, 0),
    )?;
    let targets = cfg.targets();
    let p_feas = calibrate_feasible_power(
        &frames[0],
        cfg.cbr_users,
        &targets,
        &cfg.radio,
        DEFAULT_POWER_BRACKET,
    )?;
    let p_bs = cfg.power_ratio * p_feas;
    let rates = build_rate_matrix(&frames[0], p_bs, &cfg.radio)?;
    let instance = Instance::new(rates, cfg.cbr_users, targets)?;
    fs::write(&out, instance_to_csv(&instance)).with_context(|| format!("writing {out:?}"))?;
    eprintln!(
        "wrote {} ({} subchannels, {} users, {} CBR); P_feas = {:.6e} W, P_bs = {:.6e} W",
        out.display(),
        instance.subchannels(),
        instance.users(),
        instance.cbr_count(),
        p_feas,
        p_bs
    );
    Ok(())
}

struct SolveOutcome {
    allocation: Option<Allocation>,
    value: Option<f64>,
    nodes: u64,
    proven: bool,
}

fn solve(
    path: PathBuf,
    alg: &str,
    seed_value: u64,
    time_limit: Option<f64>,
    gap_tol: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let text = fs::read_to_string(&path).with_context(|| format!("reading {path:?}"))?;
    let instance = instance_from_csv(&text).with_context(|| format!("parsing {path:?}"))?;
    let started = Instant::now();

    let from_heuristic = |res: Result<Allocation, Infeasible>,
                          instance: &Instance|
     -> Result<SolveOutcome> {
        Ok(match res {
            Ok(alloc) => SolveOutcome {
                value: Some(comparison_objective(instance, &alloc)?),
                allocation: Some(alloc),
                nodes: 0,
                proven: false,
            },
            Err(Infeasible) => SolveOutcome {
                allocation: None,
                value: None,
                nodes: 0,
                proven: false,
            },
        })
    };

    let outcome = match alg {
        "heur1" => from_heuristic(heur1(&instance, &Heur1Options::default()), &instance)?,
        "heur1-noswap" => {
            let opts = Heur1Options {
                enable_swap: false,
                swap_rounds: 1,
            };
            from_heuristic(heur1(&instance, &opts), &instance)?
        }
        "heur2" => from_heuristic(heur2(&instance), &instance)?,
        "random" => from_heuristic(random_baseline(&instance, seed_value), &instance)?,
        "ip" => {
            let limit = time_limit.map(Duration::from_secs_f64);
            let report = solve_ilp(&instance, limit, gap_tol)?;
            let (allocation, value) = match report.best {
                Some((a, v)) => (Some(a), Some(v)),
                None => (None, None),
            };
            SolveOutcome {
                allocation,
                value,
                nodes: report.node_count,
                proven: report.proven_optimal,
            }
        }
        "lp" => {
            let sol = solve_lp(&instance)?;
            SolveOutcome {
                allocation: None,
                value: (sol.status == LpStatus::Optimal).then_some(sol.value),
                nodes: 0,
                proven: true,
            }
        }
        "oracle" => {
            let report = exhaustive_oracle(&instance)?;
            let (allocation, value) = match report.best {
                Some((a, v)) => (Some(a), Some(v)),
                None => (None, None),
            };
            SolveOutcome {
                allocation,
                value,
                nodes: report.evaluated,
                proven: true,
            }
        }
        other => bail!("unknown algorithm {other:?} (try --alg heur1|heur1-noswap|heur2|random|ip|lp|oracle)"),
    };

    let seconds = started.elapsed().as_secs_f64();
    let value_cell = outcome
        .value
        .map_or_else(|| "infeasible".to_string(), |v| format!("{v:.8e}"));
    println!(
        "{},{},{},{:.3}",
        value_cell, outcome.nodes, outcome.proven, seconds
    );
    if let Some(out) = out {
        match &outcome.allocation {
            Some(alloc) => {
                fs::write(&out, allocation_to_csv(alloc))
                    .with_context(|| format!("writing {out:?}"))?;
                eprintln!("wrote {}", out.display());
            }
            None => eprintln!("no allocation to write (infeasible or fractional result)"),
        }
    }
    Ok(())
}

fn simulate(config: PathBuf, out_dir: PathBuf, paper_scale: bool, single: bool) -> Result<()> {
    let cfg = load_config(&config)?;
    let scenarios = if single {
        vec![cfg]
    } else {
        let profile = if paper_scale {
            GridProfile::Paper
        } else {
            GridProfile::Desk
        };
        grid_scenarios(&cfg, profile)?
    };
    let mut stats = Vec::with_capacity(scenarios.len());
    for (i, scenario) in scenarios.iter().enumerate() {
        let started = Instant::now();
        let s = run_scenario(scenario)?;
        eprintln!(
            "[{}/{}] K1={} ratio={} drops={} converged={} heur1/ip={} heur2/ip={} ({:.1}s)",
            i + 1,
            scenarios.len(),
            s.cbr_users,
            s.power_ratio,
            s.drops_executed,
            s.converged,
            s.ratio_heur1_ip
                .map_or_else(|| "-".into(), |r| format!("{r:.2}%")),
            s.ratio_heur2_ip
                .map_or_else(|| "-".into(), |r| format!("{r:.2}%")),
            started.elapsed().as_secs_f64()
        );
        let _ = s.means.get(&AlgorithmId::Ip);
        stats.push(s);
    }
    let files = emit_reports(&stats, &out_dir)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}
