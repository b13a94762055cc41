//! Monte-Carlo evaluation harness.
//!
//! A scenario fixes user counts, targets, the power ratio and channel/radio
//! parameters. Each drop places users, generates correlated fading frames,
//! calibrates the minimum base-station power that makes the CBR-only
//! problem feasible on the first frame (bisection over an exact feasibility
//! check), scales it by the power ratio and runs every selected algorithm on
//! every frame. Drops accumulate until the per-algorithm standard error of
//! drop means falls below `sigma_norm` relative to the mean, between
//! `min_drops` and `max_drops`.
//!
//! Everything is deterministic given the scenario seed: drops derive their
//! seeds by index, drops run in fixed-size batches (possibly in parallel)
//! and statistics are computed from the index-ordered drop list.

pub mod config;
pub mod report;

use crate::channel::{generate_drop_gains, place_users, ChannelConfig, ChannelError};
use crate::exact::{solve_ilp, solve_lp, ExactError, LpStatus};
use crate::heuristics::{heur1, heur2, random_baseline, Heur1Options};
use crate::problem::{comparison_objective, Instance, ProblemError};
use crate::rate::{build_rate_matrix, RadioParams, RateError};
use crate::seed;
use crate::Matrix;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("no feasible power below {0} W for the CBR-only problem")]
    PowerBracket(f64),
}

/// Allocation schemes the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgorithmId {
    Heur1,
    Heur1NoSwap,
    Heur2,
    Random,
    Ip,
    Lp,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::Heur1,
        AlgorithmId::Heur1NoSwap,
        AlgorithmId::Heur2,
        AlgorithmId::Random,
        AlgorithmId::Ip,
        AlgorithmId::Lp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Heur1 => "heur1",
            AlgorithmId::Heur1NoSwap => "heur1-noswap",
            AlgorithmId::Heur2 => "heur2",
            AlgorithmId::Random => "random",
            AlgorithmId::Ip => "ip",
            AlgorithmId::Lp => "lp",
        }
    }
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlgorithmId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "heur1" => Ok(AlgorithmId::Heur1),
            "heur1-noswap" => Ok(AlgorithmId::Heur1NoSwap),
            "heur2" => Ok(AlgorithmId::Heur2),
            "random" => Ok(AlgorithmId::Random),
            "ip" => Ok(AlgorithmId::Ip),
            "lp" => Ok(AlgorithmId::Lp),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// One grid point of the evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of subchannels N.
    pub subchannels: usize,
    /// Number of CBR users K1 (user indices `0..cbr_users`).
    pub cbr_users: usize,
    /// Number of best-effort users K2.
    pub be_users: usize,
    /// CBR targets in bits/symbol: a single value applies to every CBR user.
    pub cbr_targets: Vec<f64>,
    /// Transmit power as a multiple of the calibrated feasible power.
    pub power_ratio: f64,
    pub min_drops: usize,
    pub max_drops: usize,
    /// Convergence threshold on (standard error of drop means) / |mean|.
    pub sigma_norm: f64,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmId>,
    /// Wall-clock budget per exact solve in seconds; `None` means no limit.
    pub ip_time_limit: Option<f64>,
    pub channel: ChannelConfig,
    pub radio: RadioParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            subchannels: 32,
            cbr_users: 4,
            be_users: 3,
            cbr_targets: vec![12.0],
            power_ratio: 2.0,
            min_drops: 25,
            max_drops: 1000,
            sigma_norm: 0.02,
            seed: 1,
            algorithms: AlgorithmId::ALL.to_vec(),
            ip_time_limit: None,
            channel: ChannelConfig {
                frames_per_drop: 4,
                ..ChannelConfig::default()
            },
            radio: RadioParams::from_dbm(-174.0, 2e5, 1e-6, 6).expect("valid defaults"),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.subchannels == 0 {
            return fail("subchannels must be at least 1".into());
        }
        if self.cbr_users == 0 {
            return fail("at least one CBR user required".into());
        }
        if !(self.cbr_targets.len() == 1 || self.cbr_targets.len() == self.cbr_users) {
            return fail(format!(
                "cbr_targets must hold 1 or {} values, got {}",
                self.cbr_users,
                self.cbr_targets.len()
            ));
        }
        if self.cbr_targets.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return fail("cbr_targets must be positive".into());
        }
        if !(self.power_ratio >= 1.0) {
            return fail(format!("power_ratio must be >= 1, got {}", self.power_ratio));
        }
        if self.min_drops == 0 || self.min_drops > self.max_drops {
            return fail(format!(
                "drop bounds invalid: min {} max {}",
                self.min_drops, self.max_drops
            ));
        }
        if !(self.sigma_norm > 0.0) {
            return fail(format!("sigma_norm must be positive, got {}", self.sigma_norm));
        }
        if self.algorithms.is_empty() {
            return fail("at least one algorithm required".into());
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return fail("duplicate algorithm listed".into());
        }
        if let Some(t) = self.ip_time_limit {
            if !(t > 0.0) {
                return fail(format!("ip_time_limit must be positive, got {t}"));
            }
        }
        self.channel.validate()?;
        Ok(())
    }

    /// Per-user CBR targets, the single-value form replicated.
    pub fn targets(&self) -> Vec<f64> {
        if self.cbr_targets.len() == 1 {
            vec![self.cbr_targets[0]; self.cbr_users]
        } else {
            self.cbr_targets.clone()
        }
    }

    pub fn users(&self) -> usize {
        self.cbr_users + self.be_users
    }

    pub fn frames_per_drop(&self) -> usize {
        self.channel.frames_per_drop
    }

    fn ip_limit(&self) -> Option<Duration> {
        self.ip_time_limit.map(Duration::from_secs_f64)
    }
}

/// Built-in evaluation grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridProfile {
    /// CI-sized grid: N = 32, K1 in {2,3,4,6}, K2 = 3, ratios {2, 3, 4}.
    Desk,
    /// Full-scale grid: N = 100, K1 in {6,8,10,12}, K2 = 5, target 36,
    /// ratios {2, 2.5, 3, 3.5, 4}, 100 frames/drop, 60 s exact-solver budget.
    Paper,
}

/// Expands a base configuration into the scenario grid of a profile.
/// Per-scenario seeds derive from the base seed and the grid index.
pub fn grid_scenarios(
    base: &ScenarioConfig,
    profile: GridProfile,
) -> Result<Vec<ScenarioConfig>, HarnessError> {
    if base.cbr_targets.len() != 1 {
        return Err(HarnessError::Config(
            "grid expansion needs a single uniform CBR target".into(),
        ));
    }
    let (k1_list, ratios): (&[usize], &[f64]) = match profile {
        GridProfile::Desk => (&[2, 3, 4, 6], &[2.0, 3.0, 4.0]),
        GridProfile::Paper => (&[6, 8, 10, 12], &[2.0, 2.5, 3.0, 3.5, 4.0]),
    };
    let mut out = Vec::new();
    for (i, &k1) in k1_list.iter().enumerate() {
        for (j, &ratio) in ratios.iter().enumerate() {
            let mut cfg = base.clone();
            cfg.cbr_users = k1;
            cfg.power_ratio = ratio;
            if profile == GridProfile::Paper {
                cfg.subchannels = 100;
                cfg.be_users = 5;
                cfg.cbr_targets = vec![36.0];
                cfg.min_drops = 25;
                cfg.max_drops = 1000;
                cfg.sigma_norm = 0.02;
                cfg.channel.frames_per_drop = 100;
                cfg.ip_time_limit = Some(60.0);
            }
            cfg.seed = seed::stream_seed(base.seed, 0x6772_6964, (i * ratios.len() + j) as u64);
            cfg.validate()?;
            out.push(cfg);
        }
    }
    Ok(out)
}

/// Hard cap for the feasible-power bracket search.
pub const POWER_BRACKET_CAP_W: f64 = 1e12;
/// Default initial bracket handed to the calibration.
pub const DEFAULT_POWER_BRACKET: (f64, f64) = (1e-3, 1e3);

/// Smallest base-station power (within a relative width of 1e-3) for which
/// the CBR-only problem on `gains` is feasible, decided by the exact solver
/// on the instance restricted to the CBR columns. Feasibility is monotone in
/// power because rates are, so bisection applies; the bracket widens tenfold
/// up to [`POWER_BRACKET_CAP_W`] before giving up.
pub fn calibrate_feasible_power(
    gains: &Matrix,
    cbr_count: usize,
    targets: &[f64],
    radio: &RadioParams,
    bracket: (f64, f64),
) -> Result<f64, HarnessError> {
    assert!(cbr_count >= 1 && cbr_count <= gains.cols());
    assert!(targets.len() == cbr_count);
    let cbr_cols: Vec<usize> = (0..cbr_count).collect();
    let cbr_gains = gains.select_cols(&cbr_cols);
    let feasible = |power: f64| -> Result<bool, HarnessError> {
        let rates = build_rate_matrix(&cbr_gains, power, radio)?;
        let inst = Instance::new(rates, cbr_count, targets.to_vec())?;
        let started = Instant::now();
        let report = solve_ilp(&inst, None, 0.0)?;
        if std::env::var_os("OFDMA_CALIB_DEBUG").is_some() {
            eprintln!(
                "calib probe P={power:.5e}: feasible={} nodes={} {:.3}s",
                report.best.is_some(),
                report.node_count,
                started.elapsed().as_secs_f64()
            );
        }
        Ok(report.best.is_some())
    };

    let (mut lo, mut hi) = bracket;
    assert!(lo >= 0.0 && hi > lo);
    while !feasible(hi)? {
        lo = hi;
        hi *= 10.0;
        if hi > POWER_BRACKET_CAP_W {
            return Err(HarnessError::PowerBracket(POWER_BRACKET_CAP_W));
        }
    }
    while lo > 0.0 && feasible(lo)? {
        hi = lo;
        lo /= 10.0;
        if lo < 1e-12 {
            lo = 0.0;
        }
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Outcome of one drop: per-frame objectives per algorithm (`None` marks an
/// outage or an unresolved exact solve), optimality proofs for the exact
/// solver, outage counters and accumulated runtimes.
#[derive(Debug, Clone)]
pub struct DropResult {
    pub drop_index: usize,
    pub feasible_power: Option<f64>,
    pub tx_power: Option<f64>,
    pub frames: usize,
    pub values: BTreeMap<AlgorithmId, Vec<Option<f64>>>,
    pub ip_proven: Vec<bool>,
    pub outages: BTreeMap<AlgorithmId, usize>,
    /// Exact solves that timed out without proving anything.
    pub ip_unresolved: usize,
    /// Bound-chain violations; the harness asserts this stays zero.
    pub violations: usize,
    pub runtimes: BTreeMap<AlgorithmId, Duration>,
}

impl DropResult {
    fn empty(cfg: &ScenarioConfig, drop_index: usize) -> Self {
        let frames = cfg.frames_per_drop();
        let values = cfg
            .algorithms
            .iter()
            .map(|&a| (a, vec![None; frames]))
            .collect();
        let outages = cfg.algorithms.iter().map(|&a| (a, 0usize)).collect();
        let runtimes = cfg
            .algorithms
            .iter()
            .map(|&a| (a, Duration::ZERO))
            .collect();
        Self {
            drop_index,
            feasible_power: None,
            tx_power: None,
            frames,
            values,
            ip_proven: vec![false; frames],
            outages,
            ip_unresolved: 0,
            violations: 0,
            runtimes,
        }
    }

    /// Drop where power calibration failed: every frame of every algorithm
    /// counts as an outage.
    fn all_outage(cfg: &ScenarioConfig, drop_index: usize) -> Self {
        let mut out = Self::empty(cfg, drop_index);
        for (_, c) in out.outages.iter_mut() {
            *c = out.frames;
        }
        out
    }

    /// Mean objective over the frames where the algorithm produced a value.
    pub fn mean(&self, alg: AlgorithmId) -> Option<f64> {
        let vals = self.values.get(&alg)?;
        let present: Vec<f64> = vals.iter().flatten().copied().collect();
        if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        }
    }
}

fn chain_tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// Runs one drop: placement, fading, power calibration, per-frame solves and
/// the bound-chain checks. Calibration failure yields an all-outage result
/// rather than an error.
pub fn run_drop(cfg: &ScenarioConfig, drop_index: usize) -> Result<DropResult, HarnessError> {
    let dseed = seed::drop_seed(cfg.seed, drop_index as u64);
    let placement = place_users(
        cfg.users(),
        &cfg.channel,
        seed::stream_seed(dseed, seed::STREAM_PLACEMENT, 0),
    )?;
    let frames = generate_drop_gains(
        &placement,
        cfg.subchannels,
        &cfg.channel,
        seed::stream_seed(dseed, seed::STREAM_FADING, 0),
    )?;
    let targets = cfg.targets();

    let feasible_power = match calibrate_feasible_power(
        &frames[0],
        cfg.cbr_users,
        &targets,
        &cfg.radio,
        DEFAULT_POWER_BRACKET,
    ) {
        Ok(p) => p,
        Err(HarnessError::PowerBracket(_)) => {
            return Ok(DropResult::all_outage(cfg, drop_index));
        }
        Err(e) => return Err(e),
    };
    let tx_power = cfg.power_ratio * feasible_power;

    let mut result = DropResult::empty(cfg, drop_index);
    result.feasible_power = Some(feasible_power);
    result.tx_power = Some(tx_power);

    for (t, gains) in frames.iter().enumerate() {
        let rates = build_rate_matrix(gains, tx_power, &cfg.radio)?;
        let inst = Instance::new(rates, cfg.cbr_users, targets.clone())?;
        for &alg in &cfg.algorithms {
            let started = Instant::now();
            let mut outage = false;
            let value: Option<f64> = match alg {
                AlgorithmId::Heur1 => match heur1(&inst, &Heur1Options::default()) {
                    Ok(a) => Some(comparison_objective(&inst, &a)?),
                    Err(_) => {
                        outage = true;
                        None
                    }
                },
                AlgorithmId::Heur1NoSwap => {
                    let opts = Heur1Options {
                        enable_swap: false,
                        swap_rounds: 1,
                    };
                    match heur1(&inst, &opts) {
                        Ok(a) => Some(comparison_objective(&inst, &a)?),
                        Err(_) => {
                            outage = true;
                            None
                        }
                    }
                }
                AlgorithmId::Heur2 => match heur2(&inst) {
                    Ok(a) => Some(comparison_objective(&inst, &a)?),
                    Err(_) => {
                        outage = true;
                        None
                    }
                },
                AlgorithmId::Random => {
                    let s = seed::stream_seed(dseed, seed::STREAM_RANDOM_ALG, t as u64);
                    match random_baseline(&inst, s) {
                        Ok(a) => Some(comparison_objective(&inst, &a)?),
                        Err(_) => {
                            outage = true;
                            None
                        }
                    }
                }
                AlgorithmId::Ip => {
                    let ip_started = Instant::now();
                    let report = solve_ilp(&inst, cfg.ip_limit(), 0.0)?;
                    if let Some(dir) = std::env::var_os("OFDMA_DUMP_SLOW_IP") {
                        let secs = ip_started.elapsed().as_secs_f64();
                        let threshold = std::env::var("OFDMA_DUMP_SLOW_IP_SECS")
                            .ok()
                            .and_then(|v| v.parse::<f64>().ok())
                            .unwrap_or(2.0);
                        if secs > threshold {
                            let path = std::path::Path::new(&dir).join(format!(
                                "slow_{}_{}_{:.1}s.csv",
                                drop_index, t, secs
                            ));
                            let _ = std::fs::write(path, crate::problem::instance_to_csv(&inst));
                        }
                    }
                    result.ip_proven[t] = report.proven_optimal;
                    match report.value() {
                        Some(v) => Some(v),
                        None => {
                            if report.proven_infeasible() {
                                outage = true;
                            } else {
                                result.ip_unresolved += 1;
                            }
                            None
                        }
                    }
                }
                AlgorithmId::Lp => {
                    let sol = solve_lp(&inst)?;
                    if sol.status == LpStatus::Infeasible {
                        outage = true;
                        None
                    } else {
                        Some(sol.value)
                    }
                }
            };
            *result.runtimes.get_mut(&alg).expect("selected") += started.elapsed();
            if outage {
                *result.outages.get_mut(&alg).expect("selected") += 1;
            }
            result.values.get_mut(&alg).expect("selected")[t] = value;
        }

        // bound chain: LP >= IP >= every feasible construction, and the
        // interchange step never hurts the first heuristic
        let frame_value = |a: AlgorithmId| -> Option<f64> {
            result.values.get(&a).and_then(|v| v[t])
        };
        let feasible_algs = [
            AlgorithmId::Heur1,
            AlgorithmId::Heur1NoSwap,
            AlgorithmId::Heur2,
            AlgorithmId::Random,
        ];
        if let Some(lp) = frame_value(AlgorithmId::Lp) {
            for a in feasible_algs
                .iter()
                .copied()
                .chain(std::iter::once(AlgorithmId::Ip))
            {
                if let Some(v) = frame_value(a) {
                    if lp < v - chain_tol(v) {
                        result.violations += 1;
                    }
                    assert!(
                        lp >= v - chain_tol(v),
                        "bound chain: LP {lp} < {} {v} (drop {drop_index}, frame {t})",
                        a.name()
                    );
                }
            }
        }
        if result.ip_proven[t] {
            if let Some(ip) = frame_value(AlgorithmId::Ip) {
                for a in feasible_algs {
                    if let Some(v) = frame_value(a) {
                        if ip < v - chain_tol(v) {
                            result.violations += 1;
                        }
                        assert!(
                            ip >= v - chain_tol(v),
                            "bound chain: IP {ip} < {} {v} (drop {drop_index}, frame {t})",
                            a.name()
                        );
                    }
                }
            }
        }
        if let (Some(h1), Some(h1ns)) = (
            frame_value(AlgorithmId::Heur1),
            frame_value(AlgorithmId::Heur1NoSwap),
        ) {
            if h1 < h1ns - chain_tol(h1ns) {
                result.violations += 1;
            }
            assert!(
                h1 >= h1ns - chain_tol(h1ns),
                "swap must not hurt: {h1} < {h1ns} (drop {drop_index}, frame {t})"
            );
        }
    }
    Ok(result)
}

/// Aggregated scenario statistics.
#[derive(Debug, Clone)]
pub struct ScenarioStats {
    pub subchannels: usize,
    pub cbr_users: usize,
    pub be_users: usize,
    pub power_ratio: f64,
    pub seed: u64,
    pub drops_executed: usize,
    pub frames_total: usize,
    pub converged: bool,
    /// Mean of drop means per algorithm.
    pub means: BTreeMap<AlgorithmId, f64>,
    /// Sample variance of drop means per algorithm.
    pub variances: BTreeMap<AlgorithmId, f64>,
    /// 100 * HEUR1 / IP over frames where both resolved and IP is proven.
    pub ratio_heur1_ip: Option<f64>,
    pub ratio_heur2_ip: Option<f64>,
    pub ratio_ip_lp: Option<f64>,
    /// 100 * (HEUR1 - HEUR1-noswap) / HEUR1-noswap over shared frames.
    pub swap_gain_pct: Option<f64>,
    pub outages: BTreeMap<AlgorithmId, usize>,
    pub ip_unresolved: usize,
}

fn drop_means(drops: &[DropResult], alg: AlgorithmId) -> Vec<f64> {
    drops.iter().filter_map(|d| d.mean(alg)).collect()
}

fn mean_and_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var))
}

fn converged(cfg: &ScenarioConfig, drops: &[DropResult]) -> bool {
    if drops.len() < cfg.min_drops {
        return false;
    }
    cfg.algorithms.iter().all(|&alg| {
        let means = drop_means(drops, alg);
        if means.len() < 2 {
            return false;
        }
        let (mean, var) = mean_and_variance(&means).expect("nonempty");
        let se = (var / means.len() as f64).sqrt();
        if mean == 0.0 {
            se == 0.0
        } else {
            se / mean.abs() <= cfg.sigma_norm
        }
    })
}

/// Ratio (percent) of summed frame values of `a` over `b` across frames
/// where both produced a value; for `b = Ip` only frames with a proven
/// optimum count.
fn pairwise_ratio(drops: &[DropResult], a: AlgorithmId, b: AlgorithmId) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut any = false;
    for d in drops {
        let (Some(va), Some(vb)) = (d.values.get(&a), d.values.get(&b)) else {
            return None;
        };
        for t in 0..d.frames {
            if (a == AlgorithmId::Ip || b == AlgorithmId::Ip) && !d.ip_proven[t] {
                continue;
            }
            if let (Some(x), Some(y)) = (va[t], vb[t]) {
                num += x;
                den += y;
                any = true;
            }
        }
    }
    (any && den != 0.0).then(|| 100.0 * num / den)
}

/// Number of drops launched per convergence check; fixed so the executed
/// drop count is machine-independent.
const DROP_BATCH: usize = 8;

/// Runs drops (in parallel batches, deterministically seeded by index) until
/// the convergence rule fires or `max_drops` is reached.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioStats, HarnessError> {
    cfg.validate()?;
    let mut drops: Vec<DropResult> = Vec::new();
    let mut target = cfg.min_drops.min(cfg.max_drops);
    loop {
        let batch: Vec<DropResult> = (drops.len()..target)
            .into_par_iter()
            .map(|i| run_drop(cfg, i))
            .collect::<Result<_, _>>()?;
        drops.extend(batch);
        if converged(cfg, &drops) || drops.len() >= cfg.max_drops {
            break;
        }
        target = (drops.len() + DROP_BATCH).min(cfg.max_drops);
    }

    let mut means = BTreeMap::new();
    let mut variances = BTreeMap::new();
    let mut outages = BTreeMap::new();
    for &alg in &cfg.algorithms {
        if let Some((m, v)) = mean_and_variance(&drop_means(&drops, alg)) {
            means.insert(alg, m);
            variances.insert(alg, v);
        }
        outages.insert(
            alg,
            drops.iter().map(|d| d.outages.get(&alg).copied().unwrap_or(0)).sum(),
        );
    }
    let stats = ScenarioStats {
        subchannels: cfg.subchannels,
        cbr_users: cfg.cbr_users,
        be_users: cfg.be_users,
        power_ratio: cfg.power_ratio,
        seed: cfg.seed,
        drops_executed: drops.len(),
        frames_total: drops.iter().map(|d| d.frames).sum(),
        converged: converged(cfg, &drops),
        means,
        variances,
        ratio_heur1_ip: pairwise_ratio(&drops, AlgorithmId::Heur1, AlgorithmId::Ip),
        ratio_heur2_ip: pairwise_ratio(&drops, AlgorithmId::Heur2, AlgorithmId::Ip),
        ratio_ip_lp: pairwise_ratio(&drops, AlgorithmId::Ip, AlgorithmId::Lp),
        swap_gain_pct: pairwise_ratio(&drops, AlgorithmId::Heur1, AlgorithmId::Heur1NoSwap)
            .map(|r| r - 100.0),
        outages,
        ip_unresolved: drops.iter().map(|d| d.ip_unresolved).sum(),
    };
    Ok(stats)
}
