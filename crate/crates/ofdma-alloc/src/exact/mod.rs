//! Exact optimum and upper bound for the allocation problem.
//!
//! [`solve_lp`] relaxes the binary ownership variables to `[0, 1]` (shared
//! subchannels) and maximizes the CBR-credit objective with an in-repo dense
//! simplex, yielding a valid upper bound. [`solve_ilp`] wraps it in a
//! best-bound-first branch-and-bound that fixes a whole subchannel's owner
//! per branching step, warm-starts its incumbent from the first heuristic,
//! dives along the relaxation for an early integral point and fixes
//! variables through root reduced costs. [`exhaustive_oracle`] enumerates
//! every owner vector of a tiny instance as an independent reference.
//!
//! Two exact reductions keep the tree small. Only CBR users and the
//! best-rate best-effort user of a subchannel can own it in some optimal
//! solution: handing a subchannel to a weaker best-effort user never loosens
//! a constraint and never raises the objective. And an owner assignment
//! whose root reduced cost already caps the objective at the incumbent
//! cannot appear in an improving solution. Pruning concedes improvements of
//! at most 1e-9 bits, so "exact" results are exact to that granularity;
//! candidate values are always scored through
//! [`evaluate`](crate::problem::evaluate), never read off LP objectives.

mod cover;
mod simplex;

use cover::{min_cost_cover, CoverItem};
use crate::heuristics::{heur1, heur2, release_redundant, swap_pass, Heur1Options};
use crate::mat::Matrix;
use crate::problem::{evaluate, Allocation, Instance};
use simplex::{LpProblem, Relation, SimplexError};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("simplex failed to converge ({0})")]
    Numerical(&'static str),
    #[error("instance too large for exhaustive search: {combos:.3e} owner vectors (limit {limit:.1e})")]
    TooLarge { combos: f64, limit: f64 },
}

fn map_simplex_err(e: SimplexError) -> ExactError {
    match e {
        SimplexError::Unbounded => ExactError::Numerical("unbounded relaxation"),
        SimplexError::IterationLimit => ExactError::Numerical("iteration limit"),
        SimplexError::Infeasible => unreachable!("infeasibility handled by callers"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Solution of the continuous relaxation. `shares[(n,k)]` is the fraction of
/// subchannel `n` owned by user `k`; rows sum to one and CBR rows meet their
/// targets when the status is `Optimal`. The value is `NaN` when infeasible.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub shares: Matrix,
}

/// Relaxed problem: maximize the CBR credit plus fractional best-effort
/// rates subject to unit ownership per subchannel and the CBR rate rows.
pub fn solve_lp(instance: &Instance) -> Result<LpSolution, ExactError> {
    let fixed = vec![None; instance.subchannels()];
    match lp_over_free(instance, &fixed, None, None, None)? {
        None => Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NAN,
            shares: Matrix::zeros(instance.subchannels(), instance.users()),
        }),
        Some(sol) => Ok(LpSolution {
            status: LpStatus::Optimal,
            value: sol.value,
            shares: sol.shares,
        }),
    }
}

struct PartialLp {
    value: f64,
    shares: Matrix,
    /// Reduced cost of forcing full ownership, per (subchannel, user);
    /// meaningful for the free rows and candidate columns of this solve.
    reduced: Matrix,
}

/// LP relaxation of the instance with some subchannel owners already fixed,
/// optionally restricted to candidate owner columns per subchannel. Returns
/// `None` when infeasible. The value includes the full CBR credit and the
/// rates of subchannels fixed on best-effort users.
///
/// With `with_cuts` set, one cardinality cut per undersatisfied CBR user is
/// added: the user must own at least as many free subchannels as its largest
/// free rates need to reach the residual target. The cuts hold for every
/// integer point, so the tightened value still bounds the node's integer
/// optimum; the plain relaxation keeps `with_cuts` off.
/// Inclusive bounds on how many subchannels CBR users own, globally and
/// per user. Both aggregates are integral in every integer point, which
/// makes them branching disjunctions that move the relaxation by whole
/// subchannels at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CountBounds {
    total: (usize, usize),
    per_user: Vec<(usize, usize)>,
}

impl CountBounds {
    fn root(instance: &Instance) -> Self {
        let n = instance.subchannels();
        Self {
            total: (0, n),
            per_user: vec![(0, n); instance.cbr_count()],
        }
    }
}

fn lp_over_free(
    instance: &Instance,
    fixed: &[Option<usize>],
    columns: Option<&[Vec<usize>]>,
    cut_rounds: Option<usize>,
    counts: Option<&CountBounds>,
) -> Result<Option<PartialLp>, ExactError> {
    let with_cuts = cut_rounds.is_some();
    let users = instance.users();
    let subs = instance.subchannels();
    let free: Vec<usize> = (0..subs).filter(|&n| fixed[n].is_none()).collect();

    let mut fixed_be_value = 0.0;
    let mut fixed_delivered = vec![0.0; instance.cbr_count()];
    for (n, owner) in fixed.iter().enumerate() {
        if let Some(k) = *owner {
            if instance.is_cbr(k) {
                fixed_delivered[k] += instance.rate(n, k);
            } else {
                fixed_be_value += instance.rate(n, k);
            }
        }
    }
    let credit: f64 = instance.targets().iter().sum();

    // residual CBR demand to be covered by free subchannels
    let mut residual: Vec<(usize, f64)> = Vec::new();
    for k in instance.cbr_users() {
        let need = instance.target(k) - fixed_delivered[k];
        if need > 0.0 {
            residual.push((k, need));
        }
    }

    if free.is_empty() {
        if !residual.is_empty() {
            return Ok(None);
        }
        let mut shares = Matrix::zeros(subs, users);
        for (n, owner) in fixed.iter().enumerate() {
            shares.set(n, owner.expect("no free subchannels"), 1.0);
        }
        return Ok(Some(PartialLp {
            value: credit + fixed_be_value,
            shares,
            reduced: Matrix::zeros(subs, users),
        }));
    }

    // variable layout: candidate owners of each free subchannel in order
    let all_users: Vec<usize> = (0..users).collect();
    let cands = |n: usize| -> &[usize] {
        match columns {
            Some(c) => &c[n],
            None => &all_users,
        }
    };
    let mut offset = Vec::with_capacity(free.len() + 1);
    offset.push(0usize);
    for &n in &free {
        offset.push(offset.last().unwrap() + cands(n).len());
    }
    let num_vars = *offset.last().unwrap();
    if num_vars == 0 {
        return Ok(None);
    }

    let mut objective = vec![0.0; num_vars];
    for (i, &n) in free.iter().enumerate() {
        for (j, &k) in cands(n).iter().enumerate() {
            if !instance.is_cbr(k) {
                objective[offset[i] + j] = instance.rate(n, k);
            }
        }
    }
    let mut rows = Vec::with_capacity(free.len() + 2 * residual.len());
    for (i, &n) in free.iter().enumerate() {
        let mut coef = vec![0.0; num_vars];
        for j in 0..cands(n).len() {
            coef[offset[i] + j] = 1.0;
        }
        rows.push((coef, Relation::Eq, 1.0));
    }
    for &(k, need) in &residual {
        let mut coef = vec![0.0; num_vars];
        for (i, &n) in free.iter().enumerate() {
            if let Some(j) = cands(n).iter().position(|&c| c == k) {
                coef[offset[i] + j] = instance.rate(n, k);
            }
        }
        rows.push((coef, Relation::Ge, need));
    }
    if let Some(bounds) = counts {
        let fixed_cbr_total = fixed
            .iter()
            .flatten()
            .filter(|&&k| instance.is_cbr(k))
            .count();
        let mut groups: Vec<(Option<usize>, (usize, usize), usize)> = Vec::new();
        groups.push((None, bounds.total, fixed_cbr_total));
        for k in instance.cbr_users() {
            let fixed_k = fixed.iter().flatten().filter(|&&o| o == k).count();
            groups.push((Some(k), bounds.per_user[k], fixed_k));
        }
        for (user, (lo, hi), already) in groups {
            if hi < already {
                return Ok(None);
            }
            let lo_free = lo.saturating_sub(already);
            let hi_free = hi - already;
            let members = |k: usize| match user {
                None => instance.is_cbr(k),
                Some(u) => k == u,
            };
            let build = || {
                let mut coef = vec![0.0; num_vars];
                for (i, &n) in free.iter().enumerate() {
                    for (j, &k) in cands(n).iter().enumerate() {
                        if members(k) {
                            coef[offset[i] + j] = 1.0;
                        }
                    }
                }
                coef
            };
            if lo_free > 0 {
                rows.push((build(), Relation::Ge, lo_free as f64));
            }
            if hi_free < free.len() {
                rows.push((build(), Relation::Le, hi_free as f64));
            }
        }
    }
    if with_cuts {
        let be_rate: Vec<f64> = free
            .iter()
            .map(|&n| instance.best_be_user(n).map_or(0.0, |k| instance.rate(n, k)))
            .collect();
        for &(k, need) in &residual {
            // cardinality: the user needs at least as many free subchannels
            // as its largest rates take to reach the residual demand
            let mut rates: Vec<f64> = free
                .iter()
                .filter(|&&n| cands(n).contains(&k))
                .map(|&n| instance.rate(n, k))
                .collect();
            rates.sort_by(|a, b| b.total_cmp(a));
            let mut acc = 0.0;
            let mut min_count = 0usize;
            for r in &rates {
                if acc >= need {
                    break;
                }
                acc += r;
                min_count += 1;
            }
            if acc < need {
                return Ok(None); // even all free subchannels fall short
            }
            if min_count > 1 {
                let mut coef = vec![0.0; num_vars];
                for (i, &n) in free.iter().enumerate() {
                    if let Some(j) = cands(n).iter().position(|&c| c == k) {
                        coef[offset[i] + j] = 1.0;
                    }
                }
                rows.push((coef, Relation::Ge, min_count as f64));
            }
            // forfeit floor: every integer cover of the residual demand
            // gives up at least the min-cost cover's best-effort value
            let items: Vec<CoverItem> = free
                .iter()
                .enumerate()
                .filter(|(_, &n)| cands(n).contains(&k))
                .map(|(i, &n)| CoverItem {
                    cost: be_rate[i],
                    weight: instance.rate(n, k),
                })
                .collect();
            let Some(forfeit) = min_cost_cover(&items, need) else {
                return Ok(None);
            };
            if forfeit > 0.0 {
                let mut coef = vec![0.0; num_vars];
                for (i, &n) in free.iter().enumerate() {
                    if let Some(j) = cands(n).iter().position(|&c| c == k) {
                        coef[offset[i] + j] = be_rate[i];
                    }
                }
                rows.push((coef, Relation::Ge, forfeit));
            }
        }
    }

    let lp = LpProblem {
        num_vars,
        objective,
        rows,
    };
    let solved = match cut_rounds {
        Some(rounds) => simplex::solve_with_gomory(&lp, rounds),
        None => simplex::solve(&lp),
    };
    match solved {
        Err(SimplexError::Infeasible) => Ok(None),
        Err(e) => Err(map_simplex_err(e)),
        Ok(res) => {
            let mut shares = Matrix::zeros(subs, users);
            let mut reduced = Matrix::zeros(subs, users);
            for (n, owner) in fixed.iter().enumerate() {
                if let Some(k) = *owner {
                    shares.set(n, k, 1.0);
                }
            }
            for (i, &n) in free.iter().enumerate() {
                for (j, &k) in cands(n).iter().enumerate() {
                    shares.set(n, k, res.x[offset[i] + j]);
                    reduced.set(n, k, res.reduced[offset[i] + j]);
                }
            }
            Ok(Some(PartialLp {
                value: credit + fixed_be_value + res.value,
                shares,
                reduced,
            }))
        }
    }
}

const INTEGRALITY_TOL: f64 = 1e-6;

/// Rounds of Gomory mixed-integer cuts on the root relaxation and on the
/// per-node relaxations.
const ROOT_GOMORY_ROUNDS: usize = 8;
const NODE_GOMORY_ROUNDS: usize = 2;

/// Subchannel carrying the most fractional ownership share among free rows;
/// `None` when integral.
fn most_fractional(shares: &Matrix, fixed: &[Option<usize>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for n in 0..shares.rows() {
        if fixed[n].is_some() {
            continue;
        }
        for k in 0..shares.cols() {
            let v = shares.get(n, k);
            let frac = v.min(1.0 - v);
            if frac > INTEGRALITY_TOL && best.map_or(true, |(_, bf)| frac > bf) {
                best = Some((n, frac));
            }
        }
    }
    best.map(|(n, _)| n)
}

fn rounded_allocation(shares: &Matrix) -> Allocation {
    let mut alloc = Allocation::unassigned(shares.rows());
    for n in 0..shares.rows() {
        let mut owner = 0;
        let mut best = f64::NEG_INFINITY;
        for k in 0..shares.cols() {
            if shares.get(n, k) > best {
                best = shares.get(n, k);
                owner = k;
            }
        }
        alloc.assign(n, owner);
    }
    alloc
}

/// Branch-and-bound report. `best` is absent when the problem is proven
/// infeasible (with `proven_optimal` set) or when a time limit expired
/// before any feasible point was found.
#[derive(Debug, Clone)]
pub struct BnbReport {
    pub best: Option<(Allocation, f64)>,
    /// Number of LP relaxations solved (root, dive steps and children).
    pub node_count: u64,
    pub proven_optimal: bool,
    pub time_limit_hit: bool,
}

impl BnbReport {
    pub fn value(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, v)| *v)
    }

    pub fn proven_infeasible(&self) -> bool {
        self.best.is_none() && self.proven_optimal
    }
}

/// Per-subchannel candidate-owner sets encoded as bit masks over the
/// positions of `base_columns[n]`. Nodes carry these masks and refine them
/// with their own reduced costs, so pruning compounds down the tree.
type CandMask = Vec<u32>;

struct Node {
    bound: f64,
    id: u64,
    depth: u32,
    fixed: Vec<Option<usize>>,
    mask: CandMask,
    counts: CountBounds,
    /// Row disjunction: fix the owner of this subchannel, one child per
    /// surviving candidate. Carries the node's reduced costs (for skipping
    /// children provably below the incumbent without an LP solve) and the
    /// relaxation shares (for child ordering).
    row_branch: (usize, Vec<f64>, Vec<f64>),
    /// Optional aggregate disjunction: CBR-owned count at most `split`
    /// versus at least `split + 1`, globally (`user` empty) or for one
    /// user. Tried first; kept only when both sides move the bound.
    count_branch: Option<(Option<usize>, usize)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: higher bound first; bound ties plunge depth-first
        // toward the newest node, which matters on constant-bound
        // feasibility plateaus (no best-effort users)
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.id.cmp(&other.id))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const PRUNE_EPS: f64 = 1e-9;

struct Search<'a> {
    instance: &'a Instance,
    gap_tol: f64,
    /// Candidate owners per subchannel: CBR users plus the best BE user.
    base_columns: Vec<Vec<usize>>,
    /// Best-effort rate forfeited when a subchannel leaves the BE pool.
    be_rate: Vec<f64>,
    incumbent: Option<(Allocation, f64)>,
    heap: BinaryHeap<Node>,
    node_count: u64,
    next_id: u64,
}

impl<'a> Search<'a> {
    /// Bound below which a node (or a forced assignment) cannot improve.
    fn cut(&self) -> f64 {
        match &self.incumbent {
            None => f64::NEG_INFINITY,
            Some((_, v)) => {
                if self.gap_tol > 0.0 {
                    v * (1.0 + self.gap_tol)
                } else {
                    v + PRUNE_EPS
                }
            }
        }
    }

    fn full_mask(&self) -> CandMask {
        self.base_columns
            .iter()
            .map(|c| ((1u64 << c.len()) - 1) as u32)
            .collect()
    }

    /// Owner lists described by a mask, for handing to the LP builder.
    fn columns_of(&self, mask: &CandMask) -> Vec<Vec<usize>> {
        self.base_columns
            .iter()
            .zip(mask)
            .map(|(cands, &bits)| {
                cands
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| bits & (1 << j) != 0)
                    .map(|(_, &k)| k)
                    .collect()
            })
            .collect()
    }

    /// Drops candidates that the solved relaxation proves non-improving:
    /// forcing ownership (n, k) caps the subtree at `lp.value - rc(n, k)`.
    /// Returns `None` when some free subchannel loses every candidate, in
    /// which case the subtree holds no improving completion at all.
    fn refine_mask(
        &self,
        mask: &CandMask,
        fixed: &[Option<usize>],
        lp: &PartialLp,
    ) -> Option<CandMask> {
        let cut = self.cut();
        let mut out = mask.clone();
        for (n, bits) in out.iter_mut().enumerate() {
            if fixed[n].is_some() {
                continue;
            }
            for (j, &k) in self.base_columns[n].iter().enumerate() {
                if *bits & (1 << j) != 0 && lp.value - lp.reduced.get(n, k) <= cut {
                    *bits &= !(1 << j);
                }
            }
            if *bits == 0 {
                return None;
            }
        }
        Some(out)
    }

    /// Disjointness-relaxed combinatorial bound of a node: the full CBR
    /// credit plus every free subchannel kept at its best-effort rate,
    /// minus an exact min-cost cover of each user's residual demand (cost
    /// of a subchannel = its forfeited best-effort rate). Whole-subchannel
    /// integrality is kept, only the exclusivity between CBR users is
    /// relaxed, so this often undercuts the LP value on degenerate
    /// instances. `None` means some residual demand cannot be covered at
    /// all within the mask, i.e. the subtree holds no improving completion.
    fn cover_bound(&self, fixed: &[Option<usize>], mask: &CandMask) -> Option<f64> {
        let instance = self.instance;
        let mut value: f64 = instance.targets().iter().sum();
        let mut fixed_delivered = vec![0.0; instance.cbr_count()];
        for (n, owner) in fixed.iter().enumerate() {
            match *owner {
                Some(k) if instance.is_cbr(k) => fixed_delivered[k] += instance.rate(n, k),
                Some(k) => value += instance.rate(n, k),
                None => value += self.be_rate[n],
            }
        }
        for k in instance.cbr_users() {
            let need = instance.target(k) - fixed_delivered[k];
            if need <= 0.0 {
                continue;
            }
            // CBR user k sits at candidate position k of every subchannel
            let items: Vec<CoverItem> = fixed
                .iter()
                .enumerate()
                .filter(|(n, owner)| owner.is_none() && mask[*n] & (1 << k) != 0)
                .map(|(n, _)| CoverItem {
                    cost: self.be_rate[n],
                    weight: instance.rate(n, k),
                })
                .collect();
            value -= min_cost_cover(&items, need)?;
        }
        Some(value)
    }

    /// Offers an integral point; feasible points are polished with the
    /// interchange and release operators (both objective-monotone) before
    /// the incumbent comparison.
    fn offer_candidate(&mut self, alloc: Allocation) {
        let ev = evaluate(self.instance, &alloc).expect("valid candidate");
        if !ev.feasible {
            return;
        }
        let mut polished = alloc;
        for _ in 0..4 {
            let next = swap_pass(self.instance, &polished);
            if next == polished {
                break;
            }
            polished = next;
        }
        polished = release_redundant(self.instance, &polished);
        let ev = evaluate(self.instance, &polished).expect("polished candidate");
        debug_assert!(ev.feasible);
        if self
            .incumbent
            .as_ref()
            .map_or(true, |(_, v)| ev.objective > *v)
        {
            self.incumbent = Some((polished, ev.objective));
        }
    }

    /// Aggregate-count branching candidate: the global CBR-owned count, or
    /// a single user's count, whichever is usefully fractional.
    fn fractional_count(
        &self,
        fixed: &[Option<usize>],
        lp: &PartialLp,
    ) -> Option<(Option<usize>, usize)> {
        const BAND: f64 = 1e-4;
        let mut totals = vec![0.0; self.instance.cbr_count()];
        for k in self.instance.cbr_users() {
            let mut c = fixed.iter().flatten().filter(|&&o| o == k).count() as f64;
            for n in 0..self.instance.subchannels() {
                if fixed[n].is_none() {
                    c += lp.shares.get(n, k);
                }
            }
            totals[k] = c;
        }
        let global: f64 = totals.iter().sum();
        let frac = global - global.floor();
        if (BAND..=1.0 - BAND).contains(&frac) {
            return Some((None, global.floor() as usize));
        }
        for (k, &c) in totals.iter().enumerate() {
            let frac = c - c.floor();
            if (BAND..=1.0 - BAND).contains(&frac) {
                return Some((Some(k), c.floor() as usize));
            }
        }
        None
    }

    /// Handles a solved relaxation: integral points become candidates,
    /// fractional ones branching nodes with reduced-cost-refined masks. An
    /// integral point rejected by the scorer at the target boundary keeps
    /// branching so no completion is lost.
    fn offer_lp(
        &mut self,
        fixed: Vec<Option<usize>>,
        mask: &CandMask,
        counts: &CountBounds,
        depth: u32,
        lp: PartialLp,
        bound: f64,
    ) {
        let row_of = |n: usize| -> (usize, Vec<f64>, Vec<f64>) {
            (
                n,
                self.base_columns[n]
                    .iter()
                    .map(|&k| lp.reduced.get(n, k))
                    .collect(),
                self.base_columns[n]
                    .iter()
                    .map(|&k| lp.shares.get(n, k))
                    .collect(),
            )
        };
        let (row_branch, count_branch) = match most_fractional(&lp.shares, &fixed) {
            Some(n) => (row_of(n), self.fractional_count(&fixed, &lp)),
            None => {
                let alloc = rounded_allocation(&lp.shares);
                let ev = evaluate(self.instance, &alloc).expect("valid rounding");
                if ev.feasible {
                    self.offer_candidate(alloc);
                    return;
                }
                match (0..fixed.len()).find(|&n| fixed[n].is_none()) {
                    Some(n) => (row_of(n), None),
                    None => return,
                }
            }
        };
        let Some(refined) = self.refine_mask(mask, &fixed, &lp) else {
            return;
        };
        self.heap.push(Node {
            bound,
            id: self.next_id,
            depth,
            fixed,
            mask: refined,
            counts: counts.clone(),
            row_branch,
            count_branch,
        });
        self.next_id += 1;
    }

    /// Plunges from a partial assignment along the relaxation, fixing each
    /// branching subchannel to its highest-share candidate (falling back to
    /// the next candidates on infeasibility), until an integral point
    /// appears.
    fn dive(
        &mut self,
        start_fixed: &[Option<usize>],
        start_shares: &Matrix,
        mask: &CandMask,
    ) -> Result<(), ExactError> {
        let columns = self.columns_of(mask);
        let mut fixed: Vec<Option<usize>> = start_fixed.to_vec();
        let mut shares = start_shares.clone();
        loop {
            let Some(n) = most_fractional(&shares, &fixed) else {
                let alloc = rounded_allocation(&shares);
                if std::env::var_os("OFDMA_BNB_DEBUG").is_some() {
                    let ev = evaluate(self.instance, &alloc).expect("debug");
                    eprintln!("bnb debug: dive leaf value {} feasible {}", ev.objective, ev.feasible);
                }
                self.offer_candidate(alloc);
                return Ok(());
            };
            let mut order = columns[n].clone();
            order.sort_by(|&a, &b| {
                shares
                    .get(n, b)
                    .total_cmp(&shares.get(n, a))
                    .then(a.cmp(&b))
            });
            let mut advanced = false;
            for k in order {
                fixed[n] = Some(k);
                self.node_count += 1;
                if let Some(lp) = lp_over_free(self.instance, &fixed, Some(&columns), Some(NODE_GOMORY_ROUNDS), None)? {
                    shares = lp.shares;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                if std::env::var_os("OFDMA_BNB_DEBUG").is_some() {
                    eprintln!("bnb debug: dive aborted at depth {}", fixed.iter().filter(|f| f.is_some()).count());
                }
                return Ok(());
            }
        }
    }
}

/// Exact solver for the binary ownership program.
///
/// With `gap_tol = 0` and no time limit the returned value is the optimum
/// (to the 1e-9 pruning granularity); `gap_tol > 0` allows pruning once the
/// incumbent is within the relative gap. On timeout the best incumbent so
/// far is returned with `time_limit_hit` set.
pub fn solve_ilp(
    instance: &Instance,
    time_limit: Option<Duration>,
    gap_tol: f64,
) -> Result<BnbReport, ExactError> {
    assert!(gap_tol >= 0.0, "gap tolerance must be nonnegative");
    let start = Instant::now();
    let subs = instance.subchannels();

    let warm_starts: Vec<Allocation> = [
        heur1(instance, &Heur1Options::default()).ok(),
        heur2(instance).ok(),
    ]
    .into_iter()
    .flatten()
    .collect();

    let base_columns: Vec<Vec<usize>> = (0..subs)
        .map(|n| {
            let mut owners: Vec<usize> = instance.cbr_users().collect();
            if let Some(be) = instance.best_be_user(n) {
                owners.push(be);
            }
            owners
        })
        .collect();
    debug_assert!(base_columns.iter().all(|c| c.len() <= 32));

    let be_rate: Vec<f64> = (0..subs)
        .map(|n| {
            instance
                .best_be_user(n)
                .map_or(0.0, |k| instance.rate(n, k))
        })
        .collect();
    let mut search = Search {
        instance,
        gap_tol,
        base_columns,
        be_rate,
        incumbent: None,
        heap: BinaryHeap::new(),
        node_count: 1,
        next_id: 0,
    };
    for alloc in warm_starts {
        search.offer_candidate(alloc);
    }

    let root_fixed = vec![None; subs];
    let root_mask = search.full_mask();
    let root_columns = search.columns_of(&root_mask);
    let root_counts = CountBounds::root(instance);
    let Some(root) = lp_over_free(instance, &root_fixed, Some(&root_columns), Some(ROOT_GOMORY_ROUNDS), Some(&root_counts))? else {
        debug_assert!(
            search.incumbent.is_none(),
            "feasible incumbent with infeasible relaxation"
        );
        return Ok(BnbReport {
            best: None,
            node_count: search.node_count,
            proven_optimal: true,
            time_limit_hit: false,
        });
    };

    if std::env::var_os("OFDMA_BNB_DEBUG").is_some() {
        eprintln!(
            "bnb debug: root lp {:.6}, cover {:?}, heur1 incumbent {:?}",
            root.value,
            search.cover_bound(&root_fixed, &root_mask),
            search.incumbent.as_ref().map(|(_, v)| *v)
        );
    }
    if most_fractional(&root.shares, &root_fixed).is_some() {
        // LP-guided plunge for a strong early incumbent, using the
        // root-refined candidate sets
        if let Some(mask) = search.refine_mask(&root_mask, &root_fixed, &root) {
            search.dive(&root_fixed, &root.shares, &mask)?;
        }
    }
    if std::env::var_os("OFDMA_BNB_DEBUG").is_some() {
        eprintln!(
            "bnb debug: post-dive incumbent {:?}",
            search.incumbent.as_ref().map(|(_, v)| *v)
        );
    }
    if let Some(kb) = search.cover_bound(&root_fixed, &root_mask) {
        let bound = root.value.min(kb);
        if bound > search.cut() {
            search.offer_lp(root_fixed, &root_mask, &root_counts, 0, root, bound);
        }
    }

    let mut time_limit_hit = false;
    let mut pops = 0u64;
    while let Some(node) = search.heap.pop() {
        if node.bound <= search.cut() {
            break; // best-bound order: nothing left can beat the incumbent
        }
        if let Some(limit) = time_limit {
            if start.elapsed() >= limit {
                time_limit_hit = true;
                break;
            }
        }
        pops += 1;
        if std::env::var_os("OFDMA_BNB_DEBUG").is_some() && pops % 20_000 == 0 {
            eprintln!(
                "bnb debug: pops {pops} bound {:.6} cut {:.6} heap {}",
                node.bound,
                search.cut(),
                search.heap.len(),
            );
        }
        let columns = search.columns_of(&node.mask);

        // Aggregate disjunction first: accepted only when every feasible
        // side moves the bound, so degenerate splits fall through to row
        // branching instead of cascading.
        if let Some((user, split)) = node.count_branch {
            let progress_eps = 1e-7 * node.bound.abs().max(1.0);
            let mut children = Vec::with_capacity(2);
            let mut separates = true;
            for upper_side in [true, false] {
                let mut counts = node.counts.clone();
                let bounds = match user {
                    None => &mut counts.total,
                    Some(k) => &mut counts.per_user[k],
                };
                if upper_side {
                    bounds.1 = bounds.1.min(split);
                } else {
                    bounds.0 = bounds.0.max(split + 1);
                }
                if bounds.0 > bounds.1 {
                    continue;
                }
                search.node_count += 1;
                match lp_over_free(
                    instance,
                    &node.fixed,
                    Some(&columns),
                    Some(NODE_GOMORY_ROUNDS),
                    Some(&counts),
                )? {
                    None => {}
                    Some(lp) => {
                        if lp.value > node.bound - progress_eps {
                            separates = false;
                        }
                        children.push((counts, lp));
                    }
                }
            }
            // a pure covering instance has a flat bound landscape; a count
            // split earns its keep there exactly when it refutes one side
            if instance.be_count() == 0 {
                separates = children.len() < 2;
            }
            if separates {
                for (counts, lp) in children {
                    let bound = lp.value.min(node.bound);
                    if bound > search.cut() {
                        search.offer_lp(
                            node.fixed.clone(),
                            &node.mask,
                            &counts,
                            node.depth + 1,
                            lp,
                            bound,
                        );
                    }
                }
                continue;
            }
        }

        let (sub, rc, shares) = &node.row_branch;
        let sub = *sub;
        // ascending share order: the relaxation's preferred owner is pushed
        // last and surfaces first on bound ties
        let mut order: Vec<usize> = (0..search.base_columns[sub].len()).collect();
        order.sort_by(|&a, &b| shares[a].total_cmp(&shares[b]).then(b.cmp(&a)));
        let cands = search.base_columns[sub].clone();
        for j in order {
            let owner = cands[j];
            if node.mask[sub] & (1 << j) == 0 {
                continue;
            }
            // sensitivity skip: the parent relaxation already caps this child
            if node.bound - rc[j] <= search.cut() {
                continue;
            }
            let mut fixed = node.fixed.clone();
            fixed[sub] = Some(owner);
            // combinatorial screen before paying for an LP solve
            let Some(kb) = search.cover_bound(&fixed, &node.mask) else {
                continue;
            };
            if kb <= search.cut() {
                continue;
            }
            search.node_count += 1;
            if let Some(lp) = lp_over_free(
                instance,
                &fixed,
                Some(&columns),
                Some(NODE_GOMORY_ROUNDS),
                Some(&node.counts),
            )? {
                // node bounds inherit the parent's: each cut set is valid on
                // its own, but cut quality varies per node, so monotonicity
                // must be enforced for best-bound order to make progress
                let bound = lp.value.min(kb).min(node.bound);
                if bound > search.cut() {
                    // plunge occasionally to pull the incumbent up toward
                    // the plateau the frontier is wading through
                    if pops % 256 == 0 {
                        search.dive(&fixed, &lp.shares, &node.mask)?;
                    }
                    search.offer_lp(fixed, &node.mask, &node.counts, node.depth + 1, lp, bound);
                }
            }
        }
    }

    Ok(BnbReport {
        best: search.incumbent,
        node_count: search.node_count,
        proven_optimal: !time_limit_hit && gap_tol == 0.0,
        time_limit_hit,
    })
}

/// Result of the exhaustive enumeration. `best` is `None` when no owner
/// vector satisfies the CBR targets.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub best: Option<(Allocation, f64)>,
    pub evaluated: u64,
}

/// Size guard for [`exhaustive_oracle`].
pub const ORACLE_COMBO_LIMIT: f64 = 1e7;

/// Enumerates all `K^N` owner vectors and returns the best feasible one.
/// Candidate improvements are confirmed through `evaluate`, so the reported
/// value is bit-identical to scoring the returned allocation.
pub fn exhaustive_oracle(instance: &Instance) -> Result<OracleReport, ExactError> {
    let users = instance.users();
    let subs = instance.subchannels();
    let combos = (users as f64).powi(subs as i32);
    if combos > ORACLE_COMBO_LIMIT {
        return Err(ExactError::TooLarge {
            combos,
            limit: ORACLE_COMBO_LIMIT,
        });
    }

    let mut owner = vec![0usize; subs];
    // running delivered rate per user, updated one digit at a time
    let mut delivered = vec![0.0f64; users];
    for n in 0..subs {
        delivered[0] += instance.rate(n, 0);
    }

    let mut best: Option<(Allocation, f64)> = None;
    let mut evaluated = 0u64;
    loop {
        evaluated += 1;
        let feasible = instance
            .cbr_users()
            .all(|k| delivered[k] >= instance.target(k));
        if feasible {
            let mut objective = 0.0;
            for k in instance.cbr_users() {
                objective += delivered[k].min(instance.target(k));
            }
            for k in instance.be_users() {
                objective += delivered[k];
            }
            if best.as_ref().map_or(true, |(_, v)| objective > *v) {
                let alloc = Allocation::from_owners(owner.iter().map(|&k| Some(k)).collect());
                let ev = evaluate(instance, &alloc).expect("valid enumeration");
                if ev.feasible && best.as_ref().map_or(true, |(_, v)| ev.objective > *v) {
                    best = Some((alloc, ev.objective));
                }
            }
        }
        // odometer step: least-significant digit at the highest subchannel
        // index, so enumeration is lexicographic and ties keep the first hit
        let mut pos = subs;
        loop {
            if pos == 0 {
                return Ok(OracleReport { best, evaluated });
            }
            pos -= 1;
            let k = owner[pos];
            delivered[k] -= instance.rate(pos, k);
            if k + 1 < users {
                owner[pos] = k + 1;
                delivered[k + 1] += instance.rate(pos, k + 1);
                break;
            }
            owner[pos] = 0;
            delivered[0] += instance.rate(pos, 0);
        }
    }
}
