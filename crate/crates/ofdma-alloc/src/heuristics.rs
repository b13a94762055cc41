//! Polynomial-cost allocation heuristics and the semi-random baseline.
//!
//! * [`heur1`] builds a feasible allocation from the interior of the feasible
//!   region: CBR users are served first (worst average user gets its best
//!   remaining subchannel), leftovers go to the best best-effort user, then a
//!   sweep of pairwise subchannel interchanges improves the sum rate and
//!   redundant CBR subchannels are released.
//! * [`heur2`] approaches from the exterior: every subchannel starts at its
//!   globally best user, then subchannels are reallocated toward unsatisfied
//!   CBR users picking the cheapest cell of a reallocation-cost array until
//!   the targets hold.
//! * [`random_baseline`] serves CBR users greedily and scatters the rest
//!   uniformly over the best-effort users.
//!
//! All procedures are deterministic: argmin/argmax ties break toward the
//! lowest subchannel index first, then the lowest user index, and the
//! baseline is seeded. Feasibility checks recompute delivered rates with the
//! same summation order as [`evaluate`](crate::problem::evaluate), so a
//! returned allocation is feasible under the shared scorer bit-for-bit.

use crate::problem::{delivered_per_user, Allocation, Infeasible, Instance};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Options for the first heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Heur1Options {
    /// Run the pairwise interchange step.
    pub enable_swap: bool,
    /// Number of interchange sweeps over the user set.
    pub swap_rounds: usize,
}

impl Default for Heur1Options {
    fn default() -> Self {
        Self {
            enable_swap: true,
            swap_rounds: 1,
        }
    }
}

/// Operation counters for empirical complexity checks. A comparison is one
/// examined candidate in a search/scan or one evaluated interchange or
/// reallocation condition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    pub comparisons: u64,
}

fn delivered_to(instance: &Instance, alloc: &Allocation, user: usize) -> f64 {
    let mut acc = 0.0;
    for n in 0..instance.subchannels() {
        if alloc.owner(n) == Some(user) {
            acc += instance.rate(n, user);
        }
    }
    acc
}

/// Reallocation cost of moving a subchannel with rate `owner_rate` at its
/// current owner to a user seeing `candidate_rate` on it (must be positive):
/// relative sum-rate loss per unit of progress toward feasibility.
pub(crate) fn realloc_cost(owner_rate: f64, candidate_rate: f64) -> f64 {
    debug_assert!(candidate_rate > 0.0);
    (owner_rate - candidate_rate) / candidate_rate
}

/// Evaluates the interchange condition for moving subchannel `n` from user
/// `k` to user `k2` while `n2` moves from `k2` to `k`. Four cases depending
/// on the owners' QoS classes.
fn swap_condition(
    instance: &Instance,
    delivered: &[f64],
    n: usize,
    k: usize,
    n2: usize,
    k2: usize,
) -> bool {
    let r_nk = instance.rate(n, k);
    let r_n2k = instance.rate(n2, k);
    let r_nk2 = instance.rate(n, k2);
    let r_n2k2 = instance.rate(n2, k2);
    match (instance.is_cbr(k), instance.is_cbr(k2)) {
        (true, true) => {
            (r_n2k > r_nk && delivered[k2] + r_nk2 - r_n2k2 >= instance.target(k2))
                || (r_nk2 > r_n2k2 && delivered[k] + r_n2k - r_nk >= instance.target(k))
        }
        (false, false) => r_n2k - r_nk + r_nk2 - r_n2k2 > 0.0,
        (true, false) => r_nk2 > r_n2k2 && delivered[k] + r_n2k - r_nk >= instance.target(k),
        (false, true) => r_n2k > r_nk && delivered[k2] + r_nk2 - r_n2k2 >= instance.target(k2),
    }
}

/// One full interchange sweep. Users are visited in index order; each owned
/// subchannel is compared against every subchannel of every other user in
/// ascending (n, k', n') order and the first satisfied condition fires
/// immediately, affecting later comparisons. After every interchange the two
/// involved users are re-scored from scratch and the interchange is rolled
/// back if a CBR user dropped below target.
fn swap_sweep(
    instance: &Instance,
    alloc: &mut Allocation,
    delivered: &mut [f64],
    ops: &mut u64,
) -> bool {
    let subs = instance.subchannels();
    let users = instance.users();
    let mut changed = false;
    for k in 0..users {
        for n in 0..subs {
            if alloc.owner(n) != Some(k) {
                continue;
            }
            'partner: for k2 in 0..users {
                if k2 == k {
                    continue;
                }
                for n2 in 0..subs {
                    if alloc.owner(n2) != Some(k2) {
                        continue;
                    }
                    *ops += 1;
                    if !swap_condition(instance, delivered, n, k, n2, k2) {
                        continue;
                    }
                    alloc.assign(n, k2);
                    alloc.assign(n2, k);
                    let fresh_k = delivered_to(instance, alloc, k);
                    let fresh_k2 = delivered_to(instance, alloc, k2);
                    let broke_k = instance.is_cbr(k) && fresh_k < instance.target(k);
                    let broke_k2 = instance.is_cbr(k2) && fresh_k2 < instance.target(k2);
                    if broke_k || broke_k2 {
                        alloc.assign(n, k);
                        alloc.assign(n2, k2);
                        continue;
                    }
                    delivered[k] = fresh_k;
                    delivered[k2] = fresh_k2;
                    changed = true;
                    break 'partner;
                }
            }
        }
    }
    changed
}

/// Releases CBR subchannels whose removal keeps the owner at target, handing
/// each to the best-rate best-effort user. No-op without BE users.
fn release_pass(instance: &Instance, alloc: &mut Allocation, ops: &mut u64) {
    if instance.be_count() == 0 {
        return;
    }
    for k in instance.cbr_users() {
        for n in 0..instance.subchannels() {
            if alloc.owner(n) != Some(k) {
                continue;
            }
            alloc.clear(n);
            *ops += 1;
            if delivered_to(instance, alloc, k) >= instance.target(k) {
                let best = instance.best_be_user(n).expect("BE user present");
                *ops += instance.be_count() as u64;
                alloc.assign(n, best);
            } else {
                alloc.assign(n, k);
            }
        }
    }
}

/// Iterative CBR construction: while some CBR user is below target, the
/// unsatisfied user with the lowest mean rate over the remaining pool takes
/// its best pooled subchannel. Fails when the pool empties first.
fn cbr_fill(instance: &Instance, alloc: &mut Allocation, ops: &mut u64) -> Result<(), Infeasible> {
    loop {
        let delivered = delivered_per_user(instance, alloc);
        let unsat: Vec<usize> = instance
            .cbr_users()
            .filter(|&k| delivered[k] < instance.target(k))
            .collect();
        if unsat.is_empty() {
            return Ok(());
        }
        let pool: Vec<usize> = (0..instance.subchannels())
            .filter(|&n| alloc.owner(n).is_none())
            .collect();
        if pool.is_empty() {
            return Err(Infeasible);
        }
        let mut pick = unsat[0];
        let mut pick_mean = f64::INFINITY;
        for &k in &unsat {
            let mut sum = 0.0;
            for &n in &pool {
                sum += instance.rate(n, k);
            }
            *ops += pool.len() as u64;
            let mean = sum / pool.len() as f64;
            if mean < pick_mean {
                pick_mean = mean;
                pick = k;
            }
        }
        let mut best_n = pool[0];
        let mut best_rate = f64::NEG_INFINITY;
        for &n in &pool {
            *ops += 1;
            let r = instance.rate(n, pick);
            if r > best_rate {
                best_rate = r;
                best_n = n;
            }
        }
        alloc.assign(best_n, pick);
    }
}

/// Gives every unassigned subchannel to its best-rate best-effort user.
fn be_fill(instance: &Instance, alloc: &mut Allocation, ops: &mut u64) {
    if instance.be_count() == 0 {
        return;
    }
    for n in 0..instance.subchannels() {
        if alloc.owner(n).is_none() {
            *ops += instance.be_count() as u64;
            let best = instance.best_be_user(n).expect("BE user present");
            alloc.assign(n, best);
        }
    }
}

/// First heuristic: greedy CBR construction, best-user BE fill, optional
/// interchange sweeps, redundant-subchannel release.
pub fn heur1(instance: &Instance, opts: &Heur1Options) -> Result<Allocation, Infeasible> {
    heur1_instrumented(instance, opts).0
}

/// [`heur1`] with operation counts.
pub fn heur1_instrumented(
    instance: &Instance,
    opts: &Heur1Options,
) -> (Result<Allocation, Infeasible>, OpStats) {
    assert!(opts.swap_rounds >= 1, "swap_rounds must be at least 1");
    let mut ops = 0u64;
    let mut alloc = Allocation::unassigned(instance.subchannels());
    if let Err(e) = cbr_fill(instance, &mut alloc, &mut ops) {
        return (Err(e), OpStats { comparisons: ops });
    }
    be_fill(instance, &mut alloc, &mut ops);
    if opts.enable_swap {
        let mut delivered = delivered_per_user(instance, &alloc);
        for _ in 0..opts.swap_rounds {
            if !swap_sweep(instance, &mut alloc, &mut delivered, &mut ops) {
                break;
            }
        }
    }
    release_pass(instance, &mut alloc, &mut ops);
    (Ok(alloc), OpStats { comparisons: ops })
}

/// One interchange sweep over a feasible allocation. The returned allocation
/// scores at least as high and stays feasible.
pub fn swap_pass(instance: &Instance, alloc: &Allocation) -> Allocation {
    let mut out = alloc.clone();
    let mut delivered = delivered_per_user(instance, &out);
    let mut ops = 0u64;
    swap_sweep(instance, &mut out, &mut delivered, &mut ops);
    out
}

/// Releases redundant CBR subchannels of a feasible allocation toward the
/// best best-effort users. Objective never decreases.
pub fn release_redundant(instance: &Instance, alloc: &Allocation) -> Allocation {
    let mut out = alloc.clone();
    let mut ops = 0u64;
    release_pass(instance, &mut out, &mut ops);
    out
}

/// Second heuristic: start from the unconstrained best-user allocation, then
/// reallocate subchannels toward unsatisfied CBR users along the cheapest
/// cells of the reallocation-cost array.
pub fn heur2(instance: &Instance) -> Result<Allocation, Infeasible> {
    heur2_instrumented(instance).0
}

/// [`heur2`] with operation counts.
pub fn heur2_instrumented(instance: &Instance) -> (Result<Allocation, Infeasible>, OpStats) {
    let mut ops = 0u64;
    let subs = instance.subchannels();
    let mut alloc = Allocation::unassigned(subs);
    for n in 0..subs {
        let mut best_k = 0;
        let mut best_rate = f64::NEG_INFINITY;
        for k in 0..instance.users() {
            ops += 1;
            let r = instance.rate(n, k);
            if r > best_rate {
                best_rate = r;
                best_k = k;
            }
        }
        alloc.assign(n, best_k);
    }
    loop {
        let delivered = delivered_per_user(instance, &alloc);
        let unsat: Vec<usize> = instance
            .cbr_users()
            .filter(|&k| delivered[k] < instance.target(k))
            .collect();
        if unsat.is_empty() {
            break;
        }
        // Donor pool: satisfied CBR users and best-effort users with a
        // positive delivered rate. A CBR donor must also stay at target
        // after losing the subchannel; candidate rates must be positive.
        let mut best_cell: Option<(f64, usize, usize)> = None;
        for n in 0..subs {
            let owner = alloc.owner(n).expect("fully assigned after best-user step");
            let in_pool = if instance.is_cbr(owner) {
                delivered[owner] >= instance.target(owner)
            } else {
                delivered[owner] > 0.0
            };
            if !in_pool {
                continue;
            }
            let can_spare = if instance.is_cbr(owner) {
                delivered[owner] - instance.rate(n, owner) >= instance.target(owner)
            } else {
                true
            };
            for &k in &unsat {
                ops += 1;
                if !can_spare {
                    continue;
                }
                let r = instance.rate(n, k);
                if r <= 0.0 {
                    continue;
                }
                let cost = realloc_cost(instance.rate(n, owner), r);
                if best_cell.is_none_or(|(c, _, _)| cost < c) {
                    best_cell = Some((cost, n, k));
                }
            }
        }
        match best_cell {
            None => return (Err(Infeasible), OpStats { comparisons: ops }),
            Some((_, n, k)) => alloc.assign(n, k),
        }
    }
    release_pass(instance, &mut alloc, &mut ops);
    (Ok(alloc), OpStats { comparisons: ops })
}

/// Semi-random baseline: CBR users in index order repeatedly take their best
/// remaining subchannel until satisfied; leftovers go to uniformly random
/// best-effort users from a seeded stream.
pub fn random_baseline(instance: &Instance, seed: u64) -> Result<Allocation, Infeasible> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subs = instance.subchannels();
    let mut alloc = Allocation::unassigned(subs);
    for k in instance.cbr_users() {
        while delivered_to(instance, &alloc, k) < instance.target(k) {
            let mut best: Option<(usize, f64)> = None;
            for n in 0..subs {
                if alloc.owner(n).is_some() {
                    continue;
                }
                let r = instance.rate(n, k);
                if best.is_none_or(|(_, br)| r > br) {
                    best = Some((n, r));
                }
            }
            match best {
                None => return Err(Infeasible),
                Some((n, _)) => alloc.assign(n, k),
            }
        }
    }
    if instance.be_count() > 0 {
        for n in 0..subs {
            if alloc.owner(n).is_none() {
                let pick = instance.cbr_count() + rng.gen_range(0..instance.be_count());
                alloc.assign(n, pick);
            }
        }
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Matrix;
    use crate::problem::evaluate;

    fn instance(rows: &[Vec<f64>], cbr: usize, targets: &[f64]) -> Instance {
        Instance::new(Matrix::from_rows(rows).unwrap(), cbr, targets.to_vec()).unwrap()
    }

    #[test]
    fn heur1_two_user_example() {
        let inst = instance(&[vec![3.0, 1.0], vec![2.0, 4.0]], 1, &[3.0]);
        let alloc = heur1(&inst, &Heur1Options::default()).unwrap();
        assert_eq!(alloc.owners(), &[Some(0), Some(1)]);
        let ev = evaluate(&inst, &alloc).unwrap();
        assert!(ev.feasible);
        assert_eq!(ev.objective, 7.0);
    }

    #[test]
    fn heur1_flat_rates_take_minimum_count() {
        // single CBR user, every rate 2.0, target 5 -> ceil(5/2) = 3 subchannels
        let rows: Vec<Vec<f64>> = (0..4).map(|_| vec![2.0]).collect();
        let inst = instance(&rows, 1, &[5.0]);
        let alloc = heur1(&inst, &Heur1Options::default()).unwrap();
        let owned: Vec<usize> = alloc.owned_by(0).collect();
        assert_eq!(owned, vec![0, 1, 2]);
        assert_eq!(alloc.owner(3), None);
    }

    #[test]
    fn heur1_swap_repairs_greedy_choice() {
        // Step 2 gives subchannel 0 to the CBR user (tie -> lowest index),
        // the c.3 interchange then trades it for subchannel 1.
        let inst = instance(&[vec![2.0, 5.0], vec![2.0, 1.0]], 1, &[2.0]);
        let with_swap = heur1(&inst, &Heur1Options::default()).unwrap();
        assert_eq!(with_swap.owners(), &[Some(1), Some(0)]);
        assert_eq!(evaluate(&inst, &with_swap).unwrap().objective, 7.0);
        let no_swap = heur1(
            &inst,
            &Heur1Options {
                enable_swap: false,
                swap_rounds: 1,
            },
        )
        .unwrap();
        assert_eq!(evaluate(&inst, &no_swap).unwrap().objective, 3.0);
    }

    #[test]
    fn heur1_infeasible_when_pool_empties() {
        let inst = instance(&[vec![1.0, 4.0]], 1, &[10.0]);
        assert_eq!(heur1(&inst, &Heur1Options::default()), Err(Infeasible));
    }

    #[test]
    fn swap_pass_leaves_optimum_alone() {
        let inst = instance(&[vec![3.0, 1.0], vec![2.0, 4.0]], 1, &[3.0]);
        let alloc = Allocation::from_owners(vec![Some(0), Some(1)]);
        assert_eq!(swap_pass(&inst, &alloc), alloc);
    }

    #[test]
    fn swap_pass_two_best_effort_users() {
        // both users best-effort; the poor assignment gains 2.0 from one
        // c.2 interchange, a second firing would lose and stays off
        let inst = instance(&[vec![1.0, 2.0], vec![2.0, 1.0]], 0, &[]);
        let start = Allocation::from_owners(vec![Some(0), Some(1)]);
        let improved = swap_pass(&inst, &start);
        assert_eq!(improved.owners(), &[Some(1), Some(0)]);
        let before = evaluate(&inst, &start).unwrap().objective;
        let after = evaluate(&inst, &improved).unwrap().objective;
        assert_eq!(before, 2.0);
        assert_eq!(after, 4.0);
        // idempotent from the improved point
        assert_eq!(swap_pass(&inst, &improved), improved);
    }

    #[test]
    fn release_keeps_exact_target_untouched() {
        let inst = instance(&[vec![3.0, 1.0], vec![2.0, 4.0]], 1, &[3.0]);
        let alloc = Allocation::from_owners(vec![Some(0), Some(1)]);
        assert_eq!(release_redundant(&inst, &alloc), alloc);
    }

    #[test]
    fn release_scans_ascending_and_keeps_feasibility() {
        // CBR owns rates {3,3,4}, target 4: the two rate-3 subchannels are
        // released in ascending order, the rate-4 one is kept
        let inst = instance(
            &[
                vec![3.0, 1.0],
                vec![3.0, 2.0],
                vec![4.0, 0.5],
                vec![0.0, 1.5],
            ],
            1,
            &[4.0],
        );
        let alloc = Allocation::from_owners(vec![Some(0), Some(0), Some(0), Some(1)]);
        let released = release_redundant(&inst, &alloc);
        assert_eq!(
            released.owners(),
            &[Some(1), Some(1), Some(0), Some(1)],
            "rate-3 subchannels go to the BE user"
        );
        let ev = evaluate(&inst, &released).unwrap();
        assert!(ev.feasible);
        assert_eq!(ev.delivered, vec![4.0]);
        let before = evaluate(&inst, &alloc).unwrap().objective;
        assert!(ev.objective >= before);
    }

    #[test]
    fn heur2_feasible_without_reallocation() {
        let inst = instance(&[vec![3.0, 1.0], vec![2.0, 4.0]], 1, &[3.0]);
        let alloc = heur2(&inst).unwrap();
        assert_eq!(alloc.owners(), &[Some(0), Some(1)]);
        assert_eq!(evaluate(&inst, &alloc).unwrap().objective, 7.0);
    }

    #[test]
    fn realloc_cost_arithmetic() {
        assert_eq!(realloc_cost(6.0, 2.0), 2.0);
        // numerator can only drop to -rate, so the cost is at least -1
        assert!(realloc_cost(0.0, 5.0) >= -1.0);
    }

    #[test]
    fn heur2_forced_reallocation() {
        // best-user step gives both subchannels to the BE user; the cheaper
        // cell (cost 3 vs 4) moves subchannel 0 to the CBR user
        let inst = instance(&[vec![1.0, 4.0], vec![1.0, 5.0]], 1, &[1.0]);
        let alloc = heur2(&inst).unwrap();
        assert_eq!(alloc.owners(), &[Some(0), Some(1)]);
        let ev = evaluate(&inst, &alloc).unwrap();
        assert!(ev.feasible);
        assert_eq!(ev.objective, 6.0);
    }

    #[test]
    fn heur2_infeasible_when_all_cells_blocked() {
        // the CBR user has zero rate everywhere: no admissible cell
        let inst = instance(&[vec![0.0, 3.0]], 1, &[5.0]);
        assert_eq!(heur2(&inst), Err(Infeasible));
    }

    #[test]
    fn random_baseline_deterministic_and_feasible() {
        let inst = instance(
            &[
                vec![3.0, 1.0, 2.0],
                vec![2.0, 4.0, 1.0],
                vec![1.0, 2.0, 3.0],
            ],
            1,
            &[3.0],
        );
        let a = random_baseline(&inst, 9).unwrap();
        let b = random_baseline(&inst, 9).unwrap();
        assert_eq!(a, b);
        assert!(evaluate(&inst, &a).unwrap().feasible);
        // CBR phase grabs the best channel first
        assert_eq!(a.owner(0), Some(0));
    }

    #[test]
    fn random_baseline_without_be_users_degenerates_to_cbr_fill() {
        let inst = instance(&[vec![2.0], vec![3.0]], 1, &[4.0]);
        let alloc = random_baseline(&inst, 1).unwrap();
        assert_eq!(alloc.owners(), &[Some(0), Some(0)]);
        let short = instance(&[vec![2.0]], 1, &[4.0]);
        assert_eq!(random_baseline(&short, 1), Err(Infeasible));
    }

    fn random_instance(seed: u64, subs: usize, users: usize, cbr: usize) -> Instance {
        let mut s = seed;
        let mut next = move || {
            s = crate::seed::splitmix64(s);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let rates = Matrix::from_fn(subs, users, |_, _| 6.0 * next());
        // targets around a third of each CBR user's average capacity share
        let targets: Vec<f64> = (0..cbr)
            .map(|k| {
                let total: f64 = (0..subs).map(|n| rates.get(n, k)).sum();
                (total / users as f64 * 0.8).max(0.1)
            })
            .collect();
        Instance::new(rates, cbr, targets).unwrap()
    }

    #[test]
    fn outputs_are_feasible_and_swap_never_hurts() {
        for seed in 0..60 {
            let inst = random_instance(seed, 12, 4, 2);
            let with_swap = heur1(&inst, &Heur1Options::default());
            let without = heur1(
                &inst,
                &Heur1Options {
                    enable_swap: false,
                    swap_rounds: 1,
                },
            );
            match (with_swap, without) {
                (Ok(a), Ok(b)) => {
                    let ea = evaluate(&inst, &a).unwrap();
                    let eb = evaluate(&inst, &b).unwrap();
                    assert!(ea.feasible && eb.feasible);
                    assert!(
                        ea.objective >= eb.objective,
                        "seed {seed}: swap {} < noswap {}",
                        ea.objective,
                        eb.objective
                    );
                }
                (a, b) => assert_eq!(a.is_err(), b.is_err(), "seed {seed}"),
            }
            if let Ok(alloc) = heur2(&inst) {
                assert!(evaluate(&inst, &alloc).unwrap().feasible, "seed {seed}");
            }
            if let Ok(alloc) = random_baseline(&inst, seed) {
                assert!(evaluate(&inst, &alloc).unwrap().feasible, "seed {seed}");
            }
        }
    }

    #[test]
    fn swap_and_release_are_objective_monotone() {
        for seed in 100..140 {
            let inst = random_instance(seed, 10, 5, 2);
            let Ok(base) = heur1(
                &inst,
                &Heur1Options {
                    enable_swap: false,
                    swap_rounds: 1,
                },
            ) else {
                continue;
            };
            let v0 = evaluate(&inst, &base).unwrap().objective;
            let swapped = swap_pass(&inst, &base);
            let v1 = evaluate(&inst, &swapped).unwrap().objective;
            assert!(v1 >= v0, "seed {seed}");
            let released = release_redundant(&inst, &swapped);
            let v2 = evaluate(&inst, &released).unwrap().objective;
            assert!(v2 >= v1, "seed {seed}");
            assert!(evaluate(&inst, &released).unwrap().feasible);
        }
    }

    #[test]
    fn raw_sum_never_exceeds_unconstrained_bound() {
        for seed in 200..230 {
            let inst = random_instance(seed, 8, 4, 1);
            let bound: f64 = (0..inst.subchannels())
                .map(|n| {
                    (0..inst.users())
                        .map(|k| inst.rate(n, k))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .sum();
            for alloc in [
                heur1(&inst, &Heur1Options::default()),
                heur2(&inst),
                random_baseline(&inst, seed),
            ]
            .into_iter()
            .flatten()
            {
                let raw = evaluate(&inst, &alloc).unwrap().raw_sum;
                assert!(raw <= bound + 1e-9, "seed {seed}");
            }
        }
    }
}
