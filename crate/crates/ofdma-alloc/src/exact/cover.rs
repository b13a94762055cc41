//! Exact min-cost covering knapsack for tiny item counts.
//!
//! Given items with nonnegative cost and positive weight, find the cheapest
//! subset whose weight reaches `need`. Used per CBR user to bound how much
//! best-effort rate an integer allocation must forfeit; item counts are the
//! number of free subchannels, so a depth-first search with the fractional
//! greedy bound resolves in microseconds. The search is budgeted; on budget
//! exhaustion the fractional bound is returned, which is still a valid
//! lower bound on the integer cover cost.

#[derive(Debug, Clone, Copy)]
pub(crate) struct CoverItem {
    pub cost: f64,
    pub weight: f64,
}

/// Cheapest total cost of covering `need` with a subset of `items`;
/// `None` when even the full set falls short. `need <= 0` costs nothing.
pub(crate) fn min_cost_cover(items: &[CoverItem], need: f64) -> Option<f64> {
    if need <= 0.0 {
        return Some(0.0);
    }
    let mut sorted: Vec<CoverItem> = items
        .iter()
        .copied()
        .filter(|it| it.weight > 0.0)
        .collect();
    let total: f64 = sorted.iter().map(|it| it.weight).sum();
    if total < need {
        return None;
    }
    // cost-per-weight order puts the efficient items first; zero-cost items
    // lead and are always taken by the greedy bound
    sorted.sort_by(|a, b| {
        (a.cost * b.weight)
            .total_cmp(&(b.cost * a.weight))
            .then(b.weight.total_cmp(&a.weight))
    });
    let suffix_weight: Vec<f64> = {
        let mut acc = vec![0.0; sorted.len() + 1];
        for i in (0..sorted.len()).rev() {
            acc[i] = acc[i + 1] + sorted[i].weight;
        }
        acc
    };

    // greedy fractional completion from item `start` for the remaining need
    let frac_bound = |start: usize, remaining: f64| -> f64 {
        let mut bound = 0.0;
        let mut left = remaining;
        for it in &sorted[start..] {
            if left <= 0.0 {
                break;
            }
            let take = it.weight.min(left);
            bound += it.cost * (take / it.weight);
            left -= take;
        }
        bound
    };

    let mut best = f64::INFINITY;
    let mut budget = 20_000u32;
    // stack of (index, cost so far, remaining need)
    let mut stack = vec![(0usize, 0.0f64, need)];
    while let Some((i, cost, remaining)) = stack.pop() {
        if budget == 0 {
            // fall back to the fractional value: never above the integer
            // optimum, so still a valid lower bound for callers
            return Some(best.min(frac_bound(0, need)));
        }
        budget -= 1;
        if remaining <= 0.0 {
            best = best.min(cost);
            continue;
        }
        if i >= sorted.len() || suffix_weight[i] < remaining {
            continue;
        }
        if cost + frac_bound(i, remaining) >= best {
            continue;
        }
        // take item i (pushed last so it is explored first)
        stack.push((i + 1, cost, remaining));
        stack.push((i + 1, cost + sorted[i].cost, remaining - sorted[i].weight));
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(pairs: &[(f64, f64)]) -> Vec<CoverItem> {
        pairs
            .iter()
            .map(|&(cost, weight)| CoverItem { cost, weight })
            .collect()
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(min_cost_cover(&[], 0.0), Some(0.0));
        assert_eq!(min_cost_cover(&[], 1.0), None);
        let its = items(&[(1.0, 2.0)]);
        assert_eq!(min_cost_cover(&its, 3.0), None);
        assert_eq!(min_cost_cover(&its, 2.0), Some(1.0));
    }

    #[test]
    fn prefers_cheap_combination_over_greedy_ratio() {
        // greedy by ratio would take (1, 3) then need a second item;
        // the single item (1.5, 5) covers alone for less
        let its = items(&[(1.0, 3.0), (1.5, 5.0), (9.0, 5.0)]);
        assert_eq!(min_cost_cover(&its, 5.0), Some(1.5));
    }

    #[test]
    fn zero_cost_items_cover_for_free() {
        let its = items(&[(0.0, 4.0), (2.0, 4.0)]);
        assert_eq!(min_cost_cover(&its, 4.0), Some(0.0));
        assert_eq!(min_cost_cover(&its, 6.0), Some(2.0));
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut s = 0xc0ffee_u64;
        let mut next = move || {
            s = crate::seed::splitmix64(s);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..200 {
            let n = 2 + (trial % 9);
            let its: Vec<CoverItem> = (0..n)
                .map(|_| CoverItem {
                    cost: (next() * 5.0 * 8.0).round() / 8.0,
                    weight: 0.25 + (next() * 4.0 * 8.0).round() / 8.0,
                })
                .collect();
            let total: f64 = its.iter().map(|i| i.weight).sum();
            let need = next() * total * 1.1;
            let mut brute: Option<f64> = None;
            for pick in 0u32..(1 << n) {
                let (mut c, mut w) = (0.0, 0.0);
                for (i, it) in its.iter().enumerate() {
                    if pick & (1 << i) != 0 {
                        c += it.cost;
                        w += it.weight;
                    }
                }
                if w >= need && brute.is_none_or(|b| c < b) {
                    brute = Some(c);
                }
            }
            let got = min_cost_cover(&its, need);
            match (got, brute) {
                (None, None) => {}
                (Some(g), Some(b)) => {
                    assert!((g - b).abs() < 1e-9, "trial {trial}: {g} vs {b}")
                }
                other => panic!("trial {trial}: {other:?}"),
            }
        }
    }
}
