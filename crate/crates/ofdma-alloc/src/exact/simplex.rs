//! Dense two-phase primal simplex.
//!
//! Solves `max c·x` subject to linear `=`, `>=`, `<=` rows and `x >= 0`.
//! Phase 1 minimizes the sum of artificial variables to find a basic
//! feasible point; phase 2 optimizes the real objective with artificial
//! columns banned. Dantzig pricing with a switch to Bland's rule guards
//! against cycling; all tie-breaks are index-based so results are
//! deterministic. Problem sizes here stay in the low thousands of variables,
//! well within dense-tableau territory.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone)]
pub(crate) struct LpProblem {
    pub num_vars: usize,
    /// Maximized objective, one coefficient per variable.
    pub objective: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SimplexError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LpResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Optimal reduced costs of the structural variables in the minimization
    /// form: raising nonbasic `x_j` to `t` worsens the maximum by at least
    /// `reduced[j] * t`. Nonnegative (clamped) at optimality.
    pub reduced: Vec<f64>,
}

const EPS_COST: f64 = 1e-9;
const EPS_PIVOT: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;

struct Tableau {
    rows: usize,
    cols: usize, // excluding rhs
    data: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>, // reduced costs, one per column plus -z in the last slot
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let stride = self.cols + 1;
        let inv = 1.0 / self.data[r * stride + c];
        for j in 0..stride {
            self.data[r * stride + j] *= inv;
        }
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * stride + c];
            if f != 0.0 {
                for j in 0..stride {
                    self.data[i * stride + j] -= f * self.data[r * stride + j];
                }
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for j in 0..stride {
                self.cost[j] -= f * self.data[r * stride + j];
            }
        }
        self.basis[r] = c;
    }

    /// Rebuilds the reduced-cost row for the (minimized) costs `c` under the
    /// current basis.
    fn reset_costs(&mut self, c: &[f64]) {
        let stride = self.cols + 1;
        let mut cost = vec![0.0; stride];
        cost[..self.cols].copy_from_slice(c);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b];
            if cb != 0.0 {
                for j in 0..stride {
                    cost[j] -= cb * self.data[i * stride + j];
                }
            }
        }
        self.cost = cost;
    }

    /// Runs the simplex loop until optimality. `allowed` masks columns that
    /// may enter the basis.
    fn optimize(&mut self, allowed: &[bool], iter_budget: usize) -> Result<(), SimplexError> {
        let bland_after = iter_budget / 2;
        for iter in 0..iter_budget {
            let use_bland = iter >= bland_after;
            let mut entering: Option<usize> = None;
            let mut best = -EPS_COST;
            for j in 0..self.cols {
                if !allowed[j] {
                    continue;
                }
                let c = self.cost[j];
                if c < best {
                    entering = Some(j);
                    if use_bland {
                        break;
                    }
                    best = c;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > EPS_PIVOT {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(SimplexError::IterationLimit)
    }
}

/// Column roles of the assembled tableau, used for cut substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural(usize),
    /// Slack of normalized row r: `s = b_r - a_r x`.
    Slack(usize),
    /// Surplus of normalized row r: `s = a_r x - b_r`.
    Surplus(usize),
    Artificial,
}

struct Solved {
    result: LpResult,
    tableau: Tableau,
    kinds: Vec<ColKind>,
    /// Rows in normalized form (nonnegative rhs).
    norm_rows: Vec<(Vec<f64>, Relation, f64)>,
}

pub(crate) fn solve(problem: &LpProblem) -> Result<LpResult, SimplexError> {
    solve_detail(problem).map(|s| s.result)
}

/// Solves the relaxation, then strengthens it with up to `rounds` of Gomory
/// mixed-integer cuts derived from fractional integer-constrained basic
/// variables (every structural variable is integer-constrained here). The
/// returned value is a valid bound on the integer optimum; infeasibility
/// after cutting means no integer point exists.
pub(crate) fn solve_with_gomory(
    problem: &LpProblem,
    rounds: usize,
) -> Result<LpResult, SimplexError> {
    const MAX_CUTS_PER_ROUND: usize = 32;
    let mut p = problem.clone();
    let mut solved = solve_detail(&p)?;
    for _ in 0..rounds {
        let mut cuts = gomory_cuts(&solved);
        if cuts.is_empty() {
            break;
        }
        // most violated first; a lean cut set keeps the re-solve stable
        cuts.sort_by(|a, b| b.3.total_cmp(&a.3));
        cuts.truncate(MAX_CUTS_PER_ROUND);
        p.rows
            .extend(cuts.into_iter().map(|(coef, rel, rhs, _)| (coef, rel, rhs)));
        match solve_detail(&p) {
            Ok(next) => solved = next,
            // cuts only tighten; a stalled re-solve falls back to the last
            // converged relaxation, which is already a valid bound
            Err(SimplexError::Infeasible) => return Err(SimplexError::Infeasible),
            Err(_) => break,
        }
    }
    Ok(solved.result)
}

/// Gomory mixed-integer cuts from the optimal tableau, expressed over the
/// structural variables. Nonbasic variables sit at zero (no upper-bound
/// pivots are used), so the textbook form applies; artificial columns are
/// identically zero in any solution of the real problem and drop out.
fn gomory_cuts(solved: &Solved) -> Vec<(Vec<f64>, Relation, f64, f64)> {
    const F0_MIN: f64 = 0.05;
    const COEF_EPS: f64 = 1e-11;
    let t = &solved.tableau;
    let n = solved
        .kinds
        .iter()
        .filter(|k| matches!(k, ColKind::Structural(_)))
        .count();
    let mut is_basic = vec![false; t.cols];
    for &b in &t.basis {
        is_basic[b] = true;
    }
    let mut cuts = Vec::new();
    for i in 0..t.rows {
        let ColKind::Structural(_) = solved.kinds[t.basis[i]] else {
            continue;
        };
        let b = t.rhs(i);
        let f0 = b - b.floor();
        if !(F0_MIN..=1.0 - F0_MIN).contains(&f0) {
            continue;
        }
        let mut coef = vec![0.0; n];
        let mut rhs = f0;
        let mut ok = true;
        for j in 0..t.cols {
            // nonbasic columns only; basic ones carry ~0 after elimination
            if is_basic[j] {
                continue;
            }
            let a = t.at(i, j);
            if a.abs() < COEF_EPS {
                continue;
            }
            let gamma = match solved.kinds[j] {
                ColKind::Structural(_) => {
                    let f = a - a.floor();
                    if f <= f0 {
                        f
                    } else {
                        f0 * (1.0 - f) / (1.0 - f0)
                    }
                }
                ColKind::Slack(_) | ColKind::Surplus(_) => {
                    if a >= 0.0 {
                        a
                    } else {
                        f0 * (-a) / (1.0 - f0)
                    }
                }
                ColKind::Artificial => continue,
            };
            if gamma.abs() < COEF_EPS {
                continue;
            }
            if gamma.abs() > 1e9 {
                ok = false;
                break;
            }
            match solved.kinds[j] {
                ColKind::Structural(s) => coef[s] += gamma,
                ColKind::Slack(r) => {
                    let (row, _, b_r) = &solved.norm_rows[r];
                    for (s, &a_rs) in row.iter().enumerate() {
                        coef[s] -= gamma * a_rs;
                    }
                    rhs -= gamma * b_r;
                }
                ColKind::Surplus(r) => {
                    let (row, _, b_r) = &solved.norm_rows[r];
                    for (s, &a_rs) in row.iter().enumerate() {
                        coef[s] += gamma * a_rs;
                    }
                    rhs += gamma * b_r;
                }
                ColKind::Artificial => unreachable!(),
            }
        }
        if !ok {
            continue;
        }
        // keep cuts that actually cut off the current fractional point
        let lhs_now: f64 = coef
            .iter()
            .zip(&solved.result.x)
            .map(|(c, x)| c * x)
            .sum();
        let scale = coef.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let violation = (rhs - lhs_now) / scale.max(rhs.abs());
        if violation > 1e-7 && scale < 1e9 {
            cuts.push((coef, Relation::Ge, rhs, violation));
        }
    }
    cuts
}

fn solve_detail(problem: &LpProblem) -> Result<Solved, SimplexError> {
    let n = problem.num_vars;
    let m = problem.rows.len();
    debug_assert!(problem.objective.len() == n);

    // rows with negative rhs flip; a flipped Le becomes Ge and vice versa,
    // so sizing must follow the normalized relations
    let normalized: Vec<(Vec<f64>, Relation, f64)> = problem
        .rows
        .iter()
        .map(|(coef, rel, rhs)| {
            debug_assert!(coef.len() == n);
            if *rhs < 0.0 {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (coef.iter().map(|v| -v).collect(), flipped, -rhs)
            } else {
                (coef.clone(), *rel, *rhs)
            }
        })
        .collect();
    let mut extra = 0usize; // slack + surplus columns
    let mut artificial = 0usize;
    for (_, rel, _) in &normalized {
        match rel {
            Relation::Le | Relation::Ge => extra += 1,
            Relation::Eq => {}
        }
        if !matches!(rel, Relation::Le) {
            artificial += 1;
        }
    }

    let art_start = n + extra;
    let cols = n + extra + artificial;
    let stride = cols + 1;
    let mut data = vec![0.0; m * stride];
    let mut basis = vec![0usize; m];
    let mut kinds: Vec<ColKind> = (0..n).map(ColKind::Structural).collect();
    kinds.resize(cols, ColKind::Artificial);
    let mut next_extra = n;
    let mut next_art = art_start;
    for (i, (coef, rel, rhs)) in normalized.iter().enumerate() {
        data[i * stride..i * stride + n].copy_from_slice(coef);
        data[i * stride + cols] = *rhs;
        match rel {
            Relation::Le => {
                data[i * stride + next_extra] = 1.0;
                kinds[next_extra] = ColKind::Slack(i);
                basis[i] = next_extra;
                next_extra += 1;
            }
            Relation::Ge => {
                data[i * stride + next_extra] = -1.0;
                kinds[next_extra] = ColKind::Surplus(i);
                next_extra += 1;
                data[i * stride + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                data[i * stride + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau {
        rows: m,
        cols,
        data,
        basis,
        cost: vec![0.0; stride],
    };
    let iter_budget = 10_000 + 120 * (m + cols);

    if artificial > 0 {
        let mut phase1 = vec![0.0; cols];
        for j in art_start..cols {
            phase1[j] = 1.0;
        }
        t.reset_costs(&phase1);
        let allowed = vec![true; cols];
        t.optimize(&allowed, iter_budget)?;
        let infeasibility = -t.cost[cols];
        if infeasibility > PHASE1_TOL {
            return Err(SimplexError::Infeasible);
        }
        // pivot remaining artificials out of the basis where possible;
        // rows that cannot are redundant and stay inert
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > EPS_PIVOT) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let phase2: Vec<f64> = problem
        .objective
        .iter()
        .map(|v| -v)
        .chain(std::iter::repeat(0.0))
        .take(cols)
        .collect();
    t.reset_costs(&phase2);
    let mut allowed = vec![true; cols];
    for a in allowed.iter_mut().skip(art_start) {
        *a = false;
    }
    t.optimize(&allowed, iter_budget)?;

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    let value = problem
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>();
    let reduced = t.cost[..n].iter().map(|c| c.max(0.0)).collect();
    Ok(Solved {
        result: LpResult { x, value, reduced },
        tableau: t,
        kinds,
        norm_rows: normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(
        num_vars: usize,
        objective: Vec<f64>,
        rows: Vec<(Vec<f64>, Relation, f64)>,
    ) -> LpProblem {
        LpProblem {
            num_vars,
            objective,
            rows,
        }
    }

    #[test]
    fn simple_bounded_maximum() {
        // max 3x + 2y s.t. x + y <= 4, x <= 2 -> x=2, y=2, value 10
        let p = lp(
            2,
            vec![3.0, 2.0],
            vec![
                (vec![1.0, 1.0], Relation::Le, 4.0),
                (vec![1.0, 0.0], Relation::Le, 2.0),
            ],
        );
        let r = solve(&p).unwrap();
        assert!((r.value - 10.0).abs() < 1e-9);
        assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + 4y s.t. x + y = 1, y >= 0.25 -> y=1, x=0, value 4
        let p = lp(
            2,
            vec![1.0, 4.0],
            vec![
                (vec![1.0, 1.0], Relation::Eq, 1.0),
                (vec![0.0, 1.0], Relation::Ge, 0.25),
            ],
        );
        let r = solve(&p).unwrap();
        assert!((r.value - 4.0).abs() < 1e-9);
        assert!((r.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        // x <= 1 and x >= 2
        let p = lp(
            1,
            vec![1.0],
            vec![
                (vec![1.0], Relation::Le, 1.0),
                (vec![1.0], Relation::Ge, 2.0),
            ],
        );
        assert_eq!(solve(&p), Err(SimplexError::Infeasible));
    }

    #[test]
    fn detects_unboundedness() {
        // max x with only x >= 1
        let p = lp(1, vec![1.0], vec![(vec![1.0], Relation::Ge, 1.0)]);
        assert_eq!(solve(&p), Err(SimplexError::Unbounded));
    }

    #[test]
    fn handles_negative_rhs_by_normalizing() {
        // -x <= -2 means x >= 2; max -x -> x = 2
        let p = lp(1, vec![-1.0], vec![(vec![-1.0], Relation::Le, -2.0)]);
        let r = solve(&p).unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-9);
        assert!((r.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // multiple redundant rows through the same vertex
        let p = lp(
            2,
            vec![1.0, 1.0],
            vec![
                (vec![1.0, 1.0], Relation::Le, 1.0),
                (vec![2.0, 2.0], Relation::Le, 2.0),
                (vec![1.0, 0.0], Relation::Le, 1.0),
                (vec![1.0, 1.0], Relation::Eq, 1.0),
            ],
        );
        let r = solve(&p).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn assignment_polytope_vertex_is_integral() {
        // two items, two takers, per-item sum-to-one rows: the optimum sits
        // at an integral vertex picking the best taker per item
        let p = lp(
            4,
            vec![3.0, 1.0, 2.0, 4.0],
            vec![
                (vec![1.0, 1.0, 0.0, 0.0], Relation::Eq, 1.0),
                (vec![0.0, 0.0, 1.0, 1.0], Relation::Eq, 1.0),
            ],
        );
        let r = solve(&p).unwrap();
        assert!((r.value - 7.0).abs() < 1e-9);
        for v in &r.x {
            assert!(v.abs() < 1e-9 || (v - 1.0).abs() < 1e-9);
        }
    }
}
