//! Problem instance, allocation representation and objective semantics
//! shared by every solver in the crate.
//!
//! An [`Instance`] is one allocation problem: an N×K rate matrix, a QoS
//! partition (users `0..cbr_count` demand a constant bit rate, the rest are
//! best-effort) and one rate target per CBR user. An [`Allocation`] maps each
//! subchannel to at most one owner; exclusivity is structural.
//!
//! The objective credits every satisfied CBR user with exactly its target
//! (surplus is ignored) and best-effort users with their raw delivered rate.
//! Rate constraints are satisfied in the `>=` sense: discrete per-subchannel
//! rates make exact equality generically unattainable.

use crate::mat::Matrix;
use crate::text::sig9;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("instance must have at least one subchannel and one user")]
    Empty,
    #[error("{got} CBR targets supplied for {expected} CBR users")]
    TargetCount { got: usize, expected: usize },
    #[error("CBR count {got} exceeds user count {users}")]
    CbrCount { got: usize, users: usize },
    #[error("CBR target must be positive and finite, got {0}")]
    InvalidTarget(f64),
    #[error("rate entries must be nonnegative and finite, got {0}")]
    InvalidRate(f64),
    #[error("allocation has {got} subchannels, instance has {expected}")]
    AllocationLength { got: usize, expected: usize },
    #[error("subchannel {subchannel} assigned to unknown user {user}")]
    OwnerOutOfRange { subchannel: usize, user: usize },
    #[error("csv parse error on line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Explicit "no feasible allocation" outcome. Solvers return this as a value;
/// the simulation harness records it as an outage and keeps going.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infeasible;

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("infeasible")
    }
}

impl std::error::Error for Infeasible {}

/// One subchannel-allocation problem under uniform power loading.
///
/// By convention the CBR users occupy the leading column indices
/// `0..cbr_count`; best-effort users follow. An instance with no best-effort
/// users is legal: leftover subchannels then simply stay unassigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    rates: Matrix,
    cbr_count: usize,
    targets: Vec<f64>,
}

impl Instance {
    pub fn new(rates: Matrix, cbr_count: usize, targets: Vec<f64>) -> Result<Self, ProblemError> {
        if rates.is_empty() {
            return Err(ProblemError::Empty);
        }
        if cbr_count > rates.cols() {
            return Err(ProblemError::CbrCount {
                got: cbr_count,
                users: rates.cols(),
            });
        }
        if targets.len() != cbr_count {
            return Err(ProblemError::TargetCount {
                got: targets.len(),
                expected: cbr_count,
            });
        }
        for &t in &targets {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ProblemError::InvalidTarget(t));
            }
        }
        for v in rates.values() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ProblemError::InvalidRate(v));
            }
        }
        Ok(Self {
            rates,
            cbr_count,
            targets,
        })
    }

    #[inline]
    pub fn subchannels(&self) -> usize {
        self.rates.rows()
    }

    #[inline]
    pub fn users(&self) -> usize {
        self.rates.cols()
    }

    #[inline]
    pub fn cbr_count(&self) -> usize {
        self.cbr_count
    }

    #[inline]
    pub fn be_count(&self) -> usize {
        self.users() - self.cbr_count
    }

    #[inline]
    pub fn is_cbr(&self, user: usize) -> bool {
        user < self.cbr_count
    }

    /// Rate of subchannel `n` at user `k`, bits/symbol.
    #[inline]
    pub fn rate(&self, n: usize, k: usize) -> f64 {
        self.rates.get(n, k)
    }

    /// CBR target of CBR user `k` (`k < cbr_count`).
    #[inline]
    pub fn target(&self, k: usize) -> f64 {
        self.targets[k]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn rates(&self) -> &Matrix {
        &self.rates
    }

    pub fn cbr_users(&self) -> std::ops::Range<usize> {
        0..self.cbr_count
    }

    pub fn be_users(&self) -> std::ops::Range<usize> {
        self.cbr_count..self.users()
    }

    /// Best-effort user with the highest rate on subchannel `n`
    /// (lowest index on ties); `None` when the instance has no BE users.
    pub fn best_be_user(&self, n: usize) -> Option<usize> {
        self.be_users()
            .fold(None::<(usize, f64)>, |best, k| {
                let r = self.rate(n, k);
                match best {
                    Some((_, br)) if r <= br => best,
                    _ => Some((k, r)),
                }
            })
            .map(|(k, _)| k)
    }
}

/// Exclusive subchannel→user assignment. `None` marks an unassigned
/// subchannel, which only occurs when the instance has no best-effort users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    owners: Vec<Option<usize>>,
}

impl Allocation {
    pub fn unassigned(subchannels: usize) -> Self {
        Self {
            owners: vec![None; subchannels],
        }
    }

    pub fn from_owners(owners: Vec<Option<usize>>) -> Self {
        Self { owners }
    }

    #[inline]
    pub fn owner(&self, n: usize) -> Option<usize> {
        self.owners[n]
    }

    #[inline]
    pub fn assign(&mut self, n: usize, user: usize) {
        self.owners[n] = Some(user);
    }

    #[inline]
    pub fn clear(&mut self, n: usize) {
        self.owners[n] = None;
    }

    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owners
    }

    /// Subchannels owned by `user`, ascending.
    pub fn owned_by<'a>(&'a self, user: usize) -> impl Iterator<Item = usize> + 'a {
        self.owners
            .iter()
            .enumerate()
            .filter(move |(_, o)| **o == Some(user))
            .map(|(n, _)| n)
    }
}

/// Result of scoring an allocation against an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Delivered rate per CBR user (`lhs` of the QoS constraints).
    pub delivered: Vec<f64>,
    /// All CBR users at or above target.
    pub feasible: bool,
    /// CBR credit (capped at the target) plus the best-effort sum.
    pub objective: f64,
    /// Plain sum of assigned rates, ignoring targets.
    pub raw_sum: f64,
}

/// Per-user delivered rate, accumulated over subchannels in ascending order.
/// Every feasibility decision in the crate uses this same summation order so
/// float results agree bit-for-bit across solvers.
pub(crate) fn delivered_per_user(instance: &Instance, alloc: &Allocation) -> Vec<f64> {
    let mut acc = vec![0.0f64; instance.users()];
    for n in 0..instance.subchannels() {
        if let Some(k) = alloc.owner(n) {
            acc[k] += instance.rate(n, k);
        }
    }
    acc
}

/// Scores `alloc`: delivered CBR rates, feasibility, objective and raw sum.
pub fn evaluate(instance: &Instance, alloc: &Allocation) -> Result<Evaluation, ProblemError> {
    if alloc.len() != instance.subchannels() {
        return Err(ProblemError::AllocationLength {
            got: alloc.len(),
            expected: instance.subchannels(),
        });
    }
    for n in 0..alloc.len() {
        if let Some(k) = alloc.owner(n) {
            if k >= instance.users() {
                return Err(ProblemError::OwnerOutOfRange {
                    subchannel: n,
                    user: k,
                });
            }
        }
    }
    let acc = delivered_per_user(instance, alloc);
    let delivered: Vec<f64> = acc[..instance.cbr_count()].to_vec();
    let feasible = delivered
        .iter()
        .zip(instance.targets())
        .all(|(d, t)| d >= t);
    let mut objective = 0.0;
    for (k, d) in delivered.iter().enumerate() {
        objective += d.min(instance.target(k));
    }
    for k in instance.be_users() {
        objective += acc[k];
    }
    let mut raw_sum = 0.0;
    for n in 0..alloc.len() {
        if let Some(k) = alloc.owner(n) {
            raw_sum += instance.rate(n, k);
        }
    }
    Ok(Evaluation {
        delivered,
        feasible,
        objective,
        raw_sum,
    })
}

/// Scalar used in all cross-scheme comparisons; equals
/// `Evaluation::objective`.
pub fn comparison_objective(instance: &Instance, alloc: &Allocation) -> Result<f64, ProblemError> {
    Ok(evaluate(instance, alloc)?.objective)
}

// --- CSV interchange -------------------------------------------------------
//
// Instance file: `N,K,K1` header, one line of K1 comma-separated CBR targets
// (empty when K1 = 0), then N lines of K comma-separated rates. Allocation
// file: N lines of `subchannel,owner` with 0-based indices and -1 for
// unassigned. All reals carry 9 significant digits.

pub fn instance_to_csv(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{},{},{}\n",
        instance.subchannels(),
        instance.users(),
        instance.cbr_count()
    ));
    let targets: Vec<String> = instance.targets().iter().map(|&t| sig9(t)).collect();
    out.push_str(&targets.join(","));
    out.push('\n');
    for n in 0..instance.subchannels() {
        let row: Vec<String> = (0..instance.users())
            .map(|k| sig9(instance.rate(n, k)))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, ProblemError> {
    tok.trim().parse::<f64>().map_err(|e| ProblemError::Csv {
        line,
        msg: format!("bad number {tok:?}: {e}"),
    })
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, ProblemError> {
    tok.trim().parse::<usize>().map_err(|e| ProblemError::Csv {
        line,
        msg: format!("bad count {tok:?}: {e}"),
    })
}

pub fn instance_from_csv(text: &str) -> Result<Instance, ProblemError> {
    let mut lines = text.lines().enumerate();
    let (lno, header) = lines.next().ok_or(ProblemError::Csv {
        line: 1,
        msg: "empty file".into(),
    })?;
    let head: Vec<&str> = header.split(',').collect();
    if head.len() != 3 {
        return Err(ProblemError::Csv {
            line: lno + 1,
            msg: format!("header must be N,K,K1; got {header:?}"),
        });
    }
    let n = parse_usize(head[0], lno + 1)?;
    let k = parse_usize(head[1], lno + 1)?;
    let k1 = parse_usize(head[2], lno + 1)?;

    let (lno, target_line) = lines.next().ok_or(ProblemError::Csv {
        line: 2,
        msg: "missing CBR target line".into(),
    })?;
    let targets: Vec<f64> = if k1 == 0 {
        if !target_line.trim().is_empty() {
            return Err(ProblemError::Csv {
                line: lno + 1,
                msg: "expected empty target line for K1 = 0".into(),
            });
        }
        Vec::new()
    } else {
        let toks: Vec<&str> = target_line.split(',').collect();
        if toks.len() != k1 {
            return Err(ProblemError::Csv {
                line: lno + 1,
                msg: format!("expected {k1} targets, got {}", toks.len()),
            });
        }
        toks.iter()
            .map(|t| parse_f64(t, lno + 1))
            .collect::<Result<_, _>>()?
    };

    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (lno, line) = lines.next().ok_or(ProblemError::Csv {
            line: n + 2,
            msg: format!("expected {n} rate rows"),
        })?;
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != k {
            return Err(ProblemError::Csv {
                line: lno + 1,
                msg: format!("expected {k} rates, got {}", toks.len()),
            });
        }
        let row: Vec<f64> = toks
            .iter()
            .map(|t| parse_f64(t, lno + 1))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    if let Some((lno, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(ProblemError::Csv {
            line: lno + 1,
            msg: format!("unexpected trailing content {extra:?}"),
        });
    }
    let rates = Matrix::from_rows(&rows).ok_or(ProblemError::Csv {
        line: 3,
        msg: "ragged rate rows".into(),
    })?;
    Instance::new(rates, k1, targets)
}

pub fn allocation_to_csv(alloc: &Allocation) -> String {
    let mut out = String::new();
    for n in 0..alloc.len() {
        match alloc.owner(n) {
            Some(k) => out.push_str(&format!("{n},{k}\n")),
            None => out.push_str(&format!("{n},-1\n")),
        }
    }
    out
}

pub fn allocation_from_csv(text: &str, subchannels: usize) -> Result<Allocation, ProblemError> {
    let mut alloc = Allocation::unassigned(subchannels);
    let mut seen = vec![false; subchannels];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != 2 {
            return Err(ProblemError::Csv {
                line: i + 1,
                msg: format!("expected subchannel,owner; got {line:?}"),
            });
        }
        let n = parse_usize(toks[0], i + 1)?;
        if n >= subchannels {
            return Err(ProblemError::Csv {
                line: i + 1,
                msg: format!("subchannel {n} out of range"),
            });
        }
        if seen[n] {
            return Err(ProblemError::Csv {
                line: i + 1,
                msg: format!("duplicate subchannel {n}"),
            });
        }
        seen[n] = true;
        let owner = toks[1].trim();
        if owner == "-1" {
            alloc.clear(n);
        } else {
            alloc.assign(n, parse_usize(owner, i + 1)?);
        }
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Instance {
        // r(n,k): subchannel rows, user columns; user 0 CBR with target 3.
        let rates = Matrix::from_rows(&[vec![3.0, 1.0], vec![2.0, 4.0]]).unwrap();
        Instance::new(rates, 1, vec![3.0]).unwrap()
    }

    #[test]
    fn empty_allocation_is_infeasible_with_zero_be_contribution() {
        let inst = two_by_two();
        let ev = evaluate(&inst, &Allocation::unassigned(2)).unwrap();
        assert_eq!(ev.delivered, vec![0.0]);
        assert!(!ev.feasible);
        assert_eq!(ev.objective, 0.0);
        assert_eq!(ev.raw_sum, 0.0);
    }

    #[test]
    fn feasible_allocation_objective() {
        let inst = two_by_two();
        let alloc = Allocation::from_owners(vec![Some(0), Some(1)]);
        let ev = evaluate(&inst, &alloc).unwrap();
        assert_eq!(ev.delivered, vec![3.0]);
        assert!(ev.feasible);
        assert_eq!(ev.objective, 7.0);
        assert_eq!(ev.raw_sum, 7.0);
        assert_eq!(comparison_objective(&inst, &alloc).unwrap(), 7.0);
    }

    #[test]
    fn cbr_surplus_is_ignored() {
        let inst = two_by_two();
        let alloc = Allocation::from_owners(vec![Some(0), Some(0)]);
        let ev = evaluate(&inst, &alloc).unwrap();
        assert_eq!(ev.delivered, vec![5.0]);
        assert!(ev.feasible);
        assert_eq!(ev.objective, 3.0);
        assert_eq!(ev.raw_sum, 5.0);
        assert!(ev.objective <= ev.raw_sum);
    }

    #[test]
    fn infeasible_allocation_credits_partial_cbr() {
        let inst = two_by_two();
        // CBR gets only subchannel 1 (rate 2 < 3), BE gets subchannel 0 (rate 1)
        let alloc = Allocation::from_owners(vec![Some(1), Some(0)]);
        let ev = evaluate(&inst, &alloc).unwrap();
        assert!(!ev.feasible);
        assert_eq!(ev.delivered, vec![2.0]);
        assert_eq!(ev.objective, 2.0 + 1.0);
        assert_eq!(ev.raw_sum, 3.0);
    }

    #[test]
    fn evaluate_rejects_bad_allocations() {
        let inst = two_by_two();
        assert_eq!(
            evaluate(&inst, &Allocation::unassigned(3)),
            Err(ProblemError::AllocationLength {
                got: 3,
                expected: 2
            })
        );
        let alloc = Allocation::from_owners(vec![Some(5), None]);
        assert!(matches!(
            evaluate(&inst, &alloc),
            Err(ProblemError::OwnerOutOfRange { .. })
        ));
    }

    #[test]
    fn objective_invariant_under_be_relabeling() {
        // swapping the two BE columns together with their labels leaves the
        // objective unchanged
        let rates = Matrix::from_rows(&[
            vec![2.0, 1.0, 4.0],
            vec![1.0, 3.0, 0.5],
            vec![2.5, 2.0, 2.0],
        ])
        .unwrap();
        let inst = Instance::new(rates.clone(), 1, vec![2.0]).unwrap();
        let swapped = Matrix::from_fn(3, 3, |n, k| match k {
            1 => rates.get(n, 2),
            2 => rates.get(n, 1),
            _ => rates.get(n, 0),
        });
        let inst_swapped = Instance::new(swapped, 1, vec![2.0]).unwrap();
        let alloc = Allocation::from_owners(vec![Some(0), Some(1), Some(2)]);
        let relabeled = Allocation::from_owners(vec![Some(0), Some(2), Some(1)]);
        let a = evaluate(&inst, &alloc).unwrap().objective;
        let b = evaluate(&inst_swapped, &relabeled).unwrap().objective;
        assert_eq!(a, b);
    }

    #[test]
    fn instance_validation() {
        assert_eq!(
            Instance::new(Matrix::zeros(0, 0), 0, vec![]),
            Err(ProblemError::Empty)
        );
        assert!(matches!(
            Instance::new(Matrix::zeros(2, 2), 3, vec![1.0; 3]),
            Err(ProblemError::CbrCount { .. })
        ));
        assert!(matches!(
            Instance::new(Matrix::zeros(2, 2), 1, vec![0.0]),
            Err(ProblemError::InvalidTarget(_))
        ));
        let bad = Matrix::from_rows(&[vec![1.0, -0.5]]).unwrap();
        assert!(matches!(
            Instance::new(bad, 0, vec![]),
            Err(ProblemError::InvalidRate(_))
        ));
        // no BE users is legal
        assert!(Instance::new(Matrix::zeros(2, 1), 1, vec![1.0]).is_ok());
    }

    #[test]
    fn instance_csv_round_trip() {
        let inst = two_by_two();
        let text = instance_to_csv(&inst);
        assert!(text.starts_with("2,2,1\n"));
        let back = instance_from_csv(&text).unwrap();
        assert_eq!(back.subchannels(), 2);
        assert_eq!(back.cbr_count(), 1);
        assert!((back.rate(1, 1) - 4.0).abs() < 1e-8);
        assert!((back.target(0) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn instance_csv_rejects_malformed_input() {
        assert!(instance_from_csv("").is_err());
        assert!(instance_from_csv("2,2\n").is_err());
        assert!(instance_from_csv("2,2,1\n3.0\n1,2\n").is_err()); // short row
        assert!(instance_from_csv("1,2,1\n3.0\n1,2\nextra\n").is_err());
    }

    #[test]
    fn allocation_csv_round_trip() {
        let alloc = Allocation::from_owners(vec![Some(1), None, Some(0)]);
        let text = allocation_to_csv(&alloc);
        assert_eq!(text, "0,1\n1,-1\n2,0\n");
        let back = allocation_from_csv(&text, 3).unwrap();
        assert_eq!(back, alloc);
        assert!(allocation_from_csv("0,1\n0,2\n", 3).is_err()); // duplicate
    }
}
