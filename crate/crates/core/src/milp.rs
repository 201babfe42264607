//! Exact branch-and-bound for linear programs with binary variables.
//!
//! Nodes are explored best-bound first (FIFO among equal bounds) and branch
//! on the most fractional binary (smallest index on ties). When every
//! objective coefficient sits on binaries and is an integer multiple of a
//! common step, node bounds are rounded down to that step before pruning.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, DEFAULT_TOLERANCE};

/// An [`LpProblem`] with a subset of columns restricted to {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpProblem {
    pub base: LpProblem,
    /// Sorted, deduplicated indices of the binary columns.
    pub binary_vars: Vec<usize>,
}

impl MilpProblem {
    pub fn new(base: LpProblem, mut binary_vars: Vec<usize>) -> Result<Self> {
        binary_vars.sort_unstable();
        binary_vars.dedup();
        let problem = Self { base, binary_vars };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for &j in &self.binary_vars {
            if j >= self.base.num_vars {
                return Err(Error::Input(format!("binary index {j} out of range")));
            }
            let (lo, hi) = self.base.bounds[j];
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::Input(format!(
                    "binary variable {j} has bounds [{lo}, {hi}] outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn is_binary(&self, j: usize) -> bool {
        self.binary_vars.binary_search(&j).is_ok()
    }
}

/// Drops integrality, keeping rows, objective and the [0, 1] bounds.
pub fn relax(problem: &MilpProblem) -> LpProblem {
    problem.base.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MilpStatus {
    /// Proven optimal.
    Optimal,
    /// Proven infeasible.
    Infeasible,
    /// A node or time limit stopped the search; the incumbent is feasible
    /// but not proven optimal.
    LimitFeasible,
    /// A limit stopped the search before any incumbent was found. Nothing is
    /// known about feasibility.
    LimitUnknown,
}

impl MilpStatus {
    pub fn limit_hit(self) -> bool {
        matches!(self, MilpStatus::LimitFeasible | MilpStatus::LimitUnknown)
    }

    pub fn has_solution(self) -> bool {
        matches!(self, MilpStatus::Optimal | MilpStatus::LimitFeasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Objective of the incumbent; `NaN` when there is none.
    pub objective_value: f64,
    /// Incumbent point with binaries snapped exactly to 0 or 1.
    pub primal: Vec<f64>,
    pub node_count: usize,
    /// Objective of the root relaxation (an upper bound); `NaN` when the root
    /// is infeasible.
    pub root_bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct MilpOptions {
    pub integrality_tol: f64,
    pub lp_tolerance: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Search depth-first, diving toward the rounded relaxation, and stop at
    /// the first integral point. A found point is reported as
    /// [`MilpStatus::LimitFeasible`]; exhausting the tree still proves
    /// infeasibility.
    pub first_feasible: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            lp_tolerance: DEFAULT_TOLERANCE,
            node_limit: None,
            time_limit: None,
            first_feasible: false,
        }
    }
}

struct Node {
    bound: f64,
    seq: usize,
    bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: larger bound first, then smaller sequence number.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Open nodes: best-bound first, or a plain stack for depth-first search.
enum Frontier {
    BestBound(BinaryHeap<Node>),
    DepthFirst(Vec<Node>),
}

impl Frontier {
    fn new(depth_first: bool) -> Self {
        if depth_first {
            Frontier::DepthFirst(Vec::new())
        } else {
            Frontier::BestBound(BinaryHeap::new())
        }
    }

    fn push(&mut self, node: Node) {
        match self {
            Frontier::BestBound(h) => h.push(node),
            Frontier::DepthFirst(v) => v.push(node),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::BestBound(h) => h.pop(),
            Frontier::DepthFirst(v) => v.pop(),
        }
    }
}

/// Common step of the objective when all of its weight is on binaries.
fn objective_step(problem: &MilpProblem) -> Option<f64> {
    let mut step: Option<f64> = None;
    for (j, &c) in problem.base.objective.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if !problem.is_binary(j) {
            return None;
        }
        step = Some(match step {
            None => c.abs(),
            Some(g) => float_gcd(g, c.abs())?,
        });
    }
    step
}

fn float_gcd(a: f64, b: f64) -> Option<f64> {
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    let eps = 1e-9 * a;
    for _ in 0..64 {
        if b <= eps {
            return (a > eps).then_some(a);
        }
        let r = a % b;
        a = b;
        b = if r <= eps || b - r <= eps { 0.0 } else { r };
    }
    None
}

fn round_down(bound: f64, step: Option<f64>) -> f64 {
    match step {
        Some(g) => (bound / g + 1e-6).floor() * g,
        None => bound,
    }
}

/// Solves `problem` exactly, up to the optional limits.
pub fn solve_milp(problem: &MilpProblem, options: &MilpOptions) -> Result<MilpSolution> {
    problem.validate()?;
    let start = Instant::now();
    let step = objective_step(problem);
    let prune_eps = 1e-9;
    let lp_tol = options.lp_tolerance;

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut node_count = 0usize;
    let mut seq = 0usize;
    let mut frontier = Frontier::new(options.first_feasible);
    frontier.push(Node { bound: f64::INFINITY, seq, bounds: problem.base.bounds.clone() });
    let mut root_bound = f64::NAN;
    let mut limit_hit = false;
    let mut scratch = problem.base.clone();

    let mut stopped_early = false;
    while let Some(node) = frontier.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound <= best + prune_eps {
                continue;
            }
        }
        if options.node_limit.is_some_and(|lim| node_count >= lim)
            || options.time_limit.is_some_and(|lim| start.elapsed() >= lim)
        {
            limit_hit = true;
            break;
        }
        node_count += 1;
        scratch.bounds = node.bounds;
        let lp = solve_lp(&scratch, lp_tol)?;
        if node_count == 1 {
            match lp.status {
                LpStatus::Unbounded => return Err(Error::Unbounded),
                LpStatus::Optimal => root_bound = lp.objective_value,
                LpStatus::Infeasible => {}
            }
        }
        if lp.status != LpStatus::Optimal {
            continue;
        }
        let bound = round_down(lp.objective_value, step);
        if let Some((best, _)) = &incumbent {
            if bound <= best + prune_eps {
                continue;
            }
        }

        let mut branch = most_fractional(problem, &lp.primal, &scratch.bounds, options.integrality_tol);
        if branch.is_none() {
            // Integral within tolerance: re-solve with every binary fixed so
            // the continuous part is exact for the snapped assignment.
            let mut polish = scratch.clone();
            for &j in &problem.binary_vars {
                let v = lp.primal[j].round();
                polish.bounds[j] = (v, v);
            }
            let exact = solve_lp(&polish, lp_tol)?;
            if exact.status == LpStatus::Optimal {
                let value = exact.objective_value;
                if incumbent.as_ref().is_none_or(|(best, _)| value > *best + prune_eps) {
                    incumbent = Some((value, exact.primal));
                }
                if options.first_feasible {
                    stopped_early = true;
                    break;
                }
                continue;
            }
            branch = nearest_unfixed(problem, &lp.primal, &scratch.bounds);
        }
        let Some(j) = branch else { continue };
        // The stack pops the last child first: dive toward the rounding.
        let order = match (options.first_feasible, lp.primal[j] < 0.5) {
            (true, false) => [0.0, 1.0],
            _ => [1.0, 0.0],
        };
        for v in order {
            let mut child = scratch.bounds.clone();
            child[j] = (v, v);
            seq += 1;
            frontier.push(Node { bound, seq, bounds: child });
        }
    }

    let limit_hit = limit_hit || stopped_early;
    let status = match (&incumbent, limit_hit) {
        (Some(_), false) => MilpStatus::Optimal,
        (None, false) => MilpStatus::Infeasible,
        (Some(_), true) => MilpStatus::LimitFeasible,
        (None, true) => MilpStatus::LimitUnknown,
    };
    let (objective_value, primal) = match incumbent {
        Some((v, x)) => (v, x),
        None => (f64::NAN, vec![0.0; problem.base.num_vars]),
    };
    if cfg!(debug_assertions) && status.has_solution() && root_bound.is_finite() {
        debug_assert!(
            root_bound >= objective_value - 1e-6 * (1.0 + objective_value.abs()),
            "relaxation bound {root_bound} below integer objective {objective_value}"
        );
    }
    Ok(MilpSolution { status, objective_value, primal, node_count, root_bound })
}

/// Most fractional free binary; ties go to the smallest index.
fn most_fractional(problem: &MilpProblem, x: &[f64], bounds: &[(f64, f64)], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in &problem.binary_vars {
        if bounds[j].0 == bounds[j].1 {
            continue;
        }
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac > tol && best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

/// Free binary with the largest nonzero distance from integrality.
fn nearest_unfixed(problem: &MilpProblem, x: &[f64], bounds: &[(f64, f64)]) -> Option<usize> {
    most_fractional(problem, x, bounds, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Row;

    fn binary_lp(n: usize) -> LpProblem {
        let mut lp = LpProblem::new(n);
        lp.bounds = vec![(0.0, 1.0); n];
        lp
    }

    #[test]
    fn relax_keeps_everything() {
        let mut lp = binary_lp(2);
        lp.objective = vec![1.0, 2.0];
        lp.add_row(Row::le(vec![(0, 1.0), (1, 1.0)], 1.0));
        let plain = MilpProblem::new(lp.clone(), vec![]).unwrap();
        assert_eq!(relax(&plain), lp);
        let mut fixed = lp.clone();
        fixed.bounds[0] = (1.0, 1.0);
        let m = MilpProblem::new(fixed.clone(), vec![0, 1]).unwrap();
        assert_eq!(relax(&m).bounds[0], (1.0, 1.0));
    }

    #[test]
    fn relaxation_of_totally_unimodular_problem_is_integral() {
        // Bipartite assignment 3x3: rows and columns sum to at most one.
        let weights = [[3.0, 1.0, 2.0], [2.0, 4.0, 1.0], [1.0, 2.0, 5.0]];
        let mut lp = binary_lp(9);
        for (i, row) in weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                lp.objective[3 * i + j] = w;
            }
            lp.add_row(Row::le((0..3).map(|j| (3 * i + j, 1.0)).collect(), 1.0));
            lp.add_row(Row::le((0..3).map(|k| (3 * k + i, 1.0)).collect(), 1.0));
        }
        let milp = MilpProblem::new(lp, (0..9).collect()).unwrap();
        let s = solve_lp(&relax(&milp), 1e-7).unwrap();
        assert!(s.primal.iter().all(|v| v.abs() < 1e-9 || (v - 1.0).abs() < 1e-9));
        assert!((s.objective_value - 12.0).abs() < 1e-9);
    }

    #[test]
    fn matching_bound() {
        let mut lp = binary_lp(2);
        lp.objective = vec![1.0, 1.0];
        lp.add_row(Row::le(vec![(0, 1.0), (1, 1.0)], 1.0));
        let s = solve_milp(&MilpProblem::new(lp, vec![0, 1]).unwrap(), &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert_eq!(s.objective_value, 1.0);
        assert_eq!(s.primal.iter().filter(|&&v| v == 1.0).count(), 1);
    }

    #[test]
    fn infeasible_root_is_pruned_immediately() {
        let mut lp = binary_lp(2);
        lp.add_row(Row::ge(vec![(0, 1.0), (1, 1.0)], 3.0));
        let s = solve_milp(&MilpProblem::new(lp, vec![0, 1]).unwrap(), &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
        assert_eq!(s.node_count, 1);
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // max x0 + x1 + x2, 2(x0 + x1 + x2) <= 3 -> relaxation 1.5, integer 1.
        let mut lp = binary_lp(3);
        lp.objective = vec![1.0; 3];
        lp.add_row(Row::le(vec![(0, 2.0), (1, 2.0), (2, 2.0)], 3.0));
        let s = solve_milp(&MilpProblem::new(lp, vec![0, 1, 2]).unwrap(), &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert_eq!(s.objective_value, 1.0);
        assert!((s.root_bound - 1.5).abs() < 1e-9);
    }

    #[test]
    fn mixed_problem_with_continuous_part() {
        // max y + x, y <= 2.5 x, y <= 1.7, x binary, y >= 0 -> x = 1, y = 1.7
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.bounds = vec![(0.0, 1.0), (0.0, f64::INFINITY)];
        lp.add_row(Row::le(vec![(1, 1.0), (0, -2.5)], 0.0));
        lp.add_row(Row::le(vec![(1, 1.0)], 1.7));
        let s = solve_milp(&MilpProblem::new(lp, vec![0]).unwrap(), &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective_value - 2.7).abs() < 1e-9);
    }

    #[test]
    fn node_limit_reports_limit() {
        let mut lp = binary_lp(6);
        lp.objective = vec![1.0; 6];
        lp.add_row(Row::le((0..6).map(|j| (j, 2.0)).collect(), 5.0));
        let milp = MilpProblem::new(lp, (0..6).collect()).unwrap();
        let s = solve_milp(&milp, &MilpOptions { node_limit: Some(1), ..Default::default() }).unwrap();
        assert_eq!(s.status, MilpStatus::LimitUnknown);
        assert!(s.status.limit_hit());
        let full = solve_milp(&milp, &MilpOptions::default()).unwrap();
        assert_eq!(full.objective_value, 2.0);
    }

    #[test]
    fn invalid_binary_bounds_rejected() {
        let mut lp = LpProblem::new(1);
        lp.bounds = vec![(0.0, 2.0)];
        assert!(MilpProblem::new(lp, vec![0]).is_err());
    }

    #[test]
    fn gcd_of_steps() {
        assert!((float_gcd(0.5, 0.25).unwrap() - 0.25).abs() < 1e-12);
        assert!((float_gcd(2.0 / 8.0, 3.0 / 8.0).unwrap() - 0.125).abs() < 1e-12);
    }
}
