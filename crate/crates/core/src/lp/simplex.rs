//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Every row `a x (<=|>=|=) b` becomes `a x + s = b` with the slack bounded
//! by the relation. Rows whose initial slack is out of bounds get an
//! artificial column, and phase one drives the artificials to zero.
//! Fixed columns are substituted into the right-hand side before solving and
//! every remaining row is scaled to unit max-norm.

use crate::error::{Error, Result};

use super::{LpProblem, LpSolution, LpStatus, Relation, DEFAULT_TOLERANCE};

/// Entering-variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest eligible index for both entering and leaving variables.
    Bland,
    /// Largest reduced cost, switching to [`PivotRule::Bland`] while a run of
    /// degenerate pivots lasts. Deterministic and cycle-free.
    DantzigBlandFallback,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub tolerance: f64,
    pub pivot_rule: PivotRule,
    /// Defaults to a size-dependent cap when `None`.
    pub max_iterations: Option<usize>,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            pivot_rule: PivotRule::DantzigBlandFallback,
            max_iterations: None,
            refactor_every: 100,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const REL_PIVOT_TOL: f64 = 1e-7;
const HARRIS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 30;

/// Solves `problem` (maximization) to the given feasibility tolerance.
pub fn solve_lp(problem: &LpProblem, tolerance: f64) -> Result<LpSolution> {
    solve_lp_with(problem, &SimplexOptions { tolerance, ..Default::default() })
}

pub fn solve_lp_with(problem: &LpProblem, options: &SimplexOptions) -> Result<LpSolution> {
    problem.validate()?;
    if !(options.tolerance > 0.0 && options.tolerance.is_finite()) {
        return Err(Error::Input(format!("tolerance must be positive, got {}", options.tolerance)));
    }
    let tol = options.tolerance;
    let n_orig = problem.num_vars;
    let infeasible = |iterations| LpSolution {
        status: LpStatus::Infeasible,
        objective_value: f64::NAN,
        primal: vec![0.0; n_orig],
        duals: vec![0.0; problem.rows.len()],
        iterations,
    };

    // Column reduction: fixed variables move to the right-hand side.
    let mut col_of = vec![usize::MAX; n_orig];
    let mut orig_of = Vec::new();
    let mut fixed_value = vec![0.0; n_orig];
    for (j, &(lo, hi)) in problem.bounds.iter().enumerate() {
        if lo > hi + tol * (1.0 + lo.abs().max(hi.abs())) {
            return Ok(infeasible(0));
        }
        if hi <= lo {
            fixed_value[j] = lo;
        } else {
            col_of[j] = orig_of.len();
            orig_of.push(j);
        }
    }
    let n = orig_of.len();

    // Row reduction and scaling.
    let mut kept_rows = Vec::new();
    let mut rhs = Vec::new();
    let mut relations = Vec::new();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut dense = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched = Vec::new();
    for (r, row) in problem.rows.iter().enumerate() {
        let mut b = row.rhs;
        let mut magnitude = row.rhs.abs();
        for &(j, a) in &row.coeffs {
            let c = col_of[j];
            if c == usize::MAX {
                b -= a * fixed_value[j];
                magnitude += (a * fixed_value[j]).abs();
            } else {
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                dense[c] += a;
            }
        }
        touched.sort_unstable();
        let max_abs = touched.iter().map(|&c| dense[c].abs()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            for &c in &touched {
                dense[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            // Relative to the residual itself plus the cancellation error of
            // the substitution, not to the (possibly big-M sized) rhs.
            let slack = tol * (1.0 + b.abs()) + 4.0 * f64::EPSILON * magnitude;
            let violated = match row.relation {
                Relation::Le => b < -slack,
                Relation::Ge => b > slack,
                Relation::Eq => b.abs() > slack,
            };
            if violated {
                return Ok(infeasible(0));
            }
            continue;
        }
        let m_idx = kept_rows.len();
        for &c in &touched {
            let v = dense[c];
            if v != 0.0 {
                columns[c].push((m_idx, v));
            }
            dense[c] = 0.0;
            seen[c] = false;
        }
        touched.clear();
        kept_rows.push(r);
        rhs.push(b);
        relations.push(row.relation);
    }
    let m = kept_rows.len();
    let (row_scale, col_scale) = equilibrate(&mut columns, m);
    for (b, s) in rhs.iter_mut().zip(&row_scale) {
        *b *= s;
    }

    let mut cost2 = vec![0.0; n + m];
    let mut lb = Vec::with_capacity(n + m);
    let mut ub = Vec::with_capacity(n + m);
    for (c, &j) in orig_of.iter().enumerate() {
        cost2[c] = problem.objective[j] * col_scale[c];
        lb.push(problem.bounds[j].0 / col_scale[c]);
        ub.push(problem.bounds[j].1 / col_scale[c]);
    }
    for rel in &relations {
        let (l, u) = match rel {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        };
        lb.push(l);
        ub.push(u);
    }

    let mut tableau = Simplex {
        m,
        n,
        columns,
        artificial_sign: Vec::new(),
        lb,
        ub,
        x: vec![0.0; n + m],
        state: vec![VarState::AtLower; n + m],
        basis: vec![0; m],
        binv: vec![vec![0.0; m]; m],
        rhs,
        rule: options.pivot_rule,
        iterations: 0,
        max_iterations: options.max_iterations.unwrap_or(20_000 + 100 * (n + m)),
        refactor_every: options.refactor_every.max(1),
        since_refactor: 0,
    };

    // Initial nonbasic structurals sit at a finite bound when one exists.
    for c in 0..n {
        let (l, u) = (tableau.lb[c], tableau.ub[c]);
        let (v, st) = if l.is_finite() {
            (l, VarState::AtLower)
        } else if u.is_finite() {
            (u, VarState::AtUpper)
        } else {
            (0.0, VarState::Free)
        };
        tableau.x[c] = v;
        tableau.state[c] = st;
    }
    let mut activity = vec![0.0; m];
    for c in 0..n {
        let v = tableau.x[c];
        if v != 0.0 {
            for &(r, a) in &tableau.columns[c] {
                activity[r] += a * v;
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for r in 0..m {
        let slack = n + r;
        let s = tableau.rhs[r] - activity[r];
        let (l, u) = (tableau.lb[slack], tableau.ub[slack]);
        if s >= l - tol && s <= u + tol {
            tableau.x[slack] = s;
            tableau.state[slack] = VarState::Basic(r);
            tableau.basis[r] = slack;
            tableau.binv[r][r] = 1.0;
        } else {
            let (bound, st) = if s > u { (u, VarState::AtUpper) } else { (l, VarState::AtLower) };
            tableau.x[slack] = bound;
            tableau.state[slack] = st;
            let sign = if s > bound { 1.0 } else { -1.0 };
            let art = tableau.lb.len();
            tableau.artificial_sign.push((r, sign));
            tableau.lb.push(0.0);
            tableau.ub.push(f64::INFINITY);
            tableau.x.push((s - bound).abs());
            tableau.state.push(VarState::Basic(r));
            tableau.basis[r] = art;
            tableau.binv[r][r] = sign;
        }
    }

    let num_art = tableau.artificial_sign.len();
    if num_art > 0 {
        let mut cost1 = vec![0.0; n + m + num_art];
        for a in 0..num_art {
            cost1[n + m + a] = -1.0;
        }
        match tableau.run(&cost1)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => unreachable!("phase one objective is bounded above by zero"),
        }
        let infeasibility: f64 = (0..num_art).map(|a| tableau.x[n + m + a]).fold(0.0, f64::max);
        if infeasibility > tol {
            return Ok(infeasible(tableau.iterations));
        }
        for a in 0..num_art {
            let col = n + m + a;
            tableau.ub[col] = 0.0;
            if !matches!(tableau.state[col], VarState::Basic(_)) {
                tableau.x[col] = 0.0;
                tableau.state[col] = VarState::AtLower;
            }
        }
    }
    cost2.resize(n + m + num_art, 0.0);
    let end = tableau.run(&cost2)?;

    let mut primal = fixed_value;
    for (c, &j) in orig_of.iter().enumerate() {
        let (lo, hi) = problem.bounds[j];
        primal[j] = (tableau.x[c] * col_scale[c]).clamp(lo, hi);
    }
    if end == PhaseEnd::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: f64::INFINITY,
            primal,
            duals: vec![0.0; problem.rows.len()],
            iterations: tableau.iterations,
        });
    }
    let y = tableau.row_prices(&cost2);
    let mut duals = vec![0.0; problem.rows.len()];
    for (k, &r) in kept_rows.iter().enumerate() {
        duals[r] = y[k] * row_scale[k];
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: problem.objective_value(&primal),
        primal,
        duals,
        iterations: tableau.iterations,
    })
}

/// Geometric-mean row and column scaling by powers of two, finished with a
/// pass that brings every row to max-norm in `(0.5, 1]`. Returns the row and
/// column factors; scaled entries are `row[i] * a_ij * col[j]`.
fn equilibrate(columns: &mut [Vec<(usize, f64)>], m: usize) -> (Vec<f64>, Vec<f64>) {
    let pow2 = |v: f64| 2f64.powi(v.log2().round() as i32);
    let n = columns.len();
    let mut row = vec![1.0; m];
    let mut col = vec![1.0; n];
    let row_extremes = |columns: &[Vec<(usize, f64)>], row: &[f64], col: &[f64]| {
        let mut ext = vec![(f64::INFINITY, 0.0f64); m];
        for (c, entries) in columns.iter().enumerate() {
            for &(r, a) in entries {
                let v = (a * row[r] * col[c]).abs();
                ext[r] = (ext[r].0.min(v), ext[r].1.max(v));
            }
        }
        ext
    };
    for _ in 0..4 {
        for (r, (lo, hi)) in row_extremes(columns, &row, &col).into_iter().enumerate() {
            if hi > 0.0 {
                row[r] *= pow2(1.0 / (lo * hi).sqrt());
            }
        }
        for (c, entries) in columns.iter().enumerate() {
            let (lo, hi) = entries
                .iter()
                .map(|&(r, a)| (a * row[r] * col[c]).abs())
                .fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(v), h.max(v)));
            if hi > 0.0 {
                col[c] *= pow2(1.0 / (lo * hi).sqrt());
            }
        }
    }
    for (r, (_, hi)) in row_extremes(columns, &row, &col).into_iter().enumerate() {
        if hi > 0.0 {
            row[r] *= 2f64.powi(-(hi.log2().ceil() as i32));
        }
    }
    for (c, entries) in columns.iter_mut().enumerate() {
        for (r, a) in entries.iter_mut() {
            *a *= row[*r] * col[c];
        }
    }
    (row, col)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free column held at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex {
    m: usize,
    n: usize,
    /// Sparse structural columns over the scaled rows.
    columns: Vec<Vec<(usize, f64)>>,
    /// `(row, sign)` of each artificial column, in column order after slacks.
    artificial_sign: Vec<(usize, f64)>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    rule: PivotRule,
    iterations: usize,
    max_iterations: usize,
    refactor_every: usize,
    since_refactor: usize,
}

impl Simplex {
    fn num_cols(&self) -> usize {
        self.lb.len()
    }

    fn for_each_entry(&self, col: usize, mut f: impl FnMut(usize, f64)) {
        if col < self.n {
            for &(r, a) in &self.columns[col] {
                f(r, a);
            }
        } else if col < self.n + self.m {
            f(col - self.n, 1.0);
        } else {
            let (r, s) = self.artificial_sign[col - self.n - self.m];
            f(r, s);
        }
    }

    fn row_prices(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[r]) {
                    *yk += cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, col: usize, cost: &[f64], y: &[f64]) -> f64 {
        let mut d = cost[col];
        self.for_each_entry(col, |r, a| d -= y[r] * a);
        d
    }

    fn choose_entering(&self, cost: &[f64], y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for col in 0..self.num_cols() {
            let st = self.state[col];
            if matches!(st, VarState::Basic(_)) || self.ub[col] <= self.lb[col] {
                continue;
            }
            let d = self.reduced_cost(col, cost, y);
            let eligible = match st {
                VarState::AtLower => d > DUAL_TOL,
                VarState::AtUpper => d < -DUAL_TOL,
                VarState::Free => d.abs() > DUAL_TOL,
                VarState::Basic(_) => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((col, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((col, d));
            }
        }
        best
    }

    fn run(&mut self, cost: &[f64]) -> Result<PhaseEnd> {
        let mut degenerate_streak = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
            let y = self.row_prices(cost);
            let bland = match self.rule {
                PivotRule::Bland => true,
                PivotRule::DantzigBlandFallback => degenerate_streak >= DEGENERATE_STREAK,
            };
            let Some((q, d)) = self.choose_entering(cost, &y, bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            self.iterations += 1;
            let dir = if d > 0.0 { 1.0 } else { -1.0 };

            let mut w = vec![0.0; self.m];
            self.for_each_entry(q, |k, a| {
                for (r, wr) in w.iter_mut().enumerate() {
                    *wr += self.binv[r][k] * a;
                }
            });

            // Harris two-pass ratio test. `None` as leaving row means a bound
            // flip.
            let w_max = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let piv_tol = PIVOT_TOL.max(REL_PIVOT_TOL * w_max);
            let ratio = |r: usize, slack: f64| -> Option<f64> {
                let delta = dir * w[r];
                let col = self.basis[r];
                if delta > piv_tol && self.lb[col].is_finite() {
                    Some((self.x[col] - self.lb[col] + slack) / delta)
                } else if delta < -piv_tol && self.ub[col].is_finite() {
                    Some((self.ub[col] - self.x[col] + slack) / -delta)
                } else {
                    None
                }
            };
            let relaxed = (0..self.m).filter_map(|r| ratio(r, HARRIS_TOL)).fold(f64::INFINITY, f64::min);
            let mut leaving: Option<usize> = None;
            let mut theta = f64::INFINITY;
            for r in 0..self.m {
                let Some(exact) = ratio(r, 0.0) else { continue };
                if exact > relaxed {
                    continue;
                }
                let better = match leaving {
                    None => true,
                    Some(cur) if bland => self.basis[r] < self.basis[cur],
                    Some(cur) => w[r].abs() > w[cur].abs(),
                };
                if better {
                    leaving = Some(r);
                    theta = exact.max(0.0);
                }
            }
            let range = self.ub[q] - self.lb[q];
            if range <= theta {
                theta = range;
                leaving = None;
            }
            if !theta.is_finite() {
                return Ok(PhaseEnd::Unbounded);
            }
            if theta <= 1e-12 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }

            for (r, &wr) in w.iter().enumerate() {
                if wr != 0.0 {
                    let col = self.basis[r];
                    self.x[col] -= dir * theta * wr;
                }
            }
            match leaving {
                None => {
                    if dir > 0.0 {
                        self.x[q] = self.ub[q];
                        self.state[q] = VarState::AtUpper;
                    } else {
                        self.x[q] = self.lb[q];
                        self.state[q] = VarState::AtLower;
                    }
                }
                Some(p) => {
                    self.x[q] += dir * theta;
                    let out = self.basis[p];
                    if dir * w[p] > 0.0 {
                        self.x[out] = self.lb[out];
                        self.state[out] = VarState::AtLower;
                    } else {
                        self.x[out] = self.ub[out];
                        self.state[out] = VarState::AtUpper;
                    }
                    self.basis[p] = q;
                    self.state[q] = VarState::Basic(p);
                    self.pivot(p, &w);
                    self.since_refactor += 1;
                    if self.since_refactor >= self.refactor_every {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    fn pivot(&mut self, p: usize, w: &[f64]) {
        let inv = 1.0 / w[p];
        let mut pivot_row = std::mem::take(&mut self.binv[p]);
        for v in pivot_row.iter_mut() {
            *v *= inv;
        }
        for (r, row) in self.binv.iter_mut().enumerate() {
            if r == p {
                continue;
            }
            let f = w[r];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        self.binv[p] = pivot_row;
    }

    /// Recomputes the basis inverse from scratch and the basic values from
    /// the nonbasic ones.
    fn refactor(&mut self) -> Result<()> {
        self.since_refactor = 0;
        let m = self.m;
        let mut a = vec![vec![0.0; 2 * m]; m];
        for (p, &col) in self.basis.iter().enumerate() {
            self.for_each_entry(col, |r, v| a[r][p] = v);
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[m + r] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()).then(j.cmp(&i)))
                .expect("non-empty range");
            if a[piv][c].abs() < 1e-13 {
                return Err(Error::Input("basis became numerically singular".into()));
            }
            a.swap(c, piv);
            let inv = 1.0 / a[c][c];
            for v in a[c].iter_mut() {
                *v *= inv;
            }
            let pivot_row = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c {
                    let f = row[c];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&pivot_row) {
                            *v -= f * pv;
                        }
                    }
                }
            }
        }
        // Row p of B^-1 corresponds to basis position p.
        for (p, row) in a.into_iter().enumerate() {
            self.binv[p] = row[m..].to_vec();
        }
        let mut resid = self.rhs.clone();
        for col in 0..self.num_cols() {
            if matches!(self.state[col], VarState::Basic(_)) {
                continue;
            }
            let v = self.x[col];
            if v != 0.0 {
                self.for_each_entry(col, |r, a| resid[r] -= a * v);
            }
        }
        for p in 0..m {
            let v: f64 = self.binv[p].iter().zip(&resid).map(|(b, r)| b * r).sum();
            self.x[self.basis[p]] = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{check_solution, Row};

    fn solve(lp: &LpProblem) -> LpSolution {
        solve_lp(lp, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn symmetric_vertex() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.bounds = vec![(0.0, 1.0); 2];
        lp.add_row(Row::le(vec![(0, 1.0), (1, 1.0)], 1.0));
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_row_is_infeasible() {
        let mut lp = LpProblem::new(1);
        lp.objective = vec![1.0];
        lp.add_row(Row::le(vec![(0, 1.0)], -1.0));
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn crossed_bounds_are_infeasible() {
        let mut lp = LpProblem::new(1);
        lp.bounds = vec![(0.0, -1.0)];
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LpProblem::new(1);
        lp.objective = vec![1.0];
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut lp = LpProblem::new(1);
        lp.add_row(Row::le(vec![(0, f64::NAN)], 1.0));
        assert!(matches!(solve_lp(&lp, 1e-7), Err(Error::Input(_))));
    }

    #[test]
    fn textbook_example() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LpProblem::new(2);
        lp.objective = vec![3.0, 5.0];
        lp.add_row(Row::le(vec![(0, 1.0)], 4.0));
        lp.add_row(Row::le(vec![(1, 2.0)], 12.0));
        lp.add_row(Row::le(vec![(0, 3.0), (1, 2.0)], 18.0));
        for rule in [PivotRule::Bland, PivotRule::DantzigBlandFallback] {
            let s = solve_lp_with(&lp, &SimplexOptions { pivot_rule: rule, ..Default::default() }).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective_value - 36.0).abs() < 1e-9);
            assert!((s.primal[0] - 2.0).abs() < 1e-9 && (s.primal[1] - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // max -x - y, x + y = 4, x - y >= 1, x,y >= 0 -> objective -4
        let mut lp = LpProblem::new(2);
        lp.objective = vec![-1.0, -2.0];
        lp.add_row(Row::eq(vec![(0, 1.0), (1, 1.0)], 4.0));
        lp.add_row(Row::ge(vec![(0, 1.0), (1, -1.0)], 1.0));
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        // Best is y = 0, x = 4.
        assert!((s.objective_value + 4.0).abs() < 1e-9, "{}", s.objective_value);
        let r = check_solution(&lp, &s.primal).unwrap();
        assert!(r.is_feasible(1e-9));
    }

    #[test]
    fn fixed_variables_are_substituted() {
        let mut lp = LpProblem::new(2);
        lp.objective = vec![1.0, 1.0];
        lp.bounds = vec![(1.0, 1.0), (0.0, 10.0)];
        lp.add_row(Row::le(vec![(0, 1e8), (1, 1.0)], 1e8 + 2.5));
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[1] - 2.5).abs() < 1e-6);
        assert_eq!(s.primal[0], 1.0);
    }

    #[test]
    fn free_variable() {
        // max -|x| style: max y s.t. y <= x + 1, y <= -x + 1, x free.
        let mut lp = LpProblem::new(2);
        lp.objective = vec![0.0, 1.0];
        lp.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)];
        lp.add_row(Row::le(vec![(1, 1.0), (0, -1.0)], 1.0));
        lp.add_row(Row::le(vec![(1, 1.0), (0, 1.0)], 1.0));
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_violated_row_after_substitution() {
        let mut lp = LpProblem::new(1);
        lp.bounds = vec![(2.0, 2.0)];
        lp.add_row(Row::le(vec![(0, 1.0)], 1.0));
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let mut lp = LpProblem::new(3);
        lp.objective = vec![1.0, 2.0, 3.0];
        lp.bounds = vec![(0.0, 4.0); 3];
        lp.add_row(Row::le(vec![(0, 1.0), (1, 1.0), (2, 1.0)], 5.0));
        lp.add_row(Row::ge(vec![(0, 1.0), (2, -1.0)], -1.0));
        let a = solve(&lp);
        let b = solve(&lp);
        assert_eq!(a, b);
    }
}
