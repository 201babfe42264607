//! LP-relaxation rounding heuristic for the power-controlled link-activation
//! program.
//!
//! The relaxation is solved once, then sources are fixed one per pass in
//! decreasing order of their fractional load `c_i = sum_{t,j} x[t][i][j]`.
//! A source's fixing activates its `m` most active (slot, member) pairs,
//! with `m = ceil(c_i)` first, `m = floor(c_i)` next, and then demand-aware
//! selections with `m` counting down to the total demand of the source.
//! A candidate is accepted when the program restricted to all fixings so far
//! is still feasible, and the restricted relaxation is re-solved to rank the
//! next source.
//!
//! By default feasibility is checked on the binary program itself
//! ([`ProbeKind::Exact`]). The relaxation alone is a weak test under big-M
//! rows: fractional activations of unfixed sources hide their interference,
//! so relaxation-only probes accept fixings that no later pass can complete.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpSolution, LpStatus, DEFAULT_TOLERANCE};
use crate::milp::{relax, solve_milp, MilpOptions, MilpProblem};
use crate::model::{build_dmc_opt, FormulationKind, SchedParams, Schedule, VarMap};
use crate::net::NetworkInstance;

const ROUND_TOL: f64 = 1e-6;

/// How many pairs a candidate fixing activates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    Ceil,
    Floor,
    /// Demand-aware selection with `m` below the floor value.
    Reduced,
    /// The source's part of the point found by the last exact probe.
    Completion,
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RoundingMode::Ceil => "ceil",
            RoundingMode::Floor => "floor",
            RoundingMode::Reduced => "reduced",
            RoundingMode::Completion => "completion",
        })
    }
}

/// What happens to a source's powers once its activations are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum PowerFixing {
    /// Pin to the relaxed powers of the solve that ranked the source, lifted
    /// to the per-slot floor.
    Relaxed,
    /// Pin to the powers of the restricted solve that accepted the fixing.
    #[default]
    Accepted,
    /// Leave powers to the restricted solves; the last one decides them.
    Free,
}

/// Final values for one source: activations `[slot][member]` and powers
/// `[slot]` in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFixing {
    pub activations: Vec<Vec<bool>>,
    /// `None` leaves the powers of active slots to the solver.
    pub powers: Option<Vec<f64>>,
}

impl SourceFixing {
    fn transmits(&self, slot: usize) -> bool {
        self.activations[slot].iter().any(|&a| a)
    }
}

/// Per-source view of an LP solution plus the fixings made so far.
#[derive(Debug, Clone)]
pub struct RoundingState {
    pub remaining: BTreeSet<usize>,
    /// `c_i` for every source; entries of fixed sources are kept for the
    /// record but never consulted.
    pub c_values: Vec<f64>,
    pub fixings: Vec<Option<SourceFixing>>,
    /// Relaxed activations `[source][slot][member]`.
    pub x_hat: Vec<Vec<Vec<f64>>>,
    /// Relaxed powers `[source][slot]`.
    pub p_hat: Vec<Vec<f64>>,
    pub lp: LpSolution,
}

impl RoundingState {
    /// Reads `x_hat`, `p_hat` and `c` off `lp` through `varmap`.
    pub fn from_lp(
        varmap: &VarMap,
        lp: LpSolution,
        remaining: BTreeSet<usize>,
        fixings: Vec<Option<SourceFixing>>,
    ) -> Result<Self> {
        if lp.status != LpStatus::Optimal {
            return Err(Error::State(format!("LP solution has status {:?}", lp.status)));
        }
        let sizes = varmap.group_sizes();
        let t = varmap.slots();
        let value = |col: Option<usize>| -> Result<f64> {
            col.map(|c| lp.primal[c])
                .ok_or_else(|| Error::State("variable map is not a link-activation map".into()))
        };
        let mut x_hat = Vec::with_capacity(sizes.len());
        let mut p_hat = Vec::with_capacity(sizes.len());
        for (i, &d) in sizes.iter().enumerate() {
            let mut xs = Vec::with_capacity(t);
            let mut ps = Vec::with_capacity(t);
            for slot in 0..t {
                xs.push((0..d).map(|j| value(varmap.link(slot, i, j))).collect::<Result<Vec<_>>>()?);
                ps.push(value(varmap.power(slot, i))?);
            }
            x_hat.push(xs);
            p_hat.push(ps);
        }
        let c_values = x_hat.iter().map(|xs| xs.iter().flatten().sum()).collect();
        Ok(Self { remaining, c_values, fixings, x_hat, p_hat, lp })
    }
}

/// Remaining source with the largest `c_i`, smallest index on ties.
pub fn rank_sources(state: &RoundingState) -> Result<usize> {
    let mut best: Option<usize> = None;
    for &i in &state.remaining {
        if best.is_none_or(|b| state.c_values[i] > state.c_values[b]) {
            best = Some(i);
        }
    }
    best.ok_or_else(|| Error::State("no sources remain to be fixed".into()))
}

/// A proposed fixing of one source.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub source: usize,
    pub mode: RoundingMode,
    pub m: usize,
    /// Selected `(slot, member)` pairs in selection order.
    pub pairs: Vec<(usize, usize)>,
    pub fixing: SourceFixing,
}

impl Candidate {
    /// An empty fixing schedules the source nowhere; feasibility then
    /// hinges on the demand rows.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn sorted_pairs(x: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        (0..x.len()).flat_map(|t| (0..x[t].len()).map(move |j| (t, j))).collect();
    // Stable sort keeps lexicographic order among equal values.
    pairs.sort_by(|&(t1, j1), &(t2, j2)| x[t2][j2].total_cmp(&x[t1][j1]));
    pairs
}

fn candidate_from_pairs(
    state: &RoundingState,
    source: usize,
    mode: RoundingMode,
    pairs: Vec<(usize, usize)>,
    params: &SchedParams,
) -> Candidate {
    let x = &state.x_hat[source];
    let mut activations: Vec<Vec<bool>> = x.iter().map(|row| vec![false; row.len()]).collect();
    for &(t, j) in &pairs {
        activations[t][j] = true;
    }
    let powers = (0..x.len())
        .map(|t| {
            if activations[t].iter().any(|&a| a) {
                state.p_hat[source][t].clamp(params.p_slot_min, params.p_slot_max)
            } else {
                0.0
            }
        })
        .collect();
    Candidate { source, mode, m: pairs.len(), pairs, fixing: SourceFixing { activations, powers: Some(powers) } }
}

/// Number of pairs for `mode`, capped at the pair count. A value within
/// `1e-6` of an integer counts as that integer in both modes.
pub fn rounded_count(c: f64, mode: RoundingMode, pairs: usize) -> usize {
    let m = match mode {
        RoundingMode::Ceil => (c - ROUND_TOL).ceil(),
        RoundingMode::Floor | RoundingMode::Reduced | RoundingMode::Completion => (c + ROUND_TOL).floor(),
    };
    (m.max(0.0) as usize).min(pairs)
}

/// The top-`m` fixing of `source` with `m` taken from `c_i` by `mode`.
pub fn round_source(
    state: &RoundingState,
    source: usize,
    mode: RoundingMode,
    params: &SchedParams,
) -> Result<Candidate> {
    if !state.remaining.contains(&source) {
        return Err(Error::State(format!("source {source} is already fixed")));
    }
    let pairs = sorted_pairs(&state.x_hat[source]);
    let m = rounded_count(state.c_values[source], mode, pairs.len());
    Ok(candidate_from_pairs(state, source, mode, pairs[..m].to_vec(), params))
}

/// Fixing of `m` pairs that first gives every member its demanded number of
/// slots (most active slots first) and fills the rest by activity.
fn demand_aware(state: &RoundingState, source: usize, m: usize, params: &SchedParams) -> Candidate {
    let x = &state.x_hat[source];
    let order = sorted_pairs(x);
    let members = x.first().map_or(0, Vec::len);
    let mut picked = vec![vec![false; members]; x.len()];
    let mut pairs = Vec::with_capacity(m);
    for j in 0..members {
        let need = params.demand.link(source, j) as usize;
        for &(t, jj) in order.iter().filter(|&&(_, jj)| jj == j).take(need) {
            picked[t][jj] = true;
            pairs.push((t, jj));
        }
    }
    for &(t, j) in &order {
        if pairs.len() >= m {
            break;
        }
        if !picked[t][j] {
            picked[t][j] = true;
            pairs.push((t, j));
        }
    }
    candidate_from_pairs(state, source, RoundingMode::Reduced, pairs, params)
}

/// How candidate fixings are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// Feasibility of the restricted relaxation.
    Relaxation,
    /// Feasibility of the restricted mixed binary program. Accepted fixings
    /// then always extend to a complete schedule, and the point found by the
    /// last accepted probe is offered as a final candidate.
    #[default]
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HeuristicOptions {
    pub probe: ProbeKind,
    pub power_fixing: PowerFixing,
}

impl HeuristicOptions {
    /// Relaxation probes with powers pinned to the relaxed values.
    pub fn relaxation_only() -> Self {
        Self { probe: ProbeKind::Relaxation, power_fixing: PowerFixing::Relaxed }
    }
}


/// The link-activation program with fixings applied as bounds.
#[derive(Debug, Clone)]
pub struct Restriction {
    problem: MilpProblem,
    varmap: VarMap,
}

impl Restriction {
    pub fn new(instance: &NetworkInstance, params: &SchedParams) -> Result<Self> {
        let f = build_dmc_opt(instance, params)?;
        Ok(Self { problem: f.problem, varmap: f.varmap })
    }

    pub fn varmap(&self) -> &VarMap {
        &self.varmap
    }

    /// The relaxation with every `Some` fixing pinned.
    pub fn restricted(&self, fixings: &[Option<SourceFixing>]) -> Result<LpProblem> {
        let vm = &self.varmap;
        if fixings.len() != vm.group_sizes().len() {
            return Err(Error::Input(format!(
                "{} fixings for {} sources",
                fixings.len(),
                vm.group_sizes().len()
            )));
        }
        let mut lp = relax(&self.problem);
        let mut pin = |col: usize, v: f64| lp.bounds[col] = (v, v);
        for (i, fixing) in fixings.iter().enumerate() {
            let Some(fix) = fixing else { continue };
            if fix.activations.len() != vm.slots() || fix.powers.as_ref().is_some_and(|p| p.len() != vm.slots()) {
                return Err(Error::Input(format!("fixing of source {i} has the wrong slot count")));
            }
            for slot in 0..vm.slots() {
                if fix.activations[slot].len() != vm.group_sizes()[i] {
                    return Err(Error::Input(format!("fixing of source {i} has the wrong group size")));
                }
                for (j, &a) in fix.activations[slot].iter().enumerate() {
                    pin(vm.link(slot, i, j).expect("link column"), if a { 1.0 } else { 0.0 });
                }
                let on = fix.transmits(slot);
                pin(vm.transmitter(slot, i).expect("transmitter column"), if on { 1.0 } else { 0.0 });
                let p = vm.power(slot, i).expect("power column");
                match &fix.powers {
                    Some(powers) => pin(p, if on { powers[slot] } else { 0.0 }),
                    None if !on => pin(p, 0.0),
                    None => {}
                }
            }
        }
        Ok(lp)
    }

    /// Optimal restricted relaxation, `None` when infeasible.
    pub fn solve_relaxed(&self, fixings: &[Option<SourceFixing>]) -> Result<Option<LpSolution>> {
        let sol = solve_lp(&self.restricted(fixings)?, DEFAULT_TOLERANCE)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol)),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Some feasible point of the restricted binary program, `None` when
    /// there is none.
    pub fn solve_exact(&self, fixings: &[Option<SourceFixing>]) -> Result<Option<Vec<f64>>> {
        let problem = MilpProblem::new(self.restricted(fixings)?, self.problem.binary_vars.clone())?;
        let options = MilpOptions { first_feasible: true, ..MilpOptions::default() };
        let sol = solve_milp(&problem, &options)?;
        Ok(sol.status.has_solution().then_some(sol.primal))
    }

    fn probe(&self, kind: ProbeKind, fixings: &[Option<SourceFixing>]) -> Result<Option<Vec<f64>>> {
        match kind {
            ProbeKind::Relaxation => Ok(self.solve_relaxed(fixings)?.map(|s| s.primal)),
            ProbeKind::Exact => self.solve_exact(fixings),
        }
    }

    /// Activations and powers of `source` in a full column vector.
    fn fixing_from_point(&self, point: &[f64], source: usize, params: &SchedParams) -> SourceFixing {
        let vm = &self.varmap;
        let activations: Vec<Vec<bool>> = (0..vm.slots())
            .map(|t| (0..vm.group_sizes()[source]).map(|j| point[vm.link(t, source, j).expect("link column")] > 0.5).collect())
            .collect();
        let powers = (0..vm.slots())
            .map(|t| {
                if activations[t].iter().any(|&a| a) {
                    point[vm.power(t, source).expect("power column")].clamp(params.p_slot_min, params.p_slot_max)
                } else {
                    0.0
                }
            })
            .collect();
        SourceFixing { activations, powers: Some(powers) }
    }
}

/// Outcome of [`feasibility_probe`].
#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub feasible: bool,
    pub solution: Option<LpSolution>,
}

/// Feasibility of the relaxed link-activation program with the given
/// sources fixed; sources with `None` stay free.
pub fn feasibility_probe(
    instance: &NetworkInstance,
    params: &SchedParams,
    fixings: &[Option<SourceFixing>],
) -> Result<ProbeOutcome> {
    let solution = Restriction::new(instance, params)?.solve_relaxed(fixings)?;
    Ok(ProbeOutcome { feasible: solution.is_some(), solution })
}

/// Whether the given fixings extend to a complete feasible schedule.
pub fn exact_feasibility_probe(
    instance: &NetworkInstance,
    params: &SchedParams,
    fixings: &[Option<SourceFixing>],
) -> Result<bool> {
    Ok(Restriction::new(instance, params)?.solve_exact(fixings)?.is_some())
}

/// One tried candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Attempt {
    pub mode: RoundingMode,
    pub m: usize,
    pub feasible: bool,
}

/// One outer pass: the source fixed, its load and how it was fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassRecord {
    pub pass: usize,
    pub source: usize,
    pub c_value: f64,
    pub mode: RoundingMode,
    pub m: usize,
    pub attempts: Vec<Attempt>,
    /// Objective of the restricted relaxation after the fixing.
    pub lp_objective: f64,
}

impl fmt::Display for PassRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} source={} c={:.6} mode={} m={} lp_objective={:.6} attempts=",
            self.pass, self.source, self.c_value, self.mode, self.m, self.lp_objective
        )?;
        for (k, a) in self.attempts.iter().enumerate() {
            let sep = if k == 0 { "" } else { "," };
            let outcome = if a.feasible { "ok" } else { "infeasible" };
            write!(f, "{sep}{}:{}:{outcome}", a.mode, a.m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicOutcome {
    pub schedule: Schedule,
    pub trace: Vec<PassRecord>,
    /// Objective of the unrestricted relaxation.
    pub root_objective: f64,
}

/// Runs the rounding heuristic with default options; see the module docs.
pub fn milp_relax_schedule(instance: &NetworkInstance, params: &SchedParams) -> Result<Schedule> {
    milp_relax_schedule_traced(instance, params, HeuristicOptions::default()).map(|o| o.schedule)
}

/// [`milp_relax_schedule`] with explicit options, returning the per-pass
/// trace as well.
pub fn milp_relax_schedule_traced(
    instance: &NetworkInstance,
    params: &SchedParams,
    options: HeuristicOptions,
) -> Result<HeuristicOutcome> {
    let restriction = Restriction::new(instance, params)?;
    let n = instance.num_sources();
    let mut fixings: Vec<Option<SourceFixing>> = vec![None; n];
    let root = restriction
        .solve_relaxed(&fixings)?
        .ok_or_else(|| Error::Infeasible("the relaxation has no feasible point".into()))?;
    let root_objective = root.objective_value;
    let mut completion = match options.probe {
        ProbeKind::Exact => Some(
            restriction
                .solve_exact(&fixings)?
                .ok_or_else(|| Error::Infeasible("no schedule meets every constraint".into()))?,
        ),
        ProbeKind::Relaxation => None,
    };
    let mut state = RoundingState::from_lp(restriction.varmap(), root, (0..n).collect(), fixings.clone())?;
    let mut trace = Vec::with_capacity(n);

    for pass in 0..n {
        let i = rank_sources(&state)?;
        let c = state.c_values[i];
        let mut candidates = vec![
            round_source(&state, i, RoundingMode::Ceil, params)?,
            round_source(&state, i, RoundingMode::Floor, params)?,
        ];
        let min_m: usize = (0..instance.group_size(i)).map(|j| params.demand.link(i, j) as usize).sum();
        let top = candidates[1].m.max(min_m);
        candidates.extend((min_m..=top).rev().map(|m| demand_aware(&state, i, m, params)));
        if let Some(point) = &completion {
            let fixing = restriction.fixing_from_point(point, i, params);
            let pairs: Vec<(usize, usize)> = (0..params.slots)
                .flat_map(|t| (0..instance.group_size(i)).map(move |j| (t, j)))
                .filter(|&(t, j)| fixing.activations[t][j])
                .collect();
            candidates.push(Candidate { source: i, mode: RoundingMode::Completion, m: pairs.len(), pairs, fixing });
        }

        let mut attempts = Vec::new();
        let mut tried: Vec<(Vec<(usize, usize)>, bool)> = Vec::new();
        let mut accepted: Option<(Candidate, Vec<f64>)> = None;
        for cand in candidates {
            let mut fixing = cand.fixing.clone();
            let pinned = cand.mode == RoundingMode::Completion || options.power_fixing == PowerFixing::Relaxed;
            if !pinned {
                fixing.powers = None;
            }
            let mut key = cand.pairs.clone();
            key.sort_unstable();
            let key = (key, pinned);
            if tried.contains(&key) {
                continue;
            }
            tried.push(key);
            fixings[i] = Some(fixing);
            let point = restriction.probe(options.probe, &fixings)?;
            attempts.push(Attempt { mode: cand.mode, m: cand.m, feasible: point.is_some() });
            if let Some(point) = point {
                accepted = Some((cand, point));
                break;
            }
        }
        let Some((cand, point)) = accepted else {
            return Err(Error::RoundingFailure { source_id: i });
        };
        if options.power_fixing == PowerFixing::Accepted {
            let fix = fixings[i].as_mut().expect("accepted fixing");
            fix.powers = restriction.fixing_from_point(&point, i, params).powers;
        }
        if options.probe == ProbeKind::Exact {
            completion = Some(point);
        }
        let sol = restriction
            .solve_relaxed(&fixings)?
            .ok_or_else(|| Error::State("accepted fixing left the relaxation infeasible".into()))?;
        trace.push(PassRecord {
            pass,
            source: i,
            c_value: c,
            mode: cand.mode,
            m: cand.m,
            attempts,
            lp_objective: sol.objective_value,
        });
        let mut remaining = state.remaining.clone();
        remaining.remove(&i);
        state = RoundingState::from_lp(restriction.varmap(), sol, remaining, fixings.clone())?;
    }

    let mut schedule = Schedule::empty(FormulationKind::DmcOpt, params.slots, &instance.group_sizes());
    for (i, fix) in fixings.iter().enumerate() {
        let fix = fix.as_ref().expect("every source is fixed after n passes");
        for t in 0..params.slots {
            schedule.activations[t][i].clone_from(&fix.activations[t]);
            schedule.powers[t][i] = match &fix.powers {
                _ if !fix.transmits(t) => 0.0,
                Some(p) => p[t],
                None => state.p_hat[i][t].clamp(params.p_slot_min, params.p_slot_max),
            };
        }
    }
    Ok(HeuristicOutcome { schedule, trace, root_objective })
}
