use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpSolution, LpStatus};
use crate::milp::MilpSolution;

use super::{FormulationKind, SchedParams, VarKind, VarMap};

/// Per-slot link activations and transmit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: FormulationKind,
    pub group_sizes: Vec<usize>,
    /// Indexed `[slot][source][member]`.
    pub activations: Vec<Vec<Vec<bool>>>,
    /// Indexed `[slot][source]`, mW.
    pub powers: Vec<Vec<f64>>,
}

impl Schedule {
    /// Nothing active, every power zero.
    pub fn empty(kind: FormulationKind, slots: usize, group_sizes: &[usize]) -> Self {
        Self {
            kind,
            group_sizes: group_sizes.to_vec(),
            activations: (0..slots).map(|_| group_sizes.iter().map(|&d| vec![false; d]).collect()).collect(),
            powers: vec![vec![0.0; group_sizes.len()]; slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.activations.len()
    }

    pub fn num_sources(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn is_active(&self, slot: usize, source: usize, member: usize) -> bool {
        self.activations[slot][source][member]
    }

    /// Whether `source` serves any destination in `slot`.
    pub fn transmits(&self, slot: usize, source: usize) -> bool {
        self.activations[slot][source].iter().any(|&a| a)
    }

    pub fn active_count(&self) -> usize {
        self.activations.iter().flatten().flatten().filter(|&&a| a).count()
    }

    /// Destination receptions per slot.
    pub fn throughput(&self) -> f64 {
        if self.slots() == 0 {
            return 0.0;
        }
        self.active_count() as f64 / self.slots() as f64
    }

    /// Checks that the tensors agree with `group_sizes`.
    pub fn check_shape(&self) -> Result<()> {
        if self.powers.len() != self.activations.len() {
            return Err(Error::Input("power and activation tensors have different slot counts".into()));
        }
        for (t, (acts, pw)) in self.activations.iter().zip(&self.powers).enumerate() {
            if acts.len() != self.group_sizes.len() || pw.len() != self.group_sizes.len() {
                return Err(Error::Input(format!("slot {t} has the wrong number of sources")));
            }
            for (i, a) in acts.iter().enumerate() {
                if a.len() != self.group_sizes[i] {
                    return Err(Error::Input(format!(
                        "slot {t} source {i} has {} members, expected {}",
                        a.len(),
                        self.group_sizes[i]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_entries(&self) -> Vec<SlotEntry> {
        (0..self.slots())
            .map(|t| SlotEntry {
                powers: self.powers[t].clone(),
                links: (0..self.num_sources())
                    .flat_map(|i| (0..self.group_sizes[i]).map(move |j| (i, j)))
                    .filter(|&(i, j)| self.activations[t][i][j])
                    .map(|(i, j)| [i, j])
                    .collect(),
            })
            .collect()
    }

    pub fn from_entries(kind: FormulationKind, group_sizes: &[usize], entries: &[SlotEntry]) -> Result<Self> {
        let mut s = Schedule::empty(kind, entries.len(), group_sizes);
        for (t, e) in entries.iter().enumerate() {
            if e.powers.len() != group_sizes.len() {
                return Err(Error::Input(format!(
                    "slot {t} lists {} powers, expected {}",
                    e.powers.len(),
                    group_sizes.len()
                )));
            }
            s.powers[t] = e.powers.clone();
            for &[i, j] in &e.links {
                if i >= group_sizes.len() || j >= group_sizes[i] {
                    return Err(Error::Input(format!("slot {t} lists unknown link ({i}, {j})")));
                }
                s.activations[t][i][j] = true;
            }
        }
        Ok(s)
    }
}

/// One slot of a schedule file: per-source powers (mW) and the active
/// `[source, member]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotEntry {
    pub powers: Vec<f64>,
    pub links: Vec<[usize; 2]>,
}

/// Solver output that can be decoded into a [`Schedule`].
pub trait SolutionView {
    fn values(&self) -> Result<&[f64]>;
    /// Whether binaries must already be integral.
    fn strict(&self) -> bool;
}

impl SolutionView for MilpSolution {
    fn values(&self) -> Result<&[f64]> {
        if !self.status.has_solution() {
            return Err(Error::Decode(format!("MILP solution has status {:?}", self.status)));
        }
        Ok(&self.primal)
    }

    fn strict(&self) -> bool {
        true
    }
}

impl SolutionView for LpSolution {
    fn values(&self) -> Result<&[f64]> {
        if self.status != LpStatus::Optimal {
            return Err(Error::Decode(format!("LP solution has status {:?}", self.status)));
        }
        Ok(&self.primal)
    }

    fn strict(&self) -> bool {
        false
    }
}

const INTEGRALITY_TOL: f64 = 1e-6;

/// Decodes a solution through its [`VarMap`].
///
/// Group activations are broadcast to every link of the group. A source that
/// serves no destination in a slot is given zero power. With an LP solution
/// binaries are rounded at one half; with a MILP solution a binary further
/// than `1e-6` from 0 or 1 is a decode error.
pub fn extract_schedule(varmap: &VarMap, solution: &impl SolutionView, params: &SchedParams) -> Result<Schedule> {
    let x = solution.values()?;
    if x.len() != varmap.len() {
        return Err(Error::Decode(format!(
            "solution has {} values, variable map has {}",
            x.len(),
            varmap.len()
        )));
    }
    let strict = solution.strict();
    let bit = |col: usize| -> Result<bool> {
        let v = x[col];
        if strict && (v - v.round()).abs() > INTEGRALITY_TOL {
            return Err(Error::Decode(format!("binary column {col} is fractional ({v})")));
        }
        Ok(v > 0.5)
    };
    let kind = varmap.kind();
    let mut s = Schedule::empty(kind, varmap.slots(), varmap.group_sizes());
    let mut on = vec![vec![false; s.num_sources()]; s.slots()];
    for (col, var) in varmap.entries().iter().enumerate() {
        match *var {
            VarKind::GroupActivation { slot, source } => {
                let active = bit(col)?;
                s.activations[slot][source].iter_mut().for_each(|a| *a = active);
                on[slot][source] = active;
            }
            VarKind::LinkActivation { slot, source, member } => {
                s.activations[slot][source][member] = bit(col)?;
            }
            VarKind::Transmitter { slot, source } => {
                on[slot][source] = bit(col)?;
            }
            VarKind::Power { slot, source } => {
                s.powers[slot][source] = x[col].clamp(0.0, params.p_slot_max);
            }
        }
    }
    if !kind.has_power_control() {
        for (t, row) in on.iter().enumerate() {
            for (i, &tx) in row.iter().enumerate() {
                s.powers[t][i] = if tx { params.const_power } else { 0.0 };
            }
        }
    }
    for t in 0..s.slots() {
        for i in 0..s.num_sources() {
            if !s.transmits(t, i) {
                s.powers[t][i] = 0.0;
            }
        }
    }
    Ok(s)
}

/// Inverse of [`extract_schedule`]: a full column vector whose activation
/// columns reproduce `schedule`, with transmitters set where a source serves
/// anyone and powers copied.
pub fn encode_schedule(varmap: &VarMap, schedule: &Schedule) -> Result<Vec<f64>> {
    if schedule.slots() != varmap.slots() || schedule.group_sizes != varmap.group_sizes() {
        return Err(Error::Input("schedule shape does not match the variable map".into()));
    }
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    Ok(varmap
        .entries()
        .iter()
        .map(|var| match *var {
            VarKind::GroupActivation { slot, source } => b(schedule.transmits(slot, source)),
            VarKind::LinkActivation { slot, source, member } => b(schedule.is_active(slot, source, member)),
            VarKind::Transmitter { slot, source } => b(schedule.transmits(slot, source)),
            VarKind::Power { slot, source } => schedule.powers[slot][source],
        })
        .collect())
}
