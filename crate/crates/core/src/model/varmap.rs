use std::collections::HashMap;

use super::FormulationKind;

/// Semantic meaning of one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Whole group of `source` active in `slot`.
    GroupActivation { slot: usize, source: usize },
    /// Link from `source` to its `member`-th destination active in `slot`.
    LinkActivation { slot: usize, source: usize, member: usize },
    /// Transmit power of `source` in `slot`, mW.
    Power { slot: usize, source: usize },
    /// `source` transmits in `slot`.
    Transmitter { slot: usize, source: usize },
}

impl VarKind {
    pub fn is_binary(self) -> bool {
        !matches!(self, VarKind::Power { .. })
    }

    pub fn is_activation(self) -> bool {
        matches!(self, VarKind::GroupActivation { .. } | VarKind::LinkActivation { .. })
    }
}

/// Bijection between column indices and [`VarKind`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct VarMap {
    kind: FormulationKind,
    slots: usize,
    group_sizes: Vec<usize>,
    entries: Vec<VarKind>,
    index: HashMap<VarKind, usize>,
}

impl VarMap {
    pub(crate) fn new(kind: FormulationKind, slots: usize, group_sizes: Vec<usize>) -> Self {
        Self { kind, slots, group_sizes, entries: Vec::new(), index: HashMap::new() }
    }

    pub(crate) fn push(&mut self, var: VarKind) -> usize {
        let col = self.entries.len();
        let prev = self.index.insert(var, col);
        assert!(prev.is_none(), "duplicate variable {var:?}");
        self.entries.push(var);
        col
    }

    pub fn kind(&self) -> FormulationKind {
        self.kind
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VarKind] {
        &self.entries
    }

    pub fn var(&self, col: usize) -> VarKind {
        self.entries[col]
    }

    pub fn col(&self, var: VarKind) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.entries.len()).filter(|&c| self.entries[c].is_binary()).collect()
    }

    pub fn activation_columns(&self) -> Vec<usize> {
        (0..self.entries.len()).filter(|&c| self.entries[c].is_activation()).collect()
    }

    pub fn link(&self, slot: usize, source: usize, member: usize) -> Option<usize> {
        self.col(VarKind::LinkActivation { slot, source, member })
    }

    pub fn group(&self, slot: usize, source: usize) -> Option<usize> {
        self.col(VarKind::GroupActivation { slot, source })
    }

    pub fn power(&self, slot: usize, source: usize) -> Option<usize> {
        self.col(VarKind::Power { slot, source })
    }

    pub fn transmitter(&self, slot: usize, source: usize) -> Option<usize> {
        self.col(VarKind::Transmitter { slot, source })
    }
}
