use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::NetworkInstance;

/// Required number of active slots per point-to-point link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Demand {
    Uniform(u32),
    /// Indexed `[source][member]`.
    PerLink(Vec<Vec<u32>>),
}

impl Demand {
    pub fn link(&self, source: usize, member: usize) -> u32 {
        match self {
            Demand::Uniform(b) => *b,
            Demand::PerLink(m) => m[source][member],
        }
    }

    /// Per-group requirement for whole-group formulations: the largest
    /// per-link demand of the group.
    pub fn group(&self, source: usize, group_size: usize) -> u32 {
        (0..group_size).map(|j| self.link(source, j)).max().unwrap_or(0)
    }

    fn check_shape(&self, instance: &NetworkInstance) -> Result<()> {
        if let Demand::PerLink(m) = self {
            if m.len() != instance.num_sources()
                || m.iter().zip(instance.groups()).any(|(r, g)| r.len() != g.len())
            {
                return Err(Error::Build("demand matrix does not match the group sizes".into()));
            }
        }
        Ok(())
    }
}

/// Big-M constant of the SINR rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BigM {
    Auto,
    Fixed(f64),
}

/// Scheduling parameters shared by all formulations. Powers are in mW and
/// `beta` is a linear ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedParams {
    pub slots: usize,
    pub beta: f64,
    pub demand: Demand,
    pub p_slot_max: f64,
    pub p_slot_min: f64,
    /// Per-source total over all slots; `None` means `slots * p_slot_max`.
    pub p_budget: Option<f64>,
    pub const_power: f64,
    pub delta: BigM,
}

impl SchedParams {
    /// Evaluation defaults: beta = 10 (10 dB), 300 mW slot cap, 1% of that as
    /// the floor, 30% as the constant power, automatic big-M and a
    /// non-binding budget.
    pub fn new(slots: usize, demand: u32) -> Self {
        Self {
            slots,
            beta: 10.0,
            demand: Demand::Uniform(demand),
            p_slot_max: 300.0,
            p_slot_min: 3.0,
            p_budget: None,
            const_power: 90.0,
            delta: BigM::Auto,
        }
    }

    pub fn budget(&self) -> f64 {
        self.p_budget.unwrap_or(self.slots as f64 * self.p_slot_max)
    }

    pub fn validate(&self, instance: &NetworkInstance) -> Result<()> {
        let fail = |m: String| Err(Error::Build(m));
        if self.slots < 1 {
            return fail("slot count must be >= 1".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be > 0, got {}", self.beta));
        }
        self.demand.check_shape(instance)?;
        for i in 0..instance.num_sources() {
            for j in 0..instance.group_size(i) {
                let b = self.demand.link(i, j);
                if b < 1 || b as usize > self.slots {
                    return fail(format!(
                        "demand of link ({i}, {j}) is {b}, must lie in [1, {}]",
                        self.slots
                    ));
                }
            }
        }
        if !(self.p_slot_min > 0.0 && self.p_slot_min < self.p_slot_max && self.p_slot_max.is_finite()) {
            return fail(format!(
                "need 0 < p_slot_min < p_slot_max, got {} and {}",
                self.p_slot_min, self.p_slot_max
            ));
        }
        if !(self.budget() > 0.0 && self.budget().is_finite()) {
            return fail(format!("power budget must be > 0, got {}", self.budget()));
        }
        if !(self.const_power > 0.0 && self.const_power <= self.p_slot_max) {
            return fail(format!(
                "constant power must lie in (0, {}], got {}",
                self.p_slot_max, self.const_power
            ));
        }
        if let BigM::Fixed(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return fail(format!("big-M must be positive and finite, got {d}"));
            }
        }
        Ok(())
    }
}
