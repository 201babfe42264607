//! Independent audit of schedules against the physical model, and exact
//! optima of the constant-power programs by exhaustive enumeration.
//!
//! Nothing here touches the LP encoding: SINR is evaluated as a ratio and
//! only for links that are actually active.

use crate::error::{Error, Result};
use crate::model::{FormulationKind, SchedParams, Schedule};
use crate::net::NetworkInstance;

/// Relative tolerance of the SINR check.
pub const SINR_REL_TOL: f64 = 1e-7;
const BOUND_REL_TOL: f64 = 1e-9;
/// Largest binary count [`brute_force_opt`] will enumerate.
pub const MAX_ENUMERATED_BINARIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub sinr_ok: bool,
    /// Minimum of `sinr - beta` over active links; `+inf` when nothing is
    /// active.
    pub worst_sinr_margin: f64,
    /// Per source: total power within the budget.
    pub budget_ok: Vec<bool>,
    /// Per `[source][member]`: active in at least the demanded slot count.
    pub demand_ok: Vec<Vec<bool>>,
    /// Every power in `[0, p_slot_max]`, zero for sources serving nobody in a
    /// slot, and at least `p_slot_min` for transmitting sources of per-link
    /// power-controlled schedules.
    pub power_bounds_ok: bool,
    pub throughput: f64,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.sinr_ok
            && self.power_bounds_ok
            && self.budget_ok.iter().all(|&b| b)
            && self.demand_ok.iter().flatten().all(|&b| b)
    }

    /// Human-readable list of failed checks.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.sinr_ok {
            out.push(format!("SINR below threshold (worst margin {:.6})", self.worst_sinr_margin));
        }
        if !self.power_bounds_ok {
            out.push("transmit power out of bounds".into());
        }
        for (i, ok) in self.budget_ok.iter().enumerate() {
            if !ok {
                out.push(format!("source {i} exceeds its power budget"));
            }
        }
        for (i, row) in self.demand_ok.iter().enumerate() {
            for (j, ok) in row.iter().enumerate() {
                if !ok {
                    out.push(format!("link ({i}, {j}) misses its slot demand"));
                }
            }
        }
        out
    }
}

/// Destination receptions per slot.
pub fn throughput(schedule: &Schedule) -> f64 {
    schedule.throughput()
}

pub fn verify_schedule(
    instance: &NetworkInstance,
    schedule: &Schedule,
    params: &SchedParams,
) -> Result<VerificationReport> {
    schedule.check_shape()?;
    if schedule.group_sizes != instance.group_sizes() {
        return Err(Error::Input(format!(
            "schedule groups {:?} do not match instance groups {:?}",
            schedule.group_sizes,
            instance.group_sizes()
        )));
    }
    if let crate::model::Demand::PerLink(m) = &params.demand {
        if m.len() != instance.num_sources() || m.iter().zip(instance.groups()).any(|(r, g)| r.len() != g.len()) {
            return Err(Error::Input("demand matrix does not match the group sizes".into()));
        }
    }
    let n = instance.num_sources();
    let beta = params.beta;
    let p_max = params.p_slot_max * (1.0 + BOUND_REL_TOL);
    let p_min = params.p_slot_min * (1.0 - BOUND_REL_TOL);

    let mut worst = f64::INFINITY;
    let mut power_bounds_ok = true;
    for (t, powers) in schedule.powers.iter().enumerate() {
        for (i, &p) in powers.iter().enumerate() {
            let tx = schedule.transmits(t, i);
            let in_range = p.is_finite() && p >= 0.0 && p <= p_max;
            let idle_ok = tx || p == 0.0;
            let floor_ok = !(tx && schedule.kind == FormulationKind::DmcOpt) || p >= p_min;
            power_bounds_ok &= in_range && idle_ok && floor_ok;
        }
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            continue;
        }
        for i in 0..n {
            for (j, &d) in instance.group(i).iter().enumerate() {
                if schedule.activations[t][i][j] {
                    worst = worst.min(instance.sinr_unchecked(powers, i, d) - beta);
                }
            }
        }
    }
    let sinr_ok = worst >= -beta * SINR_REL_TOL && power_bounds_ok_for_sinr(schedule);

    let budget = params.budget() * (1.0 + BOUND_REL_TOL);
    let budget_ok = (0..n)
        .map(|i| schedule.powers.iter().map(|row| row[i]).sum::<f64>() <= budget)
        .collect();
    let demand_ok = (0..n)
        .map(|i| {
            (0..instance.group_size(i))
                .map(|j| {
                    let count = (0..schedule.slots()).filter(|&t| schedule.activations[t][i][j]).count();
                    count >= params.demand.link(i, j) as usize
                })
                .collect()
        })
        .collect();
    Ok(VerificationReport {
        sinr_ok,
        worst_sinr_margin: worst,
        budget_ok,
        demand_ok,
        power_bounds_ok,
        throughput: schedule.throughput(),
    })
}

/// Powers that are not finite and non-negative make the SINR undefined.
fn power_bounds_ok_for_sinr(schedule: &Schedule) -> bool {
    schedule.powers.iter().flatten().all(|p| p.is_finite() && *p >= 0.0)
}

/// Exact optimum of a constant-power program by enumerating every binary
/// assignment and keeping those that pass [`verify_schedule`] and the
/// kind's structural rules.
///
/// Returns `None` when no assignment is feasible. Among optimal schedules
/// the one with the smallest assignment index is returned.
pub fn brute_force_opt(
    instance: &NetworkInstance,
    params: &SchedParams,
    kind: FormulationKind,
) -> Result<Option<(f64, Schedule)>> {
    if kind.has_power_control() {
        return Err(Error::UnsupportedKind(format!(
            "{kind} has continuous powers and cannot be enumerated"
        )));
    }
    params.validate(instance)?;
    let n = instance.num_sources();
    let t = params.slots;
    let sizes = instance.group_sizes();
    let links: usize = sizes.iter().sum();
    let binaries = match kind {
        FormulationKind::McAllCp => n * t,
        _ => links * t + n * t,
    };
    if binaries > MAX_ENUMERATED_BINARIES {
        return Err(Error::Size { binaries, limit: MAX_ENUMERATED_BINARIES });
    }

    let mut best: Option<(f64, Schedule)> = None;
    let mut schedule = Schedule::empty(kind, t, &sizes);
    for mask in 0u64..(1u64 << binaries) {
        let bit = |k: usize| mask >> k & 1 == 1;
        let mut k = 0;
        let mut structural_ok = true;
        match kind {
            FormulationKind::McAllCp => {
                for slot in 0..t {
                    for i in 0..n {
                        let on = bit(k);
                        k += 1;
                        schedule.activations[slot][i].iter_mut().for_each(|a| *a = on);
                        schedule.powers[slot][i] = if on { params.const_power } else { 0.0 };
                    }
                }
            }
            _ => {
                for slot in 0..t {
                    for (i, &size) in sizes.iter().enumerate() {
                        for j in 0..size {
                            schedule.activations[slot][i][j] = bit(k);
                            k += 1;
                        }
                    }
                }
                for slot in 0..t {
                    for i in 0..n {
                        let on = bit(k);
                        k += 1;
                        schedule.powers[slot][i] = if on { params.const_power } else { 0.0 };
                        let served = schedule.activations[slot][i].iter().filter(|&&a| a).count();
                        if served > 0 && !on {
                            structural_ok = false;
                        }
                        if kind == FormulationKind::UniAll && served > 1 {
                            structural_ok = false;
                        }
                    }
                }
            }
        }
        if !structural_ok {
            continue;
        }
        let value = schedule.throughput();
        if best.as_ref().is_some_and(|(b, _)| value <= *b) {
            continue;
        }
        if verify_schedule(instance, &schedule, params)?.is_valid() {
            best = Some((value, schedule.clone()));
        }
    }
    Ok(best)
}
