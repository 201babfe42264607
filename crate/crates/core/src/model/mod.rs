//! Compiles a network and scheduling parameters into mixed binary programs
//! and decodes solver output back into schedules.

mod builders;
mod params;
mod schedule;
mod varmap;

pub use builders::{
    big_m, build, build_dmc_opt, build_dmc_opt_cp, build_mc_all, build_mc_all_cp, build_uni_all,
    Formulation,
};
pub use params::{BigM, Demand, SchedParams};
pub use schedule::{encode_schedule, extract_schedule, Schedule, SlotEntry, SolutionView};
pub use varmap::{VarKind, VarMap};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which program a [`VarMap`] or [`Schedule`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationKind {
    /// Whole-group activation with power control.
    McAll,
    /// Per-link activation with power control.
    DmcOpt,
    /// Per-link activation at a constant transmit power.
    DmcOptCp,
    /// Whole-group activation at a constant transmit power.
    McAllCp,
    /// Per-link activation at constant power, at most one link per source
    /// and slot.
    UniAll,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 5] = [
        FormulationKind::McAll,
        FormulationKind::DmcOpt,
        FormulationKind::DmcOptCp,
        FormulationKind::McAllCp,
        FormulationKind::UniAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulationKind::McAll => "mc-all",
            FormulationKind::DmcOpt => "dmc-opt",
            FormulationKind::DmcOptCp => "dmc-opt-cp",
            FormulationKind::McAllCp => "mc-all-cp",
            FormulationKind::UniAll => "uni-all",
        }
    }

    /// All links of a group switch together.
    pub fn is_group_kind(self) -> bool {
        matches!(self, FormulationKind::McAll | FormulationKind::McAllCp)
    }

    /// Transmit powers are decision variables.
    pub fn has_power_control(self) -> bool {
        matches!(self, FormulationKind::McAll | FormulationKind::DmcOpt)
    }
}

impl fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormulationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown formulation kind '{s}'")))
    }
}
