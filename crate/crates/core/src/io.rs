//! TOML files for instances, schedules and experiment configurations.
//!
//! An instance file:
//!
//! ```toml
//! path_loss_exponent = 3.0
//! noise_power = 0.1
//! group_sizes = [2, 2]
//! distances = [[0.5, 0.7, 0.9, 0.4], [0.8, 0.6, 0.3, 0.5]]
//! ```
//!
//! A schedule file lists, per slot, the per-source powers in mW and the
//! active `[source, member]` pairs:
//!
//! ```toml
//! kind = "dmc-opt"
//! group_sizes = [2, 2]
//!
//! [[slots]]
//! powers = [120.0, 0.0]
//! links = [[0, 0], [0, 1]]
//! ```

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FormulationKind, Schedule, SlotEntry};
use crate::net::NetworkInstance;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    path_loss_exponent: f64,
    noise_power: f64,
    group_sizes: Vec<usize>,
    distances: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    kind: FormulationKind,
    group_sizes: Vec<usize>,
    #[serde(default)]
    slots: Vec<SlotEntry>,
}

/// Parses TOML text, reporting failures with their line and column.
pub fn parse_toml<T: DeserializeOwned>(text: &str, path: Option<&Path>) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let location = e.span().map(|span| {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |k| k + 1) + 1;
            format!("line {line}, column {column}: ")
        });
        Error::Parse {
            path: path.map(Path::to_path_buf),
            message: format!("{}{}", location.unwrap_or_default(), e.message()),
        }
    })
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Input(format!("cannot serialize: {e}")))
}

pub fn instance_to_toml(instance: &NetworkInstance) -> Result<String> {
    to_toml(&InstanceFile {
        path_loss_exponent: instance.path_loss_exponent(),
        noise_power: instance.noise_power(),
        group_sizes: instance.group_sizes(),
        distances: instance.distances().to_vec(),
    })
}

pub fn instance_from_toml(text: &str, path: Option<&Path>) -> Result<NetworkInstance> {
    let f: InstanceFile = parse_toml(text, path)?;
    NetworkInstance::new(&f.group_sizes, f.distances, f.path_loss_exponent, f.noise_power)
}

pub fn save_instance(instance: &NetworkInstance, path: &Path) -> Result<()> {
    Ok(fs::write(path, instance_to_toml(instance)?)?)
}

pub fn load_instance(path: &Path) -> Result<NetworkInstance> {
    instance_from_toml(&read(path)?, Some(path))
}

pub fn schedule_to_toml(schedule: &Schedule) -> Result<String> {
    schedule.check_shape()?;
    to_toml(&ScheduleFile {
        kind: schedule.kind,
        group_sizes: schedule.group_sizes.clone(),
        slots: schedule.to_entries(),
    })
}

pub fn schedule_from_toml(text: &str, path: Option<&Path>) -> Result<Schedule> {
    let f: ScheduleFile = parse_toml(text, path)?;
    let s = Schedule::from_entries(f.kind, &f.group_sizes, &f.slots)?;
    s.check_shape()?;
    Ok(s)
}

pub fn save_schedule(schedule: &Schedule, path: &Path) -> Result<()> {
    Ok(fs::write(path, schedule_to_toml(schedule)?)?)
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    schedule_from_toml(&read(path)?, Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{generate_instance, InstanceConfig};
    use proptest::prelude::*;

    #[test]
    fn instance_round_trip_through_a_file() {
        let inst = generate_instance(&InstanceConfig { num_sources: 3, group_size: 2, seed: 9, ..Default::default() })
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.toml");
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    #[test]
    fn truncated_instance_is_a_parse_error() {
        let inst = generate_instance(&InstanceConfig::default()).unwrap();
        let text = instance_to_toml(&inst).unwrap();
        let cut = &text[..text.len() - 10];
        let err = instance_from_toml(cut, None).unwrap_err();
        let Error::Parse { message, .. } = &err else { panic!("{err:?}") };
        assert!(message.contains("line"), "{message}");
    }

    #[test]
    fn missing_field_is_named() {
        let err = instance_from_toml("noise_power = 0.1\ngroup_sizes = [1]\ndistances = [[0.5]]\n", None).unwrap_err();
        assert!(err.to_string().contains("path_loss_exponent"), "{err}");
    }

    #[test]
    fn bad_value_reports_its_line() {
        let text = "path_loss_exponent = 3.0\nnoise_power = \"loud\"\ngroup_sizes = [1]\ndistances = [[0.5]]\n";
        let err = instance_from_toml(text, None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn negative_distance_fails_validation() {
        let text = "path_loss_exponent = 3.0\nnoise_power = 0.1\ngroup_sizes = [1]\ndistances = [[-0.5]]\n";
        let err = instance_from_toml(text, None).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }

    #[test]
    fn schedule_round_trip() {
        let mut s = Schedule::empty(FormulationKind::DmcOpt, 2, &[2, 1]);
        s.activations[0][0][1] = true;
        s.activations[1][1][0] = true;
        s.powers[0][0] = 123.456789012345;
        s.powers[1][1] = 3.0;
        let text = schedule_to_toml(&s).unwrap();
        assert_eq!(schedule_from_toml(&text, None).unwrap(), s);
    }

    #[test]
    fn schedule_with_unknown_link_is_rejected() {
        let text = "kind = \"dmc-opt\"\ngroup_sizes = [1]\n[[slots]]\npowers = [1.0]\nlinks = [[0, 3]]\n";
        assert!(matches!(schedule_from_toml(text, None), Err(Error::Input(_))));
    }

    proptest! {
        #[test]
        fn instance_text_round_trip_is_lossless(
            seed in any::<u64>(),
            n in 1usize..4,
            d in 1usize..4,
        ) {
            let inst = generate_instance(&InstanceConfig { num_sources: n, group_size: d, seed, ..Default::default() }).unwrap();
            let back = instance_from_toml(&instance_to_toml(&inst).unwrap(), None).unwrap();
            prop_assert_eq!(back, inst);
        }

        #[test]
        fn schedule_text_round_trip_is_lossless(
            bits in proptest::collection::vec(any::<bool>(), 12),
            powers in proptest::collection::vec(0.0f64..300.0, 6),
        ) {
            let mut s = Schedule::empty(FormulationKind::DmcOpt, 3, &[2, 2]);
            for t in 0..3 {
                for i in 0..2 {
                    for j in 0..2 {
                        s.activations[t][i][j] = bits[t * 4 + i * 2 + j];
                    }
                    s.powers[t][i] = powers[t * 2 + i];
                }
            }
            let back = schedule_from_toml(&schedule_to_toml(&s).unwrap(), None).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
