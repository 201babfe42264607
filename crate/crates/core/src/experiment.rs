//! Seeded Monte-Carlo sweeps over the number of sources, with every scheme
//! run on the same instance per trial, results verified and written as CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp::{solve_milp, MilpOptions, MilpStatus};
use crate::model::{build, extract_schedule, BigM, Demand, FormulationKind, SchedParams, Schedule};
use crate::net::{generate_instance, InstanceConfig, NetworkInstance};
use crate::rounding::milp_relax_schedule;
use crate::verify::{verify_schedule, VerificationReport};

/// A scheduling scheme as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Per-link activation at constant power, solved exactly.
    DmcOpt,
    /// Whole-group activation at constant power, solved exactly.
    DmcAll,
    /// One destination per source and slot at constant power.
    UniAll,
    /// Per-link activation with power control, solved exactly.
    DmcOptMilp,
    /// Per-link activation with power control, rounding heuristic.
    DmcOptHeuristic,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::DmcOpt, Scheme::DmcAll, Scheme::UniAll, Scheme::DmcOptMilp, Scheme::DmcOptHeuristic];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DmcOpt => "dmc-opt",
            Scheme::DmcAll => "dmc-all",
            Scheme::UniAll => "uni-all",
            Scheme::DmcOptMilp => "dmc-opt-milp",
            Scheme::DmcOptHeuristic => "dmc-opt-heuristic",
        }
    }

    /// The program the scheme solves or rounds.
    pub fn formulation(self) -> FormulationKind {
        match self {
            Scheme::DmcOpt => FormulationKind::DmcOptCp,
            Scheme::DmcAll => FormulationKind::McAllCp,
            Scheme::UniAll => FormulationKind::UniAll,
            Scheme::DmcOptMilp | Scheme::DmcOptHeuristic => FormulationKind::DmcOpt,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// A sweep over source counts with fixed group size, horizon and load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sources: Vec<usize>,
    pub group_size: usize,
    pub slots: usize,
    pub demand: u32,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub base_seed: u64,
    /// Linear SINR threshold.
    pub beta: f64,
    pub p_slot_max: f64,
    pub p_slot_min: f64,
    pub const_power: f64,
    pub p_budget: Option<f64>,
    pub path_loss_exponent: f64,
    pub noise_power: f64,
    pub distance_range: (f64, f64),
    pub node_limit: Option<usize>,
    pub time_limit_secs: Option<f64>,
    /// Write measured solve times; when false the seconds column is zero so
    /// repeated runs produce identical files.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = SchedParams::new(8, 8);
        let net = InstanceConfig::default();
        Self {
            sources: vec![2, 4, 6, 8, 10],
            group_size: 2,
            slots: 8,
            demand: 8,
            schemes: vec![Scheme::DmcOpt, Scheme::DmcAll, Scheme::UniAll],
            trials: 30,
            base_seed: 1,
            beta: p.beta,
            p_slot_max: p.p_slot_max,
            p_slot_min: p.p_slot_min,
            const_power: p.const_power,
            p_budget: None,
            path_loss_exponent: net.path_loss_exponent,
            noise_power: net.noise_power,
            distance_range: net.distance_range,
            node_limit: Some(200_000),
            time_limit_secs: Some(60.0),
            record_timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.trials < 1 {
            return fail("trials must be >= 1");
        }
        if self.schemes.is_empty() {
            return fail("at least one scheme is required");
        }
        if self.sources.is_empty() || self.sources.contains(&0) {
            return fail("source counts must be non-empty and positive");
        }
        if self.group_size < 1 || self.slots < 1 {
            return fail("group_size and slots must be >= 1");
        }
        if self.time_limit_secs.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return fail("time_limit_secs must be positive");
        }
        self.instance_config(self.sources[0], 0).validate()
    }

    pub fn params(&self) -> SchedParams {
        SchedParams {
            slots: self.slots,
            beta: self.beta,
            demand: Demand::Uniform(self.demand),
            p_slot_max: self.p_slot_max,
            p_slot_min: self.p_slot_min,
            p_budget: self.p_budget,
            const_power: self.const_power,
            delta: BigM::Auto,
        }
    }

    pub fn milp_options(&self) -> MilpOptions {
        MilpOptions {
            node_limit: self.node_limit,
            time_limit: self.time_limit_secs.map(Duration::from_secs_f64),
            ..MilpOptions::default()
        }
    }

    pub fn instance_config(&self, num_sources: usize, seed: u64) -> InstanceConfig {
        InstanceConfig {
            num_sources,
            group_size: self.group_size,
            path_loss_exponent: self.path_loss_exponent,
            noise_power: self.noise_power,
            distance_range: self.distance_range,
            seed,
        }
    }
}

/// Instance seed of trial `trial` at `num_sources` sources.
pub fn trial_seed(base_seed: u64, num_sources: usize, trial: usize) -> u64 {
    base_seed ^ splitmix64(((num_sources as u64) << 32) ^ trial as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordStatus {
    Optimal,
    Heuristic,
    Infeasible,
    LimitHit,
    /// The solver or the verifier failed; throughput is zero.
    Error,
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordStatus::Optimal => "optimal",
            RecordStatus::Heuristic => "heuristic",
            RecordStatus::Infeasible => "infeasible",
            RecordStatus::LimitHit => "limit-hit",
            RecordStatus::Error => "error",
        })
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "B")]
    pub b: u32,
    pub seed: u64,
    pub throughput: f64,
    pub status: RecordStatus,
    pub seconds: f64,
}

/// Result of running one scheme on one instance.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub status: RecordStatus,
    /// Verified throughput, zero without a valid schedule.
    pub throughput: f64,
    pub schedule: Option<Schedule>,
    pub report: Option<VerificationReport>,
    pub message: Option<String>,
}

impl SchemeOutcome {
    fn failed(status: RecordStatus, message: String) -> Self {
        Self { status, throughput: 0.0, schedule: None, report: None, message: Some(message) }
    }
}

/// Builds, solves and verifies. Never fails: problems become the
/// [`RecordStatus::Error`] status with a message.
pub fn solve_scheme(
    instance: &NetworkInstance,
    params: &SchedParams,
    scheme: Scheme,
    milp: &MilpOptions,
) -> SchemeOutcome {
    let solved = match scheme {
        Scheme::DmcOptHeuristic => match milp_relax_schedule(instance, params) {
            Ok(s) => Ok((RecordStatus::Heuristic, Some(s))),
            Err(Error::Infeasible(m)) => return SchemeOutcome::failed(RecordStatus::Infeasible, m),
            Err(e) => Err(e),
        },
        _ => exact(instance, params, scheme.formulation(), milp),
    };
    let (status, schedule) = match solved {
        Ok((status, Some(s))) => (status, s),
        Ok((status, None)) => return SchemeOutcome::failed(status, "limit reached before any schedule was found".into()),
        Err(Error::Infeasible(m)) => return SchemeOutcome::failed(RecordStatus::Infeasible, m),
        Err(e) => return SchemeOutcome::failed(RecordStatus::Error, e.to_string()),
    };
    match verify_schedule(instance, &schedule, params) {
        Ok(report) if report.is_valid() => SchemeOutcome {
            status,
            throughput: report.throughput,
            schedule: Some(schedule),
            report: Some(report),
            message: None,
        },
        Ok(report) => SchemeOutcome {
            status: RecordStatus::Error,
            throughput: 0.0,
            message: Some(format!("schedule failed verification: {}", report.violations().join("; "))),
            schedule: Some(schedule),
            report: Some(report),
        },
        Err(e) => SchemeOutcome::failed(RecordStatus::Error, e.to_string()),
    }
}

fn exact(
    instance: &NetworkInstance,
    params: &SchedParams,
    kind: FormulationKind,
    milp: &MilpOptions,
) -> Result<(RecordStatus, Option<Schedule>)> {
    let f = build(kind, instance, params)?;
    let sol = solve_milp(&f.problem, milp)?;
    let status = match sol.status {
        MilpStatus::Optimal => RecordStatus::Optimal,
        MilpStatus::LimitFeasible => RecordStatus::LimitHit,
        MilpStatus::Infeasible => return Err(Error::Infeasible(format!("{kind} has no feasible schedule"))),
        MilpStatus::LimitUnknown => return Ok((RecordStatus::LimitHit, None)),
    };
    Ok((status, Some(extract_schedule(&f.varmap, &sol, params)?)))
}

/// Runs every (N, trial, scheme) combination. Trials run in parallel; the
/// returned records are sorted by scheme name, N, seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let params = config.params();
    let milp = config.milp_options();
    let points: Vec<(usize, usize)> = config
        .sources
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |trial| (n, trial)))
        .collect();
    let mut records: Vec<ResultRecord> = points
        .par_iter()
        .map(|&(n, trial)| {
            let seed = trial_seed(config.base_seed, n, trial);
            let instance = generate_instance(&config.instance_config(n, seed));
            config
                .schemes
                .iter()
                .map(|&scheme| {
                    let start = Instant::now();
                    let outcome = match &instance {
                        Ok(inst) => solve_scheme(inst, &params, scheme, &milp),
                        Err(e) => SchemeOutcome::failed(RecordStatus::Error, e.to_string()),
                    };
                    let seconds = if config.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
                    ResultRecord {
                        scheme,
                        n,
                        d: config.group_size,
                        t: config.slots,
                        b: config.demand,
                        seed,
                        throughput: outcome.throughput,
                        status: outcome.status,
                        seconds,
                    }
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    sort_records(&mut records);
    Ok(records)
}

/// Canonical order: scheme name, N, seed.
pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| {
        (a.scheme.name(), a.n, a.seed)
            .cmp(&(b.scheme.name(), b.n, b.seed))
            .then(a.throughput.total_cmp(&b.throughput))
    });
}

/// Mean over all trials of one (scheme, N) point; infeasible trials count
/// as zero throughput.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "B")]
    pub b: u32,
    pub trials: usize,
    pub feasible: usize,
    pub mean_throughput: f64,
}

pub fn aggregate(records: &[ResultRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(&str, usize), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.scheme.name(), r.n)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let first = rs[0];
            let mut values: Vec<f64> = rs.iter().map(|r| r.throughput).collect();
            // Summation order fixed by value keeps the mean reproducible.
            values.sort_by(f64::total_cmp);
            AggregateRow {
                scheme: first.scheme,
                n: first.n,
                d: first.d,
                t: first.t,
                b: first.b,
                trials: rs.len(),
                feasible: rs
                    .iter()
                    .filter(|r| matches!(r.status, RecordStatus::Optimal | RecordStatus::Heuristic))
                    .count(),
                mean_throughput: values.iter().sum::<f64>() / rs.len() as f64,
            }
        })
        .collect()
}

/// Path of the aggregate file written next to `path`: `results.csv` gives
/// `results_mean.csv`.
pub fn aggregate_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_mean.csv"))
}

pub fn records_to_csv(records: &[ResultRecord]) -> Result<String> {
    to_csv(records)
}

pub fn aggregate_to_csv(rows: &[AggregateRow]) -> Result<String> {
    to_csv(rows)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the per-record file and its aggregate companion; returns the
/// companion's path.
pub fn emit_csv(records: &[ResultRecord], path: &Path) -> Result<PathBuf> {
    if records.is_empty() {
        return Err(Error::Input("no records to write".into()));
    }
    std::fs::write(path, records_to_csv(records)?)?;
    let agg = aggregate_path(path);
    std::fs::write(&agg, aggregate_to_csv(&aggregate(records))?)?;
    Ok(agg)
}

pub fn records_from_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    records_from_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(schemes: Vec<Scheme>) -> ExperimentConfig {
        ExperimentConfig {
            sources: vec![2],
            group_size: 2,
            slots: 2,
            demand: 1,
            schemes,
            trials: 1,
            record_timing: false,
            ..ExperimentConfig::default()
        }
    }

    fn record(scheme: Scheme, n: usize, seed: u64, throughput: f64) -> ResultRecord {
        ResultRecord { scheme, n, d: 2, t: 8, b: 8, seed, throughput, status: RecordStatus::Optimal, seconds: 0.0 }
    }

    #[test]
    fn smallest_sweep_gives_one_verified_record() {
        let recs = run_experiment(&small(vec![Scheme::DmcOpt])).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(matches!(recs[0].status, RecordStatus::Optimal | RecordStatus::Infeasible));
    }

    #[test]
    fn paired_dominance() {
        let cfg = ExperimentConfig { trials: 6, ..small(vec![Scheme::DmcOpt, Scheme::DmcAll]) };
        let recs = run_experiment(&cfg).unwrap();
        for opt in recs.iter().filter(|r| r.scheme == Scheme::DmcOpt) {
            let all = recs.iter().find(|r| r.scheme == Scheme::DmcAll && r.seed == opt.seed).unwrap();
            assert!(opt.throughput >= all.throughput - 1e-9);
        }
    }

    #[test]
    fn uni_all_pigeonhole_is_flagged() {
        let cfg = ExperimentConfig { slots: 2, demand: 2, ..small(vec![Scheme::UniAll]) };
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs[0].status, RecordStatus::Infeasible);
        assert_eq!(recs[0].throughput, 0.0);
    }

    #[test]
    fn one_record_file_has_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let agg = emit_csv(&[record(Scheme::DmcOpt, 2, 1, 0.5)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), "scheme,N,D,T,B,seed,throughput,status,seconds");
        assert_eq!(agg, dir.path().join("r_mean.csv"));
        assert_eq!(read_csv(&path).unwrap(), vec![record(Scheme::DmcOpt, 2, 1, 0.5)]);
    }

    #[test]
    fn aggregate_groups_by_scheme_and_n() {
        let mut recs = Vec::new();
        for scheme in [Scheme::DmcOpt, Scheme::DmcAll] {
            for n in [2, 4, 6] {
                recs.push(record(scheme, n, 1, 1.0));
                recs.push(record(scheme, n, 2, 2.0));
            }
        }
        let agg = aggregate(&recs);
        assert_eq!(agg.len(), 6);
        assert!(agg.iter().all(|a| a.trials == 2 && a.mean_throughput == 1.5));
    }

    #[test]
    fn empty_records_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_csv(&[], &dir.path().join("r.csv")).is_err());
    }

    #[test]
    fn bad_configs() {
        assert!(ExperimentConfig { trials: 0, ..ExperimentConfig::default() }.validate().is_err());
        assert!(ExperimentConfig { schemes: vec![], ..ExperimentConfig::default() }.validate().is_err());
        assert!("dmc-best".parse::<Scheme>().is_err());
        assert_eq!("dmc-opt-heuristic".parse::<Scheme>().unwrap(), Scheme::DmcOptHeuristic);
    }

    #[test]
    fn seeds_differ_across_points() {
        let mut seen = std::collections::HashSet::new();
        for n in [2, 4, 6, 8, 10] {
            for t in 0..30 {
                assert!(seen.insert(trial_seed(1, n, t)));
            }
        }
    }

    #[test]
    fn untimed_runs_are_identical() {
        let cfg = ExperimentConfig { trials: 4, sources: vec![2, 3], ..small(Scheme::ALL.to_vec()) };
        let a = records_to_csv(&run_experiment(&cfg).unwrap()).unwrap();
        let b = records_to_csv(&run_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rows in proptest::collection::vec(
                (0usize..5, 1usize..12, any::<u64>(), 0.0f64..20.0, 0usize..5, 0.0f64..100.0),
                1..20,
            )
        ) {
            let statuses = [
                RecordStatus::Optimal,
                RecordStatus::Heuristic,
                RecordStatus::Infeasible,
                RecordStatus::LimitHit,
                RecordStatus::Error,
            ];
            let recs: Vec<ResultRecord> = rows
                .into_iter()
                .map(|(s, n, seed, tp, st, secs)| ResultRecord {
                    scheme: Scheme::ALL[s],
                    n,
                    d: 2,
                    t: 8,
                    b: 8,
                    seed,
                    throughput: tp,
                    status: statuses[st],
                    seconds: secs,
                })
                .collect();
            let back = records_from_csv(&records_to_csv(&recs).unwrap()).unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
