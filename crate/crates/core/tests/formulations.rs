use mcsched_core::experiment::trial_seed;
use mcsched_core::milp::solve_milp;
use mcsched_core::model::{build, encode_schedule, extract_schedule};
use mcsched_core::net::generate_instance;
use mcsched_core::verify::{brute_force_opt, verify_schedule};
use mcsched_core::{FormulationKind, InstanceConfig, MilpOptions, MilpStatus, NetworkInstance, SchedParams};
use proptest::prelude::*;

fn conflict_instance() -> NetworkInstance {
    NetworkInstance::new(&[2, 2], vec![vec![0.5, 0.5, 2.0, 2.0], vec![2.0, 0.3, 0.5, 0.5]], 3.0, 0.1).unwrap()
}

fn optimum(inst: &NetworkInstance, params: &SchedParams, kind: FormulationKind) -> Option<f64> {
    let f = build(kind, inst, params).unwrap();
    let sol = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
    match sol.status {
        MilpStatus::Optimal => Some(sol.objective_value),
        MilpStatus::Infeasible => None,
        s => panic!("unexpected status {s:?}"),
    }
}

#[test]
fn per_link_activation_strictly_beats_group_activation() {
    let inst = conflict_instance();
    let params = SchedParams::new(2, 1);
    let link = brute_force_opt(&inst, &params, FormulationKind::DmcOptCp).unwrap().unwrap();
    let group = brute_force_opt(&inst, &params, FormulationKind::McAllCp).unwrap().unwrap();
    assert!((link.0 - 2.5).abs() < 1e-12, "{}", link.0);
    assert!((group.0 - 2.0).abs() < 1e-12, "{}", group.0);
    assert_eq!(optimum(&inst, &params, FormulationKind::DmcOptCp), Some(link.0));
    assert_eq!(optimum(&inst, &params, FormulationKind::McAllCp), Some(group.0));
}

#[test]
fn unicast_needs_a_slot_per_member() {
    let inst = conflict_instance();
    assert_eq!(optimum(&inst, &SchedParams::new(1, 1), FormulationKind::UniAll), None);
    assert!(optimum(&inst, &SchedParams::new(1, 1), FormulationKind::DmcOptCp).is_none());
}

#[test]
fn power_control_never_loses_to_constant_power() {
    for k in 0..6 {
        let inst = generate_instance(&InstanceConfig { num_sources: 2, group_size: 2, seed: trial_seed(5, 2, k), ..Default::default() })
            .unwrap();
        let params = SchedParams::new(2, 1);
        let cp = optimum(&inst, &params, FormulationKind::DmcOptCp);
        let pc = optimum(&inst, &params, FormulationKind::DmcOpt);
        if let Some(cp) = cp {
            assert!(pc.expect("power control is feasible whenever constant power is") >= cp - 1e-9);
        }
        let group_cp = optimum(&inst, &params, FormulationKind::McAllCp);
        let group_pc = optimum(&inst, &params, FormulationKind::McAll);
        if let Some(g) = group_cp {
            assert!(group_pc.unwrap() >= g - 1e-9);
        }
    }
}

#[test]
fn first_feasible_search_returns_a_valid_point() {
    let inst = conflict_instance();
    let params = SchedParams::new(2, 1);
    let f = build(FormulationKind::DmcOpt, &inst, &params).unwrap();
    let opts = MilpOptions { first_feasible: true, ..MilpOptions::default() };
    let sol = solve_milp(&f.problem, &opts).unwrap();
    assert_eq!(sol.status, MilpStatus::LimitFeasible);
    let s = extract_schedule(&f.varmap, &sol, &params).unwrap();
    assert!(verify_schedule(&inst, &s, &params).unwrap().is_valid());
    let best = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
    assert!(sol.objective_value <= best.objective_value + 1e-9);
}

#[test]
fn first_feasible_search_still_proves_infeasibility() {
    let inst = conflict_instance();
    let params = SchedParams::new(1, 1);
    let f = build(FormulationKind::DmcOptCp, &inst, &params).unwrap();
    let opts = MilpOptions { first_feasible: true, ..MilpOptions::default() };
    assert_eq!(solve_milp(&f.problem, &opts).unwrap().status, MilpStatus::Infeasible);
}

fn kind_strategy() -> impl Strategy<Value = FormulationKind> {
    prop::sample::select(FormulationKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn optimal_schedules_pass_the_physical_check(
        seed in any::<u64>(),
        n in 1usize..=3,
        d in 1usize..=2,
        t in 1usize..=3,
        kind in kind_strategy(),
    ) {
        let inst = generate_instance(&InstanceConfig { num_sources: n, group_size: d, seed, ..Default::default() }).unwrap();
        let params = SchedParams::new(t, 1);
        let f = build(kind, &inst, &params).unwrap();
        let sol = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        prop_assert!(matches!(sol.status, MilpStatus::Optimal | MilpStatus::Infeasible));
        if sol.status == MilpStatus::Optimal {
            let s = extract_schedule(&f.varmap, &sol, &params).unwrap();
            let r = verify_schedule(&inst, &s, &params).unwrap();
            prop_assert!(r.is_valid(), "{:?}", r.violations());
            prop_assert!((r.throughput - sol.objective_value).abs() < 1e-6);
            let x = encode_schedule(&f.varmap, &s).unwrap();
            prop_assert!((f.problem.base.objective_value(&x) - sol.objective_value).abs() < 1e-6);
        }
    }

    #[test]
    fn milp_matches_enumeration_on_constant_power_kinds(
        seed in any::<u64>(),
        t in 1usize..=2,
        kind in prop::sample::select(vec![FormulationKind::DmcOptCp, FormulationKind::McAllCp, FormulationKind::UniAll]),
    ) {
        let inst = generate_instance(&InstanceConfig { num_sources: 2, group_size: 2, seed, ..Default::default() }).unwrap();
        let params = SchedParams::new(t, 1);
        let brute = brute_force_opt(&inst, &params, kind).unwrap().map(|(v, _)| v);
        let milp = optimum(&inst, &params, kind);
        match (brute, milp) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}
