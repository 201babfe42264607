use crate::error::Result;
use crate::lp::{LpProblem, Row};
use crate::milp::MilpProblem;
use crate::net::NetworkInstance;

use super::{BigM, FormulationKind, SchedParams, VarKind, VarMap};

/// A compiled program together with the meaning of its columns.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub problem: MilpProblem,
    pub varmap: VarMap,
    /// Big-M value used in the SINR rows.
    pub delta: f64,
}

impl Formulation {
    pub fn into_parts(self) -> (MilpProblem, VarMap) {
        (self.problem, self.varmap)
    }
}

/// The SINR big-M:
/// `beta * (noise + sum_k p_max * max_d gain(k, d)) + p_max * max_gain`,
/// unless the parameters carry an explicit value.
///
/// With the activation at zero this makes the SINR row hold for every power
/// vector inside `[0, p_max]`.
pub fn big_m(instance: &NetworkInstance, params: &SchedParams) -> f64 {
    match params.delta {
        BigM::Fixed(d) => d,
        BigM::Auto => {
            let interference: f64 = (0..instance.num_sources())
                .map(|k| params.p_slot_max * instance.max_gain_from(k))
                .sum();
            params.beta * (instance.noise_power() + interference) + params.p_slot_max * instance.max_gain()
        }
    }
}

pub fn build(kind: FormulationKind, instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    match kind {
        FormulationKind::McAll => build_mc_all(instance, params),
        FormulationKind::DmcOpt => build_dmc_opt(instance, params),
        FormulationKind::DmcOptCp => build_dmc_opt_cp(instance, params),
        FormulationKind::McAllCp => build_mc_all_cp(instance, params),
        FormulationKind::UniAll => build_uni_all(instance, params),
    }
}

struct Ctx<'a> {
    instance: &'a NetworkInstance,
    params: &'a SchedParams,
    gains: Vec<Vec<f64>>,
    delta: f64,
    n: usize,
    t: usize,
}

impl<'a> Ctx<'a> {
    fn new(instance: &'a NetworkInstance, params: &'a SchedParams) -> Result<Self> {
        params.validate(instance)?;
        let n = instance.num_sources();
        let gains = (0..n)
            .map(|i| (0..instance.num_destinations()).map(|d| instance.gain_unchecked(i, d)).collect())
            .collect();
        Ok(Self {
            instance,
            params,
            gains,
            delta: big_m(instance, params),
            n,
            t: params.slots,
        })
    }

    fn links(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.instance.group(i).iter().enumerate().map(move |(j, &d)| (i, j, d))
        })
    }

    fn varmap(&self, kind: FormulationKind) -> VarMap {
        VarMap::new(kind, self.t, self.instance.group_sizes())
    }

    fn finish(&self, lp: LpProblem, varmap: VarMap) -> Result<Formulation> {
        let binaries = varmap.binaries();
        Ok(Formulation { problem: MilpProblem::new(lp, binaries)?, varmap, delta: self.delta })
    }
}

fn new_lp(varmap: &VarMap, p_max: f64) -> LpProblem {
    let mut lp = LpProblem::new(varmap.len());
    for (c, var) in varmap.entries().iter().enumerate() {
        lp.bounds[c] = if var.is_binary() { (0.0, 1.0) } else { (0.0, p_max) };
    }
    lp
}

/// Whole-group activation with power control.
///
/// Columns: `x[t][i]` (binary) then `P[t][i]`. Objective
/// `(1/T) sum D_i x[t][i]`; rows are the linearized SINR condition per
/// (link, slot), the per-group slot requirement, the per-source power budget
/// and `P[t][i] <= p_max x[t][i]`.
pub fn build_mc_all(instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    let ctx = Ctx::new(instance, params)?;
    let (n, t) = (ctx.n, ctx.t);
    let mut vm = ctx.varmap(FormulationKind::McAll);
    for slot in 0..t {
        for source in 0..n {
            vm.push(VarKind::GroupActivation { slot, source });
        }
    }
    for slot in 0..t {
        for source in 0..n {
            vm.push(VarKind::Power { slot, source });
        }
    }
    let x = |vm: &VarMap, s, i| vm.group(s, i).expect("group column");
    let p = |vm: &VarMap, s, i| vm.power(s, i).expect("power column");

    let mut lp = new_lp(&vm, params.p_slot_max);
    for slot in 0..t {
        for i in 0..n {
            lp.objective[x(&vm, slot, i)] = instance.group_size(i) as f64 / t as f64;
        }
    }
    let (beta, noise, delta) = (params.beta, instance.noise_power(), ctx.delta);
    for slot in 0..t {
        for (i, _, d) in ctx.links() {
            let mut coeffs = vec![(p(&vm, slot, i), ctx.gains[i][d])];
            coeffs.extend((0..n).filter(|&k| k != i).map(|k| (p(&vm, slot, k), -beta * ctx.gains[k][d])));
            coeffs.push((x(&vm, slot, i), -delta));
            lp.add_row(Row::ge(coeffs, beta * noise - delta));
        }
    }
    for i in 0..n {
        let b = params.demand.group(i, instance.group_size(i)) as f64;
        lp.add_row(Row::ge((0..t).map(|s| (x(&vm, s, i), 1.0)).collect(), b));
    }
    for i in 0..n {
        lp.add_row(Row::le((0..t).map(|s| (p(&vm, s, i), 1.0)).collect(), params.budget()));
    }
    for slot in 0..t {
        for i in 0..n {
            lp.add_row(Row::le(vec![(p(&vm, slot, i), 1.0), (x(&vm, slot, i), -params.p_slot_max)], 0.0));
        }
    }
    ctx.finish(lp, vm)
}

fn push_link_vars(ctx: &Ctx, vm: &mut VarMap) {
    for slot in 0..ctx.t {
        for (source, member, _) in ctx.links() {
            vm.push(VarKind::LinkActivation { slot, source, member });
        }
    }
}

fn push_transmitters(ctx: &Ctx, vm: &mut VarMap) {
    for slot in 0..ctx.t {
        for source in 0..ctx.n {
            vm.push(VarKind::Transmitter { slot, source });
        }
    }
}

/// Rows shared by all per-link formulations: at most `D_i` links per source
/// and slot, per-link slot demand, and `x[t][i][j] <= z[t][i]`.
fn add_link_rows(ctx: &Ctx, vm: &VarMap, lp: &mut LpProblem) {
    let (n, t) = (ctx.n, ctx.t);
    for slot in 0..t {
        for i in 0..n {
            let d_i = ctx.instance.group_size(i);
            let coeffs = (0..d_i).map(|j| (vm.link(slot, i, j).unwrap(), 1.0)).collect();
            lp.add_row(Row::le(coeffs, d_i as f64));
        }
    }
    for (i, j, _) in ctx.links() {
        let coeffs = (0..t).map(|s| (vm.link(s, i, j).unwrap(), 1.0)).collect();
        lp.add_row(Row::ge(coeffs, ctx.params.demand.link(i, j) as f64));
    }
    for slot in 0..t {
        for (i, j, _) in ctx.links() {
            lp.add_row(Row::le(
                vec![(vm.link(slot, i, j).unwrap(), 1.0), (vm.transmitter(slot, i).unwrap(), -1.0)],
                0.0,
            ));
        }
    }
}

fn link_objective(ctx: &Ctx, vm: &VarMap, lp: &mut LpProblem) {
    for slot in 0..ctx.t {
        for (i, j, _) in ctx.links() {
            lp.objective[vm.link(slot, i, j).unwrap()] = 1.0 / ctx.t as f64;
        }
    }
}

/// Per-link activation with power control.
///
/// Columns: `x[t][i][j]`, `z[t][i]` (binary) then `P[t][i]`. The transmitter
/// indicator `z` carries the per-slot power floor:
/// `p_min z <= P <= p_max z` and `x <= z`.
pub fn build_dmc_opt(instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    let ctx = Ctx::new(instance, params)?;
    let (n, t) = (ctx.n, ctx.t);
    let mut vm = ctx.varmap(FormulationKind::DmcOpt);
    push_link_vars(&ctx, &mut vm);
    push_transmitters(&ctx, &mut vm);
    for slot in 0..t {
        for source in 0..n {
            vm.push(VarKind::Power { slot, source });
        }
    }
    let p = |s, i| vm.power(s, i).unwrap();

    let mut lp = new_lp(&vm, params.p_slot_max);
    link_objective(&ctx, &vm, &mut lp);
    let (beta, noise, delta) = (params.beta, instance.noise_power(), ctx.delta);
    for slot in 0..t {
        for (i, j, d) in ctx.links() {
            let mut coeffs = vec![(p(slot, i), ctx.gains[i][d])];
            coeffs.extend((0..n).filter(|&k| k != i).map(|k| (p(slot, k), -beta * ctx.gains[k][d])));
            coeffs.push((vm.link(slot, i, j).unwrap(), -delta));
            lp.add_row(Row::ge(coeffs, beta * noise - delta));
        }
    }
    add_link_rows(&ctx, &vm, &mut lp);
    for i in 0..n {
        lp.add_row(Row::le((0..t).map(|s| (p(s, i), 1.0)).collect(), params.budget()));
    }
    for slot in 0..t {
        for i in 0..n {
            let z = vm.transmitter(slot, i).unwrap();
            lp.add_row(Row::ge(vec![(p(slot, i), 1.0), (z, -params.p_slot_min)], 0.0));
            lp.add_row(Row::le(vec![(p(slot, i), 1.0), (z, -params.p_slot_max)], 0.0));
        }
    }
    ctx.finish(lp, vm)
}

/// Constant-power SINR row for link `(i, d)` in `slot`:
/// `P g_id + (1 - x) delta >= beta (noise + sum_{k != i} P g_kd on_k)`,
/// where `on_k` is the column saying source `k` transmits.
fn cp_sinr_row(ctx: &Ctx, slot: usize, i: usize, d: usize, x: usize, on: impl Fn(usize, usize) -> usize) -> Row {
    let (beta, noise, delta, power) = (ctx.params.beta, ctx.instance.noise_power(), ctx.delta, ctx.params.const_power);
    let mut coeffs = vec![(x, -delta)];
    coeffs.extend(
        (0..ctx.n)
            .filter(|&k| k != i)
            .map(|k| (on(slot, k), -beta * power * ctx.gains[k][d])),
    );
    Row::ge(coeffs, beta * noise - delta - power * ctx.gains[i][d])
}

fn dmc_cp(instance: &NetworkInstance, params: &SchedParams, kind: FormulationKind) -> Result<Formulation> {
    let ctx = Ctx::new(instance, params)?;
    let (n, t) = (ctx.n, ctx.t);
    let mut vm = ctx.varmap(kind);
    push_link_vars(&ctx, &mut vm);
    push_transmitters(&ctx, &mut vm);
    let mut lp = new_lp(&vm, params.p_slot_max);
    link_objective(&ctx, &vm, &mut lp);
    for slot in 0..t {
        for (i, j, d) in ctx.links() {
            let row = cp_sinr_row(&ctx, slot, i, d, vm.link(slot, i, j).unwrap(), |s, k| {
                vm.transmitter(s, k).unwrap()
            });
            lp.add_row(row);
        }
    }
    add_link_rows(&ctx, &vm, &mut lp);
    for i in 0..n {
        let coeffs = (0..t).map(|s| (vm.transmitter(s, i).unwrap(), params.const_power)).collect();
        lp.add_row(Row::le(coeffs, params.budget()));
    }
    if kind == FormulationKind::UniAll {
        for slot in 0..t {
            for i in 0..n {
                let coeffs = (0..instance.group_size(i)).map(|j| (vm.link(slot, i, j).unwrap(), 1.0)).collect();
                lp.add_row(Row::le(coeffs, 1.0));
            }
        }
    }
    ctx.finish(lp, vm)
}

/// Per-link activation at the constant power `params.const_power`; a pure
/// binary program over `x[t][i][j]` and `z[t][i]`.
pub fn build_dmc_opt_cp(instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    dmc_cp(instance, params, FormulationKind::DmcOptCp)
}

/// [`build_dmc_opt_cp`] plus at most one active link per source and slot.
pub fn build_uni_all(instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    dmc_cp(instance, params, FormulationKind::UniAll)
}

/// Whole-group activation at constant power over `x[t][i]` only; a source
/// transmits exactly when its group is active.
pub fn build_mc_all_cp(instance: &NetworkInstance, params: &SchedParams) -> Result<Formulation> {
    let ctx = Ctx::new(instance, params)?;
    let (n, t) = (ctx.n, ctx.t);
    let mut vm = ctx.varmap(FormulationKind::McAllCp);
    for slot in 0..t {
        for source in 0..n {
            vm.push(VarKind::GroupActivation { slot, source });
        }
    }
    let x = |s, i| vm.group(s, i).unwrap();
    let mut lp = new_lp(&vm, params.p_slot_max);
    for slot in 0..t {
        for i in 0..n {
            lp.objective[x(slot, i)] = instance.group_size(i) as f64 / t as f64;
        }
    }
    for slot in 0..t {
        for (i, _, d) in ctx.links() {
            lp.add_row(cp_sinr_row(&ctx, slot, i, d, x(slot, i), x));
        }
    }
    for i in 0..n {
        let b = params.demand.group(i, instance.group_size(i)) as f64;
        lp.add_row(Row::ge((0..t).map(|s| (x(s, i), 1.0)).collect(), b));
    }
    for i in 0..n {
        lp.add_row(Row::le((0..t).map(|s| (x(s, i), params.const_power)).collect(), params.budget()));
    }
    ctx.finish(lp, vm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::milp::{solve_milp, MilpOptions, MilpStatus};
    use crate::net::{generate_instance, InstanceConfig};

    fn uniform(n: usize, d: usize, dist: f64) -> NetworkInstance {
        NetworkInstance::new(&vec![d; n], vec![vec![dist; n * d]; n], 3.0, 0.1).unwrap()
    }

    fn random(n: usize, d: usize, seed: u64) -> NetworkInstance {
        generate_instance(&InstanceConfig { num_sources: n, group_size: d, seed, ..Default::default() }).unwrap()
    }

    fn count_binaries(f: &Formulation) -> usize {
        f.problem.binary_vars.len()
    }

    #[test]
    fn big_m_examples() {
        let inst = NetworkInstance::new(&[1], vec![vec![0.5]], 3.0, 0.1).unwrap();
        let params = SchedParams { p_slot_max: 300.0, beta: 10.0, ..SchedParams::new(1, 1) };
        assert!((big_m(&inst, &params) - 26401.0).abs() < 1e-9);
        let doubled = SchedParams { p_slot_max: 600.0, ..params.clone() };
        let (m1, m2) = (big_m(&inst, &params), big_m(&inst, &doubled));
        assert!(m2 > m1 && m2 < 2.0 * m1);
        let fixed = SchedParams { delta: BigM::Fixed(50000.0), ..params };
        assert_eq!(big_m(&inst, &fixed), 50000.0);
    }

    #[test]
    fn mc_all_counts() {
        let f = build_mc_all(&uniform(2, 2, 0.5), &SchedParams::new(3, 1)).unwrap();
        assert_eq!(count_binaries(&f), 6);
        assert_eq!(f.varmap.len() - count_binaries(&f), 6);
        // 12 SINR + 2 scheduling + 2 budget + 6 linking
        assert_eq!(f.problem.base.rows.len(), 22);
    }

    #[test]
    fn dmc_opt_counts() {
        let f = build_dmc_opt(&uniform(2, 2, 0.5), &SchedParams::new(2, 1)).unwrap();
        let vm = &f.varmap;
        let links = vm.entries().iter().filter(|v| matches!(v, VarKind::LinkActivation { .. })).count();
        let tx = vm.entries().iter().filter(|v| matches!(v, VarKind::Transmitter { .. })).count();
        let pw = vm.entries().iter().filter(|v| matches!(v, VarKind::Power { .. })).count();
        assert_eq!((links, tx, pw), (8, 4, 4));
        let sinr_rows = f.problem.base.rows.iter().filter(|r| r.coeffs.iter().any(|&(_, a)| a == -f.delta)).count();
        assert_eq!(sinr_rows, 8);
        // SINR 8, per-slot cap 4, demand 4, budget 2, x<=z 8, power floor/cap 8
        assert_eq!(f.problem.base.rows.len(), 34);
    }

    #[test]
    fn closed_form_counts() {
        for (n, d, t) in [(1, 1, 1), (2, 3, 2), (3, 2, 4)] {
            let inst = uniform(n, d, 0.5);
            let params = SchedParams::new(t, 1);
            let links = n * d;
            let f = build_mc_all(&inst, &params).unwrap();
            assert_eq!(f.varmap.len(), 2 * n * t);
            assert_eq!(f.problem.base.rows.len(), t * links + 2 * n + n * t);
            let f = build_dmc_opt(&inst, &params).unwrap();
            assert_eq!(f.varmap.len(), t * links + 2 * n * t);
            assert_eq!(f.problem.base.rows.len(), 2 * t * links + n * t + links + n + 2 * n * t);
            let f = build_dmc_opt_cp(&inst, &params).unwrap();
            assert_eq!(f.varmap.len(), t * links + n * t);
            assert_eq!(f.problem.base.rows.len(), 2 * t * links + n * t + links + n);
            let f = build_uni_all(&inst, &params).unwrap();
            assert_eq!(f.problem.base.rows.len(), 2 * t * links + 2 * n * t + links + n);
            let f = build_mc_all_cp(&inst, &params).unwrap();
            assert_eq!(f.varmap.len(), n * t);
            assert_eq!(f.problem.base.rows.len(), t * links + 2 * n);
        }
    }

    #[test]
    fn mc_all_single_source_single_slot() {
        let inst = NetworkInstance::new(&[2], vec![vec![0.5, 0.8]], 3.0, 0.1).unwrap();
        let f = build_mc_all(&inst, &SchedParams::new(1, 1)).unwrap();
        let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-9);
        let p = s.primal[f.varmap.power(0, 0).unwrap()];
        for d in 0..2 {
            assert!(inst.sinr(&[p], 0, d).unwrap() >= 10.0 * (1.0 - 1e-7));
        }
    }

    #[test]
    fn unreachable_destination_is_infeasible() {
        // 300 * 10^-3 / 0.1 = 3 < 10 at distance 10.
        let inst = NetworkInstance::new(&[1], vec![vec![10.0]], 3.0, 0.1).unwrap();
        let f = build_mc_all(&inst, &SchedParams::new(1, 1)).unwrap();
        let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
    }

    #[test]
    fn dmc_opt_single_source_full_demand() {
        let inst = NetworkInstance::new(&[3], vec![vec![0.5, 0.6, 0.9]], 3.0, 0.1).unwrap();
        let f = build_dmc_opt(&inst, &SchedParams::new(2, 2)).unwrap();
        let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
        for slot in 0..2 {
            for j in 0..3 {
                assert_eq!(s.primal[f.varmap.link(slot, 0, j).unwrap()], 1.0);
            }
        }
    }

    #[test]
    fn constant_power_embedded_in_rows() {
        let inst = NetworkInstance::new(&[1, 1], vec![vec![0.5, 0.9], vec![0.9, 0.5]], 3.0, 0.1).unwrap();
        let params = SchedParams::new(1, 1);
        assert_eq!(params.const_power, 90.0);
        let f = build_dmc_opt_cp(&inst, &params).unwrap();
        // Interference coefficient of source 1 on destination 0: beta * 90 * g(1, 0).
        let expected = -10.0 * 90.0 * inst.gain(1, 0).unwrap();
        let z1 = f.varmap.transmitter(0, 1).unwrap();
        let row = &f.problem.base.rows[0];
        assert!(row.coeffs.iter().any(|&(c, a)| c == z1 && (a - expected).abs() < 1e-9));
        let rhs = 10.0 * 0.1 - f.delta - 90.0 * inst.gain(0, 0).unwrap();
        assert!((row.rhs - rhs).abs() < 1e-6);
    }

    #[test]
    fn cp_single_source_schedulability_threshold() {
        // 90 * g / 0.1 >= 10 iff g >= 1/90 iff d <= 90^(1/3) ~ 4.48
        for (dist, feasible) in [(4.4, true), (4.6, false)] {
            let inst = NetworkInstance::new(&[1], vec![vec![dist]], 3.0, 0.1).unwrap();
            let f = build_dmc_opt_cp(&inst, &SchedParams::new(1, 1)).unwrap();
            let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
            assert_eq!(s.status == MilpStatus::Optimal, feasible, "d = {dist}");
        }
    }

    #[test]
    fn uni_all_examples() {
        let inst = uniform(1, 2, 0.5);
        let f = build_uni_all(&inst, &SchedParams::new(2, 1)).unwrap();
        let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        assert!((s.objective_value - 1.0).abs() < 1e-12);
        let a = s.primal[f.varmap.link(0, 0, 0).unwrap()];
        let b = s.primal[f.varmap.link(1, 0, 0).unwrap()];
        assert_eq!(a + b, 1.0);

        let f = build_uni_all(&inst, &SchedParams::new(1, 1)).unwrap();
        let s = solve_milp(&f.problem, &MilpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);

        // D = 1: the extra row never binds.
        let inst = random(2, 1, 3);
        let params = SchedParams::new(2, 1);
        let a = solve_milp(&build_uni_all(&inst, &params).unwrap().problem, &MilpOptions::default()).unwrap();
        let b = solve_milp(&build_dmc_opt_cp(&inst, &params).unwrap().problem, &MilpOptions::default()).unwrap();
        assert_eq!(a.status, b.status);
        if a.status == MilpStatus::Optimal {
            assert!((a.objective_value - b.objective_value).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_params_are_build_errors() {
        let inst = uniform(1, 1, 0.5);
        let bad = SchedParams::new(1, 2);
        for kind in FormulationKind::ALL {
            assert!(matches!(build(kind, &inst, &bad), Err(Error::Build(_))));
        }
    }

    #[test]
    fn big_m_rows_are_vacuous_when_inactive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20 {
            let inst = random(3, 2, seed);
            let params = SchedParams::new(2, 1);
            for kind in FormulationKind::ALL {
                let f = build(kind, &inst, &params).unwrap();
                let lp = &f.problem.base;
                for _ in 0..20 {
                    // Every column anywhere in its bounds, then the row's own
                    // activation forced to zero.
                    let mut x: Vec<f64> = f
                        .varmap
                        .entries()
                        .iter()
                        .map(|v| match v {
                            VarKind::Power { .. } => rng.gen_range(0.0..=params.p_slot_max),
                            _ => rng.gen_range(0..2) as f64,
                        })
                        .collect();
                    for row in &lp.rows {
                        let Some(&(own, _)) = row.coeffs.iter().find(|&&(_, a)| a == -f.delta) else {
                            continue;
                        };
                        let saved = x[own];
                        x[own] = 0.0;
                        assert!(row.violation(&x) == 0.0, "{kind} row violated");
                        x[own] = saved;
                    }
                }
            }
        }
    }
}
