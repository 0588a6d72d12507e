use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use switchsynth_core::abstraction::{hat_f, MachineTable};
use switchsynth_core::synthesis::{bellman, value_iteration, CostSpec, SearchParams};
use switchsynth_core::{build_machine, HarmonicPair, Input, Partition, Plant, Sign};

fn random_table(rng: &mut ChaCha8Rng, n: usize) -> MachineTable {
    MachineTable {
        trans: (0..n).map(|_| std::array::from_fn(|_| rng.gen_range(0..n))).collect(),
        g_out: (0..n).map(|_| if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg }).collect(),
        h_out: (0..n).map(|_| [rng.gen_range(-0.4..0.3), rng.gen_range(-0.4..0.3)]).collect(),
        d_flag: (0..n).map(|_| rng.gen_bool(0.7)).collect(),
    }
}

/// Minimum mean over simple cycles of a graph with two weighted edges per
/// node, by exhaustive DFS.
fn min_cycle_mean(succ: &[[(usize, f64); 2]]) -> f64 {
    fn dfs(start: usize, v: usize, sum: f64, len: usize, on: &mut Vec<bool>, succ: &[[(usize, f64); 2]], best: &mut f64) {
        for &(w, c) in &succ[v] {
            if w == start {
                *best = best.min((sum + c) / (len + 1) as f64);
            } else if w > start && !on[w] {
                on[w] = true;
                dfs(start, w, sum + c, len + 1, on, succ, best);
                on[w] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    for s in 0..succ.len() {
        let mut on = vec![false; succ.len()];
        on[s] = true;
        dfs(s, s, 0.0, 0, &mut on, succ, &mut best);
    }
    best
}

/// Best worst-case cycle mean over all stationary policies.
fn policy_margin(table: &MachineTable, spec: &CostSpec) -> f64 {
    let n = table.len();
    (0..1usize << n)
        .map(|mask| {
            let succ: Vec<[(usize, f64); 2]> = (0..n)
                .map(|q| {
                    let u = if mask >> q & 1 == 1 { Input::One } else { Input::Zero };
                    [false, true].map(|w| (table.next_w(q, u, w), spec.sigma(table, q, u, w)))
                })
                .collect();
            min_cycle_mean(&succ)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn feasibility_matches_policy_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = SearchParams::default();
    let (mut checked, mut feasible) = (0, 0);
    while checked < 50 {
        let n = rng.gen_range(1..=6);
        let table = random_table(&mut rng, n);
        let spec = CostSpec::new(rng.gen_range(0.001..0.5), rng.gen_range(0.0..0.15), rng.gen_range(0.0..1.0));
        let margin = policy_margin(&table, &spec);
        if margin.abs() < 1e-6 {
            continue;
        }
        let res = value_iteration(&spec, &table, &params);
        assert_eq!(res.feasible, margin >= 0.0, "margin {margin}");
        checked += 1;
        feasible += res.feasible as usize;
    }
    assert!(feasible > 5 && feasible < 45, "unbalanced sample: {feasible}");
}

#[test]
fn iterates_increase_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let table = random_table(&mut rng, n);
        let spec = CostSpec::new(rng.gen_range(0.001..1.0), rng.gen_range(0.0..0.2), rng.gen_range(0.0..1.0));
        let mut j = vec![0.0; n];
        for _ in 0..200 {
            let next: Vec<f64> = bellman(&j, &spec, &table).into_iter().map(|v| v.max(0.0)).collect();
            assert!(next.iter().zip(&j).all(|(a, b)| a >= b));
            j = next;
        }
    }
}

#[test]
fn bisection_feasibility_is_antitone() {
    let plant = HarmonicPair::matched(-3.0, 5).unwrap().plant([1.0, 0.0]).unwrap();
    let p = Partition::uniform([1.0, 0.0], 5).unwrap();
    let m = build_machine(&plant, &p).unwrap();
    let params = SearchParams::default();
    let rs: Vec<f64> = (0..40).map(|i| i as f64 * 0.001).collect();
    let feas: Vec<bool> =
        rs.iter().map(|&r| value_iteration(&CostSpec::new(0.01, r, 0.75), &m.table, &params).feasible).collect();
    let first_bad = feas.iter().position(|f| !f).unwrap_or(feas.len());
    assert!(first_bad > 0);
    assert!(feas[first_bad..].iter().all(|f| !f));
}

fn harmonic_plant(k0: f64, n: usize) -> (Plant, Partition) {
    (HarmonicPair::matched(k0, n).unwrap().plant([1.0, 0.0]).unwrap(), Partition::uniform([1.0, 0.0], n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observer_contains_direction(
        th in 0.0..std::f64::consts::TAU,
        inputs in proptest::collection::vec(0usize..2, 1..200),
        case in 0usize..3,
    ) {
        let (k0, n) = [(-3.0, 5), (2.0, 7), (0.5, 4)][case];
        let (plant, p) = harmonic_plant(k0, n);
        let m = build_machine(&plant, &p).unwrap();
        let mut x = [th.cos(), th.sin()];
        let mut q = 0;
        for &u in &inputs {
            let u = Input::from_index(u).unwrap();
            let theta = p.canonical(x[1].atan2(x[0]));
            prop_assert!(p.contains(m.states[q], theta, 1e-9));
            let s = plant.step(x, u).unwrap();
            prop_assert!(s.v <= m.table.h(q, u) + 1e-12);
            q = m.table.next(q, u, s.y);
            x = s.next;
        }
    }

    #[test]
    fn transitions_are_deterministic(case in 0usize..2, q in 0usize..39, u in 0usize..2, y in 0usize..2) {
        let (k0, n) = [(-3.0, 5), (2.0, 6)][case];
        let (plant, p) = harmonic_plant(k0, n);
        let m = build_machine(&plant, &p).unwrap();
        let (u, y) = (Input::from_index(u).unwrap(), Sign::ALL[y]);
        let a = hat_f(m.states[q], u, y, &plant, &p).unwrap().0;
        let b = hat_f(m.states[q], u, y, &plant, &p).unwrap().0;
        prop_assert_eq!(a, b);
        prop_assert_eq!(m.states[m.table.next(q, u, y)], a);
    }
}

#[test]
fn reachable_counts_are_bounded() {
    for n in 1..=9 {
        for k0 in [-3.0, 2.0, 0.0, -0.5] {
            let (plant, p) = harmonic_plant(k0, n);
            let m = build_machine(&plant, &p).unwrap();
            assert!(m.len() <= 2 * n * (2 * n - 1) + 1);
            assert!(m.table.is_total());
            assert_eq!(m.states[0], p.full());
        }
    }
}
