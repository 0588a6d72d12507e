//! Min-max value iteration for the small-gain switching problem.
//!
//! For fixed `tau`, `R` and gain `gamma0` the per-step supply is
//!
//! ```text
//! sigma(q, u, w) = tau w - R - h(q, u) - tau gamma0
//! ```
//!
//! and a stationary policy is wanted such that the adversary choosing `w`
//! (a flip of the predicted sensor sign) can never drive the partial sums
//! of `sigma` to minus infinity. That holds iff the monotone recursion
//! `J_{k+1} = max(0, T J_k)` from `J_0 = 0` stays bounded.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::abstraction::MachineTable;
use crate::graph::Digraph;
use crate::math;
use crate::plant::Input;

const REFUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub tau: f64,
    pub r: f64,
    pub gamma0: f64,
}

impl CostSpec {
    pub fn new(tau: f64, r: f64, gamma0: f64) -> Self {
        CostSpec { tau, r, gamma0 }
    }

    pub fn sigma(&self, table: &MachineTable, q: usize, u: Input, w: bool) -> f64 {
        let w = if w { 1.0 } else { 0.0 };
        self.tau * w - self.r - table.h(q, u) - self.tau * self.gamma0
    }

    pub fn max_abs_sigma(&self, table: &MachineTable) -> f64 {
        let mut m: f64 = 0.0;
        for q in 0..table.len() {
            for u in Input::ALL {
                for w in [false, true] {
                    m = m.max(self.sigma(table, q, u, w).abs());
                }
            }
        }
        m
    }

    /// `sum_q max_{u,w} max(0, -sigma)`. A bounded value function never
    /// exceeds it: under a feasible policy every path splits into cycles
    /// of nonpositive cost and one simple path.
    pub fn growth_bound(&self, table: &MachineTable) -> f64 {
        (0..table.len())
            .map(|q| {
                let mut worst: f64 = 0.0;
                for u in Input::ALL {
                    for w in [false, true] {
                        worst = worst.max(-self.sigma(table, q, u, w));
                    }
                }
                worst
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub feasible: bool,
    pub j: Vec<f64>,
    pub phi: Vec<Input>,
    pub iterations: usize,
    pub tau: f64,
    pub r: f64,
    pub gamma0: f64,
}

impl SynthesisResult {
    pub fn spec(&self) -> CostSpec {
        CostSpec::new(self.tau, self.r, self.gamma0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error("gamma0 must lie in [0, 1], got {0}")]
    BadGamma(f64),
    #[error("no tau on the grid is feasible at R = 0")]
    NoFeasibleTau,
}

/// Search and stopping parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// `tau = 10^e` for `e = e_min, e_min + e_step, ...` up to `e_max`.
    pub tau_exp_min: f64,
    pub tau_exp_max: f64,
    pub tau_exp_step: f64,
    /// Bisection stops when the bracket on `R` is this narrow.
    pub r_tol: f64,
    /// Sup-norm step at which value iteration is declared converged.
    pub vi_tol: f64,
    /// Hard cap; reaching it counts as infeasible.
    pub max_iter: usize,
    /// Every this many iterations the adversary's greedy strategy is
    /// tested as a refutation. Zero disables the test.
    pub refute_every: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            tau_exp_min: -3.0,
            tau_exp_max: 2.0,
            tau_exp_step: 0.1,
            r_tol: 1e-4,
            vi_tol: 1e-9,
            max_iter: 20_000_000,
            refute_every: 64,
        }
    }
}

impl SearchParams {
    pub fn tau_grid(&self) -> Vec<f64> {
        let steps = math::floor((self.tau_exp_max - self.tau_exp_min) / self.tau_exp_step + 1e-9) as usize;
        (0..=steps).map(|i| math::pow(10.0, self.tau_exp_min + i as f64 * self.tau_exp_step)).collect()
    }
}

/// One min-max step at state `q`: the minimizing input and its value.
/// Ties go to `u = 0`.
fn backup(j: &[f64], spec: &CostSpec, table: &MachineTable, q: usize) -> (Input, f64) {
    let mut best = (Input::Zero, f64::INFINITY);
    for u in Input::ALL {
        let worst = [false, true]
            .into_iter()
            .map(|w| -spec.sigma(table, q, u, w) + j[table.next_w(q, u, w)])
            .fold(f64::NEG_INFINITY, f64::max);
        if worst < best.1 {
            best = (u, worst);
        }
    }
    best
}

/// `(T J)(q) = min_u max_w { -sigma(q,u,w) + J(f(q,u,w)) }`.
pub fn bellman(j: &[f64], spec: &CostSpec, table: &MachineTable) -> Vec<f64> {
    (0..table.len()).map(|q| backup(j, spec, table, q).1).collect()
}

/// Greedy policy at `j`.
pub fn greedy_policy(j: &[f64], spec: &CostSpec, table: &MachineTable) -> Vec<Input> {
    (0..table.len()).map(|q| backup(j, spec, table, q).0).collect()
}

/// Whether the adversary strategy that is greedy at `j` already wins: with
/// it fixed, some state reaches only cycles of negative mean `sigma`,
/// whatever the inputs, so the sums from there are unbounded below.
pub fn adversary_refutes(j: &[f64], spec: &CostSpec, table: &MachineTable) -> bool {
    let mut g = Digraph::new(table.len());
    for q in 0..table.len() {
        for u in Input::ALL {
            let w = -spec.sigma(table, q, u, true) + j[table.next_w(q, u, true)]
                > -spec.sigma(table, q, u, false) + j[table.next_w(q, u, false)];
            g.add(q, table.next_w(q, u, w), spec.sigma(table, q, u, w));
        }
    }
    g.reachable_max_cycle_mean().iter().any(|m| m.is_some_and(|m| m < -REFUTE_TOL))
}

/// Runs `J_{k+1} = max(0, T J_k)` from zero.
///
/// Feasible when the sup-norm step drops to `params.vi_tol`. Infeasible
/// once `max J` exceeds [`CostSpec::growth_bound`], when
/// [`adversary_refutes`] fires, or at `params.max_iter`.
pub fn value_iteration(spec: &CostSpec, table: &MachineTable, params: &SearchParams) -> SynthesisResult {
    let n = table.len();
    let bound = spec.growth_bound(table) + 1e-9;
    let mut j = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut feasible = false;
    let mut k = 0;
    while k < params.max_iter {
        k += 1;
        let mut step: f64 = 0.0;
        let mut top: f64 = 0.0;
        for q in 0..n {
            let v = backup(&j, spec, table, q).1.max(0.0);
            step = step.max((v - j[q]).abs());
            top = top.max(v);
            next[q] = v;
        }
        core::mem::swap(&mut j, &mut next);
        if step <= params.vi_tol {
            feasible = true;
            break;
        }
        if top > bound {
            break;
        }
        if params.refute_every > 0 && k % params.refute_every == 0 && adversary_refutes(&j, spec, table) {
            break;
        }
    }
    let phi = if feasible { greedy_policy(&j, spec, table) } else { vec![Input::Zero; n] };
    SynthesisResult { feasible, j, phi, iterations: k, tau: spec.tau, r: spec.r, gamma0: spec.gamma0 }
}

/// Smallest slack of `sigma(q, phi(q), w) - J(f(q, phi(q), w)) + J(q)`.
pub fn storage_slack(result: &SynthesisResult, table: &MachineTable) -> f64 {
    let spec = result.spec();
    let mut slack = f64::INFINITY;
    for q in 0..table.len() {
        let u = result.phi[q];
        for w in [false, true] {
            let s = spec.sigma(table, q, u, w) - result.j[table.next_w(q, u, w)] + result.j[q];
            slack = slack.min(s);
        }
    }
    slack
}

/// Checks the storage inequality `J(f(q,phi(q),w)) - J(q) <= sigma(q,phi(q),w)`
/// for every state and disturbance, to `1e-7`.
pub fn verify_policy(result: &SynthesisResult, table: &MachineTable) -> bool {
    result.feasible && result.j.len() == table.len() && result.phi.len() == table.len() && storage_slack(result, table) >= -1e-7
}

/// `R` above which the loop cannot be feasible at `tau`: even with `w = 0`
/// throughout, some cycle must collect `-h >= R + tau gamma0`.
pub fn r_upper_bound(table: &MachineTable, tau: f64, gamma0: f64) -> f64 {
    let min_h = (0..table.len()).flat_map(|q| Input::ALL.map(|u| table.h(q, u))).fold(f64::INFINITY, f64::min);
    -min_h - tau * gamma0
}

/// Largest feasible `R` at a fixed `tau`, by bisection. `None` when `R = 0`
/// is already infeasible.
pub fn evaluate_tau(table: &MachineTable, gamma0: f64, tau: f64, params: &SearchParams) -> Option<SynthesisResult> {
    let base = value_iteration(&CostSpec::new(tau, 0.0, gamma0), table, params);
    if !base.feasible {
        return None;
    }
    let mut best = base;
    let mut lo = 0.0;
    let mut hi = r_upper_bound(table, tau, gamma0);
    if hi <= lo {
        return Some(best);
    }
    let top = value_iteration(&CostSpec::new(tau, hi, gamma0), table, params);
    if top.feasible {
        return Some(top);
    }
    while hi - lo > params.r_tol {
        let mid = 0.5 * (lo + hi);
        let res = value_iteration(&CostSpec::new(tau, mid, gamma0), table, params);
        if res.feasible {
            lo = mid;
            best = res;
        } else {
            hi = mid;
        }
    }
    Some(best)
}

/// Largest `R`, ties toward the smaller `tau`. Candidates are expected in
/// increasing `tau` order.
pub fn select_best(candidates: impl IntoIterator<Item = SynthesisResult>) -> Option<SynthesisResult> {
    let mut best: Option<SynthesisResult> = None;
    for c in candidates {
        let better = match &best {
            None => true,
            Some(b) => c.r > b.r || (c.r == b.r && c.tau < b.tau),
        };
        if better {
            best = Some(c);
        }
    }
    best
}

/// Sequential grid scan over `tau` followed by bisection on `R`.
pub fn search_tau_r(table: &MachineTable, gamma0: f64, params: &SearchParams) -> Result<SynthesisResult, SynthesisError> {
    if !(0.0..=1.0).contains(&gamma0) {
        return Err(SynthesisError::BadGamma(gamma0));
    }
    let found = params.tau_grid().into_iter().filter_map(|tau| evaluate_tau(table, gamma0, tau, params));
    select_best(found).ok_or(SynthesisError::NoFeasibleTau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sign;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::vec::Vec;

    fn flat_table(n: usize, h: f64) -> MachineTable {
        MachineTable {
            trans: (0..n).map(|q| [(q + 1) % n, q, q, (q + 1) % n]).collect(),
            g_out: vec![Sign::Pos; n],
            h_out: vec![[h, h]; n],
            d_flag: vec![false; n],
        }
    }

    fn random_table(rng: &mut ChaCha8Rng, n: usize) -> MachineTable {
        MachineTable {
            trans: (0..n).map(|_| core::array::from_fn(|_| rng.gen_range(0..n))).collect(),
            g_out: (0..n).map(|_| if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg }).collect(),
            h_out: (0..n).map(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]).collect(),
            d_flag: vec![true; n],
        }
    }

    fn spec_for(rng: &mut ChaCha8Rng) -> CostSpec {
        CostSpec::new(rng.gen_range(0.01..1.0), rng.gen_range(0.0..0.2), rng.gen_range(0.0..1.0))
    }

    #[test]
    fn zero_cost_converges_immediately() {
        let t = flat_table(4, 0.0);
        let res = value_iteration(&CostSpec::new(1.0, 0.0, 0.0), &t, &SearchParams::default());
        assert!(res.feasible);
        assert_eq!(res.iterations, 1);
        assert!(res.j.iter().all(|&v| v == 0.0));
        assert!(verify_policy(&res, &t));
        assert_eq!(bellman(&res.j, &res.spec(), &t), vec![0.0; 4]);
    }

    #[test]
    fn minus_one_cost_diverges() {
        // sigma = -1 everywhere: h = 1, tau gamma0 = 0.
        let t = flat_table(3, 1.0);
        let res = value_iteration(&CostSpec::new(1.0, 0.0, 0.0), &t, &SearchParams::default());
        assert!(!res.feasible);
        assert!(res.iterations <= 10);
    }

    #[test]
    fn contraction_bound() {
        // One contracting mode, the other expanding, no disagreement.
        let mut t = flat_table(5, -0.3);
        for h in &mut t.h_out {
            h[1] = 0.2;
        }
        let p = SearchParams::default();
        let res = search_tau_r(&t, 0.0, &p).unwrap();
        assert!(res.r > 0.3 - 1e-4 && res.r <= 0.3, "{}", res.r);
        assert!(res.phi.iter().all(|&u| u == Input::Zero));
        assert!(verify_policy(&res, &t));
    }

    #[test]
    fn mutated_storage_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 20 {
            let t = random_table(&mut rng, 6);
            let res = value_iteration(&spec_for(&mut rng), &t, &SearchParams::default());
            if !res.feasible {
                continue;
            }
            assert!(verify_policy(&res, &t));
            // At the fixed point, a state with J > 0 is tight on some
            // disturbance; lowering J there must break that inequality.
            let spec = res.spec();
            let tight = (0..6).find(|&q| {
                res.j[q] > 1e-6
                    && [false, true].iter().any(|&w| {
                        let nq = t.next_w(q, res.phi[q], w);
                        nq != q && (spec.sigma(&t, q, res.phi[q], w) - res.j[nq] + res.j[q]).abs() < 1e-7
                    })
            });
            let Some(q) = tight else { continue };
            let mut bad = res.clone();
            bad.j[q] -= 1.0;
            assert!(!verify_policy(&bad, &t));
            checked += 1;
        }
    }

    #[test]
    fn operator_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=10);
            let t = random_table(&mut rng, n);
            let spec = spec_for(&mut rng);
            let j1: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let j2: Vec<f64> = j1.iter().map(|v| v + rng.gen_range(0.0..1.0)).collect();
            let c = rng.gen_range(-3.0..3.0);
            let t1 = bellman(&j1, &spec, &t);
            let t2 = bellman(&j2, &spec, &t);
            assert!(t1.iter().zip(&t2).all(|(a, b)| a <= b));
            let shifted: Vec<f64> = j1.iter().map(|v| v + c).collect();
            let ts = bellman(&shifted, &spec, &t);
            assert!(ts.iter().zip(&t1).all(|(a, b)| (a - (b + c)).abs() < 1e-12));
        }
    }

    #[test]
    fn tau_grid_has_51_points() {
        let g = SearchParams::default().tau_grid();
        assert_eq!(g.len(), 51);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[50] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn select_prefers_smaller_tau_on_ties() {
        let mk = |tau, r| SynthesisResult { feasible: true, j: vec![], phi: vec![], iterations: 0, tau, r, gamma0: 0.5 };
        let best = select_best([mk(0.1, 0.02), mk(0.2, 0.03), mk(0.5, 0.03)]).unwrap();
        assert_eq!(best.tau, 0.2);
        assert!(select_best(Vec::new()).is_none());
    }
}
