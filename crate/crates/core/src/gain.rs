//! Gain of the disagreement between predicted and true sensor output.
//!
//! A potential `V` with `V(f(q,u,y)) - V(q) <= gamma - d(q)` on every edge
//! exists iff no cycle of the transition graph has mean `d` above `gamma`,
//! so the least such `gamma` is the maximum cycle mean of `d`.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::abstraction::MachineTable;
use crate::graph::Digraph;
use crate::simplex::{self, LpError};

const NEG_CYCLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error("machine has no states")]
    Empty,
    #[error("gamma {0} is below the maximum cycle mean (negative cycle)")]
    NegativeCycle(f64),
    #[error("LP failed: {0}")]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainCertificate {
    pub gamma: f64,
    pub v: Vec<f64>,
    /// Smallest `gamma - d(q) - V(q') + V(q)` over all edges.
    pub slack_min: f64,
}

impl GainCertificate {
    /// `min_{q1,q2} V(q1) - V(q2)`.
    pub fn min_v_difference(&self) -> f64 {
        let lo = self.v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo - hi
    }

    /// Recomputes the slack against `table`.
    pub fn slack(&self, table: &MachineTable) -> f64 {
        table.edges().map(|(s, t)| self.gamma - table.d(s) - self.v[t] + self.v[s]).fold(f64::INFINITY, f64::min)
    }
}

/// Maximum cycle mean of `d` by Karp's algorithm, with every node as a
/// source.
pub fn max_cycle_mean(table: &MachineTable) -> Result<f64, GainError> {
    let n = table.len();
    if n == 0 {
        return Err(GainError::Empty);
    }
    let mut g = Digraph::new(n);
    for (s, t) in table.edges() {
        g.add(s, t, table.d(s));
    }
    // Every node has out-edges, so a cycle exists.
    Ok(g.max_cycle_mean().unwrap_or(0.0))
}

/// Shortest-path potential on edge weights `gamma - d(source)`.
pub fn certificate(table: &MachineTable, gamma: f64) -> Result<GainCertificate, GainError> {
    let n = table.len();
    if n == 0 {
        return Err(GainError::Empty);
    }
    let mut v = vec![0.0; n];
    let mut settled = false;
    for _ in 0..=n {
        let mut changed = false;
        for (s, t) in table.edges() {
            let cand = v[s] + gamma - table.d(s);
            if cand < v[t] - NEG_CYCLE_TOL {
                v[t] = cand;
                changed = true;
            }
        }
        if !changed {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(GainError::NegativeCycle(gamma));
    }
    let mut cert = GainCertificate { gamma, v, slack_min: 0.0 };
    cert.slack_min = cert.slack(table);
    Ok(cert)
}

/// `min gamma` subject to the potential inequalities, solved through its
/// dual: a unit-mass circulation maximizing the `d` it collects.
pub fn lp_cross_check(table: &MachineTable) -> Result<f64, GainError> {
    let n = table.len();
    if n == 0 {
        return Err(GainError::Empty);
    }
    let edges: Vec<(usize, usize)> = table.edges().collect();
    let c: Vec<f64> = edges.iter().map(|&(s, _)| table.d(s)).collect();
    // out(v) - in(v) <= 0 for every node forces conservation, since the
    // rows sum to zero.
    let mut a = vec![vec![0.0; edges.len()]; n + 1];
    for (e, &(s, t)) in edges.iter().enumerate() {
        a[s][e] += 1.0;
        a[t][e] -= 1.0;
        a[n][e] = 1.0;
    }
    let mut b = vec![0.0; n + 1];
    b[n] = 1.0;
    let sol = simplex::maximize(&c, &a, &b)?;
    Ok(sol.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::build_machine;
    use crate::geometry::{Partition, Sign};
    use crate::plant::HarmonicPair;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(trans: Vec<[usize; 4]>, d: Vec<bool>) -> MachineTable {
        let n = trans.len();
        MachineTable { trans, g_out: vec![Sign::Pos; n], h_out: vec![[0.0; 2]; n], d_flag: d }
    }

    fn random_table(rng: &mut ChaCha8Rng, n: usize) -> MachineTable {
        let trans = (0..n).map(|_| core::array::from_fn(|_| rng.gen_range(0..n))).collect();
        let d = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        table(trans, d)
    }

    /// Every simple cycle, as node lists with the smallest node first.
    fn simple_cycle_max_mean(t: &MachineTable) -> f64 {
        let n = t.len();
        let mut adj = vec![vec![false; n]; n];
        for (s, d) in t.edges() {
            adj[s][d] = true;
        }
        let mut best = f64::NEG_INFINITY;
        fn dfs(
            start: usize,
            v: usize,
            path: &mut Vec<usize>,
            on: &mut [bool],
            adj: &[Vec<bool>],
            t: &MachineTable,
            best: &mut f64,
        ) {
            for w in 0..adj.len() {
                if !adj[v][w] || w < start {
                    continue;
                }
                if w == start {
                    let mean = path.iter().map(|&q| t.d(q)).sum::<f64>() / path.len() as f64;
                    *best = best.max(mean);
                } else if !on[w] {
                    on[w] = true;
                    path.push(w);
                    dfs(start, w, path, on, adj, t, best);
                    path.pop();
                    on[w] = false;
                }
            }
        }
        for s in 0..n {
            let mut on = vec![false; n];
            on[s] = true;
            dfs(s, s, &mut vec![s], &mut on, &adj, t, &mut best);
        }
        best
    }

    #[test]
    fn trivial_examples() {
        let zero = table(vec![[0, 1, 0, 1], [1, 0, 1, 0]], vec![false, false]);
        assert_eq!(max_cycle_mean(&zero).unwrap(), 0.0);
        assert!(lp_cross_check(&zero).unwrap().abs() < 1e-12);
        let c = certificate(&zero, 0.0).unwrap();
        assert!(c.slack_min >= 0.0);

        let two = table(vec![[1; 4], [0; 4]], vec![true, false]);
        assert!((max_cycle_mean(&two).unwrap() - 0.5).abs() < 1e-15);
        assert!((lp_cross_check(&two).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn table_instances() {
        for (k0, n, want) in [(-3.0, 5, 0.75), (-3.0, 10, 0.625), (2.0, 6, 1.0)] {
            let plant = HarmonicPair::matched(k0, n).unwrap().plant([1.0, 0.0]).unwrap();
            let p = Partition::uniform([1.0, 0.0], n).unwrap();
            let m = build_machine(&plant, &p).unwrap();
            let g = max_cycle_mean(&m.table).unwrap();
            assert!((g - want).abs() < 1e-12, "{k0} {n} {g}");
            assert!((lp_cross_check(&m.table).unwrap() - g).abs() < 1e-9);
            let cert = certificate(&m.table, g).unwrap();
            assert!(cert.slack_min >= -1e-9);
            assert!(matches!(certificate(&m.table, g - 0.01), Err(GainError::NegativeCycle(_))));
        }
    }

    #[test]
    fn random_machines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = rng.gen_range(1..=12);
            let t = random_table(&mut rng, n);
            let karp = max_cycle_mean(&t).unwrap();
            let lp = lp_cross_check(&t).unwrap();
            assert!((karp - lp).abs() < 1e-9, "trial {trial}: {karp} vs {lp}");
            if n <= 8 {
                assert!((karp - simple_cycle_max_mean(&t)).abs() < 1e-12);
            }
            let cert = certificate(&t, karp).unwrap();
            assert!(cert.slack_min >= -1e-9);
            assert!((0.0..=1.0).contains(&karp));
        }
    }
}
