//! Weighted digraph helpers: strongly connected components and maximum
//! cycle means.

use alloc::vec;
use alloc::vec::Vec;

/// Edge list graph on nodes `0..n`.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { n, edges: Vec::new() }
    }

    pub fn add(&mut self, s: usize, t: usize, w: f64) {
        self.edges.push((s, t, w));
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(s, t, _) in &self.edges {
            adj[s].push(t);
        }
        adj
    }

    /// Component id per node. Ids come out in reverse topological order:
    /// every edge goes from a component to one with an equal or smaller id.
    pub fn scc(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let n = self.n;
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut comp = vec![usize::MAX; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_comp = 0;
        // Explicit DFS stack of (node, next child position).
        let mut work: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            work.push((root, 0));
            while let Some(&mut (v, ref mut child)) = work.last_mut() {
                if *child == 0 && index[v] == usize::MAX {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                }
                if let Some(&w) = adj[v].get(*child) {
                    *child += 1;
                    if index[w] == usize::MAX {
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
        comp
    }

    /// Maximum mean weight over directed cycles (Karp), `None` if acyclic.
    pub fn max_cycle_mean(&self) -> Option<f64> {
        let n = self.n;
        if n == 0 {
            return None;
        }
        // dk[k * n + v]: heaviest walk of exactly k edges ending at v, from
        // any start.
        let mut dk = vec![f64::NEG_INFINITY; (n + 1) * n];
        dk[..n].fill(0.0);
        for k in 1..=n {
            let (prev, cur) = dk.split_at_mut(k * n);
            let prev = &prev[(k - 1) * n..];
            let cur = &mut cur[..n];
            for &(s, t, w) in &self.edges {
                let cand = prev[s] + w;
                if cand > cur[t] {
                    cur[t] = cand;
                }
            }
        }
        let last = &dk[n * n..];
        let mut best: Option<f64> = None;
        for v in 0..n {
            if last[v] == f64::NEG_INFINITY {
                continue;
            }
            let worst = (0..n)
                .filter(|&k| dk[k * n + v] > f64::NEG_INFINITY)
                .map(|k| (last[v] - dk[k * n + v]) / (n - k) as f64)
                .fold(f64::INFINITY, f64::min);
            best = Some(best.map_or(worst, |b: f64| b.max(worst)));
        }
        best
    }

    /// For every node, the largest mean of a cycle reachable from it
    /// (`None` when no cycle is reachable).
    pub fn reachable_max_cycle_mean(&self) -> Vec<Option<f64>> {
        let comp = self.scc();
        let ncomp = comp.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut local = vec![0usize; self.n];
        let mut sizes = vec![0usize; ncomp];
        for v in 0..self.n {
            local[v] = sizes[comp[v]];
            sizes[comp[v]] += 1;
        }
        let mut inner: Vec<Digraph> = sizes.iter().map(|&s| Digraph::new(s)).collect();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
        for &(s, t, w) in &self.edges {
            let (cs, ct) = (comp[s], comp[t]);
            if cs == ct {
                inner[cs].add(local[s], local[t], w);
            } else {
                succ[cs].push(ct);
            }
        }
        let mut best: Vec<Option<f64>> = vec![None; ncomp];
        // Successor components have smaller ids, so increasing id order is a
        // valid evaluation order.
        for c in 0..ncomp {
            let mut b = inner[c].max_cycle_mean();
            for &d in &succ[c] {
                b = match (b, best[d]) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                };
            }
            best[c] = b;
        }
        comp.iter().map(|&c| best[c]).collect()
    }
}
