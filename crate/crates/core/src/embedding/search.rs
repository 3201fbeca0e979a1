//! Chain placement search for minor embedding.
//!
//! Chains are placed one logical vertex at a time. A vertex whose neighbours
//! already have chains is rooted at the hardware node minimizing the summed
//! weighted distance to those chains, and its chain is the union of the
//! shortest paths from the root. Node weights grow exponentially with the
//! number of chains already occupying a node, so overlaps are allowed while
//! searching but strongly discouraged. Rounds of rip-up and re-placement
//! continue until no node is shared, then a few more rounds try to shrink
//! the total qubit count.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ChimeraGraph, Graph};

/// Rounds without improvement tolerated once a valid layout exists.
const PATIENCE: usize = 4;

/// Per-round growth of the overlap penalty base.
const GROWTH: f64 = 1.5;

/// Relative random perturbation of node weights in each placement.
const JITTER: f64 = 0.25;

pub(crate) struct ChainSearch<'a> {
    logical: &'a Graph,
    hw: &'a Graph,
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    penalty: f64,
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> ChainSearch<'a> {
    pub fn new(logical: &'a Graph, hw: &'a Graph) -> Self {
        Self {
            logical,
            hw,
            chains: vec![Vec::new(); logical.num_nodes()],
            usage: vec![0; hw.num_nodes()],
            penalty: 2.0,
        }
    }

    /// Runs up to `max_rounds` rounds. Returns the smallest overlap-free
    /// layout seen, if any.
    pub fn run(mut self, rng: &mut ChaCha8Rng, max_rounds: usize) -> Option<Vec<Vec<usize>>> {
        if self.logical.num_nodes() > self.hw.num_nodes() {
            return None;
        }
        let mut order: Vec<usize> = (0..self.logical.num_nodes()).collect();
        let mut best: Option<(usize, Vec<Vec<usize>>)> = None;
        let mut stale = 0;
        let max_penalty = self.hw.num_nodes().max(2) as f64;
        for round in 0..max_rounds {
            if round == 0 {
                order = self.bfs_order(rng);
            } else {
                order.shuffle(rng);
            }
            for &v in &order {
                self.remove(v);
                let neighbors: Vec<usize> = self.logical.neighbors(v).collect();
                for u in neighbors {
                    self.shrink(u);
                }
                let chain = self.place(v, rng);
                self.insert(v, chain);
            }
            self.penalty = (self.penalty * GROWTH).min(max_penalty);
            if self.usage.iter().all(|&u| u <= 1) {
                let size: usize = self.chains.iter().map(Vec::len).sum();
                if !best.as_ref().is_some_and(|(b, _)| size >= *b) {
                    best = Some((size, self.chains.clone()));
                    stale = 0;
                } else {
                    stale += 1;
                }
                if stale >= PATIENCE {
                    break;
                }
            }
        }
        best.map(|(_, chains)| chains)
    }

    fn remove(&mut self, v: usize) {
        for &q in &self.chains[v] {
            self.usage[q] -= 1;
        }
        self.chains[v].clear();
    }

    /// Logical vertices in breadth-first order from random roots, so early
    /// placements land next to already placed neighbours.
    fn bfs_order(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = self.logical.num_nodes();
        let mut starts: Vec<usize> = (0..n).collect();
        starts.shuffle(rng);
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in starts {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut next: Vec<usize> = self.logical.neighbors(v).filter(|&u| !seen[u]).collect();
                next.shuffle(rng);
                for u in next {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        order
    }

    /// Drops leaves of chain `u` that no placed neighbour needs.
    fn shrink(&mut self, u: usize) {
        let hw = self.hw;
        let needed: Vec<usize> = self
            .logical
            .neighbors(u)
            .filter(|&w| !self.chains[w].is_empty())
            .collect();
        let mut i = 0;
        while self.chains[u].len() > 1 && i < self.chains[u].len() {
            let chain = &self.chains[u];
            let q = chain[i];
            let inside = chain.iter().filter(|&&p| hw.has_edge(p, q)).count();
            let removable = inside <= 1
                && needed.iter().all(|&w| {
                    self.chains[w]
                        .iter()
                        .any(|&t| chain.iter().any(|&p| p != q && hw.has_edge(p, t)))
                });
            if removable {
                self.chains[u].remove(i);
                self.usage[q] -= 1;
                i = 0;
            } else {
                i += 1;
            }
        }
    }

    fn insert(&mut self, v: usize, mut chain: Vec<usize>) {
        chain.sort_unstable();
        chain.dedup();
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[v] = chain;
    }

    fn weight(&self, q: usize) -> f64 {
        self.penalty.powi(self.usage[q] as i32)
    }

    fn place(&self, v: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let placed: Vec<usize> = self
            .logical
            .neighbors(v)
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        let n = self.hw.num_nodes();

        if placed.is_empty() {
            let least = *self.usage.iter().min().unwrap();
            let free: Vec<usize> = (0..n).filter(|&q| self.usage[q] == least).collect();
            return vec![free[rng.random_range(0..free.len())]];
        }

        // Random jitter on the node weights keeps re-placement from cycling
        // through the same ties round after round.
        let weights: Vec<f64> = (0..n)
            .map(|q| self.weight(q) * (1.0 + JITTER * rng.random::<f64>()))
            .collect();
        let searches: Vec<(Vec<f64>, Vec<usize>)> = placed
            .iter()
            .map(|&u| self.shortest_paths(&self.chains[u], &weights))
            .collect();

        let mut best_cost = f64::INFINITY;
        let mut roots = Vec::new();
        for q in 0..n {
            let w = weights[q];
            let mut cost = w;
            for (&u, (dist, _)) in placed.iter().zip(&searches) {
                if self.chains[u].binary_search(&q).is_err() {
                    cost += dist[q] - w;
                }
            }
            match cost.total_cmp(&best_cost) {
                Ordering::Less => {
                    best_cost = cost;
                    roots.clear();
                    roots.push(q);
                }
                Ordering::Equal => roots.push(q),
                Ordering::Greater => {}
            }
        }
        let root = roots[rng.random_range(0..roots.len())];

        let mut chain = vec![root];
        for (&u, (_, pred)) in placed.iter().zip(&searches) {
            let target = &self.chains[u];
            let mut q = root;
            while target.binary_search(&q).is_err() {
                let p = pred[q];
                if p == usize::MAX || target.binary_search(&p).is_ok() {
                    break;
                }
                chain.push(p);
                q = p;
            }
        }
        chain
    }

    /// Weighted distances from `sources` (cost 0) where entering a node costs
    /// its weight. `pred[q]` is the previous node on a shortest path.
    fn shortest_paths(&self, sources: &[usize], weights: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let n = self.hw.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            pred[s] = s;
            heap.push(Frontier(0.0, s));
        }
        while let Some(Frontier(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for v in self.hw.neighbors(u) {
                let nd = d + weights[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u;
                    heap.push(Frontier(nd, v));
                }
            }
        }
        (dist, pred)
    }
}

/// Drops chain leaves that no logical edge needs, until nothing changes.
pub(crate) fn trim_chains(chains: &mut [Vec<usize>], logical: &Graph, hw: &Graph) {
    let covers = |a: &[usize], b: &[usize]| a.iter().any(|&p| b.iter().any(|&q| hw.has_edge(p, q)));
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..chains.len() {
            let mut i = 0;
            while i < chains[v].len() && chains[v].len() > 1 {
                let q = chains[v][i];
                let inside = chains[v].iter().filter(|&&p| hw.has_edge(p, q)).count();
                if inside <= 1 {
                    let rest: Vec<usize> = chains[v].iter().copied().filter(|&p| p != q).collect();
                    let ok = logical.neighbors(v).all(|u| covers(&rest, &chains[u]));
                    if ok {
                        chains[v] = rest;
                        changed = true;
                        continue;
                    }
                }
                i += 1;
            }
        }
    }
}

/// Deterministic layout of `K_n` on a Chimera graph.
///
/// Vertex `v = L*i + k` takes the shore-0 qubits `k` of cells `(0..=i, i)`
/// and the shore-1 qubits `k` of cells `(i, i..t)`, where `t = ceil(n/L)`.
/// Any two chains `i < j` meet in cell `(i, j)`. Chains have length `t + 1`.
pub(crate) fn clique_layout(n: usize, hw: &ChimeraGraph) -> Option<Vec<Vec<usize>>> {
    let shore = hw.shore();
    let t = n.div_ceil(shore);
    if n == 0 || t > hw.rows() || t > hw.cols() {
        return None;
    }
    let chains = (0..n)
        .map(|v| {
            let (i, k) = (v / shore, v % shore);
            let mut chain: BTreeSet<usize> = (0..=i).map(|r| hw.node(r, i, 0, k)).collect();
            chain.extend((i..t).map(|c| hw.node(i, c, 1, k)));
            chain.into_iter().collect()
        })
        .collect();
    Some(chains)
}
