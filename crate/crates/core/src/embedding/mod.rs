//! Hardware graphs, minor embedding and chain handling.
//!
//! A logical model rarely matches the sparse hardware graph, so each logical
//! variable is represented by a *chain*: a connected set of physical qubits
//! held together by one ferromagnetic coupling `c < 0`. After sampling, each
//! chain is collapsed back to one logical value.

mod chimera;
mod graph;
mod search;

pub use chimera::{chimera, ChimeraCoord, ChimeraGraph, TopologySpec};
pub use graph::Graph;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{HardwareRange, IsingModel, VarKind};
use crate::sampler::{derive_seed, SampleInfo, SampleSet};

/// Chain strength used when none is given.
pub const DEFAULT_CHAIN_STRENGTH: f64 = -5.0;

/// Map from logical variables to disjoint connected chains of physical
/// qubits, plus the coupling applied inside every chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    chains: BTreeMap<usize, Vec<usize>>,
    chain_strength: f64,
}

impl Embedding {
    /// Chains are stored sorted; `chain_strength` must be negative.
    pub fn new(chains: BTreeMap<usize, Vec<usize>>, chain_strength: f64) -> Result<Self> {
        if !(chain_strength.is_finite() && chain_strength < 0.0) {
            return invalid(format!("chain strength must be negative, got {chain_strength}"));
        }
        let chains = chains
            .into_iter()
            .map(|(v, mut c)| {
                c.sort_unstable();
                c.dedup();
                (v, c)
            })
            .collect();
        Ok(Self {
            chains,
            chain_strength,
        })
    }

    fn from_layout(layout: Vec<Vec<usize>>, chain_strength: f64) -> Result<Self> {
        Self::new(layout.into_iter().enumerate().collect(), chain_strength)
    }

    pub fn chains(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.chains
    }

    pub fn chain(&self, v: usize) -> Option<&[usize]> {
        self.chains.get(&v).map(Vec::as_slice)
    }

    pub fn chain_strength(&self) -> f64 {
        self.chain_strength
    }

    pub fn with_chain_strength(mut self, chain_strength: f64) -> Result<Self> {
        if !(chain_strength.is_finite() && chain_strength < 0.0) {
            return invalid(format!("chain strength must be negative, got {chain_strength}"));
        }
        self.chain_strength = chain_strength;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks that every logical vertex has a non-empty chain of valid
    /// hardware nodes, chains are pairwise disjoint and connected, and every
    /// logical edge is realized by at least one hardware edge.
    pub fn validate(&self, logical: &Graph, hw: &Graph) -> Result<()> {
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..logical.num_nodes() {
            let Some(chain) = self.chain(v).filter(|c| !c.is_empty()) else {
                return invalid(format!("logical variable {v} has no chain"));
            };
            for &q in chain {
                if q >= hw.num_nodes() {
                    return invalid(format!("chain {v} uses node {q} outside the hardware graph"));
                }
                if let Some(other) = owner.insert(q, v) {
                    return invalid(format!("node {q} is shared by chains {other} and {v}"));
                }
            }
            if !hw.is_connected_subset(chain) {
                return invalid(format!("chain {v} is not connected"));
            }
        }
        if let Some(&v) = self.chains.keys().find(|&&v| v >= logical.num_nodes()) {
            return invalid(format!("chain for unknown logical variable {v}"));
        }
        for (u, v) in logical.edges() {
            if coupling_edges(hw, &self.chains[&u], &self.chains[&v]).is_empty() {
                return invalid(format!("logical edge ({u}, {v}) has no hardware coupler"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Embedding = serde_json::from_str(text)?;
        Self::new(raw.chains, raw.chain_strength)
    }
}

/// Hardware edges `(p, q)` with `p` in `a` and `q` in `b`, ascending.
fn coupling_edges(hw: &Graph, a: &[usize], b: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &p in a {
        for &q in b {
            if hw.has_edge(p, q) {
                out.push((p, q));
            }
        }
    }
    out
}

/// Hardware edges with both ends inside `chain`.
fn internal_edges(hw: &Graph, chain: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &p) in chain.iter().enumerate() {
        for &q in &chain[i + 1..] {
            if hw.has_edge(p, q) {
                out.push((p, q));
            }
        }
    }
    out
}

/// Search budget for [`find_embedding_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingOptions {
    pub chain_strength: f64,
    pub max_restarts: usize,
    pub max_rounds: usize,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            chain_strength: DEFAULT_CHAIN_STRENGTH,
            max_restarts: 16,
            max_rounds: 64,
        }
    }
}

pub fn find_embedding(logical: &Graph, hw: &ChimeraGraph, seed: u64) -> Result<Embedding> {
    find_embedding_with(logical, hw, seed, &EmbeddingOptions::default())
}

/// Minor-embeds `logical` into `hw`.
///
/// Randomized restarts run in order with seeds derived from `seed`; the
/// first overlap-free layout wins. When the graph is small enough for the
/// constructive clique layout, that layout (trimmed to the graph's edges) is
/// also built, the heuristic gets at most two restarts, and the smaller of
/// the two results is kept.
pub fn find_embedding_with(
    logical: &Graph,
    hw: &ChimeraGraph,
    seed: u64,
    options: &EmbeddingOptions,
) -> Result<Embedding> {
    if logical.num_nodes() == 0 {
        return invalid("cannot embed an empty graph");
    }
    let size = |l: &Vec<Vec<usize>>| l.iter().map(Vec::len).sum::<usize>();
    let fallback = search::clique_layout(logical.num_nodes(), hw).map(|mut l| {
        search::trim_chains(&mut l, logical, hw.graph());
        l
    });
    let restarts = if fallback.is_some() {
        options.max_restarts.min(2)
    } else {
        options.max_restarts
    };
    let mut found = None;
    for attempt in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt as u64));
        if let Some(mut layout) =
            search::ChainSearch::new(logical, hw.graph()).run(&mut rng, options.max_rounds)
        {
            search::trim_chains(&mut layout, logical, hw.graph());
            found = Some(layout);
            break;
        }
    }
    if let Some(clique) = fallback {
        if !found.as_ref().is_some_and(|f| size(&clique) >= size(f)) {
            log::debug!("using the clique layout ({} qubits)", size(&clique));
            found = Some(clique);
        }
    }
    let layout = found.ok_or(Error::EmbeddingFailure { attempts: restarts })?;
    let embedding = Embedding::from_layout(layout, options.chain_strength)?;
    embedding.validate(logical, hw.graph())?;
    Ok(embedding)
}

/// The constructive clique layout alone.
pub fn clique_embedding(n: usize, hw: &ChimeraGraph, chain_strength: f64) -> Result<Embedding> {
    let layout = search::clique_layout(n, hw).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "K_{n} does not fit a {}x{} chimera with shore {}",
            hw.rows(),
            hw.cols(),
            hw.shore()
        ))
    })?;
    Embedding::from_layout(layout, chain_strength)
}

pub fn embed_model(m: &IsingModel, e: &Embedding, hw: &Graph) -> Result<IsingModel> {
    embed_model_in_range(m, e, hw, &HardwareRange::default())
}

/// Builds the physical model over every hardware node.
///
/// Fields are split evenly along each chain. A logical coupling goes on the
/// first hardware edge between its two chains, or is split evenly over as
/// many of those edges as needed to stay inside `range`. Every edge inside a
/// chain gets the chain strength, and the offset is lowered by
/// `c * (internal edge count)` so an unbroken configuration keeps its
/// logical energy.
pub fn embed_model_in_range(
    m: &IsingModel,
    e: &Embedding,
    hw: &Graph,
    range: &HardwareRange,
) -> Result<IsingModel> {
    let logical = Graph::from_model(m);
    e.validate(&logical, hw)?;

    let mut physical = IsingModel::new(hw.num_nodes());
    for (v, chain) in e.chains() {
        let share = m.linear_at(*v) / chain.len() as f64;
        for &q in chain {
            physical.set_linear(q, share)?;
        }
    }
    for (&(u, v), &j) in m.quadratic() {
        let edges = coupling_edges(hw, &e.chains[&u], &e.chains[&v]);
        let used = if range.contains_coupling(j) {
            1
        } else {
            let limit = if j > 0.0 { range.j_max } else { range.j_min.abs() };
            if limit > 0.0 {
                ((j.abs() / limit).ceil() as usize).clamp(1, edges.len())
            } else {
                edges.len()
            }
        };
        let part = j / used as f64;
        for &(p, q) in &edges[..used] {
            physical.add_quadratic(p, q, part)?;
        }
    }
    let mut internal = 0usize;
    for chain in e.chains().values() {
        for (p, q) in internal_edges(hw, chain) {
            physical.add_quadratic(p, q, e.chain_strength())?;
            internal += 1;
        }
    }
    physical.set_offset(m.offset() - e.chain_strength() * internal as f64)?;
    Ok(physical)
}

/// How broken chains are resolved during unembedding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BrokenChains {
    /// Majority vote; ties go to the lowest-indexed qubit of the chain.
    #[default]
    MajorityVote,
    /// Drop reads containing any broken chain.
    Discard,
}

/// Majority value of a chain. `values` follows the chain's ascending node
/// order, so ties go to `values[0]`.
pub fn majority_vote(values: &[i8]) -> i8 {
    let sum: i32 = values.iter().map(|&v| i32::from(v)).sum();
    match sum.signum() {
        1 => 1,
        -1 => -1,
        _ => values[0],
    }
}

/// Collapses physical samples onto logical variables and rescores them on
/// `logical`. Each record keeps its broken-chain count.
pub fn unembed(
    s: &SampleSet,
    e: &Embedding,
    logical: &IsingModel,
    policy: BrokenChains,
) -> Result<SampleSet> {
    let n = logical.num_vars();
    if let Some(v) = (0..n).find(|v| e.chain(*v).is_none()) {
        return invalid(format!("embedding has no chain for logical variable {v}"));
    }
    let mut reads = Vec::with_capacity(s.len());
    let mut discarded = 0usize;
    for r in s.records() {
        let spins = s.assignment(r).to_kind(VarKind::Ising).into_values();
        let mut broken = 0usize;
        let mut values = Vec::with_capacity(n);
        for v in 0..n {
            let chain_values: Vec<i8> = e.chains[&v]
                .iter()
                .map(|&q| spins.get(q).copied())
                .collect::<Option<_>>()
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("chain {v} references a node beyond the sample"))
                })?;
            if chain_values.iter().any(|&x| x != chain_values[0]) {
                broken += 1;
            }
            values.push(majority_vote(&chain_values));
        }
        if broken > 0 && policy == BrokenChains::Discard {
            discarded += r.occurrences;
            continue;
        }
        reads.push((values, Some(broken), r.occurrences));
    }
    let mut info = SampleInfo {
        vartype: VarKind::Ising,
        ..s.info().clone()
    };
    info.extra.insert("unembedded".into(), true.into());
    info.extra.insert("discarded_reads".into(), discarded.into());
    Ok(SampleSet::aggregate_weighted(
        reads,
        |v| logical.energy_of(v),
        info,
    ))
}

/// Fraction of (read, chain) pairs whose chain is broken, weighted by
/// occurrences, over a physical sample set.
pub fn chain_break_fraction(s: &SampleSet, e: &Embedding) -> f64 {
    let chains = e.chains().len();
    if chains == 0 || s.total_occurrences() == 0 {
        return 0.0;
    }
    let mut broken = 0usize;
    for r in s.records() {
        let b = e
            .chains()
            .values()
            .filter(|c| {
                let first = r.assignment[c[0]];
                c.iter().any(|&q| r.assignment[q] != first)
            })
            .count();
        broken += b * r.occurrences;
    }
    broken as f64 / (chains * s.total_occurrences()) as f64
}

/// Hardware nodes used by any chain.
pub fn used_qubits(e: &Embedding) -> BTreeSet<usize> {
    e.chains().values().flatten().copied().collect()
}
