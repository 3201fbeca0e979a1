use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{CompiledModel, SampleInfo, SampleRecord, SampleSet};
use crate::error::{Error, Result};
use crate::model::{Assignment, QuadraticModel, Vartype};

/// Largest problem the exhaustive solver accepts.
pub const EXACT_LIMIT: usize = 24;

/// High bits fixed per parallel chunk.
const CHUNK_BITS: usize = 6;

/// Exhaustive enumeration of all `2^n` assignments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactSolver {
    /// Return every assignment instead of only the ground states.
    pub full_spectrum: bool,
}

/// All assignments attaining the global minimum, one record each.
pub fn exact_solve<V: Vartype>(m: &QuadraticModel<V>) -> Result<SampleSet> {
    ExactSolver::default().sample(m)
}

struct Chunk {
    best: f64,
    /// `(state, incrementally tracked energy)` within `slack` of `best`, or
    /// every state when the full spectrum is requested.
    states: Vec<(u64, f64)>,
}

impl ExactSolver {
    pub fn full_spectrum() -> Self {
        Self { full_spectrum: true }
    }

    pub fn sample<V: Vartype>(&self, m: &QuadraticModel<V>) -> Result<SampleSet> {
        let n = m.num_vars();
        if n > EXACT_LIMIT {
            return Err(Error::TooLarge {
                num_vars: n,
                limit: EXACT_LIMIT,
            });
        }
        let compiled = CompiledModel::new(m);
        // Incremental updates drift by at most a few ulps of the total
        // coefficient mass per step; candidates are rescored from scratch.
        let mass = m.offset().abs()
            + m.linear().iter().map(|c| c.abs()).sum::<f64>()
            + m.quadratic().values().map(|c| c.abs()).sum::<f64>();
        let slack = 1e-8 * (1.0 + mass);
        let tie = 64.0 * f64::EPSILON * (1.0 + mass);

        let prefix_bits = n.min(CHUNK_BITS);
        let free = n - prefix_bits;
        let full = self.full_spectrum;
        let chunks: Vec<Chunk> = (0..1u64 << prefix_bits)
            .into_par_iter()
            .map(|p| {
                let mut chunk = Chunk {
                    best: f64::INFINITY,
                    states: Vec::new(),
                };
                compiled.for_each_state_with_prefix(p << free, free, &mut |bits, e| {
                    if full {
                        chunk.states.push((bits, e));
                    } else if e <= chunk.best + slack {
                        if e < chunk.best {
                            chunk.best = e;
                            let cut = e + slack;
                            chunk.states.retain(|&(_, old)| old <= cut);
                        }
                        chunk.states.push((bits, e));
                    }
                });
                chunk
            })
            .collect();

        let kind = V::KIND;
        let records: Vec<SampleRecord> = if full {
            chunks
                .into_iter()
                .flat_map(|c| c.states)
                .map(|(bits, _)| {
                    let values = Assignment::from_bits(bits, n, kind).into_values();
                    SampleRecord {
                        energy: m.energy_of(&values),
                        assignment: values,
                        occurrences: 1,
                        broken_chains: None,
                    }
                })
                .collect()
        } else {
            let best = chunks.iter().map(|c| c.best).fold(f64::INFINITY, f64::min);
            let rescored: BTreeMap<u64, f64> = chunks
                .into_iter()
                .flat_map(|c| c.states)
                .filter(|&(_, e)| e <= best + slack)
                .map(|(bits, _)| {
                    let values = Assignment::from_bits(bits, n, kind).into_values();
                    (bits, m.energy_of(&values))
                })
                .collect();
            let min = rescored.values().copied().fold(f64::INFINITY, f64::min);
            rescored
                .into_iter()
                .filter(|&(_, e)| e <= min + tie)
                .map(|(bits, energy)| SampleRecord {
                    assignment: Assignment::from_bits(bits, n, kind).into_values(),
                    energy,
                    occurrences: 1,
                    broken_chains: None,
                })
                .collect()
        };

        let info = SampleInfo {
            backend: "exact".into(),
            seed: None,
            reads: records.len(),
            vartype: kind,
            extra: BTreeMap::new(),
        };
        Ok(SampleSet::from_records(records, info))
    }
}
