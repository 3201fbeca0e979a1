//! Sampler backends and the sample sets they return.
//!
//! Every backend takes a model in either convention and returns a
//! [`SampleSet`] in that same convention, with energies recomputed on the
//! model exactly as given. Randomized backends derive one RNG stream per
//! read from `(seed, read index)`, so results do not depend on how reads are
//! scheduled across threads.

mod anneal;
mod boltzmann;
mod compiled;
mod exact;

pub use anneal::{simulated_anneal, SimulatedAnnealing};
pub use boltzmann::{noisy_boltzmann_sample, NoiseModel, NoisyBoltzmann, EXACT_DRAW_LIMIT};
pub use exact::{exact_solve, ExactSolver, EXACT_LIMIT};

pub(crate) use compiled::CompiledModel;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{Assignment, QuadraticModel, VarKind, Vartype};

/// One distinct outcome and how many reads produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub assignment: Vec<i8>,
    pub energy: f64,
    pub occurrences: usize,
    /// Number of broken chains, present only on unembedded records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broken_chains: Option<usize>,
}

/// Provenance attached to a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub backend: String,
    pub seed: Option<u64>,
    pub reads: usize,
    pub vartype: VarKind,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// Outcomes of one sampler run, sorted ascending by energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    solutions: Vec<SampleRecord>,
    info: SampleInfo,
}

impl SampleSet {
    /// Groups identical `(values, broken_chains)` reads, scores each group
    /// once with `energy`, and sorts by energy then assignment.
    pub(crate) fn aggregate(
        reads: impl IntoIterator<Item = (Vec<i8>, Option<usize>)>,
        energy: impl Fn(&[i8]) -> f64,
        info: SampleInfo,
    ) -> Self {
        Self::aggregate_weighted(reads.into_iter().map(|(v, b)| (v, b, 1)), energy, info)
    }

    /// As [`SampleSet::aggregate`] for reads that already carry a count.
    pub(crate) fn aggregate_weighted(
        reads: impl IntoIterator<Item = (Vec<i8>, Option<usize>, usize)>,
        energy: impl Fn(&[i8]) -> f64,
        info: SampleInfo,
    ) -> Self {
        let mut counts: BTreeMap<(Vec<i8>, Option<usize>), usize> = BTreeMap::new();
        for (values, broken, count) in reads {
            *counts.entry((values, broken)).or_default() += count;
        }
        let solutions = counts
            .into_iter()
            .map(|((assignment, broken_chains), occurrences)| SampleRecord {
                energy: energy(&assignment),
                assignment,
                occurrences,
                broken_chains,
            })
            .collect();
        Self::from_records(solutions, info)
    }

    pub(crate) fn from_records(mut solutions: Vec<SampleRecord>, info: SampleInfo) -> Self {
        solutions.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.assignment.cmp(&b.assignment))
                .then_with(|| a.broken_chains.cmp(&b.broken_chains))
        });
        Self { solutions, info }
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.solutions
    }

    pub fn info(&self) -> &SampleInfo {
        &self.info
    }

    pub fn info_mut(&mut self) -> &mut SampleInfo {
        &mut self.info
    }

    pub fn kind(&self) -> VarKind {
        self.info.vartype
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    /// Lowest-energy record.
    pub fn first(&self) -> Option<&SampleRecord> {
        self.solutions.first()
    }

    pub fn lowest_energy(&self) -> Option<f64> {
        self.first().map(|r| r.energy)
    }

    pub fn assignment(&self, record: &SampleRecord) -> Assignment {
        Assignment::from_values_unchecked(record.assignment.clone(), self.info.vartype)
    }

    pub fn total_occurrences(&self) -> usize {
        self.solutions.iter().map(|r| r.occurrences).sum()
    }

    /// Empirical probability of each distinct assignment, merging records
    /// that differ only in chain-break metadata.
    pub fn frequencies(&self) -> BTreeMap<Vec<i8>, f64> {
        let total = self.total_occurrences() as f64;
        let mut out: BTreeMap<Vec<i8>, f64> = BTreeMap::new();
        for r in &self.solutions {
            *out.entry(r.assignment.clone()).or_default() += r.occurrences as f64 / total;
        }
        out
    }

    /// Re-expresses every record in `kind`, rescoring with `model`.
    pub fn convert<V: Vartype>(&self, model: &QuadraticModel<V>) -> Result<SampleSet> {
        let kind = V::KIND;
        let mut solutions = Vec::with_capacity(self.solutions.len());
        for r in &self.solutions {
            let a = self.assignment(r).to_kind(kind);
            let energy = model.energy(&a)?;
            solutions.push(SampleRecord {
                assignment: a.into_values(),
                energy,
                occurrences: r.occurrences,
                broken_chains: r.broken_chains,
            });
        }
        let mut info = self.info.clone();
        info.vartype = kind;
        Ok(Self::from_records(solutions, info))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Run parameters shared by the randomized backends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub num_reads: usize,
    pub seed: u64,
    pub sa_sweeps: usize,
    pub sa_beta_initial: f64,
    pub sa_beta_final: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            seed: 0,
            sa_sweeps: 1000,
            sa_beta_initial: 0.1,
            sa_beta_final: 10.0,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return invalid("num_reads must be at least 1");
        }
        if !(self.sa_beta_initial > 0.0 && self.sa_beta_final >= self.sa_beta_initial)
            || !self.sa_beta_final.is_finite()
        {
            return invalid(format!(
                "inverse temperatures must satisfy 0 < initial ({}) <= final ({})",
                self.sa_beta_initial, self.sa_beta_final
            ));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_reads(mut self, num_reads: usize) -> Self {
        self.num_reads = num_reads;
        self
    }

    pub fn with_sweeps(mut self, sa_sweeps: usize) -> Self {
        self.sa_sweeps = sa_sweeps;
        self
    }
}

/// Any of the three backends behind one call.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Exact(ExactSolver),
    Anneal(SimulatedAnnealing),
    Boltzmann(NoisyBoltzmann),
}

impl Sampler {
    pub fn sample<V: Vartype>(&self, model: &QuadraticModel<V>) -> Result<SampleSet> {
        match self {
            Sampler::Exact(s) => s.sample(model),
            Sampler::Anneal(s) => s.sample(model),
            Sampler::Boltzmann(s) => s.sample(model),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampler::Exact(_) => "exact",
            Sampler::Anneal(_) => "sa",
            Sampler::Boltzmann(_) => "boltzmann",
        }
    }

    /// Copy of this sampler whose seed is replaced by an independent
    /// substream of the current seed. Exact solving is unaffected.
    pub fn substream(&self, stream: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Sampler::Exact(_) => {}
            Sampler::Anneal(s) => s.params.seed = derive_seed(s.params.seed, stream),
            Sampler::Boltzmann(s) => s.params.seed = derive_seed(s.params.seed, stream),
        }
        out
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for substream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Independent generator for one read.
pub(crate) fn read_rng(seed: u64, read: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_counts_and_sorts() {
        let reads = vec![
            (vec![1, 0], None),
            (vec![0, 1], None),
            (vec![1, 0], None),
            (vec![1, 1], None),
        ];
        let info = SampleInfo {
            backend: "test".into(),
            seed: Some(3),
            reads: 4,
            vartype: VarKind::Qubo,
            extra: BTreeMap::new(),
        };
        let set = SampleSet::aggregate(reads, |v| -f64::from(v[0]) + f64::from(v[1]) * 0.5, info);
        assert_eq!(set.total_occurrences(), 4);
        let energies: Vec<f64> = set.records().iter().map(|r| r.energy).collect();
        assert_eq!(energies, vec![-1.0, -0.5, 0.5]);
        assert_eq!(set.records()[0].occurrences, 2);
    }

    #[test]
    fn json_shape() {
        let info = SampleInfo {
            backend: "exact".into(),
            seed: None,
            reads: 1,
            vartype: VarKind::Ising,
            extra: BTreeMap::new(),
        };
        let set = SampleSet::aggregate([(vec![-1, 1], None)], |_| -2.0, info);
        let v: serde_json::Value = serde_json::from_str(&set.to_json().unwrap()).unwrap();
        assert_eq!(v["solutions"][0]["assignment"], serde_json::json!([-1, 1]));
        assert_eq!(v["solutions"][0]["energy"], serde_json::json!(-2.0));
        assert_eq!(v["solutions"][0]["occurrences"], serde_json::json!(1));
        assert_eq!(v["info"]["backend"], "exact");
        assert_eq!(v["info"]["reads"], 1);
        assert_eq!(SampleSet::from_json(&set.to_json().unwrap()).unwrap(), set);
    }

    #[test]
    fn params_validation() {
        assert!(SamplerParams::default().validate().is_ok());
        assert!(SamplerParams::default().with_reads(0).validate().is_err());
        let bad = SamplerParams {
            sa_beta_initial: 2.0,
            sa_beta_final: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 1), derive_seed(7, 1));
    }
}
