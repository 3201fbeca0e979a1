use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::{read_rng, CompiledModel, SampleInfo, SampleSet, SamplerParams};
use crate::error::Result;
use crate::model::{QuadraticModel, Vartype};

/// Classical simulated annealing: single-variable Metropolis moves under a
/// geometric inverse-temperature schedule, one independent restart per read.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimulatedAnnealing {
    pub params: SamplerParams,
}

pub fn simulated_anneal<V: Vartype>(m: &QuadraticModel<V>, params: &SamplerParams) -> Result<SampleSet> {
    SimulatedAnnealing { params: *params }.sample(m)
}

/// `sweeps` inverse temperatures from `initial` to `final_` inclusive.
pub(crate) fn geometric_schedule(initial: f64, final_: f64, sweeps: usize) -> Vec<f64> {
    match sweeps {
        0 => Vec::new(),
        1 => vec![final_],
        _ => {
            let ratio = (final_ / initial).powf(1.0 / (sweeps - 1) as f64);
            (0..sweeps).map(|k| initial * ratio.powi(k as i32)).collect()
        }
    }
}

impl SimulatedAnnealing {
    pub fn new(params: SamplerParams) -> Self {
        Self { params }
    }

    pub fn sample<V: Vartype>(&self, m: &QuadraticModel<V>) -> Result<SampleSet> {
        let p = self.params;
        p.validate()?;
        let compiled = CompiledModel::new(m);
        let schedule = geometric_schedule(p.sa_beta_initial, p.sa_beta_final, p.sa_sweeps);
        let reads: Vec<Vec<i8>> = (0..p.num_reads)
            .into_par_iter()
            .map(|r| anneal_once(&compiled, &schedule, p.seed, r))
            .collect();

        let mut extra = BTreeMap::new();
        extra.insert("sweeps".into(), p.sa_sweeps.into());
        extra.insert("beta_initial".into(), p.sa_beta_initial.into());
        extra.insert("beta_final".into(), p.sa_beta_final.into());
        let info = SampleInfo {
            backend: "sa".into(),
            seed: Some(p.seed),
            reads: p.num_reads,
            vartype: V::KIND,
            extra,
        };
        Ok(SampleSet::aggregate(
            reads.into_iter().map(|v| (v, None)),
            |v| m.energy_of(v),
            info,
        ))
    }
}

fn anneal_once(model: &CompiledModel, schedule: &[f64], seed: u64, read: usize) -> Vec<i8> {
    let mut rng = read_rng(seed, read);
    let n = model.num_vars();
    let [lo, hi] = model.kind.values();
    let mut values: Vec<i8> = (0..n)
        .map(|_| if rng.random::<bool>() { hi } else { lo })
        .collect();
    let mut fields = model.fields(&values);
    for &beta in schedule {
        for i in 0..n {
            let new = model.kind.flip(values[i]);
            let delta = f64::from(new - values[i]) * fields[i];
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                model.apply(&mut values, &mut fields, i, new);
            }
        }
    }
    values
}
