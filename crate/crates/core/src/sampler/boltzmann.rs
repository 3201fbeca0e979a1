//! Emulation of annealer output as a Boltzmann sampler over a noisy copy of
//! the hardware-scaled problem.
//!
//! One read proceeds as follows:
//!
//! 1. the model is converted to Ising form and divided into the device's
//!    coefficient range (done once per run);
//! 2. every field and every coupling receives independent Gaussian noise,
//!    `h* = h + N(bias_a, sigma_a²)` and `J* = J + N(bias_b, sigma_b²)`;
//! 3. one spin configuration is drawn with probability `∝ exp(-E*(s) / τ)`;
//! 4. the configuration is scored on the clean, unscaled input model.
//!
//! Up to [`EXACT_DRAW_LIMIT`] variables the draw in step 3 is an exact
//! categorical draw over all `2^n` states. Larger problems use heat-bath
//! Gibbs sampling from a uniformly random start for
//! [`NoisyBoltzmann::gibbs_sweeps`] sweeps, the whole run being burn-in; the
//! final state is the read.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_rng, CompiledModel, SampleInfo, SampleSet, SamplerParams};
use crate::error::{invalid, Result};
use crate::model::{rescale_to_hardware, HardwareRange, QuadraticModel, VarKind, Vartype};

/// Largest problem drawn exactly rather than by Gibbs sweeps.
pub const EXACT_DRAW_LIMIT: usize = 20;

/// Per-read coefficient noise and sampling temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub bias_a: f64,
    pub bias_b: f64,
    /// Boltzmann temperature, in hardware-scaled energy units.
    pub tau: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_a: 0.05,
            sigma_b: 0.05,
            bias_a: 0.0,
            bias_b: 0.0,
            tau: 0.1,
        }
    }
}

impl NoiseModel {
    /// No coefficient noise; pure Boltzmann sampling at temperature `tau`.
    pub fn noiseless(tau: f64) -> Self {
        Self {
            sigma_a: 0.0,
            sigma_b: 0.0,
            bias_a: 0.0,
            bias_b: 0.0,
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sigma_a", self.sigma_a), ("sigma_b", self.sigma_b)] {
            if !(s.is_finite() && s >= 0.0) {
                return invalid(format!("{name} must be finite and non-negative, got {s}"));
            }
        }
        if !(self.bias_a.is_finite() && self.bias_b.is_finite()) {
            return invalid("noise biases must be finite");
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return invalid(format!("tau must be positive, got {}", self.tau));
        }
        Ok(())
    }

    fn is_deterministic(&self) -> bool {
        self.sigma_a == 0.0 && self.sigma_b == 0.0
    }
}

/// The noisy-Boltzmann backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyBoltzmann {
    pub params: SamplerParams,
    pub noise: NoiseModel,
    pub range: HardwareRange,
    pub gibbs_sweeps: usize,
}

impl Default for NoisyBoltzmann {
    fn default() -> Self {
        Self {
            params: SamplerParams::default(),
            noise: NoiseModel::default(),
            range: HardwareRange::default(),
            gibbs_sweeps: 1000,
        }
    }
}

pub fn noisy_boltzmann_sample<V: Vartype>(
    m: &QuadraticModel<V>,
    noise: &NoiseModel,
    params: &SamplerParams,
    range: &HardwareRange,
) -> Result<SampleSet> {
    NoisyBoltzmann {
        params: *params,
        noise: *noise,
        range: *range,
        ..Default::default()
    }
    .sample(m)
}

impl NoisyBoltzmann {
    pub fn new(params: SamplerParams, noise: NoiseModel, range: HardwareRange) -> Self {
        Self {
            params,
            noise,
            range,
            ..Default::default()
        }
    }

    pub fn sample<V: Vartype>(&self, m: &QuadraticModel<V>) -> Result<SampleSet> {
        self.params.validate()?;
        self.noise.validate()?;
        self.range.validate()?;

        let (scaled, scale) = rescale_to_hardware(&m.to_ising(), &self.range);
        let base = CompiledModel::new(&scaled);
        let clean_h = scaled.linear().to_vec();
        let clean_j: Vec<f64> = scaled.quadratic().values().copied().collect();
        let n = scaled.num_vars();
        let seed = self.params.seed;
        let noise = self.noise;
        let exact = n <= EXACT_DRAW_LIMIT;

        let perturb = |rng: &mut ChaCha8Rng, model: &mut CompiledModel| {
            let h: Vec<f64> = clean_h
                .iter()
                .map(|&h| h + noise.bias_a + noise.sigma_a * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let j: Vec<f64> = clean_j
                .iter()
                .map(|&j| j + noise.bias_b + noise.sigma_b * rng.sample::<f64, _>(StandardNormal))
                .collect();
            model.set_coefficients(&h, &j);
        };

        let spins: Vec<Vec<i8>> = if exact && noise.is_deterministic() {
            let mut model = base.clone();
            // Zero-variance noise still carries its bias.
            perturb(&mut read_rng(seed, 0), &mut model);
            let table = CumulativeTable::new(&model, noise.tau);
            (0..self.params.num_reads)
                .map(|r| table.draw(&mut read_rng(seed, r), n))
                .collect()
        } else {
            (0..self.params.num_reads)
                .into_par_iter()
                .map(|r| {
                    let mut rng = read_rng(seed, r);
                    let mut model = base.clone();
                    perturb(&mut rng, &mut model);
                    if exact {
                        CumulativeTable::new(&model, noise.tau).draw(&mut rng, n)
                    } else {
                        gibbs(&model, noise.tau, self.gibbs_sweeps, &mut rng)
                    }
                })
                .collect()
        };

        let kind = V::KIND;
        let reads = spins.into_iter().map(|s| {
            let values = match kind {
                VarKind::Ising => s,
                VarKind::Qubo => s.into_iter().map(|v| (v + 1) / 2).collect(),
            };
            (values, None)
        });

        let mut extra = BTreeMap::new();
        extra.insert("scale".into(), scale.into());
        extra.insert("tau".into(), noise.tau.into());
        extra.insert("sigma_a".into(), noise.sigma_a.into());
        extra.insert("sigma_b".into(), noise.sigma_b.into());
        extra.insert("bias_a".into(), noise.bias_a.into());
        extra.insert("bias_b".into(), noise.bias_b.into());
        extra.insert("draw".into(), if exact { "exact" } else { "gibbs" }.into());
        let info = SampleInfo {
            backend: "boltzmann".into(),
            seed: Some(seed),
            reads: self.params.num_reads,
            vartype: kind,
            extra,
        };
        Ok(SampleSet::aggregate(reads, |v| m.energy_of(v), info))
    }
}

/// Cumulative Boltzmann weights over all states of a small Ising model.
struct CumulativeTable {
    /// `(state bits, cumulative weight)` in enumeration order.
    cumulative: Vec<(u64, f64)>,
}

impl CumulativeTable {
    fn new(model: &CompiledModel, tau: f64) -> Self {
        let mut energies = Vec::with_capacity(1 << model.num_vars());
        model.for_each_state(|bits, e| energies.push((bits, e)));
        let min = energies.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        let cumulative = energies
            .into_iter()
            .map(|(bits, e)| {
                total += (-(e - min) / tau).exp();
                (bits, total)
            })
            .collect();
        Self { cumulative }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
        let total = self.cumulative.last().map_or(1.0, |&(_, w)| w);
        let u = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&(_, w)| w <= u)
            .min(self.cumulative.len() - 1);
        let bits = self.cumulative[idx].0;
        (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()
    }
}

fn gibbs(model: &CompiledModel, tau: f64, sweeps: usize, rng: &mut ChaCha8Rng) -> Vec<i8> {
    let n = model.num_vars();
    let mut spins: Vec<i8> = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut fields = model.fields(&spins);
    let beta = 1.0 / tau;
    for _ in 0..sweeps {
        for i in 0..n {
            // E(+1) - E(-1) = 2 * field_i
            let p_up = 1.0 / (1.0 + (2.0 * beta * fields[i]).exp());
            let new = if rng.random::<f64>() < p_up { 1 } else { -1 };
            if new != spins[i] {
                model.apply(&mut spins, &mut fields, i, new);
            }
        }
    }
    spins
}
