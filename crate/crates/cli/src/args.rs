//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qanneal_core::embedding::TopologySpec;
use qanneal_core::sampler::{NoiseModel, NoisyBoltzmann, SamplerParams, SimulatedAnnealing};
use qanneal_core::{ExactSolver, HardwareRange, Sampler};

#[derive(Debug, Parser)]
#[command(
    name = "qanneal",
    version,
    about = "Formulate, embed, sample and analyze QUBO problems"
)]
pub struct Cli {
    /// Leave the wall-clock timestamp out of output metadata.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a QUBO file, optionally through a Chimera embedding.
    Solve(SolveArgs),
    /// Find a minor embedding of a QUBO's interaction graph.
    Embed(EmbedArgs),
    /// Two-parameter maximum likelihood by iterated QUBOs.
    Mle(MleArgs),
    /// N-queens experimental design.
    Design(DesignArgs),
    /// Column-wise matrix inversion.
    Matinv(MatinvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Exact,
    Sa,
    Boltzmann,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum, default_value = "sa")]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 1000)]
    pub reads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sweeps per simulated-annealing read.
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub beta_initial: f64,
    #[arg(long, default_value_t = 10.0)]
    pub beta_final: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub noise_sigma_a: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub noise_sigma_b: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise_bias_a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise_bias_b: f64,
    /// Boltzmann temperature in hardware-scaled units.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Gibbs sweeps per read above the exact-draw size limit.
    #[arg(long, default_value_t = 1000)]
    pub gibbs_sweeps: usize,
    /// Field range as `min,max`.
    #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
    pub h_range: String,
    /// Coupling range as `min,max`.
    #[arg(long, default_value = "-4,1", allow_hyphen_values = true)]
    pub j_range: String,
}

impl SamplerArgs {
    pub fn params(&self) -> SamplerParams {
        SamplerParams {
            num_reads: self.reads,
            seed: self.seed,
            sa_sweeps: self.sweeps,
            sa_beta_initial: self.beta_initial,
            sa_beta_final: self.beta_final,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma_a: self.noise_sigma_a,
            sigma_b: self.noise_sigma_b,
            bias_a: self.noise_bias_a,
            bias_b: self.noise_bias_b,
            tau: self.tau,
        }
    }

    pub fn range(&self) -> qanneal_core::Result<HardwareRange> {
        let (h_min, h_max) = pair(&self.h_range, "--h-range")?;
        let (j_min, j_max) = pair(&self.j_range, "--j-range")?;
        HardwareRange::new(h_min, h_max, j_min, j_max)
    }

    pub fn build(&self) -> qanneal_core::Result<Sampler> {
        let params = self.params();
        params.validate()?;
        Ok(match self.sampler {
            SamplerKind::Exact => Sampler::Exact(ExactSolver::default()),
            SamplerKind::Sa => Sampler::Anneal(SimulatedAnnealing::new(params)),
            SamplerKind::Boltzmann => Sampler::Boltzmann(NoisyBoltzmann {
                gibbs_sweeps: self.gibbs_sweeps,
                ..NoisyBoltzmann::new(params, self.noise(), self.range()?)
            }),
        })
    }

    /// The settings that actually influence the chosen backend.
    pub fn effective(&self) -> qanneal_core::Result<serde_json::Value> {
        let mut v = serde_json::json!({ "sampler": self.sampler.name() });
        if self.sampler != SamplerKind::Exact {
            v["params"] = serde_json::to_value(self.params())?;
        }
        if self.sampler == SamplerKind::Boltzmann {
            v["noise"] = serde_json::to_value(self.noise())?;
            v["hardware_range"] = serde_json::to_value(self.range()?)?;
            v["gibbs_sweeps"] = self.gibbs_sweeps.into();
        }
        Ok(v)
    }
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Exact => "exact",
            SamplerKind::Sa => "sa",
            SamplerKind::Boltzmann => "boltzmann",
        }
    }
}

pub fn pair(s: &str, flag: &str) -> qanneal_core::Result<(f64, f64)> {
    let bad = || qanneal_core::Error::InvalidArgument(format!("{flag} expects two numbers `a,b`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    /// Hardware graph, e.g. `chimera:16,16,4`.
    #[arg(long)]
    pub topology: Option<TopologySpec>,
    /// Ferromagnetic coupling inside chains; must be negative.
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub chain_strength: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// QUBO coefficient file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    /// Drop reads with broken chains instead of majority voting.
    #[arg(long)]
    pub discard_broken: bool,
    /// Output JSON path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub topology: TopologySpec,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub chain_strength: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Normal,
}

#[derive(Debug, Args)]
pub struct MleArgs {
    /// CSV of observations.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "normal")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub powers_high: i32,
    #[arg(long, default_value_t = -7, allow_negative_numbers = true)]
    pub powers_low: i32,
    /// Expansion point `theta,phi` of the first iteration.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub start: String,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub size: usize,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatinvArgs {
    /// Square matrix as CSV, one row per line.
    #[arg(long)]
    pub input: PathBuf,
    /// Qubits per matrix entry.
    #[arg(long, default_value_t = 6)]
    pub bits: usize,
    /// Highest power of two in each entry's encoding.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub power_high: i32,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Output CSV for the estimated inverse; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output JSON with per-column energies and the residual.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
