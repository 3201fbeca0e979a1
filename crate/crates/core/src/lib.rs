//! Annealer-style optimization for statistics on classical hardware.
//!
//! The crate covers the whole pipeline of formulating a problem as a QUBO or
//! Ising model, fitting it onto a Chimera hardware graph, sampling it with
//! one of three backends, and reading the results back:
//!
//! - [`model`]: QUBO and Ising models, conversion, rescaling, file format
//! - [`sampler`]: exhaustive, simulated-annealing and noisy-Boltzmann backends
//! - [`embedding`]: Chimera graphs, minor embedding, chain handling
//! - [`mle`]: maximum likelihood by iterated quadratic QUBO surrogates
//! - [`design`]: N-queens experimental designs
//! - [`matinv`]: column-wise matrix inversion

pub mod design;
pub mod embedding;
pub mod error;
pub mod matinv;
pub mod mle;
pub mod model;
pub mod sampler;

pub use design::{decode_design, generate_design, nqueens_qubo, Design, DesignGrid};
pub use embedding::{
    chimera, embed_model, find_embedding, unembed, ChimeraGraph, Embedding, Graph, TopologySpec,
};
pub use error::{Error, Result};
pub use matinv::{column_qubo, invert, precompute, MatInvProblem, MatInvResult};
pub use mle::{run_mle, taylor_qubo, BinaryEncoding, MleProblem, MleTrace, Normal};
pub use model::{
    ising_to_qubo, qubo_to_ising, rescale_to_hardware, Assignment, HardwareRange, IsingModel, QuadraticModel,
    QuboModel, VarKind,
};
pub use sampler::{
    exact_solve, noisy_boltzmann_sample, simulated_anneal, ExactSolver, NoiseModel, NoisyBoltzmann,
    SampleRecord, SampleSet, Sampler, SamplerParams, SimulatedAnnealing,
};
