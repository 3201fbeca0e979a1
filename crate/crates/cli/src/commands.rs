//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use qanneal_core::design::{generate_design, DesignEmbedding, DesignOptions};
use qanneal_core::embedding::{
    embed_model_in_range, find_embedding_with, unembed, BrokenChains, EmbeddingOptions, Graph,
};
use qanneal_core::matinv::{diagnostic_inverse, invert, precompute, read_matrix, write_matrix};
use qanneal_core::mle::{read_data, run_mle, BinaryEncoding, MleProblem, Normal};
use qanneal_core::model::read_qubo;
use qanneal_core::sampler::EXACT_LIMIT;
use qanneal_core::{Error, HardwareRange, Result, Sampler};

use crate::args::{pair, DesignArgs, EmbedArgs, MatinvArgs, MleArgs, ModelKind, SolveArgs};

pub struct Context {
    pub timestamp: bool,
}

impl Context {
    fn metadata(&self) -> Value {
        let mut m = json!({ "tool": "qanneal", "version": env!("CARGO_PKG_VERSION") });
        if self.timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            m["timestamp"] = secs.into();
        }
        m
    }

    /// Adds `config` and `metadata` to a JSON object and writes it.
    fn write_json(&self, mut payload: Value, config: Value, out: Option<&Path>) -> Result<()> {
        payload["config"] = config;
        payload["metadata"] = self.metadata();
        let mut text = serde_json::to_string_pretty(&payload)?;
        text.push('\n');
        emit(&text, out)
    }

    /// Prefixes CSV text with `#` comment lines carrying the configuration.
    fn write_csv(&self, body: &str, config: &Value, out: Option<&Path>) -> Result<()> {
        let mut text = format!("# config: {config}\n# metadata: {}\n", self.metadata());
        text.push_str(body);
        emit(&text, out)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn path_value(p: &Option<PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| p.display().to_string().into())
}

fn check_chain_strength(c: f64) -> Result<()> {
    if !(c.is_finite() && c < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "chain strength must be negative, got {c}"
        )));
    }
    Ok(())
}

pub fn solve(ctx: &Context, a: &SolveArgs) -> Result<()> {
    let qubo = read_qubo(&a.input)?;
    let sampler = a.sampler.build()?;
    let mut config = json!({
        "command": "solve",
        "input": a.input.display().to_string(),
        "output": path_value(&a.out),
        "backend": a.sampler.effective()?,
        "topology": a.embedding.topology.map(|t| t.to_string()),
    });

    let set = match a.embedding.topology {
        None => sampler.sample(&qubo)?,
        Some(topology) => {
            check_chain_strength(a.embedding.chain_strength)?;
            config["chain_strength"] = a.embedding.chain_strength.into();
            config["discard_broken"] = a.discard_broken.into();
            let ising = qubo.to_ising();
            let hw = topology.build()?;
            let opts = EmbeddingOptions {
                chain_strength: a.embedding.chain_strength,
                ..Default::default()
            };
            let emb = find_embedding_with(&Graph::from_model(&ising), &hw, a.sampler.seed, &opts)?;
            let range = match &sampler {
                Sampler::Boltzmann(b) => b.range,
                _ => HardwareRange::default(),
            };
            let physical = embed_model_in_range(&ising, &emb, hw.graph(), &range)?;
            let raw = sampler.sample(&physical)?;
            let policy = if a.discard_broken {
                BrokenChains::Discard
            } else {
                BrokenChains::MajorityVote
            };
            let mut set = unembed(&raw, &emb, &ising, policy)?.convert(&qubo)?;
            let info = set.info_mut();
            info.extra
                .insert("physical_qubits".into(), emb.num_qubits().into());
            info.extra
                .insert("max_chain_length".into(), emb.max_chain_length().into());
            set
        }
    };
    ctx.write_json(serde_json::to_value(&set)?, config, a.out.as_deref())
}

pub fn embed(ctx: &Context, a: &EmbedArgs) -> Result<()> {
    check_chain_strength(a.chain_strength)?;
    let qubo = read_qubo(&a.input)?;
    let hw = a.topology.build()?;
    let opts = EmbeddingOptions {
        chain_strength: a.chain_strength,
        ..Default::default()
    };
    let emb = find_embedding_with(&Graph::from_model(&qubo), &hw, a.seed, &opts)?;
    let mut payload = serde_json::to_value(&emb)?;
    payload["metrics"] = json!({
        "num_qubits": emb.num_qubits(),
        "max_chain_length": emb.max_chain_length(),
        "logical_variables": qubo.num_vars(),
    });
    let config = json!({
        "command": "embed",
        "input": a.input.display().to_string(),
        "output": path_value(&a.out),
        "topology": a.topology.to_string(),
        "chain_strength": a.chain_strength,
        "seed": a.seed,
    });
    ctx.write_json(payload, config, a.out.as_deref())
}

pub fn mle(ctx: &Context, a: &MleArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    let (theta0, phi0) = pair(&a.start, "--start")?;
    let enc = BinaryEncoding::from_range(a.powers_high, a.powers_low)?;
    let problem = match a.model {
        ModelKind::Normal => MleProblem::new(data, Normal, enc.clone(), enc)?,
    };
    let sampler = a.sampler.build()?;
    let config = json!({
        "command": "mle",
        "data": a.data.display().to_string(),
        "output": path_value(&a.out),
        "model": "normal",
        "powers_high": a.powers_high,
        "powers_low": a.powers_low,
        "start": [theta0, phi0],
        "iters": a.iters,
        "backend": a.sampler.effective()?,
    });
    let (trace, failure) = match run_mle(&problem, theta0, phi0, &sampler, a.iters) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.source)),
    };
    let mut body = trace.to_csv()?;
    if let Some(best) = trace.best() {
        body.push_str(&format!(
            "# best: iteration={} theta={} phi={} loglik={}\n",
            best.iteration, best.theta, best.phi, best.loglik
        ));
    }
    if let Some(e) = &failure {
        body.push_str(&format!("# stopped early: {e}\n"));
    }
    ctx.write_csv(&body, &config, a.out.as_deref())?;
    failure.map_or(Ok(()), Err)
}

pub fn design(ctx: &Context, a: &DesignArgs) -> Result<()> {
    let sampler = a.sampler.build()?;
    let embedding = match a.embedding.topology {
        Some(topology) => {
            check_chain_strength(a.embedding.chain_strength)?;
            Some(DesignEmbedding {
                topology,
                chain_strength: a.embedding.chain_strength,
                seed: a.sampler.seed,
            })
        }
        None => None,
    };
    let opts = DesignOptions {
        embedding,
        ..Default::default()
    };
    let (design, set) = generate_design(a.size, &sampler, &opts)?;
    let best_energy = set.lowest_energy();
    let config = json!({
        "command": "design",
        "size": a.size,
        "output": path_value(&a.out),
        "backend": a.sampler.effective()?,
        "topology": a.embedding.topology.map(|t| t.to_string()),
        "chain_strength": embedding.map(|e| e.chain_strength),
    });
    let body = format!(
        "# best_energy: {}\n{}",
        best_energy.map_or("none".to_string(), |e| e.to_string()),
        design.to_csv()
    );
    ctx.write_csv(&body, &config, a.out.as_deref())
}

pub fn matinv(ctx: &Context, a: &MatinvArgs) -> Result<()> {
    if a.bits == 0 {
        return Err(Error::InvalidArgument("--bits must be at least 1".into()));
    }
    let matrix = read_matrix(&a.input)?;
    let low = a.power_high - (a.bits as i32 - 1);
    let enc = BinaryEncoding::from_range(a.power_high, low)?;
    let problem = precompute(matrix)?.with_encoding(enc.clone())?;
    if diagnostic_inverse(problem.matrix()).is_none() {
        log::warn!("the input matrix is singular");
    }
    let sampler = a.sampler.build()?;
    let vars = (0..problem.size())
        .map(|k| problem.column_vars(k))
        .max()
        .unwrap_or(0);
    if matches!(sampler, Sampler::Exact(_)) && vars > EXACT_LIMIT {
        return Err(Error::TooLarge {
            num_vars: vars,
            limit: EXACT_LIMIT,
        });
    }
    let result = invert(&problem, &sampler);
    let config = json!({
        "command": "matinv",
        "input": a.input.display().to_string(),
        "output": path_value(&a.out),
        "report": path_value(&a.report),
        "powers": enc.powers(),
        "backend": a.sampler.effective()?,
    });
    ctx.write_csv(&write_matrix(&result.v_hat), &config, a.out.as_deref())?;
    if let Some(report) = &a.report {
        ctx.write_json(serde_json::to_value(&result)?, config.clone(), Some(report))?;
    }
    match result.failures.first() {
        Some(f) if result.failures.len() == problem.size() => Err(Error::InvalidArgument(format!(
            "every column failed; column {}: {}",
            f.column, f.error
        ))),
        _ => Ok(()),
    }
}
