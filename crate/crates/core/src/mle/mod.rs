//! Two-parameter maximum likelihood by iterated quadratic QUBO surrogates.
//!
//! Each iteration expands the summed log-likelihood to second order around
//! the current estimate `(θ0, φ0)`, writes both parameters as non-negative
//! binary fixed-point numbers, and turns the negated expansion into a QUBO.
//! Minimizing that QUBO and decoding the winning bits gives the next
//! expansion point. The run stops after a fixed number of iterations and
//! reports the iterate with the highest exact log-likelihood.

mod encoding;

pub use encoding::BinaryEncoding;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{QuboModel, VarKind};
use crate::sampler::Sampler;

/// Per-datum log-likelihood and its first and second partial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub d_theta: f64,
    pub d_phi: f64,
    pub d_theta_theta: f64,
    pub d_theta_phi: f64,
    pub d_phi_phi: f64,
}

impl Derivatives {
    fn add(&mut self, o: &Derivatives) {
        self.value += o.value;
        self.d_theta += o.d_theta;
        self.d_phi += o.d_phi;
        self.d_theta_theta += o.d_theta_theta;
        self.d_theta_phi += o.d_theta_phi;
        self.d_phi_phi += o.d_phi_phi;
    }

    /// Name of the first non-finite entry, if any.
    fn non_finite(&self) -> Option<&'static str> {
        [
            ("log-likelihood", self.value),
            ("d/dtheta", self.d_theta),
            ("d/dphi", self.d_phi),
            ("d2/dtheta2", self.d_theta_theta),
            ("d2/dtheta dphi", self.d_theta_phi),
            ("d2/dphi2", self.d_phi_phi),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(name, _)| name)
    }
}

/// A two-parameter family `f(x | θ, φ)`, described datum by datum.
pub trait LikelihoodModel: Send + Sync {
    fn name(&self) -> &str;

    /// `ℓ(θ, φ | x)` and its derivatives.
    fn evaluate(&self, x: f64, theta: f64, phi: f64) -> Derivatives;
}

/// `N(θ, φ²)`: mean `θ`, standard deviation `φ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Normal;

impl LikelihoodModel for Normal {
    fn name(&self) -> &str {
        "normal"
    }

    fn evaluate(&self, x: f64, theta: f64, phi: f64) -> Derivatives {
        let r = x - theta;
        let p2 = phi * phi;
        let p3 = p2 * phi;
        Derivatives {
            value: -0.5 * (2.0 * std::f64::consts::PI).ln() - phi.ln() - r * r / (2.0 * p2),
            d_theta: r / p2,
            d_phi: -1.0 / phi + r * r / p3,
            d_theta_theta: -1.0 / p2,
            d_theta_phi: -2.0 * r / p3,
            d_phi_phi: 1.0 / p2 - 3.0 * r * r / (p2 * p2),
        }
    }
}

/// Data, likelihood family and parameter encodings.
pub struct MleProblem {
    pub data: Vec<f64>,
    pub model: Box<dyn LikelihoodModel>,
    pub enc_theta: BinaryEncoding,
    pub enc_phi: BinaryEncoding,
}

impl MleProblem {
    pub fn new(
        data: Vec<f64>,
        model: impl LikelihoodModel + 'static,
        enc_theta: BinaryEncoding,
        enc_phi: BinaryEncoding,
    ) -> Result<Self> {
        if data.is_empty() {
            return invalid("no data");
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return invalid(format!("data value {x} is not finite"));
        }
        Ok(Self {
            data,
            model: Box::new(model),
            enc_theta,
            enc_phi,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.enc_theta.len() + self.enc_phi.len()
    }

    /// Sums over the data in input order, so results are reproducible.
    pub fn totals(&self, theta: f64, phi: f64) -> Derivatives {
        let mut s = Derivatives::default();
        for &x in &self.data {
            s.add(&self.model.evaluate(x, theta, phi));
        }
        s
    }

    pub fn log_likelihood(&self, theta: f64, phi: f64) -> f64 {
        self.data
            .iter()
            .map(|&x| self.model.evaluate(x, theta, phi).value)
            .sum()
    }

    /// Second-order expansion of the summed log-likelihood around
    /// `(theta0, phi0)`, evaluated at `(theta, phi)`.
    pub fn taylor_value(&self, theta0: f64, phi0: f64, theta: f64, phi: f64) -> Result<f64> {
        let s = self.checked_totals(theta0, phi0)?;
        let (dt, dp) = (theta - theta0, phi - phi0);
        Ok(s.value
            + s.d_theta * dt
            + s.d_phi * dp
            + 0.5 * (s.d_theta_theta * dt * dt + 2.0 * s.d_theta_phi * dt * dp + s.d_phi_phi * dp * dp))
    }

    /// Decodes a full assignment into `(θ, φ)`; θ bits come first.
    pub fn decode(&self, bits: &[i8]) -> Result<(f64, f64)> {
        if bits.len() != self.num_vars() {
            return invalid(format!("expected {} bits, got {}", self.num_vars(), bits.len()));
        }
        let (t, p) = bits.split_at(self.enc_theta.len());
        Ok((self.enc_theta.decode(t)?, self.enc_phi.decode(p)?))
    }

    fn checked_totals(&self, theta: f64, phi: f64) -> Result<Derivatives> {
        let s = self.totals(theta, phi);
        match s.non_finite() {
            Some(what) => Err(Error::ExpansionPoint {
                theta,
                phi,
                what: what.to_string(),
            }),
            None => Ok(s),
        }
    }
}

/// QUBO whose energy is minus the quadratic expansion around `(theta0,
/// phi0)` at the decoded parameters, constant terms included.
///
/// Variables `0..|enc_theta|` encode θ and the rest encode φ.
pub fn taylor_qubo(p: &MleProblem, theta0: f64, phi0: f64) -> Result<QuboModel> {
    let s = p.checked_totals(theta0, phi0)?;
    let wt = p.enc_theta.weights();
    let wp = p.enc_phi.weights();
    let nt = wt.len();
    let mut m = QuboModel::new(nt + wp.len());

    // For θ = Σ w_i q_i with q_i² = q_i, (θ - θ0)² contributes w_i² - 2θ0 w_i
    // to each linear term and 2 w_i w_j to each pair.
    for (i, &w) in wt.iter().enumerate() {
        let t = w * s.d_theta + 0.5 * w * w * s.d_theta_theta
            - w * theta0 * s.d_theta_theta
            - w * phi0 * s.d_theta_phi;
        m.set_linear(i, -t)?;
    }
    for (i, &w) in wp.iter().enumerate() {
        let t = w * s.d_phi + 0.5 * w * w * s.d_phi_phi - w * phi0 * s.d_phi_phi - w * theta0 * s.d_theta_phi;
        m.set_linear(nt + i, -t)?;
    }
    for i in 0..nt {
        for j in i + 1..nt {
            m.set_quadratic(i, j, -wt[i] * wt[j] * s.d_theta_theta)?;
        }
        for (j, &v) in wp.iter().enumerate() {
            m.set_quadratic(i, nt + j, -wt[i] * v * s.d_theta_phi)?;
        }
    }
    for i in 0..wp.len() {
        for j in i + 1..wp.len() {
            m.set_quadratic(nt + i, nt + j, -wp[i] * wp[j] * s.d_phi_phi)?;
        }
    }
    let constant = s.value - s.d_theta * theta0 - s.d_phi * phi0
        + 0.5
            * (s.d_theta_theta * theta0 * theta0
                + 2.0 * s.d_theta_phi * theta0 * phi0
                + s.d_phi_phi * phi0 * phi0);
    m.set_offset(-constant)?;
    Ok(m)
}

/// One iteration of [`run_mle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleStep {
    pub iteration: usize,
    pub theta: f64,
    pub phi: f64,
    /// Energy of the chosen QUBO sample.
    pub energy: f64,
    /// Exact summed log-likelihood at `(theta, phi)`.
    pub loglik: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MleTrace {
    pub steps: Vec<MleStep>,
}

impl MleTrace {
    /// Iterate with the largest exact log-likelihood; the earliest wins ties.
    pub fn best(&self) -> Option<&MleStep> {
        self.steps
            .iter()
            .fold(None, |best: Option<&MleStep>, s| match best {
                Some(b) if b.loglik >= s.loglik || s.loglik.is_nan() => Some(b),
                _ => Some(s),
            })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `iteration,theta,phi,energy,loglik` rows with a header line.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.steps {
            w.serialize(s)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// A run that stopped early, with every iteration completed before the
/// failure.
#[derive(Debug, thiserror::Error)]
#[error("maximum likelihood run stopped after {} iterations: {source}", partial.len())]
pub struct MleFailure {
    pub partial: MleTrace,
    #[source]
    pub source: Error,
}

/// Runs exactly `iters` expand, minimize, decode, re-center iterations.
///
/// The sampler's lowest-energy record is taken as each iteration's
/// minimizer. Randomized samplers use a fresh substream per iteration.
pub fn run_mle(
    p: &MleProblem,
    theta0: f64,
    phi0: f64,
    sampler: &Sampler,
    iters: usize,
) -> std::result::Result<MleTrace, MleFailure> {
    let mut trace = MleTrace::default();
    let fail = |trace: MleTrace, source| MleFailure {
        partial: trace,
        source,
    };
    if iters == 0 {
        return Err(fail(
            trace,
            Error::InvalidArgument("iters must be at least 1".into()),
        ));
    }
    if p.num_vars() == 0 {
        return Err(fail(
            trace,
            Error::InvalidArgument("both encodings are empty".into()),
        ));
    }
    let (mut theta, mut phi) = (theta0, phi0);
    for it in 1..=iters {
        let step = (|| -> Result<MleStep> {
            let q = taylor_qubo(p, theta, phi)?;
            let set = sampler.substream(it as u64).sample(&q)?;
            let best = set
                .first()
                .ok_or_else(|| Error::InvalidArgument("sampler returned no samples".into()))?;
            debug_assert_eq!(set.kind(), VarKind::Qubo);
            let (t, f) = p.decode(&best.assignment)?;
            Ok(MleStep {
                iteration: it,
                theta: t,
                phi: f,
                energy: best.energy,
                loglik: p.log_likelihood(t, f),
            })
        })();
        match step {
            Ok(s) => {
                log::debug!(
                    "iteration {it}: theta {} phi {} loglik {}",
                    s.theta,
                    s.phi,
                    s.loglik
                );
                if let Some(prev) = trace.steps.last() {
                    if it > 2 && s.loglik < prev.loglik {
                        log::info!("log-likelihood decreased at iteration {it}");
                    }
                }
                theta = s.theta;
                phi = s.phi;
                trace.steps.push(s);
            }
            Err(e) => return Err(fail(trace, e)),
        }
    }
    Ok(trace)
}

/// Reads every numeric field of a CSV file as one flat data vector. Blank
/// lines and `#` comments are skipped; a non-numeric first row is taken as a
/// header.
pub fn parse_data(text: &str) -> Result<Vec<f64>> {
    let mut data = Vec::new();
    let mut rows = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows += 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("value {v} is not finite"),
                    });
                }
                data.extend(values);
            }
            Err(_) if rows == 1 => {}
            Err(e) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("not a number: {e}"),
                })
            }
        }
    }
    if data.is_empty() {
        return invalid("data file contains no values");
    }
    Ok(data)
}

pub fn read_data(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_data(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::ExactSolver;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) const NORMAL_DATA: [f64; 10] = [
        -2.296, -0.216, -0.082, 0.231, 1.127, 1.164, 1.189, 1.236, 1.272, 1.373,
    ];

    fn problem(high: i32, low: i32) -> MleProblem {
        let e = BinaryEncoding::from_range(high, low).unwrap();
        MleProblem::new(NORMAL_DATA.to_vec(), Normal, e.clone(), e).unwrap()
    }

    #[test]
    fn normal_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-5;
        let l = |x: f64, t: f64, p: f64| Normal.evaluate(x, t, p).value;
        for _ in 0..100 {
            let (x, t, p) = (
                rng.random_range(-3.0..3.0),
                rng.random_range(0.1..3.0),
                rng.random_range(0.1..3.0),
            );
            let d = Normal.evaluate(x, t, p);
            let dt = (l(x, t + h, p) - l(x, t - h, p)) / (2.0 * h);
            let dp = (l(x, t, p + h) - l(x, t, p - h)) / (2.0 * h);
            let dtt = (l(x, t + h, p) - 2.0 * l(x, t, p) + l(x, t - h, p)) / (h * h);
            let dpp = (l(x, t, p + h) - 2.0 * l(x, t, p) + l(x, t, p - h)) / (h * h);
            let dtp = (l(x, t + h, p + h) - l(x, t + h, p - h) - l(x, t - h, p + h) + l(x, t - h, p - h))
                / (4.0 * h * h);
            let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol * (1.0 + a.abs());
            assert!(close(d.d_theta, dt, 1e-6));
            assert!(close(d.d_phi, dp, 1e-6));
            assert!(close(d.d_theta_theta, dtt, 1e-3), "{} {}", d.d_theta_theta, dtt);
            assert!(close(d.d_phi_phi, dpp, 1e-3));
            assert!(close(d.d_theta_phi, dtp, 1e-3));
        }
    }

    #[test]
    fn qubo_energy_is_negated_taylor_value() {
        let p = problem(1, -7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = taylor_qubo(&p, 0.0, 1.0).unwrap();
        for _ in 0..200 {
            let bits: Vec<i8> = (0..18).map(|_| rng.random_range(0..2)).collect();
            let (t, f) = p.decode(&bits).unwrap();
            let taylor = p.taylor_value(0.0, 1.0, t, f).unwrap();
            assert!((q.energy_of(&bits) + taylor).abs() < 1e-6);
        }
    }

    #[test]
    fn datum_at_expansion_point_has_no_gradient_term() {
        let e = BinaryEncoding::from_range(0, -1).unwrap();
        let p = MleProblem::new(
            vec![0.75],
            Normal,
            e.clone(),
            BinaryEncoding::new(vec![]).unwrap(),
        )
        .unwrap();
        let q = taylor_qubo(&p, 0.75, 1.0).unwrap();
        // only 0.5 w² ℓθθ - w θ0 ℓθθ remains, with ℓθθ = -1
        for (i, w) in e.weights().into_iter().enumerate() {
            let expected = 0.5 * w * w - w * 0.75;
            assert!((q.linear_at(i) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_encodings_leave_only_the_constant() {
        let empty = BinaryEncoding::new(vec![]).unwrap();
        let p = MleProblem::new(NORMAL_DATA.to_vec(), Normal, empty.clone(), empty).unwrap();
        let q = taylor_qubo(&p, 0.2, 1.3).unwrap();
        assert_eq!(q.num_vars(), 0);
        let t = p.taylor_value(0.2, 1.3, 0.0, 0.0).unwrap();
        assert!((q.offset() + t).abs() < 1e-12);
    }

    #[test]
    fn non_finite_expansion_point_is_an_error() {
        let p = problem(0, -2);
        assert!(matches!(
            taylor_qubo(&p, 0.0, 0.0),
            Err(Error::ExpansionPoint { .. })
        ));
    }

    #[test]
    fn encoded_optimum_is_a_fixed_point() {
        let p = problem(1, -7);
        let s = Sampler::Exact(ExactSolver::default());
        let trace = run_mle(&p, 0.5, 1.09375, &s, 2).unwrap();
        for step in &trace.steps {
            assert_eq!((step.theta, step.phi), (0.5, 1.09375));
        }
    }

    #[test]
    fn failure_keeps_partial_trace() {
        // theta pinned to zero and phi can only decode to 0: the second
        // expansion happens at phi = 0.
        let p = MleProblem::new(
            NORMAL_DATA.to_vec(),
            Normal,
            BinaryEncoding::new(vec![]).unwrap(),
            BinaryEncoding::new(vec![-10]).unwrap(),
        )
        .unwrap();
        let s = Sampler::Exact(ExactSolver::default());
        let err = run_mle(&p, 0.0, 5.0, &s, 3).unwrap_err();
        assert_eq!(err.partial.len(), 1);
        assert!(matches!(err.source, Error::ExpansionPoint { .. }));
    }

    #[test]
    fn best_prefers_highest_loglik() {
        let mk = |i, l| MleStep {
            iteration: i,
            theta: 0.0,
            phi: 0.0,
            energy: 0.0,
            loglik: l,
        };
        let t = MleTrace {
            steps: vec![mk(1, -3.0), mk(2, -1.0), mk(3, -1.0), mk(4, -2.0)],
        };
        assert_eq!(t.best().unwrap().iteration, 2);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("iteration,theta,phi,energy,loglik\n"));
    }

    #[test]
    fn data_parsing() {
        assert_eq!(
            parse_data("x\n1\n2.5\n# c\n\n3,4\n").unwrap(),
            vec![1.0, 2.5, 3.0, 4.0]
        );
        assert!(matches!(
            parse_data("1\nfoo\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_data("# nothing\n").is_err());
    }
}
