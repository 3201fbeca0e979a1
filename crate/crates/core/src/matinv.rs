//! Column-wise matrix inversion by least-squares QUBOs.
//!
//! Column `k` of `V ≈ A⁻¹` minimizes `‖A v − e_k‖²`. Writing every entry of
//! `v` as a non-negative binary fixed-point number makes that a QUBO whose
//! coefficients only need `α_r = Σ_l A_lr²` and `β_rs = Σ_l A_lr A_ls`, both
//! computed once for all columns.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mle::BinaryEncoding;
use crate::model::QuboModel;
use crate::sampler::Sampler;

/// Powers used for every entry unless configured otherwise.
pub const DEFAULT_POWERS: [i32; 6] = [0, -1, -2, -3, -4, -5];

#[derive(Debug, Clone, PartialEq)]
pub struct MatInvProblem {
    a: DMatrix<f64>,
    alpha: DVector<f64>,
    beta: DMatrix<f64>,
    /// `encodings[r][k]` encodes `V_rk`.
    encodings: Vec<Vec<BinaryEncoding>>,
}

/// Validates `a` and computes `α` and `β` with the default encoding.
pub fn precompute(a: DMatrix<f64>) -> Result<MatInvProblem> {
    if !a.is_square() || a.nrows() == 0 {
        return invalid(format!(
            "matrix must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    let beta = a.transpose() * &a;
    let alpha = beta.diagonal();
    let n = a.nrows();
    let enc = BinaryEncoding::new(DEFAULT_POWERS.to_vec())?;
    Ok(MatInvProblem {
        a,
        alpha,
        beta,
        encodings: vec![vec![enc; n]; n],
    })
}

impl MatInvProblem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn encoding(&self, r: usize, k: usize) -> &BinaryEncoding {
        &self.encodings[r][k]
    }

    /// Same encoding for every entry.
    pub fn with_encoding(mut self, enc: BinaryEncoding) -> Result<Self> {
        if enc.is_empty() {
            return invalid("entry encoding needs at least one power");
        }
        let n = self.size();
        self.encodings = vec![vec![enc; n]; n];
        Ok(self)
    }

    /// Sets the encoding of the single entry `V_rk`.
    pub fn with_entry_encoding(mut self, r: usize, k: usize, enc: BinaryEncoding) -> Result<Self> {
        if r >= self.size() || k >= self.size() {
            return invalid(format!("entry ({r}, {k}) outside a {0}x{0} matrix", self.size()));
        }
        if enc.is_empty() {
            return invalid("entry encoding needs at least one power");
        }
        self.encodings[r][k] = enc;
        Ok(self)
    }

    /// Number of QUBO variables for column `k`.
    pub fn column_vars(&self, k: usize) -> usize {
        (0..self.size()).map(|r| self.encodings[r][k].len()).sum()
    }

    /// `(entry row, power)` of every variable of column `k`, in order.
    fn column_layout(&self, k: usize) -> Vec<(usize, i32)> {
        (0..self.size())
            .flat_map(|r| self.encodings[r][k].powers().iter().map(move |&p| (r, p)))
            .collect()
    }

    fn check_column(&self, k: usize) -> Result<()> {
        if k >= self.size() {
            return invalid(format!("column {k} outside a {0}x{0} matrix", self.size()));
        }
        Ok(())
    }

    /// Decodes column `k`'s bits into entry values.
    pub fn decode_column(&self, k: usize, bits: &[i8]) -> Result<Vec<f64>> {
        self.check_column(k)?;
        if bits.len() != self.column_vars(k) {
            return invalid(format!(
                "column {k} has {} bits, got {}",
                self.column_vars(k),
                bits.len()
            ));
        }
        let mut out = Vec::with_capacity(self.size());
        let mut rest = bits;
        for r in 0..self.size() {
            let enc = &self.encodings[r][k];
            let (head, tail) = rest.split_at(enc.len());
            out.push(enc.decode(head)?);
            rest = tail;
        }
        Ok(out)
    }

    /// `‖A v − e_k‖²` computed directly.
    pub fn column_energy(&self, k: usize, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let mut r = &self.a * v;
        r[k] -= 1.0;
        r.norm_squared()
    }
}

/// QUBO over column `k`'s bits whose energy is `‖A v − e_k‖²`.
pub fn column_qubo(p: &MatInvProblem, k: usize) -> Result<QuboModel> {
    p.check_column(k)?;
    let layout = p.column_layout(k);
    let mut m = QuboModel::new(layout.len());
    for (i, &(r, pi)) in layout.iter().enumerate() {
        let a = 2f64.powi(2 * pi) * p.alpha[r] - 2f64.powi(pi + 1) * p.a[(k, r)];
        m.set_linear(i, a)?;
        for (j, &(s, pj)) in layout.iter().enumerate().skip(i + 1) {
            let b = 2f64.powi(pi + pj + 1) * p.beta[(r, s)];
            m.set_quadratic(i, j, b)?;
        }
    }
    m.set_offset(1.0)?;
    Ok(m)
}

/// Outcome of [`invert`]. Failed columns hold NaN and are listed in
/// `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatInvResult {
    #[serde(with = "matrix_rows")]
    pub v_hat: DMatrix<f64>,
    pub column_energies: Vec<Option<f64>>,
    pub residual: f64,
    pub failures: Vec<ColumnFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnFailure {
    pub column: usize,
    pub error: String,
}

/// Solves every column independently, each with its own sampler substream.
pub fn invert(p: &MatInvProblem, sampler: &Sampler) -> MatInvResult {
    let n = p.size();
    let columns: Vec<Result<(Vec<f64>, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let q = column_qubo(p, k)?;
            let set = sampler.substream(k as u64).sample(&q)?;
            let best = set
                .first()
                .ok_or_else(|| Error::InvalidArgument("sampler returned no samples".into()))?;
            let v = p.decode_column(k, &best.assignment)?;
            let e = p.column_energy(k, &v);
            Ok((v, e))
        })
        .collect();

    let mut v_hat = DMatrix::from_element(n, n, f64::NAN);
    let mut column_energies = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for (k, col) in columns.into_iter().enumerate() {
        match col {
            Ok((v, e)) => {
                v_hat.set_column(k, &DVector::from_vec(v));
                column_energies.push(Some(e));
            }
            Err(e) => {
                log::warn!("column {k} failed: {e}");
                column_energies.push(None);
                failures.push(ColumnFailure {
                    column: k,
                    error: e.to_string(),
                });
            }
        }
    }
    let residual = residual(p.matrix(), &v_hat);
    MatInvResult {
        v_hat,
        column_energies,
        residual,
        failures,
    }
}

/// `‖A V − I‖_F`.
pub fn residual(a: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (a * v - DMatrix::identity(a.nrows(), a.ncols())).norm()
}

/// Classical inverse, for diagnostics only. Warns when it has negative
/// entries, which the non-negative encoding cannot represent.
pub fn diagnostic_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = a.clone().try_inverse()?;
    let negative = inv.iter().filter(|&&x| x < 0.0).count();
    if negative > 0 {
        log::warn!("the inverse has {negative} negative entries; those cannot be represented and will be clamped at 0");
    }
    Some(inv)
}

/// One row per line, comma-separated. Blank lines and `#` comments are
/// skipped.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                let f = f.trim();
                match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        line: idx + 1,
                        message: format!("`{f}` is not a finite number"),
                    }),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return invalid("matrix file is empty");
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(nr, nc, rows.into_iter().flatten()))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Serializes a matrix as a list of rows.
mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|r| m.row(r).iter().copied().collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Option<Vec<Option<f64>>>> = Deserialize::deserialize(d)?;
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| {
                r.unwrap_or_default()
                    .into_iter()
                    .map(|x| x.unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_row_iterator(
            rows.len(),
            nc,
            rows.into_iter().flatten(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{exact_solve, ExactSolver};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn reference_matrix() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            3,
            3,
            &[1.344, 0.418, -0.935, -1.018, 1.095, -0.250, 0.277, -0.384, 0.755],
        )
    }

    #[test]
    fn alpha_beta() {
        let id = precompute(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.alpha().as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(id.beta()[(0, 1)], 0.0);
        let p = precompute(reference_matrix()).unwrap();
        assert!((p.alpha()[0] - (1.344f64.powi(2) + 1.018f64.powi(2) + 0.277f64.powi(2))).abs() < 1e-12);
        assert!((p.alpha()[0] - 2.9194).abs() < 1e-4);
        assert_eq!(p.beta()[(0, 1)], p.beta()[(1, 0)]);
        assert!(precompute(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn energy_identity_on_random_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [3, 4] {
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            let p = precompute(a)
                .unwrap()
                .with_encoding(BinaryEncoding::from_range(1, -2).unwrap())
                .unwrap();
            for k in 0..n {
                let q = column_qubo(&p, k).unwrap();
                for _ in 0..50 {
                    let bits: Vec<i8> = (0..q.num_vars()).map(|_| rng.random_range(0..2)).collect();
                    let v = p.decode_column(k, &bits).unwrap();
                    assert!((q.energy_of(&bits) - p.column_energy(k, &v)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn identity_inverts_exactly() {
        let p = precompute(DMatrix::identity(3, 3))
            .unwrap()
            .with_encoding(BinaryEncoding::new(vec![0]).unwrap())
            .unwrap();
        let set = exact_solve(&column_qubo(&p, 0).unwrap()).unwrap();
        assert_eq!(set.records()[0].assignment, vec![1, 0, 0]);
        assert!(set.lowest_energy().unwrap().abs() < 1e-15);
        let r = invert(&p, &Sampler::Exact(ExactSolver::default()));
        assert_eq!(r.v_hat, DMatrix::identity(3, 3));
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn scalar_half() {
        let p = precompute(DMatrix::from_element(1, 1, 2.0))
            .unwrap()
            .with_encoding(BinaryEncoding::new(vec![0, -1]).unwrap())
            .unwrap();
        let r = invert(&p, &Sampler::Exact(ExactSolver::default()));
        assert_eq!(r.v_hat[(0, 0)], 0.5);
        assert_eq!(r.column_energies, vec![Some(0.0)]);
    }

    #[test]
    fn failed_columns_are_marked() {
        let p = precompute(DMatrix::identity(2, 2))
            .unwrap()
            .with_encoding(BinaryEncoding::from_range(12, 0).unwrap())
            .unwrap();
        let r = invert(&p, &Sampler::Exact(ExactSolver::default()));
        assert_eq!(r.failures.len(), 2);
        assert!(r.residual.is_nan());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("null"));
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = reference_matrix();
        assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
        assert!(matches!(
            parse_matrix("1,2\n3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_matrix("1,x\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn negative_inverse_detected() {
        let inv = diagnostic_inverse(&reference_matrix()).unwrap();
        assert!(inv.iter().all(|&x| x > 0.0));
        let neg = diagnostic_inverse(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(neg.iter().any(|&x| x < 0.0));
    }
}
