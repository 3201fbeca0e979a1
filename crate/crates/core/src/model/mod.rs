//! Binary quadratic models in the two conventions an annealer understands.
//!
//! A model is the energy function
//!
//! ```text
//! E(v) = Σ_i lin_i v_i + Σ_{i<j} quad_ij v_i v_j + offset
//! ```
//!
//! over variables `v_i ∈ {0, 1}` (QUBO) or `v_i ∈ {-1, +1}` (Ising). The two
//! forms are related by `q = (1 + s) / 2` and convert exactly in both
//! directions once a constant offset is carried along.

mod io;

pub use io::{parse_qubo, read_qubo, write_qubo};

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Runtime tag for the variable convention of a model or assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    /// Bits in `{0, 1}`.
    Qubo,
    /// Spins in `{-1, +1}`.
    Ising,
}

impl VarKind {
    /// The two admissible values, low state first.
    pub const fn values(self) -> [i8; 2] {
        match self {
            VarKind::Qubo => [0, 1],
            VarKind::Ising => [-1, 1],
        }
    }

    pub const fn is_valid(self, v: i8) -> bool {
        match self {
            VarKind::Qubo => v == 0 || v == 1,
            VarKind::Ising => v == -1 || v == 1,
        }
    }

    /// The opposite state of `v` within this convention.
    #[inline]
    pub const fn flip(self, v: i8) -> i8 {
        match self {
            VarKind::Qubo => 1 - v,
            VarKind::Ising => -v,
        }
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Qubo => "qubo",
            VarKind::Ising => "ising",
        })
    }
}

/// Compile-time variable convention.
pub trait Vartype: Copy + Default + fmt::Debug + Send + Sync + 'static {
    const KIND: VarKind;
}

/// Marker for `{0, 1}` variables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Binary;

/// Marker for `{-1, +1}` variables.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Spin;

impl Vartype for Binary {
    const KIND: VarKind = VarKind::Qubo;
}

impl Vartype for Spin {
    const KIND: VarKind = VarKind::Ising;
}

/// A full assignment of values to every variable of a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: Vec<i8>,
    kind: VarKind,
}

impl Assignment {
    pub fn new(values: Vec<i8>, kind: VarKind) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| !kind.is_valid(v)) {
            return invalid(format!(
                "value {} at position {pos} is not a valid {kind} value",
                values[pos]
            ));
        }
        Ok(Self { values, kind })
    }

    pub fn binary(values: Vec<i8>) -> Result<Self> {
        Self::new(values, VarKind::Qubo)
    }

    pub fn spin(values: Vec<i8>) -> Result<Self> {
        Self::new(values, VarKind::Ising)
    }

    /// Low `n` bits of `bits`, variable 0 in bit 0.
    pub fn from_bits(bits: u64, n: usize, kind: VarKind) -> Self {
        let [lo, hi] = kind.values();
        let values = (0..n).map(|i| if bits >> i & 1 == 1 { hi } else { lo }).collect();
        Self { values, kind }
    }

    pub(crate) fn from_values_unchecked(values: Vec<i8>, kind: VarKind) -> Self {
        debug_assert!(values.iter().all(|&v| kind.is_valid(v)));
        Self { values, kind }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i8> {
        self.values
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same configuration in the other convention (0 ↔ −1, 1 ↔ +1).
    pub fn to_kind(&self, kind: VarKind) -> Self {
        if kind == self.kind {
            return self.clone();
        }
        let values = self
            .values
            .iter()
            .map(|&v| match kind {
                VarKind::Ising => 2 * v - 1,
                VarKind::Qubo => (v + 1) / 2,
            })
            .collect();
        Self { values, kind }
    }
}

/// Coefficients of a binary quadratic model with sparse upper-triangular
/// interaction storage. Absent keys are zero.
#[derive(Clone, PartialEq)]
pub struct QuadraticModel<V: Vartype> {
    linear: Vec<f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    _vartype: PhantomData<V>,
}

/// Model over `{0, 1}` variables: linear terms `a_i`, interactions `b_ij`.
pub type QuboModel = QuadraticModel<Binary>;

/// Model over `{-1, +1}` spins: fields `h_i`, couplings `J_ij`.
pub type IsingModel = QuadraticModel<Spin>;

impl<V: Vartype> fmt::Debug for QuadraticModel<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct(match V::KIND {
            VarKind::Qubo => "QuboModel",
            VarKind::Ising => "IsingModel",
        })
        .field("linear", &self.linear)
        .field("quadratic", &self.quadratic)
        .field("offset", &self.offset)
        .finish()
    }
}

impl<V: Vartype> Default for QuadraticModel<V> {
    fn default() -> Self {
        Self::new(0)
    }
}

fn check_finite(what: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        invalid(format!("{what} coefficient {value} is not finite"))
    }
}

impl<V: Vartype> QuadraticModel<V> {
    pub const KIND: VarKind = V::KIND;

    /// All-zero model over `num_vars` variables.
    pub fn new(num_vars: usize) -> Self {
        Self {
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
            _vartype: PhantomData,
        }
    }

    /// Builds a model from dense linear terms and `(i, j, value)` interactions.
    /// Interactions with `i > j` are stored as `(j, i)`; repeated pairs add.
    pub fn from_terms(
        linear: Vec<f64>,
        quadratic: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        for &v in &linear {
            check_finite("linear", v)?;
        }
        check_finite("offset", offset)?;
        let mut model = Self {
            linear,
            quadratic: BTreeMap::new(),
            offset,
            _vartype: PhantomData,
        };
        for (i, j, v) in quadratic {
            model.add_quadratic(i, j, v)?;
        }
        Ok(model)
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) -> Result<()> {
        check_finite("offset", offset)?;
        self.offset = offset;
        Ok(())
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn linear_at(&self, i: usize) -> f64 {
        self.linear.get(i).copied().unwrap_or(0.0)
    }

    pub fn set_linear(&mut self, i: usize, value: f64) -> Result<()> {
        check_finite("linear", value)?;
        match self.linear.get_mut(i) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => invalid(format!(
                "variable {i} out of range for {} variables",
                self.num_vars()
            )),
        }
    }

    pub fn add_linear(&mut self, i: usize, value: f64) -> Result<()> {
        let current = self.linear_at(i);
        self.set_linear(i, current + value)
    }

    /// Interactions keyed by `(i, j)` with `i < j`, in ascending key order.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn quadratic_at(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    fn pair_key(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i == j {
            return invalid(format!("interaction ({i}, {j}) must join two distinct variables"));
        }
        let key = if i < j { (i, j) } else { (j, i) };
        if key.1 >= self.num_vars() {
            return invalid(format!(
                "interaction ({i}, {j}) out of range for {} variables",
                self.num_vars()
            ));
        }
        Ok(key)
    }

    /// Sets `quad_ij`; a zero value removes the key.
    pub fn set_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        check_finite("quadratic", value)?;
        let key = self.pair_key(i, j)?;
        if value == 0.0 {
            self.quadratic.remove(&key);
        } else {
            self.quadratic.insert(key, value);
        }
        Ok(())
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let current = self.quadratic_at(i, j);
        self.set_quadratic(i, j, current + value)
    }

    pub fn num_interactions(&self) -> usize {
        self.quadratic.len()
    }

    /// Energy of `a`. The assignment must use this model's convention and
    /// cover every variable.
    pub fn energy(&self, a: &Assignment) -> Result<f64> {
        if a.kind() != V::KIND {
            return invalid(format!("{} assignment given to a {} model", a.kind(), V::KIND));
        }
        if a.len() != self.num_vars() {
            return invalid(format!(
                "assignment has {} values, model has {} variables",
                a.len(),
                self.num_vars()
            ));
        }
        Ok(self.energy_of(a.values()))
    }

    /// Energy of raw values; the caller guarantees length and convention.
    pub fn energy_of(&self, values: &[i8]) -> f64 {
        debug_assert_eq!(values.len(), self.num_vars());
        let mut e = self.offset;
        for (&c, &v) in self.linear.iter().zip(values) {
            e += c * f64::from(v);
        }
        for (&(i, j), &c) in &self.quadratic {
            e += c * f64::from(values[i]) * f64::from(values[j]);
        }
        e
    }

    /// Multiplies every coefficient and the offset by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            linear: self.linear.iter().map(|c| c * factor).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &c)| (k, c * factor)).collect(),
            offset: self.offset * factor,
            _vartype: PhantomData,
        }
    }

    /// Equivalent model in Ising form (identity for Ising models).
    pub fn to_ising(&self) -> IsingModel {
        match V::KIND {
            VarKind::Ising => recast(self),
            VarKind::Qubo => qubo_to_ising(&recast(self)),
        }
    }

    /// Equivalent model in QUBO form (identity for QUBO models).
    pub fn to_qubo(&self) -> QuboModel {
        match V::KIND {
            VarKind::Qubo => recast(self),
            VarKind::Ising => ising_to_qubo(&recast(self)),
        }
    }

    /// Largest absolute linear or quadratic coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .iter()
            .chain(self.quadratic.values())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

fn recast<A: Vartype, B: Vartype>(m: &QuadraticModel<A>) -> QuadraticModel<B> {
    QuadraticModel {
        linear: m.linear.clone(),
        quadratic: m.quadratic.clone(),
        offset: m.offset,
        _vartype: PhantomData,
    }
}

impl QuboModel {
    /// The upper-triangular matrix `Q` with `a_i` on the diagonal and `b_ij`
    /// above it, so that `E(x) = x'Qx + offset` for bit vectors `x`.
    pub fn upper_triangular_matrix(&self) -> DMatrix<f64> {
        let n = self.num_vars();
        let mut q = DMatrix::zeros(n, n);
        for (i, &a) in self.linear.iter().enumerate() {
            q[(i, i)] = a;
        }
        for (&(i, j), &b) in &self.quadratic {
            q[(i, j)] = b;
        }
        q
    }
}

/// Substitutes `q = (1 + s) / 2`. Energies agree exactly under 0 ↔ −1, 1 ↔ +1.
pub fn qubo_to_ising(m: &QuboModel) -> IsingModel {
    let mut h: Vec<f64> = m.linear.iter().map(|a| a / 2.0).collect();
    let mut offset = m.offset + m.linear.iter().sum::<f64>() / 2.0;
    let mut couplings = BTreeMap::new();
    for (&(i, j), &b) in &m.quadratic {
        let quarter = b / 4.0;
        h[i] += quarter;
        h[j] += quarter;
        offset += quarter;
        couplings.insert((i, j), quarter);
    }
    QuadraticModel {
        linear: h,
        quadratic: couplings,
        offset,
        _vartype: PhantomData,
    }
}

/// Substitutes `s = 2q − 1`; inverse of [`qubo_to_ising`].
pub fn ising_to_qubo(m: &IsingModel) -> QuboModel {
    let mut a: Vec<f64> = m.linear.iter().map(|h| 2.0 * h).collect();
    let mut offset = m.offset - m.linear.iter().sum::<f64>();
    let mut interactions = BTreeMap::new();
    for (&(i, j), &coupling) in &m.quadratic {
        a[i] -= 2.0 * coupling;
        a[j] -= 2.0 * coupling;
        offset += coupling;
        interactions.insert((i, j), 4.0 * coupling);
    }
    QuadraticModel {
        linear: a,
        quadratic: interactions,
        offset,
        _vartype: PhantomData,
    }
}

/// Coefficient limits of the physical device, in Ising form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareRange {
    pub h_min: f64,
    pub h_max: f64,
    pub j_min: f64,
    pub j_max: f64,
}

impl Default for HardwareRange {
    fn default() -> Self {
        Self {
            h_min: -2.0,
            h_max: 2.0,
            j_min: -4.0,
            j_max: 1.0,
        }
    }
}

impl HardwareRange {
    pub fn new(h_min: f64, h_max: f64, j_min: f64, j_max: f64) -> Result<Self> {
        let r = Self {
            h_min,
            h_max,
            j_min,
            j_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.h_min, self.h_max, self.j_min, self.j_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.h_min < 0.0 && 0.0 < self.h_max) {
            return invalid(format!(
                "field range [{}, {}] must satisfy h_min < 0 < h_max",
                self.h_min, self.h_max
            ));
        }
        if !(self.j_min < 0.0 && 0.0 <= self.j_max) {
            return invalid(format!(
                "coupling range [{}, {}] must satisfy j_min < 0 <= j_max",
                self.j_min, self.j_max
            ));
        }
        Ok(())
    }

    pub fn contains_coupling(&self, j: f64) -> bool {
        self.j_min <= j && j <= self.j_max
    }

    /// Smallest divisor `>= 1` that brings every coefficient of `m` into range.
    ///
    /// Fields are measured against the tighter of the two field bounds so
    /// the result never depends on sign. Positive couplings are only
    /// constrained when `j_max > 0`.
    pub fn required_scale(&self, m: &IsingModel) -> f64 {
        let h_limit = self.h_min.abs().min(self.h_max);
        let mut scale = 1.0_f64;
        for h in m.linear() {
            scale = scale.max(h.abs() / h_limit);
        }
        for &j in m.quadratic().values() {
            if j > 0.0 && self.j_max > 0.0 {
                scale = scale.max(j / self.j_max);
            } else if j < 0.0 {
                scale = scale.max(j.abs() / self.j_min.abs());
            }
        }
        scale
    }
}

/// Divides every coefficient and the offset by the single positive scale
/// that fits `m` into `r`. Returns the rescaled model and the divisor.
pub fn rescale_to_hardware(m: &IsingModel, r: &HardwareRange) -> (IsingModel, f64) {
    let scale = r.required_scale(m);
    if scale == 1.0 {
        (m.clone(), 1.0)
    } else {
        (m.scaled(1.0 / scale), scale)
    }
}
