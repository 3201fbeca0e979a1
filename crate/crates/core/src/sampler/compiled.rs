use crate::model::{QuadraticModel, VarKind, Vartype};

/// Adjacency (CSR) view of a model for single-variable moves.
///
/// The energy is multilinear, so changing `v_i` to `v_i'` changes it by
/// `(v_i' - v_i) * field_i` where `field_i = lin_i + Σ_j w_ij v_j`. That
/// identity holds in both conventions.
#[derive(Debug, Clone)]
pub(crate) struct CompiledModel {
    pub kind: VarKind,
    pub linear: Vec<f64>,
    pub offset: f64,
    starts: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    /// Position of each stored interaction `(i, j)` in the model's key
    /// order, for both directed halves.
    edge_ids: Vec<u32>,
}

impl CompiledModel {
    pub fn new<V: Vartype>(m: &QuadraticModel<V>) -> Self {
        let n = m.num_vars();
        let mut degree = vec![0usize; n];
        for &(i, j) in m.quadratic().keys() {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut starts = Vec::with_capacity(n + 1);
        starts.push(0);
        for d in &degree {
            starts.push(starts.last().unwrap() + d);
        }
        let total = *starts.last().unwrap();
        let mut neighbors = vec![0u32; total];
        let mut weights = vec![0.0; total];
        let mut edge_ids = vec![0u32; total];
        let mut fill = starts[..n].to_vec();
        for (id, (&(i, j), &w)) in m.quadratic().iter().enumerate() {
            for (a, b) in [(i, j), (j, i)] {
                neighbors[fill[a]] = b as u32;
                weights[fill[a]] = w;
                edge_ids[fill[a]] = id as u32;
                fill[a] += 1;
            }
        }
        Self {
            kind: V::KIND,
            linear: m.linear().to_vec(),
            offset: m.offset(),
            starts,
            neighbors,
            weights,
            edge_ids,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.starts[i]..self.starts[i + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// Replaces linear terms and interaction weights. `quadratic` is
    /// indexed in the original model's key order.
    pub fn set_coefficients(&mut self, linear: &[f64], quadratic: &[f64]) {
        self.linear.copy_from_slice(linear);
        for (w, &id) in self.weights.iter_mut().zip(&self.edge_ids) {
            *w = quadratic[id as usize];
        }
    }

    pub fn fields(&self, values: &[i8]) -> Vec<f64> {
        (0..self.num_vars())
            .map(|i| {
                self.linear[i]
                    + self
                        .neighbors(i)
                        .map(|(j, w)| w * f64::from(values[j]))
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn energy(&self, values: &[i8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.num_vars() {
            let vi = f64::from(values[i]);
            e += self.linear[i] * vi;
            for (j, w) in self.neighbors(i) {
                if j > i {
                    e += w * vi * f64::from(values[j]);
                }
            }
        }
        e
    }

    /// Sets `values[i]` to `new` and updates the neighbours' fields.
    #[inline]
    pub fn apply(&self, values: &mut [i8], fields: &mut [f64], i: usize, new: i8) {
        let step = f64::from(new - values[i]);
        values[i] = new;
        let range = self.starts[i]..self.starts[i + 1];
        for (&j, &w) in self.neighbors[range.clone()].iter().zip(&self.weights[range]) {
            fields[j as usize] += w * step;
        }
    }

    /// Calls `visit(state_bits, energy)` for all `2^n` states in Gray-code
    /// order, starting from state 0. Energies are updated incrementally.
    pub fn for_each_state(&self, mut visit: impl FnMut(u64, f64)) {
        self.for_each_state_with_prefix(0, self.num_vars(), &mut visit);
    }

    /// Enumerates the low `free` bits while the high bits stay at `prefix`.
    pub fn for_each_state_with_prefix(&self, prefix: u64, free: usize, visit: &mut impl FnMut(u64, f64)) {
        let n = self.num_vars();
        let [lo, hi] = self.kind.values();
        let mut values: Vec<i8> = (0..n)
            .map(|i| if prefix >> i & 1 == 1 { hi } else { lo })
            .collect();
        let mut fields = self.fields(&values);
        let mut energy = self.energy(&values);
        let mut bits = prefix;
        visit(bits, energy);
        for step in 1u64..(1u64 << free) {
            let i = step.trailing_zeros() as usize;
            let new = self.kind.flip(values[i]);
            energy += f64::from(new - values[i]) * fields[i];
            self.apply(&mut values, &mut fields, i, new);
            bits ^= 1 << i;
            visit(bits, energy);
        }
    }
}
