use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Fixed-point, non-negative encoding of a real as `Σ 2^p_i q_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryEncoding {
    powers: Vec<i32>,
}

impl BinaryEncoding {
    /// `powers` must be strictly decreasing.
    pub fn new(powers: Vec<i32>) -> Result<Self> {
        if powers.windows(2).any(|w| w[0] <= w[1]) {
            return invalid(format!("powers must be strictly decreasing, got {powers:?}"));
        }
        if powers.iter().any(|p| p.abs() > 1000) {
            return invalid("powers beyond ±1000 are not representable");
        }
        Ok(Self { powers })
    }

    /// Every power from `high` down to `low`, inclusive.
    pub fn from_range(high: i32, low: i32) -> Result<Self> {
        if low > high {
            return invalid(format!("lowest power {low} exceeds highest power {high}"));
        }
        Self::new((low..=high).rev().collect())
    }

    pub fn powers(&self) -> &[i32] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    /// Bit weights `2^p_i` in encoding order.
    pub fn weights(&self) -> Vec<f64> {
        self.powers.iter().map(|&p| 2f64.powi(p)).collect()
    }

    /// Largest representable value.
    pub fn max_value(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Smallest nonzero step, or 0 for the empty encoding.
    pub fn resolution(&self) -> f64 {
        self.powers.last().map_or(0.0, |&p| 2f64.powi(p))
    }

    pub fn decode(&self, bits: &[i8]) -> Result<f64> {
        if bits.len() != self.powers.len() {
            return invalid(format!(
                "expected {} bits for this encoding, got {}",
                self.powers.len(),
                bits.len()
            ));
        }
        if bits.iter().any(|&b| b != 0 && b != 1) {
            return invalid("encoded bits must be 0 or 1");
        }
        Ok(self
            .weights()
            .iter()
            .zip(bits)
            .map(|(w, &b)| w * f64::from(b))
            .sum())
    }
}
