//! N-queens experimental designs.
//!
//! An `N × N` grid has one binary variable per cell, numbered row-major from
//! the top-left. The QUBO rewards every placed point and penalizes pairs that
//! share a row, column or diagonal, so a conflict-free placement of `N`
//! points is a Latin hypercube design that also avoids diagonal clustering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedding::{
    embed_model_in_range, find_embedding_with, unembed, BrokenChains, EmbeddingOptions, Graph, TopologySpec,
};
use crate::error::{invalid, Result};
use crate::model::{Assignment, QuboModel, VarKind};
use crate::sampler::{SampleSet, Sampler};

/// Coefficients of the N-queens QUBO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NQueensWeights {
    /// Linear reward per placed point.
    pub point: f64,
    /// Penalty for two points in one row or column.
    pub line: f64,
    /// Penalty for two points on one diagonal.
    pub diagonal: f64,
}

impl Default for NQueensWeights {
    fn default() -> Self {
        Self {
            point: -2.0,
            line: 2.0,
            diagonal: 1.0,
        }
    }
}

/// Row-major cell numbering of an `n × n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignGrid {
    n: usize,
}

impl DesignGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("design size must be at least 1");
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn num_cells(&self) -> usize {
        self.n * self.n
    }

    pub fn cell(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.n, cell % self.n)
    }
}

pub fn nqueens_qubo(n: usize) -> Result<QuboModel> {
    nqueens_qubo_with(n, &NQueensWeights::default())
}

pub fn nqueens_qubo_with(n: usize, w: &NQueensWeights) -> Result<QuboModel> {
    let g = DesignGrid::new(n)?;
    let cells = g.num_cells();
    let mut m = QuboModel::new(cells);
    for i in 0..cells {
        m.set_linear(i, w.point)?;
        let (r1, c1) = g.coords(i);
        for j in i + 1..cells {
            let (r2, c2) = g.coords(j);
            let mut b = 0.0;
            if r1 == r2 || c1 == c2 {
                b += w.line;
            }
            if r1 + c2 == r2 + c1 || r1 + c1 == r2 + c2 {
                b += w.diagonal;
            }
            if b != 0.0 {
                m.set_quadratic(i, j, b)?;
            }
        }
    }
    Ok(m)
}

/// Occupied cells of a grid, `(row, col)` 0-based, in cell order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub size: usize,
    pub points: Vec<(usize, usize)>,
}

/// Pairwise conflicts among a design's points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Conflicts {
    pub rows: usize,
    pub cols: usize,
    pub diagonals: usize,
}

impl Design {
    fn full(&self) -> bool {
        self.points.len() == self.size
    }

    fn distinct(&self, key: impl Fn(&(usize, usize)) -> isize) -> bool {
        let mut keys: Vec<isize> = self.points.iter().map(key).collect();
        keys.sort_unstable();
        keys.windows(2).all(|w| w[0] != w[1])
    }

    /// Exactly `size` points, no two in one row.
    pub fn row_latin(&self) -> bool {
        self.full() && self.distinct(|p| p.0 as isize)
    }

    /// Exactly `size` points, no two in one column.
    pub fn col_latin(&self) -> bool {
        self.full() && self.distinct(|p| p.1 as isize)
    }

    /// Exactly `size` points, no two on one diagonal.
    pub fn diagonal_free(&self) -> bool {
        self.full()
            && self.distinct(|p| p.0 as isize - p.1 as isize)
            && self.distinct(|p| (p.0 + p.1) as isize)
    }

    pub fn is_valid(&self) -> bool {
        self.row_latin() && self.col_latin() && self.diagonal_free()
    }

    pub fn conflicts(&self) -> Conflicts {
        let mut c = Conflicts::default();
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                c.rows += usize::from(a.0 == b.0);
                c.cols += usize::from(a.1 == b.1);
                c.diagonals += usize::from(a.0 + b.1 == b.0 + a.1) + usize::from(a.0 + a.1 == b.0 + b.1);
            }
        }
        c
    }

    /// Cell-centre coordinates in the unit square, `(x, y)` = `(col, row)`.
    pub fn unit_points(&self) -> Vec<(f64, f64)> {
        let n = self.size as f64;
        self.points
            .iter()
            .map(|&(r, c)| ((c as f64 + 0.5) / n, (r as f64 + 0.5) / n))
            .collect()
    }

    /// `row,col` CSV preceded by a comment line carrying the validity flags.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# size={} points={} row_latin={} col_latin={} diagonal_free={} valid={}",
            self.size,
            self.points.len(),
            self.row_latin(),
            self.col_latin(),
            self.diagonal_free(),
            self.is_valid()
        );
        out.push_str("row,col\n");
        for (r, c) in &self.points {
            let _ = writeln!(out, "{r},{c}");
        }
        out
    }
}

pub fn decode_design(a: &Assignment, g: &DesignGrid) -> Result<Design> {
    if a.len() != g.num_cells() {
        return invalid(format!("expected {} cells, got {}", g.num_cells(), a.len()));
    }
    let bits = a.to_kind(VarKind::Qubo);
    let points = bits
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 1)
        .map(|(i, _)| g.coords(i))
        .collect();
    Ok(Design {
        size: g.size(),
        points,
    })
}

/// Optional hardware embedding for [`generate_design`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignEmbedding {
    pub topology: TopologySpec,
    pub chain_strength: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DesignOptions {
    pub weights: NQueensWeights,
    pub embedding: Option<DesignEmbedding>,
}

/// Builds and samples the N-queens QUBO and decodes the best sample.
///
/// With an embedding the problem is sampled on the physical Ising model and
/// collapsed back by majority vote; the returned sample set is always over
/// the logical QUBO.
pub fn generate_design(n: usize, sampler: &Sampler, options: &DesignOptions) -> Result<(Design, SampleSet)> {
    let grid = DesignGrid::new(n)?;
    let qubo = nqueens_qubo_with(n, &options.weights)?;
    let set = match &options.embedding {
        None => sampler.sample(&qubo)?,
        Some(e) => {
            let ising = qubo.to_ising();
            let hw = e.topology.build()?;
            let embed_opts = EmbeddingOptions {
                chain_strength: e.chain_strength,
                ..Default::default()
            };
            let emb = find_embedding_with(&Graph::from_model(&ising), &hw, e.seed, &embed_opts)?;
            let range = match sampler {
                Sampler::Boltzmann(b) => b.range,
                _ => Default::default(),
            };
            let physical = embed_model_in_range(&ising, &emb, hw.graph(), &range)?;
            let raw = sampler.sample(&physical)?;
            let mut logical = unembed(&raw, &emb, &ising, BrokenChains::MajorityVote)?.convert(&qubo)?;
            let info = logical.info_mut();
            info.extra
                .insert("topology".into(), e.topology.to_string().into());
            info.extra
                .insert("physical_qubits".into(), emb.num_qubits().into());
            info.extra
                .insert("max_chain_length".into(), emb.max_chain_length().into());
            info.extra
                .insert("chain_strength".into(), e.chain_strength.into());
            logical
        }
    };
    let best = set
        .first()
        .ok_or_else(|| crate::Error::InvalidArgument("sampler returned no samples".into()))?;
    let design = decode_design(&set.assignment(best), &grid)?;
    Ok((design, set))
}
