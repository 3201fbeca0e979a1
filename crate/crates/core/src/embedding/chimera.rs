use std::fmt;
use std::str::FromStr;

use super::Graph;
use crate::error::{invalid, Error, Result};

/// A Chimera hardware graph: an `rows × cols` grid of `K_{L,L}` unit cells.
///
/// Node `((row * cols + col) * 2 + side) * L + k` is qubit `k` on shore
/// `side` of cell `(row, col)`. Shore 0 qubits couple to the same `k` in the
/// cells above and below; shore 1 qubits couple left and right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    shore: usize,
    graph: Graph,
}

/// Position of a qubit inside a Chimera graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChimeraCoord {
    pub row: usize,
    pub col: usize,
    pub side: usize,
    pub k: usize,
}

pub fn chimera(rows: usize, cols: usize, shore: usize) -> Result<ChimeraGraph> {
    ChimeraGraph::new(rows, cols, shore)
}

impl ChimeraGraph {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || shore == 0 {
            return invalid(format!(
                "chimera dimensions must be positive, got {rows},{cols},{shore}"
            ));
        }
        let mut c = Self {
            rows,
            cols,
            shore,
            graph: Graph::new(2 * shore * rows * cols),
        };
        let mut edges = Vec::new();
        for row in 0..rows {
            for col in 0..cols {
                for a in 0..shore {
                    let v = c.node(row, col, 0, a);
                    for b in 0..shore {
                        edges.push((v, c.node(row, col, 1, b)));
                    }
                    if row + 1 < rows {
                        edges.push((v, c.node(row + 1, col, 0, a)));
                    }
                    if col + 1 < cols {
                        edges.push((c.node(row, col, 1, a), c.node(row, col + 1, 1, a)));
                    }
                }
            }
        }
        for (u, v) in edges {
            c.graph.add_edge(u, v)?;
        }
        Ok(c)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn node(&self, row: usize, col: usize, side: usize, k: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols && side < 2 && k < self.shore);
        ((row * self.cols + col) * 2 + side) * self.shore + k
    }

    pub fn coord(&self, node: usize) -> ChimeraCoord {
        let k = node % self.shore;
        let rest = node / self.shore;
        let side = rest % 2;
        let cell = rest / 2;
        ChimeraCoord {
            row: cell / self.cols,
            col: cell % self.cols,
            side,
            k,
        }
    }
}

/// Parsed `chimera:m,n,L` topology argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologySpec {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
}

impl TopologySpec {
    pub fn build(&self) -> Result<ChimeraGraph> {
        ChimeraGraph::new(self.rows, self.cols, self.shore)
    }
}

impl FromStr for TopologySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("topology `{s}` is not of the form chimera:m,n,L"));
        let dims = s.strip_prefix("chimera:").ok_or_else(bad)?;
        let parts: Vec<usize> = dims
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match parts[..] {
            [rows, cols, shore] => Ok(Self { rows, cols, shore }),
            [rows, cols] => Ok(Self { rows, cols, shore: 4 }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chimera:{},{},{}", self.rows, self.cols, self.shore)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_degree(c: &ChimeraGraph) -> usize {
        (0..c.num_nodes()).map(|u| c.graph().degree(u)).max().unwrap()
    }

    #[test]
    fn single_cell_is_k44() {
        let c = chimera(1, 1, 4).unwrap();
        assert_eq!(c.num_nodes(), 8);
        assert_eq!(c.graph().num_edges(), 16);
        assert!((0..8).all(|u| c.graph().degree(u) == 4));
    }

    #[test]
    fn two_by_two() {
        let c = chimera(2, 2, 4).unwrap();
        assert_eq!(c.num_nodes(), 32);
        assert_eq!(c.graph().num_edges(), 80);
        assert_eq!(max_degree(&c), 5);
    }

    #[test]
    fn smallest() {
        let c = chimera(1, 1, 1).unwrap();
        assert_eq!(c.num_nodes(), 2);
        assert_eq!(c.graph().num_edges(), 1);
        assert!(chimera(0, 1, 4).is_err());
    }

    #[test]
    fn degree_bound_and_coords() {
        let c = chimera(8, 8, 4).unwrap();
        assert_eq!(c.num_nodes(), 512);
        assert_eq!(max_degree(&c), 6);
        for u in 0..c.num_nodes() {
            let p = c.coord(u);
            assert_eq!(c.node(p.row, p.col, p.side, p.k), u);
        }
    }

    #[test]
    fn topology_spec_parsing() {
        let t: TopologySpec = "chimera:16,16,4".parse().unwrap();
        assert_eq!(
            t,
            TopologySpec {
                rows: 16,
                cols: 16,
                shore: 4
            }
        );
        assert_eq!(t.to_string(), "chimera:16,16,4");
        assert!("pegasus:6".parse::<TopologySpec>().is_err());
        assert!("chimera:1,x,4".parse::<TopologySpec>().is_err());
    }
}
