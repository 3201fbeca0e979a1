use std::collections::BTreeSet;

use crate::error::{invalid, Result};
use crate::model::{QuadraticModel, Vartype};

/// Simple undirected graph on nodes `0..num_nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(num_nodes: usize) -> Self {
        Self {
            adjacency: vec![BTreeSet::new(); num_nodes],
        }
    }

    pub fn from_edges(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(num_nodes);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.adjacency[u].insert(v);
                g.adjacency[v].insert(u);
            }
        }
        g
    }

    /// Interaction graph of a model: one node per variable, one edge per
    /// stored interaction.
    pub fn from_model<V: Vartype>(m: &QuadraticModel<V>) -> Self {
        let mut g = Self::new(m.num_vars());
        for &(i, j) in m.quadratic().keys() {
            g.adjacency[i].insert(j);
            g.adjacency[j].insert(i);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.num_nodes();
        if u == v || u >= n || v >= n {
            return invalid(format!("edge ({u}, {v}) is not valid in a graph of {n} nodes"));
        }
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().copied()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|a| a.contains(&v))
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.num_nodes();
        self.adjacency.iter().all(|a| a.len() + 1 == n)
    }

    /// Whether `nodes` induce a connected subgraph. Empty sets are not
    /// connected.
    pub fn is_connected_subset(&self, nodes: &[usize]) -> bool {
        let Some(&start) = nodes.first() else {
            return false;
        };
        let members: BTreeSet<usize> = nodes.iter().copied().collect();
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if members.contains(&v) && seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == members.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_counts() {
        let k5 = Graph::complete(5);
        assert_eq!(k5.num_edges(), 10);
        assert!(k5.is_complete());
        assert_eq!(k5.edges().next(), Some((0, 1)));
    }

    #[test]
    fn connectivity() {
        let path = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(path.is_connected_subset(&[0, 1, 2]));
        assert!(!path.is_connected_subset(&[0, 2]));
        assert!(!path.is_connected_subset(&[]));
        assert!(Graph::new(2).add_edge(1, 1).is_err());
    }
}
