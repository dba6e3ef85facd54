//! Blom's scheme with an adjacency-derived public matrix.
//!
//! The network graph's adjacency matrix has every zero (including the diagonal)
//! replaced by `q - 1`, and its first `λ + 1` rows become `G`. Node `j`'s column
//! depends only on which of nodes `1..=λ+1` are its neighbours, so a node holding
//! the topology never stores or computes a column.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, Residue};
use crate::matrix::FieldMatrix;
use crate::original::{
    check_node, finish_setup, PublicMatrix, SchemeInstance, SchemeKind, SchemeParams, SecretSource,
};

/// Undirected simple graph on nodes `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct NetworkTopology {
    n: usize,
    // normalized so that i < j
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TopologyFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<TopologyFile> for NetworkTopology {
    type Error = Error;

    fn try_from(f: TopologyFile) -> Result<Self> {
        NetworkTopology::new(f.n, f.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<NetworkTopology> for TopologyFile {
    fn from(t: NetworkTopology) -> Self {
        TopologyFile {
            n: t.n,
            edges: t.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl NetworkTopology {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            check_node(a, n)?;
            check_node(b, n)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology always serializes")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Sorted neighbour ids of `node`.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match node {
                x if x == a => Some(b),
                x if x == b => Some(a),
                _ => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n + 1];
        let mut queue = VecDeque::from([1]);
        seen[1] = true;
        while let Some(v) = queue.pop_front() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen[1..].iter().all(|&s| s)
    }

    /// Erdős–Rényi graph `G(n, p)`.
    pub fn random(n: usize, edge_probability: f64, rng: &mut impl Rng) -> Self {
        let mut edges = BTreeSet::new();
        for a in 1..=n {
            for b in a + 1..=n {
                if rng.gen_bool(edge_probability) {
                    edges.insert((a, b));
                }
            }
        }
        Self { n, edges }
    }

    /// Draws `G(n, p)` graphs until one is connected, giving up after `max_draws`.
    pub fn random_connected(
        n: usize,
        edge_probability: f64,
        seed: u64,
        max_draws: usize,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&edge_probability) {
            return Err(Error::Config(format!(
                "edge probability {edge_probability} outside [0, 1]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..max_draws)
            .map(|_| Self::random(n, edge_probability, &mut rng))
            .find(Self::is_connected)
            .ok_or(Error::NoConnectedTopology(max_draws))
    }
}

/// Adjacency matrix with zeros replaced by `q - 1`. Entries are only `1` or `q - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedAdjacency<T: Residue> {
    pub matrix: FieldMatrix<T>,
}

pub fn build_modified_adjacency<T: Residue>(
    topo: &NetworkTopology,
    field: &PrimeField<T>,
) -> ModifiedAdjacency<T> {
    let n = topo.node_count();
    let matrix = FieldMatrix::from_fn(n, n, |r, c| {
        if topo.has_edge(r + 1, c + 1) {
            T::one()
        } else {
            field.minus_one()
        }
    });
    ModifiedAdjacency { matrix }
}

/// First `λ + 1` rows of the modified adjacency matrix.
pub fn select_public_matrix<T: Residue>(
    adj: &ModifiedAdjacency<T>,
    lambda: usize,
) -> Result<PublicMatrix<T>> {
    let n = adj.matrix.rows();
    if lambda + 1 > n {
        return Err(Error::InvalidParams(format!(
            "lambda + 1 = {} exceeds node count {n}",
            lambda + 1
        )));
    }
    Ok(PublicMatrix {
        matrix: adj.matrix.top_rows(lambda + 1),
        generator: None,
    })
}

/// Column `j` of the public matrix computed from `j`'s neighbours alone.
pub fn node_public_column<T: Residue>(
    topo: &NetworkTopology,
    j: usize,
    lambda: usize,
    field: &PrimeField<T>,
) -> Result<Vec<T>> {
    check_node(j, topo.node_count())?;
    if lambda + 1 > topo.node_count() {
        return Err(Error::InvalidParams(format!(
            "lambda + 1 = {} exceeds node count {}",
            lambda + 1,
            topo.node_count()
        )));
    }
    Ok(adjacency_column(&topo.neighbors(j), lambda, field))
}

/// Entry `r` is `1` when node `r + 1` is in `neighbors`, else `q - 1`.
pub fn adjacency_column<T: Residue>(
    neighbors: &[usize],
    lambda: usize,
    field: &PrimeField<T>,
) -> Vec<T> {
    (1..=lambda + 1)
        .map(|r| {
            if neighbors.contains(&r) {
                T::one()
            } else {
                field.minus_one()
            }
        })
        .collect()
}

/// Central-authority setup for the adjacency variant. Each node's public knowledge is
/// its neighbour list.
pub fn setup_modified_scheme<T: Residue>(
    topo: &NetworkTopology,
    lambda: usize,
    field: &PrimeField<T>,
    secret: SecretSource<T>,
) -> Result<SchemeInstance<T>> {
    let params = SchemeParams::new(*field, topo.node_count(), lambda)?;
    let adj = build_modified_adjacency(topo, field);
    let public = select_public_matrix(&adj, lambda)?;
    finish_setup(SchemeKind::Adjacency, params, public, secret, Some(topo.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::original::SecretMatrix;

    fn f29() -> PrimeField<u64> {
        PrimeField::new(29).unwrap()
    }

    fn example_topology() -> NetworkTopology {
        NetworkTopology::new(6, EXAMPLE_EDGES).unwrap()
    }

    #[test]
    fn example_adjacency() {
        let adj = build_modified_adjacency(&example_topology(), &f29());
        assert_eq!(adj.matrix.to_rows(), EXAMPLE_MODIFIED_ADJACENCY.map(|r| r.to_vec()).to_vec());
        assert_eq!(adj.matrix.row(0), &[28, 1, 1, 28, 28, 28]);
    }

    #[test]
    fn trivial_adjacencies() {
        let f = f29();
        let empty = NetworkTopology::new(2, []).unwrap();
        assert_eq!(
            build_modified_adjacency(&empty, &f).matrix.to_rows(),
            vec![vec![28, 28], vec![28, 28]]
        );
        let k3 = NetworkTopology::new(3, [(1, 2), (1, 3), (2, 3)]).unwrap();
        let m = build_modified_adjacency(&k3, &f).matrix;
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(m.get(r, c), if r == c { 28 } else { 1 });
            }
        }
    }

    #[test]
    fn topology_validation() {
        assert_eq!(NetworkTopology::new(3, [(2, 2)]), Err(Error::SelfLoop(2)));
        assert_eq!(
            NetworkTopology::new(3, [(1, 4)]),
            Err(Error::NodeOutOfRange { node: 4, n: 3 })
        );
        assert!(NetworkTopology::new(3, [(0, 1)]).is_err());
        let t = NetworkTopology::new(3, [(2, 1), (1, 2)]).unwrap();
        assert_eq!(t.edges().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn public_matrix_selection() {
        let adj = build_modified_adjacency(&example_topology(), &f29());
        let g = select_public_matrix(&adj, 3).unwrap();
        assert_eq!(g.matrix.to_rows(), EXAMPLE_PUBLIC.map(|r| r.to_vec()).to_vec());
        assert_eq!(select_public_matrix(&adj, 5).unwrap().matrix, adj.matrix);
        assert!(select_public_matrix(&adj, 6).is_err());
    }

    #[test]
    fn local_columns() {
        let f = f29();
        let t = example_topology();
        assert_eq!(node_public_column(&t, 5, 3, &f).unwrap(), vec![28, 28, 1, 28]);
        assert_eq!(node_public_column(&t, 2, 3, &f).unwrap(), vec![1, 28, 28, 1]);
        let sparse = NetworkTopology::new(5, [(1, 2)]).unwrap();
        assert_eq!(node_public_column(&sparse, 4, 2, &f).unwrap(), vec![28, 28, 28]);
        assert!(node_public_column(&t, 7, 3, &f).is_err());
    }

    #[test]
    fn example_setup() {
        let f = f29();
        let d = SecretMatrix::new(FieldMatrix::from_rows(&EXAMPLE_SECRET, &f).unwrap()).unwrap();
        let inst = setup_modified_scheme(&example_topology(), 3, &f, SecretSource::Injected(d)).unwrap();
        assert_eq!(inst.share.matrix().to_rows(), EXAMPLE_SHARE.map(|r| r.to_vec()).to_vec());
        assert_eq!(inst.key(2, 5).unwrap(), 25);
        assert_eq!(inst.key(5, 2).unwrap(), 25);
        assert!(inst.nodes.iter().all(|m| m.private_row.len() == 4));
    }

    #[test]
    fn connectivity() {
        assert!(example_topology().is_connected());
        assert!(!NetworkTopology::new(3, [(1, 2)]).unwrap().is_connected());
        let t = NetworkTopology::random_connected(8, 0.5, 11, 100).unwrap();
        assert!(t.is_connected());
        assert_eq!(t, NetworkTopology::random_connected(8, 0.5, 11, 100).unwrap());
        assert_eq!(
            NetworkTopology::random_connected(4, 0.0, 1, 5),
            Err(Error::NoConnectedTopology(5))
        );
    }

    #[test]
    fn topology_json() {
        let t = NetworkTopology::from_json(EXAMPLE_TOPOLOGY_JSON).unwrap();
        assert_eq!(t, example_topology());
        assert_eq!(NetworkTopology::from_json(&t.to_json()).unwrap(), t);
        assert!(NetworkTopology::from_json(r#"{"n":2,"edges":[[1,1]]}"#).is_err());
    }
}
