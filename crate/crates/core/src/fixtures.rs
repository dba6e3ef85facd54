//! Golden vectors from the six-node worked example (q = 29, λ = 3).

/// Topology file for the six-node example network.
pub const EXAMPLE_TOPOLOGY_JSON: &str = include_str!("../fixtures/example_topology.json");

pub const EXAMPLE_Q: u64 = 29;
pub const EXAMPLE_LAMBDA: usize = 3;
pub const EXAMPLE_N: usize = 6;
pub const EXAMPLE_EDGES: [(usize, usize); 5] = [(1, 2), (1, 3), (2, 4), (3, 5), (5, 6)];

pub const EXAMPLE_MODIFIED_ADJACENCY: [[u64; 6]; 6] = [
    [28, 1, 1, 28, 28, 28],
    [1, 28, 28, 1, 28, 28],
    [1, 28, 28, 28, 1, 28],
    [28, 1, 28, 28, 28, 28],
    [28, 28, 1, 28, 28, 1],
    [28, 28, 28, 28, 1, 28],
];

pub const EXAMPLE_PUBLIC: [[u64; 6]; 4] = [
    [28, 1, 1, 28, 28, 28],
    [1, 28, 28, 1, 28, 28],
    [1, 28, 28, 28, 1, 28],
    [28, 1, 28, 28, 28, 28],
];

pub const EXAMPLE_SECRET: [[u64; 4]; 4] = [[3, 5, 2, 7], [5, 6, 9, 1], [2, 9, 3, 5], [7, 1, 5, 4]];

pub const EXAMPLE_SHARE: [[u64; 4]; 6] = [
    [26, 9, 5, 24],
    [3, 20, 24, 5],
    [18, 18, 14, 26],
    [22, 20, 28, 14],
    [16, 26, 16, 22],
    [12, 8, 10, 12],
];

/// `A·G` before reduction.
pub const EXAMPLE_RAW_KEYS: [[u128; 6]; 6] = [
    [1414, 442, 1090, 1549, 1657, 1792],
    [268, 1240, 1375, 916, 808, 1456],
    [1264, 940, 1642, 1642, 1750, 2128],
    [1056, 1380, 1758, 1812, 1596, 2352],
    [1106, 1214, 1808, 1538, 1808, 2240],
    [690, 528, 852, 960, 906, 1176],
];
