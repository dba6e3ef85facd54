//! Blom's scheme with a Vandermonde public matrix.
//!
//! The central authority picks a public `(λ+1)×N` matrix `G` and a secret symmetric
//! `(λ+1)×(λ+1)` matrix `D`, publishes nothing about `D`, and hands node `k` the
//! `k`-th row of `A = (D·G)ᵀ`. Because `D` is symmetric, `A·G` is symmetric and
//! nodes `i` and `j` both arrive at `K_ij = A_i · G_j = A_j · G_i`.
//!
//! Node ids are 1-based throughout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, Residue};
use crate::matrix::{dot_raw, FieldMatrix};
use crate::modified::{adjacency_column, NetworkTopology};

/// Field, network size and collusion threshold of one scheme instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SchemeParams<T: Residue> {
    pub field: PrimeField<T>,
    pub n: usize,
    pub lambda: usize,
}

impl<T: Residue> SchemeParams<T> {
    pub fn new(field: PrimeField<T>, n: usize, lambda: usize) -> Result<Self> {
        if lambda < 1 {
            return Err(Error::InvalidParams("lambda must be at least 1".into()));
        }
        if lambda + 1 > n {
            return Err(Error::InvalidParams(format!(
                "lambda + 1 = {} exceeds node count {n}",
                lambda + 1
            )));
        }
        if n as u128 >= field.modulus().wide() {
            return Err(Error::InvalidParams(format!(
                "node count {n} must be below q = {}",
                field.modulus()
            )));
        }
        Ok(Self { field, n, lambda })
    }

    /// `λ + 1`, the length of every private row and public column.
    #[inline]
    pub fn width(&self) -> usize {
        self.lambda + 1
    }
}

/// The public `(λ+1)×N` matrix `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PublicMatrix<T: Residue> {
    pub matrix: FieldMatrix<T>,
    /// Primitive element `s` for the Vandermonde form; `None` otherwise.
    pub generator: Option<T>,
}

impl<T: Residue> PublicMatrix<T> {
    /// Column of node `node_id` (1-based).
    pub fn column(&self, node_id: usize) -> Result<Vec<T>> {
        check_node(node_id, self.matrix.cols())?;
        Ok(self.matrix.column(node_id - 1))
    }

    pub fn node_count(&self) -> usize {
        self.matrix.cols()
    }
}

/// The secret symmetric matrix `D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "FieldMatrix<T>", into = "FieldMatrix<T>")]
pub struct SecretMatrix<T: Residue>(FieldMatrix<T>);

impl<T: Residue> SecretMatrix<T> {
    pub fn new(matrix: FieldMatrix<T>) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(Error::AsymmetricSecret);
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &FieldMatrix<T> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

impl<T: Residue> TryFrom<FieldMatrix<T>> for SecretMatrix<T> {
    type Error = Error;

    fn try_from(m: FieldMatrix<T>) -> Result<Self> {
        Self::new(m)
    }
}

impl<T: Residue> From<SecretMatrix<T>> for FieldMatrix<T> {
    fn from(d: SecretMatrix<T>) -> Self {
        d.0
    }
}

/// The share matrix `A = (D·G)ᵀ`, one private row per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareMatrix<T: Residue>(FieldMatrix<T>);

impl<T: Residue> ShareMatrix<T> {
    pub fn matrix(&self) -> &FieldMatrix<T> {
        &self.0
    }

    /// Private row of node `node_id` (1-based).
    pub fn row(&self, node_id: usize) -> Result<&[T]> {
        check_node(node_id, self.0.rows())?;
        Ok(self.0.row(node_id - 1))
    }
}

/// Where the secret matrix comes from during provisioning.
#[derive(Debug, Clone)]
pub enum SecretSource<T: Residue> {
    Seeded(u64),
    Injected(SecretMatrix<T>),
}

impl<T: Residue> SecretSource<T> {
    pub(crate) fn resolve(self, params: &SchemeParams<T>) -> Result<SecretMatrix<T>> {
        match self {
            SecretSource::Seeded(seed) => Ok(gen_secret_matrix(params, seed)),
            SecretSource::Injected(d) if d.dim() == params.width() => Ok(d),
            SecretSource::Injected(d) => Err(Error::DimensionMismatch {
                op: "secret matrix",
                left: d.matrix().shape(),
                right: (params.width(), params.width()),
            }),
        }
    }
}

/// What a node knows about its own public column, and what it sends to peers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "", tag = "scheme")]
pub enum PublicKnowledge<T: Residue> {
    /// Column regenerated from the seed `s^k`.
    #[serde(rename = "blom-vandermonde")]
    Vandermonde { public_seed: T },
    /// Column derived from the node's neighbour list.
    #[serde(rename = "blom-adjacency")]
    Adjacency { neighbors: Vec<usize> },
    /// Column stored verbatim (random public matrix baseline).
    #[serde(rename = "blom-explicit")]
    Explicit { public_column: Vec<T> },
}

/// Everything provisioned onto one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NodeKeyMaterial<T: Residue> {
    #[serde(flatten)]
    pub public: PublicKnowledge<T>,
    #[serde(rename = "q")]
    pub field: PrimeField<T>,
    pub lambda: usize,
    pub node_id: usize,
    pub private_row: Vec<T>,
}

impl<T: Residue> NodeKeyMaterial<T> {
    /// Rebuilds this node's public column from what it stores.
    pub fn public_column(&self) -> Result<Vec<T>> {
        public_column_from(&self.public, self.lambda, &self.field)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key material always serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Column of the node that published `public`.
pub fn public_column_from<T: Residue>(
    public: &PublicKnowledge<T>,
    lambda: usize,
    field: &PrimeField<T>,
) -> Result<Vec<T>> {
    match public {
        PublicKnowledge::Vandermonde { public_seed } => {
            derive_column_from_seed(*public_seed, lambda, field)
        }
        PublicKnowledge::Adjacency { neighbors } => Ok(adjacency_column(neighbors, lambda, field)),
        PublicKnowledge::Explicit { public_column } => {
            if public_column.len() != lambda + 1 {
                return Err(Error::LengthMismatch(public_column.len(), lambda + 1));
            }
            Ok(public_column.clone())
        }
    }
}

/// Which public-matrix construction an instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Vandermonde,
    Adjacency,
    RandomMatrix,
}

/// Output of a full central-authority provisioning run.
#[derive(Debug, Clone)]
pub struct SchemeInstance<T: Residue> {
    pub kind: SchemeKind,
    pub params: SchemeParams<T>,
    pub public: PublicMatrix<T>,
    pub secret: SecretMatrix<T>,
    pub share: ShareMatrix<T>,
    pub topology: Option<NetworkTopology>,
    pub nodes: Vec<NodeKeyMaterial<T>>,
    /// Number of key spaces requested. Only the first is provisioned.
    pub key_spaces: usize,
}

impl<T: Residue> SchemeInstance<T> {
    pub fn node(&self, node_id: usize) -> Result<&NodeKeyMaterial<T>> {
        self.nodes
            .iter()
            .find(|m| m.node_id == node_id)
            .ok_or(Error::Unprovisioned(node_id))
    }

    pub fn field(&self) -> &PrimeField<T> {
        &self.params.field
    }

    /// `K_ij` as derived by node `i`.
    pub fn key(&self, i: usize, j: usize) -> Result<T> {
        let row = &self.node(i)?.private_row;
        let col = self.node(j)?.public_column()?;
        Ok(pairwise_key(row, &col, self.field())?.key)
    }

    pub fn key_matrix(&self) -> Result<KeyMatrix<T>> {
        full_key_matrix(&self.share, &self.public, self.field())
    }

    /// Requests `count` key spaces. Zero is rejected; anything above one is recorded
    /// but only `D₁` is provisioned.
    pub fn with_key_spaces(mut self, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParams("at least one key space".into()));
        }
        self.key_spaces = count;
        Ok(self)
    }
}

/// Vandermonde public matrix: column `c` is `[1, s^c, s^2c, …, s^λc]`.
pub fn gen_vandermonde<T: Residue>(params: &SchemeParams<T>, s: T) -> Result<PublicMatrix<T>> {
    vandermonde_matrix(&params.field, params.lambda, params.n, s)
}

/// Same construction without the `λ + 1 ≤ N` threshold check.
pub fn vandermonde_matrix<T: Residue>(
    field: &PrimeField<T>,
    lambda: usize,
    n: usize,
    s: T,
) -> Result<PublicMatrix<T>> {
    if s <= T::one() || !field.is_reduced(s) {
        return Err(Error::InvalidGenerator(s.wide()));
    }
    if n as u128 >= field.modulus().wide() {
        return Err(Error::InvalidParams("N must be below q".into()));
    }
    let matrix = FieldMatrix::from_fn(lambda + 1, n, |r, c| field.pow(s, ((c + 1) * r) as u64));
    Ok(PublicMatrix {
        matrix,
        generator: Some(s),
    })
}

/// Uniform random public matrix over GF(q).
pub fn gen_random_public<T: Residue>(params: &SchemeParams<T>, rng_seed: u64) -> PublicMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let q = params.field.modulus().wide() as u64;
    let matrix = FieldMatrix::from_fn(params.width(), params.n, |_, _| {
        T::narrow(rng.gen_range(0..q) as u128)
    });
    PublicMatrix {
        matrix,
        generator: None,
    }
}

/// Random symmetric secret: upper triangle filled row-major from a seeded stream, then mirrored.
pub fn gen_secret_matrix<T: Residue>(params: &SchemeParams<T>, rng_seed: u64) -> SecretMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let q = params.field.modulus().wide() as u64;
    let w = params.width();
    let mut entries = vec![T::zero(); w * w];
    for r in 0..w {
        for c in r..w {
            let v = T::narrow(rng.gen_range(0..q) as u128);
            entries[r * w + c] = v;
            entries[c * w + r] = v;
        }
    }
    let m = FieldMatrix::new(w, w, entries, &params.field).expect("sampled entries are reduced");
    SecretMatrix(m)
}

/// `A = (D·G)ᵀ mod q`.
pub fn compute_share_matrix<T: Residue>(
    d: &SecretMatrix<T>,
    g: &PublicMatrix<T>,
    field: &PrimeField<T>,
) -> Result<ShareMatrix<T>> {
    Ok(ShareMatrix(d.0.mul(&g.matrix, field)?.transpose()))
}

/// Key material for node `node_id`: its row of `A` and whatever lets it rebuild its column.
pub fn provision_node<T: Residue>(
    a: &ShareMatrix<T>,
    g: &PublicMatrix<T>,
    field: &PrimeField<T>,
    node_id: usize,
) -> Result<NodeKeyMaterial<T>> {
    let private_row = a.row(node_id)?.to_vec();
    let lambda = g.matrix.rows() - 1;
    let public = match g.generator {
        Some(s) => PublicKnowledge::Vandermonde {
            public_seed: field.pow(s, node_id as u64),
        },
        None => PublicKnowledge::Explicit {
            public_column: g.column(node_id)?,
        },
    };
    Ok(NodeKeyMaterial {
        public,
        field: *field,
        lambda,
        node_id,
        private_row,
    })
}

/// `[1, seed, seed², …, seed^λ] mod q`.
pub fn derive_column_from_seed<T: Residue>(
    seed: T,
    lambda: usize,
    field: &PrimeField<T>,
) -> Result<Vec<T>> {
    if field.reduce(seed.wide()) == T::zero() {
        return Err(Error::ZeroSeed);
    }
    let mut col = Vec::with_capacity(lambda + 1);
    let mut acc = T::one();
    col.push(acc);
    for _ in 0..lambda {
        acc = field.mul(acc, seed);
        col.push(acc);
    }
    Ok(col)
}

/// A derived pairwise key together with the unreduced dot product it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyDerivation<T> {
    pub key: T,
    pub raw: u128,
}

/// Dot product of a private row with a public column, reduced once at the end.
pub fn pairwise_key<T: Residue>(
    private_row: &[T],
    public_column: &[T],
    field: &PrimeField<T>,
) -> Result<KeyDerivation<T>> {
    let raw = dot_raw(private_row, public_column)?;
    Ok(KeyDerivation {
        key: field.reduce(raw),
        raw,
    })
}

/// `K = A·G` in both reduced and raw form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMatrix<T: Residue> {
    pub reduced: FieldMatrix<T>,
    pub raw: Vec<Vec<u128>>,
}

pub fn full_key_matrix<T: Residue>(
    a: &ShareMatrix<T>,
    g: &PublicMatrix<T>,
    field: &PrimeField<T>,
) -> Result<KeyMatrix<T>> {
    let raw = a.0.mul_raw(&g.matrix)?;
    let (rows, cols) = (a.0.rows(), g.matrix.cols());
    let reduced = FieldMatrix::from_fn(rows, cols, |r, c| field.reduce(raw[r][c]));
    Ok(KeyMatrix { reduced, raw })
}

/// Provisions an original-scheme instance using the smallest primitive element.
pub fn setup_original_scheme<T: Residue>(
    params: SchemeParams<T>,
    secret: SecretSource<T>,
) -> Result<SchemeInstance<T>> {
    let s = params.field.primitive_element();
    let public = gen_vandermonde(&params, s)?;
    finish_setup(SchemeKind::Vandermonde, params, public, secret, None)
}

/// Provisions the random-public-matrix baseline.
pub fn setup_random_baseline<T: Residue>(
    params: SchemeParams<T>,
    public_seed: u64,
    secret: SecretSource<T>,
) -> Result<SchemeInstance<T>> {
    let public = gen_random_public(&params, public_seed);
    finish_setup(SchemeKind::RandomMatrix, params, public, secret, None)
}

pub(crate) fn finish_setup<T: Residue>(
    kind: SchemeKind,
    params: SchemeParams<T>,
    public: PublicMatrix<T>,
    secret: SecretSource<T>,
    topology: Option<NetworkTopology>,
) -> Result<SchemeInstance<T>> {
    let secret = secret.resolve(&params)?;
    let share = compute_share_matrix(&secret, &public, &params.field)?;
    let nodes = (1..=params.n)
        .map(|k| match &topology {
            Some(topo) => Ok(NodeKeyMaterial {
                public: PublicKnowledge::Adjacency {
                    neighbors: topo.neighbors(k),
                },
                field: params.field,
                lambda: params.lambda,
                node_id: k,
                private_row: share.row(k)?.to_vec(),
            }),
            None => provision_node(&share, &public, &params.field, k),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchemeInstance {
        kind,
        params,
        public,
        secret,
        share,
        topology,
        nodes,
        key_spaces: 1,
    })
}

pub(crate) fn check_node(node_id: usize, n: usize) -> Result<()> {
    if node_id == 0 || node_id > n {
        return Err(Error::NodeOutOfRange { node: node_id, n });
    }
    Ok(())
}
