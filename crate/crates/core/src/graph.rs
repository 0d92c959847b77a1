//! Symmetric weighted interaction graphs and their connectivity constants.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Label recorded in reports for how `|E^c|` is counted.
pub const EC_CONVENTION: &str = "V×V complement: diagonal pairs (i,i) counted in |E^c|";

/// Rejection-sampling budget for connected Erdős–Rényi graphs.
pub const ER_MAX_ATTEMPTS: usize = 1000;

/// Row-major `n×n` symmetric nonnegative coupling matrix with zero diagonal.
///
/// Neighbor lists (ascending column order, positive weights only) are built on
/// construction so the coupling sums can skip absent edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Validates and builds a graph from matrix rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut weights = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row: row + 1, len: r.len(), n });
            }
            weights.extend_from_slice(r);
        }
        Self::from_flat(n, weights)
    }

    /// Validates and builds a graph from a row-major buffer of length `n*n`.
    pub fn from_flat(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "weight matrix",
                expected: n * n,
                found: weights.len(),
            });
        }
        validate(n, &weights)?;
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|l| {
                        let w = weights[i * n + l];
                        (w > 0.0).then_some((l, w))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, weights, neighbors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Positive-weight neighbors of `i` in ascending index order.
    #[inline]
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weights.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Ordered pairs `(i, j)` with `a_ij > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().map(move |&(j, _)| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &(u, _) in &self.neighbors[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Largest hop distance over all vertex pairs.
    pub fn hop_diameter(&self) -> Result<usize> {
        let mut r = 0;
        for s in 0..self.n {
            for d in self.bfs_distances(s) {
                r = r.max(d.ok_or(Error::Disconnected)?);
            }
        }
        Ok(r)
    }

    pub fn constants(&self) -> Result<GraphConstants> {
        let card_e = self.edge_count();
        if card_e == 0 {
            return Err(Error::NoEdges);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let r = self.hop_diameter()?;
        let card_ec = self.n * self.n - card_e;
        let (mut a_l, mut a_u) = (f64::INFINITY, 0.0f64);
        for nb in &self.neighbors {
            for &(_, w) in nb {
                a_l = a_l.min(w);
                a_u = a_u.max(w);
            }
        }
        let lambda1 = 1.0 / (1.0 + (r * card_ec) as f64);
        Ok(GraphConstants { n: self.n, r, card_e, card_ec, lambda1, a_u, a_l })
    }

    /// `Σ_{(i,j)∈E} (x_i − x_j)²`, ordered pairs.
    pub fn edge_quadratic(&self, x: &[f64]) -> f64 {
        self.edges().map(|(i, j)| (x[i] - x[j]).powi(2)).sum()
    }
}

// Serialized as matrix rows; deserialization validates.
impl Serialize for WeightedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        WeightedGraph::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Checks symmetry, sign, finiteness and the zero diagonal of a row-major matrix.
pub fn validate(n: usize, weights: &[f64]) -> Result<()> {
    for i in 0..n {
        for j in 0..n {
            let w = weights[i * n + j];
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { i: i + 1, j: j + 1 });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { i: i + 1, j: j + 1 });
            }
        }
    }
    for i in 0..n {
        if weights[i * n + i] != 0.0 {
            return Err(Error::NonzeroDiagonal { i: i + 1 });
        }
        for j in i + 1..n {
            if weights[i * n + j] != weights[j * n + i] {
                return Err(Error::AsymmetricWeights { i: i + 1, j: j + 1 });
            }
        }
    }
    Ok(())
}

/// Constants of a connected graph derived from its edge set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConstants {
    pub n: usize,
    /// Maximum hop distance between any two vertices.
    pub r: usize,
    /// Number of ordered pairs with positive weight.
    pub card_e: usize,
    /// `n² − |E|`, diagonal pairs included.
    pub card_ec: usize,
    /// `1 / (1 + r·|E^c|)`.
    pub lambda1: f64,
    pub a_u: f64,
    pub a_l: f64,
}

impl GraphConstants {
    /// `1 + r·|E^c|`, the factor that recurs throughout the assumption bounds.
    pub fn spread_factor(&self) -> f64 {
        1.0 + (self.r * self.card_ec) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    Ring,
    Path,
    ErdosRenyi,
    Explicit,
}

/// Graph description as it appears in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl GraphSpec {
    pub fn of_kind(kind: GraphKind, n: usize) -> Self {
        Self { kind, n: Some(n), p: None, seed: None, weight: None, matrix: None }
    }

    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        Self { p: Some(p), seed: Some(seed), ..Self::of_kind(GraphKind::ErdosRenyi, n) }
    }

    pub fn explicit(matrix: Vec<Vec<f64>>) -> Self {
        Self {
            kind: GraphKind::Explicit,
            n: None,
            p: None,
            seed: None,
            weight: None,
            matrix: Some(matrix),
        }
    }

    pub fn with_weight(mut self, w: f64) -> Self {
        self.weight = Some(w);
        self
    }
}

/// Builds the graph described by `spec`. Deterministic for a fixed spec.
///
/// `erdos_renyi` draws each unordered pair `i < j` (row-major order) with one
/// uniform double, keeping the edge when it is below `p`, and redraws the whole
/// graph from the same stream until it is connected.
pub fn generate(spec: &GraphSpec) -> Result<WeightedGraph> {
    if spec.kind == GraphKind::Explicit {
        let matrix = spec
            .matrix
            .as_ref()
            .ok_or_else(|| Error::BadOption("explicit graph needs `matrix`".into()))?;
        if let Some(n) = spec.n {
            if n != matrix.len() {
                return Err(Error::BadOption(format!(
                    "n = {n} but matrix has {} rows",
                    matrix.len()
                )));
            }
        }
        return WeightedGraph::from_rows(matrix);
    }
    if spec.matrix.is_some() {
        return Err(Error::BadOption("`matrix` is only valid for kind `explicit`".into()));
    }
    let n = spec.n.ok_or_else(|| Error::BadOption("`n` is required".into()))?;
    if n == 0 {
        return Err(Error::BadOption("`n` must be at least 1".into()));
    }
    let w = spec.weight.unwrap_or(1.0);
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::BadOption(format!("weight must be positive, got {w}")));
    }
    let mut m = vec![0.0; n * n];
    let link = |m: &mut [f64], i: usize, j: usize| {
        m[i * n + j] = w;
        m[j * n + i] = w;
    };
    match spec.kind {
        GraphKind::Complete => {
            for i in 0..n {
                for j in i + 1..n {
                    link(&mut m, i, j);
                }
            }
        }
        GraphKind::Path => {
            for i in 1..n {
                link(&mut m, i - 1, i);
            }
        }
        GraphKind::Ring => {
            for i in 1..n {
                link(&mut m, i - 1, i);
            }
            if n > 2 {
                link(&mut m, n - 1, 0);
            }
        }
        GraphKind::ErdosRenyi => {
            let p = spec
                .p
                .ok_or_else(|| Error::BadOption("erdos_renyi needs `p`".into()))?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::BadOption(format!("p must lie in (0, 1], got {p}")));
            }
            let seed = spec
                .seed
                .ok_or_else(|| Error::BadOption("erdos_renyi needs `seed`".into()))?;
            return erdos_renyi(n, p, w, &mut SplitMix64::new(seed));
        }
        GraphKind::Explicit => unreachable!(),
    }
    WeightedGraph::from_flat(n, m)
}

fn erdos_renyi(n: usize, p: f64, w: f64, rng: &mut SplitMix64) -> Result<WeightedGraph> {
    for _ in 0..ER_MAX_ATTEMPTS {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.next_f64() < p {
                    m[i * n + j] = w;
                    m[j * n + i] = w;
                }
            }
        }
        let g = WeightedGraph::from_flat(n, m)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityUnreachable { attempts: ER_MAX_ATTEMPTS })
}
