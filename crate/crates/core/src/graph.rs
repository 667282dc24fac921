//! The weighted simplex of complete graphs.
//!
//! Vertices are labelled `(cluster, port)` with `cluster ∈ [0, M]` and
//! `port ∈ [0, M] \ {cluster}`. Ports within a cluster form a complete graph
//! with unit weights; vertex `(i, j)` is matched to `(j, i)` by an edge of
//! weight `w`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral;

/// Largest `M` for which full-space dense eigensolves are attempted.
pub const MAX_DENSE_M: usize = 40;

/// A member of the weighted simplex family: cluster size `M` and inter-cluster weight `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpec {
    m: usize,
    w: f64,
}

impl GraphSpec {
    pub fn new(m: usize, w: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::ClusterTooSmall(m));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight(w));
        }
        Ok(Self { m, w })
    }

    /// Cluster size `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Weight of the inter-cluster edges.
    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn m_f64(&self) -> f64 {
        self.m as f64
    }

    /// Number of vertices, `N = M(M + 1)`.
    pub fn n(&self) -> usize {
        self.m * (self.m + 1)
    }

    pub fn clusters(&self) -> usize {
        self.m + 1
    }

    /// Number of edges, `M²(M + 1)/2`.
    pub fn edge_count(&self) -> usize {
        self.m * self.m * (self.m + 1) / 2
    }

    /// Weighted degree shared by every vertex.
    pub fn degree(&self) -> f64 {
        (self.m - 1) as f64 + self.w
    }

    /// Every vertex in canonical index order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n()).map(move |idx| VertexId::from_index(self, idx))
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} w={}", self.m, self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub cluster: usize,
    pub port: usize,
}

impl VertexId {
    pub fn new(spec: &GraphSpec, cluster: usize, port: usize) -> Result<Self> {
        let m = spec.m();
        if cluster > m || port > m || cluster == port {
            return Err(Error::InvalidVertex { cluster, port, m });
        }
        Ok(Self { cluster, port })
    }

    /// Canonical dense index `cluster·M + (port if port < cluster else port − 1)`.
    pub fn index(&self, spec: &GraphSpec) -> usize {
        let offset = if self.port < self.cluster { self.port } else { self.port - 1 };
        self.cluster * spec.m() + offset
    }

    pub fn from_index(spec: &GraphSpec, idx: usize) -> Self {
        let cluster = idx / spec.m();
        let r = idx % spec.m();
        let port = if r < cluster { r } else { r + 1 };
        Self { cluster, port }
    }

    /// The vertex joined to this one by a weight-`w` edge.
    pub fn partner(&self) -> Self {
        Self { cluster: self.port, port: self.cluster }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.cluster, self.port)
    }
}

/// The seven kinds of identically evolving vertices relative to a marked vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexClass {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl VertexClass {
    /// Basis order used everywhere: `a, b, c, d, e, f, g`.
    pub const ALL: [VertexClass; 7] = [
        VertexClass::A,
        VertexClass::B,
        VertexClass::C,
        VertexClass::D,
        VertexClass::E,
        VertexClass::F,
        VertexClass::G,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> char {
        (b'a' + self as u8) as char
    }

    pub fn from_tag(tag: char) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag.to_ascii_lowercase())
    }

    /// Number of vertices of this class for cluster size `m`.
    pub fn size(self, m: usize) -> usize {
        match self {
            VertexClass::A | VertexClass::C => 1,
            VertexClass::B | VertexClass::D | VertexClass::E | VertexClass::F => m - 1,
            VertexClass::G => (m - 1) * (m - 2),
        }
    }
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// Dense real symmetric matrix. Symmetry is exact, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix {
    entries: DMatrix<f64>,
}

impl WeightedMatrix {
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::NotSquare(r, c));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds a matrix from its upper triangle (diagonal included), mirroring it.
    pub fn from_upper(dim: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = entry(i, j);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    pub fn max_abs_diff(&self, other: &DMatrix<f64>) -> f64 {
        (&self.entries - other).amax()
    }

    /// `self·scale + other·other_scale`; stays symmetric.
    pub fn scaled_sum(&self, scale: f64, other: &WeightedMatrix, other_scale: f64) -> Self {
        Self { entries: &self.entries * scale + &other.entries * other_scale }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.row_iter().map(|r| r.sum()).collect()
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.entries * v
    }
}

/// Adjacency matrix of the weighted simplex.
pub fn build_adjacency(spec: &GraphSpec) -> WeightedMatrix {
    let n = spec.n();
    let mut entries = DMatrix::zeros(n, n);
    for v in spec.vertices() {
        let i = v.index(spec);
        for port in 0..=spec.m() {
            if port == v.cluster || port == v.port {
                continue;
            }
            let j = VertexId { cluster: v.cluster, port }.index(spec);
            entries[(i, j)] = 1.0;
        }
        entries[(i, v.partner().index(spec))] = spec.w();
    }
    // Both (i, j) and (j, i) are written by the loop over all vertices.
    WeightedMatrix { entries }
}

/// Class assignment of every vertex relative to a marked vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexClassification {
    spec: GraphSpec,
    marked: VertexId,
    classes: Vec<VertexClass>,
}

impl VertexClassification {
    pub fn marked(&self) -> VertexId {
        self.marked
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn class_of(&self, v: VertexId) -> VertexClass {
        self.classes[v.index(&self.spec)]
    }

    pub fn class_at(&self, idx: usize) -> VertexClass {
        self.classes[idx]
    }

    /// Dense indices of all vertices in `class`, ascending.
    pub fn members(&self, class: VertexClass) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Class sizes in basis order.
    pub fn sizes(&self) -> [usize; 7] {
        let mut sizes = [0; 7];
        for c in &self.classes {
            sizes[c.index()] += 1;
        }
        sizes
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexClass)> + '_ {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, c)| (VertexId::from_index(&self.spec, i), *c))
    }
}

/// Marks `marked` as `a` and labels every other vertex by its relation to it.
///
/// `b` are the cluster-mates of `a`, `c` its weight-`w` partner, `d` the
/// cluster-mates of `c`, `e` and `f` the weight-`w` partners of `b` and `d`,
/// and `g` everything else.
pub fn classify_vertices(spec: &GraphSpec, marked: VertexId) -> Result<VertexClassification> {
    let marked = VertexId::new(spec, marked.cluster, marked.port)?;
    let (home, away) = (marked.cluster, marked.port);
    let classes = spec
        .vertices()
        .map(|v| {
            if v.cluster == home {
                if v.port == away {
                    VertexClass::A
                } else {
                    VertexClass::B
                }
            } else if v.cluster == away {
                if v.port == home {
                    VertexClass::C
                } else {
                    VertexClass::D
                }
            } else if v.port == home {
                VertexClass::E
            } else if v.port == away {
                VertexClass::F
            } else {
                VertexClass::G
            }
        })
        .collect();
    Ok(VertexClassification { spec: *spec, marked, classes })
}

/// Default marked vertex `(0, 1)`.
pub fn default_marked() -> VertexId {
    VertexId { cluster: 0, port: 1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeTier {
    /// Intra-cluster edge of weight 1.
    Unit,
    /// Inter-cluster edge of weight `w`.
    Weighted,
}

impl fmt::Display for EdgeTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeTier::Unit => write!(f, "1"),
            EdgeTier::Weighted => write!(f, "w"),
        }
    }
}

/// Edge counts keyed by unordered class pair and weight tier. Zero counts are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCensus {
    counts: BTreeMap<(VertexClass, VertexClass, EdgeTier), usize>,
}

impl EdgeCensus {
    fn key(x: VertexClass, y: VertexClass, tier: EdgeTier) -> (VertexClass, VertexClass, EdgeTier) {
        if x <= y {
            (x, y, tier)
        } else {
            (y, x, tier)
        }
    }

    pub fn add(&mut self, x: VertexClass, y: VertexClass, tier: EdgeTier, count: usize) {
        if count > 0 {
            *self.counts.entry(Self::key(x, y, tier)).or_insert(0) += count;
        }
    }

    pub fn get(&self, x: VertexClass, y: VertexClass, tier: EdgeTier) -> usize {
        self.counts.get(&Self::key(x, y, tier)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn tier_total(&self, tier: EdgeTier) -> usize {
        self.counts.iter().filter(|((_, _, t), _)| *t == tier).map(|(_, c)| c).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexClass, VertexClass, EdgeTier, usize)> + '_ {
        self.counts.iter().map(|(&(x, y, t), &c)| (x, y, t, c))
    }
}

/// Counts every edge of the graph by the classes of its endpoints.
pub fn edge_census(spec: &GraphSpec, classes: &VertexClassification) -> Result<EdgeCensus> {
    if classes.spec().m() != spec.m() {
        return Err(Error::DimensionMismatch { expected: spec.n(), found: classes.spec().n() });
    }
    let mut census = EdgeCensus::default();
    for v in spec.vertices() {
        let cv = classes.class_of(v);
        for port in (v.port + 1)..=spec.m() {
            if port == v.cluster {
                continue;
            }
            let u = VertexId { cluster: v.cluster, port };
            census.add(cv, classes.class_of(u), EdgeTier::Unit, 1);
        }
        if v.cluster < v.port {
            census.add(cv, classes.class_of(v.partner()), EdgeTier::Weighted, 1);
        }
    }
    Ok(census)
}

/// Weighted degree of each vertex (row sums of the adjacency matrix).
pub fn weighted_degrees(adj: &WeightedMatrix) -> Vec<f64> {
    adj.row_sums()
}

/// Graph Laplacian `L = D − A`.
pub fn laplacian(adj: &WeightedMatrix) -> Result<WeightedMatrix> {
    let n = adj.dim();
    for i in 0..n {
        if adj.get(i, i) != 0.0 {
            return Err(Error::NotAdjacency(format!("nonzero diagonal at {i}")));
        }
        for j in 0..n {
            if adj.get(i, j) < 0.0 {
                return Err(Error::NotAdjacency(format!("negative entry at ({i}, {j})")));
            }
        }
    }
    let degrees = weighted_degrees(adj);
    let mut entries = -adj.as_matrix().clone();
    for (i, d) in degrees.into_iter().enumerate() {
        entries[(i, i)] = d;
    }
    Ok(WeightedMatrix { entries })
}

fn check_dense(spec: &GraphSpec) -> Result<()> {
    if spec.m() > MAX_DENSE_M {
        return Err(Error::TooLarge { m: spec.m(), limit: MAX_DENSE_M });
    }
    Ok(())
}

/// Second-smallest Laplacian eigenvalue, from a dense eigensolve of the full graph.
pub fn algebraic_connectivity(spec: &GraphSpec) -> Result<f64> {
    check_dense(spec)?;
    let lap = laplacian(&build_adjacency(spec))?;
    let spectrum = spectral::eigh(&lap);
    Ok(spectrum.eigenvalues()[1])
}

/// Algebraic connectivity divided by the (common) vertex degree.
pub fn normalized_algebraic_connectivity(spec: &GraphSpec) -> Result<f64> {
    Ok(algebraic_connectivity(spec)? / spec.degree())
}

/// Largest adjacency eigenvalue (operator norm of `A`), from a dense eigensolve.
pub fn adjacency_norm(spec: &GraphSpec) -> Result<f64> {
    check_dense(spec)?;
    let spectrum = spectral::eigh(&build_adjacency(spec));
    let values = spectrum.eigenvalues();
    Ok(values[values.len() - 1].abs().max(values[0].abs()))
}
