//! The seven-dimensional invariant subspace of the search Hamiltonian.
//!
//! Basis order is `(a, b, c, d, e, f, g)`; basis vector `X` is the uniform
//! superposition over the vertices of class `X`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{self, GraphSpec, VertexClass, VertexId, WeightedMatrix};

pub type Complex64 = Complex<f64>;

/// Complex amplitudes over either the full vertex basis or the reduced basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<Complex64> = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        Self { amplitudes: DVector::from_vec(v) }
    }

    /// Unit vector `e_k` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> Complex64 {
        self.amplitudes[k]
    }

    /// `|ψ_k|²`.
    pub fn probability(&self, k: usize) -> f64 {
        self.amplitudes[k].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { amplitudes: self.amplitudes.unscale(n) }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Largest componentwise `|self_i − other_i|`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    /// `H·ψ` for a real symmetric `H`.
    pub fn apply(&self, h: &WeightedMatrix) -> Result<StateVector> {
        self.check_dim(h.dim())?;
        let m = h.as_matrix();
        let re = m * self.amplitudes.map(|a| a.re);
        let im = m * self.amplitudes.map(|a| a.im);
        Ok(Self { amplitudes: re.zip_map(&im, Complex64::new) })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }
}

/// Search Hamiltonian `H = −γA − |a⟩⟨a|` on the full vertex space.
pub fn search_hamiltonian(spec: &GraphSpec, marked: VertexId, gamma: f64) -> Result<WeightedMatrix> {
    check_gamma(gamma)?;
    let marked = VertexId::new(spec, marked.cluster, marked.port)?;
    let adj = graph::build_adjacency(spec);
    let mut h = adj.into_inner() * -gamma;
    let a = marked.index(spec);
    h[(a, a)] -= 1.0;
    WeightedMatrix::from_matrix(h)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::NonPositiveGamma(gamma));
    }
    Ok(())
}

/// Search Hamiltonian restricted to the invariant subspace, built from its closed form.
pub fn reduced_hamiltonian(spec: &GraphSpec, gamma: f64) -> Result<WeightedMatrix> {
    check_gamma(gamma)?;
    let m = spec.m_f64();
    let w = spec.w();
    let s1 = (m - 1.0).sqrt();
    let s2 = (m - 2.0).sqrt();
    // Upper triangle of K, where H = −γK and K_aa = 1/γ.
    let k = |i: usize, j: usize| -> f64 {
        match (i, j) {
            (0, 1) | (2, 3) => s1,
            (0, 2) | (1, 4) | (3, 5) => w,
            (4, 5) => 1.0,
            (4, 6) | (5, 6) => s2,
            (1, 1) | (3, 3) => m - 2.0,
            (6, 6) => m - 3.0 + w,
            _ => 0.0,
        }
    };
    Ok(WeightedMatrix::from_upper(7, |i, j| if (i, j) == (0, 0) { -1.0 } else { -gamma * k(i, j) }))
}

/// Equal superposition over all vertices, expressed in the reduced basis.
pub fn reduced_initial_state(spec: &GraphSpec) -> StateVector {
    let m = spec.m_f64();
    let n = spec.n() as f64;
    let s1 = (m - 1.0).sqrt();
    let g = ((m - 1.0) * (m - 2.0)).sqrt();
    StateVector::from_real([1.0, s1, 1.0, s1, s1, s1, g].map(|x| x / n.sqrt()))
}

/// Equal superposition over all vertices in the full basis.
pub fn full_initial_state(spec: &GraphSpec) -> StateVector {
    let amp = 1.0 / (spec.n() as f64).sqrt();
    StateVector::from_real(std::iter::repeat(amp).take(spec.n()))
}

/// Reduced-space unit vector for a class.
pub fn reduced_basis_state(class: VertexClass) -> StateVector {
    StateVector::basis(7, class.index())
}

/// Orthonormal class-uniform basis vectors, stacked as the rows of a 7×N matrix `P`.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    spec: GraphSpec,
    marked: VertexId,
    rows: DMatrix<f64>,
}

impl ReducedBasis {
    pub fn new(spec: &GraphSpec, marked: VertexId) -> Result<Self> {
        let classes = graph::classify_vertices(spec, marked)?;
        let sizes = classes.sizes();
        let mut rows = DMatrix::zeros(7, spec.n());
        for (idx, (_, class)) in classes.iter().enumerate() {
            let k = class.index();
            rows[(k, idx)] = 1.0 / (sizes[k] as f64).sqrt();
        }
        Ok(Self { spec: *spec, marked: classes.marked(), rows })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn marked(&self) -> VertexId {
        self.marked
    }

    /// The stacked basis `P` (7×N).
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn vector(&self, class: VertexClass) -> DVector<f64> {
        self.rows.row(class.index()).transpose()
    }

    /// `P·H·Pᵀ`.
    pub fn restrict(&self, h: &WeightedMatrix) -> Result<DMatrix<f64>> {
        if h.dim() != self.spec.n() {
            return Err(Error::DimensionMismatch { expected: self.spec.n(), found: h.dim() });
        }
        Ok(&self.rows * h.as_matrix() * self.rows.transpose())
    }

    pub fn project(&self, full: &StateVector) -> Result<StateVector> {
        full.check_dim(self.spec.n())?;
        let amplitudes = self.rows.map(|x| Complex64::new(x, 0.0)) * full.amplitudes();
        Ok(StateVector::new(amplitudes))
    }

    pub fn lift(&self, reduced: &StateVector) -> Result<StateVector> {
        reduced.check_dim(7)?;
        let amplitudes = self.rows.transpose().map(|x| Complex64::new(x, 0.0)) * reduced.amplitudes();
        Ok(StateVector::new(amplitudes))
    }

    /// Norm of the component of `full` orthogonal to the subspace, `‖(I − PᵀP)ψ‖`.
    pub fn leakage(&self, full: &StateVector) -> Result<f64> {
        let back = self.lift(&self.project(full)?)?;
        let diff = full.amplitudes() - back.amplitudes();
        Ok(diff.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
    }
}

pub fn project(full: &StateVector, basis: &ReducedBasis) -> Result<StateVector> {
    basis.project(full)
}

pub fn lift(reduced: &StateVector, basis: &ReducedBasis) -> Result<StateVector> {
    basis.lift(reduced)
}
