//! Symmetric eigendecomposition, eigenstate overlaps, γ sweeps and crossing detection.

use nalgebra::{DMatrix, DVector, DVectorView, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GraphSpec, VertexClass, WeightedMatrix};
use crate::subspace::{self, StateVector};

/// Eigenvalues in ascending order; column `k` of the eigenvector matrix pairs with eigenvalue `k`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVectorView<'_, f64> {
        self.eigenvectors.column(k)
    }

    /// `E_k − E_j`.
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.eigenvalues[k] - self.eigenvalues[j]
    }

    /// `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        &self.eigenvectors * lambda * self.eigenvectors.transpose()
    }
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted ascending. Each eigenvector is signed so that its
/// largest-magnitude component is positive (first such index on ties).
pub fn eigh(h: &WeightedMatrix) -> Spectrum {
    let n = h.dim();
    let decomposition = SymmetricEigen::new(h.as_matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomposition.eigenvalues[i].total_cmp(&decomposition.eigenvalues[j]));

    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(decomposition.eigenvalues[src]);
        let v = decomposition.eigenvectors.column(src);
        let sign = if v[dominant_index(v.as_slice())] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.set_column(col, &(v * sign));
    }
    Spectrum { eigenvalues, eigenvectors }
}

/// Checks symmetry before decomposing.
pub fn eigh_matrix(h: DMatrix<f64>) -> Result<Spectrum> {
    Ok(eigh(&WeightedMatrix::from_matrix(h)?))
}

fn dominant_index(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let cutoff = max * (1.0 - 1e-12);
    v.iter().position(|x| x.abs() >= cutoff).unwrap_or(0)
}

/// `|⟨ψ_k|probe⟩|²` for every eigenvector `ψ_k`.
pub fn overlaps(spectrum: &Spectrum, probe: &StateVector) -> Result<Vec<f64>> {
    if probe.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), found: probe.dim() });
    }
    let amps = probe.amplitudes();
    Ok(spectrum
        .eigenvectors
        .column_iter()
        .map(|v| {
            v.iter()
                .zip(amps.iter())
                .map(|(x, a)| a * *x)
                .sum::<nalgebra::Complex<f64>>()
                .norm_sqr()
        })
        .collect())
}

/// Reduced-space probe states used in the overlap plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    /// The equal superposition over all vertices.
    S,
    /// The marked vertex.
    A,
    /// The marked vertex's cluster-mates.
    B,
}

impl Probe {
    pub const ALL: [Probe; 3] = [Probe::S, Probe::A, Probe::B];

    pub fn name(self) -> &'static str {
        match self {
            Probe::S => "s",
            Probe::A => "a",
            Probe::B => "b",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn state(self, spec: &GraphSpec) -> StateVector {
        match self {
            Probe::S => subspace::reduced_initial_state(spec),
            Probe::A => subspace::reduced_basis_state(VertexClass::A),
            Probe::B => subspace::reduced_basis_state(VertexClass::B),
        }
    }
}

/// Overlaps of one probe with the seven eigenstates along a γ grid.
#[derive(Debug, Clone)]
pub struct OverlapCurve {
    pub probe: Probe,
    pub gammas: Vec<f64>,
    /// `overlaps[i][k] = |⟨ψ_k(γ_i)|probe⟩|²`.
    pub overlaps: Vec<[f64; 7]>,
}

/// Uniform grid of `points` values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn reduced_overlaps(spec: &GraphSpec, gamma: f64, probe: &StateVector) -> Result<[f64; 7]> {
    let spectrum = eigh(&subspace::reduced_hamiltonian(spec, gamma)?);
    let o = overlaps(&spectrum, probe)?;
    let mut row = [0.0; 7];
    row.copy_from_slice(&o);
    Ok(row)
}

/// Overlap curves of `|s⟩`, `|a⟩` and `|b⟩` (in that order) over a uniform γ grid.
pub fn gamma_sweep(spec: &GraphSpec, range: (f64, f64), points: usize) -> Result<Vec<OverlapCurve>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidRange { lo, hi });
    }
    if points < 2 {
        return Err(Error::Invalid(format!("sweep needs at least 2 points (got {points})")));
    }
    let gammas = uniform_grid(lo, hi, points);
    let probes: Vec<StateVector> = Probe::ALL.iter().map(|p| p.state(spec)).collect();
    let rows: Vec<[[f64; 7]; 3]> = gammas
        .par_iter()
        .map(|&gamma| {
            let spectrum = eigh(&subspace::reduced_hamiltonian(spec, gamma)?);
            let mut out = [[0.0; 7]; 3];
            for (slot, probe) in out.iter_mut().zip(&probes) {
                slot.copy_from_slice(&overlaps(&spectrum, probe)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(Probe::ALL
        .iter()
        .enumerate()
        .map(|(p, &probe)| OverlapCurve {
            probe,
            gammas: gammas.clone(),
            overlaps: rows.iter().map(|r| r[p]).collect(),
        })
        .collect())
}

/// A located overlap crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub gamma: f64,
    pub overlap_j: f64,
    pub overlap_k: f64,
}

/// Relative γ tolerance of the crossing bisection.
pub const CROSSING_TOLERANCE: f64 = 1e-10;

/// Bisects `|⟨ψ_j|probe⟩|² − |⟨ψ_k|probe⟩|²` for its sign change inside `bracket`.
pub fn find_crossing(
    spec: &GraphSpec,
    probe: Probe,
    pair: (usize, usize),
    bracket: (f64, f64),
) -> Result<Crossing> {
    let (j, k) = pair;
    if j >= 7 || k >= 7 {
        return Err(Error::Invalid(format!("eigenstate pair ({j}, {k}) out of range")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    let state = probe.state(spec);
    let diff = |gamma: f64| -> Result<f64> {
        let o = reduced_overlaps(spec, gamma, &state)?;
        Ok(o[j] - o[k])
    };
    let mut f_lo = diff(lo)?;
    let f_hi = diff(hi)?;
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoCrossing { lo, hi });
    }
    while hi - lo > CROSSING_TOLERANCE * 0.5 * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        let f_mid = diff(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid * f_lo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let o = reduced_overlaps(spec, gamma, &state)?;
    Ok(Crossing { gamma, overlap_j: o[j], overlap_k: o[k] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wm(rows: usize, data: &[f64]) -> WeightedMatrix {
        WeightedMatrix::from_matrix(DMatrix::from_row_slice(rows, rows, data)).unwrap()
    }

    #[test]
    fn pauli_x() {
        let s = eigh(&wm(2, &[0.0, 1.0, 1.0, 0.0]));
        assert!((s.eigenvalue(0) + 1.0).abs() < 1e-15);
        assert!((s.eigenvalue(1) - 1.0).abs() < 1e-15);
        // ground state (1, -1)/√2 with positive first (tied) component
        assert!(s.eigenvector(0)[0] > 0.0);
        assert!(s.eigenvector(1)[0] > 0.0 && s.eigenvector(1)[1] > 0.0);
    }

    #[test]
    fn non_symmetric_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(eigh_matrix(m), Err(Error::NotSymmetric(0, 1))));
    }

    #[test]
    fn sign_convention_dominant_positive() {
        let s = eigh(&wm(3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]));
        for k in 0..3 {
            let v = s.eigenvector(k);
            let idx = dominant_index(v.as_slice());
            assert!(v[idx] > 0.0);
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let spec = GraphSpec::new(6, 2.0).unwrap();
        let h = subspace::reduced_hamiltonian(&spec, 0.3).unwrap();
        let s = eigh(&h);
        let tol = 1e-9 * h.max_abs().max(1.0);
        assert!(h.max_abs_diff(&s.reconstruct()) <= tol);
        let gram = s.eigenvectors().transpose() * s.eigenvectors();
        assert!((gram - DMatrix::identity(7, 7)).amax() < 1e-12);
        assert!(s.eigenvalues().windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn overlaps_of_eigenvector() {
        let spec = GraphSpec::new(5, 1.0).unwrap();
        let s = eigh(&subspace::reduced_hamiltonian(&spec, 0.2).unwrap());
        let probe = StateVector::from_real(s.eigenvector(0).iter().copied());
        let o = overlaps(&s, &probe).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-12);
        assert!(o[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn overlaps_dimension_mismatch() {
        let s = eigh(&wm(2, &[0.0, 1.0, 1.0, 0.0]));
        let probe = StateVector::from_real([1.0, 0.0, 0.0]);
        assert!(matches!(overlaps(&s, &probe), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gaps_at_critical_gammas_m1000() {
        let spec = GraphSpec::new(1000, 1.0).unwrap();
        let s1 = eigh(&subspace::reduced_hamiltonian(&spec, 0.002).unwrap());
        let expected1 = 4.0 / 1000f64.powf(1.5);
        assert!((s1.gap(0, 1) / expected1 - 1.0).abs() < 0.01, "{}", s1.gap(0, 1));
        let s2 = eigh(&subspace::reduced_hamiltonian(&spec, 0.001).unwrap());
        let expected2 = 2.0 / 1000f64.sqrt();
        assert!((s2.gap(0, 3) / expected2 - 1.0).abs() < 0.01, "{}", s2.gap(0, 3));
    }

    #[test]
    fn half_and_half_overlaps_at_critical_gammas() {
        let spec = GraphSpec::new(1000, 1.0).unwrap();
        let s1 = eigh(&subspace::reduced_hamiltonian(&spec, 0.002).unwrap());
        let o = overlaps(&s1, &Probe::S.state(&spec)).unwrap();
        assert!((o[0] - 0.5).abs() < 0.05 && (o[1] - 0.5).abs() < 0.05, "{o:?}");
        let s2 = eigh(&subspace::reduced_hamiltonian(&spec, 0.001).unwrap());
        let o = overlaps(&s2, &Probe::B.state(&spec)).unwrap();
        assert!((o[0] - 0.5).abs() < 0.05 && (o[3] - 0.5).abs() < 0.05, "{o:?}");
    }

    #[test]
    fn sweep_shape_and_completeness() {
        let spec = GraphSpec::new(1000, 1.0).unwrap();
        let curves = gamma_sweep(&spec, (0.0005, 0.003), 26).unwrap();
        assert_eq!(curves.len(), 3);
        for c in &curves {
            assert_eq!(c.gammas.len(), 26);
            assert_eq!(c.gammas[0], 0.0005);
            assert_eq!(c.gammas[25], 0.003);
            for row in &c.overlaps {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sweep_rejects_bad_ranges() {
        let spec = GraphSpec::new(10, 1.0).unwrap();
        assert!(matches!(gamma_sweep(&spec, (0.2, 0.1), 10), Err(Error::InvalidRange { .. })));
        assert!(gamma_sweep(&spec, (0.0, 0.1), 10).is_err());
        assert!(gamma_sweep(&spec, (0.1, 0.2), 1).is_err());
    }

    #[test]
    fn crossings_m1000() {
        let w1 = GraphSpec::new(1000, 1.0).unwrap();
        let c = find_crossing(&w1, Probe::S, (0, 1), (0.0015, 0.0025)).unwrap();
        assert!((c.gamma / 0.002 - 1.0).abs() < 0.05, "{c:?}");
        assert!((c.overlap_j - 0.5).abs() < 0.1 && (c.overlap_k - 0.5).abs() < 0.1);

        let w3 = GraphSpec::new(1000, 3.0).unwrap();
        let c = find_crossing(&w3, Probe::S, (0, 1), (0.001, 0.002)).unwrap();
        assert!((c.gamma / (4.0 / 3000.0) - 1.0).abs() < 0.05, "{c:?}");

        let w2 = GraphSpec::new(1000, 2.0).unwrap();
        let c = find_crossing(&w2, Probe::B, (0, 3), (0.0008, 0.0012)).unwrap();
        assert!((c.gamma / 0.001 - 1.0).abs() < 0.05, "{c:?}");
        assert!((c.overlap_j - 0.5).abs() < 0.1 && (c.overlap_k - 0.5).abs() < 0.1);
    }

    #[test]
    fn no_crossing_reported() {
        let spec = GraphSpec::new(1000, 1.0).unwrap();
        let err = find_crossing(&spec, Probe::S, (0, 1), (0.004, 0.005)).unwrap_err();
        assert!(matches!(err, Error::NoCrossing { .. }));
    }
}
