//! Closed-form predictions for the two-stage search.
//!
//! Everything here is scalar arithmetic; no eigensolves are performed, so
//! these values can be compared against the numeric modules without sharing
//! a code path.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeCensus, EdgeTier, GraphSpec, VertexClass};
use crate::subspace::StateVector;

/// Closed-form quantities for one graph.
///
/// `e_u`, `e_v`, `r_u`, `r_v` are evaluated at `gamma_c1`. `e_u` and `e_v`
/// are eigenvalues of `K` with `H = −γK`; `e_plus` and `e_minus` are energies
/// of `H` itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub gamma_c1: f64,
    pub gamma_c2: f64,
    pub t1: f64,
    pub t2: f64,
    pub gap1: f64,
    pub gap2: f64,
    pub e_u: f64,
    pub e_v: f64,
    pub r_u: f64,
    pub r_v: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub lambda1: f64,
    pub op_norm_a: f64,
}

impl Prediction {
    pub fn total_time(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// Message emitted when `w ≥ √M`, where the two critical γ's are no longer separated.
pub fn regime_warning(spec: &GraphSpec) -> Option<String> {
    let root_m = spec.m_f64().sqrt();
    (spec.w() >= root_m).then(|| {
        format!(
            "w = {} is not below √M = {:.4}; the two-stage analysis does not apply",
            spec.w(),
            root_m
        )
    })
}

pub fn gamma_c1(spec: &GraphSpec) -> f64 {
    (1.0 + 1.0 / spec.w()) / spec.m_f64()
}

pub fn gamma_c2(spec: &GraphSpec) -> f64 {
    1.0 / spec.m_f64()
}

/// `E_± = −(1+w)/w + (1−w²)/(wM) ∓ (1+w)/M^{3/2}`, returned as `(E_+, E_−)`.
pub fn perturbed_stage1_energies(spec: &GraphSpec) -> (f64, f64) {
    let m = spec.m_f64();
    let w = spec.w();
    let centre = -(1.0 + w) / w + (1.0 - w * w) / (w * m);
    let split = (1.0 + w) / m.powf(1.5);
    (centre - split, centre + split)
}

/// `−1 ∓ 1/√M`, returned as `(lower, upper)`.
pub fn perturbed_stage2_energies(spec: &GraphSpec) -> (f64, f64) {
    let split = 1.0 / spec.m_f64().sqrt();
    (-1.0 - split, -1.0 + split)
}

pub fn predict(spec: &GraphSpec) -> Prediction {
    if let Some(msg) = regime_warning(spec) {
        log::warn!("{msg}");
    }
    let m = spec.m_f64();
    let gamma_c1 = gamma_c1(spec);
    let (e_plus, e_minus) = perturbed_stage1_energies(spec);
    let gap1 = 2.0 * (1.0 + spec.w()) / m.powf(1.5);
    let gap2 = 2.0 / m.sqrt();
    Prediction {
        gamma_c1,
        gamma_c2: gamma_c2(spec),
        t1: PI * m.powf(1.5) / (2.0 * (1.0 + spec.w())),
        t2: PI * m.sqrt() / 2.0,
        gap1,
        gap2,
        e_u: e_u(spec, gamma_c1),
        e_v: e_v(spec),
        r_u: r_u(spec, gamma_c1),
        r_v: r_v(spec),
        e_plus,
        e_minus,
        lambda1: algebraic_connectivity(spec),
        op_norm_a: adjacency_norm(spec),
    }
}

pub fn r_u(spec: &GraphSpec, gamma: f64) -> f64 {
    let m = spec.m_f64();
    1.0 + 4.0 * gamma - 2.0 * m * gamma + 4.0 * gamma * gamma + m * m * gamma * gamma
}

pub fn r_v(spec: &GraphSpec) -> f64 {
    let m = spec.m_f64();
    let w = spec.w();
    9.0 + 2.0 * m + m * m - 6.0 * w + 2.0 * m * w + w * w
}

pub fn e_u(spec: &GraphSpec, gamma: f64) -> f64 {
    let m = spec.m_f64();
    (1.0 - 2.0 * gamma + m * gamma + r_u(spec, gamma).sqrt()) / (2.0 * gamma)
}

pub fn e_v(spec: &GraphSpec) -> f64 {
    0.5 * (-3.0 + spec.m_f64() + spec.w() + r_v(spec).sqrt())
}

/// The two eigenpairs of the adjusted leading-order stage-1 Hamiltonian that
/// become degenerate at the first critical γ.
#[derive(Debug, Clone)]
pub struct UnperturbedPair {
    /// Normalized `x_u|a⟩ + |b⟩`.
    pub u: StateVector,
    /// Normalized `x_v(|e⟩ + |f⟩) + |g⟩`.
    pub v: StateVector,
    pub e_u: f64,
    pub e_v: f64,
    pub r_u: f64,
    pub r_v: f64,
}

pub fn unperturbed_pair(spec: &GraphSpec, gamma: f64) -> Result<UnperturbedPair> {
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveGamma(gamma));
    }
    let m = spec.m_f64();
    let ru = r_u(spec, gamma);
    let rv = r_v(spec);
    let xu = (1.0 + 2.0 * gamma - m * gamma + ru.sqrt()) / (2.0 * m.sqrt() * gamma);
    let xv = 2.0 * m.sqrt() / (-3.0 + m + spec.w() + rv.sqrt());
    let nu = (xu * xu + 1.0).sqrt();
    let nv = (2.0 * xv * xv + 1.0).sqrt();
    Ok(UnperturbedPair {
        u: StateVector::from_real([xu / nu, 1.0 / nu, 0.0, 0.0, 0.0, 0.0, 0.0]),
        v: StateVector::from_real([0.0, 0.0, 0.0, 0.0, xv / nv, xv / nv, 1.0 / nv]),
        e_u: e_u(spec, gamma),
        e_v: e_v(spec),
        r_u: ru,
        r_v: rv,
    })
}

/// Entries of `K⁽⁰⁾` (with `H⁽⁰⁾ = −γK⁽⁰⁾`), the adjusted leading-order stage-1
/// Hamiltonian: `√(M−k)` couplings replaced by `√M`, the `b∼b`, `d∼d` and
/// `g∼g` populations kept, and every other constant-size term dropped.
pub fn adjusted_leading_order(spec: &GraphSpec, gamma: f64) -> [[f64; 7]; 7] {
    let m = spec.m_f64();
    let root_m = m.sqrt();
    let mut k = [[0.0; 7]; 7];
    k[0][0] = 1.0 / gamma;
    k[0][1] = root_m;
    k[1][0] = root_m;
    k[1][1] = m - 2.0;
    k[2][3] = root_m;
    k[3][2] = root_m;
    k[3][3] = m - 2.0;
    for e in [4, 5] {
        k[e][6] = root_m;
        k[6][e] = root_m;
    }
    k[6][6] = m - 3.0 + spec.w();
    k
}

/// Exact root of `E_u(γ) = E_v` in `[γ_c2, 4/M]`, by bisection.
pub fn critical_gamma_root(spec: &GraphSpec) -> Result<f64> {
    let m = spec.m_f64();
    let target = e_v(spec);
    let f = |gamma: f64| e_u(spec, gamma) - target;
    let (mut lo, mut hi) = (gamma_c2(spec), 4.0 / m);
    let mut f_lo = f(lo);
    if f_lo * f(hi) > 0.0 {
        return Err(Error::NoCrossing { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid * f_lo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form edge counts by class pair and weight.
pub fn census_formulas(m: usize) -> Result<EdgeCensus> {
    use EdgeTier::*;
    use VertexClass::*;
    if m < 3 {
        return Err(Error::ClusterTooSmall(m));
    }
    let m1 = m - 1;
    let m2 = m - 2;
    let m3 = m - 3;
    let mut c = EdgeCensus::default();
    c.add(A, C, Weighted, 1);
    c.add(B, E, Weighted, m1);
    c.add(D, F, Weighted, m1);
    c.add(G, G, Weighted, m1 * m2 / 2);
    c.add(A, B, Unit, m1);
    c.add(B, B, Unit, m1 * m2 / 2);
    c.add(C, D, Unit, m1);
    c.add(D, D, Unit, m1 * m2 / 2);
    c.add(E, F, Unit, m1);
    c.add(E, G, Unit, m1 * m2);
    c.add(F, G, Unit, m1 * m2);
    c.add(G, G, Unit, m1 * m2 * m3 / 2);
    Ok(c)
}

/// Separation of the critical γ's in units of `1/M^{3/2}`: `√M / w`.
pub fn validity_margin(spec: &GraphSpec) -> f64 {
    spec.m_f64().sqrt() / spec.w()
}

/// `λ₁ = ½(M + 2w − √(M² − 4w + 4w²))`.
pub fn algebraic_connectivity(spec: &GraphSpec) -> f64 {
    let m = spec.m_f64();
    let w = spec.w();
    0.5 * (m + 2.0 * w - (m * m - 4.0 * w + 4.0 * w * w).sqrt())
}

/// `M + w − 1`.
pub fn adjacency_norm(spec: &GraphSpec) -> f64 {
    spec.m_f64() + spec.w() - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: usize, w: f64) -> GraphSpec {
        GraphSpec::new(m, w).unwrap()
    }

    #[test]
    fn m1000_w1_values() {
        let p = predict(&spec(1000, 1.0));
        assert!((p.gamma_c1 - 0.002).abs() < 1e-15);
        assert!((p.gamma_c2 - 0.001).abs() < 1e-15);
        assert!((p.t1 - 24836.471).abs() < 1e-3, "{}", p.t1);
        assert!((p.t2 - 49.673).abs() < 1e-3, "{}", p.t2);
    }

    #[test]
    fn m1000_w3_values() {
        let p = predict(&spec(1000, 3.0));
        assert!((p.gamma_c1 - 0.0013333333333333333).abs() < 1e-15);
        assert!((p.t1 - 12418.235).abs() < 1e-3, "{}", p.t1);
    }

    #[test]
    fn unweighted_reduction_is_exact() {
        for m in [3, 10, 250, 1000, 4096] {
            let p = predict(&spec(m, 1.0));
            let mf = m as f64;
            assert!((p.gamma_c1 - 2.0 / mf).abs() <= 1e-15 * p.gamma_c1);
            assert!((p.t1 / (PI * mf.powf(1.5) / 4.0) - 1.0).abs() < 1e-14);
            assert!((p.gap1 / (4.0 / mf.powf(1.5)) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn time_gap_products() {
        for (m, w) in [(3, 0.5), (100, 2.0), (1000, 7.5)] {
            let p = predict(&spec(m, w));
            assert!((p.t1 * p.gap1 - PI).abs() < 1e-12);
            assert!((p.t2 * p.gap2 - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn t1_times_one_plus_w_is_constant() {
        let reference = predict(&spec(777, 1.0)).t1 * 2.0;
        for w in [0.25, 2.0, 3.0, 10.0] {
            let p = predict(&spec(777, w));
            assert!((p.t1 * (1.0 + w) / reference - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_gammas_order_and_convergence() {
        for w in [0.1, 1.0, 5.0, 100.0] {
            let s = spec(500, w);
            assert!(gamma_c1(&s) > gamma_c2(&s));
        }
        let far = spec(500, 1e9);
        assert!((gamma_c1(&far) - gamma_c2(&far)) / gamma_c2(&far) < 1e-8);
    }

    #[test]
    fn radicands_nonnegative() {
        for m in [3, 4, 7, 30, 1000] {
            for w in [0.01, 0.5, 1.0, 3.0, 50.0] {
                for gamma in [1e-6, 1e-3, 0.1, 1.0, 10.0] {
                    let s = spec(m, w);
                    assert!(r_u(&s, gamma) >= 0.0);
                    assert!(r_v(&s) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn degeneracy_at_gamma_c1() {
        let s = spec(1000, 1.0);
        let pair = unperturbed_pair(&s, 0.002).unwrap();
        assert!((pair.e_u / pair.e_v - 1.0).abs() < 0.005, "{} {}", pair.e_u, pair.e_v);
    }

    #[test]
    fn pair_states_approach_b_and_g() {
        for m in [1000, 10_000] {
            for w in [1.0, 2.0] {
                let s = spec(m, w);
                let pair = unperturbed_pair(&s, gamma_c1(&s)).unwrap();
                let bound = 1.0 - 10.0 / m as f64;
                assert!(pair.u.probability(1) >= bound, "{}", pair.u.probability(1));
                assert!(pair.v.probability(6) >= bound, "{}", pair.v.probability(6));
            }
        }
    }

    #[test]
    fn pair_state_deficit_scales_with_weight() {
        // |⟨a|u⟩|² ≈ (1 + w)²/M at γ_c1, so a fixed 10/M bound only holds for small w.
        for m in [1000, 10_000, 100_000] {
            for w in [1.0, 3.0, 5.0] {
                let s = spec(m, w);
                let pair = unperturbed_pair(&s, gamma_c1(&s)).unwrap();
                let bound = 1.0 - 1.1 * (1.0 + w) * (1.0 + w) / m as f64;
                assert!(pair.u.probability(1) >= bound, "{}", pair.u.probability(1));
                assert!(pair.v.probability(6) >= bound, "{}", pair.v.probability(6));
                assert!((pair.u.norm() - 1.0).abs() < 1e-14);
                assert!((pair.v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pair_states_are_eigenvectors_of_adjusted_hamiltonian() {
        let s = spec(40, 2.0);
        let gamma = 0.03;
        let k = adjusted_leading_order(&s, gamma);
        let pair = unperturbed_pair(&s, gamma).unwrap();
        for (state, e) in [(&pair.u, pair.e_u), (&pair.v, pair.e_v)] {
            for (i, row) in k.iter().enumerate() {
                let kx: f64 = row.iter().enumerate().map(|(j, kij)| kij * state.amplitude(j).re).sum();
                assert!((kx - e * state.amplitude(i).re).abs() < 1e-10 * e);
            }
        }
    }

    #[test]
    fn exact_root_close_to_leading_order() {
        let s = spec(1000, 3.0);
        let root = critical_gamma_root(&s).unwrap();
        let lead = gamma_c1(&s);
        assert!((root / lead - 1.0).abs() < 10.0 / 1000.0, "{root} vs {lead}");
        assert!((e_u(&s, root) - e_v(&s)).abs() < 1e-8);
    }

    #[test]
    fn census_rows() {
        use EdgeTier::*;
        use VertexClass::*;
        let c = census_formulas(5).unwrap();
        let weighted: Vec<usize> =
            [(A, C), (B, E), (D, F), (G, G)].iter().map(|&(x, y)| c.get(x, y, Weighted)).collect();
        assert_eq!(weighted, vec![1, 4, 4, 6]);
        let unit: Vec<usize> = [(A, B), (B, B), (C, D), (D, D), (E, F), (E, G), (F, G), (G, G)]
            .iter()
            .map(|&(x, y)| c.get(x, y, Unit))
            .collect();
        assert_eq!(unit, vec![4, 6, 4, 6, 4, 12, 12, 12]);
        assert_eq!(census_formulas(3).unwrap().get(G, G, Unit), 0);
        let c10 = census_formulas(10).unwrap();
        assert_eq!(c10.tier_total(Weighted), 55);
        assert_eq!(c10.tier_total(Unit), 495);
        assert_eq!(c10.total(), 550);
        assert!(census_formulas(2).is_err());
    }

    #[test]
    fn margin_values() {
        assert!((validity_margin(&spec(1000, 1.0)) - 1000f64.sqrt()).abs() < 1e-12);
        assert!((validity_margin(&spec(1000, 31.6)) - 1.0).abs() < 0.01);
        assert!((validity_margin(&spec(1000, 5.0)) - 6.324555320336759).abs() < 1e-12);
        let s = spec(1000, 2.5);
        let direct = (gamma_c1(&s) - gamma_c2(&s)) * 1000f64.powf(1.5);
        assert!((direct / validity_margin(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_warning_threshold() {
        assert!(regime_warning(&spec(100, 9.99)).is_none());
        assert!(regime_warning(&spec(100, 10.0)).is_some());
    }

    #[test]
    fn connectivity_closed_forms() {
        assert!((algebraic_connectivity(&spec(4, 2.0)) - (4.0 - 6f64.sqrt())).abs() < 1e-14);
        assert_eq!(algebraic_connectivity(&spec(10, 1.0)), 1.0);
        assert!((algebraic_connectivity(&spec(100, 5.0)) / 5.0 - 1.0).abs() < 0.05);
        assert_eq!(adjacency_norm(&spec(4, 2.0)), 5.0);
    }
}
