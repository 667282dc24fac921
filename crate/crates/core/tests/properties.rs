//! Randomised invariants of the evolution, the reduced basis and the census.

use proptest::prelude::*;
use simplex_search::dynamics::Propagator;
use simplex_search::graph::{self, default_marked, EdgeTier, GraphSpec};
use simplex_search::spectral;
use simplex_search::subspace::{self, ReducedBasis, StateVector};
use simplex_search::theory;

fn reduced_state() -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0f64..1.0, 7)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|v| StateVector::from_real(v).normalized())
}

fn reduced_case() -> impl Strategy<Value = (GraphSpec, f64)> {
    (3usize..2000, 0.25f64..6.0, 0.2f64..4.0).prop_map(|(m, w, scale)| {
        let spec = GraphSpec::new(m, w).unwrap();
        (spec, scale / m as f64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary((spec, gamma) in reduced_case(), psi in reduced_state(), t in 0.0f64..1e4) {
        let prop = Propagator::new(&subspace::reduced_hamiltonian(&spec, gamma).unwrap());
        let out = prop.evolve(&psi, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn evolution_composes((spec, gamma) in reduced_case(), psi in reduced_state(),
                          t1 in 0.0f64..5e3, t2 in 0.0f64..5e3) {
        let prop = Propagator::new(&subspace::reduced_hamiltonian(&spec, gamma).unwrap());
        let stepwise = prop.evolve(&prop.evolve(&psi, t1).unwrap(), t2).unwrap();
        let direct = prop.evolve(&psi, t1 + t2).unwrap();
        prop_assert!(stepwise.max_abs_diff(&direct).unwrap() <= 1e-9);
    }

    #[test]
    fn evolution_reverses((spec, gamma) in reduced_case(), psi in reduced_state(), t in 0.0f64..1e4) {
        let prop = Propagator::new(&subspace::reduced_hamiltonian(&spec, gamma).unwrap());
        let back = prop.evolve(&prop.evolve(&psi, t).unwrap(), -t).unwrap();
        prop_assert!(back.max_abs_diff(&psi).unwrap() <= 1e-9);
    }

    #[test]
    fn eigenbasis_is_complete((spec, gamma) in reduced_case(), psi in reduced_state()) {
        let spectrum = spectral::eigh(&subspace::reduced_hamiltonian(&spec, gamma).unwrap());
        let total: f64 = spectral::overlaps(&spectrum, &psi).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn lift_then_project_is_identity(m in 3usize..9, w in 0.25f64..4.0, psi in reduced_state()) {
        let spec = GraphSpec::new(m, w).unwrap();
        let basis = ReducedBasis::new(&spec, default_marked()).unwrap();
        let lifted = basis.lift(&psi).unwrap();
        prop_assert!((lifted.norm() - 1.0).abs() <= 1e-12);
        prop_assert!(basis.leakage(&lifted).unwrap() <= 1e-12);
        prop_assert!(basis.project(&lifted).unwrap().max_abs_diff(&psi).unwrap() <= 1e-12);
    }

    #[test]
    fn full_and_reduced_evolution_agree(m in 3usize..7, w in 0.5f64..4.0, scale in 0.5f64..2.5, t in 0.0f64..20.0) {
        let spec = GraphSpec::new(m, w).unwrap();
        let gamma = scale / m as f64;
        let basis = ReducedBasis::new(&spec, default_marked()).unwrap();
        let full = subspace::search_hamiltonian(&spec, default_marked(), gamma).unwrap();
        let reduced = subspace::reduced_hamiltonian(&spec, gamma).unwrap();
        let s = subspace::reduced_initial_state(&spec);
        let a = Propagator::new(&full).evolve(&basis.lift(&s).unwrap(), t).unwrap();
        let b = basis.lift(&Propagator::new(&reduced).evolve(&s, t).unwrap()).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-8);
    }
}

#[test]
fn census_sums_match_edge_count() {
    for m in 3..=12 {
        let spec = GraphSpec::new(m, 2.0).unwrap();
        let census = graph::edge_census(&spec, &graph::classify_vertices(&spec, default_marked()).unwrap()).unwrap();
        assert_eq!(census.total(), spec.edge_count());
        assert_eq!(census.tier_total(EdgeTier::Unit), (m + 1) * m * (m - 1) / 2);
        assert_eq!(census.tier_total(EdgeTier::Weighted), (m + 1) * m / 2);
        assert_eq!(census, theory::census_formulas(m).unwrap());
    }
}

#[test]
fn initial_state_is_uniform_after_lift() {
    for m in 3..=8 {
        let spec = GraphSpec::new(m, 1.5).unwrap();
        let basis = ReducedBasis::new(&spec, default_marked()).unwrap();
        let lifted = basis.lift(&subspace::reduced_initial_state(&spec)).unwrap();
        assert!(lifted.max_abs_diff(&subspace::full_initial_state(&spec)).unwrap() <= 1e-12);
    }
}
