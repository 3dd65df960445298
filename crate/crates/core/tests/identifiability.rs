//! Identifiability checks against determinant and Gram-eigenvalue oracles.

use nalgebra::DMatrix;
use nphmm::diagnostics::{
    check_emission_independence, check_emission_independence_refined, check_transition_rank, diagnose,
    DEFAULT_TOLERANCE,
};
use nphmm::discrete::DiscreteEmissionTable;
use nphmm::mixture::{Component, MixtureEmission};
use nphmm::{EmissionModel, Hmm, TransitionModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

fn poisson_row(rate: f64, top: usize) -> Vec<f64> {
    (0..=top).map(|y| (y as f64 * rate.ln() - rate - ln_gamma(y as f64 + 1.0)).exp()).collect()
}

#[test]
fn rank_agrees_with_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..200 {
        let k = 2 + trial % 2;
        let mut q = DMatrix::from_fn(k, k, |_, _| rng.random_range(0.0..1.0));
        if trial % 5 == 0 {
            let row = q.row(0).into_owned();
            q.row_mut(1).copy_from(&row);
        }
        for a in 0..k {
            let s = q.row(a).sum();
            q.row_mut(a).scale_mut(1.0 / s);
        }
        let det = q.determinant();
        let (full, sigma) = check_transition_rank(&q, DEFAULT_TOLERANCE);
        assert_eq!(full, det.abs() > 1e-9, "det {det} sigma {sigma}");
    }
}

#[test]
fn poisson_rows_match_gram_eigenvalue() {
    let rows = vec![poisson_row(1.0, 30), poisson_row(5.0, 30)];
    let norm: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let s: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    let g: f64 = norm[0].iter().zip(&norm[1]).map(|(a, b)| a * b).sum();
    // Eigenvalues of [[1, g], [g, 1]] are 1 ± g; singular values of the
    // normalized rows are their square roots.
    let expected = (1.0 - g).sqrt();
    let table = DiscreteEmissionTable::from_rows(
        &rows
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let (ok, sigma) = check_emission_independence(&EmissionModel::Discrete(table), DEFAULT_TOLERANCE);
    assert!(ok);
    assert!((sigma - expected).abs() < 1e-9);
}

fn textbook() -> Hmm {
    let q = DMatrix::from_row_slice(3, 3, &[0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.1, 0.2, 0.7]);
    let t = DiscreteEmissionTable::from_rows(&[
        vec![0.7, 0.2, 0.1, 0.0],
        vec![0.1, 0.6, 0.2, 0.1],
        vec![0.0, 0.1, 0.3, 0.6],
    ])
    .unwrap();
    Hmm::new(TransitionModel::with_stationary_init(q).unwrap(), EmissionModel::Discrete(t)).unwrap()
}

#[test]
fn verdicts_are_permutation_invariant() {
    let model = textbook();
    let base = diagnose(&model, DEFAULT_TOLERANCE);
    assert!(base.q_full_rank && base.emissions_independent);
    for order in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let r = diagnose(&model.reordered(&order), DEFAULT_TOLERANCE);
        assert_eq!(r.q_full_rank, base.q_full_rank);
        assert_eq!(r.emissions_independent, base.emissions_independent);
        assert!((r.q_sigma_min - base.q_sigma_min).abs() < 1e-12);
        assert!((r.emission_sigma_min - base.emission_sigma_min).abs() < 1e-12);
    }
}

#[test]
fn duplicated_state_is_flagged() {
    let q = DMatrix::from_row_slice(2, 2, &[0.6, 0.4, 0.3, 0.7]);
    let t = DiscreteEmissionTable::from_rows(&[vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
    let model = Hmm::new(TransitionModel::with_stationary_init(q).unwrap(), EmissionModel::Discrete(t)).unwrap();
    let r = diagnose(&model, DEFAULT_TOLERANCE);
    assert!(!r.emissions_independent);
    assert!(!r.identifiable());
}

#[test]
fn refining_grid_keeps_clear_verdicts() {
    let em = EmissionModel::Mixture(
        MixtureEmission::new(
            DMatrix::from_row_slice(2, 3, &[0.7, 0.3, 0.0, 0.0, 0.4, 0.6]),
            vec![
                Component::Gaussian { mean: vec![-1.0], var: vec![0.5] },
                Component::Gaussian { mean: vec![1.0], var: vec![1.0] },
                Component::Gaussian { mean: vec![3.0], var: vec![0.3] },
            ],
        )
        .unwrap(),
    );
    let (ok, sigma) = check_emission_independence(&em, DEFAULT_TOLERANCE);
    assert!(ok && sigma > 10.0 * DEFAULT_TOLERANCE);
    let (ok2, sigma2) = check_emission_independence_refined(&em, DEFAULT_TOLERANCE, 2);
    assert!(ok2);
    assert!((sigma - sigma2).abs() < 1e-3);
}

#[test]
fn report_serializes_with_expected_keys() {
    let json = serde_json::to_value(diagnose(&textbook(), DEFAULT_TOLERANCE)).unwrap();
    for key in ["qFullRank", "qSigmaMin", "emissionsIndependent", "emissionSigmaMin", "tolerance", "notes"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}
