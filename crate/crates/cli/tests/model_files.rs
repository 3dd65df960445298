//! Model file round trips for every emission family.

use nalgebra::DMatrix;
use nphmm::discrete::{DiscreteEmissionTable, NegBinEmission, NegBinParams};
use nphmm::kernel::{KernelEmission, KernelId};
use nphmm::mixture::{make_zero_inflated, Component, MixtureEmission};
use nphmm::{EmissionModel, Hmm, TransitionModel};
use nphmm_cli::model_file::ModelFile;

fn transition() -> TransitionModel {
    TransitionModel::new(DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.1 / 3.0, 1.0 - 0.1 / 3.0]), vec![0.25, 0.75])
        .unwrap()
}

fn models() -> Vec<Hmm> {
    let emissions = vec![
        EmissionModel::Discrete(
            DiscreteEmissionTable::from_rows(&[vec![0.1, 0.2, 0.7], vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]).unwrap(),
        ),
        EmissionModel::NegBin(
            NegBinEmission::new(vec![NegBinParams::new(0.37, 0.123456789).unwrap(), NegBinParams::new(12.5, 0.9).unwrap()])
                .unwrap(),
        ),
        EmissionModel::Mixture(
            make_zero_inflated(&[0.2, 0.35], vec![Component::Poisson { rate: 0.7 }, Component::Poisson { rate: 5.1 }])
                .unwrap(),
        ),
        EmissionModel::Mixture(
            MixtureEmission::new(
                DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.0, 0.0, 0.2, 0.8]),
                vec![
                    Component::Gaussian { mean: vec![0.1, -2.0], var: vec![1.5, 0.3] },
                    Component::Gaussian { mean: vec![1.0, 1.0], var: vec![0.2, 0.2] },
                    Component::Gaussian { mean: vec![3.3, 0.0], var: vec![1.0, 2.0] },
                ],
            )
            .unwrap(),
        ),
        EmissionModel::Mixture(
            MixtureEmission::new(
                DMatrix::from_row_slice(2, 3, &[0.6, 0.4, 0.0, 0.1, 0.0, 0.9]),
                vec![
                    Component::Triangular { size: 3 },
                    Component::Binomial { trials: 10, p: 0.3 },
                    Component::Triangular { size: 11 },
                ],
            )
            .unwrap(),
        ),
        EmissionModel::Kernel(
            KernelEmission::new(
                1,
                vec![0.5, 1.25, -3.0],
                0.4,
                KernelId::EpanechnikovProduct,
                DMatrix::from_row_slice(3, 2, &[0.2, 0.5, 0.3, 0.5, 0.5, 0.0]),
            )
            .unwrap(),
        ),
    ];
    emissions.into_iter().map(|e| Hmm::new(transition(), e).unwrap()).collect()
}

#[test]
fn round_trip_is_exact() {
    for model in models() {
        let text = serde_json::to_string_pretty(&ModelFile::from_model(&model)).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_model().unwrap(), model);
    }
}

#[test]
fn invalid_files_are_rejected() {
    let good = serde_json::to_value(ModelFile::from_model(&models()[0])).unwrap();
    let mut wrong_version = good.clone();
    wrong_version["schemaVersion"] = 2.into();
    let mut bad_row = good.clone();
    bad_row["transition"][0][0] = 0.9.into();
    let mut bad_k = good.clone();
    bad_k["k"] = 3.into();
    let mut unknown = good.clone();
    unknown["extra"] = 1.into();
    for v in [wrong_version, bad_row, bad_k] {
        let file: ModelFile = serde_json::from_value(v).unwrap();
        assert!(file.to_model().is_err());
    }
    assert!(serde_json::from_value::<ModelFile>(unknown).is_err());
}
