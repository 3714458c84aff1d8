mod common;

use common::*;
use rankpursuit::multiview::FeatureSlice;
use rankpursuit::pursuit::Backfit;
use rankpursuit::{KernelSpec, SparseExpansion};
use rankpursuit_harness::methods::{fit, MethodSettings, TrainData};
use rankpursuit_harness::model_io::{from_json, load_model, save_model, to_json, ModelFile};
use rankpursuit_harness::{HarnessError, Method, Model, Params};

fn settings() -> MethodSettings {
    MethodSettings {
        beta: 0.5,
        n_views: 2,
        backfit: Backfit::EveryStep,
    }
}

fn params() -> Params {
    Params {
        width: 0.5,
        lambda: Some(0.25),
        nu: Some(0.5),
        basis: Some(6),
    }
}

fn assert_close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn every_method_round_trips_through_json() {
    let train = toy_dataset(1, 24, 4);
    let data = TrainData {
        scored: train.clone(),
        unscored: Some(toy_unscored(2, 10, 4)),
    };
    let probe = toy_points(3, 15, 4);
    for method in Method::ALL {
        let model = fit(method, &settings(), &data, &params(), 9).unwrap();
        let back = from_json(&to_json(&model).unwrap()).unwrap();
        assert_eq!(back.method(), method);
        assert_eq!(back.nonzero_count(), model.nonzero_count(), "{method}");
        assert_close(&model.predict(&probe).unwrap(), &back.predict(&probe).unwrap());
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let model = fit(Method::RankingPursuit, &settings(), &TrainData::supervised(toy_dataset(4, 20, 3)), &params(), 0).unwrap();
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    let probe = toy_points(5, 10, 3);
    assert_close(&model.predict(&probe).unwrap(), &back.predict(&probe).unwrap());
}

#[test]
fn empty_model_predicts_zero() {
    let model = Model::Sparse {
        method: Method::RankingPursuit,
        model: SparseExpansion::empty(KernelSpec::gaussian(1.0).unwrap(), 0.0),
    };
    let back = from_json(&to_json(&model).unwrap()).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.predict(&toy_points(6, 4, 2)).unwrap(), vec![0.0; 4]);
}

#[test]
fn two_view_metadata_survives() {
    let data = TrainData {
        scored: toy_dataset(7, 16, 4),
        unscored: Some(toy_unscored(8, 8, 4)),
    };
    let model = fit(Method::SsRankingPursuit, &settings(), &data, &params(), 0).unwrap();
    let file = ModelFile::from_model(&model).unwrap();
    assert_eq!(file.views.len(), 2);
    assert_eq!(file.nu, Some(0.5));
    assert_eq!(file.shared_index, Some(true));
    assert_eq!(file.views[0].feature_slice, FeatureSlice::Indices(vec![0, 1]));
    assert_eq!(file.views[1].feature_slice, FeatureSlice::Indices(vec![2, 3]));
    let Model::MultiView(back) = from_json(&to_json(&model).unwrap()).unwrap() else {
        panic!("expected a multi-view model");
    };
    let Model::MultiView(orig) = model else { unreachable!() };
    assert_eq!(back, orig);
}

#[test]
fn schema_mismatch_is_rejected() {
    let model = fit(Method::Rls, &settings(), &TrainData::supervised(toy_dataset(9, 10, 2)), &params(), 0).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&to_json(&model).unwrap()).unwrap();
    value["schema_version"] = serde_json::json!(99);
    let err = from_json(&value.to_string()).unwrap_err();
    assert!(matches!(err, HarnessError::Model(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn corrupted_file_is_a_data_error() {
    let model = fit(Method::Crrp, &settings(), &TrainData::supervised(toy_dataset(10, 12, 2)), &params(), 0).unwrap();
    let text = to_json(&model).unwrap();
    for broken in [&text[..text.len() / 2], "", "{\"schema_version\": 1}", "not json"] {
        let err = from_json(broken).unwrap_err();
        assert!(matches!(err, HarnessError::Model(_)), "{err}");
    }
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["views"][0]["coefficients"] = serde_json::json!([1.0]);
    assert!(matches!(from_json(&value.to_string()), Err(HarnessError::Model(_))));
}
