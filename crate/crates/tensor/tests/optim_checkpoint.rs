use std::collections::BTreeMap;

use gfcn_tensor::{
    adam_step, params_from_json, params_to_json, sgd_step, AdamConfig, AdamState, SgdConfig,
    Tensor, TensorError,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

fn quadratic_grads(params: &BTreeMap<String, Tensor>) -> BTreeMap<String, Tensor> {
    // gradient of sum of squares: 2x
    params
        .iter()
        .map(|(k, v)| {
            let g = Tensor::new(
                v.shape().to_vec(),
                v.data().iter().map(|&x| 2.0 * x).collect(),
            )
            .unwrap();
            (k.clone(), g)
        })
        .collect()
}

fn loss(params: &BTreeMap<String, Tensor>) -> f64 {
    params
        .values()
        .flat_map(|t| t.data())
        .map(|&x| x * x)
        .sum()
}

#[test]
fn sgd_descends_a_quadratic() {
    let mut params = BTreeMap::new();
    params.insert("w".to_string(), Tensor::new(vec![3], vec![1.0, -2.0, 0.5]).unwrap());
    let config = SgdConfig { learning_rate: 0.1 };
    let mut prev = loss(&params);
    for _ in 0..50 {
        let grads = quadratic_grads(&params);
        sgd_step(&mut params, &grads, &config).unwrap();
        let now = loss(&params);
        assert!(now < prev);
        prev = now;
    }
    assert!(prev < 1e-3);
}

#[test]
fn adam_descends_a_quadratic() {
    let mut params = BTreeMap::new();
    params.insert("w".to_string(), Tensor::new(vec![2], vec![3.0, -4.0]).unwrap());
    let mut state = AdamState::new();
    let config = AdamConfig {
        learning_rate: 0.1,
        ..AdamConfig::default()
    };
    for _ in 0..300 {
        let grads = quadratic_grads(&params);
        adam_step(&mut params, &grads, &mut state, &config).unwrap();
    }
    assert!(loss(&params) < 1e-4, "loss {}", loss(&params));
    assert_eq!(state.step_count(), 300);
}

#[test]
fn non_finite_gradients_name_the_parameter() {
    let mut params = BTreeMap::new();
    params.insert("fine".to_string(), Tensor::zeros(vec![2]));
    params.insert("broken".to_string(), Tensor::zeros(vec![2]));
    let mut grads = BTreeMap::new();
    grads.insert("fine".to_string(), Tensor::new(vec![2], vec![1.0, 1.0]).unwrap());
    grads.insert(
        "broken".to_string(),
        Tensor::new(vec![2], vec![f64::NAN, 1.0]).unwrap(),
    );
    let err = sgd_step(&mut params, &grads, &SgdConfig::default()).unwrap_err();
    match err {
        TensorError::NonFiniteGrad { param } => assert_eq!(param, "broken"),
        other => panic!("expected NonFiniteGrad, got {other:?}"),
    }
    let err = adam_step(
        &mut params,
        &grads,
        &mut AdamState::new(),
        &AdamConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, TensorError::NonFiniteGrad { param } if param == "broken"));
}

#[test]
fn missing_gradients_leave_parameters_alone() {
    let mut params = BTreeMap::new();
    params.insert("a".to_string(), Tensor::new(vec![1], vec![5.0]).unwrap());
    params.insert("b".to_string(), Tensor::new(vec![1], vec![7.0]).unwrap());
    let mut grads = BTreeMap::new();
    grads.insert("a".to_string(), Tensor::new(vec![1], vec![1.0]).unwrap());
    sgd_step(&mut params, &grads, &SgdConfig { learning_rate: 1.0 }).unwrap();
    assert_eq!(params["a"].data(), &[4.0]);
    assert_eq!(params["b"].data(), &[7.0]);
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    let mut params = BTreeMap::new();
    for i in 0..5 {
        let shape = vec![r.gen_range(1..4), r.gen_range(1..6)];
        let len: usize = shape.iter().product();
        let data: Vec<f64> = (0..len).map(|_| r.gen_range(-10.0..10.0) * 1e-3_f64.powi(r.gen_range(0..3))).collect();
        params.insert(format!("layer{i}.w"), Tensor::new(shape, data).unwrap());
    }
    let json = params_to_json(&params).unwrap();
    let restored = params_from_json(&json).unwrap();
    assert_eq!(params.len(), restored.len());
    for (k, v) in &params {
        let r = &restored[k];
        assert_eq!(v.shape(), r.shape());
        for (a, b) in v.data().iter().zip(r.data()) {
            assert_eq!(a.to_bits(), b.to_bits(), "key {k} drifted");
        }
    }
    // and serializing again gives identical bytes
    let json2 = params_to_json(&restored).unwrap();
    assert_eq!(json, json2);
}

#[test]
fn checkpoint_rejects_non_finite_and_malformed() {
    let mut params = BTreeMap::new();
    params.insert("w".to_string(), Tensor::new(vec![1], vec![f64::INFINITY]).unwrap());
    assert!(params_to_json(&params).is_err());
    assert!(params_from_json("not json").is_err());
    let wrong_count = r#"{"w": {"shape": [3], "data": [1.0]}}"#;
    assert!(params_from_json(wrong_count).is_err());
}
