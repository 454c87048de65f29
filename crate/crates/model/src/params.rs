//! Deterministic parameter initialization.

use std::collections::BTreeMap;

use gfcn_tensor::Tensor;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::forward::Gfcn;

/// Fresh parameters for a model: weights drawn uniformly with a
/// fan-balanced limit, biases zero. The same seed always produces the
/// same values.
pub fn init_params(gfcn: &Gfcn, seed: u64) -> BTreeMap<String, Tensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = BTreeMap::new();
    for (name, shape) in gfcn.param_decls() {
        let tensor = if name.ends_with(".bias") {
            Tensor::zeros(shape.clone())
        } else {
            let (fan_in, fan_out) = fans(shape);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let len: usize = shape.iter().product();
            let data = (0..len).map(|_| rng.gen_range(-limit..limit)).collect();
            Tensor::new(shape.clone(), data).expect("declared shapes are consistent")
        };
        params.insert(name.clone(), tensor);
    }
    params
}

fn fans(shape: &[usize]) -> (usize, usize) {
    match shape {
        // conv filters: [taps, c_in, c_out]
        [taps, c_in, c_out] => (taps * c_in, taps * c_out),
        [f_in, f_out] => (*f_in, *f_out),
        [n] => (*n, 1),
        _ => (1, 1),
    }
}
