//! Finite-difference checks for every differentiable op.
//!
//! Each case builds a small expression ending in a scalar, compares the
//! tape's analytic gradient against central differences, and requires
//! relative agreement better than 1e-5. Inputs are resampled until they
//! sit far from kinks (relu corners, pooling ties) so the numeric
//! derivative is well defined.

use gfcn_tensor::fd::{finite_diff, max_rel_err};
use gfcn_tensor::{SegmentMode, Tape, Tensor, TensorId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

const TOL: f64 = 1e-5;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform values in [-2, 2] with every value at least `gap` away from
/// zero and from every other value.
fn separated(r: &mut ChaCha8Rng, len: usize, gap: f64) -> Vec<f64> {
    loop {
        let vals: Vec<f64> = (0..len).map(|_| r.gen_range(-2.0..2.0)).collect();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let ok = sorted.iter().all(|v| v.abs() > gap)
            && sorted.windows(2).all(|w| w[1] - w[0] > gap);
        if ok {
            return vals;
        }
    }
}

fn tensor(r: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let len = shape.iter().product();
    Tensor::new(shape, separated(r, len, 1e-3)).unwrap()
}

/// Checks d(build)/d(input) for every input against central differences.
fn check(inputs: &[Tensor], build: &dyn Fn(&mut Tape, &[TensorId]) -> TensorId) {
    let mut tape = Tape::new();
    let ids: Vec<TensorId> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let root = build(&mut tape, &ids);
    let grads = tape.backward(root).expect("backward");

    for (which, input) in inputs.iter().enumerate() {
        let analytic = grads
            .get(ids[which])
            .unwrap_or_else(|| panic!("no gradient for input {}", which));
        let numeric = finite_diff(input, |probe| {
            let mut t = Tape::new();
            let ids: Vec<TensorId> = inputs
                .iter()
                .enumerate()
                .map(|(i, orig)| t.param(if i == which { probe.clone() } else { orig.clone() }))
                .collect();
            let root = build(&mut t, &ids);
            t.value(root).scalar_value()
        });
        let err = max_rel_err(analytic, &numeric);
        assert!(
            err < TOL,
            "input {}: max relative error {:.3e} (analytic {:?}, numeric {:?})",
            which,
            err,
            analytic.data(),
            numeric.data()
        );
    }
}

/// Contract a non-scalar node to a scalar with fixed random weights so
/// the upstream gradient is not all ones.
fn contract(tape: &mut Tape, id: TensorId, weights: &Tensor) -> TensorId {
    let w = tape.leaf(weights.clone());
    let prod = tape.mul(id, w).unwrap();
    tape.sum_all(prod)
}

#[test]
fn elementwise_binary_ops() {
    let mut r = rng(11);
    for case in 0..100 {
        let shape = vec![r.gen_range(1..4), r.gen_range(1..5)];
        let a = tensor(&mut r, shape.clone());
        let mut b = tensor(&mut r, shape.clone());
        // keep divisions well conditioned
        for x in b.data_mut() {
            if x.abs() < 0.3 {
                *x = 0.3 * x.signum();
            }
        }
        let w = tensor(&mut r, shape.clone());
        let op = case % 4;
        check(&[a, b], &move |t, ids| {
            let y = match op {
                0 => t.add(ids[0], ids[1]).unwrap(),
                1 => t.sub(ids[0], ids[1]).unwrap(),
                2 => t.mul(ids[0], ids[1]).unwrap(),
                _ => t.div(ids[0], ids[1]).unwrap(),
            };
            contract(t, y, &w)
        });
    }
}

#[test]
fn unary_ops() {
    let mut r = rng(12);
    for case in 0..100 {
        let shape = vec![r.gen_range(1..4), r.gen_range(1..5)];
        let a = tensor(&mut r, shape.clone());
        let w = tensor(&mut r, shape.clone());
        let factor = r.gen_range(-2.0..2.0);
        let slope = r.gen_range(0.01..0.5);
        let op = case % 5;
        check(&[a], &move |t, ids| {
            if op == 4 {
                let len = t.value(ids[0]).len();
                let y = t.reshape(ids[0], vec![len]).unwrap();
                let flat_w = Tensor::new(vec![len], w.data().to_vec()).unwrap();
                return contract(t, y, &flat_w);
            }
            let y = match op {
                0 => t.scale(ids[0], factor),
                1 => t.exp(ids[0]),
                2 => t.relu(ids[0]),
                _ => t.leaky_relu(ids[0], slope),
            };
            contract(t, y, &w)
        });
    }
}

#[test]
fn matmul_and_dense() {
    let mut r = rng(13);
    for _ in 0..60 {
        let (m, k, n) = (r.gen_range(1..4), r.gen_range(1..4), r.gen_range(1..4));
        let x = tensor(&mut r, vec![m, k]);
        let wmat = tensor(&mut r, vec![k, n]);
        let b = tensor(&mut r, vec![n]);
        let w = tensor(&mut r, vec![m, n]);
        check(&[x, wmat, b], &move |t, ids| {
            let y = t.dense(ids[0], ids[1], ids[2]).unwrap();
            contract(t, y, &w)
        });
    }
}

#[test]
fn conv1d_gradients() {
    let mut r = rng(14);
    for _ in 0..100 {
        let len = r.gen_range(2..8);
        let c_in = r.gen_range(1..3);
        let c_out = r.gen_range(1..3);
        let taps = r.gen_range(1..=len.min(4));
        let stride = r.gen_range(1..3);
        let padding = r.gen_range(0..2);
        if len + 2 * padding < taps {
            continue;
        }
        let signal = tensor(&mut r, vec![len, c_in]);
        let filter = tensor(&mut r, vec![taps, c_in, c_out]);
        let bias = tensor(&mut r, vec![c_out]);
        let out_len = (len + 2 * padding - taps) / stride + 1;
        let w = tensor(&mut r, vec![out_len, c_out]);
        check(&[signal, filter, bias], &move |t, ids| {
            let y = t
                .conv1d(ids[0], ids[1], Some(ids[2]), stride, padding)
                .unwrap();
            contract(t, y, &w)
        });
    }
}

#[test]
fn pool1d_gradients() {
    let mut r = rng(15);
    for case in 0..100 {
        let len = r.gen_range(1..9);
        let c = r.gen_range(1..3);
        let n = r.gen_range(1..5);
        let stride = r.gen_range(1..4);
        let max = case % 2 == 0;
        let input = tensor(&mut r, vec![len, c]);
        let out_len = len.div_ceil(stride);
        let w = tensor(&mut r, vec![out_len, c]);
        check(&[input], &move |t, ids| {
            let y = t.pool1d(ids[0], n, stride, max).unwrap();
            contract(t, y, &w)
        });
    }
}

#[test]
fn softmax_family() {
    let mut r = rng(16);
    for case in 0..100 {
        let rows = r.gen_range(1..4);
        let cols = r.gen_range(2..6);
        let x = tensor(&mut r, vec![rows, cols]);
        let w = tensor(&mut r, vec![rows, cols]);
        let labels: Vec<usize> = (0..rows).map(|_| r.gen_range(0..cols)).collect();
        let op = case % 3;
        check(&[x], &move |t, ids| match op {
            0 => {
                let y = t.softmax(ids[0]);
                contract(t, y, &w)
            }
            1 => {
                let y = t.log_softmax(ids[0]);
                contract(t, y, &w)
            }
            _ => t.cross_entropy_loss(ids[0], &labels).unwrap(),
        });
    }
}

#[test]
fn mse_gradients() {
    let mut r = rng(17);
    for _ in 0..50 {
        let shape = vec![r.gen_range(1..4), r.gen_range(1..5)];
        let pred = tensor(&mut r, shape.clone());
        let target = tensor(&mut r, shape.clone());
        check(&[pred, target], &|t, ids| {
            t.mse_loss(ids[0], ids[1]).unwrap()
        });
    }
}

#[test]
fn row_rearrangement_ops() {
    let mut r = rng(18);
    for case in 0..100 {
        let m = r.gen_range(2..6);
        let n = r.gen_range(1..4);
        let x = tensor(&mut r, vec![m, n]);
        match case % 4 {
            0 => {
                // gather with repeats
                let rows: Vec<usize> = (0..r.gen_range(1..7)).map(|_| r.gen_range(0..m)).collect();
                let w = tensor(&mut r, vec![rows.len(), n]);
                check(&[x], &move |t, ids| {
                    let y = t.gather_rows(ids[0], &rows).unwrap();
                    contract(t, y, &w)
                });
            }
            1 => {
                let start = r.gen_range(0..m);
                let len = r.gen_range(1..=m - start);
                let w = tensor(&mut r, vec![len, n]);
                check(&[x], &move |t, ids| {
                    let y = t.slice_rows(ids[0], start, len).unwrap();
                    contract(t, y, &w)
                });
            }
            2 => {
                let offset = r.gen_range(-2..=2isize);
                let w = tensor(&mut r, vec![m, n]);
                check(&[x], &move |t, ids| {
                    let y = t.shift_rows(ids[0], offset).unwrap();
                    contract(t, y, &w)
                });
            }
            _ => {
                let rows2 = r.gen_range(1..4);
                let x2 = tensor(&mut r, vec![rows2, n]);
                let rows = m + x2.shape()[0];
                let w = tensor(&mut r, vec![rows, n]);
                check(&[x, x2], &move |t, ids| {
                    let y = t.concat_rows(&[ids[0], ids[1], ids[0]]).unwrap();
                    let w3 = {
                        let mut data = w.data().to_vec();
                        data.extend_from_slice(&w.data()[..m * n]);
                        Tensor::new(vec![rows + m, n], data).unwrap()
                    };
                    contract(t, y, &w3)
                });
            }
        }
    }
}

#[test]
fn row_scale_gradients() {
    let mut r = rng(19);
    for _ in 0..60 {
        let m = r.gen_range(1..6);
        let n = r.gen_range(1..4);
        let x = tensor(&mut r, vec![m, n]);
        let s = tensor(&mut r, vec![m]);
        let w = tensor(&mut r, vec![m, n]);
        check(&[x, s], &move |t, ids| {
            let y = t.row_scale(ids[0], ids[1]).unwrap();
            contract(t, y, &w)
        });
    }
}

#[test]
fn segment_reduce_gradients() {
    let mut r = rng(20);
    for case in 0..120 {
        let m = r.gen_range(2..8);
        let n = r.gen_range(1..4);
        let x = tensor(&mut r, vec![m, n]);
        let segments: Vec<usize> = (0..m).map(|_| r.gen_range(0..4)).collect();
        let mode = match case % 3 {
            0 => SegmentMode::Sum,
            1 => SegmentMode::Avg,
            _ => SegmentMode::Max,
        };
        let w = tensor(&mut r, vec![m, n]);
        check(&[x], &move |t, ids| {
            let y = t.segment_reduce(ids[0], &segments, mode).unwrap();
            contract(t, y, &w)
        });
    }
}

#[test]
fn add_row_bias_gradients() {
    let mut r = rng(21);
    for _ in 0..50 {
        let m = r.gen_range(1..5);
        let n = r.gen_range(1..4);
        let x = tensor(&mut r, vec![m, n]);
        let b = tensor(&mut r, vec![n]);
        let w = tensor(&mut r, vec![m, n]);
        check(&[x, b], &move |t, ids| {
            let y = t.add_row(ids[0], ids[1]).unwrap();
            contract(t, y, &w)
        });
    }
}

/// A value feeding several branches must receive the sum of the branch
/// gradients; the same expression written with duplicated leaves must
/// agree.
#[test]
fn shared_subexpression_matches_unrolled() {
    let mut r = rng(22);
    for _ in 0..40 {
        let shape = vec![r.gen_range(1..4), r.gen_range(1..4)];
        let x = tensor(&mut r, shape.clone());

        let mut shared = Tape::new();
        let xs = shared.param(x.clone());
        let e = shared.exp(xs);
        let m = shared.mul(e, e).unwrap();
        let a = shared.add(m, xs).unwrap();
        let root = shared.sum_all(a);
        let g_shared = shared.backward(root).unwrap();

        let numeric = finite_diff(&x, |probe| {
            let mut t = Tape::new();
            let xp = t.param(probe.clone());
            let e = t.exp(xp);
            let m = t.mul(e, e).unwrap();
            let a = t.add(m, xp).unwrap();
            let root = t.sum_all(a);
            t.value(root).scalar_value()
        });
        let err = max_rel_err(g_shared.get(xs).unwrap(), &numeric);
        assert!(err < TOL, "shared-subexpression gradient off by {:.3e}", err);
    }
}

/// A small end-to-end network: conv, pool, dense, cross-entropy.
#[test]
fn chained_network_end_to_end() {
    let mut r = rng(23);
    for _ in 0..20 {
        let len = r.gen_range(5..9);
        let signal = tensor(&mut r, vec![len, 2]);
        let filter = tensor(&mut r, vec![3, 2, 3]);
        let bias = tensor(&mut r, vec![3]);
        let pooled_len = len.div_ceil(2);
        let dense_w = tensor(&mut r, vec![pooled_len * 3, 4]);
        let dense_b = tensor(&mut r, vec![4]);
        let label = r.gen_range(0..4);
        check(&[signal, filter, bias, dense_w, dense_b], &move |t, ids| {
            let y = t.conv1d(ids[0], ids[1], Some(ids[2]), 1, 1).unwrap();
            let y = t.relu(y);
            let y = t.pool1d(y, 3, 2, true).unwrap();
            let flat = t.reshape(y, vec![1, pooled_len * 3]).unwrap();
            let logits = t.dense(flat, ids[3], ids[4]).unwrap();
            t.cross_entropy_loss(logits, &[label]).unwrap()
        });
    }
}

/// Constants must not accumulate gradients, and their branches must not
/// disturb the parameter gradient.
#[test]
fn leaves_do_not_collect_gradients() {
    let mut r = rng(24);
    let x = tensor(&mut r, vec![2, 3]);
    let c = tensor(&mut r, vec![2, 3]);
    let mut tape = Tape::new();
    let xp = tape.param(x.clone());
    let cl = tape.leaf(c.clone());
    let y = tape.mul(xp, cl).unwrap();
    let root = tape.sum_all(y);
    let grads = tape.backward(root).unwrap();
    assert!(grads.get(cl).is_none());
    let gx = grads.get(xp).unwrap();
    for (g, expect) in gx.data().iter().zip(c.data()) {
        assert!((g - expect).abs() < 1e-12);
    }
}

#[test]
fn backward_rejects_non_scalar_root() {
    let mut tape = Tape::new();
    let x = tape.param(Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
    let y = tape.relu(x);
    assert!(tape.backward(y).is_err());
}
