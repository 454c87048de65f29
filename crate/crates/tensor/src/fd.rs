//! Central finite differences, used by the test suites to check the
//! analytic gradients.

use crate::Tensor;

/// Numerically differentiate `f` at `x` by central differences,
/// perturbing one coordinate at a time.
pub fn finite_diff(x: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Tensor {
    let mut grad = Tensor::zeros(x.shape().to_vec());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = x.data()[i];
        let h = 1e-6 * (1.0 + orig.abs());
        probe.data_mut()[i] = orig + h;
        let up = f(&probe);
        probe.data_mut()[i] = orig - h;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        grad.data_mut()[i] = (up - down) / (2.0 * h);
    }
    grad
}

/// Largest relative disagreement between an analytic and a numeric
/// gradient, with an absolute floor of 1 so that near-zero entries
/// compare absolutely.
pub fn max_rel_err(analytic: &Tensor, numeric: &Tensor) -> f64 {
    assert_eq!(analytic.shape(), numeric.shape(), "gradient shapes differ");
    analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}
