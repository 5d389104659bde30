//! Hand-expanded integrals for one and two dimensions, used to cross-check
//! the general vertex formula.

use crate::error::{Error, Result};
use crate::polylog::{li_neg_exp_unchecked, softplus};
use crate::proxy::ProxyNet;

/// `sum_i (w2_i / w1_i) [softplus(w1_i + b1_i) - softplus(-w1_i + b1_i)] + 2 b2`.
pub fn integrate_1d_softplus(net: &ProxyNet) -> Result<f64> {
    if net.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: net.dim() });
    }
    let mut total = 2.0 * net.b2();
    for i in 0..net.neurons() {
        let (w, b) = (net.w1()[i], net.b1()[i]);
        total += net.w2()[i] / w * (softplus(w + b) - softplus(-w + b));
    }
    Ok(total)
}

/// Two-dimensional form: `4 w2 + 4 b2 + w2 psi / (w^1 w^2)` per neuron, with
/// `psi = Li2(-e^{w1+w2-b}) - Li2(-e^{w1-w2-b}) - Li2(-e^{-w1+w2-b}) + Li2(-e^{-w1-w2-b})`.
pub fn integrate_2d_dilog(net: &ProxyNet) -> Result<f64> {
    if net.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: net.dim() });
    }
    let li2 = |x: f64| li_neg_exp_unchecked(2, x);
    let mut total = 4.0 * net.b2();
    for i in 0..net.neurons() {
        let (u, v) = (net.w1_row(i)[0], net.w1_row(i)[1]);
        let b = net.b1()[i];
        let psi = li2(u + v - b) - li2(u - v - b) - li2(-u + v - b) + li2(-u - v - b);
        total += net.w2()[i] * (4.0 + psi / (u * v));
    }
    Ok(total)
}
