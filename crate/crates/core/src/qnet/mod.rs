//! Closed-form integrals of a [`ProxyNet`] over hyperrectangles.
//!
//! The integral of one neuron `sigma(w . x + c)` over `[-1, 1]^n` is
//!
//! ```text
//! 2^n + (1 / prod_j w_j) sum_m alpha_m Li_n(-exp(S_m . w - c))
//! ```
//!
//! where the rows `S_m` enumerate the cube's vertices and `alpha_m = +1` for
//! rows with an even number of `-1` entries. The sum is a fixed-weight network
//! ([`qnet_apply`]) whose input is the neuron's weight row and bias.
//!
//! [`integrate`] and friends evaluate this per neuron with a few safeguards
//! the bare formula lacks: the box is re-centred so the formula always acts on
//! a symmetric cube; the complement identity `sigma(z) = 1 - sigma(-z)` picks
//! whichever side keeps the polylog terms small; and dimensions along which the
//! neuron is nearly flat (where dividing by `prod_j w_j` would amplify rounding
//! error) are integrated with a short Gauss-Legendre rule instead. The
//! result is exact to rounding in either path because the neuron is analytic
//! with its nearest singularity at distance `pi / |w_j|`.

mod closed_form;
mod marginal;
mod segment;

pub use closed_form::{integrate_1d_softplus, integrate_2d_dilog};
pub use marginal::{marginalize, MarginalFn, MarginalSpec};
pub use segment::{integrate_segment, SegmentIntegral};

use crate::error::{Error, Result};
use crate::polylog::{li_neg_exp_unchecked, MAX_ORDER};
use crate::proxy::{sigmoid, Hyperrect, ProxyNet};
use crate::quadrature::GaussLegendre;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Weights below this magnitude (after scaling by the box half-width) make a
/// neuron constant along that dimension.
pub const FLAT_WEIGHT: f64 = 1e-8;

/// Scaled weights below this are integrated by Gauss-Legendre.
const SHALLOW_WEIGHT: f64 = 0.5;
const SHALLOW_NODES: usize = 10;
/// Cap on quadrature dimensions per neuron (the rule has `10^m` points).
const MAX_SHALLOW_DIMS: usize = 3;

fn shallow_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(SHALLOW_NODES))
}

/// Vertices of `[-1, 1]^r` with inclusion-exclusion signs.
///
/// Row `m` is the binary expansion of `m` read most-significant bit first,
/// with a set bit meaning the lower limit `-1`. `alpha_m = +1` when the row
/// holds an even number of `-1` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    r: usize,
}

impl SignMatrix {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 || r > MAX_ORDER {
            return Err(Error::InvalidArgument(format!("sign matrix order must be in 1..={MAX_ORDER}, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> usize {
        1 << self.r
    }

    /// Entry `(m, j)`: `+1` for the upper limit, `-1` for the lower.
    #[inline]
    pub fn entry(&self, m: usize, j: usize) -> f64 {
        if (m >> (self.r - 1 - j)) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn row(&self, m: usize) -> Vec<f64> {
        (0..self.r).map(|j| self.entry(m, j)).collect()
    }

    #[inline]
    pub fn alpha(&self, m: usize) -> f64 {
        if m.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Row `m` with `-1` replaced by `a_j` and `+1` by `b_j`.
    pub fn vertex(&self, m: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.r).map(|j| if self.entry(m, j) < 0.0 { a[j] } else { b[j] }).collect()
    }
}

/// Convenience constructor matching [`SignMatrix::new`].
pub fn sign_matrix(r: usize) -> Result<SignMatrix> {
    SignMatrix::new(r)
}

/// The fixed-weight network `sum_m alpha_m Li_r(-exp(S_m . y[..r] - y[r]))`.
pub fn qnet_apply(r: usize, y: &[f64]) -> Result<f64> {
    let s = SignMatrix::new(r)?;
    if y.len() != r + 1 {
        return Err(Error::DimensionMismatch { expected: r + 1, got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Q-NET input"));
    }
    let (w, bias) = (&y[..r], y[r]);
    let mut acc = 0.0;
    for m in 0..s.rows() {
        let z: f64 = (0..r).map(|j| s.entry(m, j) * w[j]).sum::<f64>() - bias;
        acc += s.alpha(m) * li_neg_exp_unchecked(r, z);
    }
    Ok(acc)
}

/// Integral over `[-1, 1]^d` straight from the vertex formula, one
/// [`qnet_apply`] per neuron. Produces non-finite output when a hidden
/// weight is exactly zero; [`integrate`] handles those cases.
pub fn integrate_direct(net: &ProxyNet) -> Result<f64> {
    let d = net.dim();
    let cube = 2f64.powi(d as i32);
    let mut y = vec![0.0; d + 1];
    let mut total = cube * net.b2();
    for i in 0..net.neurons() {
        let row = net.w1_row(i);
        y[..d].copy_from_slice(row);
        y[d] = net.b1()[i];
        let prod: f64 = row.iter().product();
        let v = cube + qnet_apply(d, &y)? / prod;
        total += net.w2()[i] * v;
    }
    Ok(total)
}

/// Exact integral of the network over `[-1, 1]^d`.
pub fn integrate(net: &ProxyNet) -> Result<f64> {
    integrate_box(net, &Hyperrect::symmetric(net.dim()))
}

/// Exact integral of the network over a box inside `[-1, 1]^d`.
pub fn integrate_box(net: &ProxyNet, region: &Hyperrect) -> Result<f64> {
    let d = net.dim();
    if region.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: region.dim() });
    }
    if d > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("at most {MAX_ORDER} dimensions can be integrated")));
    }
    for j in 0..d {
        let slack = 1e-12;
        if region.lower()[j] < -1.0 - slack || region.upper()[j] > 1.0 + slack {
            return Err(Error::OutsideDomain(j));
        }
    }
    let v = neuron_integrals(net, |i| {
        neuron_box_integral(net.w1_row(i), net.b1()[i], region.lower(), region.upper())
    });
    Ok(weighted_sum(net.w2(), &v) + region.volume() * net.b2())
}

/// Per-neuron values, in neuron order; parallel for large networks.
pub(crate) fn neuron_integrals<F>(net: &ProxyNet, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync,
{
    let work = net.neurons() << net.dim().min(20);
    if work >= 4096 {
        (0..net.neurons()).into_par_iter().map(&f).collect()
    } else {
        (0..net.neurons()).map(f).collect()
    }
}

/// `sum_i w_i v_i` with pairwise summation (order fixed by the index).
pub(crate) fn weighted_sum(w: &[f64], v: &[f64]) -> f64 {
    fn pairwise(terms: &[f64]) -> f64 {
        if terms.len() <= 8 {
            return terms.iter().sum();
        }
        let mid = terms.len() / 2;
        pairwise(&terms[..mid]) + pairwise(&terms[mid..])
    }
    let terms: Vec<f64> = w.iter().zip(v).map(|(a, b)| a * b).collect();
    pairwise(&terms)
}

/// `int_[lower, upper] sigmoid(w . x + c) dx` for one neuron.
pub(crate) fn neuron_box_integral(w: &[f64], c: f64, lower: &[f64], upper: &[f64]) -> f64 {
    let r = w.len();
    let mut jac = 1.0;
    let mut shift = c;
    let mut scaled = Vec::with_capacity(r);
    for j in 0..r {
        let half = 0.5 * (upper[j] - lower[j]);
        let mid = 0.5 * (upper[j] + lower[j]);
        jac *= half;
        shift += w[j] * mid;
        // the cube is symmetric, so the sign of each weight can be dropped
        scaled.push((w[j] * half).abs());
    }
    jac * cube_integral(scaled, shift)
}

/// `int_[-1,1]^r sigmoid(u . t + beta) dt` for non-negative `u`.
pub(crate) fn cube_integral(mut u: Vec<f64>, beta: f64) -> f64 {
    let r = u.len();
    let volume = 2f64.powi(r as i32);
    // flat directions contribute their width; the linear term integrates to zero
    u.retain(|&v| v >= FLAT_WEIGHT);
    let flat_factor = 2f64.powi((r - u.len()) as i32);
    if u.is_empty() {
        return flat_factor * sigmoid(beta);
    }
    u.sort_by(|a, b| a.total_cmp(b));
    let shallow = u.iter().take(MAX_SHALLOW_DIMS).filter(|&&v| v < SHALLOW_WEIGHT).count();
    let value = flat_factor * mixed_integral(&u, shallow, beta);
    let tol = 1e-6 * volume;
    if value >= -tol && value <= volume + tol {
        return value.clamp(0.0, volume);
    }
    // Cancellation in the closed form: move every shallow dimension to quadrature.
    let all_shallow = u.iter().filter(|&&v| v < SHALLOW_WEIGHT).count();
    let retry = flat_factor * mixed_integral(&u, all_shallow.max(shallow), beta);
    retry.clamp(0.0, volume)
}

/// Gauss-Legendre over the first `q` entries of `u`, closed form over the rest.
fn mixed_integral(u: &[f64], q: usize, beta: f64) -> f64 {
    let (shallow, steep) = u.split_at(q);
    if q == 0 {
        return closed_cube(steep, beta);
    }
    let rule = shallow_rule();
    let n = rule.len();
    let mut idx = vec![0usize; q];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        let mut shift = beta;
        for (j, &i) in idx.iter().enumerate() {
            weight *= rule.weights[i];
            shift += shallow[j] * rule.nodes[i];
        }
        let inner = if steep.is_empty() { sigmoid(shift) } else { closed_cube(steep, shift) };
        total += weight * inner;
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == q {
                return total;
            }
        }
    }
}

/// Closed form over `[-1, 1]^n` for weights bounded away from zero.
fn closed_cube(u: &[f64], beta: f64) -> f64 {
    let n = u.len();
    let signs = SignMatrix { r: n };
    let prod: f64 = u.iter().product();
    // sigma(z) = 1 - sigma(-z) and t -> -t: keep the exponents on the small side
    let (offset, sign, bias) = if beta <= 0.0 {
        (0.0, -1.0, beta)
    } else {
        (2f64.powi(n as i32), 1.0, -beta)
    };
    let mut acc = 0.0;
    for m in 0..signs.rows() {
        let mut z = bias;
        for (j, uj) in u.iter().enumerate() {
            z += signs.entry(m, j) * uj;
        }
        acc += signs.alpha(m) * li_neg_exp_unchecked(n, z);
    }
    offset + sign * acc / prod
}
