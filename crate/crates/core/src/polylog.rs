//! Polylogarithm of a negated exponential, `Li_d(-e^x)`, for integer orders.
//!
//! This is the activation of every fixed-weight integration network: the
//! `d`-fold antiderivative of the logistic sigmoid is `-Li_d(-e^x)`.
//! For real `x` the value is always negative.
//!
//! Evaluation uses three regimes:
//!
//! * `x <= -ln 2`: the defining series `sum_k (-e^x)^k / k^d`, with `|z| <= 1/2`.
//! * `-ln 2 < x <= 0`: the same alternating series summed with the
//!   Cohen-Villegas-Zagier acceleration (the coefficients `e^{kx}/k^d` form a
//!   moment sequence, so the error decays like `5.8^-n`).
//! * `x > 0`: the inversion formula
//!   `Li_d(-e^x) = -(-1)^d Li_d(-e^{-x}) - x^d/d! - 2 sum_k eta(2k) x^{d-2k}/(d-2k)!`,
//!   which reduces to one of the two cases above. For large `x` the first
//!   term is exponentially small and what remains is the asymptotic
//!   polynomial with Bernoulli-number (Dirichlet eta) coefficients.

use crate::error::{Error, Result};
use std::f64::consts::LN_2;

/// Largest supported order.
pub const MAX_ORDER: usize = 16;

/// Dirichlet eta at even arguments, `eta(2k) = (1 - 2^{1-2k}) zeta(2k)`, k = 1..=8.
const ETA_EVEN: [f64; 8] = [
    0.822_467_033_424_113_2,
    0.947_032_829_497_245_9,
    0.985_551_091_297_435_1,
    0.996_233_001_852_647_9,
    0.999_039_507_598_271_6,
    0.999_757_685_143_858_2,
    0.999_939_170_345_979_7,
    0.999_984_764_214_906_1,
];

/// Number of terms in the accelerated alternating sum.
const CVZ_TERMS: usize = 24;

/// Integer polylogarithm order in `1..=MAX_ORDER`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolylogOrder(usize);

impl PolylogOrder {
    pub fn new(d: usize) -> Result<Self> {
        if (1..=MAX_ORDER).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::OrderOutOfRange(d))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for PolylogOrder {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

/// `Li_d(-e^x)`.
pub fn li_neg_exp(order: PolylogOrder, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("polylog argument"));
    }
    Ok(li_neg_exp_unchecked(order.0, x))
}

/// `Li_d(-e^x)` without argument validation. `d` must be in `1..=MAX_ORDER`.
pub(crate) fn li_neg_exp_unchecked(d: usize, x: f64) -> f64 {
    debug_assert!((1..=MAX_ORDER).contains(&d));
    if d == 1 {
        return -softplus(x);
    }
    if x <= -LN_2 {
        -alternating_series(d, x)
    } else if x <= 0.0 {
        -alternating_accelerated(d, x)
    } else {
        let reflected = if x <= LN_2 {
            -alternating_accelerated(d, -x)
        } else {
            -alternating_series(d, -x)
        };
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        -sign * reflected - inversion_polynomial(d, x)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `sum_{k>=1} (-1)^{k-1} e^{kx} / k^d` for `e^x <= 1/2`.
fn alternating_series(d: usize, x: f64) -> f64 {
    let z = x.exp();
    if z == 0.0 {
        return 0.0;
    }
    let mut zk = z;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200u32 {
        let term = zk / powi_usize(k as f64, d);
        sum += sign * term;
        // Alternating with decreasing terms: the tail is bounded by the next term.
        if term <= 1e-18 * sum.abs() {
            break;
        }
        zk *= z;
        sign = -sign;
    }
    sum
}

/// Cohen-Villegas-Zagier summation of `sum_{k>=0} (-1)^k a_k`,
/// `a_k = e^{(k+1)x} / (k+1)^d`, valid for `x <= 0`.
fn alternating_accelerated(d: usize, x: f64) -> f64 {
    let n = CVZ_TERMS as f64;
    let mut dd = (3.0 + 8f64.sqrt()).powf(n);
    dd = 0.5 * (dd + 1.0 / dd);
    let mut b = -1.0;
    let mut c = -dd;
    let mut s = 0.0;
    for k in 0..CVZ_TERMS {
        let kf = k as f64;
        let m = kf + 1.0;
        let a = (m * x).exp() / powi_usize(m, d);
        c = b - c;
        s += c * a;
        b = (kf + n) * (kf - n) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / dd
}

/// `x^d/d! + 2 sum_{k=1}^{d/2} eta(2k) x^{d-2k}/(d-2k)!`.
fn inversion_polynomial(d: usize, x: f64) -> f64 {
    // x^j / j! for j = 0..=d
    let mut scaled = [0.0f64; MAX_ORDER + 1];
    scaled[0] = 1.0;
    for j in 1..=d {
        scaled[j] = scaled[j - 1] * x / j as f64;
    }
    let mut acc = scaled[d];
    for k in 1..=d / 2 {
        acc += 2.0 * ETA_EVEN[k - 1] * scaled[d - 2 * k];
    }
    acc
}

fn powi_usize(base: f64, exp: usize) -> f64 {
    base.powi(exp as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn li(d: usize, x: f64) -> f64 {
        li_neg_exp(PolylogOrder::new(d).unwrap(), x).unwrap()
    }

    #[test]
    fn order_bounds() {
        assert!(PolylogOrder::new(0).is_err());
        assert!(PolylogOrder::new(MAX_ORDER + 1).is_err());
        assert_eq!(PolylogOrder::new(16).unwrap().get(), 16);
    }

    #[test]
    fn rejects_non_finite() {
        let d = PolylogOrder::new(2).unwrap();
        assert!(li_neg_exp(d, f64::NAN).is_err());
        assert!(li_neg_exp(d, f64::INFINITY).is_err());
    }

    #[test]
    fn classical_values() {
        assert!((li(1, 0.0) + LN_2).abs() < 1e-15);
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert!((li(2, 0.0) + pi2 / 12.0).abs() < 1e-15);
        // Li_d(-1) = -eta(d)
        for k in 1..=8 {
            assert!((li(2 * k, 0.0) + ETA_EVEN[k - 1]).abs() < 1e-15, "order {}", 2 * k);
        }
    }

    #[test]
    fn small_argument_leading_terms() {
        let z = (-30f64).exp();
        let two_terms = -z + z * z / 8.0;
        let v = li(3, -30.0);
        assert!(((v - two_terms) / two_terms).abs() < 1e-16);
        assert!(((v + z) / z).abs() < 2e-14);
    }

    #[test]
    fn softplus_values() {
        assert!((softplus(0.0) - LN_2).abs() < 1e-16);
        assert!((softplus(100.0) - 100.0).abs() < 1e-15);
        assert!((softplus(-5.0) - 0.006_715_348_489_118_068_6).abs() < 1e-17);
        for &x in &[-40.0, -3.0, -0.2, 0.0, 0.7, 12.0, 700.0] {
            assert!((softplus(x) - softplus(-x) - x).abs() <= 1e-12);
            assert!((softplus(x) + li(1, x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn order_four_at_two_and_a_half() {
        // mpmath.polylog(4, -exp(2.5)) at 40 digits
        assert!((li(4, 2.5) - (-8.580_418_251_030_196)).abs() < 1e-13);
    }

    #[test]
    fn regimes_agree_at_switch_points() {
        for d in 2..=MAX_ORDER {
            for &x in &[-LN_2, 0.0, LN_2] {
                let lo = li(d, x - 1e-12);
                let hi = li(d, x + 1e-12);
                assert!((lo - hi).abs() < 1e-11, "d={d} x={x}: {lo} vs {hi}");
            }
        }
    }

    #[test]
    fn dilog_reflection() {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        for i in 0..=500 {
            let x = 0.1 * i as f64;
            let lhs = li(2, x) + li(2, -x);
            let rhs = -x * x / 2.0 - pi2 / 6.0;
            assert!((lhs - rhs).abs() <= 1e-10, "x={x}");
        }
    }
}
