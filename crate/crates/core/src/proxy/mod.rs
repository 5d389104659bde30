//! One-hidden-layer sigmoidal approximator and its weight-space transforms.
//!
//! A [`ProxyNet`] represents `f(x) = w2 . sigma(W1 x + b1) + b2` with the
//! logistic `sigma`. Affine changes of the input, slicing, and weighted sums of
//! two networks all map to new weights, so none of them require retraining.
//!
//! Dimension indices are zero-based throughout the library.

mod domain;
mod fit;
mod io;

pub use domain::{DomainMap, Hyperrect, SampleSet};
pub use fit::{default_neuron_count, fit, FitReport, Optimizer, TrainConfig};
pub use io::{WeightFile, WEIGHT_FILE_VERSION};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Logistic sigmoid, stable for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weights of a sigmoidal approximator with `k` hidden neurons over `d` inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyNet {
    d: usize,
    k: usize,
    /// Hidden weights, `k x d`, row-major.
    w1: Vec<f64>,
    w2: Vec<f64>,
    b1: Vec<f64>,
    b2: f64,
}

impl ProxyNet {
    pub fn new(d: usize, k: usize, w1: Vec<f64>, w2: Vec<f64>, b1: Vec<f64>, b2: f64) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::Shape(format!("need d >= 1 and k >= 1, got d={d}, k={k}")));
        }
        if w1.len() != k * d {
            return Err(Error::Shape(format!("W1 has {} entries, expected {}", w1.len(), k * d)));
        }
        if w2.len() != k || b1.len() != k {
            return Err(Error::Shape(format!(
                "w2/b1 lengths {}/{} do not match k={k}",
                w2.len(),
                b1.len()
            )));
        }
        let finite = w1.iter().chain(&w2).chain(&b1).all(|v| v.is_finite()) && b2.is_finite();
        if !finite {
            return Err(Error::NonFinite("network weights"));
        }
        Ok(Self { d, k, w1, w2, b1, b2 })
    }

    /// The constant function `c` as a single dead neuron.
    pub fn constant(d: usize, c: f64) -> Result<Self> {
        Self::new(d, 1, vec![0.0; d], vec![0.0], vec![0.0], c)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn neurons(&self) -> usize {
        self.k
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn w1_row(&self, i: usize) -> &[f64] {
        &self.w1[i * self.d..(i + 1) * self.d]
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// Number of trainable parameters, `k (d + 2) + 1`.
    pub fn parameter_count(&self) -> usize {
        self.k * (self.d + 2) + 1
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got });
        }
        Ok(())
    }

    #[inline]
    fn pre_activation(&self, i: usize, x: &[f64]) -> f64 {
        self.w1_row(i).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[i]
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = self.b2;
        for i in 0..self.k {
            acc += self.w2[i] * sigmoid(self.pre_activation(i, x));
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates every row of an `N x d` row-major matrix.
    pub fn eval_batch(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.len() % self.d != 0 {
            return Err(Error::DimensionMismatch { expected: self.d, got: xs.len() % self.d });
        }
        Ok(xs.chunks_exact(self.d).map(|x| self.eval_unchecked(x)).collect())
    }

    /// Analytic input gradient: `sum_i w2_i sigma_i (1 - sigma_i) W1[i, .]`.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mut g = vec![0.0; self.d];
        for i in 0..self.k {
            let s = sigmoid(self.pre_activation(i, x));
            let scale = self.w2[i] * s * (1.0 - s);
            for (gj, w) in g.iter_mut().zip(self.w1_row(i)) {
                *gj += scale * w;
            }
        }
        Ok(g)
    }

    /// Network evaluating `la * a(x) + lb * b(x)`, built by stacking hidden layers.
    pub fn concat(a: &ProxyNet, la: f64, b: &ProxyNet, lb: f64) -> Result<ProxyNet> {
        if a.d != b.d {
            return Err(Error::DimensionMismatch { expected: a.d, got: b.d });
        }
        let mut w1 = a.w1.clone();
        w1.extend_from_slice(&b.w1);
        let mut b1 = a.b1.clone();
        b1.extend_from_slice(&b.b1);
        let w2 = a.w2.iter().map(|w| la * w).chain(b.w2.iter().map(|w| lb * w)).collect();
        ProxyNet::new(a.d, a.k + b.k, w1, w2, b1, la * a.b2 + lb * b.b2)
    }

    /// Network evaluating `x -> self(M x + c)`; `m` is `d x d` row-major.
    pub fn affine_reparam(&self, m: &[f64], c: &[f64]) -> Result<ProxyNet> {
        let d = self.d;
        if m.len() != d * d {
            return Err(Error::Shape(format!("M has {} entries, expected {}", m.len(), d * d)));
        }
        self.check_dim(c.len())?;
        let mut w1 = vec![0.0; self.k * d];
        let mut b1 = self.b1.clone();
        for i in 0..self.k {
            let row = self.w1_row(i);
            for col in 0..d {
                w1[i * d + col] = (0..d).map(|j| row[j] * m[j * d + col]).sum();
            }
            b1[i] += row.iter().zip(c).map(|(w, v)| w * v).sum::<f64>();
        }
        ProxyNet::new(d, self.k, w1, self.w2.clone(), b1, self.b2)
    }

    /// Fixes inputs `dims` to `values`, leaving a network over the remaining
    /// inputs in their original order.
    pub fn slice_reparam(&self, dims: &[usize], values: &[f64]) -> Result<ProxyNet> {
        if dims.len() != values.len() {
            return Err(Error::IndexSet(format!(
                "{} dims but {} values",
                dims.len(),
                values.len()
            )));
        }
        let fixed = validate_index_set(dims, self.d)?;
        if dims.len() >= self.d {
            return Err(Error::IndexSet(format!(
                "cannot slice {} of {} dimensions",
                dims.len(),
                self.d
            )));
        }
        let keep: Vec<usize> = (0..self.d).filter(|j| !fixed[*j]).collect();
        let nd = keep.len();
        let mut w1 = Vec::with_capacity(self.k * nd);
        let mut b1 = self.b1.clone();
        for i in 0..self.k {
            let row = self.w1_row(i);
            w1.extend(keep.iter().map(|&j| row[j]));
            b1[i] += dims.iter().zip(values).map(|(&j, v)| row[j] * v).sum::<f64>();
        }
        ProxyNet::new(nd, self.k, w1, self.w2.clone(), b1, self.b2)
    }
}

/// Checks that `dims` are distinct and below `d`; returns a membership mask.
pub(crate) fn validate_index_set(dims: &[usize], d: usize) -> Result<Vec<bool>> {
    let mut mask = vec![false; d];
    for &j in dims {
        if j >= d {
            return Err(Error::IndexSet(format!("index {j} out of range for d={d}")));
        }
        if mask[j] {
            return Err(Error::IndexSet(format!("index {j} repeated")));
        }
        mask[j] = true;
    }
    Ok(mask)
}
