//! A trained network together with its [`DomainMap`], answering queries in
//! the caller's coordinates.

use crate::error::{Error, Result};
use crate::proxy::{default_neuron_count, fit, DomainMap, FitReport, Hyperrect, ProxyNet, TrainConfig, WeightFile};
use crate::qnet::{integrate, integrate_box, integrate_segment, marginalize, MarginalFn};

#[derive(Debug, Clone, PartialEq)]
pub struct Proxy {
    net: ProxyNet,
    map: DomainMap,
}

impl Proxy {
    pub fn new(net: ProxyNet, map: DomainMap) -> Result<Self> {
        if net.dim() != map.dim() {
            return Err(Error::DimensionMismatch { expected: net.dim(), got: map.dim() });
        }
        Ok(Self { net, map })
    }

    /// Fits a network to raw samples (`N x d` row-major `inputs`) on `region`.
    /// `k = None` uses [`default_neuron_count`].
    pub fn train(
        region: &Hyperrect,
        inputs: &[f64],
        targets: &[f64],
        k: Option<usize>,
        cfg: &TrainConfig,
    ) -> Result<(Self, FitReport)> {
        let map = DomainMap::from_targets(region, targets)?;
        let samples = map.normalize(inputs, targets)?;
        let k = k.unwrap_or_else(|| default_neuron_count(samples.len(), region.dim()));
        let report = fit(&samples, k, cfg)?;
        Ok((Self { net: report.net.clone(), map }, report))
    }

    pub fn from_weight_file(file: &WeightFile) -> Result<Self> {
        Self::new(file.net()?, file.domain_map.clone())
    }

    pub fn weight_file(&self) -> Result<WeightFile> {
        WeightFile::new(&self.net, self.map.clone())
    }

    pub fn net(&self) -> &ProxyNet {
        &self.net
    }

    pub fn map(&self) -> &DomainMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.net.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.map.denormalize_value(self.net.eval_unchecked(&self.map.normalize_point(x))))
    }

    /// Integral over the whole domain.
    pub fn integral(&self) -> Result<f64> {
        Ok(self.map.denormalize_estimate(integrate(&self.net)?))
    }

    /// Integral over a box inside the domain.
    pub fn integral_box(&self, region: &Hyperrect) -> Result<f64> {
        let nb = self.map.normalize_box(region)?;
        let mu = integrate_box(&self.net, &nb)?;
        Ok(self.map.denormalize_partial(mu, nb.volume()))
    }

    /// Marginal over `dims` (0-based), evaluated at `x_rest` (the other
    /// coordinates in increasing order).
    pub fn marginal(&self, dims: &[usize]) -> Result<ProxyMarginal> {
        let inner = marginalize(&self.net, dims)?;
        let width: f64 = dims.iter().map(|&j| 0.5 * (self.map.upper[j] - self.map.lower[j])).product();
        Ok(ProxyMarginal { inner, width, map: self.map.clone() })
    }

    /// Line integral from `p0` to `p1`; the flag reports clipping at the domain boundary.
    pub fn segment(&self, p0: &[f64], p1: &[f64]) -> Result<(f64, bool)> {
        self.check_len(p0.len())?;
        self.check_len(p1.len())?;
        let (q0, q1) = (self.map.normalize_point(p0), self.map.normalize_point(p1));
        let s = integrate_segment(&self.net, &q0, &q1)?;
        if s.length == 0.0 {
            return Ok((0.0, s.clipped));
        }
        let normalized_len = q0.iter().zip(&q1).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        let true_len = p0.iter().zip(p1).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        // arc length in true units per unit of normalized arc length
        let stretch = true_len / normalized_len;
        let (a, b) = self.value_affine();
        Ok((stretch * (a * s.value + b * s.length), s.clipped))
    }

    /// `(a, b)` with `f = a f_hat + b`.
    fn value_affine(&self) -> (f64, f64) {
        let a = 0.5 * (self.map.range_hi - self.map.range_lo);
        (a, a + self.map.range_lo)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: n });
        }
        Ok(())
    }
}

/// A marginal of a [`Proxy`] in true coordinates.
#[derive(Debug, Clone)]
pub struct ProxyMarginal {
    inner: MarginalFn,
    /// Product of the half-widths of the integrated dims.
    width: f64,
    map: DomainMap,
}

impl ProxyMarginal {
    pub fn remaining_dims(&self) -> &[usize] {
        self.inner.remaining_dims()
    }

    pub fn integrated_dims(&self) -> &[usize] {
        self.inner.integrated_dims()
    }

    pub fn inner(&self) -> &MarginalFn {
        &self.inner
    }

    pub fn eval(&self, x_rest: &[f64]) -> Result<f64> {
        let rest = self.inner.remaining_dims();
        if x_rest.len() != rest.len() {
            return Err(Error::DimensionMismatch { expected: rest.len(), got: x_rest.len() });
        }
        let xn: Vec<f64> = rest
            .iter()
            .zip(x_rest)
            .map(|(&j, v)| 2.0 * (v - self.map.lower[j]) / (self.map.upper[j] - self.map.lower[j]) - 1.0)
            .collect();
        let mu = self.inner.eval(&xn)?;
        let cube = 2f64.powi(self.inner.integrated_dims().len() as i32);
        let a = 0.5 * (self.map.range_hi - self.map.range_lo);
        Ok(self.width * (a * mu + (a + self.map.range_lo) * cube))
    }
}
