use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrect {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Hyperrect {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::Shape("box needs at least one dimension".into()));
        }
        for (j, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite("box limits"));
            }
            if a >= b {
                return Err(Error::DegenerateBox(j));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^d`
    pub fn unit(d: usize) -> Self {
        Self { lower: vec![0.0; d], upper: vec![1.0; d] }
    }

    /// `[-1, 1]^d`
    pub fn symmetric(d: usize) -> Self {
        Self { lower: vec![-1.0; d], upper: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(j, v)| {
                let slack = 1e-12 * self.width(j);
                *v >= self.lower[j] - slack && *v <= self.upper[j] + slack
            })
    }

    /// Maps `u` in `[0, 1]^d` to the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(j, t)| self.lower[j] + t * self.width(j)).collect()
    }
}

/// Affine map between a user box and value range and the normalized
/// `[-1, 1]^d` domain with `[-1, 1]` range used for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl DomainMap {
    pub fn new(region: &Hyperrect, range_lo: f64, range_hi: f64) -> Result<Self> {
        if !range_lo.is_finite() || !range_hi.is_finite() {
            return Err(Error::NonFinite("value range"));
        }
        if range_lo >= range_hi {
            return Err(Error::InvalidArgument(format!(
                "value range [{range_lo}, {range_hi}] is empty"
            )));
        }
        Ok(Self {
            lower: region.lower().to_vec(),
            upper: region.upper().to_vec(),
            range_lo,
            range_hi,
        })
    }

    /// Map whose range spans the observed targets; a constant target `c`
    /// gets the range `[c - 1, c + 1]`.
    pub fn from_targets(region: &Hyperrect, targets: &[f64]) -> Result<Self> {
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("training targets"));
        }
        let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if targets.is_empty() {
            return Self::new(region, -1.0, 1.0);
        }
        if lo == hi {
            return Self::new(region, lo - 1.0, lo + 1.0);
        }
        Self::new(region, lo, hi)
    }

    /// The identity map on `[-1, 1]^d` with range `[-1, 1]`.
    pub fn identity(d: usize) -> Self {
        Self { lower: vec![-1.0; d], upper: vec![1.0; d], range_lo: -1.0, range_hi: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn region(&self) -> Result<Hyperrect> {
        Hyperrect::new(self.lower.clone(), self.upper.clone())
    }

    /// Domain volume `Omega`.
    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn normalize_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| 2.0 * (v - self.lower[j]) / (self.upper[j] - self.lower[j]) - 1.0)
            .collect()
    }

    pub fn denormalize_point(&self, xn: &[f64]) -> Vec<f64> {
        xn.iter()
            .enumerate()
            .map(|(j, v)| 0.5 * (self.upper[j] - self.lower[j]) * (v + 1.0) + self.lower[j])
            .collect()
    }

    pub fn normalize_value(&self, f: f64) -> f64 {
        2.0 * (f - self.range_lo) / (self.range_hi - self.range_lo) - 1.0
    }

    pub fn denormalize_value(&self, fhat: f64) -> f64 {
        0.5 * (self.range_hi - self.range_lo) * (fhat + 1.0) + self.range_lo
    }

    /// Integral over the true box from the integral `mu_hat` of the
    /// normalized function over `[-1, 1]^d`:
    /// `Omega [(z_b - z_a)(mu_hat / 2^d + 1) / 2 + z_a]`.
    pub fn denormalize_estimate(&self, mu_hat: f64) -> f64 {
        let scale = 2f64.powi(self.dim() as i32);
        self.volume() * ((self.range_hi - self.range_lo) * (mu_hat / scale + 1.0) / 2.0 + self.range_lo)
    }

    /// Same mapping for an integral over a sub-box whose normalized volume is
    /// `normalized_volume` (equal to `2^d` for the whole domain).
    pub fn denormalize_partial(&self, mu_hat: f64, normalized_volume: f64) -> f64 {
        let jac = self.volume() / 2f64.powi(self.dim() as i32);
        jac * ((self.range_hi - self.range_lo) * (mu_hat + normalized_volume) / 2.0
            + self.range_lo * normalized_volume)
    }

    /// Maps a box in true coordinates into the normalized domain.
    pub fn normalize_box(&self, region: &Hyperrect) -> Result<Hyperrect> {
        if region.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: region.dim() });
        }
        Hyperrect::new(self.normalize_point(region.lower()), self.normalize_point(region.upper()))
    }

    /// Normalizes raw samples (`N x d` row-major inputs) for training.
    pub fn normalize(&self, inputs: &[f64], targets: &[f64]) -> Result<SampleSet> {
        let d = self.dim();
        if inputs.len() != targets.len() * d {
            return Err(Error::Shape(format!(
                "{} input values for {} targets in {d} dimensions",
                inputs.len(),
                targets.len()
            )));
        }
        let region = self.region()?;
        let mut out = Vec::with_capacity(inputs.len());
        for x in inputs.chunks_exact(d) {
            if !region.contains(x) {
                return Err(Error::InvalidArgument(format!("sample {x:?} lies outside the domain")));
            }
            out.extend(self.normalize_point(x).into_iter().map(|v| v.clamp(-1.0, 1.0)));
        }
        let t = targets.iter().map(|&f| self.normalize_value(f)).collect();
        SampleSet::new(d, out, t)
    }
}

/// Training samples in the normalized domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    d: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl SampleSet {
    pub fn new(d: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if d == 0 || inputs.len() != targets.len() * d {
            return Err(Error::Shape(format!(
                "{} input values for {} targets in {d} dimensions",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Self { d, inputs, targets })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn input(&self, n: usize) -> &[f64] {
        &self.inputs[n * self.d..(n + 1) * self.d]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}
