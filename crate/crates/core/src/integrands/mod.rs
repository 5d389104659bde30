//! Test integrands on `[0, 1]^d` with reference integrals over any box:
//! Gaussian mixtures (GM), Gaussian mixtures cut by one step per axis (GMD),
//! sums of box indicators (HR) and the zone plate.

mod sample;

pub use sample::sample_family;

use crate::error::{Error, Result};
use crate::proxy::Hyperrect;
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Anything that can be sampled pointwise by the estimators.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

/// Wraps a closure as an [`Integrand`].
pub struct FnIntegrand<F> {
    d: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(d: usize, f: F) -> Self {
        Self { d, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "GM")]
    Gm,
    #[serde(rename = "GMD")]
    Gmd,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "ZP")]
    ZonePlate,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Gm, Family::Gmd, Family::Hr, Family::ZonePlate];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gm => "GM",
            Family::Gmd => "GMD",
            Family::Hr => "HR",
            Family::ZonePlate => "ZP",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GM" => Ok(Family::Gm),
            "GMD" => Ok(Family::Gmd),
            "HR" => Ok(Family::Hr),
            "ZP" | "ZONEPLATE" | "ZONE-PLATE" => Ok(Family::ZonePlate),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// Axis-aligned normalized Gaussian scaled by `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Gaussian {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut q = 0.0;
        let mut norm = 1.0;
        for j in 0..x.len() {
            let z = (x[j] - self.mean[j]) / self.scale[j];
            q += z * z;
            norm *= self.scale[j];
        }
        self.weight * (-0.5 * q).exp() / (norm * (2.0 * std::f64::consts::PI).powf(0.5 * x.len() as f64))
    }

    fn mass(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let mut m = self.weight;
        for j in 0..lower.len() {
            if lower[j] >= upper[j] {
                return 0.0;
            }
            m *= normal_mass((lower[j] - self.mean[j]) / self.scale[j], (upper[j] - self.mean[j]) / self.scale[j]);
        }
        m
    }
}

/// `Phi(b) - Phi(a)` for the standard normal, without cancellation in the tails.
fn normal_mass(a: f64, b: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if a >= 0.0 {
        0.5 * (libm::erfc(a * s) - libm::erfc(b * s))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * s) - libm::erfc(-a * s))
    } else {
        0.5 * (libm::erf(b * s) - libm::erf(a * s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmSpec {
    pub d: usize,
    pub components: Vec<Gaussian>,
}

impl GmSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    pub fn integral(&self, lower: &[f64], upper: &[f64]) -> f64 {
        self.components.iter().map(|c| c.mass(lower, upper)).sum()
    }
}

/// A Gaussian mixture multiplied by `prod_j step(x_j >= thresholds_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmdSpec {
    pub base: GmSpec,
    pub thresholds: Vec<f64>,
}

impl GmdSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x.iter().zip(&self.thresholds).any(|(v, t)| v < t) {
            return 0.0;
        }
        self.base.eval(x)
    }

    pub fn integral(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let cut: Vec<f64> = lower.iter().zip(&self.thresholds).map(|(a, t)| a.max(*t)).collect();
        self.base.integral(&cut, upper)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBox {
    pub weight: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Sum of weighted indicators of half-open boxes `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrSpec {
    pub d: usize,
    pub boxes: Vec<WeightedBox>,
}

impl HrSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.boxes
            .iter()
            .filter(|b| (0..x.len()).all(|j| x[j] >= b.lower[j] && x[j] < b.upper[j]))
            .map(|b| b.weight)
            .sum()
    }

    pub fn integral(&self, lower: &[f64], upper: &[f64]) -> f64 {
        self.boxes
            .iter()
            .map(|b| {
                let mut v = b.weight;
                for j in 0..lower.len() {
                    v *= (upper[j].min(b.upper[j]) - lower[j].max(b.lower[j])).max(0.0);
                }
                v
            })
            .sum()
    }
}

/// `(1 + cos(frequency * |x|^2)) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonePlateSpec {
    pub d: usize,
    pub frequency: f64,
}

impl ZonePlateSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        0.5 * (1.0 + (self.frequency * r2).cos())
    }

    /// `cos(w |x|^2)` is the real part of `prod_j exp(i w x_j^2)`, so the box
    /// integral is a product of one-dimensional oscillatory integrals, each
    /// evaluated with a composite Gauss-Legendre rule.
    pub fn integral(&self, lower: &[f64], upper: &[f64]) -> f64 {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        let rule = RULE.get_or_init(|| GaussLegendre::new(20));
        let (mut re, mut im) = (1.0, 0.0);
        let mut volume = 1.0;
        for j in 0..lower.len() {
            let (a, b) = (lower[j], upper[j]);
            volume *= b - a;
            // enough panels for about one per half oscillation
            let phase = self.frequency * (b * b - a * a).abs().max(2.0 * a.abs().max(b.abs()) * (b - a));
            let panels = ((phase / std::f64::consts::PI).ceil() as usize).max(4);
            let c = rule.integrate(a, b, panels, |t| (self.frequency * t * t).cos());
            let s = rule.integrate(a, b, panels, |t| (self.frequency * t * t).sin());
            (re, im) = (re * c - im * s, re * s + im * c);
        }
        0.5 * (volume + re)
    }
}

/// How a reference value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Analytic,
    /// High-order quadrature rather than a closed form.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub kind: ReferenceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum IntegrandSpec {
    #[serde(rename = "GM")]
    Gm(GmSpec),
    #[serde(rename = "GMD")]
    Gmd(GmdSpec),
    #[serde(rename = "HR")]
    Hr(HrSpec),
    #[serde(rename = "ZP")]
    ZonePlate(ZonePlateSpec),
}

impl IntegrandSpec {
    pub fn family(&self) -> Family {
        match self {
            IntegrandSpec::Gm(_) => Family::Gm,
            IntegrandSpec::Gmd(_) => Family::Gmd,
            IntegrandSpec::Hr(_) => Family::Hr,
            IntegrandSpec::ZonePlate(_) => Family::ZonePlate,
        }
    }

    /// Every family lives on `[0, 1]^d`.
    pub fn domain(&self) -> Hyperrect {
        Hyperrect::unit(Integrand::dim(self))
    }

    pub fn reference_integral(&self, region: &Hyperrect) -> Result<Reference> {
        let d = Integrand::dim(self);
        if region.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: region.dim() });
        }
        let (a, b) = (region.lower(), region.upper());
        let (value, kind) = match self {
            IntegrandSpec::Gm(s) => (s.integral(a, b), ReferenceKind::Analytic),
            IntegrandSpec::Gmd(s) => (s.integral(a, b), ReferenceKind::Analytic),
            IntegrandSpec::Hr(s) => (s.integral(a, b), ReferenceKind::Analytic),
            IntegrandSpec::ZonePlate(s) => (s.integral(a, b), ReferenceKind::Quadrature),
        };
        Ok(Reference { value, kind })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Integrand for IntegrandSpec {
    fn dim(&self) -> usize {
        match self {
            IntegrandSpec::Gm(s) => s.d,
            IntegrandSpec::Gmd(s) => s.base.d,
            IntegrandSpec::Hr(s) => s.d,
            IntegrandSpec::ZonePlate(s) => s.d,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            IntegrandSpec::Gm(s) => s.eval(x),
            IntegrandSpec::Gmd(s) => s.eval(x),
            IntegrandSpec::Hr(s) => s.eval(x),
            IntegrandSpec::ZonePlate(s) => s.eval(x),
        }
    }
}
