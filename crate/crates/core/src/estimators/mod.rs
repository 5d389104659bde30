//! Integral estimators: plain Monte Carlo, scrambled Halton quasi-Monte Carlo,
//! the proxy-network estimator and its control-variate variant.

mod csv;
mod study;

pub use self::csv::{write_records, CSV_HEADER};
pub use study::{
    aggregate, convergence_study, derive_seed, grid_points, subdomain_study, CellSummary, StudyConfig, SubdomainConfig,
};

use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::model::Proxy;
use crate::proxy::{Hyperrect, TrainConfig};
use crate::sampling::{unit_points, SamplingMode};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Floor added to `|reference|` in relative errors.
pub const REFERENCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "QMC")]
    Qmc,
    #[serde(rename = "QNET")]
    Qnet,
    #[serde(rename = "CV_QNET")]
    CvQnet,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mc => "MC",
            EstimatorKind::Qmc => "QMC",
            EstimatorKind::Qnet => "QNET",
            EstimatorKind::CvQnet => "CV_QNET",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "MC" => Ok(Self::Mc),
            "QMC" => Ok(Self::Qmc),
            "QNET" => Ok(Self::Qnet),
            "CV_QNET" | "CV" => Ok(Self::CvQnet),
            _ => Err(Error::InvalidArgument(format!("unknown estimator {s:?}"))),
        }
    }
}

/// Estimator for the residual in [`cv_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerEstimator {
    #[serde(rename = "MC")]
    Mc,
    #[serde(rename = "QMC")]
    Qmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub estimator: EstimatorKind,
    /// Integrand label, e.g. `GM:17` for the GM instance drawn with seed 17.
    pub family: String,
    pub d: usize,
    pub k: Option<usize>,
    pub n: usize,
    pub nu: Option<f64>,
    pub rep: usize,
    pub seed: u64,
    pub value: f64,
    pub reference: Option<f64>,
    pub rel_error: Option<f64>,
    /// Conditions worth a second look (fit divergence, fallbacks).
    pub flags: Vec<String>,
}

impl EstimateRecord {
    fn new(estimator: EstimatorKind, d: usize, n: usize, seed: u64, value: f64) -> Self {
        Self {
            estimator,
            family: String::new(),
            d,
            k: None,
            n,
            nu: None,
            rep: 0,
            seed,
            value,
            reference: None,
            rel_error: None,
            flags: Vec::new(),
        }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self.rel_error = Some(relative_error(self.value, reference));
        self
    }

    pub fn labelled(mut self, family: impl Into<String>, rep: usize) -> Self {
        self.family = family.into();
        self.rep = rep;
        self
    }
}

pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / (reference.abs() + REFERENCE_FLOOR)
}

fn check_inputs(f: &dyn Integrand, region: &Hyperrect, n: usize) -> Result<()> {
    if f.dim() != region.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: region.dim() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    Ok(())
}

/// `n` points of `mode` mapped into `region`, row-major.
fn region_points(mode: SamplingMode, region: &Hyperrect, n: usize, seed: u64) -> Result<Vec<f64>> {
    let d = region.dim();
    let mut pts = unit_points(mode, n, d, seed)?;
    for x in pts.chunks_exact_mut(d) {
        for j in 0..d {
            x[j] = region.lower()[j] + x[j] * region.width(j);
        }
    }
    Ok(pts)
}

fn sample_mean<G: Fn(&[f64]) -> f64>(pts: &[f64], d: usize, g: G) -> f64 {
    let n = pts.len() / d;
    pts.chunks_exact(d).map(g).sum::<f64>() / n as f64
}

fn inner_estimate(f: &dyn Integrand, region: &Hyperrect, n: usize, seed: u64, mode: SamplingMode) -> Result<f64> {
    let pts = region_points(mode, region, n, seed)?;
    Ok(region.volume() * sample_mean(&pts, region.dim(), |x| f.eval(x)))
}

/// Volume times the mean of `f` at `n` uniform random points.
pub fn mc_estimate(f: &dyn Integrand, region: &Hyperrect, n: usize, seed: u64) -> Result<EstimateRecord> {
    check_inputs(f, region, n)?;
    let value = inner_estimate(f, region, n, seed, SamplingMode::Random)?;
    Ok(EstimateRecord::new(EstimatorKind::Mc, region.dim(), n, seed, value))
}

/// Volume times the mean of `f` at the first `n` scrambled Halton points.
pub fn qmc_estimate(f: &dyn Integrand, region: &Hyperrect, n: usize, seed: u64) -> Result<EstimateRecord> {
    check_inputs(f, region, n)?;
    let value = inner_estimate(f, region, n, seed, SamplingMode::LowDiscrepancy)?;
    Ok(EstimateRecord::new(EstimatorKind::Qmc, region.dim(), n, seed, value))
}

/// Settings for the proxy estimators. Training points come from
/// `sample_seed`; network initialization from `train.seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnetConfig {
    /// Neuron count; `None` picks `ceil(N^(1/(1+d)))`.
    pub k: Option<usize>,
    pub sampling: SamplingMode,
    pub sample_seed: u64,
    pub train: TrainConfig,
}

impl QnetConfig {
    pub fn new(k: Option<usize>, sample_seed: u64, init_seed: u64) -> Self {
        Self { k, sampling: SamplingMode::LowDiscrepancy, sample_seed, train: TrainConfig::with_seed(init_seed) }
    }
}

/// Trains a proxy on `n` samples of `f` and returns it with the sample values.
pub fn train_proxy(f: &dyn Integrand, region: &Hyperrect, n: usize, cfg: &QnetConfig) -> Result<(Proxy, Vec<String>)> {
    let pts = region_points(cfg.sampling, region, n, cfg.sample_seed)?;
    let targets: Vec<f64> = pts.chunks_exact(region.dim()).map(|x| f.eval(x)).collect();
    let (proxy, report) = Proxy::train(region, &pts, &targets, cfg.k, &cfg.train)?;
    let mut flags = report.warnings;
    if report.diverged {
        flags.push("fit-diverged".into());
    }
    Ok((proxy, flags))
}

/// Closed-form integral of a proxy trained on `n` samples.
pub fn qnet_estimate(f: &dyn Integrand, region: &Hyperrect, n: usize, cfg: &QnetConfig) -> Result<EstimateRecord> {
    check_inputs(f, region, n)?;
    let (proxy, flags) = train_proxy(f, region, n, cfg)?;
    let mut rec = EstimateRecord::new(EstimatorKind::Qnet, region.dim(), n, cfg.train.seed, proxy.integral()?);
    rec.k = Some(proxy.net().neurons());
    rec.flags = flags;
    Ok(rec)
}

/// Proxy trained on `ceil((1 - nu) n)` samples plus an `inner` estimate of
/// `f - proxy` from the remaining samples (drawn with `residual_seed`).
pub fn cv_estimate(
    f: &dyn Integrand,
    region: &Hyperrect,
    n: usize,
    nu: f64,
    inner: InnerEstimator,
    cfg: &QnetConfig,
    residual_seed: u64,
) -> Result<EstimateRecord> {
    check_inputs(f, region, n)?;
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidArgument(format!("nu must lie in [0, 1], got {nu}")));
    }
    let mode = match inner {
        InnerEstimator::Mc => SamplingMode::Random,
        InnerEstimator::Qmc => SamplingMode::LowDiscrepancy,
    };
    let n_train = ((1.0 - nu) * n as f64).ceil() as usize;
    let n_resid = n - n_train;
    let mut flags = Vec::new();
    let mut nu_used = nu;
    let mut k = None;
    let value = if n_train == 0 {
        inner_estimate(f, region, n, residual_seed, mode)?
    } else if n_resid == 0 {
        if nu > 0.0 {
            flags.push("nu-fallback-zero".into());
            nu_used = 0.0;
        }
        let (proxy, fit_flags) = train_proxy(f, region, n, cfg)?;
        flags.extend(fit_flags);
        k = Some(proxy.net().neurons());
        proxy.integral()?
    } else {
        let (proxy, fit_flags) = train_proxy(f, region, n_train, cfg)?;
        flags.extend(fit_flags);
        k = Some(proxy.net().neurons());
        let pts = region_points(mode, region, n_resid, residual_seed)?;
        let net = proxy.net();
        let map = proxy.map();
        let resid = sample_mean(&pts, region.dim(), |x| {
            f.eval(x) - map.denormalize_value(net.eval_unchecked(&map.normalize_point(x)))
        });
        proxy.integral()? + region.volume() * resid
    };
    let seed = if n_train == 0 { residual_seed } else { cfg.train.seed };
    let mut rec = EstimateRecord::new(EstimatorKind::CvQnet, region.dim(), n, seed, value);
    rec.k = k;
    rec.nu = Some(nu_used);
    rec.flags = flags;
    Ok(rec)
}
