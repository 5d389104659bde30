//! Repeated-estimate experiments over integrand families.

use super::{
    cv_estimate, mc_estimate, qmc_estimate, qnet_estimate, relative_error, EstimateRecord, EstimatorKind,
    InnerEstimator, QnetConfig,
};
use crate::error::{Error, Result};
use crate::integrands::{sample_family, Family, Integrand, IntegrandSpec};
use crate::model::Proxy;
use crate::proxy::{Hyperrect, TrainConfig};
use crate::sampling::SamplingMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const TAG_INTEGRAND: u64 = 1;
const TAG_BASELINE: u64 = 2;
const TAG_SAMPLES: u64 = 3;
const TAG_INIT: u64 = 4;
const TAG_RESIDUAL: u64 = 5;
const TAG_BOXES: u64 = 6;

/// Mixes `parts` into a seed (SplitMix64 finalizer per part).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub families: Vec<Family>,
    pub dims: Vec<usize>,
    pub n_schedule: Vec<usize>,
    /// Random integrands per (family, d).
    pub integrands: usize,
    pub reps: usize,
    pub estimators: Vec<EstimatorKind>,
    /// Control-variate fractions, used by `CV_QNET`.
    pub nus: Vec<f64>,
    pub inner: InnerEstimator,
    /// Neuron count; `None` uses the default rule.
    pub k: Option<usize>,
    pub sampling: SamplingMode,
    /// Reuse one training set per integrand across repetitions (only the
    /// initialization changes); otherwise every repetition draws new points.
    pub fixed_training_samples: bool,
    pub master_seed: u64,
    pub train: TrainConfig,
}

impl StudyConfig {
    /// Error versus sample count.
    pub fn convergence(families: Vec<Family>, d: usize, n_schedule: Vec<usize>) -> Self {
        Self {
            families,
            dims: vec![d],
            n_schedule,
            integrands: 20,
            reps: 5,
            estimators: vec![EstimatorKind::Mc, EstimatorKind::Qmc, EstimatorKind::Qnet],
            nus: vec![],
            inner: InnerEstimator::Qmc,
            k: None,
            sampling: SamplingMode::LowDiscrepancy,
            fixed_training_samples: true,
            master_seed: 0,
            train: TrainConfig::default(),
        }
    }

    /// Variance of the control-variate estimator across `nus`, with MC and QMC baselines.
    pub fn control_variates(family: Family, d: usize, n: usize, nus: Vec<f64>) -> Self {
        Self {
            estimators: vec![EstimatorKind::Mc, EstimatorKind::Qmc, EstimatorKind::CvQnet],
            nus,
            integrands: 5,
            reps: 40,
            fixed_training_samples: false,
            ..Self::convergence(vec![family], d, vec![n])
        }
    }

    /// Error versus dimension at fixed `n`.
    pub fn dimensions(family: Family, dims: Vec<usize>, n: usize) -> Self {
        Self {
            dims,
            integrands: 5,
            reps: 20,
            estimators: vec![EstimatorKind::Mc, EstimatorKind::Qnet],
            ..Self::convergence(vec![family], 2, vec![n])
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.integrands == 0 {
            return Err(Error::InvalidArgument("reps and integrands must be positive".into()));
        }
        if self.n_schedule.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("sample counts must be positive".into()));
        }
        if self.estimators.contains(&EstimatorKind::CvQnet) && self.nus.is_empty() {
            return Err(Error::InvalidArgument("CV_QNET needs at least one nu".into()));
        }
        Ok(())
    }
}

struct Task {
    spec_index: usize,
    n: usize,
    estimator: EstimatorKind,
    nu: Option<f64>,
    rep: usize,
}

struct Instance {
    spec: IntegrandSpec,
    seed: u64,
    reference: f64,
}

/// Runs every (family, d, integrand, N, estimator, nu, rep) cell. Output
/// order is fixed by that nesting regardless of thread count.
pub fn convergence_study(cfg: &StudyConfig) -> Result<Vec<EstimateRecord>> {
    cfg.validate()?;
    let mut instances = Vec::new();
    for (fi, &family) in cfg.families.iter().enumerate() {
        for &d in &cfg.dims {
            for i in 0..cfg.integrands {
                let seed = derive_seed(&[cfg.master_seed, TAG_INTEGRAND, fi as u64, d as u64, i as u64]);
                let spec = sample_family(family, d, seed)?;
                let reference = spec.reference_integral(&spec.domain())?.value;
                instances.push(Instance { spec, seed, reference });
            }
        }
    }
    let mut tasks = Vec::new();
    for spec_index in 0..instances.len() {
        for &n in &cfg.n_schedule {
            for &estimator in &cfg.estimators {
                let nus: Vec<Option<f64>> = if estimator == EstimatorKind::CvQnet {
                    cfg.nus.iter().map(|&v| Some(v)).collect()
                } else {
                    vec![None]
                };
                for nu in nus {
                    for rep in 0..cfg.reps {
                        tasks.push(Task { spec_index, n, estimator, nu, rep });
                    }
                }
            }
        }
    }
    tasks.par_iter().map(|t| run_task(cfg, &instances[t.spec_index], t)).collect()
}

fn run_task(cfg: &StudyConfig, inst: &Instance, t: &Task) -> Result<EstimateRecord> {
    let f: &dyn Integrand = &inst.spec;
    let region = inst.spec.domain();
    let ms = cfg.master_seed;
    let baseline_seed = derive_seed(&[ms, TAG_BASELINE, inst.seed, t.rep as u64]);
    let sample_seed = if cfg.fixed_training_samples {
        derive_seed(&[ms, TAG_SAMPLES, inst.seed])
    } else {
        derive_seed(&[ms, TAG_SAMPLES, inst.seed, t.rep as u64])
    };
    let qcfg = QnetConfig {
        k: cfg.k,
        sampling: cfg.sampling,
        sample_seed,
        train: TrainConfig { seed: derive_seed(&[ms, TAG_INIT, inst.seed, t.rep as u64]), ..cfg.train.clone() },
    };
    let rec = match t.estimator {
        EstimatorKind::Mc => mc_estimate(f, &region, t.n, baseline_seed)?,
        EstimatorKind::Qmc => qmc_estimate(f, &region, t.n, baseline_seed)?,
        EstimatorKind::Qnet => qnet_estimate(f, &region, t.n, &qcfg)?,
        EstimatorKind::CvQnet => {
            let residual_seed = derive_seed(&[ms, TAG_RESIDUAL, inst.seed, t.rep as u64]);
            cv_estimate(f, &region, t.n, t.nu.unwrap_or(0.0), cfg.inner, &qcfg, residual_seed)?
        }
    };
    Ok(rec
        .with_reference(inst.reference)
        .labelled(format!("{}:{}", inst.spec.family(), inst.seed), t.rep))
}

/// Statistics of the repetitions in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub estimator: EstimatorKind,
    pub family: String,
    pub d: usize,
    pub n: usize,
    pub nu: Option<f64>,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation of the values (0 for a single repetition).
    pub std: f64,
    pub reference: Option<f64>,
    /// `sqrt(mean(rel_error^2))`
    pub rrmse: Option<f64>,
}

impl CellSummary {
    /// Family name without the integrand suffix.
    pub fn family_name(&self) -> &str {
        self.family.split(':').next().unwrap_or(&self.family)
    }
}

/// Groups records by (estimator, family label, d, N, nu); output is sorted by
/// that key, and each group is reduced in repetition order.
pub fn aggregate(records: &[EstimateRecord]) -> Vec<CellSummary> {
    type Key = (EstimatorKind, String, usize, usize, Option<u64>);
    let mut groups: BTreeMap<Key, Vec<&EstimateRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.estimator, r.family.clone(), r.d, r.n, r.nu.map(f64::to_bits));
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((estimator, family, d, n, nu), mut rs)| {
            rs.sort_by_key(|r| r.rep);
            let count = rs.len();
            let mean = rs.iter().map(|r| r.value).sum::<f64>() / count as f64;
            let var = if count > 1 {
                rs.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            let errs: Option<Vec<f64>> = rs.iter().map(|r| r.rel_error).collect();
            let rrmse = errs.map(|e| (e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).sqrt());
            CellSummary {
                estimator,
                family,
                d,
                n,
                nu: nu.map(f64::from_bits),
                count,
                mean,
                std: var.sqrt(),
                reference: rs[0].reference,
                rrmse,
            }
        })
        .collect()
}

/// Settings for the sub-box study: one proxy is trained on a regular grid
/// over the zone plate and integrated over random square sub-boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdomainConfig {
    pub family: Family,
    pub d: usize,
    /// Training grid points per axis.
    pub grid: usize,
    pub k: usize,
    /// Sub-box side lengths as fractions of the domain side.
    pub sides: Vec<f64>,
    pub boxes: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub train: TrainConfig,
}

impl Default for SubdomainConfig {
    fn default() -> Self {
        Self {
            family: Family::ZonePlate,
            d: 2,
            grid: 170,
            k: 180,
            sides: vec![1.0 / 3.0, 1.0 / 8.0, 1.0 / 20.0],
            boxes: 100,
            reps: 1,
            master_seed: 0,
            train: TrainConfig::default(),
        }
    }
}

/// Cell-centred `m^d` grid on `region`, row-major.
pub fn grid_points(region: &Hyperrect, m: usize) -> Vec<f64> {
    let d = region.dim();
    let total = m.pow(d as u32);
    let mut pts = Vec::with_capacity(total * d);
    for idx in 0..total {
        let mut rest = idx;
        for j in 0..d {
            let i = rest % m;
            rest /= m;
            pts.push(region.lower()[j] + (i as f64 + 0.5) / m as f64 * region.width(j));
        }
    }
    pts
}

/// One record per (side, box, rep); the family label reads `ZP:side=<s>:box=<i>`.
pub fn subdomain_study(cfg: &SubdomainConfig) -> Result<Vec<EstimateRecord>> {
    if cfg.grid == 0 || cfg.k == 0 || cfg.boxes == 0 || cfg.reps == 0 {
        return Err(Error::InvalidArgument("grid, k, boxes and reps must be positive".into()));
    }
    if cfg.sides.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
        return Err(Error::InvalidArgument("sub-box sides must lie in (0, 1]".into()));
    }
    let spec = sample_family(cfg.family, cfg.d, derive_seed(&[cfg.master_seed, TAG_INTEGRAND]))?;
    let region = spec.domain();
    let inputs = grid_points(&region, cfg.grid);
    let targets: Vec<f64> = inputs.chunks_exact(cfg.d).map(|x| spec.eval(x)).collect();
    let n = targets.len();

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.master_seed, TAG_BOXES]));
    let mut boxes = Vec::new();
    for &side in &cfg.sides {
        for b in 0..cfg.boxes {
            let lower: Vec<f64> = (0..cfg.d).map(|_| rng.random::<f64>() * (1.0 - side)).collect();
            let upper = lower.iter().map(|a| a + side).collect();
            let sub = Hyperrect::new(lower, upper)?;
            let reference = spec.reference_integral(&sub)?.value;
            boxes.push((side, b, sub, reference));
        }
    }

    let proxies: Vec<(u64, Proxy)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(&[cfg.master_seed, TAG_INIT, rep as u64]);
            let train = TrainConfig { seed, ..cfg.train.clone() };
            Proxy::train(&region, &inputs, &targets, Some(cfg.k), &train).map(|(p, _)| (seed, p))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (side, b, sub, reference) in &boxes {
        for (rep, (seed, proxy)) in proxies.iter().enumerate() {
            let value = proxy.integral_box(sub)?;
            out.push(EstimateRecord {
                estimator: EstimatorKind::Qnet,
                family: format!("{}:side={side}:box={b}", spec.family()),
                d: cfg.d,
                k: Some(cfg.k),
                n,
                nu: None,
                rep,
                seed: *seed,
                value,
                reference: Some(*reference),
                rel_error: Some(relative_error(value, *reference)),
                flags: vec![],
            });
        }
    }
    Ok(out)
}
