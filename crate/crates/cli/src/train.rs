use crate::output::{err, parse_box, read_samples, run_config, CliResult};
use clap::{Args, ValueEnum};
use qnet_core::integrands::{sample_family, Family, Integrand};
use qnet_core::model::Proxy;
use qnet_core::proxy::{Hyperrect, Optimizer, TrainConfig};
use qnet_core::sampling::{unit_points, uniform_points, SamplingMode};
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Random,
    LowDiscrepancy,
}

impl From<Sampling> for SamplingMode {
    fn from(s: Sampling) -> Self {
        match s {
            Sampling::Random => SamplingMode::Random,
            Sampling::LowDiscrepancy => SamplingMode::LowDiscrepancy,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerArg {
    Auto,
    Lm,
    Adam,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Samples CSV with columns x1,...,xd,f.
    #[arg(long, conflicts_with = "family")]
    pub samples: Option<PathBuf>,
    /// Draw training samples from a test integrand: GM, GMD, HR or ZP.
    #[arg(long)]
    pub family: Option<String>,
    /// Dimension of the test integrand.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Seed selecting the test integrand.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of samples drawn from the test integrand.
    #[arg(long = "n", default_value_t = 2048)]
    pub n: usize,
    /// Placement of the drawn samples.
    #[arg(long, value_enum, default_value_t = Sampling::LowDiscrepancy)]
    pub sampling: Sampling,
    /// Seed for the sample placement.
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
    /// Domain lower corner (comma separated); defaults to the samples' bounding box.
    #[arg(long, requires = "upper")]
    pub lower: Option<String>,
    #[arg(long, requires = "lower")]
    pub upper: Option<String>,
    /// Hidden neurons; defaults to ceil(N^(1/(1+d))).
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed for the weight initialization.
    #[arg(long, default_value_t = 0)]
    pub init_seed: u64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Auto)]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Weight file to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the fit report here (it is always printed).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> CliResult {
    let config = run_config("train", &args);
    let (region, inputs, targets, source) = load_training_data(&args)?;
    let cfg = TrainConfig {
        seed: args.init_seed,
        optimizer: match args.optimizer {
            OptimizerArg::Auto => Optimizer::Auto,
            OptimizerArg::Lm => Optimizer::LevenbergMarquardt,
            OptimizerArg::Adam => Optimizer::Adam,
        },
        max_iterations: args.max_iterations,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let (proxy, report) = Proxy::train(&region, &inputs, &targets, args.k, &cfg).map_err(err)?;
    let wall = start.elapsed().as_secs_f64();

    let mut file = proxy.weight_file().map_err(err)?;
    file.provenance = Some(config.clone());
    file.save(&args.out).map_err(err)?;

    let range = proxy.map().range_hi - proxy.map().range_lo;
    let rmse = (report.mse).sqrt() * 0.5 * range;
    let mut summary = serde_json::json!({
        "weights": args.out,
        "d": proxy.dim(),
        "k": proxy.net().neurons(),
        "n": targets.len(),
        "optimizer": report.optimizer,
        "iterations": report.iterations,
        "train_mse_normalized": report.mse,
        "train_rmse": rmse,
        "diverged": report.diverged,
        "warnings": report.warnings,
        "wall_seconds": wall,
        "run_config": config,
    });
    if let Some(spec) = source {
        // held-out error on fresh uniform points
        let d = spec.dim();
        let pts = uniform_points(4096, d, args.seed ^ 0x5eed);
        let se: f64 = pts.chunks_exact(d).map(|x| (proxy.eval(x).unwrap() - spec.eval(x)).powi(2)).sum();
        let held = (se / 4096.0).sqrt();
        summary["heldout_rmse"] = held.into();
        summary["heldout_rmse_relative_to_range"] = (held / (targets_range(&targets))).into();
    }
    let text = serde_json::to_string_pretty(&summary).map_err(err)?;
    println!("{text}");
    if let Some(path) = &args.report {
        std::fs::write(path, format!("{text}\n")).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if report.diverged {
        return Err("training diverged; the best iterate was written".into());
    }
    Ok(())
}

fn targets_range(t: &[f64]) -> f64 {
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

type TrainingData = (Hyperrect, Vec<f64>, Vec<f64>, Option<qnet_core::integrands::IntegrandSpec>);

fn load_training_data(args: &TrainArgs) -> CliResult<TrainingData> {
    if let Some(path) = &args.samples {
        let (d, inputs, targets) = read_samples(path)?;
        let region = match (&args.lower, &args.upper) {
            (Some(l), Some(u)) => parse_box(l, u)?,
            _ => bounding_box(d, &inputs)?,
        };
        if region.dim() != d {
            return Err(format!("box has {} dimensions but the samples have {d}", region.dim()));
        }
        return Ok((region, inputs, targets, None));
    }
    let Some(name) = &args.family else {
        return Err("either --samples or --family is required".into());
    };
    let family: Family = name.parse().map_err(err)?;
    let spec = sample_family(family, args.d, args.seed).map_err(err)?;
    let region = spec.domain();
    let inputs = unit_points(args.sampling.into(), args.n, args.d, args.sample_seed).map_err(err)?;
    let targets = inputs.chunks_exact(args.d).map(|x| spec.eval(x)).collect();
    Ok((region, inputs, targets, Some(spec)))
}

fn bounding_box(d: usize, inputs: &[f64]) -> CliResult<Hyperrect> {
    let mut lower = vec![f64::INFINITY; d];
    let mut upper = vec![f64::NEG_INFINITY; d];
    for x in inputs.chunks_exact(d) {
        for j in 0..d {
            lower[j] = lower[j].min(x[j]);
            upper[j] = upper[j].max(x[j]);
        }
    }
    Hyperrect::new(lower, upper).map_err(|e| format!("samples do not span a box ({e}); pass --lower/--upper"))
}
