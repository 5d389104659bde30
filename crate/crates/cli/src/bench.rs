use crate::output::{err, parse_list, parse_ranges, preamble, run_config, writer, CliResult};
use crate::train::Sampling;
use clap::{Args, ValueEnum};
use qnet_core::estimators::{
    convergence_study, subdomain_study, write_records, EstimatorKind, InnerEstimator, StudyConfig, SubdomainConfig,
};
use qnet_core::integrands::Family;
use qnet_core::proxy::{ProxyNet, TrainConfig};
use qnet_core::qnet::integrate;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Convergence,
    Cv,
    Dims,
    Subdomain,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inner {
    Mc,
    Qmc,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub study: Study,
    /// Comma-separated families: GM, GMD, HR, ZP.
    #[arg(long, default_value = "GM")]
    pub family: String,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Dimensions for `--study dims`, e.g. `2..6,8`.
    #[arg(long, default_value = "2..6,8")]
    pub dims: String,
    /// Sample counts for `--study convergence`.
    #[arg(long, default_value = "64,256,1024,4096")]
    pub n_schedule: String,
    /// Sample count for `cv` and `dims`.
    #[arg(long = "n", default_value_t = 4096)]
    pub n: usize,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Random integrands per family and dimension.
    #[arg(long)]
    pub integrands: Option<usize>,
    /// Comma-separated estimators: MC, QMC, QNET, CV_QNET.
    #[arg(long)]
    pub estimators: Option<String>,
    /// Control-variate fractions.
    #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
    pub nu: String,
    #[arg(long, value_enum, default_value_t = Inner::Qmc)]
    pub inner: Inner,
    /// Hidden neurons; default rule ceil(N^(1/(1+d))) when omitted (180 for `subdomain`).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Sampling::LowDiscrepancy)]
    pub sampling: Sampling,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training grid points per axis for `subdomain`.
    #[arg(long, default_value_t = 170)]
    pub grid: usize,
    /// Sub-box sides for `subdomain`, as fractions of the domain side.
    #[arg(long, default_value = "0.3333333333333333,0.125,0.05")]
    pub sides: String,
    /// Sub-boxes per side for `subdomain`.
    #[arg(long, default_value_t = 100)]
    pub boxes: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// Results CSV (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn run(args: BenchArgs) -> CliResult {
    let config = run_config("bench", &args);
    let train = TrainConfig { max_iterations: args.max_iterations, ..TrainConfig::default() };
    let families: Vec<Family> = parse_list(&args.family, "family")?;
    let start = Instant::now();
    let (records, d_probe) = match args.study {
        Study::Subdomain => {
            let family = *families.first().ok_or("no family given")?;
            let cfg = SubdomainConfig {
                family,
                d: args.d,
                grid: args.grid,
                k: args.k.unwrap_or(180),
                sides: parse_list(&args.sides, "side")?,
                boxes: args.boxes,
                reps: args.reps.unwrap_or(1),
                master_seed: args.seed,
                train,
            };
            (subdomain_study(&cfg).map_err(err)?, args.d)
        }
        study => {
            let family = *families.first().ok_or("no family given")?;
            let mut cfg = match study {
                Study::Convergence => StudyConfig::convergence(families.clone(), args.d, parse_list(&args.n_schedule, "N")?),
                Study::Cv => StudyConfig::control_variates(family, args.d, args.n, parse_list(&args.nu, "nu")?),
                _ => StudyConfig::dimensions(family, parse_ranges(&args.dims)?, args.n),
            };
            cfg.families = families;
            cfg.nus = parse_list(&args.nu, "nu")?;
            cfg.inner = match args.inner {
                Inner::Mc => InnerEstimator::Mc,
                Inner::Qmc => InnerEstimator::Qmc,
            };
            if let Some(r) = args.reps {
                cfg.reps = r;
            }
            if let Some(i) = args.integrands {
                cfg.integrands = i;
            }
            if let Some(e) = &args.estimators {
                cfg.estimators = parse_list::<EstimatorKind>(e, "estimator")?;
            }
            cfg.k = args.k;
            cfg.sampling = args.sampling.into();
            cfg.master_seed = args.seed;
            cfg.train = train;
            let d = *cfg.dims.iter().max().unwrap_or(&args.d);
            (convergence_study(&cfg).map_err(err)?, d)
        }
    };
    let secs = start.elapsed().as_secs_f64();
    let mut out = writer(args.out.as_deref())?;
    write_records(&mut out, &preamble(&config), &records).map_err(err)?;
    out.flush().map_err(err)?;
    eprintln!("{} records in {secs:.1}s; {}", records.len(), throughput(d_probe.max(1)));
    Ok(())
}

/// Closed-form neuron integrals per second on one thread, for reference only.
fn throughput(d: usize) -> String {
    match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
        Ok(pool) => pool.install(|| single_thread_throughput(d)),
        Err(_) => single_thread_throughput(d),
    }
}

fn single_thread_throughput(d: usize) -> String {
    let d = d.min(16);
    let k = 256;
    let w1 = (0..k * d).map(|i| 0.5 + (i % 7) as f64 * 0.3).collect();
    let net = ProxyNet::new(d, k, w1, vec![1.0; k], vec![0.1; k], 0.0).expect("valid probe net");
    let start = Instant::now();
    let mut neurons = 0usize;
    while start.elapsed().as_secs_f64() < 0.2 {
        let _ = integrate(&net);
        neurons += k;
    }
    format!("{:.0} neurons/s per thread in {d}D", neurons as f64 / start.elapsed().as_secs_f64())
}
