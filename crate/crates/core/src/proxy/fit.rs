//! Least-squares training of a [`ProxyNet`] from normalized samples.
//!
//! Small problems (at most `jacobian_limit` Jacobian entries) use
//! Levenberg-Marquardt with the analytic Jacobian:
//!
//! ```text
//! df/dw2_i = s_i            df/db2 = 1
//! df/dW1_ij = w2_i s_i (1 - s_i) x_j
//! df/db1_i = w2_i s_i (1 - s_i)
//! ```
//!
//! Larger problems fall back to mini-batch Adam.

use super::{sigmoid, ProxyNet, SampleSet};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Levenberg-Marquardt when the Jacobian fits under the limit, Adam otherwise.
    Auto,
    LevenbergMarquardt,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Maximum number of Jacobian entries (`N * parameters`) for LM under `Auto`.
    pub jacobian_limit: usize,
    pub max_iterations: usize,
    /// Stop once the relative MSE improvement over `patience` iterations drops below this.
    pub rel_tolerance: f64,
    pub patience: usize,
    /// Ridge penalty on the hidden and output weights (not `b2`); `0` disables it.
    pub tikhonov: f64,
    pub adam_step: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            optimizer: Optimizer::Auto,
            jacobian_limit: 1_000_000,
            max_iterations: 500,
            rel_tolerance: 1e-9,
            patience: 10,
            tikhonov: 1e-6,
            adam_step: 1e-2,
            batch_size: 256,
            max_epochs: 500,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Outcome of a training run. On divergence `net` holds the best iterate seen.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub net: ProxyNet,
    pub mse: f64,
    pub iterations: usize,
    pub optimizer: Optimizer,
    pub diverged: bool,
    pub warnings: Vec<String>,
}

/// `ceil(N^(1 / (1 + d)))`, at least 1.
pub fn default_neuron_count(n: usize, d: usize) -> usize {
    let k = (n as f64).powf(1.0 / (1.0 + d as f64)).ceil() as usize;
    k.max(1)
}

/// Fits a `k`-neuron network to `samples` by minimizing the mean squared error.
pub fn fit(samples: &SampleSet, k: usize, cfg: &TrainConfig) -> Result<FitReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("neuron count must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no training samples".into()));
    }
    if samples.targets().iter().any(|t| !t.is_finite())
        || samples.inputs().iter().any(|t| !t.is_finite())
    {
        return Err(Error::NonFinite("training samples"));
    }
    let d = samples.dim();
    let n = samples.len();
    let mut warnings = Vec::new();
    if n < k {
        warnings.push(format!("{n} samples for {k} neurons; the fit is underdetermined"));
    }

    let first = samples.targets()[0];
    if samples.targets().iter().all(|&t| t == first) {
        let net = ProxyNet::new(d, k, vec![0.0; k * d], vec![0.0; k], vec![0.0; k], first)?;
        return Ok(FitReport {
            net,
            mse: 0.0,
            iterations: 0,
            optimizer: cfg.optimizer,
            diverged: false,
            warnings,
        });
    }

    let params = Params::init(d, k, samples.targets(), cfg.seed);
    let use_lm = match cfg.optimizer {
        Optimizer::LevenbergMarquardt => true,
        Optimizer::Adam => false,
        Optimizer::Auto => n.saturating_mul(params.len()) <= cfg.jacobian_limit,
    };
    let mut report = if use_lm {
        levenberg_marquardt(samples, params, cfg)?
    } else {
        adam(samples, params, cfg)?
    };
    report.warnings.extend(warnings);
    Ok(report)
}

/// Flat parameter vector. Neuron `i` owns `[W1_i (d), b1_i, w2_i]`; `b2` is last.
#[derive(Clone)]
struct Params {
    d: usize,
    k: usize,
    theta: Vec<f64>,
}

impl Params {
    fn init(d: usize, k: usize, targets: &[f64], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = 1.0 / (d as f64).sqrt();
        let out = 1.0 / (k as f64).sqrt();
        let mut theta = Vec::with_capacity(k * (d + 2) + 1);
        for _ in 0..k {
            for _ in 0..=d {
                theta.push(rng.random_range(-2.0..2.0) * hidden);
            }
            theta.push(rng.random_range(-1.0..1.0) * out);
        }
        theta.push(targets.iter().sum::<f64>() / targets.len() as f64);
        Self { d, k, theta }
    }

    fn len(&self) -> usize {
        self.theta.len()
    }

    fn stride(&self) -> usize {
        self.d + 2
    }

    fn is_weight(&self, p: usize) -> bool {
        p + 1 < self.theta.len()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let s = self.stride();
        let mut acc = self.theta[self.len() - 1];
        for i in 0..self.k {
            let block = &self.theta[i * s..(i + 1) * s];
            let z = block[..self.d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + block[self.d];
            acc += block[self.d + 1] * sigmoid(z);
        }
        acc
    }

    /// Gradient of the output with respect to all parameters at `x`.
    fn output_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let s = self.stride();
        let d = self.d;
        let mut acc = self.theta[self.len() - 1];
        for i in 0..self.k {
            let block = &self.theta[i * s..(i + 1) * s];
            let z = block[..d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + block[d];
            let sig = sigmoid(z);
            let w2 = block[d + 1];
            acc += w2 * sig;
            let g = w2 * sig * (1.0 - sig);
            let o = &mut out[i * s..(i + 1) * s];
            for j in 0..d {
                o[j] = g * x[j];
            }
            o[d] = g;
            o[d + 1] = sig;
        }
        let last = out.len() - 1;
        out[last] = 1.0;
        acc
    }

    fn mse(&self, samples: &SampleSet) -> f64 {
        let n = samples.len();
        (0..n)
            .map(|i| {
                let r = self.eval(samples.input(i)) - samples.targets()[i];
                r * r
            })
            .sum::<f64>()
            / n as f64
    }

    fn weight_norm2(&self) -> f64 {
        self.theta[..self.len() - 1].iter().map(|w| w * w).sum()
    }

    fn into_net(self) -> Result<ProxyNet> {
        let (d, k, s) = (self.d, self.k, self.stride());
        let mut w1 = Vec::with_capacity(k * d);
        let mut b1 = Vec::with_capacity(k);
        let mut w2 = Vec::with_capacity(k);
        for i in 0..k {
            let block = &self.theta[i * s..(i + 1) * s];
            w1.extend_from_slice(&block[..d]);
            b1.push(block[d]);
            w2.push(block[d + 1]);
        }
        ProxyNet::new(d, k, w1, w2, b1, self.theta[self.theta.len() - 1])
    }
}

fn stalled(history: &[f64], patience: usize, tol: f64) -> bool {
    if history.len() <= patience {
        return false;
    }
    let now = history[history.len() - 1];
    let then = history[history.len() - 1 - patience];
    then <= 0.0 || (then - now) / then < tol
}

fn levenberg_marquardt(samples: &SampleSet, mut params: Params, cfg: &TrainConfig) -> Result<FitReport> {
    let n = samples.len();
    let p = params.len();
    // objective = 0.5 |r|^2 + 0.5 ridge |theta_w|^2
    let ridge = cfg.tikhonov * n as f64;
    let objective = |pr: &Params| 0.5 * pr.mse(samples) * n as f64 + 0.5 * ridge * pr.weight_norm2();

    let mut jt = DMatrix::<f64>::zeros(p, n);
    let mut resid = DVector::<f64>::zeros(n);
    let mut mu = 1e-3;
    let mut current = objective(&params);
    let mut history = vec![params.mse(samples)];
    let mut iterations = 0;
    let mut diverged = false;

    'outer: while iterations < cfg.max_iterations {
        iterations += 1;
        for i in 0..n {
            let out = &mut jt.as_mut_slice()[i * p..(i + 1) * p];
            let f = params.output_gradient(samples.input(i), out);
            resid[i] = f - samples.targets()[i];
        }
        let mut normal = &jt * jt.transpose();
        let mut grad = &jt * &resid;
        if ridge > 0.0 {
            for q in 0..p {
                if params.is_weight(q) {
                    normal[(q, q)] += ridge;
                    grad[q] += ridge * params.theta[q];
                }
            }
        }
        let diag: Vec<f64> = (0..p).map(|q| normal[(q, q)].max(1e-9)).collect();

        loop {
            let mut damped = normal.clone();
            for q in 0..p {
                damped[(q, q)] += mu * diag[q];
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&grad),
                None => {
                    mu *= 10.0;
                    if mu > 1e16 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut trial = params.clone();
            for q in 0..p {
                trial.theta[q] -= step[q];
            }
            let value = objective(&trial);
            if !value.is_finite() {
                diverged = true;
                mu *= 10.0;
                if mu > 1e16 {
                    break 'outer;
                }
                continue;
            }
            if value < current {
                params = trial;
                current = value;
                mu = (mu / 3.0).max(1e-15);
                diverged = false;
                break;
            }
            mu *= 4.0;
            if mu > 1e16 {
                // no descent direction left: converged to working precision
                break 'outer;
            }
        }
        history.push(params.mse(samples));
        if stalled(&history, cfg.patience, cfg.rel_tolerance) || *history.last().unwrap() < 1e-30 {
            break;
        }
    }

    let mse = params.mse(samples);
    let net = params.into_net()?;
    let mut warnings = Vec::new();
    if diverged {
        warnings.push("optimizer produced non-finite iterates; returning best iterate".into());
    }
    Ok(FitReport {
        net,
        mse,
        iterations,
        optimizer: Optimizer::LevenbergMarquardt,
        diverged,
        warnings,
    })
}

fn adam(samples: &SampleSet, mut params: Params, cfg: &TrainConfig) -> Result<FitReport> {
    let n = samples.len();
    let p = params.len();
    let (beta1, beta2, eps) = (0.9f64, 0.999f64, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_ada0);
    let mut m = vec![0.0; p];
    let mut v = vec![0.0; p];
    let mut g = vec![0.0; p];
    let mut row = vec![0.0; p];
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0i32;
    let batch = cfg.batch_size.max(1);

    let mut best = params.clone();
    let mut best_mse = params.mse(samples);
    let mut history = vec![best_mse];
    let mut diverged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            g.iter_mut().for_each(|x| *x = 0.0);
            for &i in chunk {
                let f = params.output_gradient(samples.input(i), &mut row);
                let r = f - samples.targets()[i];
                for q in 0..p {
                    g[q] += r * row[q];
                }
            }
            let scale = 2.0 / chunk.len() as f64;
            t += 1;
            let c1 = 1.0 - beta1.powi(t);
            let c2 = 1.0 - beta2.powi(t);
            for q in 0..p {
                let mut gq = g[q] * scale;
                if params.is_weight(q) {
                    gq += 2.0 * cfg.tikhonov * params.theta[q];
                }
                m[q] = beta1 * m[q] + (1.0 - beta1) * gq;
                v[q] = beta2 * v[q] + (1.0 - beta2) * gq * gq;
                params.theta[q] -= cfg.adam_step * (m[q] / c1) / ((v[q] / c2).sqrt() + eps);
            }
        }
        let mse = params.mse(samples);
        if !mse.is_finite() {
            diverged = true;
            break;
        }
        if mse < best_mse {
            best_mse = mse;
            best = params.clone();
        }
        history.push(best_mse);
        if stalled(&history, cfg.patience, cfg.rel_tolerance) {
            break;
        }
    }

    let mut warnings = Vec::new();
    if diverged {
        warnings.push("optimizer produced non-finite iterates; returning best iterate".into());
    }
    Ok(FitReport {
        net: best.into_net()?,
        mse: best_mse,
        iterations: epochs,
        optimizer: Optimizer::Adam,
        diverged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxy::Hyperrect;
    use crate::proxy::DomainMap;

    fn grid_1d(n: usize) -> Vec<f64> {
        (0..n).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn default_k_rule() {
        assert_eq!(default_neuron_count(4096, 2), 16);
        assert_eq!(default_neuron_count(4096, 8), 3);
        assert_eq!(default_neuron_count(1, 3), 1);
    }

    #[test]
    fn rejects_bad_input() {
        let s = SampleSet::new(1, vec![0.0], vec![f64::NAN]).unwrap();
        assert!(fit(&s, 1, &TrainConfig::default()).is_err());
        let s = SampleSet::new(1, vec![0.0], vec![1.0]).unwrap();
        assert!(fit(&s, 0, &TrainConfig::default()).is_err());
    }

    #[test]
    fn constant_targets_give_exact_constant() {
        let xs = grid_1d(32);
        let s = SampleSet::new(1, xs, vec![0.25; 32]).unwrap();
        let rep = fit(&s, 4, &TrainConfig::default()).unwrap();
        assert_eq!(rep.mse, 0.0);
        for x in [-1.0, 0.0, 0.3, 1.0] {
            assert_eq!(rep.net.eval(&[x]).unwrap(), 0.25);
        }
    }

    #[test]
    fn recovers_single_sigmoid() {
        let truth = ProxyNet::new(1, 1, vec![3.0], vec![1.5], vec![0.4], -0.7).unwrap();
        let xs = grid_1d(256);
        let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(&[x]).unwrap()).collect();
        let s = SampleSet::new(1, xs, ys).unwrap();
        let cfg = TrainConfig { tikhonov: 0.0, ..TrainConfig::with_seed(1) };
        let rep = fit(&s, 1, &cfg).unwrap();
        assert!(rep.mse < 1e-6, "mse {}", rep.mse);
        for i in 0..101 {
            let x = -1.0 + 0.02 * i as f64;
            assert!((rep.net.eval(&[x]).unwrap() - truth.eval(&[x]).unwrap()).abs() < 1e-3);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let xs = grid_1d(64);
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let s = SampleSet::new(1, xs, ys).unwrap();
        let a = fit(&s, 5, &TrainConfig::with_seed(3)).unwrap();
        let b = fit(&s, 5, &TrainConfig::with_seed(3)).unwrap();
        assert_eq!(a.net, b.net);
        let cfg = TrainConfig { optimizer: Optimizer::Adam, max_epochs: 20, ..TrainConfig::with_seed(3) };
        assert_eq!(fit(&s, 5, &cfg).unwrap().net, fit(&s, 5, &cfg).unwrap().net);
    }

    #[test]
    fn adam_reduces_error() {
        let xs = grid_1d(512);
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).tanh()).collect();
        let s = SampleSet::new(1, xs, ys).unwrap();
        let cfg = TrainConfig { optimizer: Optimizer::Adam, max_epochs: 200, ..TrainConfig::with_seed(2) };
        let rep = fit(&s, 4, &cfg).unwrap();
        assert_eq!(rep.optimizer, Optimizer::Adam);
        let mean = s.targets().iter().sum::<f64>() / 512.0;
        let var = s.targets().iter().map(|y| (y - mean).powi(2)).sum::<f64>() / 512.0;
        assert!(rep.mse < 0.01 * var, "mse {} var {var}", rep.mse);
    }

    #[test]
    fn gaussian_mixture_2d() {
        let comps = [(0.8, -0.3, 0.2, 0.3), (0.5, 0.4, -0.5, 0.2), (0.6, 0.1, 0.6, 0.35)];
        let f = |x: f64, y: f64| {
            comps
                .iter()
                .map(|(w, mx, my, s)| w * (-((x - mx).powi(2) + (y - my).powi(2)) / (2.0 * s * s)).exp())
                .sum::<f64>()
        };
        let halton = crate::sampling::Halton::new(2).unwrap();
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for i in 0..2048 {
            let u = halton.point(i as u64 + 1);
            let (x, y) = (2.0 * u[0] - 1.0, 2.0 * u[1] - 1.0);
            inputs.extend([x, y]);
            targets.push(f(x, y));
        }
        let map = DomainMap::from_targets(&Hyperrect::symmetric(2), &targets).unwrap();
        let s = map.normalize(&inputs, &targets).unwrap();
        let cfg = TrainConfig { max_iterations: 150, ..TrainConfig::with_seed(7) };
        let rep = fit(&s, 35, &cfg).unwrap();
        let range = map.range_hi - map.range_lo;
        let mut se = 0.0;
        let m = 40;
        for i in 0..m {
            for j in 0..m {
                let (x, y) = (-0.99 + 1.98 * i as f64 / (m - 1) as f64, -0.97 + 1.96 * j as f64 / (m - 1) as f64);
                let p = map.denormalize_value(rep.net.eval(&[x, y]).unwrap());
                se += (p - f(x, y)).powi(2);
            }
        }
        let rmse = (se / (m * m) as f64).sqrt();
        assert!(rmse < 0.05 * range, "rmse {rmse} range {range}");
    }
}
