//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] holds one random 2D test integrand on `[0, 1]^2` and a proxy
//! network fitted to it. The page calls [`Demo::integrate_box`] for a
//! rectangle dragged on the canvas and [`Demo::integrate_segment`] for a
//! line drawn on it; both return the proxy value next to a reference.

use qnet_core::estimators::{relative_error, QnetConfig};
use qnet_core::integrands::{sample_family, Family, IntegrandSpec, Integrand};
use qnet_core::model::Proxy;
use qnet_core::quadrature::GaussLegendre;
use qnet_core::Hyperrect;
use serde_json::json;
use wasm_bindgen::prelude::*;

const D: usize = 2;

#[wasm_bindgen]
pub struct Demo {
    spec: IntegrandSpec,
    proxy: Proxy,
    report: String,
}

#[wasm_bindgen]
impl Demo {
    /// Samples an integrand of `family` (GM, GMD, HR or ZP) with `seed` and
    /// fits a proxy on `n` scrambled Halton points. `k = 0` picks the
    /// default neuron count.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, seed: u32, n: u32, k: u32) -> Result<Demo, String> {
        let family: Family = family.parse().map_err(|e| format!("{e}"))?;
        let n = n as usize;
        if !(16..=20_000).contains(&n) {
            return Err(format!("N must be in 16..=20000, got {n}"));
        }
        let spec = sample_family(family, D, seed as u64).map_err(|e| e.to_string())?;
        let region = spec.domain();
        let cfg = QnetConfig::new((k > 0).then_some(k as usize), seed as u64, seed as u64);
        let (proxy, flags) = qnet_core::estimators::train_proxy(&spec, &region, n, &cfg).map_err(|e| e.to_string())?;
        let value = proxy.integral().map_err(|e| e.to_string())?;
        let reference = spec.reference_integral(&region).map_err(|e| e.to_string())?.value;
        let report = json!({
            "family": family.name(),
            "seed": seed,
            "n": n,
            "k": proxy.net().neurons(),
            "integral": value,
            "reference": reference,
            "rel_error": relative_error(value, reference),
            "flags": flags,
        })
        .to_string();
        Ok(Demo { spec, proxy, report })
    }

    /// JSON summary of the fit.
    pub fn report(&self) -> String {
        self.report.clone()
    }

    /// `m x m` cell-centred grid of values, row by row from `y = 0`,
    /// of the proxy (`proxy = true`) or the integrand.
    pub fn grid(&self, m: u32, proxy: bool) -> Vec<f64> {
        let m = m.max(1) as usize;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let x = [(j as f64 + 0.5) / m as f64, (i as f64 + 0.5) / m as f64];
                out.push(if proxy { self.proxy.eval(&x).unwrap_or(f64::NAN) } else { self.spec.eval(&x) });
            }
        }
        out
    }

    /// Integral over `[x0, x1] x [y0, y1]` (corners in any order) as JSON.
    pub fn integrate_box(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<String, String> {
        let clamp = |v: f64| v.clamp(0.0, 1.0);
        let lower = vec![clamp(x0.min(x1)), clamp(y0.min(y1))];
        let upper = vec![clamp(x0.max(x1)), clamp(y0.max(y1))];
        let region = Hyperrect::new(lower, upper).map_err(|e| e.to_string())?;
        let value = self.proxy.integral_box(&region).map_err(|e| e.to_string())?;
        let reference = self.spec.reference_integral(&region).map_err(|e| e.to_string())?.value;
        Ok(json!({
            "value": value,
            "reference": reference,
            "rel_error": relative_error(value, reference),
        })
        .to_string())
    }

    /// Line integral from `(x0, y0)` to `(x1, y1)` as JSON. The reference
    /// is composite Gauss-Legendre on the integrand.
    pub fn integrate_segment(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<String, String> {
        let (p0, p1) = ([x0, y0], [x1, y1]);
        let (value, clipped) = self.proxy.segment(&p0, &p1).map_err(|e| e.to_string())?;
        let reference = segment_reference(&self.spec, &p0, &p1);
        Ok(json!({
            "value": value,
            "reference": reference,
            "rel_error": relative_error(value, reference),
            "clipped": clipped,
        })
        .to_string())
    }

    /// Weight file of the fitted proxy.
    pub fn weights_json(&self) -> Result<String, String> {
        self.proxy.weight_file().and_then(|w| w.to_json()).map_err(|e| e.to_string())
    }
}

/// Line integral of `f` along the part of `p0 -> p1` inside the unit square.
fn segment_reference(f: &dyn Integrand, p0: &[f64; 2], p1: &[f64; 2]) -> f64 {
    let dir = [p1[0] - p0[0], p1[1] - p0[1]];
    let len = dir[0].hypot(dir[1]);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for j in 0..D {
        if dir[j] == 0.0 {
            if !(0.0..=1.0).contains(&p0[j]) {
                return 0.0;
            }
            continue;
        }
        let (a, b) = ((0.0 - p0[j]) / dir[j], (1.0 - p0[j]) / dir[j]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if t1 <= t0 {
        return 0.0;
    }
    let panels = 400;
    len * GaussLegendre::new(10).integrate(t0, t1, panels, |t| {
        f.eval(&[p0[0] + t * dir[0], p0[1] + t * dir[1]])
    })
}
