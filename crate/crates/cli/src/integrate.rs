use crate::output::{err, parse_box, parse_dims, parse_list, preamble, run_config, sig12, writer, CliResult, BUILD_ID};
use clap::Args;
use qnet_core::model::Proxy;
use qnet_core::proxy::WeightFile;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
pub struct IntegrateArgs {
    /// Weight file written by `train`.
    #[arg(long, short)]
    pub weights: PathBuf,
    /// Lower corner of a sub-box (comma separated, true coordinates).
    #[arg(long, requires = "upper", conflicts_with_all = ["marginalize", "segment"])]
    pub lower: Option<String>,
    #[arg(long, requires = "lower")]
    pub upper: Option<String>,
    /// Integrate out these dimensions (1-based, comma separated) and write
    /// the marginal on a grid over the others.
    #[arg(long, conflicts_with = "segment")]
    pub marginalize: Option<String>,
    /// Grid points per remaining dimension for `--marginalize`.
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    /// Line integral from P0 to P1 (each comma separated).
    #[arg(long, num_args = 2, value_names = ["P0", "P1"])]
    pub segment: Option<Vec<String>>,
    /// Output for the marginal grid CSV (stdout when omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn run(args: IntegrateArgs) -> CliResult {
    let config = run_config("integrate", &args);
    let file = WeightFile::load(&args.weights).map_err(err)?;
    let proxy = Proxy::from_weight_file(&file).map_err(err)?;
    let d = proxy.dim();

    if let Some(dims) = &args.marginalize {
        return write_marginal(&proxy, &parse_dims(dims, d)?, &args, &config);
    }
    let mut record = serde_json::json!({ "weights": args.weights, "build": BUILD_ID, "run_config": config });
    let value = if let Some(points) = &args.segment {
        let p0: Vec<f64> = parse_list(&points[0], "P0")?;
        let p1: Vec<f64> = parse_list(&points[1], "P1")?;
        let (v, clipped) = proxy.segment(&p0, &p1).map_err(err)?;
        if clipped {
            eprintln!("warning: the segment leaves the domain; only the inside part was integrated");
        }
        record["operation"] = "segment".into();
        record["clipped"] = clipped.into();
        v
    } else if let (Some(l), Some(u)) = (&args.lower, &args.upper) {
        let region = parse_box(l, u)?;
        let domain = proxy.map().region().map_err(err)?;
        if region.dim() != d {
            return Err(format!("box has {} dimensions, the proxy has {d}", region.dim()));
        }
        for j in 0..d {
            let slack = 1e-12 * domain.width(j);
            if region.lower()[j] < domain.lower()[j] - slack || region.upper()[j] > domain.upper()[j] + slack {
                return Err(format!("box leaves the proxy domain along x{}", j + 1));
            }
        }
        record["operation"] = "box".into();
        proxy.integral_box(&region).map_err(err)?
    } else {
        record["operation"] = "domain".into();
        proxy.integral().map_err(err)?
    };
    record["value"] = value.into();
    println!("{}", sig12(value));
    println!("{record}");
    Ok(())
}

fn write_marginal(proxy: &Proxy, dims: &[usize], args: &IntegrateArgs, config: &serde_json::Value) -> CliResult {
    let marginal = proxy.marginal(dims).map_err(err)?;
    let rest = marginal.remaining_dims().to_vec();
    let g = args.grid.max(2);
    let total = (g as u64).checked_pow(rest.len() as u32).filter(|&t| t <= 10_000_000);
    let Some(total) = total else {
        return Err(format!("a {g}-point grid over {} dimensions is too large", rest.len()));
    };
    let map = proxy.map();
    let mut out = writer(args.out.as_deref())?;
    let mut lines = preamble(config);
    lines.push(format!(
        "marginal over {}",
        dims.iter().map(|j| format!("x{}", j + 1)).collect::<Vec<_>>().join(",")
    ));
    for line in lines {
        writeln!(out, "# {line}").map_err(err)?;
    }
    let header: Vec<String> = rest.iter().map(|j| format!("x{}", j + 1)).collect();
    writeln!(out, "{},value", header.join(",")).map_err(err)?;
    let mut x = vec![0.0; rest.len()];
    for idx in 0..total {
        let mut r = idx;
        for (i, &j) in rest.iter().enumerate().rev() {
            let t = (r % g as u64) as f64 / (g - 1) as f64;
            r /= g as u64;
            x[i] = map.lower[j] + t * (map.upper[j] - map.lower[j]);
        }
        let v = marginal.eval(&x).map_err(err)?;
        let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{},{}", coords.join(","), v).map_err(err)?;
    }
    out.flush().map_err(err)?;
    Ok(())
}
