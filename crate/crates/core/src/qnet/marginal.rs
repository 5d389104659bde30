use super::{cube_integral, integrate, weighted_sum};
use crate::error::{Error, Result};
use crate::proxy::{validate_index_set, DomainMap, ProxyNet, WeightFile};
use serde::{Deserialize, Serialize};

/// A network integrated over a subset of its inputs on `[-1, 1]^r`, evaluated
/// in closed form over the remaining inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFn {
    parent: ProxyNet,
    dims: Vec<usize>,
    rest: Vec<usize>,
    /// `|W1|` restricted to the integrated dims, one row per neuron.
    integrated_weights: Vec<Vec<f64>>,
}

/// Serialized form of a [`MarginalFn`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub parent: WeightFile,
    pub integrated_dims: Vec<usize>,
}

/// Integrates `net` over the inputs listed in `dims` (0-based).
pub fn marginalize(net: &ProxyNet, dims: &[usize]) -> Result<MarginalFn> {
    let d = net.dim();
    let mask = validate_index_set(dims, d)?;
    if dims.is_empty() || dims.len() >= d {
        return Err(Error::IndexSet(format!(
            "marginalize needs 1..{d} dims, got {}; use integrate for all of them",
            dims.len()
        )));
    }
    let rest = (0..d).filter(|&j| !mask[j]).collect();
    let integrated_weights = (0..net.neurons())
        .map(|i| dims.iter().map(|&j| net.w1_row(i)[j].abs()).collect())
        .collect();
    Ok(MarginalFn { parent: net.clone(), dims: dims.to_vec(), rest, integrated_weights })
}

impl MarginalFn {
    pub fn parent(&self) -> &ProxyNet {
        &self.parent
    }

    pub fn integrated_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn remaining_dims(&self) -> &[usize] {
        &self.rest
    }

    /// Value at `x_rest`, given in the order of [`Self::remaining_dims`].
    pub fn eval(&self, x_rest: &[f64]) -> Result<f64> {
        if x_rest.len() != self.rest.len() {
            return Err(Error::DimensionMismatch { expected: self.rest.len(), got: x_rest.len() });
        }
        if x_rest.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("marginal input"));
        }
        let net = &self.parent;
        let v: Vec<f64> = (0..net.neurons())
            .map(|i| {
                let row = net.w1_row(i);
                let bias = net.b1()[i] + self.rest.iter().zip(x_rest).map(|(&j, x)| row[j] * x).sum::<f64>();
                cube_integral(self.integrated_weights[i].clone(), bias)
            })
            .collect();
        Ok(weighted_sum(net.w2(), &v) + 2f64.powi(self.dims.len() as i32) * net.b2())
    }

    /// Integral of the marginal over the remaining dims, i.e. of the parent
    /// over the whole domain.
    pub fn integrate_remaining(&self) -> Result<f64> {
        integrate(&self.parent)
    }

    pub fn to_spec(&self, domain_map: DomainMap) -> Result<MarginalSpec> {
        Ok(MarginalSpec {
            parent: WeightFile::new(&self.parent, domain_map)?,
            integrated_dims: self.dims.clone(),
        })
    }

    pub fn from_spec(spec: &MarginalSpec) -> Result<Self> {
        marginalize(&spec.parent.net()?, &spec.integrated_dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxy::test_nets::random_net;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn fubini_chain_2d() {
        let net = random_net(2, 12, 2.0, 5);
        let g = marginalize(&net, &[0]).unwrap();
        let rule = GaussLegendre::new(20);
        let chain = rule.integrate(-1.0, 1.0, 4, |x| g.eval(&[x]).unwrap());
        let full = integrate(&net).unwrap();
        assert!(((chain - full) / full).abs() < 1e-8);
        assert!((g.integrate_remaining().unwrap() - full).abs() < 1e-10 * full.abs());
    }

    #[test]
    fn matches_quadrature_over_integrated_dims() {
        let net = random_net(3, 10, 2.0, 9);
        let g = marginalize(&net, &[0, 2]).unwrap();
        let rule = GaussLegendre::new(20);
        for &x1 in &[-0.9, -0.2, 0.4, 1.0] {
            let q = rule.integrate_box(&[-1.0; 2], &[1.0; 2], 3, |t| net.eval(&[t[0], x1, t[1]]).unwrap());
            let v = g.eval(&[x1]).unwrap();
            assert!(((v - q) / q).abs() < 1e-6, "{v} vs {q}");
        }
    }

    #[test]
    fn flat_dimension_doubles_slice() {
        let net = ProxyNet::new(2, 2, vec![0.0, 1.5, 0.0, -0.7], vec![1.2, 0.4], vec![0.1, -0.3], 0.25).unwrap();
        let g = marginalize(&net, &[0]).unwrap();
        for &x in &[-1.0, 0.3, 0.8] {
            let slice = net.eval(&[0.37, x]).unwrap();
            assert!((g.eval(&[x]).unwrap() - 2.0 * slice).abs() < 1e-14);
        }
    }

    #[test]
    fn slicing_commutes_with_marginalizing() {
        let net = random_net(4, 8, 1.5, 2);
        let g = marginalize(&net, &[1, 3]).unwrap();
        let c = [0.3, -0.6];
        let sliced = net.slice_reparam(&[0, 2], &c).unwrap();
        let direct = integrate(&sliced).unwrap();
        assert!((g.eval(&c).unwrap() - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn spec_round_trip_and_errors() {
        let net = random_net(3, 4, 1.0, 1);
        let g = marginalize(&net, &[2]).unwrap();
        let spec = g.to_spec(DomainMap::identity(3)).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back = MarginalFn::from_spec(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(marginalize(&net, &[0, 1, 2]).is_err());
        assert!(marginalize(&net, &[1, 1]).is_err());
        assert!(marginalize(&net, &[3]).is_err());
        assert!(g.eval(&[0.0]).is_err());
    }
}
