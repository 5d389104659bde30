use super::integrate;
use crate::error::{Error, Result};
use crate::proxy::ProxyNet;

/// Line integral along a segment, after clipping it to `[-1, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentIntegral {
    pub value: f64,
    /// Length of the part of the segment inside the domain.
    pub length: f64,
    /// Set when part of the segment was cut off at the domain boundary.
    pub clipped: bool,
}

/// `int f ds` from `p0` to `p1`, computed by rotating the segment onto the
/// first axis, slicing the other axes at zero and integrating in closed form.
pub fn integrate_segment(net: &ProxyNet, p0: &[f64], p1: &[f64]) -> Result<SegmentIntegral> {
    let d = net.dim();
    for p in [p0, p1] {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("segment endpoint"));
        }
    }
    if p0 == p1 {
        return Err(Error::InvalidArgument("segment endpoints coincide".into()));
    }
    let Some((t0, t1)) = clip_to_cube(p0, p1) else {
        return Ok(SegmentIntegral { value: 0.0, length: 0.0, clipped: true });
    };
    let clipped = t0 > 0.0 || t1 < 1.0;
    let q0: Vec<f64> = (0..d).map(|j| p0[j] + t0 * (p1[j] - p0[j])).collect();
    let q1: Vec<f64> = (0..d).map(|j| p0[j] + t1 * (p1[j] - p0[j])).collect();
    let delta: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| b - a).collect();
    let length = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
    if length == 0.0 {
        return Ok(SegmentIntegral { value: 0.0, length: 0.0, clipped });
    }
    let dir: Vec<f64> = delta.iter().map(|v| v / length).collect();
    let center: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| 0.5 * (a + b)).collect();

    // M = H diag(L/2, 1, ..., 1) where the reflection H maps e_1 to dir
    let mut m = householder(&dir);
    for row in 0..d {
        m[row * d] *= 0.5 * length;
    }
    let det = 0.5 * length;
    let moved = net.affine_reparam(&m, &center)?;
    let line = if d == 1 {
        moved
    } else {
        let transverse: Vec<usize> = (1..d).collect();
        moved.slice_reparam(&transverse, &vec![0.0; d - 1])?
    };
    Ok(SegmentIntegral { value: det * integrate(&line)?, length, clipped })
}

/// Orthogonal `d x d` matrix (row-major) whose first column is `u`.
fn householder(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut v: Vec<f64> = u.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        h[i * d + i] = 1.0;
    }
    if vv < 1e-30 {
        return h;
    }
    for i in 0..d {
        for j in 0..d {
            h[i * d + j] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    h
}

/// Parameter range of `p0 + t (p1 - p0)`, `t` in `[0, 1]`, inside `[-1, 1]^d`.
fn clip_to_cube(p0: &[f64], p1: &[f64]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for j in 0..p0.len() {
        let step = p1[j] - p0[j];
        if step == 0.0 {
            if p0[j].abs() > 1.0 {
                return None;
            }
            continue;
        }
        let (a, b) = ((-1.0 - p0[j]) / step, (1.0 - p0[j]) / step);
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo < hi).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxy::test_nets::random_net;
    use crate::quadrature::GaussLegendre;

    fn along(net: &ProxyNet, p0: &[f64], p1: &[f64]) -> f64 {
        let len = p0.iter().zip(p1).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        let rule = GaussLegendre::new(20);
        len * rule.integrate(0.0, 1.0, 16, |t| {
            let x: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| a + t * (b - a)).collect();
            net.eval(&x).unwrap()
        })
    }

    #[test]
    fn constant_along_axis() {
        let net = ProxyNet::constant(3, 1.75).unwrap();
        let s = integrate_segment(&net, &[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((s.value - 3.5).abs() < 1e-14 && !s.clipped);
    }

    #[test]
    fn axis_segment_equals_slice() {
        let net = random_net(3, 9, 2.0, 4);
        let s = integrate_segment(&net, &[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        let slice = integrate(&net.slice_reparam(&[1, 2], &[0.0, 0.0]).unwrap()).unwrap();
        assert!((s.value - slice).abs() < 1e-12 * slice.abs().max(1.0));
    }

    #[test]
    fn diagonal_segments() {
        for seed in 0..5 {
            let net = random_net(3, 12, 2.0, seed);
            let (p0, p1) = ([-0.8, 0.3, -0.5], [0.6, -0.9, 0.7]);
            let s = integrate_segment(&net, &p0, &p1).unwrap();
            let q = along(&net, &p0, &p1);
            assert!(((s.value - q) / q).abs() < 1e-9, "{} vs {q}", s.value);
        }
        let net = random_net(1, 5, 2.0, 3);
        let s = integrate_segment(&net, &[0.5], &[-0.25]).unwrap();
        assert!((s.value - along(&net, &[0.5], &[-0.25])).abs() < 1e-12);
    }

    #[test]
    fn clipping() {
        let net = random_net(2, 6, 1.0, 8);
        let s = integrate_segment(&net, &[-2.0, 0.5], &[2.0, 0.5]).unwrap();
        assert!(s.clipped && (s.length - 2.0).abs() < 1e-14);
        let inside = integrate_segment(&net, &[-1.0, 0.5], &[1.0, 0.5]).unwrap();
        assert!((s.value - inside.value).abs() < 1e-12);
        let miss = integrate_segment(&net, &[-2.0, 1.5], &[2.0, 1.5]).unwrap();
        assert!(miss.clipped && miss.value == 0.0);
        assert!(integrate_segment(&net, &[0.0, 0.0], &[0.0, 0.0]).is_err());
    }
}
