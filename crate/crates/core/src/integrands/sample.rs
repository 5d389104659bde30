use super::{Family, Gaussian, GmSpec, GmdSpec, HrSpec, IntegrandSpec, WeightedBox, ZonePlateSpec};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ZONE_PLATE_FREQUENCY: f64 = 220.0;
const MIN_SIDE: f64 = 0.05;

/// A random member of `family` on `[0, 1]^d`, fixed by `seed`.
pub fn sample_family(family: Family, d: usize, seed: u64) -> Result<IntegrandSpec> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match family {
        Family::Gm => IntegrandSpec::Gm(mixture(d, &mut rng)),
        Family::Gmd => {
            let base = mixture(d, &mut rng);
            let thresholds = (0..d).map(|_| rng.random_range(0.1..0.9)).collect();
            IntegrandSpec::Gmd(GmdSpec { base, thresholds })
        }
        Family::Hr => {
            let n = rng.random_range(10..=50);
            let boxes = (0..n)
                .map(|_| {
                    let (mut lower, mut upper) = (Vec::with_capacity(d), Vec::with_capacity(d));
                    for _ in 0..d {
                        loop {
                            let (a, b): (f64, f64) = (rng.random(), rng.random());
                            if (a - b).abs() >= MIN_SIDE {
                                lower.push(a.min(b));
                                upper.push(a.max(b));
                                break;
                            }
                        }
                    }
                    WeightedBox { weight: 1.0, lower, upper }
                })
                .collect();
            IntegrandSpec::Hr(HrSpec { d, boxes })
        }
        Family::ZonePlate => IntegrandSpec::ZonePlate(ZonePlateSpec { d, frequency: ZONE_PLATE_FREQUENCY }),
    })
}

fn mixture(d: usize, rng: &mut ChaCha8Rng) -> GmSpec {
    let n = rng.random_range(5..=40);
    let components = (0..n)
        .map(|_| Gaussian {
            weight: rng.random_range(0.5..1.5),
            mean: (0..d).map(|_| rng.random()).collect(),
            scale: (0..d).map(|_| rng.random_range(0.03..0.2)).collect(),
        })
        .collect();
    GmSpec { d, components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::Integrand;
    use crate::proxy::Hyperrect;

    #[test]
    fn deterministic_and_well_formed() {
        for family in Family::ALL {
            assert_eq!(sample_family(family, 2, 4).unwrap(), sample_family(family, 2, 4).unwrap());
        }
        let IntegrandSpec::Gm(g) = sample_family(Family::Gm, 2, 17).unwrap() else { unreachable!() };
        assert!(g.components.iter().all(|c| c.scale.iter().all(|&s| s > 0.0)));
        assert!(g.integral(&[0.0; 2], &[1.0; 2]) > 0.0);
        let IntegrandSpec::Hr(h) = sample_family(Family::Hr, 4, 2).unwrap() else { unreachable!() };
        for b in &h.boxes {
            for j in 0..4 {
                assert!(b.lower[j] >= 0.0 && b.upper[j] <= 1.0 && b.upper[j] - b.lower[j] >= MIN_SIDE);
            }
        }
        assert!(sample_family(Family::Hr, 0, 1).is_err());
        let zp = sample_family(Family::ZonePlate, 2, 0).unwrap();
        assert_eq!(zp.eval(&[0.0, 0.0]), 1.0);
        assert!(zp.reference_integral(&Hyperrect::unit(2)).is_ok());
    }
}
