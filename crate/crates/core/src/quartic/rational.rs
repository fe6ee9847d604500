//! Rational quartic differentials `f(z) dz⁴` on the plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub re: f64,
    pub im: f64,
    #[serde(default = "one")]
    pub mult: u32,
}

fn one() -> u32 {
    1
}

impl SingularPoint {
    pub fn new(z: Complex64, mult: u32) -> Self {
        SingularPoint {
            re: z.re,
            im: z.im,
            mult,
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `f(z) = Π (z - p_i)^{n_i} / Π (z - q_j)^{m_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RationalQuartic {
    #[serde(default)]
    pub zeros: Vec<SingularPoint>,
    #[serde(default)]
    pub poles: Vec<SingularPoint>,
}

/// A singularity with signed order: positive for zeros, negative for poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub z: Complex64,
    pub order: i64,
}

impl Singularity {
    /// Exponent of `(z - z₀)` in the fourth root `h = f^{1/4}`.
    pub fn exponent(&self) -> f64 {
        self.order as f64 / 4.0
    }
}

impl RationalQuartic {
    /// Validates multiplicities and distinctness of all points.
    pub fn new(zeros: Vec<SingularPoint>, poles: Vec<SingularPoint>) -> Result<Self> {
        let rq = RationalQuartic { zeros, poles };
        rq.validate()?;
        Ok(rq)
    }

    pub fn validate(&self) -> Result<()> {
        let all: Vec<&SingularPoint> = self.zeros.iter().chain(&self.poles).collect();
        for p in &all {
            if p.mult == 0 {
                return Err(Error::InvalidArgument(
                    "multiplicity must be at least 1".into(),
                ));
            }
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::InvalidArgument(
                    "singular point is not finite".into(),
                ));
            }
        }
        for (i, a) in all.iter().enumerate() {
            for b in &all[..i] {
                if a.z() == b.z() {
                    let both = i >= self.zeros.len() && self.zeros.iter().any(|z| z.z() == a.z());
                    return Err(if both {
                        Error::CoincidentSingularity(format!("{}", a.z()))
                    } else {
                        Error::InvalidArgument(format!("singular point {} listed twice", a.z()))
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rq: RationalQuartic = serde_json::from_str(s)?;
        rq.validate()?;
        Ok(rq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("quartic serializes")
    }

    /// `Σ m_j - Σ n_i`: total pole order minus total zero order.
    pub fn balance(&self) -> i64 {
        let sum = |v: &[SingularPoint]| v.iter().map(|p| p.mult as i64).sum::<i64>();
        sum(&self.poles) - sum(&self.zeros)
    }

    /// On the closed sphere the point at infinity must be regular, which
    /// forces the balance to equal 8.
    pub fn validate_sphere(&self) -> Result<()> {
        match self.balance() {
            8 => Ok(()),
            b => Err(Error::QuarticBalance(b)),
        }
    }

    /// Zeros then poles, with signed orders.
    pub fn singularities(&self) -> Vec<Singularity> {
        let z = self.zeros.iter().map(|p| Singularity {
            z: p.z(),
            order: p.mult as i64,
        });
        let q = self.poles.iter().map(|p| Singularity {
            z: p.z(),
            order: -(p.mult as i64),
        });
        z.chain(q).collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.singularities()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| {
                acc * (z - s.z).powi(s.order as i32)
            })
    }

    /// Same differential with each singularity moved to `sites[k]`.
    pub fn moved_to(&self, sites: &[Complex64]) -> RationalQuartic {
        let nz = self.zeros.len();
        RationalQuartic {
            zeros: self
                .zeros
                .iter()
                .zip(sites)
                .map(|(p, &z)| SingularPoint::new(z, p.mult))
                .collect(),
            poles: self
                .poles
                .iter()
                .zip(&sites[nz..])
                .map(|(p, &z)| SingularPoint::new(z, p.mult))
                .collect(),
        }
    }
}

/// Singularity configurations of the face and Max Planck head experiments.
pub mod fixtures {
    use super::*;

    fn simple(points: &[(f64, f64)]) -> Vec<SingularPoint> {
        points
            .iter()
            .map(|&(re, im)| SingularPoint { re, im, mult: 1 })
            .collect()
    }

    /// Face model, six simple poles.
    pub fn face_six_poles() -> RationalQuartic {
        RationalQuartic {
            zeros: Vec::new(),
            poles: simple(&[
                (0.451559, 0.21962),
                (0.45696, 0.617636),
                (0.706853, 0.52086),
                (0.533522, 0.407822),
                (0.250598, 0.471244),
                (0.747474, 0.28336),
            ]),
        }
    }

    /// Face model, two zeros and four poles.
    pub fn face_two_zeros_four_poles() -> RationalQuartic {
        RationalQuartic {
            zeros: simple(&[(0.250598, 0.471244), (0.747474, 0.28336)]),
            poles: simple(&[
                (0.451559, 0.21962),
                (0.45696, 0.617636),
                (0.706853, 0.52086),
                (0.533522, 0.407822),
            ]),
        }
    }

    /// Max Planck head on the sphere, eight simple poles.
    pub fn max_planck_eight_poles() -> RationalQuartic {
        RationalQuartic {
            zeros: Vec::new(),
            poles: simple(&[
                (1.32607, 1.3106),
                (-1.27859, 1.27903),
                (1.30017, -1.25335),
                (-1.29695, -1.28728),
                (0.471821, -0.46131),
                (-0.443743, -0.468551),
                (0.452511, 0.463833),
                (-0.450766, 0.468879),
            ]),
        }
    }

    /// Max Planck head on the sphere, two zeros and ten poles.
    pub fn max_planck_two_zeros_ten_poles() -> RationalQuartic {
        RationalQuartic {
            zeros: simple(&[(0.898261, 3.24367), (-0.00810208, -0.25253)]),
            poles: simple(&[
                (0.00289177, 0.255035),
                (1.03926, -3.32305),
                (1.5921, 0.915034),
                (-1.61079, 0.858346),
                (1.61098, -0.845895),
                (-1.63865, -0.894138),
                (0.559829, 0.296053),
                (-0.564592, 0.307631),
                (0.555884, -0.307683),
                (-0.550573, -0.311611),
            ]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        for rq in [
            face_six_poles(),
            face_two_zeros_four_poles(),
            max_planck_eight_poles(),
            max_planck_two_zeros_ten_poles(),
        ] {
            rq.validate().unwrap();
        }
        assert_eq!(face_six_poles().poles.len(), 6);
        assert!(max_planck_eight_poles().validate_sphere().is_ok());
        assert!(max_planck_two_zeros_ten_poles().validate_sphere().is_ok());
        assert!(matches!(
            face_six_poles().validate_sphere(),
            Err(Error::QuarticBalance(6))
        ));
    }

    #[test]
    fn evaluation() {
        let rq = face_six_poles();
        let z = Complex64::new(0.1, -0.2);
        let direct = rq
            .poles
            .iter()
            .fold(Complex64::new(1.0, 0.0), |a, p| a / (z - p.z()));
        assert!((rq.eval(z) - direct).norm() < 1e-12 * direct.norm());
        assert_eq!(RationalQuartic::default().eval(z), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn json_roundtrip_and_rejections() {
        let rq = face_two_zeros_four_poles();
        assert_eq!(RationalQuartic::from_json(&rq.to_json()).unwrap(), rq);
        let bad = r#"{"zeros":[{"re":0.5,"im":0.0,"mult":1}],"poles":[{"re":0.5,"im":0.0}]}"#;
        assert!(matches!(
            RationalQuartic::from_json(bad),
            Err(Error::CoincidentSingularity(_))
        ));
        let zero = r#"{"poles":[{"re":0.5,"im":0.0,"mult":0}]}"#;
        assert!(RationalQuartic::from_json(zero).is_err());
    }
}
