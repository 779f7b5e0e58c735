//! Complex arithmetic on the upper half-plane and unit disk.
//!
//! Fixes the principal logarithm/power conventions used throughout the crate
//! (negative reals receive angle `+pi`, and `0^a := 0` for every exponent),
//! and provides the Möbius maps between the upper half-plane and the unit
//! disk together with the validated parameter newtypes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// JSON shape for complex values: an object `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRepr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRepr {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexRepr> for Complex64 {
    fn from(r: ComplexRepr) -> Self {
        Complex64::new(r.re, r.im)
    }
}

/// `#[serde(with = "complex_fmt")]` adapter serializing `Complex64` fields
/// in the `{"re", "im"}` object shape.
pub mod complex_fmt {
    use super::{Complex64, ComplexRepr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ComplexRepr::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(ComplexRepr::deserialize(d)?.into())
    }
}

/// A point of the open upper half-plane; the Cauchy parameter
/// (location `re`, scale `im`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexRepr", into = "ComplexRepr")]
pub struct HalfPlaneParam(Complex64);

impl HalfPlaneParam {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        check_finite(z, "half-plane parameter")?;
        if z.im > 0.0 {
            Ok(Self(z))
        } else {
            Err(Error::NotInUpperHalfPlane(format_complex(z)))
        }
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// Location component Re(gamma).
    pub fn location(&self) -> f64 {
        self.0.re
    }

    /// Scale component Im(gamma).
    pub fn scale(&self) -> f64 {
        self.0.im
    }
}

impl TryFrom<ComplexRepr> for HalfPlaneParam {
    type Error = Error;
    fn try_from(r: ComplexRepr) -> Result<Self> {
        Self::from_complex(r.into())
    }
}

impl From<HalfPlaneParam> for ComplexRepr {
    fn from(p: HalfPlaneParam) -> ComplexRepr {
        p.0.into()
    }
}

impl std::fmt::Display for HalfPlaneParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

/// A point of the open unit disk; the circular-Cauchy parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexRepr", into = "ComplexRepr")]
pub struct DiskParam(Complex64);

impl DiskParam {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(w: Complex64) -> Result<Self> {
        check_finite(w, "disk parameter")?;
        if w.norm_sqr() < 1.0 {
            Ok(Self(w))
        } else {
            Err(Error::NotInUnitDisk(format_complex(w)))
        }
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl TryFrom<ComplexRepr> for DiskParam {
    type Error = Error;
    fn try_from(r: ComplexRepr) -> Result<Self> {
        Self::from_complex(r.into())
    }
}

impl From<DiskParam> for ComplexRepr {
    fn from(p: DiskParam) -> ComplexRepr {
        p.0.into()
    }
}

impl std::fmt::Display for DiskParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

fn check_finite(z: Complex64, context: &'static str) -> Result<()> {
    if !z.re.is_finite() {
        return Err(Error::NonFinite {
            context,
            value: z.re,
        });
    }
    if !z.im.is_finite() {
        return Err(Error::NonFinite {
            context,
            value: z.im,
        });
    }
    Ok(())
}

/// Principal logarithm with angle in (-pi, pi].
///
/// Negative reals receive `+i*pi`, so `log x = log|x| + i*pi` for `x < 0`
/// regardless of the sign of a zero imaginary part.
pub fn principal_log(z: Complex64) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::LogOfZero);
    }
    let theta = if z.im == 0.0 {
        if z.re > 0.0 {
            0.0
        } else {
            PI
        }
    } else {
        z.im.atan2(z.re)
    };
    Ok(Complex64::new(z.norm().ln(), theta))
}

/// Principal power `z^a := exp(a log z)`, with `0^a := 0` for every `a`
/// (including `a = 0`).
pub fn cpow(z: Complex64, a: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if a.re == 0.0 && a.im == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // Real base, real exponent: |x|^a on the principal branch.
    if z.im == 0.0 && a.im == 0.0 {
        let m = z.re.abs().powf(a.re);
        if z.re > 0.0 {
            return Complex64::new(m, 0.0);
        }
        let (s, c) = (a.re * PI).sin_cos();
        return Complex64::new(m * c, m * s);
    }
    let log_z = principal_log(z).expect("nonzero base");
    (a * log_z).exp()
}

/// Möbius map `phi_gamma(z) = (z - gamma)/(z - conj(gamma))` sending the
/// closed upper half-plane onto the closed unit disk with `gamma -> 0`.
pub fn mobius_to_disk(gamma: HalfPlaneParam, z: Complex64) -> Result<Complex64> {
    if z.im < 0.0 {
        return Err(Error::BelowRealAxis(format_complex(z)));
    }
    let g = gamma.value();
    Ok((z - g) / (z - g.conj()))
}

/// Inverse Möbius map `(gamma - conj(gamma) w)/(1 - w)`.
///
/// Defined on the closed disk minus the pole at `w = 1`; boundary points map
/// to the real axis. A small tolerance above `|w| = 1` is accepted so that
/// round-tripped boundary images do not spuriously fail.
pub fn mobius_to_halfplane(gamma: HalfPlaneParam, w: Complex64) -> Result<Complex64> {
    if w.re == 1.0 && w.im == 0.0 {
        return Err(Error::InverseMapPole);
    }
    if w.norm_sqr() > 1.0 + 1e-12 {
        return Err(Error::OutsideClosedDisk(format_complex(w)));
    }
    let g = gamma.value();
    Ok((g - g.conj() * w) / (Complex64::new(1.0, 0.0) - w))
}

/// Parse the complex literal grammar `a+bi` / `a-bi` / `bi` / `a`
/// (whitespace ignored, components in ordinary decimal or scientific
/// notation).
pub fn parse_complex(input: &str) -> Result<Complex64> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::ParseComplex {
            input: input.to_string(),
            reason: "empty literal",
        });
    }

    let err = |reason: &'static str| Error::ParseComplex {
        input: input.to_string(),
        reason,
    };

    let parse_part = |part: &str, reason: &'static str| -> Result<f64> {
        let v: f64 = part.parse().map_err(|_| err(reason))?;
        if !v.is_finite() {
            return Err(err("component is not finite"));
        }
        Ok(v)
    };

    if let Some(body) = s.strip_suffix('i') {
        // Split before the sign of the imaginary coefficient; signs directly
        // after an exponent marker belong to the component.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k];
            if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_part.is_empty() {
            0.0
        } else {
            parse_part(re_part, "bad real component")?
        };
        let im = match im_part {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => parse_part(im_part, "bad imaginary component")?,
        };
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(parse_part(&s, "bad real component")?, 0.0))
    }
}

/// Format a complex value in the same grammar `parse_complex` accepts, using
/// the shortest decimal representation that round-trips.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
