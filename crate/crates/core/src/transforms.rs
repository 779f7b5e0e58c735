//! Transform statistics: the Möbius statistic `F_X`, the circular statistic
//! `G_X`, the Mellin transform and its split form `g(a)` with the closed
//! strip formula, Poisson smoothing, and the Cauchy-Stieltjes transform.
//!
//! Every statistic is evaluated against anything implementing
//! [`LineMeasure`]: empirical `SampleSet`s sum exactly, while the analytic
//! laws in the oracle module evaluate the same integrands by quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::distributions::SampleSet;
use crate::error::{Error, Result};
use crate::halfplane::{cpow, DiskParam, HalfPlaneParam};
use crate::oracle::{expectation_circular, QuadratureConfig};

/// A probability measure on the real line that expectations can be taken
/// against. `splits` declares integrand kinks for quadrature-backed
/// implementations; exact summation ignores it.
pub trait LineMeasure {
    fn expect<F: Fn(f64) -> Complex64>(&self, f: F, splits: &[f64]) -> Result<Complex64>;

    /// Count of exact-zero atoms, when the measure can report one
    /// (diagnostic for the `0^a := 0` convention).
    fn zero_atoms(&self) -> Option<usize> {
        None
    }
}

impl LineMeasure for SampleSet {
    fn expect<F: Fn(f64) -> Complex64>(&self, f: F, _splits: &[f64]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.iter() {
            acc += w * f(x);
        }
        Ok(acc)
    }

    fn zero_atoms(&self) -> Option<usize> {
        Some(self.zero_atom_count())
    }
}

/// Mellin exponent `a` with `0 <= Re(a) < 1`, the range where Cauchy
/// fractional moments exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinExponent(Complex64);

impl MellinExponent {
    pub fn new(a: Complex64) -> Result<Self> {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(Error::NonFinite {
                context: "Mellin exponent",
                value: if a.re.is_finite() { a.im } else { a.re },
            });
        }
        if !(0.0..1.0).contains(&a.re) {
            return Err(Error::ExponentOutOfRange {
                re: a.re,
                range: "[0, 1)",
            });
        }
        Ok(Self(a))
    }

    pub fn real(a: f64) -> Result<Self> {
        Self::new(Complex64::new(a, 0.0))
    }

    /// Opt-in constructor admitting negative real parts in (-1, 1).
    /// Empirical sums with values near zero are numerically unstable there;
    /// estimation keeps to the nonnegative range unless explicitly asked.
    pub fn signed(a: Complex64) -> Result<Self> {
        if !(-1.0..1.0).contains(&a.re) {
            return Err(Error::ExponentOutOfRange {
                re: a.re,
                range: "(-1, 1)",
            });
        }
        Ok(Self(a))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }
}

/// Cauchy-Stieltjes transform value; real part `U`, imaginary part `V`
/// (the Poisson integral of the measure, nonnegative on the half-plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesValue(Complex64);

impl StieltjesValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn u(&self) -> f64 {
        self.0.re
    }

    pub fn v(&self) -> f64 {
        self.0.im
    }
}

/// Möbius statistic `F_X(gamma) = E[X/(X - conj(gamma))] / E[1/(X - conj(gamma))]`.
///
/// Always lands in the closed upper half-plane; strictly inside unless the
/// measure is a point mass.
pub fn mobius_stat<M: LineMeasure>(m: &M, gamma: HalfPlaneParam) -> Result<Complex64> {
    let gc = gamma.value().conj();
    let num = m.expect(
        |x| {
            let z = Complex64::new(x, 0.0);
            z / (z - gc)
        },
        &[],
    )?;
    let den = m.expect(|x| (Complex64::new(x, 0.0) - gc).inv(), &[])?;
    if den.norm_sqr() == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Circular statistic
/// `G_X(eta) = E[e^{iX}/(1 - eta e^{iX})] / E[1/(1 - eta e^{iX})]`
/// over an equal-weight list of angles in [0, 2*pi), none exactly zero.
pub fn circular_stat(angles: &[f64], eta: DiskParam) -> Result<Complex64> {
    if angles.is_empty() {
        return Err(Error::EmptySample);
    }
    let e = eta.value();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for &x in angles {
        if !(0.0..2.0 * PI).contains(&x) {
            return Err(Error::AngleOutOfRange(x));
        }
        if x == 0.0 {
            return Err(Error::ZeroAngle);
        }
        let u = Complex64::new(x.cos(), x.sin());
        let r = (Complex64::new(1.0, 0.0) - e * u).inv();
        num += u * r;
        den += r;
    }
    let n = angles.len() as f64;
    num /= n;
    den /= n;
    if den.norm_sqr() == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// `G_X(eta)` for the analytic circular-Cauchy law (quadrature route).
pub fn circular_stat_analytic(
    w: DiskParam,
    eta: DiskParam,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let e = eta.value();
    let num = expectation_circular(
        |x| {
            let u = Complex64::new(x.cos(), x.sin());
            u / (Complex64::new(1.0, 0.0) - e * u)
        },
        w,
        cfg,
    )?;
    let den = expectation_circular(
        |x| (Complex64::new(1.0, 0.0) - e * Complex64::new(x.cos(), x.sin())).inv(),
        w,
        cfg,
    )?;
    if den.norm_sqr() == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Mellin transform `E[X^a]` on the principal branch; atoms at zero
/// contribute nothing (`0^a := 0`).
pub fn mellin_empirical<M: LineMeasure>(m: &M, a: MellinExponent) -> Result<Complex64> {
    let av = a.value();
    m.expect(|x| cpow(Complex64::new(x, 0.0), av), &[0.0])
}

/// Split form `g(a) = E[X^a, X > 0] + i E[(-X)^a, X < 0]`.
pub fn mellin_split_g<M: LineMeasure>(m: &M, a: MellinExponent) -> Result<Complex64> {
    let av = a.value();
    let zero = Complex64::new(0.0, 0.0);
    let pos = m.expect(
        |x| {
            if x > 0.0 {
                cpow(Complex64::new(x, 0.0), av)
            } else {
                zero
            }
        },
        &[0.0],
    )?;
    let neg = m.expect(
        |x| {
            if x < 0.0 {
                cpow(Complex64::new(-x, 0.0), av)
            } else {
                zero
            }
        },
        &[0.0],
    )?;
    Ok(pos + Complex64::new(0.0, 1.0) * neg)
}

/// Closed form of the split Mellin transform for the Cauchy law
/// `gamma = r e^{i theta}`:
/// `g(a) = r^a (cos(a theta) - sin(a theta)/sin(a pi) cos(a pi) + i sin(a theta)/sin(a pi))`,
/// continuously extended at `a = 0` by `sin(a theta)/sin(a pi) -> theta/pi`.
pub fn g_closed_form(gamma: HalfPlaneParam, a: f64) -> Result<Complex64> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::ExponentOutOfRange {
            re: a,
            range: "[0, 1)",
        });
    }
    let g = gamma.value();
    let r = g.norm();
    let theta = g.arg();
    let ratio = if a == 0.0 {
        theta / PI
    } else {
        let s = (a * PI).sin();
        if s == 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        (a * theta).sin() / s
    };
    let ra = r.powf(a);
    Ok(Complex64::new(
        ra * ((a * theta).cos() - ratio * (a * PI).cos()),
        ra * ratio,
    ))
}

/// Poisson smoothing `Int f(x) b/(pi((x-a)^2 + b^2)) dx`, evaluated with the
/// tangent substitution `x = a + b tan(u)`.
pub fn poisson_smooth<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidConfig("Poisson bandwidth must be positive"));
    }
    let gamma = HalfPlaneParam::new(a, b)?;
    let v = crate::oracle::expectation_cauchy(|x| Complex64::new(f(x), 0.0), gamma, cfg)?;
    Ok(v.re)
}

/// Cauchy-Stieltjes transform `F_mu(z) = (1/pi) E[1/(X - z)]` for `z` in the
/// open upper half-plane.
pub fn stieltjes_transform<M: LineMeasure>(m: &M, z: Complex64) -> Result<StieltjesValue> {
    if !(z.im > 0.0) {
        return Err(Error::NotInUpperHalfPlane(
            crate::halfplane::format_complex(z),
        ));
    }
    let v = m.expect(|x| (Complex64::new(x, 0.0) - z).inv(), &[])?;
    Ok(StieltjesValue(v / PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::sample_circular;
    use crate::halfplane::{mobius_to_disk, mobius_to_halfplane};

    fn sample(values: &[f64]) -> SampleSet {
        SampleSet::from_values(values.to_vec()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol
    }

    #[test]
    fn mobius_stat_two_points() {
        let s = sample(&[-1.0, 1.0]);
        let i = HalfPlaneParam::new(0.0, 1.0).unwrap();
        let f = mobius_stat(&s, i).unwrap();
        assert!(close(f, Complex64::new(0.0, 1.0), 1e-14), "got {f}");
    }

    #[test]
    fn mobius_stat_point_mass_collapses() {
        let s = sample(&[2.5, 2.5, 2.5]);
        for gamma in [
            HalfPlaneParam::new(0.0, 1.0).unwrap(),
            HalfPlaneParam::new(-3.0, 0.2).unwrap(),
        ] {
            let f = mobius_stat(&s, gamma).unwrap();
            assert!(close(f, Complex64::new(2.5, 0.0), 1e-12), "got {f}");
        }
    }

    #[test]
    fn mobius_stat_range() {
        let s = sample(&[-2.0, 0.5, 3.0, 10.0]);
        for &(re, im) in &[(0.0, 1.0), (5.0, 0.1), (-8.0, 3.0)] {
            let gamma = HalfPlaneParam::new(re, im).unwrap();
            let f = mobius_stat(&s, gamma).unwrap();
            assert!(f.im > 0.0, "gamma={re}+{im}i gave {f}");
        }
    }

    #[test]
    fn circular_stat_special_cases() {
        // Point mass at x0 collapses to e^{i x0}.
        let angles = vec![1.2; 5];
        let eta = DiskParam::new(0.3, -0.4).unwrap();
        let g = circular_stat(&angles, eta).unwrap();
        assert!(close(g, Complex64::new(1.2f64.cos(), 1.2f64.sin()), 1e-13));

        // eta = 0 reduces to the mean resultant vector.
        let angles = vec![0.5, 1.5, 4.0];
        let eta0 = DiskParam::new(0.0, 0.0).unwrap();
        let g = circular_stat(&angles, eta0).unwrap();
        let mean: Complex64 = angles
            .iter()
            .map(|&t| Complex64::new(t.cos(), t.sin()))
            .sum::<Complex64>()
            / 3.0;
        assert!(close(g, mean, 1e-14));

        // A zero angle is rejected, citing the P(X != 0) assumption.
        let bad = vec![0.0, 1.0];
        match circular_stat(&bad, eta0) {
            Err(Error::ZeroAngle) => {}
            other => panic!("expected zero-angle rejection, got {other:?}"),
        }
    }

    #[test]
    fn circular_stat_stays_in_closed_disk() {
        let angles = vec![0.3, 2.0, 3.3, 5.5];
        for &(re, im) in &[(0.0, 0.0), (0.5, 0.2), (-0.7, 0.1)] {
            let eta = DiskParam::new(re, im).unwrap();
            let g = circular_stat(&angles, eta).unwrap();
            assert!(g.norm() < 1.0, "eta={re}+{im}i gave {g}");
        }
    }

    #[test]
    fn mellin_empirical_values() {
        let s = sample(&[-1.0, 1.0]);
        let a = MellinExponent::real(0.5).unwrap();
        let m = mellin_empirical(&s, a).unwrap();
        assert!(close(m, Complex64::new(0.5, 0.5), 1e-14));

        // Positive samples give real transforms.
        let s = sample(&[0.5, 2.0, 7.0]);
        let m = mellin_empirical(&s, MellinExponent::real(0.3).unwrap()).unwrap();
        assert!(m.im == 0.0);

        // A zero atom contributes nothing: only the nonzero atoms remain.
        let with_zero = SampleSet::new(vec![0.0, -1.0, 1.0], vec![0.4, 0.3, 0.3]).unwrap();
        let a = MellinExponent::real(0.3).unwrap();
        let mz = mellin_empirical(&with_zero, a).unwrap();
        let direct = 0.3 * cpow(Complex64::new(-1.0, 0.0), a.value())
            + 0.3 * cpow(Complex64::new(1.0, 0.0), a.value());
        assert!(close(mz, direct, 1e-15));
        assert_eq!(with_zero.zero_atom_count(), 1);
    }

    #[test]
    fn mellin_split_values() {
        let s = sample(&[-1.0, 1.0]);
        let a = MellinExponent::real(0.5).unwrap();
        let g = mellin_split_g(&s, a).unwrap();
        assert!(close(g, Complex64::new(0.5, 0.5), 1e-15));

        // All-positive sample has no imaginary part.
        let s = sample(&[1.0, 4.0]);
        let g = mellin_split_g(&s, a).unwrap();
        assert!(g.im == 0.0);

        // a = 0 recovers the sign masses P(X>0) + i P(X<0).
        let s = sample(&[-3.0, -1.0, 2.0, 5.0]);
        let g = mellin_split_g(&s, MellinExponent::real(0.0).unwrap()).unwrap();
        assert!(close(g, Complex64::new(0.5, 0.5), 1e-15));
    }

    #[test]
    fn reconstruction_identity() {
        // f(a) = E[X^a, X>0] + E[(-X)^a, X<0](cos a pi + i sin a pi), exactly.
        let s = sample(&[-2.5, -0.3, 0.7, 1.0, 9.0]);
        for k in 1..10 {
            let a = k as f64 / 10.0;
            let me = MellinExponent::real(a).unwrap();
            let f = mellin_empirical(&s, me).unwrap();
            let g = mellin_split_g(&s, me).unwrap();
            let rebuilt = Complex64::new(
                g.re + g.im * (a * PI).cos(),
                g.im * (a * PI).sin(),
            );
            assert!(close(f, rebuilt, 1e-14), "a={a}: {f} vs {rebuilt}");
        }
    }

    #[test]
    fn g_closed_form_values() {
        let i = HalfPlaneParam::new(0.0, 1.0).unwrap();
        let v = g_closed_form(i, 0.5).unwrap();
        let e = Complex64::new(0.5f64.sqrt(), 0.5f64.sqrt());
        assert!(close(v, e, 1e-14));

        // Continuous extension at a = 0.
        let v0 = g_closed_form(i, 0.0).unwrap();
        assert!(close(v0, Complex64::new(0.5, 0.5), 1e-15));

        // Tiny a approaches the extension smoothly.
        let v_eps = g_closed_form(i, 1e-12).unwrap();
        assert!(close(v_eps, v0, 1e-9));

        assert!(g_closed_form(i, 1.0).is_err());
        assert!(g_closed_form(i, -0.1).is_err());
    }

    #[test]
    fn poisson_smooth_closed_form() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| 1.0 / (1.0 + x * x);
        // Semigroup closed form (1+b)/(a^2 + (1+b)^2).
        for &(a, b) in &[(0.0, 1.0), (0.7, 0.25), (-2.0, 3.0)] {
            let v = poisson_smooth(f, a, b, &cfg).unwrap();
            let expect = (1.0 + b) / (a * a + (1.0 + b) * (1.0 + b));
            assert!((v - expect).abs() <= 1e-10, "a={a} b={b}: {v} vs {expect}");
        }

        // Small bandwidth approaches f itself.
        let v = poisson_smooth(f, 0.0, 0.001, &cfg).unwrap();
        assert!((v - 1.0).abs() <= 2e-3);

        // Compact support away from the centre sees almost nothing.
        let bump = |x: f64| {
            if (2.0..3.0).contains(&x) {
                1.0
            } else {
                0.0
            }
        };
        let v = poisson_smooth(
            bump,
            0.0,
            0.001,
            &QuadratureConfig::default().with_splits(&[2.0, 3.0]),
        )
        .unwrap();
        assert!(v.abs() <= 1e-3, "got {v}");
    }

    #[test]
    fn stieltjes_point_mass() {
        let s = sample(&[0.0]);
        let v = stieltjes_transform(&s, Complex64::new(0.0, 1.0)).unwrap();
        assert!(close(v.value(), Complex64::new(0.0, 1.0 / PI), 1e-15));
        assert!(v.v() >= 0.0);

        assert!(stieltjes_transform(&s, Complex64::new(1.0, 0.0)).is_err());
        assert!(stieltjes_transform(&s, Complex64::new(1.0, -1.0)).is_err());
    }

    #[test]
    fn stieltjes_v_is_nonnegative() {
        let s = sample(&[-4.0, -1.0, 0.0, 2.0, 33.0]);
        for &(re, im) in &[(0.0, 1.0), (2.0, 0.01), (-10.0, 5.0)] {
            let v = stieltjes_transform(&s, Complex64::new(re, im)).unwrap();
            assert!(v.v() >= 0.0);
        }
    }

    #[test]
    fn correspondence_between_circular_and_mobius_statistics() {
        // phi_gamma^{-1}(G_X(eta)) = F_Y(phi_gamma^{-1}(conj(eta))) with
        // Y = phi_gamma^{-1}(e^{iX}). The conjugate appears because the
        // parameter enters F conjugated but enters G directly; for real eta
        // the two forms coincide.
        let w = DiskParam::new(0.35, -0.2).unwrap();
        let angles = sample_circular(w, 400, 5).unwrap();
        let angles: Vec<f64> = angles.into_iter().filter(|&x| x != 0.0).collect();

        for &(gre, gim) in &[(0.0, 1.0), (1.5, 0.7)] {
            let gamma = HalfPlaneParam::new(gre, gim).unwrap();
            for &(ere, eim) in &[(0.0, 0.0), (0.25, 0.1), (-0.3, 0.3)] {
                let eta = DiskParam::new(ere, eim).unwrap();
                let g = circular_stat(&angles, eta).unwrap();
                let lhs = mobius_to_halfplane(gamma, g).unwrap();

                let y: Vec<f64> = angles
                    .iter()
                    .map(|&x| {
                        mobius_to_halfplane(gamma, Complex64::new(x.cos(), x.sin()))
                            .unwrap()
                            .re
                    })
                    .collect();
                let ys = SampleSet::from_values(y).unwrap();
                let eta_h = mobius_to_halfplane(gamma, eta.value().conj()).unwrap();
                let rhs = mobius_stat(&ys, HalfPlaneParam::from_complex(eta_h).unwrap()).unwrap();
                assert!(
                    close(lhs, rhs, 1e-10),
                    "gamma={gre}+{gim}i eta={ere}+{eim}i: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn mobius_stat_analytic_recovers_parameter() {
        use crate::oracle::CauchyLaw;
        let alpha = HalfPlaneParam::new(0.8, 1.4).unwrap();
        let law = CauchyLaw::new(alpha);
        for &(re, im) in &[(0.0, 1.0), (-2.0, 0.5), (3.0, 2.0)] {
            let gamma = HalfPlaneParam::new(re, im).unwrap();
            let f = mobius_stat(&law, gamma).unwrap();
            assert!(
                close(f, alpha.value(), 1e-9),
                "gamma={re}+{im}i gave {f}"
            );
        }
    }
}
