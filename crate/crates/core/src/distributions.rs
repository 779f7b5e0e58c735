//! Densities, CDFs, quantiles, log-likelihoods, and deterministic seeded
//! samplers for the Cauchy, circular-Cauchy, and mixture-Cauchy laws.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfplane::{DiskParam, HalfPlaneParam};

/// Two-component mixture parameters `C(t; gamma1; gamma2)`.
///
/// The constructor canonicalizes the labeling: components are ordered
/// lexicographically by (Re, Im), swapping `t` for `1 - t` when necessary,
/// which removes the label-switching ambiguity of mixture fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    t: f64,
    gamma1: HalfPlaneParam,
    gamma2: HalfPlaneParam,
}

impl MixtureParams {
    pub fn new(t: f64, gamma1: HalfPlaneParam, gamma2: HalfPlaneParam) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::MixtureWeightOutOfRange(t));
        }
        if gamma1.value() == gamma2.value() {
            return Err(Error::MixtureIdenticalComponents);
        }
        let swap = match gamma1
            .value()
            .re
            .partial_cmp(&gamma2.value().re)
            .expect("finite components")
        {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => gamma1.value().im > gamma2.value().im,
            std::cmp::Ordering::Less => false,
        };
        if swap {
            Ok(Self {
                t: 1.0 - t,
                gamma1: gamma2,
                gamma2: gamma1,
            })
        } else {
            Ok(Self {
                t,
                gamma1,
                gamma2,
            })
        }
    }

    /// Weight of the second component.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma1(&self) -> HalfPlaneParam {
        self.gamma1
    }

    pub fn gamma2(&self) -> HalfPlaneParam {
        self.gamma2
    }
}

/// An analytic law: Cauchy, circular Cauchy, or mixture Cauchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DistSpec {
    Cauchy(HalfPlaneParam),
    CircularCauchy(DiskParam),
    MixtureCauchy(MixtureParams),
}

/// A finite weighted collection of real observations (an empirical measure).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl SampleSet {
    /// Weighted sample; weights must be nonnegative and sum to 1 within 1e-12.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() != weights.len() {
            return Err(Error::WeightLengthMismatch {
                values: values.len(),
                weights: weights.len(),
            });
        }
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "sample value",
                    value: v,
                });
            }
        }
        // Compensated summation: naive accumulation over 10^5 equal weights
        // already drifts past the 1e-12 normalization invariant.
        let mut sum = 0.0;
        let mut carry = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeWeight(w));
            }
            let y = w - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightsNotNormalized(sum));
        }
        Ok(Self { values, weights })
    }

    /// Equal-weight sample.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let w = 1.0 / n as f64;
        Self::new(values, vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Whether the sample carries mass on at least two distinct values.
    pub fn has_two_distinct(&self) -> bool {
        let mut first: Option<f64> = None;
        for (v, w) in self.iter() {
            if w == 0.0 {
                continue;
            }
            match first {
                None => first = Some(v),
                Some(f) if f != v => return true,
                _ => {}
            }
        }
        false
    }

    /// Total weight of exact-zero observations.
    pub fn zero_atom_count(&self) -> usize {
        self.iter().filter(|&(v, w)| v == 0.0 && w > 0.0).count()
    }

    /// Total weight of strictly negative observations.
    pub fn negative_weight(&self) -> f64 {
        self.iter().filter(|&(v, _)| v < 0.0).map(|(_, w)| w).sum()
    }

    /// Weighted quantile. Mass boundaries hit exactly resolve to the midpoint
    /// of the adjacent values, so the median of {-1, 1} is 0.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&i, &j| self.values[i].partial_cmp(&self.values[j]).unwrap());
        let mut cum = 0.0;
        for (rank, &i) in idx.iter().enumerate() {
            cum += self.weights[i];
            if cum >= p - 1e-15 {
                if (cum - p).abs() <= 1e-12 && rank + 1 < idx.len() {
                    return Ok(0.5 * (self.values[i] + self.values[idx[rank + 1]]));
                }
                return Ok(self.values[i]);
            }
        }
        Ok(self.values[*idx.last().expect("nonempty")])
    }
}

/// Parse one observation per line; `#`-prefixed comments and blank lines are
/// ignored. Any other non-numeric line aborts with its line number.
pub fn read_observations<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| Error::CsvParse {
            line: k + 1,
            content: trimmed.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::CsvParse {
                line: k + 1,
                content: trimmed.to_string(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Cauchy density Im(gamma)/pi * 1/|x - gamma|^2.
pub fn cauchy_pdf(x: f64, gamma: HalfPlaneParam) -> f64 {
    let dx = x - gamma.location();
    let b = gamma.scale();
    b / (PI * (dx * dx + b * b))
}

pub fn cauchy_log_pdf(x: f64, gamma: HalfPlaneParam) -> f64 {
    let dx = x - gamma.location();
    let b = gamma.scale();
    b.ln() - PI.ln() - (dx * dx + b * b).ln()
}

pub fn cauchy_cdf(x: f64, gamma: HalfPlaneParam) -> f64 {
    0.5 + ((x - gamma.location()) / gamma.scale()).atan() / PI
}

/// Inverse CDF; `p` must lie strictly inside (0, 1).
pub fn cauchy_quantile(p: f64, gamma: HalfPlaneParam) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(gamma.location() + gamma.scale() * (PI * (p - 0.5)).tan())
}

/// Circular-Cauchy density on [0, 2*pi).
pub fn circular_pdf(x: f64, w: DiskParam) -> Result<f64> {
    if !(0.0..2.0 * PI).contains(&x) {
        return Err(Error::AngleOutOfRange(x));
    }
    Ok(circular_density_unchecked(x, w.value()))
}

/// Density formula without the range check (quadrature evaluates at 2*pi).
pub(crate) fn circular_density_unchecked(x: f64, w: Complex64) -> f64 {
    let e = Complex64::new(x.cos(), x.sin());
    (1.0 - w.norm_sqr()) / (2.0 * PI * (e - w).norm_sqr())
}

/// Mixture density (1-t) p(x; gamma1) + t p(x; gamma2).
pub fn mixture_pdf(x: f64, m: &MixtureParams) -> f64 {
    (1.0 - m.t()) * cauchy_pdf(x, m.gamma1()) + m.t() * cauchy_pdf(x, m.gamma2())
}

/// Weighted mean log-density of the sample under the given law. For the
/// circular law observations are interpreted as angles.
pub fn log_likelihood(s: &SampleSet, spec: &DistSpec) -> f64 {
    match spec {
        DistSpec::Cauchy(gamma) => s
            .iter()
            .map(|(x, w)| w * cauchy_log_pdf(x, *gamma))
            .sum(),
        DistSpec::MixtureCauchy(m) => s.iter().map(|(x, w)| w * mixture_pdf(x, m).ln()).sum(),
        DistSpec::CircularCauchy(w_par) => s
            .iter()
            .map(|(x, w)| w * circular_density_unchecked(x, w_par.value()).ln())
            .sum(),
    }
}

/// Deterministic RNG stream for `(seed, stream)`; replicas derived from the
/// same seed but distinct stream indices are independent and reproducible
/// regardless of scheduling.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn draw_cauchy(rng: &mut ChaCha8Rng, gamma: HalfPlaneParam) -> f64 {
    let u = uniform_open(rng);
    gamma.location() + gamma.scale() * (PI * (u - 0.5)).tan()
}

pub fn draw_circular(rng: &mut ChaCha8Rng, w: DiskParam) -> f64 {
    // Möbius image (u + w)/(1 + conj(w) u) of a uniform point on the circle:
    // the boundary pushforward of uniform arclength is exactly the
    // circular-Cauchy law with parameter w.
    let theta = rng.gen::<f64>() * 2.0 * PI;
    let u = Complex64::new(theta.cos(), theta.sin());
    let wv = w.value();
    let image = (u + wv) / (Complex64::new(1.0, 0.0) + wv.conj() * u);
    let mut angle = image.arg();
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    if angle >= 2.0 * PI {
        angle = 0.0;
    }
    angle
}

pub fn draw_mixture(rng: &mut ChaCha8Rng, m: &MixtureParams) -> f64 {
    let pick_second = rng.gen::<f64>() < m.t();
    let gamma = if pick_second { m.gamma2() } else { m.gamma1() };
    draw_cauchy(rng, gamma)
}

/// Sampler output: real observations or angles in [0, 2*pi).
#[derive(Debug, Clone)]
pub enum Samples {
    Real(SampleSet),
    Angles(Vec<f64>),
}

/// Draw `n` observations from the law, deterministically in
/// `(spec, n, seed)`. Real laws produce an equal-weight `SampleSet`; the
/// circular law produces angles.
pub fn sample(spec: &DistSpec, n: usize, seed: u64) -> Result<Samples> {
    sample_stream(spec, n, seed, 0)
}

/// As `sample`, with an explicit substream index (bootstrap replicas use
/// stream `b + 1`).
pub fn sample_stream(spec: &DistSpec, n: usize, seed: u64, stream: u64) -> Result<Samples> {
    if n == 0 {
        return Err(Error::ZeroSampleCount);
    }
    let mut rng = substream_rng(seed, stream);
    match spec {
        DistSpec::Cauchy(gamma) => {
            let values = (0..n).map(|_| draw_cauchy(&mut rng, *gamma)).collect();
            Ok(Samples::Real(SampleSet::from_values(values)?))
        }
        DistSpec::MixtureCauchy(m) => {
            let values = (0..n).map(|_| draw_mixture(&mut rng, m)).collect();
            Ok(Samples::Real(SampleSet::from_values(values)?))
        }
        DistSpec::CircularCauchy(w) => {
            Ok(Samples::Angles((0..n).map(|_| draw_circular(&mut rng, *w)).collect()))
        }
    }
}

/// Convenience wrapper for Cauchy draws.
pub fn sample_cauchy(gamma: HalfPlaneParam, n: usize, seed: u64) -> Result<SampleSet> {
    match sample(&DistSpec::Cauchy(gamma), n, seed)? {
        Samples::Real(s) => Ok(s),
        Samples::Angles(_) => unreachable!(),
    }
}

/// Convenience wrapper for circular-Cauchy draws.
pub fn sample_circular(w: DiskParam, n: usize, seed: u64) -> Result<Vec<f64>> {
    match sample(&DistSpec::CircularCauchy(w), n, seed)? {
        Samples::Angles(a) => Ok(a),
        Samples::Real(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdf_values() {
        let i = HalfPlaneParam::new(0.0, 1.0).unwrap();
        assert!((cauchy_pdf(0.0, i) - 1.0 / PI).abs() <= 1e-15);
        assert!((cauchy_pdf(1.0, i) - 1.0 / (2.0 * PI)).abs() <= 1e-15);
        let g = HalfPlaneParam::new(3.0, 0.25).unwrap();
        assert!((cauchy_pdf(3.0, g) - 1.0 / (PI * 0.25)).abs() <= 1e-15);
    }

    #[test]
    fn quantile_cdf_pair() {
        let g = HalfPlaneParam::new(2.0, 3.0).unwrap();
        assert!((cauchy_quantile(0.5, g).unwrap() - 2.0).abs() <= 1e-12);
        assert!(
            (cauchy_quantile(0.75, HalfPlaneParam::new(0.0, 1.0).unwrap()).unwrap() - 1.0).abs()
                <= 1e-12
        );
        assert!((cauchy_quantile(0.75, g).unwrap() - 5.0).abs() <= 1e-12);
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let x = cauchy_quantile(p, g).unwrap();
            assert!((cauchy_cdf(x, g) - p).abs() <= 1e-12, "p={p}");
        }
        assert!(cauchy_quantile(0.0, g).is_err());
        assert!(cauchy_quantile(1.0, g).is_err());
    }

    #[test]
    fn circular_pdf_values() {
        let w0 = DiskParam::new(0.0, 0.0).unwrap();
        assert!((circular_pdf(1.234, w0).unwrap() - 1.0 / (2.0 * PI)).abs() <= 1e-15);
        let w = DiskParam::new(0.5, 0.0).unwrap();
        assert!((circular_pdf(0.0, w).unwrap() - 3.0 / (2.0 * PI)).abs() <= 1e-15);
        assert!((circular_pdf(PI, w).unwrap() - 1.0 / (6.0 * PI)).abs() <= 1e-15);
        assert!(circular_pdf(-0.1, w).is_err());
        assert!(circular_pdf(2.0 * PI, w).is_err());
    }

    #[test]
    fn mixture_pdf_is_convex_combination() {
        let g1 = HalfPlaneParam::new(-1.0, 1.0).unwrap();
        let g2 = HalfPlaneParam::new(1.0, 1.0).unwrap();
        let m = MixtureParams::new(0.5, g1, g2).unwrap();
        assert!((mixture_pdf(0.0, &m) - 1.0 / (2.0 * PI)).abs() <= 1e-15);

        let m2 = MixtureParams::new(
            0.25,
            HalfPlaneParam::new(0.0, 1.0).unwrap(),
            HalfPlaneParam::new(2.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!((mixture_pdf(0.0, &m2) - 0.8 / PI).abs() <= 1e-15);

        for k in 0..100 {
            let x = -5.0 + 0.1 * k as f64;
            let direct = 0.75 * cauchy_pdf(x, m2.gamma1()) + 0.25 * cauchy_pdf(x, m2.gamma2());
            assert!((mixture_pdf(x, &m2) - direct).abs() <= 1e-16);
        }
    }

    #[test]
    fn mixture_constructor_enforces_invariants() {
        let i = HalfPlaneParam::new(0.0, 1.0).unwrap();
        assert!(matches!(
            MixtureParams::new(0.5, i, i),
            Err(Error::MixtureIdenticalComponents)
        ));
        let g2 = HalfPlaneParam::new(1.0, 1.0).unwrap();
        assert!(MixtureParams::new(0.0, i, g2).is_err());
        assert!(MixtureParams::new(1.0, i, g2).is_err());

        // Canonical ordering swaps labels and the weight.
        let m = MixtureParams::new(0.3, g2, i).unwrap();
        assert_eq!(m.gamma1().value(), i.value());
        assert!((m.t() - 0.7).abs() <= 1e-15);
    }

    #[test]
    fn log_likelihood_values() {
        let i = HalfPlaneParam::new(0.0, 1.0).unwrap();
        let s = SampleSet::from_values(vec![0.0]).unwrap();
        assert!((log_likelihood(&s, &DistSpec::Cauchy(i)) + PI.ln()).abs() <= 1e-14);

        let s = SampleSet::from_values(vec![-1.0, 1.0]).unwrap();
        assert!((log_likelihood(&s, &DistSpec::Cauchy(i)) + (2.0 * PI).ln()).abs() <= 1e-14);

        // i is the MLE of {-1, 1}: any other parameter scores lower.
        let other = HalfPlaneParam::new(2.0, 1.0).unwrap();
        assert!(
            log_likelihood(&s, &DistSpec::Cauchy(i))
                > log_likelihood(&s, &DistSpec::Cauchy(other))
        );
    }

    #[test]
    fn sample_set_validation() {
        assert!(matches!(
            SampleSet::from_values(vec![]),
            Err(Error::EmptySample)
        ));
        assert!(SampleSet::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(SampleSet::new(vec![1.0, 2.0], vec![-0.1, 1.1]).is_err());
        assert!(SampleSet::new(vec![1.0, f64::INFINITY], vec![0.5, 0.5]).is_err());
        assert!(SampleSet::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.5]).is_err());

        let s = SampleSet::new(vec![0.0, 1.0, 0.0], vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(s.zero_atom_count(), 2);
        assert!(s.has_two_distinct());
        let point_mass = SampleSet::from_values(vec![3.0, 3.0]).unwrap();
        assert!(!point_mass.has_two_distinct());
    }

    #[test]
    fn weighted_quantiles() {
        let s = SampleSet::from_values(vec![1.0, -1.0]).unwrap();
        assert_eq!(s.quantile(0.5).unwrap(), 0.0);
        assert_eq!(s.quantile(0.25).unwrap(), -1.0);
        assert_eq!(s.quantile(0.75).unwrap(), 1.0);

        let s = SampleSet::from_values(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.quantile(0.5).unwrap(), 2.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = HalfPlaneParam::new(0.5, 2.0).unwrap();
        let a = sample_cauchy(g, 100, 7).unwrap();
        let b = sample_cauchy(g, 100, 7).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_cauchy(g, 100, 8).unwrap();
        assert_ne!(a.values(), c.values());

        let w = DiskParam::new(0.2, 0.1).unwrap();
        let x = sample_circular(w, 50, 3).unwrap();
        let y = sample_circular(w, 50, 3).unwrap();
        assert_eq!(x, y);
        assert!(x.iter().all(|&t| (0.0..2.0 * PI).contains(&t)));

        assert!(matches!(
            sample(&DistSpec::Cauchy(g), 0, 1),
            Err(Error::ZeroSampleCount)
        ));
    }

    #[test]
    fn sample_median_matches_location() {
        let g = HalfPlaneParam::new(0.0, 1.0).unwrap();
        let s = sample_cauchy(g, 100_000, 2024).unwrap();
        let med = s.quantile(0.5).unwrap();
        assert!(med.abs() <= 0.02, "median {med}");
    }

    #[test]
    fn circular_uniform_has_vanishing_resultant() {
        let w = DiskParam::new(0.0, 0.0).unwrap();
        let angles = sample_circular(w, 100_000, 11).unwrap();
        let mean: Complex64 = angles
            .iter()
            .map(|&t| Complex64::new(t.cos(), t.sin()))
            .sum::<Complex64>()
            / angles.len() as f64;
        assert!(mean.norm() <= 0.02, "resultant {mean}");
    }

    #[test]
    fn read_observations_handles_comments_and_errors() {
        let data = "# header\n1.5\n\n-2.25e0\n# trailing\n0.5\n";
        let v = read_observations(std::io::Cursor::new(data)).unwrap();
        assert_eq!(v, vec![1.5, -2.25, 0.5]);

        let bad = "1.0\nnot-a-number\n";
        match read_observations(std::io::Cursor::new(bad)) {
            Err(Error::CsvParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(read_observations(std::io::Cursor::new("inf\n")).is_err());
    }
}
