//! Parameter estimators built from the transform characterizations: the
//! Möbius fixed-point MLE, Mellin fractional-moment estimators, the
//! log-moment estimator, the circular fit, and the mixture-Cauchy fit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::distributions::{log_likelihood, DistSpec, MixtureParams, SampleSet};
use crate::error::{Error, Result};
use crate::halfplane::{cpow, mobius_to_disk, mobius_to_halfplane, HalfPlaneParam};
use crate::optim::nelder_mead;
use crate::transforms::{mellin_empirical, mobius_stat, LineMeasure, MellinExponent};

/// Controls for the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Convergence tolerance on both the step size and the residual
    /// `|gamma - F_X(gamma)|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Step fraction in (0, 1]; halved automatically on any iterate whose
    /// likelihood would decrease.
    pub damping: f64,
    /// Starting point; defaults to median + i * (half interquartile range).
    pub init: Option<HalfPlaneParam>,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            damping: 1.0,
            init: None,
        }
    }
}

impl FixedPointConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig("damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Estimator output: the estimate plus convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport<T> {
    pub estimate: T,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub dispersion: Option<f64>,
    pub loglik: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub flags: Vec<String>,
}

impl EstimateReport<Complex64> {
    /// Copy of the report with the estimate in the `{"re", "im"}` JSON
    /// object shape (raw `Complex64` serializes as a pair).
    pub fn json_ready(&self) -> EstimateReport<crate::halfplane::ComplexRepr> {
        EstimateReport {
            estimate: self.estimate.into(),
            iterations: self.iterations,
            converged: self.converged,
            residual: self.residual,
            dispersion: self.dispersion,
            loglik: self.loglik,
            flags: self.flags.clone(),
        }
    }
}

pub const FLAG_OUTSIDE_HALFPLANE: &str = "estimate_outside_halfplane";
pub const FLAG_BOUNDARY: &str = "boundary_estimate";
pub const FLAG_LOW_COVERAGE: &str = "low_grid_coverage";
pub const FLAG_NON_IDENTIFIABLE: &str = "non_identifiable";

/// Möbius fixed-point maximum-likelihood estimator: iterates
/// `gamma <- (1-d) gamma + d F_X(gamma)` until both the step and the
/// residual `|gamma - F_X(gamma)|` fall below the tolerance. The estimate is
/// the MLE exactly when it is a fixed point of `F_X`.
pub fn mle_fixed_point(
    s: &SampleSet,
    cfg: &FixedPointConfig,
) -> Result<EstimateReport<Complex64>> {
    Ok(mle_fixed_point_traced(s, cfg)?.0)
}

/// As `mle_fixed_point`, also returning the accepted log-likelihood value
/// after each iteration (diagnostic for the monotonicity property).
pub fn mle_fixed_point_traced(
    s: &SampleSet,
    cfg: &FixedPointConfig,
) -> Result<(EstimateReport<Complex64>, Vec<f64>)> {
    cfg.validate()?;
    if !s.has_two_distinct() {
        return Err(Error::DegenerateSample);
    }

    let mut gamma = match cfg.init {
        Some(g) => g,
        None => default_init(s)?,
    };
    let mut ll = log_likelihood(s, &DistSpec::Cauchy(gamma));
    let mut trace = vec![ll];
    let mut last_step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..cfg.max_iter {
        iterations = k;
        let f = mobius_stat(s, gamma)?;
        residual = (f - gamma.value()).norm();
        if residual <= cfg.tol && last_step <= cfg.tol {
            converged = true;
            break;
        }

        let mut d = cfg.damping;
        let mut candidate;
        let mut ll_candidate;
        loop {
            let c = gamma.value() + d * (f - gamma.value());
            candidate = HalfPlaneParam::from_complex(c).map_err(|_| {
                Error::EstimationFailure("iterate left the upper half-plane".into())
            })?;
            ll_candidate = log_likelihood(s, &DistSpec::Cauchy(candidate));
            let slack = 1e-12 * (1.0 + ll.abs());
            if ll_candidate >= ll - slack || d <= 1e-6 {
                break;
            }
            d *= 0.5;
        }

        last_step = (candidate.value() - gamma.value()).norm();
        gamma = candidate;
        ll = ll_candidate;
        trace.push(ll);
    }

    let report = EstimateReport {
        estimate: gamma.value(),
        iterations,
        converged,
        residual,
        dispersion: None,
        loglik: Some(ll),
        flags: Vec::new(),
    };
    Ok((report, trace))
}

fn default_init(s: &SampleSet) -> Result<HalfPlaneParam> {
    let median = s.quantile(0.5)?;
    let iqr_half = 0.5 * (s.quantile(0.75)? - s.quantile(0.25)?);
    let spread = if iqr_half > 0.0 {
        iqr_half
    } else {
        // Heavily concentrated samples can have a zero interquartile range
        // while still carrying two distinct values.
        let min = s.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = s.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (max - min)
    };
    HalfPlaneParam::new(median, spread)
}

/// Finite-difference gradient of the mean log-likelihood at `gamma`
/// (central differences in the location and scale directions).
pub fn loglik_gradient(s: &SampleSet, gamma: HalfPlaneParam, step: f64) -> Result<(f64, f64)> {
    let g = gamma.value();
    let ll = |z: Complex64| -> Result<f64> {
        Ok(log_likelihood(
            s,
            &DistSpec::Cauchy(HalfPlaneParam::from_complex(z)?),
        ))
    };
    let d_re = (ll(g + Complex64::new(step, 0.0))? - ll(g - Complex64::new(step, 0.0))?)
        / (2.0 * step);
    let d_im = (ll(g + Complex64::new(0.0, step))? - ll(g - Complex64::new(0.0, step))?)
        / (2.0 * step);
    Ok((d_re, d_im))
}

/// Single-exponent Mellin estimator `E[X^a]^{1/a}`. The result may land on
/// or below the real axis for finite samples; callers decide how to flag it.
pub fn mellin_estimate<M: LineMeasure>(m: &M, a: MellinExponent) -> Result<Complex64> {
    if !(a.re() > 0.0 && a.re() < 1.0) {
        return Err(Error::ExponentOutOfRange {
            re: a.re(),
            range: "(0, 1)",
        });
    }
    let transform = mellin_empirical(m, a)?;
    if transform.norm_sqr() == 0.0 {
        return Err(Error::MellinEmpiricalZero);
    }
    Ok(cpow(transform, a.value().inv()))
}

/// Median-of-estimates consensus across an exponent grid. The estimate is
/// the componentwise median of the upper-half-plane estimates; the
/// dispersion is the maximal pairwise distance across all computed
/// estimates (this is the statistic the Mellin goodness-of-fit test uses).
pub fn mellin_consensus<M: LineMeasure>(
    m: &M,
    grid: &[MellinExponent],
) -> Result<EstimateReport<Complex64>> {
    if grid.is_empty() {
        return Err(Error::TooFew {
            what: "grid exponents",
            need: 1,
            got: 0,
        });
    }
    let mut estimates = Vec::with_capacity(grid.len());
    for &a in grid {
        estimates.push(mellin_estimate(m, a)?);
    }

    let dispersion = max_pairwise_distance(&estimates);
    let in_h: Vec<Complex64> = estimates.iter().copied().filter(|e| e.im > 0.0).collect();
    if in_h.is_empty() {
        return Err(Error::EstimationFailure(
            "no grid exponent produced an upper-half-plane estimate".into(),
        ));
    }

    let estimate = Complex64::new(
        median(in_h.iter().map(|e| e.re)),
        median(in_h.iter().map(|e| e.im)),
    );

    let mut flags = Vec::new();
    if 2 * in_h.len() < grid.len() {
        flags.push(format!("{FLAG_LOW_COVERAGE}:{}/{}", in_h.len(), grid.len()));
    }
    if let Some(z) = m.zero_atoms() {
        if z > 0 {
            flags.push(format!("zero_atoms_ignored:{z}"));
        }
    }

    Ok(EstimateReport {
        estimate,
        iterations: 0,
        converged: 2 * in_h.len() >= grid.len(),
        residual: dispersion,
        dispersion: Some(dispersion),
        loglik: None,
        flags,
    })
}

/// The default exponent grid {0.1, ..., 0.9}.
pub fn default_exponent_grid() -> Vec<MellinExponent> {
    (1..=9)
        .map(|k| MellinExponent::real(k as f64 / 10.0).expect("in range"))
        .collect()
}

/// Default grid for the mixture fit: {0.05, 0.10, ..., 0.45}. Empirical
/// Mellin transforms have finite variance only for a < 1/2, and exponents
/// above that swamp the least squares with stable-law noise.
pub fn default_mixture_grid() -> Vec<MellinExponent> {
    (1..=9)
        .map(|k| MellinExponent::real(k as f64 / 20.0).expect("in range"))
        .collect()
}

fn median<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn max_pairwise_distance(points: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for (k, a) in points.iter().enumerate() {
        for b in &points[k + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Log-moment estimator `exp(E[log X])` with the principal complex log:
/// `exp(E[log |X|]) exp(i pi P(X < 0))`. Zero values are a hard error; an
/// all-positive or all-negative sample lands on the boundary and is flagged.
pub fn logmoment_estimate(s: &SampleSet) -> Result<EstimateReport<Complex64>> {
    if s.zero_atom_count() > 0 {
        return Err(Error::ZeroValue);
    }
    let mean_log_abs: f64 = s.iter().map(|(x, w)| w * x.abs().ln()).sum();
    let q_neg = s.negative_weight();
    let magnitude = mean_log_abs.exp();
    let (sin, cos) = (PI * q_neg).sin_cos();
    let estimate = Complex64::new(magnitude * cos, magnitude * sin);

    let mut flags = Vec::new();
    if q_neg == 0.0 || q_neg >= 1.0 {
        flags.push(FLAG_BOUNDARY.to_string());
    }
    let loglik = HalfPlaneParam::from_complex(estimate)
        .ok()
        .map(|g| log_likelihood(s, &DistSpec::Cauchy(g)));

    Ok(EstimateReport {
        estimate,
        iterations: 0,
        converged: true,
        residual: 0.0,
        dispersion: None,
        loglik,
        flags,
    })
}

/// Circular-Cauchy fit: transform angles to the real line through
/// `phi_i^{-1}(e^{ix})`, run the fixed-point MLE there, and map the estimate
/// back into the disk.
pub fn circular_fit(angles: &[f64], cfg: &FixedPointConfig) -> Result<EstimateReport<Complex64>> {
    if angles.is_empty() {
        return Err(Error::EmptySample);
    }
    let anchor = HalfPlaneParam::new(0.0, 1.0).expect("i is in the half-plane");
    let mut transformed = Vec::with_capacity(angles.len());
    for &x in angles {
        if !(0.0..2.0 * PI).contains(&x) {
            return Err(Error::AngleOutOfRange(x));
        }
        if x == 0.0 {
            return Err(Error::ZeroAngle);
        }
        let boundary = Complex64::new(x.cos(), x.sin());
        transformed.push(mobius_to_halfplane(anchor, boundary)?.re);
    }
    let sample = SampleSet::from_values(transformed)?;
    let fit = mle_fixed_point(&sample, cfg)?;
    let gamma = HalfPlaneParam::from_complex(fit.estimate)
        .map_err(|_| Error::EstimationFailure("transformed fit left the half-plane".into()))?;
    let w = mobius_to_disk(anchor, gamma.value())?;
    Ok(EstimateReport {
        estimate: w,
        iterations: fit.iterations,
        converged: fit.converged,
        residual: fit.residual,
        dispersion: None,
        loglik: fit.loglik,
        flags: fit.flags,
    })
}

/// Controls for the mixture fit.
#[derive(Debug, Clone)]
pub struct MixtureFitConfig {
    /// Number of random restarts (deterministic in `seed`).
    pub starts: usize,
    pub seed: u64,
    /// Residual (root of the squared misfit) below which the fit counts as
    /// converged.
    pub residual_ceiling: f64,
    /// Reflections per simplex run.
    pub max_iter: usize,
}

impl Default for MixtureFitConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            residual_ceiling: 0.5,
            max_iter: 4000,
        }
    }
}

/// Fit the mixture model to empirical Mellin values of a sample on the
/// given exponent grid.
pub fn mixture_fit(
    s: &SampleSet,
    grid: &[MellinExponent],
    cfg: &MixtureFitConfig,
) -> Result<EstimateReport<MixtureParams>> {
    let mut targets = Vec::with_capacity(grid.len());
    for &a in grid {
        targets.push(mellin_empirical(s, a)?);
    }
    let mut report = mixture_fit_targets(grid, &targets, cfg)?;
    report.loglik = Some(log_likelihood(
        s,
        &DistSpec::MixtureCauchy(report.estimate.clone()),
    ));
    Ok(report)
}

/// Fit the mixture model `E[X^a] = (1-t) gamma1^a + t gamma2^a` to given
/// Mellin targets by derivative-free least squares with deterministic
/// multi-starts. Requires at least 5 grid points (five real unknowns).
pub fn mixture_fit_targets(
    grid: &[MellinExponent],
    targets: &[Complex64],
    cfg: &MixtureFitConfig,
) -> Result<EstimateReport<MixtureParams>> {
    if grid.len() < 5 {
        return Err(Error::TooFew {
            what: "grid exponents",
            need: 5,
            got: grid.len(),
        });
    }
    if grid.len() != targets.len() {
        return Err(Error::InvalidConfig("grid and targets must align"));
    }
    if cfg.starts == 0 {
        return Err(Error::InvalidConfig("needs at least one start"));
    }

    let exponents: Vec<Complex64> = grid.iter().map(|a| a.value()).collect();

    // Unconstrained parametrization: t through a sigmoid, scales through an
    // exponential, so the simplex roams freely.
    let objective = |theta: &[f64]| -> f64 {
        let t = 1.0 / (1.0 + (-theta[0]).exp());
        let g1 = Complex64::new(theta[1], theta[2].exp());
        let g2 = Complex64::new(theta[3], theta[4].exp());
        let mut obj = 0.0;
        for (a, target) in exponents.iter().zip(targets.iter()) {
            let model = (1.0 - t) * cpow(g1, *a) + t * cpow(g2, *a);
            obj += (model - target).norm_sqr();
        }
        obj
    };

    // Data-driven anchor: the single-component Mellin estimate at the
    // middle exponent.
    let mid = grid.len() / 2;
    let anchor = if targets[mid].norm_sqr() > 0.0 {
        let est = cpow(targets[mid], exponents[mid].inv());
        if est.im > 1e-6 && est.is_finite() {
            est
        } else {
            Complex64::new(0.0, 1.0)
        }
    } else {
        Complex64::new(0.0, 1.0)
    };
    let spread = 1.0 + anchor.norm();

    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for start in 0..cfg.starts {
        let mut rng = crate::distributions::substream_rng(cfg.seed, start as u64);
        use rand::Rng;
        let u = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| {
            lo + (hi - lo) * rng.gen::<f64>()
        };
        let theta0 = vec![
            u(&mut rng, -1.5, 1.5),
            anchor.re - spread * u(&mut rng, 0.2, 1.5),
            anchor.im.max(1e-3).ln() + u(&mut rng, -1.0, 1.0),
            anchor.re + spread * u(&mut rng, 0.2, 1.5),
            anchor.im.max(1e-3).ln() + u(&mut rng, -1.0, 1.0),
        ];
        let scale = vec![0.5, 0.3 * spread, 0.4, 0.3 * spread, 0.4];

        let mut run = nelder_mead(&objective, &theta0, &scale, 1e-15, cfg.max_iter);
        // Restarting the simplex at the incumbent escapes collapsed shapes.
        for _ in 0..2 {
            let polish_scale: Vec<f64> = scale.iter().map(|s| s * 0.01).collect();
            let polished = nelder_mead(&objective, &run.x, &polish_scale, 1e-16, cfg.max_iter);
            if polished.fx < run.fx {
                run = polished;
            }
        }

        let better = match &best {
            None => true,
            Some((fx, _, _)) => run.fx < *fx,
        };
        if better {
            best = Some((run.fx, run.x.clone(), run.iterations));
        }
    }

    let (fx, theta, simplex_iterations) = best.expect("at least one start");
    let t = 1.0 / (1.0 + (-theta[0]).exp());
    let g1 = HalfPlaneParam::new(theta[1], theta[2].exp())?;
    let g2 = HalfPlaneParam::new(theta[3], theta[4].exp())?;
    let residual = fx.sqrt();

    let mut flags = Vec::new();
    let separation = (g1.value() - g2.value()).norm();
    let scale_ref = g1.scale().max(g2.scale());
    if separation <= 1e-3 * scale_ref || t <= 0.01 || t >= 0.99 {
        flags.push(FLAG_NON_IDENTIFIABLE.to_string());
    }

    let estimate = MixtureParams::new(t, g1, g2)?;
    Ok(EstimateReport {
        estimate,
        iterations: simplex_iterations,
        converged: residual <= cfg.residual_ceiling,
        residual,
        dispersion: None,
        loglik: None,
        flags,
    })
}
