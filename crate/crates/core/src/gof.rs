//! Characterization-based goodness-of-fit tests, calibrated by parametric
//! bootstrap: constancy of the Möbius statistic over a gamma grid, constancy
//! of the Mellin estimate over an exponent grid, and the log-moment
//! diagnostic.
//!
//! The characterizations hold over sets with a limit point; a finite grid
//! therefore yields a test, not a characterization. Grid size and placement
//! are caller-controlled knobs trading sensitivity for cost.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{sample_stream, DistSpec, SampleSet, Samples};
use crate::error::{Error, Result};
use crate::estimation::{mellin_estimate, mle_fixed_point, FixedPointConfig};
use crate::halfplane::{complex_fmt, ComplexRepr, HalfPlaneParam};
use crate::transforms::{mobius_stat, MellinExponent};

/// Grid echo carried in test reports.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum GridUsed {
    Gamma(Vec<ComplexRepr>),
    Exponent(Vec<f64>),
}

/// Bootstrap test outcome. The p-value uses the add-one convention
/// `(1 + #{T* >= T}) / (B + 1)`, so it never reaches zero.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "B")]
    pub replications: usize,
    pub grid: GridUsed,
    #[serde(with = "complex_fmt")]
    pub null_gamma: Complex64,
}

/// Gamma grid for the Möbius test: explicit points, or offsets around the
/// fitted parameter scaled by the fitted scale.
#[derive(Debug, Clone)]
pub enum GammaGrid {
    /// Horizontal offsets of +/- 0.5 and +/- 1 scale units plus doubled and
    /// halved scale, all relative to the fit.
    Default,
    Explicit(Vec<HalfPlaneParam>),
}

impl GammaGrid {
    fn materialize(&self, gamma_hat: HalfPlaneParam) -> Vec<HalfPlaneParam> {
        match self {
            GammaGrid::Explicit(points) => points.clone(),
            GammaGrid::Default => {
                let a = gamma_hat.location();
                let b = gamma_hat.scale();
                vec![
                    HalfPlaneParam::new(a - b, b),
                    HalfPlaneParam::new(a - 0.5 * b, b),
                    HalfPlaneParam::new(a + 0.5 * b, b),
                    HalfPlaneParam::new(a + b, b),
                    HalfPlaneParam::new(a, 2.0 * b),
                    HalfPlaneParam::new(a, 0.5 * b),
                ]
                .into_iter()
                .map(|p| p.expect("offsets stay in the half-plane"))
                .collect()
            }
        }
    }
}

fn fit_null(s: &SampleSet) -> Result<HalfPlaneParam> {
    let report = mle_fixed_point(s, &FixedPointConfig::default())?;
    if !report.converged {
        return Err(Error::FixedPointDidNotConverge {
            iterations: report.iterations,
            residual: report.residual,
        });
    }
    HalfPlaneParam::from_complex(report.estimate)
        .map_err(|_| Error::EstimationFailure("fitted parameter left the half-plane".into()))
}

fn resample(gamma: HalfPlaneParam, n: usize, seed: u64, stream: u64) -> Result<SampleSet> {
    match sample_stream(&DistSpec::Cauchy(gamma), n, seed, stream)? {
        Samples::Real(s) => Ok(s),
        Samples::Angles(_) => unreachable!(),
    }
}

fn p_value(t: f64, null: &[f64], b: usize) -> f64 {
    let count = null.iter().filter(|&&x| x >= t).count();
    (1 + count) as f64 / (b + 1) as f64
}

/// Möbius constancy test: `T = max_j |F_X(gamma_j) - gamma_hat|`, with the
/// null distribution of `T` estimated by `B` parametric-bootstrap resamples
/// from the fitted Cauchy law (each refit before evaluating its statistic).
pub fn cauchy_test_mobius(
    s: &SampleSet,
    grid: &GammaGrid,
    b: usize,
    seed: u64,
) -> Result<TestReport> {
    if s.len() < 10 {
        return Err(Error::TooFew {
            what: "observations",
            need: 10,
            got: s.len(),
        });
    }
    if let GammaGrid::Explicit(points) = grid {
        if points.len() < 3 {
            return Err(Error::TooFew {
                what: "gamma grid points",
                need: 3,
                got: points.len(),
            });
        }
    }
    if b < 99 {
        return Err(Error::TooFew {
            what: "bootstrap replications",
            need: 99,
            got: b,
        });
    }

    let statistic_of = |sample: &SampleSet| -> Result<(f64, HalfPlaneParam, Vec<HalfPlaneParam>)> {
        let gamma_hat = fit_null(sample)?;
        let points = grid.materialize(gamma_hat);
        let mut t = 0.0f64;
        for &g in &points {
            t = t.max((mobius_stat(sample, g)? - gamma_hat.value()).norm());
        }
        Ok((t, gamma_hat, points))
    };

    let (t_obs, gamma_hat, points) = statistic_of(s)?;
    let n = s.len();

    let null: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let resampled = resample(gamma_hat, n, seed, rep as u64 + 1)?;
            Ok(statistic_of(&resampled)?.0)
        })
        .collect::<Result<_>>()?;

    Ok(TestReport {
        statistic: t_obs,
        p_value: p_value(t_obs, &null, b),
        replications: b,
        grid: GridUsed::Gamma(points.iter().map(|p| p.value().into()).collect()),
        null_gamma: gamma_hat.value(),
    })
}

/// Mellin constancy test: `T` is the maximal pairwise distance among the
/// per-exponent estimates `E[X^a]^{1/a}` (the dispersion of the consensus
/// estimator), bootstrap-calibrated under the fitted Cauchy null.
pub fn cauchy_test_mellin(
    s: &SampleSet,
    a_grid: &[MellinExponent],
    b: usize,
    seed: u64,
) -> Result<TestReport> {
    if s.len() < 10 {
        return Err(Error::TooFew {
            what: "observations",
            need: 10,
            got: s.len(),
        });
    }
    if a_grid.len() < 3 {
        return Err(Error::TooFew {
            what: "exponent grid points",
            need: 3,
            got: a_grid.len(),
        });
    }
    if b < 99 {
        return Err(Error::TooFew {
            what: "bootstrap replications",
            need: 99,
            got: b,
        });
    }

    let statistic_of = |sample: &SampleSet, strict: bool| -> Result<f64> {
        let mut estimates = Vec::with_capacity(a_grid.len());
        for &a in a_grid {
            estimates.push(mellin_estimate(sample, a)?);
        }
        if strict {
            let in_h = estimates.iter().filter(|e| e.im > 0.0).count();
            if in_h < 3 {
                return Err(Error::GridCoverage {
                    got: in_h,
                    need: 3,
                    grid: a_grid.len(),
                });
            }
        }
        let mut t = 0.0f64;
        for (k, x) in estimates.iter().enumerate() {
            for y in &estimates[k + 1..] {
                t = t.max((x - y).norm());
            }
        }
        Ok(t)
    };

    let gamma_hat = fit_null(s)?;
    let t_obs = statistic_of(s, true)?;
    let n = s.len();

    let null: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let resampled = resample(gamma_hat, n, seed, rep as u64 + 1)?;
            statistic_of(&resampled, false)
        })
        .collect::<Result<_>>()?;

    Ok(TestReport {
        statistic: t_obs,
        p_value: p_value(t_obs, &null, b),
        replications: b,
        grid: GridUsed::Exponent(a_grid.iter().map(|a| a.re()).collect()),
        null_gamma: gamma_hat.value(),
    })
}

/// Discrepancies `|E[(log X)^n] - E[log X]^n|` for n = 1..n_max, with the
/// principal complex log (negative values contribute `log|x| + i pi`).
pub fn logmoment_diagnostic(s: &SampleSet, n_max: usize) -> Result<Vec<(usize, f64)>> {
    if n_max < 2 {
        return Err(Error::InvalidConfig("n_max must be at least 2"));
    }
    if s.zero_atom_count() > 0 {
        return Err(Error::ZeroValue);
    }
    let logs: Vec<(Complex64, f64)> = s
        .iter()
        .map(|(x, w)| {
            let log = Complex64::new(
                x.abs().ln(),
                if x < 0.0 { std::f64::consts::PI } else { 0.0 },
            );
            (log, w)
        })
        .collect();
    let mean_log: Complex64 = logs.iter().map(|(l, w)| l * *w).sum();

    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let moment: Complex64 = logs.iter().map(|(l, w)| l.powu(n as u32) * *w).sum();
        let discrepancy = (moment - mean_log.powu(n as u32)).norm();
        out.push((n, discrepancy));
    }
    Ok(out)
}

/// Kolmogorov-Smirnov distance between the sample values and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - k as f64 / n).abs());
        d = d.max((f - (k + 1) as f64 / n).abs());
    }
    d
}
