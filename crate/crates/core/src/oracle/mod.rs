//! High-precision quadrature engine and the identity verifier.
//!
//! Expectations against the analytic laws are computed with the tangent
//! substitution `x = loc + scale*tan(u)` per Cauchy component, which cancels
//! the density exactly and maps the real line to a finite interval; declared
//! split points are carried through the substitution. The engine behind it is
//! an adaptive Gauss-Kronrod scheme with epsilon extrapolation (see `quad`).

mod quad;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{circular_density_unchecked, DistSpec, MixtureParams};
use crate::error::{Error, Result};
use crate::halfplane::{cpow, mobius_to_disk, DiskParam, HalfPlaneParam};
use crate::transforms::{self, g_closed_form, LineMeasure, MellinExponent};

/// Controls for the adaptive quadrature engine.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Absolute tolerance the achieved error estimate must reach.
    pub abs_tol: f64,
    /// Panel subdivision budget.
    pub max_subdivisions: usize,
    /// Integrand singularities or kinks, in the coordinates of the variable
    /// being integrated.
    pub split_points: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 2000,
            split_points: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn with_splits(mut self, splits: &[f64]) -> Self {
        self.split_points = splits.to_vec();
        self
    }
}

fn panel_points(lo: f64, hi: f64, splits: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut interior: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > lo && *p < hi)
        .collect();
    interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
    interior.dedup();
    pts.extend(interior);
    pts.push(hi);
    pts
}

/// Integrate a real-valued function over `[lo, hi]`.
///
/// Each interval between consecutive split points is bisected once and
/// integrated as an independent extrapolated run, so every run sees at most
/// one singular endpoint (two singular ends in one extrapolation table mix
/// geometric modes and stall the error estimate).
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let pts = panel_points(lo, hi, &cfg.split_points);
    let mut runs = Vec::with_capacity(2 * (pts.len() - 1));
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid > w[0] && mid < w[1] {
            runs.push((w[0], mid));
            runs.push((mid, w[1]));
        } else {
            runs.push((w[0], w[1]));
        }
    }
    let per_tol = cfg.abs_tol / runs.len() as f64;
    let per_limit = (cfg.max_subdivisions / runs.len()).max(50);
    let mut value = 0.0;
    let mut abserr = 0.0;
    for (a, b) in runs {
        let out = quad::qagp(&f, &[a, b], per_tol, per_limit);
        value += out.value;
        abserr += out.abserr;
    }
    if abserr <= cfg.abs_tol {
        Ok(value)
    } else {
        Err(Error::QuadratureNonConvergence {
            requested: cfg.abs_tol,
            achieved: abserr,
        })
    }
}

/// Integrate a complex-valued function over `[lo, hi]` (one adaptive pass per
/// component, each to the configured absolute tolerance).
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let re = integrate(|x| f(x).re, lo, hi, cfg)?;
    let im = integrate(|x| f(x).im, lo, hi, cfg)?;
    Ok(Complex64::new(re, im))
}

/// E[f(X)] for X ~ C(gamma) via the tangent substitution; the Cauchy density
/// cancels exactly, leaving `(1/pi) * Int f(loc + scale tan u) du` over
/// `(-pi/2, pi/2)`.
pub fn expectation_cauchy<F: Fn(f64) -> Complex64>(
    f: F,
    gamma: HalfPlaneParam,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let loc = gamma.location();
    let scale = gamma.scale();
    let u_splits: Vec<f64> = cfg
        .split_points
        .iter()
        .map(|&p| ((p - loc) / scale).atan())
        .collect();
    let u_cfg = QuadratureConfig {
        abs_tol: cfg.abs_tol,
        max_subdivisions: cfg.max_subdivisions,
        split_points: u_splits,
    };
    integrate_complex(
        |u| f(loc + scale * u.tan()) / PI,
        -FRAC_PI_2,
        FRAC_PI_2,
        &u_cfg,
    )
}

/// E[f(X)] for an angle variable X ~ circular-Cauchy(w) on [0, 2*pi).
pub fn expectation_circular<F: Fn(f64) -> Complex64>(
    f: F,
    w: DiskParam,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    integrate_complex(
        |x| f(x) * circular_density_unchecked(x, w.value()),
        0.0,
        2.0 * PI,
        cfg,
    )
}

/// E[f(X)] against an analytic law. Mixtures integrate component by
/// component; for the circular law `f` receives the angle.
pub fn expectation<F: Fn(f64) -> Complex64>(
    f: F,
    spec: &DistSpec,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    match spec {
        DistSpec::Cauchy(gamma) => expectation_cauchy(f, *gamma, cfg),
        DistSpec::MixtureCauchy(m) => {
            let part = QuadratureConfig {
                abs_tol: cfg.abs_tol * 0.5,
                max_subdivisions: cfg.max_subdivisions,
                split_points: cfg.split_points.clone(),
            };
            let e1 = expectation_cauchy(&f, m.gamma1(), &part)?;
            let e2 = expectation_cauchy(&f, m.gamma2(), &part)?;
            Ok((1.0 - m.t()) * e1 + m.t() * e2)
        }
        DistSpec::CircularCauchy(w) => expectation_circular(f, *w, cfg),
    }
}

/// Analytic Cauchy law usable wherever a `SampleSet` is (the shared
/// expectation interface of the transforms module).
#[derive(Debug, Clone)]
pub struct CauchyLaw {
    pub gamma: HalfPlaneParam,
    pub cfg: QuadratureConfig,
}

impl CauchyLaw {
    pub fn new(gamma: HalfPlaneParam) -> Self {
        Self {
            gamma,
            cfg: QuadratureConfig::default(),
        }
    }
}

impl LineMeasure for CauchyLaw {
    fn expect<F: Fn(f64) -> Complex64>(&self, f: F, splits: &[f64]) -> Result<Complex64> {
        let mut cfg = self.cfg.clone();
        cfg.split_points.extend_from_slice(splits);
        expectation_cauchy(f, self.gamma, &cfg)
    }
}

/// Analytic mixture-Cauchy law behind the shared expectation interface.
#[derive(Debug, Clone)]
pub struct MixtureLaw {
    pub params: MixtureParams,
    pub cfg: QuadratureConfig,
}

impl MixtureLaw {
    pub fn new(params: MixtureParams) -> Self {
        Self {
            params,
            cfg: QuadratureConfig::default(),
        }
    }
}

impl LineMeasure for MixtureLaw {
    fn expect<F: Fn(f64) -> Complex64>(&self, f: F, splits: &[f64]) -> Result<Complex64> {
        let mut cfg = self.cfg.clone();
        cfg.split_points.extend_from_slice(splits);
        expectation(f, &DistSpec::MixtureCauchy(self.params.clone()), &cfg)
    }
}

/// An arbitrary density on the real line (used e.g. as a negative control);
/// integrated with the tangent substitution around `loc`/`scale`.
pub struct DensityLaw<P: Fn(f64) -> f64> {
    pub pdf: P,
    pub loc: f64,
    pub scale: f64,
    pub cfg: QuadratureConfig,
}

impl<P: Fn(f64) -> f64> LineMeasure for DensityLaw<P> {
    fn expect<F: Fn(f64) -> Complex64>(&self, f: F, splits: &[f64]) -> Result<Complex64> {
        let mut u_splits: Vec<f64> = self
            .cfg
            .split_points
            .iter()
            .chain(splits.iter())
            .map(|&p| ((p - self.loc) / self.scale).atan())
            .collect();
        u_splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let u_cfg = QuadratureConfig {
            abs_tol: self.cfg.abs_tol,
            max_subdivisions: self.cfg.max_subdivisions,
            split_points: u_splits,
        };
        integrate_complex(
            |u| {
                let c = u.cos();
                let x = self.loc + self.scale * u.tan();
                f(x) * ((self.pdf)(x) * self.scale / (c * c))
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &u_cfg,
        )
    }
}

/// One verified identity family.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub family: &'static str,
    pub worst_error: f64,
    pub tolerance: f64,
    pub worst_point: String,
    pub pass: bool,
}

/// Outcome of `verify_identities`: per-family worst errors plus the Poisson
/// convergence table (pairs of `(b, sup-error)`).
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub families: Vec<FamilyReport>,
    pub poisson_table: Vec<(f64, f64)>,
    pub all_pass: bool,
}

/// Quadrature tolerance used for the power-type (Mellin) integrands: the
/// tangent substitution limits the trustworthy error estimate near the
/// domain ends to a few 1e-9, far below the 1e-6 family tolerance.
const MELLIN_QUAD_TOL: f64 = 3e-8;

pub const TOL_MOBIUS_MEAN: f64 = 1e-8;
pub const TOL_MELLIN_POWER: f64 = 1e-6;
pub const TOL_MELLIN_SPLIT: f64 = 1e-6;
pub const TOL_SPLIT_LIMIT: f64 = 1e-8;
pub const TOL_CIRCULAR: f64 = 1e-8;
pub const TOL_POISSON_CLOSED: f64 = 1e-10;
pub const TOL_POISSON_LIMIT: f64 = 2e-3;
pub const TOL_STIELTJES: f64 = 1e-10;

/// Default gamma grid for the identity suite: Re in {-2, 0, 2}, Im in
/// {0.5, 1, 2}.
pub fn default_verify_gamma_grid() -> Vec<HalfPlaneParam> {
    let mut grid = Vec::new();
    for &re in &[-2.0, 0.0, 2.0] {
        for &im in &[0.5, 1.0, 2.0] {
            grid.push(HalfPlaneParam::new(re, im).expect("grid point in half-plane"));
        }
    }
    grid
}

/// Default exponent grid {0.1, ..., 0.9}.
pub fn default_verify_a_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn worst<I: IntoIterator<Item = (f64, String)>>(results: I) -> (f64, String) {
    results
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap_or((0.0, String::new()))
}

fn family(
    name: &'static str,
    tolerance: f64,
    worst_error: f64,
    worst_point: String,
) -> FamilyReport {
    FamilyReport {
        family: name,
        worst_error,
        tolerance,
        worst_point,
        pass: worst_error <= tolerance,
    }
}

fn mobius_mean_family(grid: &[HalfPlaneParam], cfg: &QuadratureConfig) -> Result<FamilyReport> {
    let pairs: Vec<(HalfPlaneParam, HalfPlaneParam)> = grid
        .iter()
        .flat_map(|&alpha| grid.iter().map(move |&gamma| (alpha, gamma)))
        .collect();
    let results: Vec<(f64, String)> = pairs
        .par_iter()
        .map(|&(alpha, gamma)| -> Result<(f64, String)> {
            let lhs = expectation_cauchy(
                |x| mobius_to_disk(gamma, Complex64::new(x, 0.0)).expect("real axis point"),
                alpha,
                cfg,
            )?;
            let rhs = mobius_to_disk(gamma, alpha.value())?;
            Ok((
                (lhs - rhs).norm(),
                format!("alpha={}, gamma={}", alpha, gamma),
            ))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("mobius_mean", TOL_MOBIUS_MEAN, err, point))
}

fn mellin_power_family(
    grid: &[HalfPlaneParam],
    a_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<FamilyReport> {
    let pairs: Vec<(HalfPlaneParam, f64)> = grid
        .iter()
        .flat_map(|&gamma| a_grid.iter().map(move |&a| (gamma, a)))
        .collect();
    let results: Vec<(f64, String)> = pairs
        .par_iter()
        .map(|&(gamma, a)| -> Result<(f64, String)> {
            let ac = Complex64::new(a, 0.0);
            let split_cfg = QuadratureConfig {
                abs_tol: cfg.abs_tol.max(MELLIN_QUAD_TOL),
                max_subdivisions: cfg.max_subdivisions,
                split_points: vec![0.0],
            };
            let lhs = expectation_cauchy(
                |x| cpow(Complex64::new(x, 0.0), ac),
                gamma,
                &split_cfg,
            )?;
            let rhs = cpow(gamma.value(), ac);
            Ok(((lhs - rhs).norm(), format!("gamma={}, a={}", gamma, a)))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("mellin_power", TOL_MELLIN_POWER, err, point))
}

fn split_form_family(
    grid: &[HalfPlaneParam],
    a_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<FamilyReport> {
    let pairs: Vec<(HalfPlaneParam, f64)> = grid
        .iter()
        .flat_map(|&gamma| a_grid.iter().map(move |&a| (gamma, a)))
        .collect();
    let results: Vec<(f64, String)> = pairs
        .par_iter()
        .map(|&(gamma, a)| -> Result<(f64, String)> {
            let law = CauchyLaw {
                gamma,
                cfg: QuadratureConfig {
                    abs_tol: cfg.abs_tol.max(MELLIN_QUAD_TOL),
                    max_subdivisions: cfg.max_subdivisions,
                    split_points: Vec::new(),
                },
            };
            let exponent = MellinExponent::real(a)?;
            let g_quad = transforms::mellin_split_g(&law, exponent)?;
            let g_ref = g_closed_form(gamma, a)?;

            // Component identities: positive part and negative part.
            let r = gamma.value().norm();
            let theta = gamma.value().arg();
            let ratio = (a * theta).sin() / (a * PI).sin();
            let pos_ref = r.powf(a) * ((a * theta).cos() - ratio * (a * PI).cos());
            let neg_ref = r.powf(a) * ratio;

            let err = (g_quad - g_ref)
                .norm()
                .max((g_quad.re - pos_ref).abs())
                .max((g_quad.im - neg_ref).abs());
            Ok((err, format!("gamma={}, a={}", gamma, a)))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("mellin_split_form", TOL_MELLIN_SPLIT, err, point))
}

fn split_limit_family(grid: &[HalfPlaneParam]) -> Result<FamilyReport> {
    // The a -> 0 extension of the split form must equal
    // P(X > 0) + i P(X < 0), computed from the CDF.
    let results: Vec<(f64, String)> = grid
        .iter()
        .map(|&gamma| -> Result<(f64, String)> {
            let g0 = g_closed_form(gamma, 0.0)?;
            let cdf0 = crate::distributions::cauchy_cdf(0.0, gamma);
            let reference = Complex64::new(1.0 - cdf0, cdf0);
            Ok(((g0 - reference).norm(), format!("gamma={}", gamma)))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("mellin_split_limit", TOL_SPLIT_LIMIT, err, point))
}

fn circular_family(cfg: &QuadratureConfig) -> Result<FamilyReport> {
    let ws = [
        DiskParam::new(0.0, 0.0)?,
        DiskParam::new(0.3, 0.0)?,
        DiskParam::new(0.0, 0.6)?,
    ];
    let etas = [
        DiskParam::new(0.0, 0.0)?,
        DiskParam::new(0.4, 0.0)?,
        DiskParam::new(-0.4, 0.0)?,
    ];
    let pairs: Vec<(DiskParam, DiskParam)> = ws
        .iter()
        .flat_map(|&w| etas.iter().map(move |&eta| (w, eta)))
        .collect();
    let results: Vec<(f64, String)> = pairs
        .par_iter()
        .map(|&(w, eta)| -> Result<(f64, String)> {
            let g = transforms::circular_stat_analytic(w, eta, cfg)?;
            Ok(((g - w.value()).norm(), format!("w={}, eta={}", w, eta)))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("circular_stat", TOL_CIRCULAR, err, point))
}

fn poisson_families(cfg: &QuadratureConfig) -> Result<(FamilyReport, FamilyReport, Vec<(f64, f64)>)> {
    let f = |x: f64| 1.0 / (1.0 + x * x);

    let closed = transforms::poisson_smooth(f, 0.0, 1.0, cfg)?;
    let closed_err = (closed - 0.5).abs();
    let closed_report = family(
        "poisson_closed_form",
        TOL_POISSON_CLOSED,
        closed_err,
        "a=0, b=1".to_string(),
    );

    let a_grid: Vec<f64> = (0..=20).map(|k| -5.0 + 0.5 * k as f64).collect();
    let sup_at = |b: f64| -> Result<(f64, f64)> {
        let sups: Vec<(f64, f64)> = a_grid
            .par_iter()
            .map(|&a| -> Result<(f64, f64)> {
                let s = transforms::poisson_smooth(f, a, b, cfg)?;
                Ok(((f(a) - s).abs(), a))
            })
            .collect::<Result<_>>()?;
        Ok(sups
            .into_iter()
            .max_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
            .unwrap())
    };

    let mut table = Vec::new();
    for &b in &[1.0, 0.1, 0.01] {
        let (sup, _) = sup_at(b)?;
        table.push((b, sup));
    }
    let monotone = table.windows(2).all(|w| w[1].1 < w[0].1);
    let (sup_small, worst_a) = sup_at(0.001)?;
    table.push((0.001, sup_small));

    let mut conv_report = family(
        "poisson_convergence",
        TOL_POISSON_LIMIT,
        sup_small,
        format!("b=0.001, a={}", worst_a),
    );
    if !monotone {
        conv_report.pass = false;
        conv_report.worst_point = "sup-errors not decreasing in b".to_string();
    }
    Ok((closed_report, conv_report, table))
}

fn stieltjes_family(grid: &[HalfPlaneParam], cfg: &QuadratureConfig) -> Result<FamilyReport> {
    let pairs: Vec<(HalfPlaneParam, HalfPlaneParam)> = grid
        .iter()
        .flat_map(|&alpha| grid.iter().map(move |&z| (alpha, z)))
        .collect();
    let results: Vec<(f64, String)> = pairs
        .par_iter()
        .map(|&(alpha, z)| -> Result<(f64, String)> {
            let law = CauchyLaw {
                gamma: alpha,
                cfg: cfg.clone(),
            };
            let lhs = transforms::stieltjes_transform(&law, z.value())?;
            let rhs = (alpha.value().conj() - z.value()).inv() / PI;
            Ok((
                (lhs.value() - rhs).norm(),
                format!("alpha={}, z={}", alpha, z),
            ))
        })
        .collect::<Result<_>>()?;
    let (err, point) = worst(results);
    Ok(family("stieltjes_closed_form", TOL_STIELTJES, err, point))
}

/// Machine-verify every analytic identity the crate relies on, reporting the
/// worst absolute error per family. Quadrature failures propagate as errors;
/// a family exceeding its tolerance is reported with `pass = false`.
pub fn verify_identities(
    gamma_grid: &[HalfPlaneParam],
    a_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IdentityReport> {
    if gamma_grid.is_empty() {
        return Err(Error::TooFew {
            what: "gamma grid points",
            need: 1,
            got: 0,
        });
    }
    if a_grid.is_empty() {
        return Err(Error::TooFew {
            what: "exponent grid points",
            need: 1,
            got: 0,
        });
    }
    for &a in a_grid {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::ExponentOutOfRange {
                re: a,
                range: "[0, 1)",
            });
        }
    }

    let mut families = Vec::new();
    families.push(mobius_mean_family(gamma_grid, cfg)?);
    families.push(mellin_power_family(gamma_grid, a_grid, cfg)?);
    families.push(split_form_family(gamma_grid, a_grid, cfg)?);
    families.push(split_limit_family(gamma_grid)?);
    families.push(circular_family(cfg)?);
    let (closed, convergence, table) = poisson_families(cfg)?;
    families.push(closed);
    families.push(convergence);
    families.push(stieltjes_family(gamma_grid, cfg)?);

    let all_pass = families.iter().all(|f| f.pass);
    Ok(IdentityReport {
        families,
        poisson_table: table,
        all_pass,
    })
}
