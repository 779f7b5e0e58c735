//! Command implementations behind the `cauchykit` binary.
//!
//! Exit codes: 0 success, 1 user error (flags, input files, malformed
//! values), 2 numerical failure (non-convergence, verification failure).
//! All randomness derives from `--seed`; identical invocations produce
//! byte-identical output. Files are written to a temporary sibling and
//! atomically renamed.

pub mod args;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use cauchykit::distributions::{
    read_observations, DistSpec, MixtureParams, SampleSet, Samples,
};
use cauchykit::error::Error as CoreError;
use cauchykit::estimation::{
    circular_fit, default_exponent_grid, default_mixture_grid, logmoment_estimate,
    mellin_consensus, mixture_fit, mle_fixed_point, FixedPointConfig, MixtureFitConfig,
};
use cauchykit::gof::{cauchy_test_mellin, cauchy_test_mobius, GammaGrid};
use cauchykit::halfplane::{format_complex, parse_complex, DiskParam, HalfPlaneParam};
use cauchykit::oracle::{
    default_verify_a_grid, default_verify_gamma_grid, verify_identities, IdentityReport,
    QuadratureConfig,
};
use cauchykit::transforms::{mobius_stat, MellinExponent};

use args::{Command, DistKind, EstimatorKind, MethodKind};

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::QuadratureNonConvergence { .. }
            | CoreError::FixedPointDidNotConverge { .. }
            | CoreError::EstimationFailure(_)
            | CoreError::DegenerateDenominator
            | CoreError::MellinEmpiricalZero
            | CoreError::GridCoverage { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Run one parsed command, writing to stdout; returns the process exit code.
pub fn run(command: Command, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    match command {
        Command::Sample {
            dist,
            gamma,
            w,
            t,
            gamma1,
            gamma2,
            n,
            seed,
            out,
        } => {
            let spec = build_spec(dist, gamma, w, t, gamma1, gamma2)?;
            let body = run_sample(&spec, n, seed)?;
            emit(stdout, out.as_deref(), &body)
        }
        Command::Fit {
            estimator,
            input,
            grid,
            seed,
            json,
        } => {
            let (body, converged) = run_fit(estimator, &input, grid.as_deref(), seed, json)?;
            emit(stdout, None, &body)?;
            if converged {
                Ok(())
            } else {
                Err(CliError::numerical(
                    "estimator did not converge (report above)",
                ))
            }
        }
        Command::Test {
            method,
            input,
            b,
            seed,
            grid,
        } => {
            let body = run_test(method, &input, b, seed, grid.as_deref())?;
            emit(stdout, None, &body)
        }
        Command::Verify {
            gamma_grid,
            a_grid,
            tol_report,
        } => {
            let report = run_verify(gamma_grid.as_deref(), a_grid.as_deref())?;
            let body = if tol_report {
                let mut s = serde_json::to_string_pretty(&report.families)
                    .expect("report serializes");
                s.push('\n');
                s
            } else {
                render_verify_table(&report)
            };
            emit(stdout, None, &body)?;
            if report.all_pass {
                Ok(())
            } else {
                Err(CliError::numerical("identity verification failed"))
            }
        }
        Command::Field { input, grid, out } => {
            let sample = read_sample(&input)?;
            let points = parse_gamma_list(&grid)?;
            let body = emit_field_grid(&sample, &points)?;
            emit(stdout, out.as_deref(), &body)
        }
    }
}

fn build_spec(
    dist: DistKind,
    gamma: Option<String>,
    w: Option<String>,
    t: Option<f64>,
    gamma1: Option<String>,
    gamma2: Option<String>,
) -> CliResult<DistSpec> {
    match dist {
        DistKind::Cauchy => {
            let g = gamma.ok_or_else(|| CliError::user("--dist cauchy requires --gamma"))?;
            Ok(DistSpec::Cauchy(parse_halfplane(&g)?))
        }
        DistKind::Circular => {
            let w = w.ok_or_else(|| CliError::user("--dist circular requires --w"))?;
            let w = DiskParam::from_complex(parse_complex(&w)?)?;
            Ok(DistSpec::CircularCauchy(w))
        }
        DistKind::Mixture => {
            let t = t.ok_or_else(|| CliError::user("--dist mixture requires --t"))?;
            let g1 = gamma1.ok_or_else(|| CliError::user("--dist mixture requires --gamma1"))?;
            let g2 = gamma2.ok_or_else(|| CliError::user("--dist mixture requires --gamma2"))?;
            let params = MixtureParams::new(t, parse_halfplane(&g1)?, parse_halfplane(&g2)?)?;
            Ok(DistSpec::MixtureCauchy(params))
        }
    }
}

fn parse_halfplane(text: &str) -> CliResult<HalfPlaneParam> {
    Ok(HalfPlaneParam::from_complex(parse_complex(text)?)?)
}

fn run_sample(spec: &DistSpec, n: usize, seed: u64) -> CliResult<String> {
    let mut body = String::new();
    match cauchykit::distributions::sample(spec, n, seed)? {
        Samples::Real(s) => {
            for &v in s.values() {
                writeln!(body, "{v}").expect("string write");
            }
        }
        Samples::Angles(angles) => {
            for v in angles {
                writeln!(body, "{v}").expect("string write");
            }
        }
    }
    Ok(body)
}

fn read_sample(path: &Path) -> CliResult<SampleSet> {
    let file = File::open(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    let values = read_observations(BufReader::new(file))?;
    Ok(SampleSet::from_values(values)?)
}

fn read_angles(path: &Path) -> CliResult<Vec<f64>> {
    let file = File::open(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_observations(BufReader::new(file))?)
}

/// Exponent grid syntax: `a1,a2,...` or `start:stop:count`.
fn parse_exponent_grid(text: &str) -> CliResult<Vec<MellinExponent>> {
    let raw: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::user(format!(
                "grid triple must be start:stop:count, got {text:?}"
            )));
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| CliError::user(format!("bad grid start {:?}", parts[0])))?;
        let stop: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| CliError::user(format!("bad grid stop {:?}", parts[1])))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| CliError::user(format!("bad grid count {:?}", parts[2])))?;
        if count < 1 {
            return Err(CliError::user("grid count must be at least 1"));
        }
        (0..count)
            .map(|k| {
                if count == 1 {
                    start
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect()
    } else {
        text.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::user(format!("bad grid value {:?}", p.trim())))
            })
            .collect::<CliResult<Vec<f64>>>()?
    };
    raw.into_iter()
        .map(|a| MellinExponent::real(a).map_err(CliError::from))
        .collect()
}

fn parse_gamma_list(text: &str) -> CliResult<Vec<HalfPlaneParam>> {
    text.split(',')
        .map(|p| parse_halfplane(p.trim()))
        .collect()
}

fn run_fit(
    estimator: EstimatorKind,
    input: &Path,
    grid: Option<&str>,
    seed: u64,
    json: bool,
) -> CliResult<(String, bool)> {
    let exponent_grid = match grid {
        Some(g) => parse_exponent_grid(g)?,
        None => default_exponent_grid(),
    };

    let (json_value, human, converged) = match estimator {
        EstimatorKind::Mle => {
            let s = read_sample(input)?;
            let r = mle_fixed_point(&s, &FixedPointConfig::default())?;
            (
                serde_json::to_value(r.json_ready()).expect("report serializes"),
                render_scalar_report(&r.estimate, r.converged, r.iterations, r.residual, r.loglik),
                r.converged,
            )
        }
        EstimatorKind::Mellin => {
            let s = read_sample(input)?;
            let r = mellin_consensus(&s, &exponent_grid)?;
            (
                serde_json::to_value(r.json_ready()).expect("report serializes"),
                render_scalar_report(&r.estimate, r.converged, r.iterations, r.residual, r.loglik),
                r.converged,
            )
        }
        EstimatorKind::Logmoment => {
            let s = read_sample(input)?;
            let r = logmoment_estimate(&s)?;
            (
                serde_json::to_value(r.json_ready()).expect("report serializes"),
                render_scalar_report(&r.estimate, r.converged, r.iterations, r.residual, r.loglik),
                r.converged,
            )
        }
        EstimatorKind::Circular => {
            let angles = read_angles(input)?;
            let r = circular_fit(&angles, &FixedPointConfig::default())?;
            (
                serde_json::to_value(r.json_ready()).expect("report serializes"),
                render_scalar_report(&r.estimate, r.converged, r.iterations, r.residual, r.loglik),
                r.converged,
            )
        }
        EstimatorKind::Mixture => {
            let s = read_sample(input)?;
            let cfg = MixtureFitConfig {
                seed,
                ..MixtureFitConfig::default()
            };
            let grid_owned;
            let fit_grid = if grid.is_some() {
                &exponent_grid
            } else {
                grid_owned = default_mixture_grid();
                &grid_owned
            };
            let r = mixture_fit(&s, fit_grid, &cfg)?;
            let human = format!
                (
                "estimate: t={} gamma1={} gamma2={}\nconverged: {}\nresidual: {:.6e}\nloglik: {}\n",
                r.estimate.t(),
                r.estimate.gamma1(),
                r.estimate.gamma2(),
                r.converged,
                r.residual,
                r.loglik.map_or("n/a".to_string(), |v| format!("{v}")),
            );
            let converged = r.converged;
            (
                serde_json::to_value(&r).expect("report serializes"),
                human,
                converged,
            )
        }
    };

    let body = if json {
        let mut s = serde_json::to_string_pretty(&json_value).expect("valid json");
        s.push('\n');
        s
    } else {
        human
    };
    Ok((body, converged))
}

fn render_scalar_report(
    estimate: &Complex64,
    converged: bool,
    iterations: usize,
    residual: f64,
    loglik: Option<f64>,
) -> String {
    format!(
        "estimate: {}\nconverged: {}\niterations: {}\nresidual: {:.6e}\nloglik: {}\n",
        format_complex(*estimate),
        converged,
        iterations,
        residual,
        loglik.map_or("n/a".to_string(), |v| format!("{v}")),
    )
}

fn run_test(
    method: MethodKind,
    input: &Path,
    b: usize,
    seed: u64,
    grid: Option<&str>,
) -> CliResult<String> {
    let s = read_sample(input)?;
    let report = match method {
        MethodKind::Mobius => {
            let grid = match grid {
                Some(g) => GammaGrid::Explicit(parse_gamma_list(g)?),
                None => GammaGrid::Default,
            };
            cauchy_test_mobius(&s, &grid, b, seed)?
        }
        MethodKind::Mellin => {
            let grid = match grid {
                Some(g) => parse_exponent_grid(g)?,
                None => default_exponent_grid(),
            };
            cauchy_test_mellin(&s, &grid, b, seed)?
        }
    };
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    Ok(body)
}

fn run_verify(gamma_grid: Option<&str>, a_grid: Option<&str>) -> CliResult<IdentityReport> {
    let gammas = match gamma_grid {
        Some(g) => parse_gamma_list(g)?,
        None => default_verify_gamma_grid(),
    };
    let exponents: Vec<f64> = match a_grid {
        Some(g) => parse_exponent_grid(g)?.iter().map(|a| a.re()).collect(),
        None => default_verify_a_grid(),
    };
    Ok(verify_identities(
        &gammas,
        &exponents,
        &QuadratureConfig::default(),
    )?)
}

fn render_verify_table(report: &IdentityReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<24} {:>12} {:>10} {:>6}  worst point",
        "family", "worst error", "tolerance", "pass"
    )
    .expect("string write");
    for f in &report.families {
        writeln!(
            out,
            "{:<24} {:>12.3e} {:>10.0e} {:>6}  {}",
            f.family,
            f.worst_error,
            f.tolerance,
            if f.pass { "yes" } else { "NO" },
            f.worst_point
        )
        .expect("string write");
    }
    writeln!(out, "\nPoisson kernel sup-error by bandwidth:").expect("string write");
    for (b, sup) in &report.poisson_table {
        writeln!(out, "  b = {b:<7} sup error = {sup:.6e}").expect("string write");
    }
    writeln!(
        out,
        "\noverall: {}",
        if report.all_pass { "PASS" } else { "FAIL" }
    )
    .expect("string write");
    out
}

/// Table of the Möbius statistic over a gamma grid: CSV with columns
/// re(gamma), im(gamma), re(F_X), im(F_X). Near-constant columns indicate
/// Cauchy data.
pub fn emit_field_grid(s: &SampleSet, grid: &[HalfPlaneParam]) -> CliResult<String> {
    if grid.is_empty() {
        return Err(CliError::user("field grid must not be empty"));
    }
    let mut out = String::from("# re_gamma,im_gamma,re_F,im_F\n");
    for &gamma in grid {
        let f = mobius_stat(s, gamma)?;
        writeln!(
            out,
            "{},{},{},{}",
            gamma.location(),
            gamma.scale(),
            f.re,
            f.im
        )
        .expect("string write");
    }
    Ok(out)
}

/// Write to stdout, or atomically to a file (temp sibling + rename) so error
/// paths never leave partial output behind.
fn emit(stdout: &mut dyn std::io::Write, out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        None => {
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::user(format!("cannot write to stdout: {e}")))?;
            Ok(())
        }
        Some(path) => write_atomic(path, body.as_bytes()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir: PathBuf = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::user(format!("cannot create file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::user(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::user(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_grid_forms() {
        let g = parse_exponent_grid("0.1,0.5,0.9").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1].re() - 0.5).abs() <= 1e-15);

        let g = parse_exponent_grid("0.1:0.9:9").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[0].re() - 0.1).abs() <= 1e-15);
        assert!((g[8].re() - 0.9).abs() <= 1e-15);

        assert!(parse_exponent_grid("0.5:0.9").is_err());
        assert!(parse_exponent_grid("abc").is_err());
        assert!(parse_exponent_grid("1.5").is_err());
    }

    #[test]
    fn gamma_list_validation() {
        let g = parse_gamma_list("0+1i, 2+0.5i").unwrap();
        assert_eq!(g.len(), 2);
        assert!(parse_gamma_list("1-2i").is_err());
        assert!(parse_gamma_list("zzz").is_err());
    }

    #[test]
    fn field_grid_two_points_matches_closed_form() {
        // For {-1, 1} the field is F(gamma) = 1/conj(gamma) (so the fixed
        // points are the whole unit semicircle and the row at gamma = i
        // reads (0, 1)).
        let s = SampleSet::from_values(vec![-1.0, 1.0]).unwrap();
        let grid = parse_gamma_list("0+1i,1+1i,-1+2i").unwrap();
        let csv = emit_field_grid(&s, &grid).unwrap();
        for (line, gamma) in csv.lines().skip(1).zip(grid.iter()) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            let expect = gamma.value().conj().inv();
            assert!((cols[2] - expect.re).abs() <= 1e-10, "{line}");
            assert!((cols[3] - expect.im).abs() <= 1e-10, "{line}");
        }
        let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert!(first[2].abs() <= 1e-10 && (first[3] - 1.0).abs() <= 1e-10);
        assert!(emit_field_grid(&s, &[]).is_err());
    }

    #[test]
    fn spec_requires_matching_parameters() {
        assert!(build_spec(DistKind::Cauchy, None, None, None, None, None).is_err());
        assert!(build_spec(
            DistKind::Cauchy,
            Some("1-1i".into()),
            None,
            None,
            None,
            None
        )
        .is_err());
        let ok = build_spec(DistKind::Cauchy, Some("0+1i".into()), None, None, None, None);
        assert!(ok.is_ok());
    }
}
