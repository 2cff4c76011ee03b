use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::eigen_stats::{det_product_check, empirical_spectral_report};
use crate::estimators::{
    calibrate_spectrum, EstimatorContext, EstimatorRegistry, SpectralCalibration,
};
use crate::loss::LossKind;
use crate::matrix::{cholesky, eigh, iwasawa_full, SpdMatrix};
use crate::montecarlo::sharded_map;
use crate::risk::{
    calibration_replicates, local_optimality, mc_risk_for, risk_stream, stein_chain_holds,
    verify_ordering, Check, CheckStatus, Coordinates, LocalOptimalityReport, OrderingReport,
    CALIBRATION_STREAM, MIN_RISK_REPLICATES,
};
use crate::sampling::{sample_wishart, RngStream};

use super::files::{calibration_to_json, format_matrix, parse_matrix, read_calibration};
use super::render;
use super::{
    CalibrateArgs, CliError, DecomposeArgs, Dims, OutputFormat, Outcome, RiskTableArgs, SampleArgs,
    SpectraArgs, VerifyArgs,
};

const SAMPLE_STREAM: u64 = 3;
const SPECTRA_STREAM: u64 = 4;
const DET_PRODUCT_STREAM: u64 = 5;

/// Largest `p` of the analytic ordering grid checked by `verify`.
const GRID_MAX_P: usize = 6;
const GRID_MAX_N: usize = 40;

fn check_dims(d: &Dims) -> Result<(), CliError> {
    if d.p == 0 || d.n < d.p {
        return Err(CliError::usage(format!("need n ≥ p ≥ 1, got p = {}, n = {}", d.p, d.n)));
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::usage(e.to_string()))
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

fn load_or_compute_calibration(
    path: Option<&Path>,
    p: usize,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<SpectralCalibration, CliError> {
    if let Some(path) = path.filter(|p| p.exists()) {
        let cal = read_calibration(path)?;
        cal.check_matches(p, n)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        log::info!("reusing calibration from {}", path.display());
        return Ok(cal);
    }
    let reps = calibration_replicates(replicates);
    log::info!("computing calibration at p = {p}, n = {n} with {reps} replicates");
    let cal = calibrate_spectrum(p, n, reps, &RngStream::new(seed, CALIBRATION_STREAM))?;
    if let Some(path) = path {
        std::fs::write(path, calibration_to_json(&cal))
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        log::info!("wrote calibration to {}", path.display());
    }
    Ok(cal)
}

pub fn risk_table(a: &RiskTableArgs, format: OutputFormat) -> Result<Outcome, CliError> {
    check_dims(&a.dims)?;
    let (p, n, seed) = (a.dims.p, a.dims.n, a.seed.seed);
    let registry = EstimatorRegistry::default();
    let names: Vec<String> = if a.estimators.is_empty() {
        registry.names().map(str::to_string).collect()
    } else {
        a.estimators.clone()
    };
    let kinds = names
        .iter()
        .map(|name| registry.kind_of(name))
        .collect::<Result<Vec<_>, _>>()?;
    let losses: Vec<LossKind> = match &a.loss {
        Some(l) => vec![l.parse()?],
        None => LossKind::ALL.to_vec(),
    };

    let mut ctx = EstimatorContext::new(p, n);
    if kinds.iter().any(|k| k.needs_calibration()) {
        let cal = load_or_compute_calibration(a.calibration.as_deref(), p, n, a.replicates, seed)?;
        ctx = ctx.with_calibration(Arc::new(cal));
    }

    let mut rows = Vec::new();
    for (name, &kind) in names.iter().zip(&kinds) {
        let est = registry.build(name, &ctx)?;
        for &loss in &losses {
            let rng = risk_stream(seed, kind, loss);
            let coords = Coordinates::default_for(kind, loss);
            rows.push(mc_risk_for(est.as_ref(), loss, coords, p, n, a.replicates, &rng)?);
        }
    }
    let flagged: Vec<String> = rows
        .iter()
        .filter(|r| r.flagged)
        .map(|r| format!("{}/{}", r.estimator, r.loss))
        .collect();
    if !flagged.is_empty() {
        eprintln!("flagged rows (MC outside {} SE of analytic): {}", crate::risk::SE_BAND, flagged.join(", "));
    }
    Ok(Outcome {
        text: render::risk_rows(&rows, format),
        code: if flagged.is_empty() { 0 } else { 1 },
    })
}

#[derive(Serialize)]
struct Verdict<'a> {
    passed: bool,
    checks: &'a [Check],
    ordering: &'a OrderingReport,
    local_optimality: Option<&'a LocalOptimalityReport>,
}

pub fn verify(a: &VerifyArgs, format: OutputFormat) -> Result<Outcome, CliError> {
    check_dims(&Dims { p: a.p, n: a.n })?;
    let mut checks = Vec::new();

    let mut grid_failures = Vec::new();
    for p in 1..=GRID_MAX_P {
        for n in p..=GRID_MAX_N {
            if !stein_chain_holds(p, n)? {
                grid_failures.push(format!("({p}, {n})"));
            }
        }
    }
    checks.push(Check {
        name: "stein-chain-grid".to_string(),
        status: if grid_failures.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: if grid_failures.is_empty() {
            format!("p ≤ {GRID_MAX_P}, n ≤ {GRID_MAX_N}")
        } else {
            format!("fails at {}", grid_failures.join(" "))
        },
    });

    let ordering = verify_ordering(a.p, a.n, a.replicates, a.seed.seed)?;
    checks.extend(ordering.checks.iter().cloned());

    let optimality = if a.replicates >= MIN_RISK_REPLICATES {
        let r = local_optimality(a.p, a.n, a.replicates, a.seed.seed, a.perturbation)?;
        checks.extend(r.checks.iter().cloned());
        Some(r)
    } else {
        checks.push(Check {
            name: "local-optimality".to_string(),
            status: CheckStatus::Inconclusive,
            detail: format!("{} replicates < {MIN_RISK_REPLICATES}", a.replicates),
        });
        None
    };

    let passed = checks.iter().all(Check::passed);
    if !passed {
        let failing: Vec<&str> = checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("failing checks: {}", failing.join(", "));
    }
    let text = match format {
        OutputFormat::Json => render::json(&Verdict {
            passed,
            checks: &checks,
            ordering: &ordering,
            local_optimality: optimality.as_ref(),
        }),
        _ => render::checks(&checks, format),
    };
    Ok(Outcome {
        text,
        code: if passed { 0 } else { 1 },
    })
}

#[derive(Serialize)]
pub struct Decomposition {
    pub cholesky: Vec<Vec<f64>>,
    pub pivots: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

pub fn decompose(a: &DecomposeArgs, format: OutputFormat) -> Result<Outcome, CliError> {
    let m = parse_matrix(&read_input(&a.input)?)?;
    let spd = SpdMatrix::new(m)?;
    let t = cholesky(&spd)?;
    let d = Decomposition {
        cholesky: (0..t.dim()).map(|i| t.matrix().row(i).to_vec()).collect(),
        pivots: iwasawa_full(&spd)?.pivots,
        eigenvalues: eigh(&spd)?.eigenvalues,
    };
    Ok(Outcome::ok(render::decomposition(&d, format)))
}

pub fn sample(a: &SampleArgs, format: OutputFormat) -> Result<Outcome, CliError> {
    check_dims(&a.dims)?;
    let (p, n) = (a.dims.p, a.dims.n);
    let sigma = match &a.sigma {
        Some(path) => SpdMatrix::new(parse_matrix(&read_input(path)?)?)?,
        None => SpdMatrix::identity(p),
    };
    if sigma.dim() != p {
        return Err(CliError::usage(format!("Σ has dimension {}, expected {p}", sigma.dim())));
    }
    let rng = RngStream::new(a.seed.seed, SAMPLE_STREAM);
    let draws = sharded_map(&rng, a.count, |r| Ok(sample_wishart(r, &sigma, n)?.scatter))?;
    let text = match format {
        OutputFormat::Json => {
            let rows: Vec<Vec<Vec<f64>>> = draws
                .iter()
                .map(|d| (0..p).map(|i| d.matrix().row(i).to_vec()).collect())
                .collect();
            render::json(&serde_json::json!({
                "p": p, "n": n, "seed": a.seed.seed, "draws": rows,
            }))
        }
        OutputFormat::Csv => {
            let mut out = String::from("draw,row");
            for j in 0..p {
                out.push_str(&format!(",c{j}"));
            }
            out.push('\n');
            for (k, d) in draws.iter().enumerate() {
                for i in 0..p {
                    let vals: Vec<String> = d.matrix().row(i).iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("{k},{i},{}\n", vals.join(",")));
                }
            }
            out
        }
        OutputFormat::Table => draws
            .iter()
            .map(|d| format_matrix(d.matrix()))
            .collect::<Vec<_>>()
            .join("\n"),
    };
    Ok(Outcome::ok(text))
}

pub fn calibrate(a: &CalibrateArgs, _format: OutputFormat) -> Result<Outcome, CliError> {
    check_dims(&a.dims)?;
    let rng = RngStream::new(a.seed.seed, CALIBRATION_STREAM);
    let cal = calibrate_spectrum(a.dims.p, a.dims.n, a.replicates, &rng)?;
    Ok(Outcome::ok(calibration_to_json(&cal)))
}

pub fn spectra(a: &SpectraArgs, format: OutputFormat) -> Result<Outcome, CliError> {
    check_dims(&a.dims)?;
    let (p, n, seed) = (a.dims.p, a.dims.n, a.seed.seed);
    let report = empirical_spectral_report(p, n, a.replicates, &RngStream::new(seed, SPECTRA_STREAM))?;
    let det = det_product_check(p, n, a.replicates, &RngStream::new(seed, DET_PRODUCT_STREAM))?;
    let code = if det.passed { 0 } else { 1 };
    Ok(Outcome {
        text: render::spectra(&report, &det, format),
        code,
    })
}
