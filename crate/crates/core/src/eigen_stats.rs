//! Statistics of Wishart eigenvalues: a joint log-density, the determinant
//! product identity, and large-dimension references (Marchenko–Pastur
//! geometric mean, extreme-eigenvalue limits).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::eigh;
use crate::montecarlo::{sharded_map, Summary};
use crate::risk::SE_BAND;
use crate::sampling::{sample_wishart_identity, RngStream};
use crate::special::{chisq_log_moments, log_gamma};

/// Below this dimension the asymptotic references are flagged as rough.
const FINITE_SIZE_P: usize = 30;

/// Eigenvalues of one scatter matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    pub p: usize,
    pub n: usize,
}

impl SpectrumSample {
    /// Sorts `eigenvalues` descending; rejects non-positive or non-finite values.
    pub fn new(mut eigenvalues: Vec<f64>, n: usize) -> Result<Self> {
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::domain(format!("eigenvalues must be positive, got {bad}")));
        }
        let p = eigenvalues.len();
        if p == 0 || n < p {
            return Err(Error::domain(format!("need n ≥ p ≥ 1, got p = {p}, n = {n}")));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { eigenvalues, p, n })
    }
}

/// Log of the joint eigenvalue density in the form
/// `2^{−np/2} Π_i Γ(3/2)/(Γ(1+i/2) Γ((n−p+i)/2)) l_i^{(n−p+i)/2−1} e^{−l_i/2} Π_{i<j} |l_i − l_j|`,
/// with `l_1 > … > l_p`.
///
/// The normalizer is taken as given. At `p = 1` this is the χ²_n density;
/// for `p ≥ 2` the total mass is not 1.
pub fn log_joint_eigen_density(spectrum: &SpectrumSample) -> Result<f64> {
    let SpectrumSample { eigenvalues: l, p, n } = spectrum;
    let (p, n) = (*p, *n);
    let mut acc = -0.5 * (n * p) as f64 * std::f64::consts::LN_2;
    let lg_three_halves = log_gamma(1.5)?;
    for (idx, &li) in l.iter().enumerate() {
        let i = (idx + 1) as f64;
        let a = 0.5 * (n - p) as f64 + 0.5 * i;
        acc += lg_three_halves - log_gamma(1.0 + 0.5 * i)? - log_gamma(a)?;
        acc += (a - 1.0) * li.ln() - 0.5 * li;
    }
    for i in 0..p {
        for j in i + 1..p {
            let d = l[i] - l[j];
            if d <= 0.0 {
                return Err(Error::domain(format!("tied eigenvalues at positions {i} and {j}")));
            }
            acc += d.ln();
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetProductReport {
    pub p: usize,
    pub n: usize,
    /// MC mean of `Π l_i / (n − p + i)`.
    pub product: Summary,
    pub passed: bool,
}

/// Checks `E[Π_i l_i/(n−p+i)] = 1` under `W(I, n)`.
pub fn det_product_check(p: usize, n: usize, replicates: usize, rng: &RngStream) -> Result<DetProductReport> {
    if p == 0 || n < p {
        return Err(Error::domain(format!("need n ≥ p ≥ 1, got p = {p}, n = {n}")));
    }
    let values = sharded_map(rng, replicates, |r| {
        let l = eigh(&sample_wishart_identity(r, p, n)?.scatter)?.eigenvalues;
        Ok(l.iter()
            .enumerate()
            .map(|(i, li)| li / (n - p + i + 1) as f64)
            .product::<f64>())
    })?;
    let product = Summary::of(&values);
    Ok(DetProductReport {
        p,
        n,
        product,
        passed: product.within(1.0, SE_BAND),
    })
}

/// Geometric mean (as `E log x`) of the Marchenko–Pastur law with ratio `y`:
/// `−1 − (1−y) log(1−y) / y`.
pub fn mp_geometric_mean(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::domain(format!("ratio must lie in (0, 1], got {y}")));
    }
    if y == 1.0 {
        return Ok(-1.0);
    }
    if y < 1e-3 {
        // −Σ_{k≥1} y^k / (k(k+1))
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 1..=8 {
            term *= y;
            acc -= term / (k * (k + 1)) as f64;
        }
        return Ok(acc);
    }
    Ok(-1.0 - (1.0 - y) * (-y).ln_1p() / y)
}

/// `log(1 ± √y)²`, the limits of `log(max l / n)` and `log(min l / n)`.
/// The lower limit is `None` at `y = 1`.
pub fn edge_references(y: f64) -> (f64, Option<f64>) {
    let r = y.sqrt();
    let upper = 2.0 * r.ln_1p();
    let lower = (y < 1.0).then(|| 2.0 * (-r).ln_1p());
    (upper, lower)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub p: usize,
    pub n: usize,
    pub y: f64,
    pub replicates: usize,
    pub seed: u64,
    /// MC mean of `(1/p) Σ log(l_i / n)`.
    pub mean_log: Summary,
    /// Marchenko–Pastur limit of `mean_log`.
    pub mean_log_reference: f64,
    /// Exact finite-size value `(1/p) Σ E[log χ²_{n−i+1}] − log n`.
    pub mean_log_exact: f64,
    pub log_max: Summary,
    pub log_max_reference: f64,
    pub log_min: Summary,
    pub log_min_reference: Option<f64>,
    pub warnings: Vec<String>,
}

/// MC spectrum statistics at `(p, n)` next to their asymptotic references.
pub fn empirical_spectral_report(
    p: usize,
    n: usize,
    replicates: usize,
    rng: &RngStream,
) -> Result<SpectralReport> {
    if p < 2 || n < p {
        return Err(Error::domain(format!("need n ≥ p ≥ 2, got p = {p}, n = {n}")));
    }
    if replicates < 2 {
        return Err(Error::domain("need at least 2 replicates".to_string()));
    }
    let log_n = (n as f64).ln();
    let rows = sharded_map(rng, replicates, |r| {
        let l = eigh(&sample_wishart_identity(r, p, n)?.scatter)?.eigenvalues;
        let mean = l.iter().map(|x| x.ln()).sum::<f64>() / p as f64 - log_n;
        Ok([mean, l[0].ln() - log_n, l[p - 1].ln() - log_n])
    })?;
    let column = |k: usize| Summary::of(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let y = p as f64 / n as f64;
    let (upper, lower) = edge_references(y);
    let mean_log_exact = (1..=p)
        .map(|i| Ok(chisq_log_moments((n + 1 - i) as f64)?.mean_log))
        .sum::<Result<f64>>()?
        / p as f64
        - log_n;

    let mut warnings = Vec::new();
    if p < FINITE_SIZE_P {
        warnings.push(format!(
            "p = {p} is small; asymptotic references carry finite-size error"
        ));
    }
    if lower.is_none() {
        warnings.push("y = 1: the smallest-eigenvalue limit is −∞".to_string());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(SpectralReport {
        p,
        n,
        y,
        replicates,
        seed: rng.seed(),
        mean_log: column(0),
        mean_log_reference: mp_geometric_mean(y)?,
        mean_log_exact,
        log_max: column(1),
        log_max_reference: upper,
        log_min: column(2),
        log_min_reference: lower,
        warnings,
    })
}
