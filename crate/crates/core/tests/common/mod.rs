//! Independent numerical oracles for the integration tests.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]`, started from unit-width
/// panels so that narrow peaks are not missed.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let panels = ((b - a).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| adaptive_simpson(f, a + k as f64 * h, a + (k + 1) as f64 * h, tol / panels as f64))
        .sum()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `(E[log X], Var[log X])` for `X ~ χ²_ν`, by quadrature in `u = log x`.
///
/// The density of `u` is proportional to `exp(νu/2 − eᵘ/2)`. The normalizing
/// constant is itself computed by quadrature, so no gamma function is involved.
pub fn chisq_log_moments_by_quadrature(nu: f64) -> (f64, f64) {
    let mode = nu.ln();
    let peak = 0.5 * nu * mode - 0.5 * nu;
    let kernel = |u: f64| (0.5 * nu * u - 0.5 * u.exp() - peak).exp();
    // the left tail decays like e^{νu/2}, the right one doubly exponentially
    let (lo, hi) = (mode - 90.0 / nu.min(1.0) - 40.0, mode + 6.0);
    let tol = 1e-12;
    let mass = integrate(&kernel, lo, hi, tol);
    let mean = integrate(&|u| u * kernel(u), lo, hi, tol) / mass;
    let var = integrate(&|u| (u - mean).powi(2) * kernel(u), lo, hi, tol) / mass;
    (mean, var)
}

/// Asymptotic Kolmogorov–Smirnov critical value `√(−ln(α/2)/2) / √N`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(0.5 * alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Two-sided one-sample KS statistic of `data` against `cdf`.
pub fn ks_statistic(mut data: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    data.sort_by(f64::total_cmp);
    let n = data.len() as f64;
    data.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}
