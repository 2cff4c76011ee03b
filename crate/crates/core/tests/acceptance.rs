//! The twelve acceptance criteria. Runs with its own harness so that one
//! PASS/FAIL line per criterion is always printed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use spdrisk::eigen_stats::{det_product_check, empirical_spectral_report, mp_geometric_mean};
use spdrisk::estimators::{calibrate_spectrum, pivot_divisors, stein_divisors, EstimatorKind};
use spdrisk::loss::{geodesic_loss, stein_loss, LossKind};
use spdrisk::matrix::{Matrix, SpdMatrix};
use spdrisk::montecarlo::{combined_se, sharded_map, Summary};
use spdrisk::risk::{
    analytic_geodesic_risk, analytic_stein_risk, local_optimality, mc_risk, risk_stream,
    CALIBRATION_STREAM,
};
use spdrisk::sampling::{
    sample_bartlett_factor, sample_std_normal, sample_wishart, sample_wishart_identity, RngStream,
};
use spdrisk::special::{chisq_log_moments, trigamma};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use common::{chisq_log_moments_by_quadrature, ks_critical, ks_statistic};

const SEED: u64 = 20_260_415;
const K: f64 = 4.0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

fn c1_analytic_ordering() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in 1..=6usize {
        for n in p..=40 {
            let ib = analytic_stein_risk(EstimatorKind::IwasawaBest, p, n).unwrap().value;
            let st = analytic_stein_risk(EstimatorKind::Stein, p, n).unwrap().value;
            let ml = analytic_stein_risk(EstimatorKind::Mle, p, n).unwrap().value;
            let ok = if p == 1 { ib == st && st == ml } else { ib < st && st < ml };
            if !ok {
                bad.push(format!("({p},{n})"));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && elapsed < Duration::from_secs(1),
        format!("violations: {bad:?}, runtime {elapsed:?}"),
    )
}

fn c2_mc_stein_risk() -> Verdict {
    let start = Instant::now();
    let reports = single_threaded(|| {
        [EstimatorKind::Mle, EstimatorKind::Stein, EstimatorKind::IwasawaBest]
            .map(|k| {
                let rng = risk_stream(SEED, k, LossKind::Stein);
                mc_risk(k, LossKind::Stein, 3, 10, 100_000, &rng, None).unwrap()
            })
    });
    let elapsed = start.elapsed();
    let mut ok = elapsed < Duration::from_secs(30);
    let mut detail = Vec::new();
    for r in &reports {
        let a = r.analytic.unwrap();
        ok &= (r.mc_mean - a).abs() <= K * r.mc_se;
        detail.push(format!("{} {:.5}±{:.5} vs {a:.5}", r.estimator, r.mc_mean, r.mc_se));
    }
    verdict(ok, format!("{}; runtime {elapsed:?}", detail.join(", ")))
}

fn c3_coordinate_invariance() -> Verdict {
    let (p, n) = (3, 10);
    let gi = analytic_geodesic_risk(EstimatorKind::GeodesicIwasawa, p, n).unwrap().value;
    let gc = analytic_geodesic_risk(EstimatorKind::GeodesicCholesky, p, n).unwrap().value;
    let expr: f64 = (1..=p).map(|i| trigamma((n + 1 - i) as f64 / 2.0).unwrap()).sum();
    let quad: f64 = (1..=p).map(|i| chisq_log_moments_by_quadrature((n + 1 - i) as f64).1).sum();
    let analytic_ok = gi.to_bits() == gc.to_bits() && gi == expr && (gi - quad).abs() < 1e-8;

    let run = |k| {
        mc_risk(k, LossKind::Geodesic, p, n, 100_000, &risk_stream(SEED, k, LossKind::Geodesic), None)
            .unwrap()
    };
    let a = run(EstimatorKind::GeodesicIwasawa);
    let b = run(EstimatorKind::GeodesicCholesky);
    let se = combined_se(a.mc_se, b.mc_se);
    let mc_ok = (a.mc_mean - gi).abs() <= K * a.mc_se
        && (b.mc_mean - gi).abs() <= K * b.mc_se
        && (a.mc_mean - b.mc_mean).abs() <= K * se;
    verdict(
        analytic_ok && mc_ok,
        format!(
            "analytic {gi:.12} (quadrature {quad:.12}); mc {:.5} vs {:.5}, combined se {se:.5}",
            a.mc_mean, b.mc_mean
        ),
    )
}

fn squared_bias(divisors: &[f64], n: usize) -> f64 {
    divisors
        .iter()
        .enumerate()
        .map(|(i, d)| (d.ln() - chisq_log_moments((n - i) as f64).unwrap().mean_log).powi(2))
        .sum()
}

fn c4_gap_identities() -> Verdict {
    let mut worst: f64 = 0.0;
    for p in 1..=6usize {
        for n in p..=40 {
            let gi = analytic_geodesic_risk(EstimatorKind::GeodesicIwasawa, p, n).unwrap().value;
            let gc = analytic_geodesic_risk(EstimatorKind::GeodesicCholesky, p, n).unwrap().value;
            let ib = analytic_geodesic_risk(EstimatorKind::IwasawaBest, p, n).unwrap().value;
            let st = analytic_geodesic_risk(EstimatorKind::Stein, p, n).unwrap().value;
            for (diff, gap) in [
                (ib - gi, squared_bias(&pivot_divisors(p, n), n)),
                (st - gc, squared_bias(&stein_divisors(p, n), n)),
            ] {
                worst = worst.max((diff - gap).abs() / gap);
            }
        }
    }
    let analytic_ok = worst <= 1e-12;

    let (p, n) = (3, 10);
    let run = |k| {
        mc_risk(k, LossKind::Geodesic, p, n, 100_000, &risk_stream(SEED, k, LossKind::Geodesic), None)
            .unwrap()
    };
    let mut mc_ok = true;
    let mut detail = Vec::new();
    for (upper, lower, divisors) in [
        (EstimatorKind::IwasawaBest, EstimatorKind::GeodesicIwasawa, pivot_divisors(p, n)),
        (EstimatorKind::Stein, EstimatorKind::GeodesicCholesky, stein_divisors(p, n)),
    ] {
        let (u, l) = (run(upper), run(lower));
        let gap = squared_bias(&divisors, n);
        let se = combined_se(u.mc_se, l.mc_se);
        mc_ok &= !u.flagged && !l.flagged && ((u.mc_mean - l.mc_mean) - gap).abs() <= K * se;
        detail.push(format!(
            "{upper}−{lower} mc {:.5} vs gap {gap:.5} (se {se:.5})",
            u.mc_mean - l.mc_mean
        ));
    }
    verdict(
        analytic_ok && mc_ok,
        format!("worst relative gap error {worst:.2e}; {}", detail.join(", ")),
    )
}

fn c5_rot_eq_direction() -> Verdict {
    let (p, n) = (3, 10);
    let cal = Arc::new(
        calibrate_spectrum(p, n, 200_000, &RngStream::new(SEED, CALIBRATION_STREAM)).unwrap(),
    );
    let run = |k| {
        let rng = risk_stream(SEED, k, LossKind::Geodesic);
        mc_risk(k, LossKind::Geodesic, p, n, 100_000, &rng, Some(cal.clone())).unwrap()
    };
    let g = run(EstimatorKind::RotEqGeodesic);
    let s = run(EstimatorKind::RotEqStein);
    let se = combined_se(g.mc_se, s.mc_se);
    let diff = s.mc_mean - g.mc_mean;
    verdict(
        diff > 2.0 * se,
        format!(
            "rot-eq-stein {:.5} − rot-eq-geodesic {:.5} = {diff:.5}, combined se {se:.5}, calibrated gap {:.5}",
            s.mc_mean,
            g.mc_mean,
            cal.geodesic_gap()
        ),
    )
}

fn c6_local_optimality() -> Verdict {
    let r = local_optimality(2, 10, 200_000, SEED, 0.2).unwrap();
    let ok = r.perturbations.len() == 4
        && r.perturbations
            .iter()
            .all(|x| (x.excess - 0.04).abs() <= 2.0 * x.combined_se && x.excess > 2.0 * x.combined_se);
    let excesses: Vec<String> = r
        .perturbations
        .iter()
        .map(|x| format!("d{}{}: {:.5}±{:.5}", x.coordinate + 1, if x.sign > 0 { "+" } else { "−" }, x.excess, x.combined_se))
        .collect();
    verdict(ok && r.all_passed(), excesses.join(", "))
}

fn c7_special_functions() -> Verdict {
    let mut worst: f64 = 0.0;
    for nu in [1.0, 2.0, 5.0, 10.0, 37.0] {
        let m = chisq_log_moments(nu).unwrap();
        let (mean, var) = chisq_log_moments_by_quadrature(nu);
        worst = worst.max((m.mean_log - mean).abs()).max((m.var_log - var).abs());
    }
    verdict(worst <= 1e-8, format!("worst absolute error {worst:.2e}"))
}

fn c8_sampling() -> Verdict {
    let (p, n, draws) = (4usize, 12usize, 100_000usize);
    let factors = sharded_map(&RngStream::new(SEED, 80), draws, |r| sample_bartlett_factor(r, p, n))
        .unwrap();
    let crit = ks_critical(0.001, draws);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..p {
        let chi = ChiSquared::new((n - i) as f64).unwrap();
        let diag: Vec<f64> = factors.iter().map(|t| t[(i, i)].powi(2)).collect();
        worst = worst.max(ks_statistic(diag, |x| chi.cdf(x)));
        for j in 0..i {
            let off: Vec<f64> = factors.iter().map(|t| t[(i, j)]).collect();
            worst = worst.max(ks_statistic(off, |x| normal.cdf(x)));
        }
    }
    let ks_ok = worst < crit;

    let sigma = SpdMatrix::from_rows(&[
        vec![2.0, 0.3, 0.0, 0.5],
        vec![0.3, 1.0, 0.2, 0.0],
        vec![0.0, 0.2, 1.5, -0.4],
        vec![0.5, 0.0, -0.4, 3.0],
    ])
    .unwrap();
    let scatters = sharded_map(&RngStream::new(SEED, 81), draws, |r| Ok(sample_wishart(r, &sigma, n)?.scatter))
        .unwrap();
    let mut mean_ok = true;
    for i in 0..p {
        for j in 0..=i {
            let vals: Vec<f64> = scatters.iter().map(|a| a[(i, j)]).collect();
            mean_ok &= Summary::of(&vals).within(n as f64 * sigma[(i, j)], K);
        }
    }
    let dets: Vec<f64> = scatters.iter().map(|a| a.det()).collect();
    let want = sigma.det() * (0..p).map(|i| (n - i) as f64).product::<f64>();
    let det = Summary::of(&dets);
    let det_ok = det.within(want, K);
    verdict(
        ks_ok && mean_ok && det_ok,
        format!(
            "max KS {worst:.5} < {crit:.5}: {ks_ok}; entry means: {mean_ok}; det mean {:.1}±{:.1} vs {want:.1}",
            det.mean, det.se
        ),
    )
}

fn c9_det_product() -> Verdict {
    let mut failures = Vec::new();
    let mut count = 0;
    for p in [1usize, 2, 3, 5] {
        let mut ns = vec![p, p + 3, 2 * p];
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            let rng = RngStream::new(SEED, 900 + (100 * p + n) as u64);
            let r = det_product_check(p, n, 100_000, &rng).unwrap();
            count += 1;
            if !r.passed {
                failures.push(format!("({p},{n}): {:.4}±{:.4}", r.product.mean, r.product.se));
            }
        }
    }
    verdict(failures.is_empty(), format!("{count} grid points; failures {failures:?}"))
}

fn c10_asymptotics() -> Verdict {
    let start = Instant::now();
    let r = empirical_spectral_report(100, 400, 300, &RngStream::new(SEED, 100)).unwrap();
    let elapsed = start.elapsed();
    let mp = mp_geometric_mean(0.25).unwrap();
    let (hi, lo) = (1.5f64.powi(2).ln(), 0.5f64.powi(2).ln());
    let d_mean = (r.mean_log.mean - mp).abs();
    let d_max = (r.log_max.mean - hi).abs();
    let d_min = (r.log_min.mean - lo).abs();
    verdict(
        d_mean <= 0.02 && d_max <= 0.05 && d_min <= 0.05 && elapsed < Duration::from_secs(120),
        format!(
            "mean log {:.4} vs {mp:.4} (Δ {d_mean:.4}); log max {:.4} vs {hi:.4} (Δ {d_max:.4}); \
             log min {:.4} vs {lo:.4} (Δ {d_min:.4}); runtime {elapsed:?}",
            r.mean_log.mean, r.log_max.mean, r.log_min.mean
        ),
    )
}

fn c11_loss_invariance() -> Verdict {
    let mut rng = RngStream::new(SEED, 110);
    let mut worst: f64 = 0.0;
    let mut symmetric = true;
    let mut zero_iff_equal = true;
    for p in [2usize, 3, 5] {
        for _ in 0..20 {
            let phi = sample_wishart_identity(&mut rng, p, p + 3).unwrap().scatter;
            let sigma = sample_wishart_identity(&mut rng, p, p + 3).unwrap().scatter;
            let g = Matrix::from_fn(p, |_, _| sample_std_normal(&mut rng));
            let move_by = |a: &SpdMatrix| SpdMatrix::new(a.matrix().congruence_by(&g).unwrap()).unwrap();
            let (phi_g, sigma_g) = (move_by(&phi), move_by(&sigma));
            for loss in [stein_loss, geodesic_loss] {
                let before = loss(&phi, &sigma).unwrap();
                let after = loss(&phi_g, &sigma_g).unwrap();
                worst = worst.max((after - before).abs() / before.abs().max(1.0));
            }
            let (ab, ba) = (geodesic_loss(&phi, &sigma).unwrap(), geodesic_loss(&sigma, &phi).unwrap());
            symmetric &= (ab - ba).abs() <= 1e-8 * ab.max(1.0);
            zero_iff_equal &= ab > 0.0 && geodesic_loss(&phi, &phi).unwrap() < 1e-20;
        }
    }
    verdict(
        worst <= 1e-8 && symmetric && zero_iff_equal,
        format!("worst relative change {worst:.2e}; symmetric {symmetric}; zero iff equal {zero_iff_equal}"),
    )
}

fn c12_determinism() -> Verdict {
    let run = |workers: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_spdrisk"));
        cmd.args(["risk-table", "--p", "3", "--n", "10", "--replicates", "100000", "--seed", "7", "--format", "csv"]);
        if let Some(w) = workers {
            cmd.args(["--workers", w]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run(None);
    let b = run(None);
    let one = run(Some("1"));
    let four = run(Some("4"));
    verdict(
        a == b && a == one && a == four && !a.is_empty(),
        format!("{} bytes; two runs equal {}; workers 1 vs 4 equal {}", a.len(), a == b, one == four),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("analytic Stein-risk ordering", c1_analytic_ordering),
        ("MC vs analytic Stein risk", c2_mc_stein_risk),
        ("coordinate invariance of the geodesic minimum", c3_coordinate_invariance),
        ("geodesic gap identities", c4_gap_identities),
        ("rotation-equivariant geodesic vs Stein", c5_rot_eq_direction),
        ("local optimality of the geodesic multipliers", c6_local_optimality),
        ("chi-square log moments vs quadrature", c7_special_functions),
        ("Bartlett and Wishart sampling", c8_sampling),
        ("determinant product identity", c9_det_product),
        ("large-dimension spectrum references", c10_asymptotics),
        ("loss invariance", c11_loss_invariance),
        ("risk-table determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                verdict(false, format!("panicked: {msg}"))
            });
        let status = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status}: {name} [{:.1}s] {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
