//! Estimators built on the Cholesky (Bartlett) factor `A = T T′`.

use crate::error::Result;
use crate::matrix::{LowerTriangular, Matrix, SpdMatrix};
use crate::sampling::WishartSample;

use super::{geodesic_pivot_multipliers, stein_divisors, CovarianceEstimator, EstimatorKind};

/// `A / n`.
pub fn mle(sample: &WishartSample) -> Result<SpdMatrix> {
    sample.scatter.scale(1.0 / sample.n as f64)
}

/// `T diag(1/(n+p−2i+1)) T′`.
pub fn stein_estimator(sample: &WishartSample) -> Result<SpdMatrix> {
    let d: Vec<f64> = stein_divisors(sample.p(), sample.n)
        .into_iter()
        .map(|d| 1.0 / d)
        .collect();
    SpdMatrix::new(t_diag_tt(&sample.bartlett_factor, &d))
}

/// `T₀ T₀′` where `T₀` is `T` with each diagonal entry multiplied by
/// `√exp{−E[log χ²_{n−i+1}]}`.
pub fn geodesic_cholesky(sample: &WishartSample) -> Result<SpdMatrix> {
    let mult = geodesic_pivot_multipliers(sample.p(), sample.n)?;
    geodesic_cholesky_with(sample, &mult)
}

/// Cholesky-coordinate estimator with arbitrary pivot multipliers `d_i`:
/// `t₀_ii² = d_i t_ii²`, strict lower part of `T` unchanged.
pub fn geodesic_cholesky_with(sample: &WishartSample, multipliers: &[f64]) -> Result<SpdMatrix> {
    let root: Vec<f64> = multipliers.iter().map(|d| d.sqrt()).collect();
    sample.bartlett_factor.with_scaled_diagonal(&root)?.gram_spd()
}

fn t_diag_tt(t: &LowerTriangular, d: &[f64]) -> Matrix {
    let p = t.dim();
    let mut out = Matrix::zeros(p);
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = (0..=j).map(|k| t[(i, k)] * d[k] * t[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Mle;

impl CovarianceEstimator for Mle {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Mle
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        mle(sample)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SteinTriangular;

impl CovarianceEstimator for SteinTriangular {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Stein
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        stein_estimator(sample)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeodesicCholesky;

impl CovarianceEstimator for GeodesicCholesky {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::GeodesicCholesky
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        geodesic_cholesky(sample)
    }
}
