//! Estimators of the pivot matrix `Σ* = Diag(σ_(1)11, …, σ_(p)11)` from the
//! full Iwasawa reduction of `A`. Outputs are diagonal and live in starred
//! coordinates.

use crate::error::Result;
use crate::matrix::{iwasawa_full, SpdMatrix};
use crate::sampling::WishartSample;

use super::{geodesic_pivot_multipliers, pivot_divisors, CovarianceEstimator, EstimatorKind};

/// `Diag(a_(i)11 / (n − i + 1))`.
pub fn iwasawa_best(sample: &WishartSample) -> Result<SpdMatrix> {
    let pivots = iwasawa_full(&sample.scatter)?.pivots;
    let d = pivot_divisors(sample.p(), sample.n);
    let diag: Vec<f64> = pivots.iter().zip(&d).map(|(a, d)| a / d).collect();
    SpdMatrix::from_diagonal(&diag)
}

/// `Diag(exp{−E[log χ²_{n−i+1}]} · a_(i)11)`.
pub fn geodesic_iwasawa(sample: &WishartSample) -> Result<SpdMatrix> {
    let pivots = iwasawa_full(&sample.scatter)?.pivots;
    let mult = geodesic_pivot_multipliers(sample.p(), sample.n)?;
    let diag: Vec<f64> = pivots.iter().zip(&mult).map(|(a, m)| a * m).collect();
    SpdMatrix::from_diagonal(&diag)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IwasawaBest;

impl CovarianceEstimator for IwasawaBest {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::IwasawaBest
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        iwasawa_best(sample)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeodesicIwasawa;

impl CovarianceEstimator for GeodesicIwasawa {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::GeodesicIwasawa
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        geodesic_iwasawa(sample)
    }
}
