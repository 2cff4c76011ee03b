//! Rotation-equivariant estimators `U D L U′`: keep the sample eigenvectors,
//! rescale the sorted eigenvalues.
//!
//! The expectations `E[l_i]` and `E[log l_i]` of the ordered Wishart
//! eigenvalues have no closed form, so both estimators read their multipliers
//! from a Monte Carlo [`SpectralCalibration`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigh, SpdMatrix};
use crate::montecarlo::{sharded_map, Summary};
use crate::sampling::{sample_wishart_identity, RngStream, WishartSample};

use super::{CovarianceEstimator, EstimatorKind};

pub const MIN_CALIBRATION_REPLICATES: usize = 10_000;

/// Monte Carlo means of the sorted eigenvalues of `W(I, n)` and of their logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCalibration {
    pub p: usize,
    pub n: usize,
    pub mean_log_eigs: Vec<f64>,
    pub mean_eigs: Vec<f64>,
    pub se_log_eigs: Vec<f64>,
    pub se_eigs: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl SpectralCalibration {
    pub fn check_matches(&self, p: usize, n: usize) -> Result<()> {
        if self.p != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: self.p,
            });
        }
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            });
        }
        Ok(())
    }

    /// `exp{−E[log l_i]}`.
    pub fn geodesic_multipliers(&self) -> Vec<f64> {
        self.mean_log_eigs.iter().map(|m| (-m).exp()).collect()
    }

    /// `1 / E[l_i]`.
    pub fn stein_multipliers(&self) -> Vec<f64> {
        self.mean_eigs.iter().map(|m| 1.0 / m).collect()
    }

    /// `Σ (log E[l_i] − E[log l_i])²`, the geodesic-risk gap between the two
    /// rotation-equivariant estimators.
    pub fn geodesic_gap(&self) -> f64 {
        self.mean_eigs
            .iter()
            .zip(&self.mean_log_eigs)
            .map(|(m, ml)| (m.ln() - ml).powi(2))
            .sum()
    }
}

/// Estimates `E[l_i]` and `E[log l_i]` under `W(I, n)` from `replicates` draws.
pub fn calibrate_spectrum(
    p: usize,
    n: usize,
    replicates: usize,
    rng: &RngStream,
) -> Result<SpectralCalibration> {
    if replicates < MIN_CALIBRATION_REPLICATES {
        return Err(Error::domain(format!(
            "calibration needs at least {MIN_CALIBRATION_REPLICATES} replicates, got {replicates}"
        )));
    }
    if p == 0 || n < p {
        return Err(Error::domain(format!("need n ≥ p ≥ 1, got p = {p}, n = {n}")));
    }
    let spectra = sharded_map(rng, replicates, |r| {
        let s = sample_wishart_identity(r, p, n)?;
        Ok(eigh(&s.scatter)?.eigenvalues)
    })?;
    let mut mean_eigs = Vec::with_capacity(p);
    let mut se_eigs = Vec::with_capacity(p);
    let mut mean_log_eigs = Vec::with_capacity(p);
    let mut se_log_eigs = Vec::with_capacity(p);
    for i in 0..p {
        let vals: Vec<f64> = spectra.iter().map(|l| l[i]).collect();
        let logs: Vec<f64> = vals.iter().map(|l| l.ln()).collect();
        let s = Summary::of(&vals);
        let sl = Summary::of(&logs);
        mean_eigs.push(s.mean);
        se_eigs.push(s.se);
        mean_log_eigs.push(sl.mean);
        se_log_eigs.push(sl.se);
    }
    Ok(SpectralCalibration {
        p,
        n,
        mean_log_eigs,
        mean_eigs,
        se_log_eigs,
        se_eigs,
        replicates,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}

fn rescale_spectrum(sample: &WishartSample, cal: &SpectralCalibration, mult: &[f64]) -> Result<SpdMatrix> {
    cal.check_matches(sample.p(), sample.n)?;
    let eig = eigh(&sample.scatter)?;
    let values: Vec<f64> = eig.eigenvalues.iter().zip(mult).map(|(l, d)| l * d).collect();
    SpdMatrix::new(eig.recompose(&values)?)
}

/// `U diag(exp{−E[log l_i]} l_i) U′`.
pub fn rot_eq_geodesic(sample: &WishartSample, cal: &SpectralCalibration) -> Result<SpdMatrix> {
    rescale_spectrum(sample, cal, &cal.geodesic_multipliers())
}

/// `U diag(l_i / E[l_i]) U′`.
pub fn rot_eq_stein(sample: &WishartSample, cal: &SpectralCalibration) -> Result<SpdMatrix> {
    rescale_spectrum(sample, cal, &cal.stein_multipliers())
}

#[derive(Debug, Clone)]
pub struct RotEqGeodesic {
    cal: Arc<SpectralCalibration>,
}

impl RotEqGeodesic {
    pub fn new(cal: Arc<SpectralCalibration>) -> Self {
        Self { cal }
    }
}

impl CovarianceEstimator for RotEqGeodesic {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::RotEqGeodesic
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        rot_eq_geodesic(sample, &self.cal)
    }
}

#[derive(Debug, Clone)]
pub struct RotEqStein {
    cal: Arc<SpectralCalibration>,
}

impl RotEqStein {
    pub fn new(cal: Arc<SpectralCalibration>) -> Self {
        Self { cal }
    }
}

impl CovarianceEstimator for RotEqStein {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::RotEqStein
    }

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix> {
        rot_eq_stein(sample, &self.cal)
    }
}
