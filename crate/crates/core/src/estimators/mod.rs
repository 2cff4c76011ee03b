//! The seven covariance estimators and the registry that selects them by name.
//!
//! Each estimator implements [`CovarianceEstimator`]. The two rotation-equivariant
//! estimators carry a [`SpectralCalibration`]; the others are stateless.
//! [`EstimatorRegistry::default`] registers all seven under their kebab-case names.

mod iwasawa;
mod spectral;
mod triangular;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SpdMatrix;
use crate::sampling::WishartSample;
use crate::special::chisq_log_moments;

pub use iwasawa::{geodesic_iwasawa, iwasawa_best, GeodesicIwasawa, IwasawaBest};
pub use spectral::{
    calibrate_spectrum, rot_eq_geodesic, rot_eq_stein, RotEqGeodesic, RotEqStein,
    SpectralCalibration, MIN_CALIBRATION_REPLICATES,
};
pub use triangular::{
    geodesic_cholesky, geodesic_cholesky_with, mle, stein_estimator, GeodesicCholesky, Mle,
    SteinTriangular,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Mle,
    Stein,
    IwasawaBest,
    GeodesicIwasawa,
    GeodesicCholesky,
    RotEqStein,
    RotEqGeodesic,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::Mle,
        EstimatorKind::Stein,
        EstimatorKind::IwasawaBest,
        EstimatorKind::GeodesicIwasawa,
        EstimatorKind::GeodesicCholesky,
        EstimatorKind::RotEqStein,
        EstimatorKind::RotEqGeodesic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Stein => "stein",
            EstimatorKind::IwasawaBest => "iwasawa-best",
            EstimatorKind::GeodesicIwasawa => "geodesic-iwasawa",
            EstimatorKind::GeodesicCholesky => "geodesic-cholesky",
            EstimatorKind::RotEqStein => "rot-eq-stein",
            EstimatorKind::RotEqGeodesic => "rot-eq-geodesic",
        }
    }

    pub fn needs_calibration(self) -> bool {
        matches!(self, EstimatorKind::RotEqStein | EstimatorKind::RotEqGeodesic)
    }

    /// Estimators that return the diagonal pivot matrix `Σ*` rather than `Σ`.
    pub fn estimates_pivots(self) -> bool {
        matches!(self, EstimatorKind::IwasawaBest | EstimatorKind::GeodesicIwasawa)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

pub trait CovarianceEstimator: Send + Sync {
    fn kind(&self) -> EstimatorKind;

    fn estimate(&self, sample: &WishartSample) -> Result<SpdMatrix>;
}

/// What a factory may need to build an estimator.
#[derive(Debug, Clone)]
pub struct EstimatorContext {
    pub p: usize,
    pub n: usize,
    pub calibration: Option<Arc<SpectralCalibration>>,
}

impl EstimatorContext {
    pub fn new(p: usize, n: usize) -> Self {
        Self {
            p,
            n,
            calibration: None,
        }
    }

    pub fn with_calibration(mut self, cal: Arc<SpectralCalibration>) -> Self {
        self.calibration = Some(cal);
        self
    }
}

pub type EstimatorFactory = fn(&EstimatorContext) -> Result<Box<dyn CovarianceEstimator>>;

struct Registration {
    name: &'static str,
    kind: EstimatorKind,
    factory: EstimatorFactory,
}

/// Name → factory table; iteration follows registration order.
pub struct EstimatorRegistry {
    entries: Vec<Registration>,
}

impl EstimatorRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Adds or replaces the factory registered under `name`.
    pub fn register(&mut self, name: &'static str, kind: EstimatorKind, factory: EstimatorFactory) {
        let reg = Registration {
            name,
            kind,
            factory,
        };
        match self.entries.iter_mut().find(|r| r.name == name) {
            Some(slot) => *slot = reg,
            None => self.entries.push(reg),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|r| r.name)
    }

    pub fn kind_of(&self, name: &str) -> Result<EstimatorKind> {
        self.entries
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.kind)
            .ok_or_else(|| Error::UnknownEstimator(name.to_string()))
    }

    pub fn build(&self, name: &str, ctx: &EstimatorContext) -> Result<Box<dyn CovarianceEstimator>> {
        let reg = self
            .entries
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownEstimator(name.to_string()))?;
        (reg.factory)(ctx)
    }

    pub fn build_kind(
        &self,
        kind: EstimatorKind,
        ctx: &EstimatorContext,
    ) -> Result<Box<dyn CovarianceEstimator>> {
        self.build(kind.name(), ctx)
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("mle", EstimatorKind::Mle, |_| Ok(Box::new(Mle)));
        reg.register("stein", EstimatorKind::Stein, |_| Ok(Box::new(SteinTriangular)));
        reg.register("iwasawa-best", EstimatorKind::IwasawaBest, |_| {
            Ok(Box::new(IwasawaBest))
        });
        reg.register("geodesic-iwasawa", EstimatorKind::GeodesicIwasawa, |_| {
            Ok(Box::new(GeodesicIwasawa))
        });
        reg.register("geodesic-cholesky", EstimatorKind::GeodesicCholesky, |_| {
            Ok(Box::new(GeodesicCholesky))
        });
        reg.register("rot-eq-stein", EstimatorKind::RotEqStein, |ctx| {
            Ok(Box::new(RotEqStein::new(calibration_for(ctx, EstimatorKind::RotEqStein)?)))
        });
        reg.register("rot-eq-geodesic", EstimatorKind::RotEqGeodesic, |ctx| {
            Ok(Box::new(RotEqGeodesic::new(calibration_for(
                ctx,
                EstimatorKind::RotEqGeodesic,
            )?)))
        });
        reg
    }
}

fn calibration_for(ctx: &EstimatorContext, kind: EstimatorKind) -> Result<Arc<SpectralCalibration>> {
    let cal = ctx
        .calibration
        .clone()
        .ok_or_else(|| Error::MissingCalibration(kind.name().to_string()))?;
    cal.check_matches(ctx.p, ctx.n)?;
    Ok(cal)
}

/// Stein's triangular divisors `n + p − 2i + 1`, `i = 1..p`.
pub fn stein_divisors(p: usize, n: usize) -> Vec<f64> {
    (1..=p).map(|i| (n + p + 1 - 2 * i) as f64).collect()
}

/// Pivot divisors `n − i + 1`, `i = 1..p`.
pub fn pivot_divisors(p: usize, n: usize) -> Vec<f64> {
    (1..=p).map(|i| (n + 1 - i) as f64).collect()
}

/// `exp{−E[log χ²_{n−i+1}]}`, `i = 1..p`: the multipliers that center each log pivot.
pub fn geodesic_pivot_multipliers(p: usize, n: usize) -> Result<Vec<f64>> {
    if n < p {
        return Err(Error::domain(format!("n = {n} must be at least p = {p}")));
    }
    (1..=p)
        .map(|i| Ok((-chisq_log_moments((n + 1 - i) as f64)?.mean_log).exp()))
        .collect()
}
