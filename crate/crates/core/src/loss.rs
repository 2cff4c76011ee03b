//! Stein's likelihood loss and the squared affine-invariant geodesic distance.
//!
//! Both losses are functions of the eigenvalues `λ_i` of `Σ⁻¹φ` only, which is
//! what makes them invariant under `(φ, Σ) ↦ (gφg′, gΣg′)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{generalized_eigenvalues, SpdMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Stein,
    Geodesic,
}

impl LossKind {
    pub const ALL: [LossKind; 2] = [LossKind::Stein, LossKind::Geodesic];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Stein => "stein",
            LossKind::Geodesic => "geodesic",
        }
    }

    pub fn evaluate(self, estimate: &SpdMatrix, sigma: &SpdMatrix) -> Result<f64> {
        match self {
            LossKind::Stein => stein_loss(estimate, sigma),
            LossKind::Geodesic => geodesic_loss(estimate, sigma),
        }
    }

    /// Loss as a function of the eigenvalues of `Σ⁻¹φ`.
    pub fn from_eigenvalues(self, lambdas: &[f64]) -> f64 {
        match self {
            LossKind::Stein => lambdas.iter().map(|&l| l - l.ln() - 1.0).sum(),
            LossKind::Geodesic => lambdas.iter().map(|&l| l.ln().powi(2)).sum(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stein" => Ok(LossKind::Stein),
            "geodesic" => Ok(LossKind::Geodesic),
            other => Err(Error::domain(format!("unknown loss {other:?}"))),
        }
    }
}

/// `tr Σ⁻¹φ − log det Σ⁻¹φ − p`.
pub fn stein_loss(estimate: &SpdMatrix, sigma: &SpdMatrix) -> Result<f64> {
    let lambdas = generalized_eigenvalues(sigma, estimate)?;
    Ok(LossKind::Stein.from_eigenvalues(&lambdas))
}

/// `Σ log² λ_i`, the squared geodesic distance between `estimate` and `sigma`.
/// The distance itself is the square root of this value.
pub fn geodesic_loss(estimate: &SpdMatrix, sigma: &SpdMatrix) -> Result<f64> {
    let lambdas = generalized_eigenvalues(sigma, estimate)?;
    Ok(LossKind::Geodesic.from_eigenvalues(&lambdas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{congruence, Matrix};
    use proptest::prelude::*;

    fn spd_from(seed: &[f64], p: usize) -> SpdMatrix {
        // B B′ + p·I from a seed vector
        let b = Matrix::from_fn(p, |i, j| seed[(i * p + j) % seed.len()]);
        let mut m = b.matmul(&b.transpose()).unwrap();
        for i in 0..p {
            m[(i, i)] += 0.5;
        }
        SpdMatrix::new(m).unwrap()
    }

    #[test]
    fn zero_at_truth() {
        let s = SpdMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        assert!(stein_loss(&s, &s).unwrap().abs() < 1e-14);
        assert!(geodesic_loss(&s, &s).unwrap().abs() < 1e-14);
    }

    #[test]
    fn scalar_stein() {
        let e = SpdMatrix::from_diagonal(&[2.0]).unwrap();
        let s = SpdMatrix::identity(1);
        let want = 2.0 - 2f64.ln() - 1.0;
        assert!((stein_loss(&e, &s).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn geodesic_of_exp_diagonal() {
        let e = SpdMatrix::from_diagonal(&[2f64.exp(), (-2f64).exp()]).unwrap();
        let got = geodesic_loss(&e, &SpdMatrix::identity(2)).unwrap();
        assert!((got - 8.0).abs() < 1e-13);
    }

    #[test]
    fn geodesic_scale_behaviour() {
        for p in 1..=5 {
            let s = spd_from(&[0.3, -1.2, 0.7, 2.0, 0.1, -0.4], p);
            for c in [1f64.exp(), 2f64.exp()] {
                let got = geodesic_loss(&s.scale(c).unwrap(), &s).unwrap();
                let want = p as f64 * c.ln().powi(2);
                assert!((got - want).abs() < 1e-10 * want, "p={p} c={c}");
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("stein".parse::<LossKind>().unwrap(), LossKind::Stein);
        assert_eq!("geodesic".parse::<LossKind>().unwrap(), LossKind::Geodesic);
        assert!("quadratic".parse::<LossKind>().is_err());
    }

    proptest! {
        #[test]
        fn invariance_and_symmetry(
            a in proptest::collection::vec(-2.0f64..2.0, 9),
            b in proptest::collection::vec(-2.0f64..2.0, 9),
            g in proptest::collection::vec(-2.0f64..2.0, 9),
        ) {
            let e = spd_from(&a, 3);
            let s = spd_from(&b, 3);
            let mut gm = Matrix::from_fn(3, |i, j| g[i * 3 + j]);
            for i in 0..3 { gm[(i, i)] += 3.0; } // keep g comfortably invertible
            let ge = congruence(&e, &gm).unwrap();
            let gs = congruence(&s, &gm).unwrap();
            for kind in LossKind::ALL {
                let base = kind.evaluate(&e, &s).unwrap();
                let moved = kind.evaluate(&ge, &gs).unwrap();
                prop_assert!(base >= 0.0);
                prop_assert!((base - moved).abs() <= 1e-8 * base.max(1.0));
            }
            let fwd = geodesic_loss(&e, &s).unwrap();
            let back = geodesic_loss(&s, &e).unwrap();
            prop_assert!((fwd - back).abs() <= 1e-9 * fwd.max(1.0));
        }
    }
}
