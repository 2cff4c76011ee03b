//! Seeded random generation: normals, chi-squares and Wishart matrices built
//! from their Bartlett factor.
//!
//! Every draw comes from an [`RngStream`], a ChaCha8 generator addressed by
//! `(seed, stream_id)`. ChaCha exposes a 64-bit stream selector, so child
//! streams for parallel shards are independent and do not depend on how
//! many workers consume them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{cholesky, LowerTriangular, Matrix, SpdMatrix};

/// A reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Deterministic child stream `index`, independent of this stream's position.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ splitmix64(self.stream_id)), index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal draw (ziggurat).
pub fn sample_std_normal(rng: &mut RngStream) -> f64 {
    rng.sample(StandardNormal)
}

/// Chi-square draw with `dof` degrees of freedom, as Gamma(dof/2, 2).
pub fn sample_chisq(rng: &mut RngStream, dof: f64) -> Result<f64> {
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::domain(format!(
            "chi-square degrees of freedom must be positive, got {dof}"
        )));
    }
    let gamma = Gamma::new(0.5 * dof, 2.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok(gamma.sample(rng))
}

/// A Wishart matrix together with its Cholesky (Bartlett) factor.
#[derive(Debug, Clone, Serialize)]
pub struct WishartSample {
    pub scatter: SpdMatrix,
    pub bartlett_factor: LowerTriangular,
    pub n: usize,
}

impl WishartSample {
    /// Wraps an observed scatter matrix `A` with `n` degrees of freedom.
    pub fn from_scatter(scatter: SpdMatrix, n: usize) -> Result<Self> {
        check_dof(scatter.dim(), n)?;
        let bartlett_factor = cholesky(&scatter)?;
        Ok(Self {
            scatter,
            bartlett_factor,
            n,
        })
    }

    fn from_factor(factor: LowerTriangular, n: usize) -> Result<Self> {
        let scatter = factor.gram_spd()?;
        Ok(Self {
            scatter,
            bartlett_factor: factor,
            n,
        })
    }

    pub fn p(&self) -> usize {
        self.scatter.dim()
    }
}

fn check_dof(p: usize, n: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if n < p {
        return Err(Error::domain(format!(
            "degrees of freedom n = {n} must be at least p = {p}"
        )));
    }
    Ok(())
}

/// Draws the Bartlett factor of `W(I, n)`: `t_ii² ~ χ²_{n−i+1}`, `t_ij ~ N(0, 1)` below the diagonal.
///
/// Row `i` consumes its `i` normals first, then the diagonal chi-square.
pub fn sample_bartlett_factor(rng: &mut RngStream, p: usize, n: usize) -> Result<LowerTriangular> {
    check_dof(p, n)?;
    let mut t = Matrix::zeros(p);
    for i in 0..p {
        for j in 0..i {
            t[(i, j)] = sample_std_normal(rng);
        }
        let mut diag = sample_chisq(rng, (n - i) as f64)?.sqrt();
        // Gamma can underflow to exactly zero for tiny shapes; resample in that case.
        while !(diag > 0.0) {
            diag = sample_chisq(rng, (n - i) as f64)?.sqrt();
        }
        t[(i, i)] = diag;
    }
    Ok(LowerTriangular::from_trusted(t))
}

/// `A ~ W(I, n)` with its factor.
pub fn sample_wishart_identity(rng: &mut RngStream, p: usize, n: usize) -> Result<WishartSample> {
    let t = sample_bartlett_factor(rng, p, n)?;
    WishartSample::from_factor(t, n)
}

/// `A ~ W(Σ, n)`, built as `L T T′ L′` with `Σ = L L′`.
pub fn sample_wishart(rng: &mut RngStream, sigma: &SpdMatrix, n: usize) -> Result<WishartSample> {
    let l = cholesky(sigma)?;
    let t = sample_bartlett_factor(rng, sigma.dim(), n)?;
    WishartSample::from_factor(l.mul(&t), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::iwasawa_full;
    use crate::special::chisq_log_moments;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn seed_replays_exactly() {
        let a = sample_std_normal(&mut RngStream::new(42, 0));
        let b = sample_std_normal(&mut RngStream::new(42, 0));
        assert_eq!(a.to_bits(), b.to_bits());
        let c = sample_std_normal(&mut RngStream::new(42, 1));
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn children_are_distinct_and_stable() {
        let root = RngStream::new(9, 3);
        let mut a = root.child(0);
        let mut b = root.child(1);
        let mut a2 = RngStream::new(9, 3).child(0);
        let xa = a.next_u64();
        assert_eq!(xa, a2.next_u64());
        assert_ne!(xa, b.next_u64());
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_std_normal(&mut rng)).collect();
        let (m, _) = mean_se(&xs);
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
        assert!(m.abs() < 0.004, "mean {m}");
        assert!((0.994..1.006).contains(&var), "var {var}");
    }

    #[test]
    fn chisq_mean_and_log_mean() {
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_chisq(&mut rng, 5.0).unwrap())
            .collect();
        let (m, _) = mean_se(&xs);
        assert!((m - 5.0).abs() < 4.0 * (10.0f64 / 1e6).sqrt());

        let logs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_chisq(&mut rng, 10.0).unwrap().ln())
            .collect();
        let (m, se) = mean_se(&logs);
        assert!((m - chisq_log_moments(10.0).unwrap().mean_log).abs() < 4.0 * se);
    }

    #[test]
    fn chisq_domain() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(sample_chisq(&mut rng, 0.0), Err(Error::Domain(_))));
        assert!(sample_chisq(&mut rng, 0.3).unwrap() >= 0.0);
    }

    #[test]
    fn one_dimensional_wishart_is_chisq() {
        let s = sample_wishart_identity(&mut RngStream::new(5, 0), 1, 8).unwrap();
        let mut rng = RngStream::new(5, 0);
        let x = sample_chisq(&mut rng, 8.0).unwrap();
        assert!((s.scatter[(0, 0)] - x).abs() < 1e-12 * x);
    }

    #[test]
    fn wishart_rejects_small_n() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_wishart_identity(&mut rng, 3, 2).is_err());
    }

    #[test]
    fn factor_reproduces_scatter() {
        let mut rng = RngStream::new(11, 0);
        let sigma = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        for _ in 0..100 {
            let s = sample_wishart(&mut rng, &sigma, 4).unwrap();
            let rebuilt = s.bartlett_factor.gram();
            let scale = s.scatter.matrix().frobenius_norm();
            assert!(rebuilt.max_abs_diff(s.scatter.matrix()) <= 1e-12 * scale);
        }
    }

    #[test]
    fn identity_sigma_matches_identity_sampler() {
        let a = sample_wishart(&mut RngStream::new(3, 0), &SpdMatrix::identity(3), 7).unwrap();
        let b = sample_wishart_identity(&mut RngStream::new(3, 0), 3, 7).unwrap();
        assert_eq!(a.scatter, b.scatter);
    }

    #[test]
    fn wishart_mean_and_det_mean() {
        let mut rng = RngStream::new(17, 0);
        let reps = 100_000;
        let mut entries = vec![Vec::with_capacity(reps); 9];
        for _ in 0..reps {
            let s = sample_wishart_identity(&mut rng, 3, 10).unwrap();
            for (k, e) in entries.iter_mut().enumerate() {
                e.push(s.scatter[(k / 3, k % 3)]);
            }
        }
        for (k, e) in entries.iter().enumerate() {
            let (m, se) = mean_se(e);
            let want = if k / 3 == k % 3 { 10.0 } else { 0.0 };
            assert!((m - want).abs() < 4.0 * se, "entry {k}: {m} ± {se}");
        }

        let dets: Vec<f64> = (0..reps)
            .map(|_| sample_wishart_identity(&mut rng, 2, 6).unwrap().scatter.det())
            .collect();
        let (m, se) = mean_se(&dets);
        assert!((m - 30.0).abs() < 4.0 * se, "det mean {m} ± {se}");
    }

    #[test]
    fn wishart_mean_general_sigma_and_pivots() {
        let sigma = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let sigma_pivots = iwasawa_full(&sigma).unwrap().pivots;
        let mut rng = RngStream::new(23, 0);
        let reps = 100_000;
        let mut a = vec![Vec::with_capacity(reps); 4];
        let mut ratios = vec![Vec::with_capacity(reps); 2];
        for _ in 0..reps {
            let s = sample_wishart(&mut rng, &sigma, 12).unwrap();
            for (k, e) in a.iter_mut().enumerate() {
                e.push(s.scatter[(k / 2, k % 2)]);
            }
            let piv = iwasawa_full(&s.scatter).unwrap().pivots;
            for i in 0..2 {
                ratios[i].push(piv[i] / sigma_pivots[i]);
            }
        }
        for (k, e) in a.iter().enumerate() {
            let (m, se) = mean_se(e);
            let want = 12.0 * sigma[(k / 2, k % 2)];
            assert!((m - want).abs() < 4.0 * se, "entry {k}: {m} vs {want}");
        }
        for (i, r) in ratios.iter().enumerate() {
            let (m, se) = mean_se(r);
            assert!((m - (12 - i) as f64).abs() < 4.0 * se, "pivot {i}: {m}");
        }
    }
}
