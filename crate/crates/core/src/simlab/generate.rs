use nalgebra::DMatrix;
use rand_distr::{Distribution, StudentT};

use super::spec::{Noise, Signal};
use crate::dist::fill_std_normal;
use crate::error::{Error, Result};
use crate::model::linalg::cholesky;
use crate::model::{DataSet, Dims};
use crate::rng::Stream;

/// `(ρ^|i-j|)`, k×k.
pub fn ar1_covariance(k: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| rho.powi(i.abs_diff(j) as i32))
}

fn cut(z: f64) -> f64 {
    match z {
        z if z < -1.0 => -3.0,
        z if z < -0.4 => -2.0,
        z if z < 0.0 => -1.0,
        z if z < 0.4 => 1.0,
        z if z < 1.0 => 2.0,
        _ => 3.0,
    }
}

/// Draws `Y = XB + E` with AR(1) row covariances, reusing the Cholesky
/// factors across replicates.
#[derive(Debug, Clone)]
pub struct LinearSampler {
    pub dims: Dims,
    pub signal: Signal,
    pub noise: Noise,
    /// Transposed Cholesky factors; `None` stands for the identity.
    lx_t: Option<DMatrix<f64>>,
    le_t: Option<DMatrix<f64>>,
}

impl LinearSampler {
    pub fn new(dims: Dims, signal: Signal, rho: f64, noise: Noise) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!(
                "AR(1) correlation must lie in [0, 1), got {rho}"
            )));
        }
        let factor = |k: usize| -> Result<Option<DMatrix<f64>>> {
            if rho == 0.0 {
                return Ok(None);
            }
            let c = cholesky(&ar1_covariance(k, rho))
                .ok_or_else(|| Error::Numerical("AR(1) covariance factorization failed".into()))?;
            Ok(Some(c.l().transpose()))
        };
        Ok(LinearSampler {
            dims,
            signal,
            noise,
            lx_t: factor(dims.p)?,
            le_t: factor(dims.m)?,
        })
    }

    fn correlate(z: DMatrix<f64>, l_t: &Option<DMatrix<f64>>) -> DMatrix<f64> {
        match l_t {
            Some(l) => z * l,
            None => z,
        }
    }

    pub fn sample(&self, rng: &mut Stream) -> Result<DataSet> {
        let Dims { n, p, m, .. } = self.dims;
        let mut z = DMatrix::zeros(n, p);
        fill_std_normal(rng, &mut z);
        let mut x = Self::correlate(z, &self.lx_t);
        if self.noise == Noise::Multinomial {
            x.apply(|v| *v = cut(*v));
        }
        let b = self.signal.matrix(p, m, rng);
        let mut e = DMatrix::zeros(n, m);
        match self.noise {
            Noise::StudentT(df) => {
                let t = StudentT::new(df).map_err(|e| Error::domain(e.to_string()))?;
                e.apply(|v| *v = t.sample(rng));
            }
            _ => fill_std_normal(rng, &mut e),
        }
        let mut y = &x * b + Self::correlate(e, &self.le_t);
        if self.noise == Noise::Multinomial {
            y.apply(|v| *v = cut(*v));
        }
        DataSet::new(x, y)
    }
}

/// One draw of the linear model; see [`LinearSampler`] for repeated draws.
pub fn gen_linear_model(
    rng: &mut Stream,
    dims: Dims,
    signal: &Signal,
    rho: f64,
    noise: Noise,
) -> Result<DataSet> {
    LinearSampler::new(dims, signal.clone(), rho, noise)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn sample_corr(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
        let n = x.nrows() as f64;
        let (ca, cb) = (x.column(a), x.column(b));
        let (ma, mb) = (ca.sum() / n, cb.sum() / n);
        let cov: f64 = ca
            .iter()
            .zip(cb.iter())
            .map(|(u, v)| (u - ma) * (v - mb))
            .sum();
        let va: f64 = ca.iter().map(|u| (u - ma).powi(2)).sum();
        let vb: f64 = cb.iter().map(|v| (v - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn identity_covariance() {
        let dims = Dims::new(10_000, 5, 2, 2).unwrap();
        let d =
            gen_linear_model(&mut stream(1), dims, &Signal::Null, 0.0, Noise::Gaussian).unwrap();
        let n = 10_000f64;
        let cov = d.x.tr_mul(&d.x) / n;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(cov[(i, j)].abs() < 4.0 / n.sqrt(), "{}", cov[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn ar1_correlation() {
        let dims = Dims::new(10_000, 4, 3, 2).unwrap();
        let d =
            gen_linear_model(&mut stream(2), dims, &Signal::Null, 0.7, Noise::Gaussian).unwrap();
        assert!((sample_corr(&d.x, 0, 1) - 0.7).abs() < 0.02);
        assert!((sample_corr(&d.x, 0, 2) - 0.49).abs() < 0.03);
        assert!((sample_corr(&d.y, 1, 2) - 0.7).abs() < 0.02);
    }

    #[test]
    fn null_signal_leaves_only_noise() {
        let dims = Dims::new(50, 4, 2, 2).unwrap();
        let d = gen_linear_model(
            &mut stream(3),
            dims,
            &Signal::Diagonal { rk: 2, value: 0.0 },
            0.3,
            Noise::Gaussian,
        )
        .unwrap();
        let mut rng = stream(3);
        let mut z = DMatrix::zeros(50, 4);
        fill_std_normal(&mut rng, &mut z);
        let mut e = DMatrix::zeros(50, 2);
        fill_std_normal(&mut rng, &mut e);
        let l = cholesky(&ar1_covariance(2, 0.3)).unwrap().l();
        assert!((d.y - e * l.transpose()).amax() < 1e-12);
    }

    #[test]
    fn multinomial_levels() {
        let dims = Dims::new(200, 6, 3, 2).unwrap();
        let d = gen_linear_model(
            &mut stream(4),
            dims,
            &Signal::Diagonal { rk: 2, value: 1.0 },
            0.0,
            Noise::Multinomial,
        )
        .unwrap();
        let levels = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
        assert!(d.x.iter().chain(d.y.iter()).all(|v| levels.contains(v)));
        assert_eq!(
            [cut(-1.0), cut(-0.4), cut(0.0), cut(0.4), cut(1.0)],
            [-2.0, -1.0, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn student_noise_is_heavier() {
        let dims = Dims::new(20_000, 1, 1, 1).unwrap();
        let d = gen_linear_model(
            &mut stream(5),
            dims,
            &Signal::Null,
            0.0,
            Noise::StudentT(5.0),
        )
        .unwrap();
        let var = d.y.iter().map(|v| v * v).sum::<f64>() / 20_000.0;
        // Var t_5 = 5/3
        assert!((var - 5.0 / 3.0).abs() < 0.15, "{var}");
    }
}
