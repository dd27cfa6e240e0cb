use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::HypothesisMatrix;

/// Orthogonal change of predictor basis `X̃ = XD` after which
/// `H0: CB = 0` reads `[I_r, 0] B̃ = 0` with `B̃ = DᵀB`.
#[derive(Debug, Clone)]
pub struct ConditionalTransform {
    /// p×p orthogonal; the first `r` columns span the row space of `C`.
    pub d: DMatrix<f64>,
    pub r: usize,
}

impl ConditionalTransform {
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.d.nrows() {
            return Err(Error::domain(format!(
                "X has {} columns, transform expects {}",
                x.ncols(),
                self.d.nrows()
            )));
        }
        Ok(x * &self.d)
    }
}

fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    v
}

/// Builds `D = [Q1, Q2]` where `Q1` is an orthonormal basis of the row
/// space of `C` and `Q2` completes it greedily from the standard basis, so
/// `C = [I_r, 0]` gives `D = I_p`.
pub fn conditional_transform(
    x: &DMatrix<f64>,
    c: &HypothesisMatrix,
) -> Result<(DMatrix<f64>, ConditionalTransform)> {
    let t = transform_for(c)?;
    Ok((t.apply(x)?, t))
}

pub(crate) fn transform_for(c: &HypothesisMatrix) -> Result<ConditionalTransform> {
    let (r, p) = (c.r(), c.p());
    let q1 = c.matrix().transpose().qr().q();
    let mut basis: Vec<DVector<f64>> = (0..r)
        .map(|k| fix_sign(q1.column(k).into_owned()))
        .collect();
    let mut used = vec![false; p];
    while basis.len() < p {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (i, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut v = DVector::zeros(p);
            v[i] = 1.0;
            // two passes of Gram-Schmidt keep the basis orthogonal to
            // working precision
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dot(&v);
                    v.axpy(-proj, b, 1.0);
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(_, _, n)| norm > *n + 1e-12) {
                best = Some((i, v, norm));
            }
        }
        let (i, v, norm) = best.expect("an unused standard basis vector remains");
        if norm < 1e-8 {
            return Err(Error::HypothesisRank {
                expected: r,
                found: basis.len(),
            });
        }
        used[i] = true;
        basis.push(fix_sign(v / norm));
    }
    Ok(ConditionalTransform {
        d: DMatrix::from_columns(&basis),
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::fill_std_normal;
    use crate::rng::stream;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        fill_std_normal(&mut stream(seed), &mut m);
        m
    }

    #[test]
    fn leading_contrast_is_identity() {
        let x = random(10, 5, 1);
        let (xt, t) = conditional_transform(&x, &HypothesisMatrix::leading(2, 5).unwrap()).unwrap();
        assert!((t.d - DMatrix::<f64>::identity(5, 5)).amax() < 1e-15);
        assert!((xt - x).amax() < 1e-15);
    }

    #[test]
    fn full_rank_contrast_protects_everything() {
        let c = HypothesisMatrix::new(random(4, 4, 2)).unwrap();
        let t = transform_for(&c).unwrap();
        assert_eq!(t.r, 4);
        assert!((t.d.tr_mul(&t.d) - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn random_contrast_vanishes_on_complement() {
        for seed in 0..20 {
            let c = HypothesisMatrix::new(random(2, 6, 100 + seed)).unwrap();
            let t = transform_for(&c).unwrap();
            assert!((t.d.tr_mul(&t.d) - DMatrix::<f64>::identity(6, 6)).amax() < 1e-12);
            let cd = c.matrix() * &t.d;
            assert!(cd.columns(2, 4).amax() < 1e-10);
            // the leading block stays invertible
            assert!(cd.columns(0, 2).into_owned().determinant().abs() > 1e-8);
        }
    }

    #[test]
    fn hypothesis_is_preserved() {
        // CB = 0 iff the first r rows of DᵀB vanish
        let c = HypothesisMatrix::new(random(2, 5, 3)).unwrap();
        let t = transform_for(&c).unwrap();
        let mut b = random(5, 3, 4);
        let proj = c.matrix().transpose()
            * (c.matrix() * c.matrix().transpose()).try_inverse().unwrap()
            * c.matrix();
        b -= &proj * &b;
        assert!((c.matrix() * &b).amax() < 1e-10);
        assert!((t.d.transpose() * &b).rows(0, 2).amax() < 1e-10);
    }
}
