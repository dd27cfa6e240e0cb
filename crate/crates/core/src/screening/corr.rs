use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::linalg::{center_columns, RANK_TOL};

/// Below this relative size a centered predictor counts as constant.
const CONSTANT_TOL: f64 = 1e-12;

/// Orthonormal basis of the column space of the centered responses.
#[derive(Debug, Clone)]
pub struct ResponseBasis {
    u: DMatrix<f64>,
}

impl ResponseBasis {
    pub fn new(y: &DMatrix<f64>) -> Result<Self> {
        if y.nrows() < 2 {
            return Err(Error::domain(
                "canonical correlation needs at least two rows",
            ));
        }
        let centered = center_columns(y);
        let svd = centered.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| max > 0.0 && svd.singular_values[i] > RANK_TOL * max)
            .collect();
        if keep.is_empty() {
            return Err(Error::domain("centered responses have rank zero"));
        }
        Ok(ResponseBasis {
            u: u.select_columns(&keep),
        })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// Scores every column of `x` at once.
    pub fn scores(&self, x: &DMatrix<f64>) -> Result<Vec<Correlation>> {
        if x.nrows() != self.u.nrows() {
            return Err(Error::domain(format!(
                "X has {} rows, Y has {}",
                x.nrows(),
                self.u.nrows()
            )));
        }
        let centered = center_columns(x);
        let proj = self.u.tr_mul(&centered);
        Ok((0..x.ncols())
            .map(|j| {
                let total = centered.column(j).norm_squared();
                let raw = x.column(j).norm_squared();
                if total <= (CONSTANT_TOL * CONSTANT_TOL) * raw || total == 0.0 {
                    Correlation {
                        omega: 0.0,
                        degenerate: true,
                    }
                } else {
                    let r2 = (proj.column(j).norm_squared() / total).clamp(0.0, 1.0);
                    Correlation {
                        omega: r2.sqrt(),
                        degenerate: false,
                    }
                }
            })
            .collect())
    }
}

/// Largest correlation between a predictor and linear combinations of the
/// responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub omega: f64,
    /// Set when the predictor has zero variance; `omega` is then 0.
    pub degenerate: bool,
}

pub fn canonical_corr(xj: &DVector<f64>, y: &DMatrix<f64>) -> Result<Correlation> {
    let x = DMatrix::from_column_slice(xj.len(), 1, xj.as_slice());
    Ok(ResponseBasis::new(y)?.scores(&x)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenResult {
    /// Selected columns: protected ones first, then by decreasing score.
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
    pub degenerate: Vec<usize>,
}

impl ScreenResult {
    /// `index,score,selected` with one row per predictor.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,score,selected\n");
        for (j, s) in self.scores.iter().enumerate() {
            out.push_str(&format!(
                "{j},{s},{}\n",
                u8::from(self.selected.contains(&j))
            ));
        }
        out
    }
}

/// `⌊δp⌋`, tolerant of `δp` landing a hair below an integer.
pub fn screen_count(delta: f64, p: usize) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!(
            "screening fraction must lie in (0, 1], got {delta}"
        )));
    }
    let k = (delta * p as f64 + 1e-9).floor() as usize;
    if k == 0 {
        return Err(Error::domain(format!(
            "floor(delta * p) = 0 for delta={delta}, p={p}"
        )));
    }
    Ok(k.min(p))
}

fn rank_order(scores: &[Correlation], candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = candidates.collect();
    idx.sort_by(|&a, &b| {
        let (sa, sb) = (&scores[a], &scores[b]);
        sa.degenerate
            .cmp(&sb.degenerate)
            .then(sb.omega.partial_cmp(&sa.omega).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    idx
}

/// Keeps the `⌊δp⌋` columns of `xs` with the largest canonical correlation
/// with `ys`.
pub fn screen(xs: &DMatrix<f64>, ys: &DMatrix<f64>, delta: f64) -> Result<ScreenResult> {
    let k = screen_count(delta, xs.ncols())?;
    screen_protected(xs, ys, k, 0)
}

/// Always keeps columns `0..protected`, then fills up to `size` columns by
/// score among the rest.
pub fn screen_protected(
    xs: &DMatrix<f64>,
    ys: &DMatrix<f64>,
    size: usize,
    protected: usize,
) -> Result<ScreenResult> {
    let p = xs.ncols();
    if protected > p || size > p || size < protected.max(1) {
        return Err(Error::domain(format!(
            "cannot select {size} of {p} columns with {protected} protected"
        )));
    }
    let scores = ResponseBasis::new(ys)?.scores(xs)?;
    let mut selected: Vec<usize> = (0..protected).collect();
    selected.extend(
        rank_order(&scores, protected..p)
            .into_iter()
            .take(size - protected),
    );
    Ok(ScreenResult {
        selected,
        degenerate: (0..p).filter(|&j| scores[j].degenerate).collect(),
        scores: scores.iter().map(|s| s.omega).collect(),
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
    fn hand_pearson_example() {
        let x = DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let c = canonical_corr(&x, &y).unwrap();
        assert!((c.omega - 2.0 / (2.0 * 5f64.sqrt())).abs() < 1e-12);
        assert!(!c.degenerate);
    }

    #[test]
    fn perfect_fit_and_orthogonality() {
        let y = random(12, 3, 1);
        let x = &y * DVector::from_vec(vec![0.5, -2.0, 1.0]) + DVector::from_element(12, 7.0);
        assert!((canonical_corr(&x, &y).unwrap().omega - 1.0).abs() < 1e-10);
        // (1,-1,-1,1) is orthogonal to centered (1,2,3,4) and to constants
        let x = DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]);
        let y = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        assert!(canonical_corr(&x, &y).unwrap().omega.abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        let y = random(6, 2, 2);
        let c = canonical_corr(&DVector::from_element(6, 3.0), &y).unwrap();
        assert_eq!(
            c,
            Correlation {
                omega: 0.0,
                degenerate: true
            }
        );
        let flat = DMatrix::from_element(6, 2, 1.0);
        assert!(canonical_corr(&DVector::from_fn(6, |i, _| i as f64), &flat).is_err());
    }

    #[test]
    fn invariances() {
        let y = random(15, 3, 3);
        let x = random(15, 1, 4).column(0).into_owned();
        let base = canonical_corr(&x, &y).unwrap().omega;
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, -1.0, 1.0, 0.5, 0.0, 0.2, 3.0]);
        let shifted = &y * &a + DMatrix::from_element(15, 3, -4.0);
        assert!((canonical_corr(&x, &shifted).unwrap().omega - base).abs() < 1e-10);
        let scaled = x.map(|v| 3.0 * v + 11.0);
        assert!((canonical_corr(&scaled, &y).unwrap().omega - base).abs() < 1e-10);
        assert!((canonical_corr(&(-&x), &y).unwrap().omega - base).abs() < 1e-10);
    }

    #[test]
    fn selection_sizes_and_ordering() {
        let x = random(20, 5, 5);
        let y = random(20, 2, 6);
        assert_eq!(screen(&x, &y, 0.4).unwrap().selected.len(), 2);
        let all = screen(&x, &y, 1.0).unwrap();
        assert_eq!(all.selected.len(), 5);
        for w in all.selected.windows(2) {
            assert!(all.scores[w[0]] >= all.scores[w[1]]);
        }
        assert!(screen(&x, &y, 0.1).is_err());
        assert!(screen(&x, &y, 1.5).is_err());
    }

    #[test]
    fn ties_and_degenerate_columns() {
        let mut x = random(10, 4, 7);
        let c = x.column(1).into_owned();
        x.set_column(3, &c);
        x.set_column(0, &DVector::from_element(10, 2.0));
        let y = random(10, 2, 8);
        let res = screen(&x, &y, 1.0).unwrap();
        assert_eq!(res.degenerate, vec![0]);
        assert_eq!(*res.selected.last().unwrap(), 0);
        let p1 = res.selected.iter().position(|&j| j == 1).unwrap();
        let p3 = res.selected.iter().position(|&j| j == 3).unwrap();
        assert_eq!(p3, p1 + 1);
    }

    #[test]
    fn protected_columns_come_first() {
        let x = random(20, 8, 9);
        let y = random(20, 2, 10);
        let res = screen_protected(&x, &y, 5, 3).unwrap();
        assert_eq!(&res.selected[..3], &[0, 1, 2]);
        assert_eq!(res.selected.len(), 5);
        assert!(res.selected[3..].iter().all(|&j| j >= 3));
    }

    #[test]
    fn monotone_rescaling_keeps_selection() {
        let scores: Vec<Correlation> = [0.3, 0.9, 0.1, 0.5]
            .iter()
            .map(|&omega| Correlation {
                omega,
                degenerate: false,
            })
            .collect();
        let squashed: Vec<Correlation> = scores
            .iter()
            .map(|c| Correlation {
                omega: c.omega.powi(3) * 0.2,
                ..*c
            })
            .collect();
        assert_eq!(rank_order(&scores, 0..4), rank_order(&squashed, 0..4));
    }

    #[test]
    fn noisy_copy_of_first_column_is_always_selected() {
        for seed in 0..100 {
            let x = random(30, 40, 1000 + seed);
            let noise = random(30, 1, 5000 + seed);
            let y = DMatrix::from_fn(30, 1, |i, _| x[(i, 0)] + 0.01 * noise[(i, 0)]);
            let res = screen(&x, &y, 1.0 / 40.0).unwrap();
            assert_eq!(res.selected, vec![0], "seed {seed}");
        }
    }

    #[test]
    fn csv_layout() {
        let res = ScreenResult {
            selected: vec![1],
            scores: vec![0.25, 0.5],
            degenerate: vec![],
        };
        assert_eq!(res.to_csv(), "index,score,selected\n0,0.25,0\n1,0.5,1\n");
    }
}
