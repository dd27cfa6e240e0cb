use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::adaptive_pt;
use super::config::{MultiSplitConfig, PcaPolicy};
use super::split::split_indices;
use crate::error::{Error, Result};
use crate::hypothesis::t3_test_with;
use crate::model::linalg::{select_columns, select_rows};
use crate::model::{hypothesis_ss, DataSet, HypothesisMatrix};
use crate::rng::{derive_seed, stream, Stream};
use crate::screening::{
    parallel_analysis, pca_reduce, screen_count, screen_protected, ConditionalTransform,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitOutcome {
    pub j: usize,
    pub split_seed: u64,
    pub p_value: f64,
    /// Columns kept by screening (of the transformed design when `C` is not
    /// a column selection).
    pub selected: Vec<usize>,
    pub m0: usize,
    /// Rank of the reduced hypothesis actually tested (0 when no tested
    /// coefficient survived screening).
    pub r_tested: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiSplitOutcome {
    pub p_t: f64,
    pub alpha: f64,
    pub reject: bool,
    pub gamma_min: f64,
    /// Null actually examined on the reduced data.
    pub null_hypothesis: String,
    pub splits: Vec<SplitOutcome>,
}

impl MultiSplitOutcome {
    /// One row per split followed by a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,j,seed,p_value,m0,n_selected,p_t,alpha,reject\n");
        for s in &self.splits {
            out.push_str(&format!(
                "split,{},{},{},{},{},,,\n",
                s.j,
                s.split_seed,
                s.p_value,
                s.m0,
                s.selected.len()
            ));
        }
        out.push_str(&format!(
            "summary,,,,,,{},{},{}\n",
            self.p_t, self.alpha, self.reject
        ));
        out
    }
}

/// How the hypothesis is carried into the reduced model.
enum Plan {
    /// `C` selects columns `cols[i]` with weights `weights[i]`.
    Selection { cols: Vec<usize>, weights: Vec<f64> },
    /// Test `[I_r, 0]` on `XD`, always keeping the first `r` columns.
    Transformed(ConditionalTransform),
}

impl Plan {
    fn new(c: &HypothesisMatrix) -> Result<Self> {
        Ok(match c.selection_columns() {
            Some(cols) => {
                let weights = cols
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| c.matrix()[(i, j)])
                    .collect();
                Plan::Selection { cols, weights }
            }
            None => Plan::Transformed(crate::screening::transform_for(c)?),
        })
    }

    fn describe(&self, pca: bool) -> String {
        let w = if pca { " W_hat" } else { "" };
        match self {
            Plan::Selection { .. } => format!("C_M B_M{w} = 0 (rows of C on the selected columns)"),
            Plan::Transformed(t) => format!(
                "[I_{}, 0] (D'B)_M{w} = 0 (D: orthogonal basis led by the row space of C)",
                t.r
            ),
        }
    }
}

struct Halves<'a> {
    xs: &'a DMatrix<f64>,
    ys: &'a DMatrix<f64>,
    xt: &'a DMatrix<f64>,
    yt: &'a DMatrix<f64>,
}

fn infeasible(j: usize, n_test: usize, p0: usize, m0: usize, reason: impl Into<String>) -> Error {
    Error::SplitInfeasible {
        split: j,
        n_test,
        p0,
        m0,
        reason: reason.into(),
    }
}

/// Screening, optional PCA and `T3` for one screening/testing pair.
fn reduced_pvalue(
    h: Halves<'_>,
    plan: &Plan,
    cfg: &MultiSplitConfig,
    rng: &mut Stream,
    j: usize,
    split_seed: u64,
) -> Result<SplitOutcome> {
    let n_t = h.xt.nrows();
    let (p, m) = (h.xs.ncols(), h.ys.ncols());
    let fail = |p0: usize, m0: usize, why: String| infeasible(j, n_t, p0, m0, why);
    if n_t < 4 {
        return Err(fail(0, 0, "testing half has fewer than 4 rows".into()));
    }

    let pca = match cfg.pca_policy {
        PcaPolicy::None => None,
        PcaPolicy::Fixed(m0) => Some(pca_reduce(h.ys, m0).map_err(|e| fail(0, m0, e.to_string()))?),
        PcaPolicy::ParallelAnalysis { b_perm, pct } => {
            let cap = (n_t - 3).min(h.ys.nrows() - 1).min(m);
            let pa = parallel_analysis(h.ys, b_perm, pct, rng, Some(cap))
                .map_err(|e| fail(0, 0, e.to_string()))?;
            Some(pca_reduce(h.ys, pa.m0).map_err(|e| fail(0, pa.m0, e.to_string()))?)
        }
    };
    let (ys, yt) = match &pca {
        Some(w) => (w.apply(h.ys)?, w.apply(h.yt)?),
        None => (h.ys.clone(), h.yt.clone()),
    };
    let m0 = ys.ncols();

    let protected = match plan {
        Plan::Selection { .. } => 0,
        Plan::Transformed(t) => t.r,
    };
    let room = n_t.saturating_sub(m0 + 2);
    let size = screen_count(cfg.delta, p)
        .map_err(|e| fail(0, m0, e.to_string()))?
        .max(protected)
        .min(room);
    if size == 0 || size < protected {
        return Err(fail(
            size.max(protected),
            m0,
            format!(
                "need n_T > p0 + m0 + 1 with at least {} columns",
                protected.max(1)
            ),
        ));
    }
    let screened =
        screen_protected(h.xs, &ys, size, protected).map_err(|e| fail(size, m0, e.to_string()))?;
    let selected = screened.selected;

    let c_m = match plan {
        Plan::Selection { cols, weights } => {
            let rows: Vec<(usize, f64)> = cols
                .iter()
                .zip(weights)
                .filter_map(|(c, w)| selected.iter().position(|s| s == c).map(|pos| (pos, *w)))
                .collect();
            if rows.is_empty() {
                return Ok(SplitOutcome {
                    j,
                    split_seed,
                    p_value: 1.0,
                    selected,
                    m0,
                    r_tested: 0,
                });
            }
            let mut c = DMatrix::zeros(rows.len(), selected.len());
            for (i, (pos, w)) in rows.into_iter().enumerate() {
                c[(i, pos)] = w;
            }
            c
        }
        Plan::Transformed(t) => {
            DMatrix::from_fn(t.r, selected.len(), |i, k| if i == k { 1.0 } else { 0.0 })
        }
    };
    let p0 = selected.len();
    let r_tested = c_m.nrows();
    let run = || -> Result<f64> {
        let data = DataSet::new(select_columns(h.xt, &selected), yt.clone())?;
        let ss = hypothesis_ss(&data, &HypothesisMatrix::new(c_m)?)?;
        Ok(t3_test_with(&ss, cfg.f_rule, cfg.convention)?.p_value)
    };
    let p_value = run().map_err(|e| fail(p0, m0, e.to_string()))?;
    Ok(SplitOutcome {
        j,
        split_seed,
        p_value,
        selected,
        m0,
        r_tested,
    })
}

fn check_inputs(data: &DataSet, c: &HypothesisMatrix) -> Result<()> {
    if c.p() != data.p() {
        return Err(Error::domain(format!(
            "C has {} columns but X has {}",
            c.p(),
            data.p()
        )));
    }
    Ok(())
}

fn design_for(plan: &Plan, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    match plan {
        Plan::Selection { .. } => Ok(x.clone()),
        Plan::Transformed(t) => t.apply(x),
    }
}

fn split_pvalue(
    data: &DataSet,
    x: &DMatrix<f64>,
    plan: &Plan,
    cfg: &MultiSplitConfig,
    j: usize,
) -> Result<SplitOutcome> {
    let split_seed = derive_seed(cfg.seed, j as u64);
    let mut rng = stream(split_seed);
    let (s, t) = split_indices(&mut rng, data.n(), cfg.split_ratio)?;
    let (xs, xt) = (select_rows(x, &s), select_rows(x, &t));
    let (ys, yt) = (select_rows(&data.y, &s), select_rows(&data.y, &t));
    reduced_pvalue(
        Halves {
            xs: &xs,
            ys: &ys,
            xt: &xt,
            yt: &yt,
        },
        plan,
        cfg,
        &mut rng,
        j,
        split_seed,
    )
}

/// The p-value of split `j`; its seed depends only on `(cfg.seed, j)`.
pub fn per_split_pvalue(
    data: &DataSet,
    c: &HypothesisMatrix,
    cfg: &MultiSplitConfig,
    j: usize,
) -> Result<SplitOutcome> {
    check_inputs(data, c)?;
    cfg.validate_common()?;
    let plan = Plan::new(c)?;
    let x = design_for(&plan, &data.x)?;
    split_pvalue(data, &x, &plan, cfg, j)
}

/// Runs `cfg.j` splits in parallel and aggregates them. Fails with the
/// lowest-indexed infeasible split, if any.
pub fn multisplit_test(
    data: &DataSet,
    c: &HypothesisMatrix,
    cfg: &MultiSplitConfig,
) -> Result<MultiSplitOutcome> {
    check_inputs(data, c)?;
    cfg.validate()?;
    let plan = Plan::new(c)?;
    let x = design_for(&plan, &data.x)?;
    let results: Vec<Result<SplitOutcome>> = (0..cfg.j)
        .into_par_iter()
        .map(|j| split_pvalue(data, &x, &plan, cfg, j))
        .collect();
    let splits = results.into_iter().collect::<Result<Vec<_>>>()?;
    let pvals: Vec<f64> = splits.iter().map(|s| s.p_value).collect();
    let gamma_min = cfg.resolved_gamma_min();
    let p_t = adaptive_pt(&pvals, gamma_min)?;
    Ok(MultiSplitOutcome {
        p_t,
        alpha: cfg.alpha,
        reject: p_t <= cfg.alpha,
        gamma_min,
        null_hypothesis: plan.describe(cfg.pca_policy != PcaPolicy::None),
        splits,
    })
}

/// Screens and tests on the same rows. Not a valid test: the selection
/// step biases the statistic, so this exists only as a negative control.
pub fn no_split_pvalue(
    data: &DataSet,
    c: &HypothesisMatrix,
    cfg: &MultiSplitConfig,
) -> Result<SplitOutcome> {
    check_inputs(data, c)?;
    cfg.validate_common()?;
    let plan = Plan::new(c)?;
    let x = design_for(&plan, &data.x)?;
    let mut rng = stream(derive_seed(cfg.seed, u64::MAX));
    let h = Halves {
        xs: &x,
        ys: &data.y,
        xt: &x,
        yt: &data.y,
    };
    reduced_pvalue(h, &plan, cfg, &mut rng, 0, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::fill_std_normal;
    use crate::hypothesis::{t3_test, FRule};

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        fill_std_normal(&mut stream(seed), &mut m);
        m
    }

    fn null_data(n: usize, p: usize, m: usize, seed: u64) -> DataSet {
        DataSet::new(random(n, p, seed), random(n, m, seed + 1)).unwrap()
    }

    #[test]
    fn delta_one_is_plain_t3_on_test_half() {
        let data = null_data(60, 5, 3, 1);
        let c = HypothesisMatrix::leading(2, 5).unwrap();
        let cfg = MultiSplitConfig {
            j: 1,
            delta: 1.0,
            seed: 9,
            ..Default::default()
        };
        let out = per_split_pvalue(&data, &c, &cfg, 0).unwrap();
        let mut rng = stream(out.split_seed);
        let (_, t) = split_indices(&mut rng, 60, 0.3).unwrap();
        let test = data.rows(&t);
        // screening only reorders columns, which leaves the statistic unchanged
        let direct = t3_test(&hypothesis_ss(&test, &c).unwrap(), FRule::LogLog)
            .unwrap()
            .p_value;
        assert!(
            (out.p_value - direct).abs() < 1e-10,
            "{} vs {direct}",
            out.p_value
        );
        assert_eq!(out.r_tested, 2);
    }

    #[test]
    fn deterministic_across_runs() {
        let data = null_data(50, 40, 4, 2);
        let c = HypothesisMatrix::identity(40);
        let cfg = MultiSplitConfig {
            j: 8,
            seed: 3,
            ..Default::default()
        };
        let a = multisplit_test(&data, &c, &cfg).unwrap();
        let b = multisplit_test(&data, &c, &cfg).unwrap();
        assert_eq!(a.p_t, b.p_t);
        assert_eq!(a.splits, b.splits);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn single_split_composition() {
        let data = null_data(50, 40, 4, 4);
        let c = HypothesisMatrix::identity(40);
        let cfg = MultiSplitConfig {
            j: 1,
            seed: 5,
            ..Default::default()
        };
        let out = multisplit_test(&data, &c, &cfg).unwrap();
        let single = per_split_pvalue(&data, &c, &cfg, 0).unwrap();
        assert_eq!(out.splits[0], single);
        assert_eq!(out.p_t, adaptive_pt(&[single.p_value], 0.5).unwrap());
    }

    #[test]
    fn general_contrast_protects_transformed_columns() {
        let data = null_data(60, 30, 3, 6);
        let c = HypothesisMatrix::new(random(2, 30, 7)).unwrap();
        let cfg = MultiSplitConfig {
            j: 4,
            seed: 1,
            ..Default::default()
        };
        let out = multisplit_test(&data, &c, &cfg).unwrap();
        for s in &out.splits {
            assert_eq!(&s.selected[..2], &[0, 1]);
            assert_eq!(s.selected.len(), 6);
            assert_eq!(s.r_tested, 2);
        }
        assert!(out.null_hypothesis.starts_with("[I_2, 0]"));
    }

    #[test]
    fn unscreened_tested_columns_give_unit_pvalue() {
        // only column 0 is tested and it is pure noise; y follows column 5
        let mut x = random(60, 30, 8);
        let y = DMatrix::from_fn(60, 1, |i, _| 5.0 * x[(i, 5)]) + random(60, 1, 9) * 0.1;
        x.column_mut(0).fill(0.0);
        x[(0, 0)] = 1e-3;
        let data = DataSet::new(x, y).unwrap();
        let c = HypothesisMatrix::leading(1, 30).unwrap();
        let cfg = MultiSplitConfig {
            j: 3,
            delta: 1.0 / 30.0,
            ..Default::default()
        };
        let out = multisplit_test(&data, &c, &cfg).unwrap();
        for s in &out.splits {
            assert_eq!(s.selected, vec![5]);
            assert_eq!((s.p_value, s.r_tested), (1.0, 0));
        }
    }

    #[test]
    fn pca_policies() {
        let data = null_data(80, 50, 40, 10);
        let c = HypothesisMatrix::identity(50);
        let cfg = MultiSplitConfig {
            j: 3,
            pca_policy: PcaPolicy::Fixed(3),
            ..Default::default()
        };
        let out = multisplit_test(&data, &c, &cfg).unwrap();
        assert!(out.splits.iter().all(|s| s.m0 == 3));
        assert!(out.null_hypothesis.contains("W_hat"));
        let cfg = MultiSplitConfig {
            j: 3,
            pca_policy: PcaPolicy::parallel_analysis(),
            ..Default::default()
        };
        let out = multisplit_test(&data, &c, &cfg).unwrap();
        assert!(out.splits.iter().all(|s| s.m0 >= 1 && s.m0 < 20));
    }

    #[test]
    fn infeasible_split_reports_sizes() {
        // m = 50 responses cannot fit the 28-row testing half
        let data = null_data(40, 60, 50, 11);
        let c = HypothesisMatrix::identity(60);
        let cfg = MultiSplitConfig {
            j: 2,
            ..Default::default()
        };
        match multisplit_test(&data, &c, &cfg) {
            Err(Error::SplitInfeasible {
                split, n_test, m0, ..
            }) => {
                assert_eq!((split, n_test, m0), (0, 28, 50));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let data = null_data(50, 40, 4, 12);
        let cfg = MultiSplitConfig {
            j: 2,
            ..Default::default()
        };
        let out = multisplit_test(&data, &HypothesisMatrix::identity(40), &cfg).unwrap();
        let csv = out.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("split,0,"));
        assert!(lines[3].starts_with("summary,,,,,,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 9));
    }

    #[test]
    fn no_split_mode_runs() {
        let data = null_data(100, 120, 20, 13);
        let cfg = MultiSplitConfig::default();
        let out = no_split_pvalue(&data, &HypothesisMatrix::identity(120), &cfg).unwrap();
        assert_eq!(out.selected.len(), 24);
        assert!((0.0..=1.0).contains(&out.p_value));
    }
}
