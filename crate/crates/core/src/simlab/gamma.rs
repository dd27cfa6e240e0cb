use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{std_normal, std_normal_tail};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, substream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub rho: f64,
    pub gamma: f64,
    pub estimate: f64,
    pub mc_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaTable {
    pub j: usize,
    pub alpha: f64,
    pub reps: usize,
    pub rows: Vec<GammaRow>,
}

impl GammaTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,alpha,reps,rho,gamma,estimate,mc_std_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.j, self.alpha, self.reps, r.rho, r.gamma, r.estimate, r.mc_std_error
            ));
        }
        out
    }

    /// The `γ` with the largest estimate for a given `ρ` (first on ties).
    pub fn argmax_gamma(&self, rho: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.rho == rho)
            .fold(None::<&GammaRow>, |best, r| match best {
                Some(b) if b.estimate >= r.estimate => Some(b),
                _ => Some(r),
            })
            .map(|r| r.gamma)
    }
}

/// Estimates `P{ψ(αγ) >= γ}` with `ψ(u)` the fraction of split p-values at
/// or below `u`, for equi-correlated p-values `p_j = 1 - Φ(V_j)` where
/// `V_j = √ρ Z_0 + √(1-ρ) Z_j`.
pub fn gamma_sensitivity(
    j: usize,
    rhos: &[f64],
    gammas: &[f64],
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<GammaTable> {
    if j == 0 || reps == 0 {
        return Err(Error::domain("J and reps must be positive"));
    }
    if let Some(r) = rhos.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::domain(format!(
            "correlation must lie in [0, 1], got {r}"
        )));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(Error::domain(format!("gamma must lie in (0, 1], got {g}")));
    }
    let mut rows = Vec::new();
    for (ri, &rho) in rhos.iter().enumerate() {
        let base = derive_seed(seed, ri as u64);
        let counts = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = substream(base, rep as u64);
                let z0 = std_normal(&mut rng);
                let mut p: Vec<f64> = (0..j)
                    .map(|_| {
                        let v = rho.sqrt() * z0 + (1.0 - rho).sqrt() * std_normal(&mut rng);
                        std_normal_tail(v).expect("finite normal draw")
                    })
                    .collect();
                p.sort_by(f64::total_cmp);
                gammas
                    .iter()
                    .map(|&g| {
                        let below = p.partition_point(|&v| v <= alpha * g);
                        u64::from(below as f64 / j as f64 >= g)
                    })
                    .collect::<Vec<u64>>()
            })
            .reduce(
                || vec![0; gammas.len()],
                |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
            );
        for (&gamma, &hits) in gammas.iter().zip(&counts) {
            let est = hits as f64 / reps as f64;
            rows.push(GammaRow {
                rho,
                gamma,
                estimate: est,
                mc_std_error: super::table::mc_std_error(est, reps),
            });
        }
    }
    Ok(GammaTable {
        j,
        alpha,
        reps,
        rows,
    })
}
