use crate::error::{Error, Result};

fn sorted(pvals: &[f64]) -> Result<Vec<f64>> {
    if pvals.is_empty() {
        return Err(Error::domain("no split p-values to aggregate"));
    }
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(format!("p-value {p} outside [0, 1]")));
    }
    let mut v = pvals.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `⌈γJ⌉`, snapping `γJ` to an integer when it is within rounding noise.
fn order_index(gamma: f64, j: usize) -> usize {
    let x = gamma * j as f64;
    let k = if (x - x.round()).abs() < 1e-9 {
        x.round()
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, j)
}

/// `Q(γ) = min{1, q_γ(p/γ)}` with the empirical quantile taken as the
/// `⌈γJ⌉`-th order statistic.
pub fn q_gamma(pvals: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let v = sorted(pvals)?;
    Ok((v[order_index(gamma, v.len()) - 1] / gamma).min(1.0))
}

/// `min{1, (1 - log γ_min) · inf_{γ ∈ (γ_min, 1)} Q(γ)}`.
///
/// On `((k-1)/J, k/J]` the order statistic is fixed at `p_(k)` and `Q`
/// decreases in `γ`, so the infimum is `min_k p_(k) J / k` over the `k` with
/// `k/J > γ_min` (for `k = J` as the limit `γ → 1`).
pub fn adaptive_pt(pvals: &[f64], gamma_min: f64) -> Result<f64> {
    if !(gamma_min > 0.0 && gamma_min < 1.0) {
        return Err(Error::domain(format!(
            "gamma_min must lie in (0, 1), got {gamma_min}"
        )));
    }
    let v = sorted(pvals)?;
    let j = v.len();
    let inf = (1..=j)
        .filter(|&k| k as f64 / j as f64 > gamma_min)
        .map(|k| v[k - 1] * j as f64 / k as f64)
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    Ok(((1.0 - gamma_min.ln()) * inf).min(1.0))
}
