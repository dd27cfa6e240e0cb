use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;

use super::generate::LinearSampler;
use super::spec::{Cell, ExperimentSpec, Generator, MethodSpec};
use super::table::{mc_std_error, ResultRow, ResultTable};
use crate::error::{Error, Result};
use crate::hypothesis::{
    bartlett_factor, mu_sigma, t2_params, theoretical_power, Method, PowerSpec,
};
use crate::model::{
    canonical_form_sample, hypothesis_ss, DataSet, Dims, HypothesisMatrix, SignalMatrix,
    SumsOfSquares,
};
use crate::multisplit::{multisplit_test, no_split_pvalue, MultiSplitConfig};
use crate::rng::{derive_seed, substream, Stream};

/// Why a method cannot run on these dimensions, checked before sampling.
fn static_infeasibility(method: &MethodSpec, generator: &Generator, dims: Dims) -> Option<String> {
    let test = match method {
        MethodSpec::Test(m) => *m,
        _ => {
            return match generator {
                Generator::Canonical => Some("multi-split needs the linear generator".into()),
                Generator::Linear { .. } => None,
            }
        }
    };
    let check = || -> Result<()> {
        dims.require_lrt()?;
        match test {
            Method::Chi2 => {}
            Method::Bartlett => {
                if bartlett_factor(dims) <= 0.0 {
                    return Err(Error::regime("Bartlett factor is not positive"));
                }
            }
            Method::T1 => {
                mu_sigma(dims)?;
            }
            Method::T2 => {
                t2_params(dims)?;
            }
            Method::T3 => {
                mu_sigma(dims)?;
                t2_params(dims)?;
            }
        }
        Ok(())
    };
    check().err().map(|e| e.to_string())
}

/// Per-method tally over replicates, keeping the error of the lowest
/// replicate so the reduction is order independent.
#[derive(Clone, Default)]
struct Tally {
    rejections: u64,
    first_error: Option<(usize, String)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.rejections += other.rejections;
        self.first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

struct CellRunner<'a> {
    spec: &'a ExperimentSpec,
    cell: &'a Cell,
    active: Vec<usize>,
    fixed_signal: Option<SignalMatrix>,
    sampler: Option<LinearSampler>,
    contrast: Option<HypothesisMatrix>,
}

impl CellRunner<'_> {
    fn replicate(&self, rng: &mut Stream) -> Vec<Result<bool>> {
        let spec = self.spec;
        let dims = self.cell.dims;
        let alpha = spec.alpha;
        let fail_all = |e: Error| self.active.iter().map(|_| Err(clone_err(&e))).collect();
        match &spec.generator {
            Generator::Canonical => {
                let drawn;
                let signal = match &self.fixed_signal {
                    Some(s) => s,
                    None => {
                        drawn =
                            match SignalMatrix::new(self.cell.signal.matrix(dims.r, dims.m, rng)) {
                                Ok(s) => s,
                                Err(e) => return fail_all(e),
                            };
                        &drawn
                    }
                };
                let ss = match canonical_form_sample(rng, signal, dims) {
                    Ok(ss) => ss,
                    Err(e) => return fail_all(e),
                };
                self.active
                    .iter()
                    .map(|&k| test_rejects(&spec.methods[k], &ss, spec, alpha))
                    .collect()
            }
            Generator::Linear { .. } => {
                let data = match self.sampler.as_ref().expect("linear sampler").sample(rng) {
                    Ok(d) => d,
                    Err(e) => return fail_all(e),
                };
                let split_seed = rng.next_u64();
                let c = self.contrast.as_ref().expect("contrast");
                let needs_ss = self
                    .active
                    .iter()
                    .any(|&k| matches!(spec.methods[k], MethodSpec::Test(_)));
                let ss = if needs_ss {
                    Some(hypothesis_ss(&data, c))
                } else {
                    None
                };
                self.active
                    .iter()
                    .map(|&k| match &spec.methods[k] {
                        MethodSpec::Test(_) => match ss.as_ref().expect("computed above") {
                            Ok(ss) => test_rejects(&spec.methods[k], ss, spec, alpha),
                            Err(e) => Err(clone_err(e)),
                        },
                        other => split_rejects(other, &data, c, spec, split_seed),
                    })
                    .collect()
            }
        }
    }
}

fn clone_err(e: &Error) -> Error {
    Error::Numerical(e.to_string())
}

fn test_rejects(
    method: &MethodSpec,
    ss: &SumsOfSquares,
    spec: &ExperimentSpec,
    alpha: f64,
) -> Result<bool> {
    match method {
        MethodSpec::Test(m) => Ok(m.run(ss, &spec.options)?.rejects(alpha)),
        _ => unreachable!("split methods are handled on the data path"),
    }
}

fn split_rejects(
    method: &MethodSpec,
    data: &DataSet,
    c: &HypothesisMatrix,
    spec: &ExperimentSpec,
    seed: u64,
) -> Result<bool> {
    let cfg = |j: usize| MultiSplitConfig {
        j,
        seed,
        alpha: spec.alpha,
        ..spec.multisplit.clone()
    };
    match method {
        MethodSpec::MultiSplit { j } => Ok(multisplit_test(data, c, &cfg(*j))?.reject),
        MethodSpec::NoSplit => Ok(no_split_pvalue(data, c, &cfg(1))?.p_value <= spec.alpha),
        MethodSpec::Test(_) => unreachable!("tests are handled on the sums-of-squares path"),
    }
}

fn theory_for(
    spec: &ExperimentSpec,
    method: &MethodSpec,
    dims: Dims,
    signal: Option<&SignalMatrix>,
) -> Option<f64> {
    if spec.generator != Generator::Canonical || *method != MethodSpec::Test(Method::T1) {
        return None;
    }
    let (n, p, m, r) = dims.nf();
    let ps = PowerSpec {
        deltas: signal?.delta_eigenvalues(dims.n),
        rho_p: p / n,
        rho_r: r / n,
        rho_m: m / n,
        alpha: spec.alpha,
    };
    theoretical_power(&ps).ok()
}

fn run_cell(spec: &ExperimentSpec, index: usize, cell: &Cell) -> Result<Vec<ResultRow>> {
    let start = Instant::now();
    let dims = cell.dims;
    let blocked: Vec<Option<String>> = spec
        .methods
        .iter()
        .map(|m| static_infeasibility(m, &spec.generator, dims))
        .collect();
    let active: Vec<usize> = (0..spec.methods.len())
        .filter(|&k| blocked[k].is_none())
        .collect();
    let fixed_signal = cell.signal.fixed_signal(dims.r, dims.m);
    let (sampler, contrast) = match spec.generator {
        Generator::Linear { rho, noise } => (
            Some(LinearSampler::new(dims, cell.signal.clone(), rho, noise)?),
            Some(HypothesisMatrix::leading(dims.r, dims.p)?),
        ),
        Generator::Canonical => (None, None),
    };
    let runner = CellRunner {
        spec,
        cell,
        active,
        fixed_signal,
        sampler,
        contrast,
    };

    let cell_seed = derive_seed(spec.seed, index as u64);
    let tallies: Vec<Tally> = if runner.active.is_empty() {
        Vec::new()
    } else {
        (0..spec.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = substream(cell_seed, rep as u64);
                runner
                    .replicate(&mut rng)
                    .into_iter()
                    .map(|res| match res {
                        Ok(hit) => Tally {
                            rejections: u64::from(hit),
                            first_error: None,
                        },
                        Err(e) => Tally {
                            rejections: 0,
                            first_error: Some((rep, e.to_string())),
                        },
                    })
                    .collect::<Vec<Tally>>()
            })
            .reduce(
                || vec![Tally::default(); runner.active.len()],
                |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
            )
    };
    let runtime = start.elapsed().as_secs_f64();

    let mut rows = Vec::with_capacity(spec.methods.len());
    for (k, method) in spec.methods.iter().enumerate() {
        let mut row = ResultRow {
            cell: index,
            n: dims.n,
            p: dims.p,
            m: dims.m,
            r: dims.r,
            eta: cell.eta,
            signal: cell.signal.to_string(),
            signal_size: cell.signal.size(),
            tr_omega_m: match spec.generator {
                Generator::Canonical => runner
                    .fixed_signal
                    .as_ref()
                    .map(|s| s.trace_omega_per_response()),
                Generator::Linear { .. } => None,
            },
            method: method.label(),
            reps: spec.reps,
            rejections: None,
            rate: None,
            mc_std_error: None,
            theory: theory_for(spec, method, dims, runner.fixed_signal.as_ref()),
            runtime_secs: runtime,
            note: String::new(),
        };
        if let Some(why) = &blocked[k] {
            row.note = format!("infeasible: {why}");
        } else {
            let slot = runner
                .active
                .iter()
                .position(|&a| a == k)
                .expect("active method");
            let tally = &tallies[slot];
            match &tally.first_error {
                Some((rep, msg)) => row.note = format!("infeasible: replicate {rep}: {msg}"),
                None => {
                    let rate = tally.rejections as f64 / spec.reps as f64;
                    row.rejections = Some(tally.rejections);
                    row.rate = Some(rate);
                    row.mc_std_error = Some(mc_std_error(rate, spec.reps));
                }
            }
        }
        rows.push(row);
    }
    log::debug!("cell {index} {} done in {runtime:.3}s", dims);
    Ok(rows)
}

/// Runs every cell × method. Bit-reproducible for a fixed seed whatever the
/// thread count: replicate `k` of cell `c` always uses stream
/// `substream(derive_seed(seed, c), k)` and counts are summed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let mut table = ResultTable::default();
    for (index, cell) in spec.cells.iter().enumerate() {
        table.rows.extend(run_cell(spec, index, cell)?);
    }
    Ok(table)
}

/// Size estimates; every cell must carry a null signal.
pub fn type1_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    if let Some(c) = spec.cells.iter().find(|c| !c.signal.is_null()) {
        return Err(Error::domain(format!(
            "type I sweep needs null signals, found {}",
            c.signal
        )));
    }
    run_experiment(spec)
}

/// Power estimates, with the asymptotic `T1` power alongside when the
/// generator is canonical.
pub fn power_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    run_experiment(spec)
}

/// Multi-split sweeps need data, hence the linear generator.
pub fn multisplit_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    if spec.generator == Generator::Canonical {
        return Err(Error::domain(
            "multi-split sweeps need the linear generator",
        ));
    }
    run_experiment(spec)
}
