use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hdlrt::io::load_matrix;
use hdlrt::multisplit::no_split_pvalue;
use hdlrt::simlab::{
    power_sweep, run_experiment, Cell, ExperimentSpec, Generator, GrowthCase, MethodSpec,
    ResultTable, Signal,
};
use hdlrt::{
    boundary_check, hypothesis_ss, multisplit_test, theoretical_power, DataSet, Dims, Error,
    HypothesisMatrix, Method, MultiSplitConfig, MultiSplitOutcome, PowerSpec, TestReport,
};
use serde_json::{json, Value};

use crate::args::{
    BoundaryArgs, Cli, DataArgs, ExperimentArgs, Format, GeneratorKind, MultisplitArgs, PowerArgs,
    SplitArgs, TestArgs,
};

fn load_data(args: &DataArgs) -> Result<(DataSet, HypothesisMatrix)> {
    let x = load_matrix(&args.x).with_context(|| format!("reading X from {}", args.x.display()))?;
    let y = load_matrix(&args.y).with_context(|| format!("reading Y from {}", args.y.display()))?;
    let data = DataSet::new(x, y)?;
    let c = match &args.c {
        Some(path) => {
            let c = HypothesisMatrix::new(
                load_matrix(path).with_context(|| format!("reading C from {}", path.display()))?,
            )?;
            if c.p() != data.p() {
                return Err(Error::Domain(format!(
                    "C has {} columns but X has {}",
                    c.p(),
                    data.p()
                ))
                .into());
            }
            c
        }
        None => HypothesisMatrix::identity(data.p()),
    };
    Ok((data, c))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(Error::Io)
        .with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn print_json(v: Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

pub fn test(cli: &Cli, args: &TestArgs) -> Result<()> {
    let methods: Vec<Method> = if args.method.iter().any(|m| m.eq_ignore_ascii_case("all")) {
        Method::ALL.to_vec()
    } else {
        args.method
            .iter()
            .map(|m| m.parse())
            .collect::<hdlrt::Result<_>>()?
    };
    let (data, c) = load_data(&args.data)?;
    let opts = hdlrt::hypothesis::TestOptions {
        convention: args.stat.convention,
        f_rule: args.stat.f_rule,
    };
    log::info!(
        "resolved: n={} p={} m={} r={} methods={methods:?} alpha={} options={opts:?}",
        data.n(),
        data.p(),
        data.m(),
        c.r(),
        cli.alpha
    );
    let ss = hypothesis_ss(&data, &c)?;

    let mut reports: Vec<TestReport> = Vec::new();
    let mut first_err = None;
    for m in methods.iter().copied() {
        match m.run(&ss, &opts) {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::error!("{m}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }

    match cli.format {
        Format::Text => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", r.to_key_value());
                println!("alpha={}\nreject={}", cli.alpha, r.rejects(cli.alpha));
            }
        }
        Format::Csv => {
            // diagnostics differ by method, so each report gets its own header
            for r in &reports {
                println!(
                    "{},alpha,reject\n{},{},{}",
                    r.csv_header(),
                    r.csv_row(),
                    cli.alpha,
                    r.rejects(cli.alpha)
                );
            }
        }
        Format::Json => {
            let with_decision = |r: &TestReport| -> Result<Value> {
                let mut v = serde_json::to_value(r)?;
                v["alpha"] = json!(cli.alpha);
                v["reject"] = json!(r.rejects(cli.alpha));
                Ok(v)
            };
            if methods.len() == 1 {
                if let Some(r) = reports.first() {
                    print_json(with_decision(r)?)?;
                }
            } else {
                let all: Vec<Value> = reports.iter().map(with_decision).collect::<Result<_>>()?;
                print_json(json!({ "alpha": cli.alpha, "reports": all }))?;
            }
        }
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn split_config(
    cli: &Cli,
    split: &SplitArgs,
    stat: &crate::args::StatArgs,
    j: usize,
) -> MultiSplitConfig {
    MultiSplitConfig {
        j,
        gamma_min: split.gamma_min,
        delta: split.delta,
        split_ratio: split.split_ratio,
        seed: cli.seed,
        pca_policy: split.pca,
        f_rule: stat.f_rule,
        convention: stat.convention,
        alpha: cli.alpha,
    }
}

pub fn multisplit(cli: &Cli, args: &MultisplitArgs) -> Result<()> {
    if args.j == 0 && !args.allow_unsafe_no_split {
        return Err(Error::Regime(
            "J = 0 screens and tests on the same rows and does not control the type I error; pass --allow-unsafe-no-split to run it anyway".into(),
        )
        .into());
    }
    let (data, c) = load_data(&args.data)?;
    let cfg = split_config(cli, &args.split, &args.stat, args.j);
    log::info!(
        "resolved: n={} p={} m={} r={} config={}",
        data.n(),
        data.p(),
        data.m(),
        c.r(),
        serde_json::to_string(&cfg)?
    );

    let outcome = if args.j == 0 {
        log::warn!("no-split mode: the p-value below is not valid");
        let s = no_split_pvalue(&data, &c, &cfg)?;
        MultiSplitOutcome {
            p_t: s.p_value,
            alpha: cfg.alpha,
            reject: s.p_value <= cfg.alpha,
            gamma_min: 1.0,
            null_hypothesis: "CB = 0 tested on the screening rows".into(),
            splits: vec![s],
        }
    } else {
        multisplit_test(&data, &c, &cfg)?
    };
    if let Some(path) = &args.out {
        write_file(path, &outcome.to_csv())?;
    }

    match cli.format {
        Format::Text => print!(
            "{}",
            key_values(&[
                ("p_t", outcome.p_t.to_string()),
                ("alpha", outcome.alpha.to_string()),
                ("reject", outcome.reject.to_string()),
                ("j", args.j.to_string()),
                ("gamma_min", outcome.gamma_min.to_string()),
                ("null_hypothesis", outcome.null_hypothesis.clone()),
            ])
        ),
        Format::Csv => print!("{}", outcome.to_csv()),
        Format::Json => print_json(serde_json::to_value(&outcome)?)?,
    }
    Ok(())
}

enum SignalArg {
    Fixed(Signal),
    /// Equal spikes on `rk` diagonal entries with `tr(Ω)/m = t`.
    Trace {
        rk: usize,
        t: f64,
    },
}

fn parse_signal(s: &str) -> Result<SignalArg> {
    if let Some(rest) = s.trim().strip_prefix("trace:") {
        let bad = || Error::Domain(format!("expected trace:<rk>:<t>, got `{s}`"));
        let (rk, t) = rest.split_once(':').ok_or_else(bad)?;
        let rk: usize = rk.parse().map_err(|_| bad())?;
        let t: f64 = t.parse().map_err(|_| bad())?;
        if rk == 0 || t.is_nan() || t < 0.0 {
            return Err(bad().into());
        }
        return Ok(SignalArg::Trace { rk, t });
    }
    Ok(SignalArg::Fixed(s.parse()?))
}

fn parse_dims(s: &str) -> Result<Dims> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|v| v.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Domain(format!("expected NxPxMxR, got `{s}`")))?;
    match parts.as_slice() {
        [n, p, m, r] => Ok(Dims::new(*n, *p, *m, *r)?),
        _ => Err(Error::Domain(format!("expected NxPxMxR, got `{s}`")).into()),
    }
}

fn experiment_spec(cli: &Cli, args: &ExperimentArgs) -> Result<ExperimentSpec> {
    let mut designs: Vec<(Dims, Option<f64>)> = Vec::new();
    if let Some(case) = args.case {
        if args.n.is_empty() || args.eta.is_empty() {
            return Err(Error::Domain("--case needs --n and --eta".into()).into());
        }
        for cell in GrowthCase::grid(case, &args.n, &args.eta)? {
            designs.push((cell.dims, cell.eta));
        }
    }
    for d in &args.dims {
        designs.push((parse_dims(d)?, None));
    }
    if designs.is_empty() {
        return Err(
            Error::Domain("no designs: give --case with --n/--eta, or --dims".into()).into(),
        );
    }
    let signals: Vec<SignalArg> = args
        .signal
        .iter()
        .map(|s| parse_signal(s))
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (dims, eta) in &designs {
        for s in &signals {
            let signal = match s {
                SignalArg::Fixed(sig) => sig.clone(),
                SignalArg::Trace { rk, t } => Signal::diagonal_with_trace(*rk, *t, dims.m),
            };
            cells.push(Cell {
                dims: *dims,
                signal,
                eta: *eta,
            });
        }
    }
    let generator = match args.generator {
        GeneratorKind::Canonical => Generator::Canonical,
        GeneratorKind::Linear => Generator::Linear {
            rho: args.rho,
            noise: args.noise,
        },
    };
    let mut spec = ExperimentSpec::new(generator, cells, args.methods.clone(), args.reps, cli.seed);
    spec.alpha = cli.alpha;
    spec.options = hdlrt::hypothesis::TestOptions {
        convention: args.stat.convention,
        f_rule: args.stat.f_rule,
    };
    spec.multisplit = split_config(cli, &args.split, &args.stat, 1);
    if args.methods.contains(&MethodSpec::NoSplit) {
        log::warn!(
            "multisplit:0 (no split) is a negative control; its rejection rate is not a valid size"
        );
    }
    Ok(spec)
}

fn emit_table(cli: &Cli, args: &ExperimentArgs, table: &ResultTable) -> Result<()> {
    let csv = table.to_csv(args.timing)?;
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None if cli.format != Format::Json => print!("{csv}"),
        None => {}
    }
    if cli.format == Format::Json {
        print_json(serde_json::to_value(table)?)?;
    }
    if args.long_out.is_some() || args.gnuplot.is_some() {
        let long = match (&args.long_out, &args.gnuplot) {
            (Some(p), _) => p.clone(),
            (None, Some(g)) => g.with_extension("long.csv"),
            (None, None) => unreachable!(),
        };
        write_file(&long, &table.to_long_csv()?)?;
        if let Some(g) = &args.gnuplot {
            let png = g.with_extension("png");
            write_file(
                g,
                &table.gnuplot_script(&long.to_string_lossy(), &png.to_string_lossy()),
            )?;
        }
    }
    for row in table.rows.iter().filter(|r| !r.feasible()) {
        log::warn!("cell {} {}: {}", row.cell, row.method, row.note);
    }
    Ok(())
}

pub fn simulate(cli: &Cli, args: &ExperimentArgs) -> Result<()> {
    let spec = experiment_spec(cli, args)?;
    log::info!("resolved experiment: {}", serde_json::to_string(&spec)?);
    emit_table(cli, args, &run_experiment(&spec)?)
}

pub fn power(cli: &Cli, args: &PowerArgs) -> Result<()> {
    if args.formula {
        let missing = |name: &str| Error::Domain(format!("--formula needs --{name}"));
        let spec = PowerSpec {
            deltas: args.deltas.clone(),
            rho_p: args.rho_p.ok_or_else(|| missing("rho-p"))?,
            rho_r: args.rho_r.ok_or_else(|| missing("rho-r"))?,
            rho_m: args.rho_m.ok_or_else(|| missing("rho-m"))?,
            alpha: cli.alpha,
        };
        if spec.deltas.is_empty() {
            return Err(missing("deltas").into());
        }
        log::info!("resolved power formula: {}", serde_json::to_string(&spec)?);
        let power = theoretical_power(&spec)?;
        let w = spec.w_delta()?;
        let sigma = spec.sigma2()?.sqrt();
        match cli.format {
            Format::Json => {
                print_json(json!({ "power": power, "w_delta": w, "sigma": sigma, "spec": spec }))?
            }
            Format::Csv => println!("power,w_delta,sigma\n{power},{w},{sigma}"),
            Format::Text => print!(
                "{}",
                key_values(&[
                    ("power", power.to_string()),
                    ("w_delta", w.to_string()),
                    ("sigma", sigma.to_string())
                ])
            ),
        }
        return Ok(());
    }
    let spec = experiment_spec(cli, &args.experiment)?;
    log::info!("resolved experiment: {}", serde_json::to_string(&spec)?);
    emit_table(cli, &args.experiment, &power_sweep(&spec)?)
}

pub fn boundary(cli: &Cli, args: &BoundaryArgs) -> Result<()> {
    let dims = Dims::new(args.n, args.p, args.m, args.r)?;
    log::info!("resolved: {dims:?}");
    let d = boundary_check(dims);
    let pairs = [
        ("n", args.n.to_string()),
        ("p", args.p.to_string()),
        ("m", args.m.to_string()),
        ("r", args.r.to_string()),
        ("chi2_metric", d.chi2_metric.to_string()),
        ("chi2_verdict", d.chi2_verdict().to_string()),
        ("bartlett_metric", d.bartlett_metric.to_string()),
        ("bartlett_verdict", d.bartlett_verdict().to_string()),
        ("chi2_bias", d.chi2_bias.to_string()),
        ("lrt_defined", d.lrt_defined.to_string()),
    ];
    match cli.format {
        Format::Text => print!("{}", key_values(&pairs)),
        Format::Csv => {
            let (k, v): (Vec<&str>, Vec<String>) = pairs.iter().cloned().unzip();
            println!("{}\n{}", k.join(","), v.join(","));
        }
        Format::Json => {
            let mut v = serde_json::to_value(d)?;
            v["chi2_verdict"] = json!(d.chi2_verdict());
            v["bartlett_verdict"] = json!(d.bartlett_verdict());
            print_json(v)?;
        }
    }
    Ok(())
}
