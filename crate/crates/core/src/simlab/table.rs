use serde::Serialize;

use crate::error::{Error, Result};

/// One cell × method estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub cell: usize,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub r: usize,
    pub eta: Option<f64>,
    pub signal: String,
    pub signal_size: f64,
    /// `tr(Ω)/m` when the signal is deterministic.
    pub tr_omega_m: Option<f64>,
    pub method: String,
    pub reps: usize,
    /// `None` marks an infeasible cell; `note` says why.
    pub rejections: Option<u64>,
    pub rate: Option<f64>,
    pub mc_std_error: Option<f64>,
    /// Asymptotic power of `T1` where it applies.
    pub theory: Option<f64>,
    pub runtime_secs: f64,
    pub note: String,
}

impl ResultRow {
    pub fn feasible(&self) -> bool {
        self.rate.is_some()
    }
}

/// `√(rate(1 - rate)/reps)`.
pub fn mc_std_error(rate: f64, reps: usize) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

impl ResultTable {
    pub fn find(&self, cell: usize, method: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.cell == cell && r.method == method)
    }

    /// Rate of `method` in `cell`, if feasible.
    pub fn rate(&self, cell: usize, method: &str) -> Option<f64> {
        self.find(cell, method).and_then(|r| r.rate)
    }

    /// One row per cell × method. Runtime is omitted unless requested so
    /// that reruns are byte-identical.
    pub fn to_csv(&self, timing: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "cell",
            "n",
            "p",
            "m",
            "r",
            "eta",
            "signal",
            "signal_size",
            "tr_omega_m",
            "method",
            "reps",
            "rejections",
            "rate",
            "mc_std_error",
            "theory",
        ];
        if timing {
            header.push("runtime_secs");
        }
        header.push("note");
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.cell.to_string(),
                row.n.to_string(),
                row.p.to_string(),
                row.m.to_string(),
                row.r.to_string(),
                opt(row.eta),
                row.signal.clone(),
                row.signal_size.to_string(),
                opt(row.tr_omega_m),
                row.method.clone(),
                row.reps.to_string(),
                row.rejections.map(|k| k.to_string()).unwrap_or_default(),
                opt(row.rate),
                opt(row.mc_std_error),
                opt(row.theory),
            ];
            if timing {
                rec.push(format!("{:.6}", row.runtime_secs));
            }
            rec.push(row.note.clone());
            w.write_record(&rec).map_err(csv_err)?;
        }
        finish(w)
    }

    /// `cell,method,x,metric,value` with `x` the growth exponent when
    /// present, else `tr(Ω)/m`, else the signal size.
    pub fn to_long_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cell", "method", "x", "metric", "value"])
            .map_err(csv_err)?;
        for row in self.rows.iter().filter(|r| r.feasible()) {
            let x = row
                .eta
                .or(row.tr_omega_m)
                .unwrap_or(row.signal_size)
                .to_string();
            let metrics = [
                ("rate", row.rate),
                ("mc_std_error", row.mc_std_error),
                ("theory", row.theory),
            ];
            for (name, value) in metrics {
                if let Some(v) = value {
                    w.write_record([
                        row.cell.to_string(),
                        row.method.clone(),
                        x.clone(),
                        name.into(),
                        v.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
        finish(w)
    }

    /// A gnuplot script plotting the `rate` series of `long_csv` by method.
    pub fn gnuplot_script(&self, long_csv: &str, output_png: &str) -> String {
        let mut methods: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        let xlabel = if self.rows.iter().any(|r| r.eta.is_some()) {
            "eta"
        } else {
            "signal"
        };
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,600\n");
        s.push_str(&format!("set output '{output_png}'\n"));
        s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel 'rejection rate'\nset key outside right\nset yrange [0:1]\n"));
        s.push_str(&format!("methods = \"{}\"\n", methods.join(" ")));
        s.push_str(&format!(
            "plot for [meth in methods] '{long_csv}' using 3:((strcol(2) eq meth && strcol(4) eq 'rate') ? $5 : 1/0) \\\n    with linespoints title meth\n"
        ));
        s
    }
}
