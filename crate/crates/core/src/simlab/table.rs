use std::fmt::Write as _;

use crate::data::format_real;

use super::Method;

/// Error rates of one fitted classifier on one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// Share of −1 test samples classified +1; `None` when none were drawn.
    pub false_positive: Option<f64>,
    /// Share of +1 test samples classified −1.
    pub false_negative: Option<f64>,
}

impl Rates {
    pub fn average(&self) -> Option<f64> {
        Some(0.5 * (self.false_positive? + self.false_negative?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation (`n - 1`); zero for a single value.
    pub sd: f64,
}

impl MeanSd {
    /// Accumulates in the given order, so equal inputs give equal bits.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub method: Method,
    pub d: usize,
    pub false_positive: Option<MeanSd>,
    pub false_negative: Option<MeanSd>,
    pub average: Option<MeanSd>,
    /// Replications that produced a fit.
    pub reps: usize,
    /// Messages of the replications whose fit failed.
    pub failures: Vec<String>,
}

impl ErrorRow {
    /// Summarizes one cell from its per-replication outcomes, in
    /// replication order.
    pub fn from_outcomes(method: Method, d: usize, outcomes: &[Result<Rates, String>]) -> Self {
        let ok: Vec<Rates> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
        let failures = outcomes.iter().filter_map(|o| o.as_ref().err().cloned()).collect();
        let collect = |f: &dyn Fn(&Rates) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(f).collect() };
        Self {
            method,
            d,
            false_positive: MeanSd::of(&collect(&|r| r.false_positive)),
            false_negative: MeanSd::of(&collect(&|r| r.false_negative)),
            average: MeanSd::of(&collect(&|r| r.average())),
            reps: ok.len(),
            failures,
        }
    }
}

/// Error summary per method and dimension, rows ordered by method then `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

pub const ERROR_TABLE_HEADER: &str = "method,d,fp_mean,fp_sd,fn_mean,fn_sd,avg_mean,avg_sd,reps";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_real)
}

impl ErrorTable {
    pub fn get(&self, method: Method, d: usize) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.method == method && r.d == d)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(ERROR_TABLE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let parts = [r.false_positive, r.false_negative, r.average];
            let _ = write!(s, "{},{}", r.method.name(), r.d);
            for p in parts {
                let _ = write!(s, ",{},{}", cell(p.map(|m| m.mean)), cell(p.map(|m| m.sd)));
            }
            let _ = writeln!(s, ",{}", r.reps);
        }
        s
    }

    /// Long format `method,d,metric,value`, one line per available statistic.
    pub fn plot_data_csv(&self) -> String {
        let mut s = String::from("method,d,metric,value\n");
        for r in &self.rows {
            let stats = [
                ("fp", r.false_positive),
                ("fn", r.false_negative),
                ("avg", r.average),
            ];
            for (name, stat) in stats {
                if let Some(m) = stat {
                    let _ = writeln!(s, "{},{},{name}_mean,{}", r.method.name(), r.d, format_real(m.mean));
                    let _ = writeln!(s, "{},{},{name}_sd,{}", r.method.name(), r.d, format_real(m.sd));
                }
            }
        }
        s
    }
}
