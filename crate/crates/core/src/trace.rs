//! CSV and plain-text output of run traces.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::engine::RunTrace;

/// Relative slack on the average-power check reported in summaries.
pub const POWER_SLACK: f64 = 1.02;

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per epoch:
/// `epoch,utility,mean_power_bs0..,ne_iterations_mean,ne_converged_fraction,gap,h_mean,z_bs0..`.
/// Cells that do not apply to the protocol are left empty.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &RunTrace) -> io::Result<()> {
    let m = trace.epochs.first().map_or(0, |e| e.mean_power.len());
    let mut header = String::from("epoch,utility");
    for i in 0..m {
        write!(header, ",mean_power_bs{i}").unwrap();
    }
    header.push_str(",ne_iterations_mean,ne_converged_fraction,gap,h_mean");
    for i in 0..m {
        write!(header, ",z_bs{i}").unwrap();
    }
    writeln!(w, "{header}")?;
    for e in &trace.epochs {
        let mut row = format!("{},{}", e.epoch, e.utility);
        for p in &e.mean_power {
            write!(row, ",{p}").unwrap();
        }
        write!(
            row,
            ",{},{},{},{}",
            opt(e.ne_iterations_mean),
            opt(e.ne_converged_fraction),
            opt(e.gap),
            e.h_mean
        )
        .unwrap();
        for z in &e.z {
            write!(row, ",{z}").unwrap();
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Per-block game diagnostics:
/// `epoch,block,iterations,converged,residual,p_matrix,power_bs0..`.
pub fn write_ne_dump<W: Write>(mut w: W, trace: &RunTrace) -> io::Result<()> {
    let m = trace.blocks.first().map_or(0, |b| b.powers.len());
    let mut header = String::from("epoch,block,iterations,converged,residual,p_matrix");
    for i in 0..m {
        write!(header, ",power_bs{i}").unwrap();
    }
    writeln!(w, "{header}")?;
    for b in &trace.blocks {
        let verdict = b.p_matrix.map(|p| p.to_string()).unwrap_or_default();
        let mut row = format!(
            "{},{},{},{},{},{}",
            b.epoch, b.block, b.iterations, b.converged, b.residual, verdict
        );
        for p in &b.powers {
            write!(row, ",{p}").unwrap();
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// A run listed in `manifest.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub file: String,
    pub label: String,
    pub protocol: String,
    pub seed: u64,
    pub epochs: usize,
    pub config: String,
}

pub fn write_manifest<W: Write>(mut w: W, entries: &[ManifestEntry]) -> io::Result<()> {
    writeln!(w, "file,label,protocol,seed,epochs,config")?;
    for e in entries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            csv_field(&e.file),
            csv_field(&e.label),
            e.protocol,
            e.seed,
            e.epochs,
            csv_field(&e.config)
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub protocol: String,
    pub final_utility: Option<f64>,
    /// Largest running-mean BS power over `p_avg`.
    pub peak_power_ratio: Option<f64>,
    pub ne_converged: Option<f64>,
}

impl RunSummary {
    pub fn new(label: impl Into<String>, trace: &RunTrace, p_avg: f64) -> Self {
        Self {
            label: label.into(),
            protocol: trace.protocol.to_string(),
            final_utility: trace.final_utility(),
            peak_power_ratio: trace
                .final_mean_power()
                .map(|p| p.iter().copied().fold(0.0, f64::max) / p_avg),
            ne_converged: trace.converged_fraction(),
        }
    }

    pub fn power_ok(&self) -> Option<bool> {
        self.peak_power_ratio.map(|r| r <= POWER_SLACK)
    }
}

/// Plain-text table of run summaries.
pub fn summary_text(runs: &[RunSummary]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<24} {:<20} {:>14} {:>12} {:>9} {:>12}",
        "run", "protocol", "final_utility", "power/p_avg", "power_ok", "ne_converged"
    )
    .unwrap();
    for r in runs {
        let fmt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
        let ok = r.power_ok().map_or("-", |b| if b { "yes" } else { "no" });
        writeln!(
            out,
            "{:<24} {:<20} {:>14} {:>12} {:>9} {:>12}",
            r.label,
            r.protocol,
            fmt(r.final_utility, 4),
            fmt(r.peak_power_ratio, 4),
            ok,
            fmt(r.ne_converged, 4)
        )
        .unwrap();
    }
    out
}
