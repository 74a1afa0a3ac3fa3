//! CSV output and the resolved-configuration sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use hetnet_coop::mcsim::Method;

use crate::sweep::Row;
use crate::CliError;

pub const CSV_HEADER: [&str; 11] = [
    "sweep_variable",
    "value",
    "strategy",
    "mode",
    "engine",
    "metric",
    "result",
    "ci_halfwidth",
    "trials",
    "seed",
    "error",
];

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let (result, ci, trials) = match &r.result {
            Some(m) => {
                let trials = match m.method {
                    Method::Analytic => String::new(),
                    Method::MonteCarlo => m.trials.to_string(),
                };
                (m.value.to_string(), m.ci_halfwidth.to_string(), trials)
            }
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            r.sweep_variable.as_str(),
            &r.value.map(|v| v.to_string()).unwrap_or_default(),
            &r.strategy,
            r.mode.name(),
            r.engine.name(),
            r.metric.name(),
            &result,
            &ci,
            &trials,
            &r.seed.to_string(),
            r.error.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[Row]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// `<out>.resolved.toml`
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".resolved.toml");
    PathBuf::from(name)
}
