use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// Twelve significant digits, shortest form: trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new digit (9.99.. -> 10.0); the extra
        // decimal is then just a trailing zero
        trim_zeros(&s)
    } else {
        let s = format!("{x:.11e}");
        let (m, e) = s.split_once('e').expect("exponent present");
        format!("{}e{e}", trim_zeros(m))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// CSV writer that flushes after every record, so an interrupted run
/// leaves every completed row on disk.
pub struct RowSink {
    w: csv::Writer<Box<dyn Write>>,
}

impl RowSink {
    /// Writes to `path`, or to stdout when `None`.
    pub fn create(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout()),
        };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(header)?;
        w.flush()?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields)?;
        self.w.flush()?;
        Ok(())
    }
}

/// `results.csv` -> `results.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Run metadata that does not belong in the reproducible CSV body.
#[derive(Serialize)]
pub struct Sidecar<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub started_unix: f64,
    pub elapsed_seconds: f64,
    pub config: &'a C,
    pub results: R,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            serde_json::to_writer_pretty(&mut f, value)?;
            f.write_all(b"\n")?;
        }
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
