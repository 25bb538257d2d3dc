use crate::config::RunConfig;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// CSV writer that embeds the fully-resolved configuration as a leading
/// comment line, followed by the header row. '.' decimal separator and '\n'
/// line endings come from the standard formatter.
pub struct CsvFile {
    w: BufWriter<File>,
}

impl CsvFile {
    pub fn create(path: &Path, cfg: &RunConfig, header: &[&str]) -> std::io::Result<Self> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        let embedded = serde_json::to_string(cfg).expect("config serializes");
        writeln!(w, "# config: {embedded}")?;
        writeln!(w, "{}", header.join(","))?;
        Ok(CsvFile { w })
    }

    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        writeln!(self.w, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}

/// Formats a float with shortest round-trip representation (deterministic).
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "nan".to_string()
    }
}

/// Writes a JSON report with the resolved configuration attached.
pub fn write_json_report<T: serde::Serialize>(
    path: &Path,
    cfg: &RunConfig,
    payload: &T,
) -> std::io::Result<()> {
    let body = serde_json::json!({
        "config": cfg,
        "report": payload,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut w = BufWriter::new(File::create(path)?);
    let text = serde_json::to_string_pretty(&body).expect("report serializes");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()
}
