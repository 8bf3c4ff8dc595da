//! CSV and summary writers with a provenance header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::ScenarioConfig;
use crate::error::{PttError, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Numeric CSV field with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Comment lines naming the producer and echoing the configuration.
pub fn provenance(cfg: &ScenarioConfig) -> String {
    let mut s = format!("# ptt-core {ARTIFACT_VERSION}\n");
    for line in cfg.echo().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s
}

pub struct CsvFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvFile {
    /// Opens `path` and writes the provenance block and, unless empty, the
    /// column header.
    pub fn create(path: &Path, cfg: &ScenarioConfig, header: &str) -> Result<Self> {
        let file = File::create(path).map_err(|e| PttError::io(path, e))?;
        let mut csv = CsvFile {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        };
        csv.raw(&provenance(cfg))?;
        if !header.is_empty() {
            csv.raw(header)?;
            csv.raw("\n")?;
        }
        Ok(csv)
    }

    fn raw(&mut self, s: &str) -> Result<()> {
        self.out.write_all(s.as_bytes()).map_err(|e| PttError::io(&self.path, e))
    }

    pub fn row(&mut self, values: &[f64]) -> Result<()> {
        let line: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
        self.raw(&line.join(","))?;
        self.raw("\n")
    }

    /// Row of preformatted fields.
    pub fn fields(&mut self, fields: &[String]) -> Result<()> {
        self.raw(&fields.join(","))?;
        self.raw("\n")
    }

    pub fn writer(&mut self) -> &mut BufWriter<File> {
        &mut self.out
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().map_err(|e| PttError::io(&self.path, e))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scenario;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn header_then_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::new(Scenario::Linear);
        let mut csv = CsvFile::create(&dir.path().join("x.csv"), &cfg, "a,b").unwrap();
        csv.row(&[1.0, 0.5]).unwrap();
        let path = csv.finish().unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["a,b", "1.0000000000000000e0,5.0000000000000000e-1"]);
        assert!(text.starts_with("# ptt-core "));
        assert!(text.contains("# scenario=linear"));
    }
}
