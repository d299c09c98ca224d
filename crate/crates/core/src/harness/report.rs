//! CSV tables, graymaps, summary and provenance files for one run.

use std::fs;
use std::path::Path as FsPath;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::config::{Config, HarnessResult};
use crate::field::io::write_pgm16;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem; written as `<name>.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> HarnessResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| std::io::Error::other(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        Ok(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub tables: Vec<Table>,
    /// Ordered `key = value` summary statistics.
    pub summary: Vec<(String, String)>,
    /// Intensity images written as `<name>.pgm`.
    pub images: Vec<(String, Array2<f64>)>,
    /// One human-readable line per sweep point.
    pub lines: Vec<String>,
    /// Number of sweep points that carry an error tag.
    pub failures: usize,
}

impl RunReport {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn merge(&mut self, other: RunReport) {
        self.tables.extend(other.tables);
        self.summary.extend(other.summary);
        self.images.extend(other.images);
        self.lines.extend(other.lines);
        self.failures += other.failures;
    }

    pub fn write(&self, dir: impl AsRef<FsPath>, cfg: &Config, command: &str) -> HarnessResult<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        for t in &self.tables {
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?)?;
        }
        for (name, img) in &self.images {
            write_pgm16(dir.join(format!("{name}.pgm")), img)?;
        }
        let mut summary = String::new();
        for (k, v) in &self.summary {
            summary.push_str(&format!("{k} = {v}\n"));
        }
        summary.push_str(&format!("failed_points = {}\n", self.failures));
        fs::write(dir.join("summary.txt"), summary)?;
        fs::write(dir.join("provenance.txt"), provenance(cfg, command))?;
        fs::write(dir.join("config.txt"), cfg.canonical())?;
        Ok(())
    }
}

pub fn config_hash(cfg: &Config) -> String {
    let digest = Sha256::digest(cfg.canonical().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn provenance(cfg: &Config, command: &str) -> String {
    format!(
        "command = {command}\nconfig_sha256 = {}\nseed = {}\n{} = {}\n",
        config_hash(cfg),
        cfg.seed,
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_orders() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.rows.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n1,\"x,y\"\n");
        assert_eq!(t.column("b"), Some(1));
    }

    #[test]
    fn hash_tracks_config() {
        let a = Config::default();
        let mut b = Config::default();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.seed = 2;
        assert_ne!(config_hash(&a), config_hash(&b));
        b.seed = 1;
        b.threads = 4;
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RunReport::default();
        r.tables.push(Table::new("t", &["x"]));
        r.images.push(("img".into(), Array2::from_elem((2, 2), 1.0)));
        r.summary.push(("k".into(), "v".into()));
        r.write(dir.path(), &Config::default(), "demo").unwrap();
        for f in ["t.csv", "img.pgm", "img.pgm.txt", "summary.txt", "provenance.txt", "config.txt"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
