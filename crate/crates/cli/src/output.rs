//! CSV result emission and the JSON run manifest. Columns are fixed per
//! experiment kind; rows are flushed as they are produced so partial
//! results survive a failure. All numbers use '.' as the decimal separator
//! (Rust's locale-independent float formatting).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// One CSV cell. Floats render via Rust's shortest-roundtrip formatting,
/// keeping identical configs byte-identical.
pub enum Cell {
    Str(String),
    U64(u64),
    F64(f64),
    /// Missing value (empty cell).
    None,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::U64(v) => v.to_string(),
            Cell::F64(v) => v.to_string(),
            Cell::None => String::new(),
        }
    }
}

pub struct CsvWriter {
    path: PathBuf,
    file: BufWriter<File>,
    columns: usize,
    rows: u64,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> std::io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "{}", header.join(","))?;
        file.flush()?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            columns: header.len(),
            rows: 0,
        })
    }

    /// Write one row and flush it, so partial output survives a crash.
    pub fn row(&mut self, cells: &[Cell]) -> std::io::Result<()> {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.file, "{}", line.join(","))?;
        self.file.flush()?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows_written(&self) -> u64 {
        self.rows
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Write the run manifest: config echo, library version, runtime, and the
/// produced files.
pub fn write_manifest(
    cfg: &ExperimentConfig,
    outputs: &[(&str, PathBuf, u64)],
    extra: serde_json::Value,
    runtime_ms: u128,
) -> std::io::Result<PathBuf> {
    let path = cfg
        .out_dir
        .join(format!("{}-manifest.json", cfg.kind.as_str()));
    let files: Vec<serde_json::Value> = outputs
        .iter()
        .map(|(role, p, rows)| {
            serde_json::json!({
                "role": role,
                "path": p.display().to_string(),
                "rows": rows,
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "experiment": cfg.kind.as_str(),
        "library_version": rggperc::VERSION,
        "seed": cfg.seed,
        "config": cfg.raw.to_json(),
        "outputs": files,
        "summary": extra,
        "runtime_ms": runtime_ms as u64,
    });
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}
