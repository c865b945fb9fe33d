use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::export::{csv_writer, fmt_float, to_json};

use super::experiment::{CrossValidation, EmbeddingComparison, EvalReport};
use super::sweep::SweepTable;

pub const SWEEP_HEADER: [&str; 6] = ["model", "feature_kind", "n_range", "top_k", "macro_f1", "accuracy"];

/// Write `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::at_path(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::at_path(path, e))
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut w = csv_writer(&mut buf, header)?;
    for r in rows {
        w.row(&r)?;
    }
    w.finish()?;
    Ok(buf)
}

/// Something that serializes to a fixed set of files in a directory.
pub trait Emit {
    /// File names and contents, in write order.
    fn render(&self) -> Result<Vec<(&'static str, Vec<u8>)>>;

    fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.render()?
            .into_iter()
            .map(|(name, bytes)| {
                let path = dir.join(name);
                write_file(&path, &bytes)?;
                Ok(path)
            })
            .collect()
    }
}

/// Free-function form of [`Emit::emit`].
pub fn emit_reports<E: Emit + ?Sized>(item: &E, dir: &Path) -> Result<Vec<PathBuf>> {
    item.emit(dir)
}

pub fn confusion_csv(report: &EvalReport) -> Result<Vec<u8>> {
    let m = &report.metrics;
    let mut header = vec!["true".to_string()];
    header.extend(m.classes.iter().map(|c| format!("pred_{c}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = m
        .classes
        .iter()
        .zip(&m.confusion)
        .map(|(c, row)| {
            std::iter::once(c.to_string())
                .chain(row.iter().map(usize::to_string))
                .collect()
        })
        .collect();
    csv_bytes(&header, rows)
}

impl Emit for EvalReport {
    fn render(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        Ok(vec![
            ("report.json", to_json(self)?.into_bytes()),
            ("confusion.csv", confusion_csv(self)?),
        ])
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>> {
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let kind = if r.use_category {
                format!("{}+category", r.feature_kind)
            } else {
                r.feature_kind.clone()
            };
            vec![
                r.model.clone(),
                kind,
                r.n_range.clone().unwrap_or_default(),
                r.top_k.map(|k| k.to_string()).unwrap_or_default(),
                opt_float(r.macro_f1),
                opt_float(r.accuracy),
            ]
        })
        .collect();
    csv_bytes(&SWEEP_HEADER, rows)
}

impl Emit for SweepTable {
    fn render(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        Ok(vec![
            ("sweep.csv", sweep_csv(self)?),
            ("sweep.json", to_json(self)?.into_bytes()),
        ])
    }
}

impl Emit for EmbeddingComparison {
    fn render(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        let rows = [
            ("with_category", &self.with_category),
            ("without_category", &self.without_category),
        ]
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                fmt_float(r.metrics.macro_f1),
                fmt_float(r.metrics.weighted_f1),
                fmt_float(r.metrics.accuracy),
            ]
        })
        .collect();
        Ok(vec![
            ("comparison.json", to_json(self)?.into_bytes()),
            (
                "comparison.csv",
                csv_bytes(&["config", "macro_f1", "weighted_f1", "accuracy"], rows)?,
            ),
        ])
    }
}

impl Emit for CrossValidation {
    fn render(&self) -> Result<Vec<(&'static str, Vec<u8>)>> {
        let rows = self
            .folds
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    i.to_string(),
                    fmt_float(r.metrics.macro_f1),
                    fmt_float(r.metrics.weighted_f1),
                    fmt_float(r.metrics.accuracy),
                ]
            })
            .collect();
        Ok(vec![
            ("cv.json", to_json(self)?.into_bytes()),
            (
                "cv.csv",
                csv_bytes(&["fold", "macro_f1", "weighted_f1", "accuracy"], rows)?,
            ),
        ])
    }
}
