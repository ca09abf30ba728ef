//! Plain-text tables, JSON and CSV output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// Column-aligned text table. The first column is left-aligned, the rest
/// right-aligned, which suits a label followed by numbers.
#[derive(Debug, Clone, Default)]
pub struct Table {
    title: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, header: &[&str]) -> Self {
        Self { title: title.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    fn align(col: usize) -> Align {
        if col == 0 {
            Align::Left
        } else {
            Align::Right
        }
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.header[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (c, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if c > 0 {
                    s.push_str("  ");
                }
                match Self::align(c) {
                    Align::Left => write!(s, "{cell:<w$}").unwrap(),
                    Align::Right => write!(s, "{cell:>w$}").unwrap(),
                }
            }
            s.trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            writeln!(out, "{}", self.title).unwrap();
        }
        writeln!(out, "{}", line(&self.header)).unwrap();
        let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        writeln!(out, "{}", "-".repeat(total)).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", line(r)).unwrap();
        }
        out
    }
}

pub fn fixed(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{x:.digits$}")
    } else {
        "n/a".into()
    }
}

pub fn percent(x: f64) -> String {
    if x.is_finite() {
        format!("{:.1}%", 100.0 * x)
    } else {
        "n/a".into()
    }
}

/// Writes a report as `<stem>.json` and `<stem>.txt` and echoes the text
/// to stdout.
pub fn emit<T: Serialize>(dir: &Path, stem: &str, doc: &T, text: &str) -> Result<()> {
    let json = serde_json::to_string_pretty(doc)? + "\n";
    write(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    write(&dir.join(format!("{stem}.txt")), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Minimal CSV writer for numeric series; cells never need quoting.
pub struct Csv {
    path: PathBuf,
    body: String,
}

impl Csv {
    pub fn new(path: PathBuf, header: &[&str]) -> Self {
        Self { path, body: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> Result<PathBuf> {
        write(&self.path, self.body.as_bytes())?;
        Ok(self.path)
    }
}
