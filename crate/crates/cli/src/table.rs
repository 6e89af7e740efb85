use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
}

impl Cell {
    pub fn value(self) -> f64 {
        match self {
            Cell::Int(n) => n as f64,
            Cell::Real(x) => x,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Real(x) => write!(f, "{x:.12e}"),
        }
    }
}

/// Column table with trailing named scalars.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<(String, f64)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), ..Table::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.notes.push((name.into(), value));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].value()).collect())
    }

    pub fn get_note(&self, name: &str) -> Option<f64> {
        self.notes.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Comma-separated text: `echo` as a `#` comment block, a header line,
    /// the rows, then the notes as `# name = value` lines.
    pub fn to_csv(&self, echo: &str) -> String {
        let mut out = String::new();
        for line in echo.lines() {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for (name, value) in &self.notes {
            let _ = writeln!(out, "# {name} = {value:.12e}");
        }
        out
    }

    pub fn write(&self, path: &Path, echo: &str) -> Result<(), CliError> {
        fs::write(path, self.to_csv(echo)).map_err(|e| CliError::io(path, e))
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<usize> = self.columns.iter().map(|c| c.len().max(19)).collect();
        for (c, w) in self.columns.iter().zip(&widths) {
            write!(f, "{c:>w$} ")?;
        }
        writeln!(f)?;
        for row in &self.rows {
            for (cell, w) in row.iter().zip(&widths) {
                write!(f, "{:>w$} ", cell.to_string())?;
            }
            writeln!(f)?;
        }
        for (name, value) in &self.notes {
            writeln!(f, "{name} = {value:.12e}")?;
        }
        Ok(())
    }
}
