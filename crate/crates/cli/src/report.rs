//! CSV emission with a `#`-comment preamble echoing the effective config,
//! so an output file is self-describing and byte-reproducible.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub struct Report {
    config: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            config: vec![("command".into(), command.into())],
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn columns(&mut self, columns: &[&'static str]) {
        self.columns = columns.to_vec();
    }

    /// Headerless reports (plain sample listings) pass rows with no columns
    /// declared; otherwise widths must agree.
    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert!(self.columns.is_empty() || cells.len() == self.columns.len());
        self.rows.push(cells);
    }

    /// Writes the preamble and table to `out`, or stdout when absent.
    pub fn write(&self, out: Option<&Path>) -> io::Result<()> {
        match out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                self.write_to(&mut w)?;
                w.flush()
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                self.write_to(&mut w)?;
                w.flush()
            }
        }
    }

    fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        for (k, v) in &self.config {
            writeln!(w, "# {k}: {v}")?;
        }
        if !self.columns.is_empty() {
            writeln!(w, "{}", self.columns.join(","))?;
        }
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form; stable across runs by construction.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Logarithmic checkpoint grid {1,2,5}·10^j clipped to n, always ending at n.
pub fn log_grid(n: usize) -> Vec<usize> {
    assert!(n >= 1);
    let mut grid = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            match decade.checked_mul(m) {
                Some(g) if g <= n => grid.push(g),
                _ => break 'outer,
            }
        }
        match decade.checked_mul(10) {
            Some(d) => decade = d,
            None => break,
        }
    }
    if grid.last() != Some(&n) {
        grid.push(n);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_one_two_five_and_ends_at_n() {
        assert_eq!(log_grid(1), vec![1]);
        assert_eq!(log_grid(7), vec![1, 2, 5, 7]);
        assert_eq!(log_grid(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(log_grid(30), vec![1, 2, 5, 10, 20, 30]);
    }

    #[test]
    fn numbers_render_shortest() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(f64::ln(2.0)), "0.6931471805599453");
    }
}
