//! CSV tables, log-log regression and plot scripts.

use std::fmt::Write as _;

use crate::format::g12;

/// Header plus numeric rows, written with 12 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| g12(*v)).collect();
            writeln!(out, "{}", cells.join(",")).expect("write to string");
        }
        out
    }
}

/// Least-squares slope of `ln y` against `ln x` over points with both
/// coordinates positive. `None` with fewer than two such points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Gnuplot script plotting every column after the first against the first,
/// reading `csv_name` relative to the script's directory.
pub fn plot_script(table: &Table, csv_name: &str, title: &str, log_axes: bool) -> String {
    let mut out = String::new();
    writeln!(out, "# gnuplot -p {}", csv_name.replace(".csv", ".gp")).unwrap();
    writeln!(out, "set datafile separator ','").unwrap();
    writeln!(out, "set key autotitle columnhead").unwrap();
    writeln!(out, "set title '{title}'").unwrap();
    writeln!(out, "set xlabel '{}'", table.header[0]).unwrap();
    if log_axes {
        writeln!(out, "set logscale xy").unwrap();
    }
    let series: Vec<String> = (2..=table.header.len())
        .map(|col| format!("'{csv_name}' using 1:{col} with linespoints"))
        .collect();
    writeln!(out, "plot {}", series.join(", \\\n     ")).unwrap();
    out
}
