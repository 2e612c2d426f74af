//! Whitespace-separated data files for gnuplot, built from workflow outputs.

use std::io::Write;
use std::path::{Path, PathBuf};

use tcm_core::io::atomic_write;
use tcm_core::{Error, Result};

pub const NORM_DECAY_COLUMNS: &[&str] = &["t", "norm", "w_Hs", "z_Hs", "psi_Hs", "envelope"];
pub const ENERGY_COLUMNS: &[&str] = &[
    "t", "diss_w", "diss_z", "diss_psi", "I1", "I2", "I3", "I4", "I5", "I6", "I7", "residual",
];
pub const SWEEP_COLUMNS: &[&str] = &[
    "ln_eps",
    "ln_measured_U",
    "ln_measured_V",
    "ln_measured_Theta",
    "ln_measured_f",
    "ln_measured_g",
    "ln_measured_h",
];

/// A CSV file as a header and rows of floats.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
        let bad = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
        let header = reader.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(bad)?;
            let row = record
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Format(format!("{}: bad number `{v}`", path.display()))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("column `{name}` missing")))
    }
}

fn write_dat(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    atomic_write(path, |w| {
        writeln!(w, "# {}", columns.join(" "))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", cells.join(" "))?;
        }
        Ok(())
    })
}

fn select(table: &Table, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let idx = names.iter().map(|n| table.column(n)).collect::<Result<Vec<_>>>()?;
    Ok(table.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect())
}

fn ln_or_nan(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NAN
    }
}

/// Writes `norm_decay.dat` and `energy_breakdown.dat` from `diagnostics.csv`, and
/// `sweep_scaling.dat` from `sweep_estimates.csv`, for whichever inputs exist.
pub fn emit_plot_data(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let diagnostics = out_dir.join("diagnostics.csv");
    let estimates = out_dir.join("sweep_estimates.csv");
    if !diagnostics.exists() && !estimates.exists() {
        return Err(Error::MissingData(format!(
            "no diagnostics.csv or sweep_estimates.csv in {}",
            out_dir.display()
        )));
    }
    let mut written = Vec::new();
    if diagnostics.exists() {
        let table = Table::read(&diagnostics)?;
        let parts = select(&table, &["t", "w_Hs", "z_Hs", "psi_Hs", "envelope"])?;
        let rows: Vec<Vec<f64>> = parts
            .iter()
            .map(|r| {
                let norm = (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
                vec![r[0], norm, r[1], r[2], r[3], r[4]]
            })
            .collect();
        let path = out_dir.join("norm_decay.dat");
        write_dat(&path, NORM_DECAY_COLUMNS, &rows)?;
        written.push(path);
        let path = out_dir.join("energy_breakdown.dat");
        write_dat(&path, ENERGY_COLUMNS, &select(&table, ENERGY_COLUMNS)?)?;
        written.push(path);
    }
    if estimates.exists() {
        let table = Table::read(&estimates)?;
        let names = ["eps", "measured_U", "measured_V", "measured_Theta", "measured_f", "measured_g", "measured_h"];
        let rows: Vec<Vec<f64>> =
            select(&table, &names)?.into_iter().map(|r| r.into_iter().map(ln_or_nan).collect()).collect();
        let path = out_dir.join("sweep_scaling.dat");
        write_dat(&path, SWEEP_COLUMNS, &rows)?;
        written.push(path);
    }
    Ok(written)
}
