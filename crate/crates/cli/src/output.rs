//! Run outputs: `reports.csv`, `snapshot_{step}.noff`, `manifest.cfg` and small tables.

use std::fs;
use std::path::Path;

use willmore_core::flow::Trajectory;
use willmore_core::inequality::RatioRecord;

use crate::meshio::{fmt_f64, write_mesh, MeshFormat};
use crate::CliError;

pub const REPORT_COLUMNS: [&str; 8] =
    ["t", "W_energy", "A_sq_total", "sup_A", "sup_W", "concentration_sup", "dissipation_accum", "residual_running"];

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.display().to_string(), source: e.into() }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io(path))
}

/// Writes a CSV with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

/// `reports.csv` and one nOFF file per snapshot. The running residual is
/// `A_sq_total(0) − A_sq_total(t) − 2·dissipation(t)`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<(), CliError> {
    let a0 = traj.reports.first().map(|r| r.a_sq_total).unwrap_or(0.0);
    let rows = traj.reports.iter().zip(&traj.dissipation).map(|(r, &d)| {
        vec![
            fmt_f64(r.t),
            fmt_f64(r.w_energy),
            fmt_f64(r.a_sq_total),
            fmt_f64(r.sup_a),
            fmt_f64(r.sup_w),
            r.concentration_sup().map(fmt_f64).unwrap_or_default(),
            fmt_f64(d),
            fmt_f64(a0 - r.a_sq_total - 2.0 * d),
        ]
    });
    write_csv(&dir.join("reports.csv"), &REPORT_COLUMNS, rows)?;
    for (step, _, mesh) in &traj.snapshots {
        write_mesh(mesh, &dir.join(format!("snapshot_{step}.noff")), MeshFormat::Noff)?;
    }
    Ok(())
}

pub fn write_ratios(records: &[RatioRecord], path: &Path) -> Result<(), CliError> {
    let header = ["inequality", "mesh_id", "field_id", "lhs", "rhs_without_constant", "ratio", "proxy"];
    let rows = records.iter().map(|r| {
        vec![
            r.inequality.to_string(),
            r.mesh_id.clone(),
            r.field_id.clone(),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs_without_constant),
            fmt_f64(r.ratio),
            r.is_proxy().to_string(),
        ]
    });
    write_csv(path, &header, rows)
}
