//! CSV time series and JSON summaries.
//!
//! Column sets:
//!
//! | kind     | columns                                                                   |
//! |----------|---------------------------------------------------------------------------|
//! | rigid    | `t, err_R, err_Omega, ortho_residual, V_tilde, u1, u2, u3`                |
//! | quad     | `t, err_R, err_Omega, err_x, err_xdot, f, ortho_residual, q, u1, u2, u3`  |
//! | zs-decay | `t, zs_norm, V_tilde`                                                     |
//!
//! Numbers carry 17 significant digits so they round-trip exactly. An
//! optional first line starting with `#` records the generator and a
//! timestamp; it is the only part that changes between identical runs.

use std::io::Write;

use manifold_ctrl::odesim::{MetricsSummary, ThrustExtension, Trajectory, TrajectoryKind};
use serde::Serialize;

use crate::error::CliError;

pub const RIGID_COLUMNS: [&str; 8] = ["t", "err_R", "err_Omega", "ortho_residual", "V_tilde", "u1", "u2", "u3"];
pub const QUAD_COLUMNS: [&str; 11] = [
    "t",
    "err_R",
    "err_Omega",
    "err_x",
    "err_xdot",
    "f",
    "ortho_residual",
    "q",
    "u1",
    "u2",
    "u3",
];
pub const ZS_COLUMNS: [&str; 3] = ["t", "zs_norm", "V_tilde"];

pub fn columns(kind: TrajectoryKind) -> &'static [&'static str] {
    match kind {
        TrajectoryKind::Rigid => &RIGID_COLUMNS,
        TrajectoryKind::Quad => &QUAD_COLUMNS,
        TrajectoryKind::ZsDecay => &ZS_COLUMNS,
    }
}

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn rows(traj: &Trajectory) -> impl Iterator<Item = Vec<f64>> + '_ {
    traj.times.iter().zip(&traj.metrics).zip(&traj.controls).map(move |((t, m), u)| match traj.kind {
        TrajectoryKind::Rigid => vec![*t, m.err_r, m.err_omega, m.ortho_residual, m.v_tilde, u[0], u[1], u[2]],
        TrajectoryKind::Quad => vec![
            *t,
            m.err_r,
            m.err_omega,
            m.err_x.unwrap_or(f64::NAN),
            m.err_xdot.unwrap_or(f64::NAN),
            m.f.unwrap_or(f64::NAN),
            m.ortho_residual,
            m.q.unwrap_or(f64::NAN),
            u[0],
            u[1],
            u[2],
        ],
        TrajectoryKind::ZsDecay => vec![*t, m.err_r, m.v_tilde],
    })
}

pub fn write_csv<W: Write>(mut out: W, traj: &Trajectory, meta: Option<&str>) -> Result<(), CliError> {
    if let Some(meta) = meta {
        writeln!(out, "# {meta}").map_err(CliError::io("writing CSV"))?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io {
        context: "writing CSV".into(),
        source: e.into(),
    };
    w.write_record(columns(traj.kind)).map_err(csv_err)?;
    for row in rows(traj) {
        w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io("writing CSV"))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<'a> {
    pub scenario: &'a str,
    pub stem: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<&'a str>,
    pub k_e: f64,
    pub g: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disturbed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thrust_extension: Option<ThrustExtension>,
    pub columns: &'static [&'static str],
    pub metrics: &'a MetricsSummary,
}

pub fn summary_json(summary: &RunSummary<'_>) -> String {
    serde_json::to_string_pretty(summary).expect("summary is serialisable")
}
