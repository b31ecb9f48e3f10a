//! Fixed-step RK4 simulation of the closed loops and the metrics recorded
//! along them.
//!
//! Flat state layouts (attitude matrices row-major):
//!
//! | scenario            | layout                                               |
//! |---------------------|------------------------------------------------------|
//! | rigid               | `R[9] Omega[3]` then `int z_k[3]` for P2             |
//! | quad, additive thrust | `R[9] Omega[3] x[3] v[3] f f'` then `int dx[3] int z_k3` with integral gains |
//! | quad, multiplicative  | as additive with `h` in place of `f'`                |
//! | Z_s decay           | `Z_s[9]`                                             |
//!
//! Controller integral states ride in the same vector so they are advanced by
//! the same integrator as the plant. Attitudes are never re-projected onto
//! `SO(3)`; the transversal term keeps them there.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{fit_decay_rate, tilde_v, DecayFit, StabilizationParams};
use crate::matlib::{orthogonality_residual, Mat3, Vec3};
use crate::quadcopter::{
    disturbance, multiplicative_input, quad_rhs_modified, quad_rhs_mul_ext, reference_quad, z_s_rate, QuadController,
    QuadState, QuadStateMul,
};
use crate::rigid_body::{error_coords, reference_rigid, rigid_rhs_modified, RigidController, RigidState};
use crate::ControlError;

/// Largest accepted step.
pub const MAX_DT: f64 = 1e-2;
/// Error level used for settling times.
pub const SETTLING_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("controller failed at t = {t}: {source}")]
    Control {
        t: f64,
        #[source]
        source: ControlError,
    },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

/// One classical fourth-order Runge-Kutta step of `y' = field(t, y)`.
pub fn rk4_step<F>(field: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>, SimError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), SimError>,
{
    if !(h > 0.0) {
        return Err(SimError::InvalidConfig(format!("step must be positive, got {h}")));
    }
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];

    field(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    field(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    field(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    field(t + h, &tmp, &mut k4)?;

    let next: Vec<f64> = (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().any(|x| !x.is_finite()) {
        return Err(SimError::NonFiniteState { t: t + h });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThrustExtension {
    /// `f'' = q`
    Additive,
    /// `f' = f h`, `h' = q`
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Rigid {
        controller: RigidController,
        initial: RigidState,
    },
    Quad {
        controller: QuadController,
        initial: QuadState,
        extension: ThrustExtension,
        disturbed: bool,
    },
    /// The decoupled linear `Z_s' = [Z_s, hat(Omega0)] - 2 k_e Z_s`.
    ZsDecay { z_s0: Mat3 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
    pub params: StabilizationParams,
    pub g: f64,
    pub scenario: Scenario,
}

impl SimConfig {
    pub fn new(scenario: Scenario) -> Self {
        SimConfig {
            t_end: 20.0,
            dt: 1e-3,
            record_stride: 10,
            params: StabilizationParams::default(),
            g: 1.0,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(SimError::InvalidConfig(format!("dt must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(SimError::InvalidConfig("record_stride must be at least 1".into()));
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(SimError::InvalidConfig(format!("g must be positive, got {}", self.g)));
        }
        if let Scenario::Quad {
            initial,
            extension: ThrustExtension::Multiplicative,
            ..
        } = &self.scenario
        {
            if !(initial.f > 0.0) {
                return Err(SimError::InvalidConfig(
                    "multiplicative thrust extension needs f(0) > 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Rigid,
    Quad,
    ZsDecay,
}

/// Quantities recorded at one instant.
///
/// For the `Z_s` scenario `err_r` is `||Z_s||` (equal to `||dR||` when
/// `Z_k = 0`) and `ortho_residual`, `v_tilde` are their linearisations
/// `2 ||Z_s||` and `k_e ||Z_s||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetrics {
    pub err_r: f64,
    pub err_omega: f64,
    pub err_x: Option<f64>,
    pub err_xdot: Option<f64>,
    pub f: Option<f64>,
    pub ortho_residual: f64,
    pub v_tilde: f64,
    pub q: Option<f64>,
}

impl StepMetrics {
    /// Sum of all tracking error norms.
    pub fn total_error(&self) -> f64 {
        self.err_r + self.err_omega + self.err_x.unwrap_or(0.0) + self.err_xdot.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `u` (3) for rigid runs, `u` (3) then `q` for quad runs, empty otherwise.
    pub controls: Vec<Vec<f64>>,
    pub metrics: Vec<StepMetrics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_errors(&self) -> Vec<f64> {
        self.metrics.iter().map(StepMetrics::total_error).collect()
    }

    /// Rotation block of the recorded state at `index`.
    pub fn attitude(&self, index: usize) -> Mat3 {
        read_mat(&self.states[index], 0)
    }
}

fn read_mat(y: &[f64], at: usize) -> Mat3 {
    Mat3::from_row_slice(&y[at..at + 9])
}

fn write_mat(y: &mut [f64], at: usize, m: &Mat3) {
    for i in 0..3 {
        for j in 0..3 {
            y[at + 3 * i + j] = m[(i, j)];
        }
    }
}

fn read_vec(y: &[f64], at: usize) -> Vec3 {
    Vec3::new(y[at], y[at + 1], y[at + 2])
}

fn write_vec(y: &mut [f64], at: usize, v: &Vec3) {
    y[at..at + 3].copy_from_slice(v.as_slice());
}

fn unpack_rigid(y: &[f64]) -> RigidState {
    RigidState {
        r: read_mat(y, 0),
        omega: read_vec(y, 9),
    }
}

fn unpack_quad(y: &[f64]) -> QuadState {
    QuadState {
        r: read_mat(y, 0),
        omega: read_vec(y, 9),
        x: read_vec(y, 12),
        v: read_vec(y, 15),
        f: y[18],
        f_dot: y[19],
    }
}

fn unpack_quad_mul(y: &[f64]) -> QuadStateMul {
    QuadStateMul {
        r: read_mat(y, 0),
        omega: read_vec(y, 9),
        x: read_vec(y, 12),
        v: read_vec(y, 15),
        f: y[18],
        h: y[19],
    }
}

fn pack_quad_parts(y: &mut [f64], r: &Mat3, omega: &Vec3, x: &Vec3, v: &Vec3, f: f64, last: f64) {
    write_mat(y, 0, r);
    write_vec(y, 9, omega);
    write_vec(y, 12, x);
    write_vec(y, 15, v);
    y[18] = f;
    y[19] = last;
}

/// Additive-thrust view of a quad state vector.
fn quad_view(y: &[f64], extension: ThrustExtension) -> QuadState {
    match extension {
        ThrustExtension::Additive => unpack_quad(y),
        ThrustExtension::Multiplicative => unpack_quad_mul(y).to_additive(),
    }
}

fn initial_vector(cfg: &SimConfig) -> Vec<f64> {
    match &cfg.scenario {
        Scenario::Rigid { controller, initial } => {
            let mut y = vec![0.0; if controller.has_integral() { 15 } else { 12 }];
            write_mat(&mut y, 0, &initial.r);
            write_vec(&mut y, 9, &initial.omega);
            y
        }
        Scenario::Quad {
            controller,
            initial,
            extension,
            ..
        } => {
            let mut y = vec![0.0; if controller.has_integral() { 24 } else { 20 }];
            let last = match extension {
                ThrustExtension::Additive => initial.f_dot,
                ThrustExtension::Multiplicative => initial.f_dot / initial.f,
            };
            pack_quad_parts(&mut y, &initial.r, &initial.omega, &initial.x, &initial.v, initial.f, last);
            y
        }
        Scenario::ZsDecay { z_s0 } => {
            let mut y = vec![0.0; 9];
            write_mat(&mut y, 0, z_s0);
            y
        }
    }
}

fn control_err(t: f64) -> impl Fn(ControlError) -> SimError {
    move |source| SimError::Control { t, source }
}

fn quad_integrals(y: &[f64], controller: &QuadController) -> (Vec3, f64) {
    if controller.has_integral() {
        (read_vec(y, 20), y[23])
    } else {
        (Vec3::zeros(), 0.0)
    }
}

/// Derivative of the closed-loop state vector.
fn closed_loop(cfg: &SimConfig, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), SimError> {
    let p = &cfg.params;
    match &cfg.scenario {
        Scenario::Rigid { controller, .. } => {
            let s = unpack_rigid(y);
            let reference = reference_rigid(t);
            let integral = if controller.has_integral() {
                read_vec(y, 12)
            } else {
                Vec3::zeros()
            };
            let u = controller.control(&s, &reference, &integral).map_err(control_err(t))?;
            let d = rigid_rhs_modified(&s, &u, p);
            write_mat(dy, 0, &d.r);
            write_vec(dy, 9, &d.omega);
            if controller.has_integral() {
                let e = error_coords(&s, &reference.r0, &reference.omega0);
                write_vec(dy, 12, &e.z_k);
            }
        }
        Scenario::Quad {
            controller,
            extension,
            disturbed,
            ..
        } => {
            let reference = reference_quad(t, cfg.g);
            let s = quad_view(y, *extension);
            let integrals = quad_integrals(y, controller);
            let (u, q) = controller.control(&s, &reference, &integrals).map_err(control_err(t))?;
            let d = if *disturbed { disturbance(t) } else { Vec3::zeros() };
            match extension {
                ThrustExtension::Additive => {
                    let ds = quad_rhs_modified(&s, &u, q, p, cfg.g, &d);
                    pack_quad_parts(dy, &ds.r, &ds.omega, &ds.x, &ds.v, ds.f, ds.f_dot);
                }
                ThrustExtension::Multiplicative => {
                    let sm = unpack_quad_mul(y);
                    let qm = multiplicative_input(q, sm.f, sm.h);
                    let ds = quad_rhs_mul_ext(&sm, &u, qm, p, cfg.g, &d);
                    pack_quad_parts(dy, &ds.r, &ds.omega, &ds.x, &ds.v, ds.f, ds.h);
                }
            }
            if controller.has_integral() {
                let e = crate::quadcopter::quad_error_coords(&s, &reference, p);
                write_vec(dy, 20, &e.dx);
                dy[23] = e.z_k.z;
            }
        }
        Scenario::ZsDecay { .. } => {
            let z_s = read_mat(y, 0);
            write_mat(dy, 0, &z_s_rate(&z_s, &reference_rigid(t).omega0, p));
        }
    }
    Ok(())
}

/// Metrics and recorded controls at one instant.
fn observe(cfg: &SimConfig, t: f64, y: &[f64]) -> Result<(StepMetrics, Vec<f64>), SimError> {
    let p = &cfg.params;
    Ok(match &cfg.scenario {
        Scenario::Rigid { controller, .. } => {
            let s = unpack_rigid(y);
            let reference = reference_rigid(t);
            let integral = if controller.has_integral() {
                read_vec(y, 12)
            } else {
                Vec3::zeros()
            };
            let u = controller.control(&s, &reference, &integral).map_err(control_err(t))?;
            let m = StepMetrics {
                err_r: (s.r - reference.r0).norm(),
                err_omega: (s.omega - reference.omega0).norm(),
                err_x: None,
                err_xdot: None,
                f: None,
                ortho_residual: orthogonality_residual(&s.r),
                v_tilde: tilde_v(&s.r, p),
                q: None,
            };
            (m, u.as_slice().to_vec())
        }
        Scenario::Quad {
            controller, extension, ..
        } => {
            let reference = reference_quad(t, cfg.g);
            let s = quad_view(y, *extension);
            let integrals = quad_integrals(y, controller);
            let (u, q) = controller.control(&s, &reference, &integrals).map_err(control_err(t))?;
            let m = StepMetrics {
                err_r: (s.r - reference.r0).norm(),
                err_omega: (s.omega - reference.omega0).norm(),
                err_x: Some((s.x - reference.x0).norm()),
                err_xdot: Some((s.v - reference.x0_dot).norm()),
                f: Some(s.f),
                ortho_residual: orthogonality_residual(&s.r),
                v_tilde: tilde_v(&s.r, p),
                q: Some(q),
            };
            (m, vec![u.x, u.y, u.z, q])
        }
        Scenario::ZsDecay { .. } => {
            let n = read_mat(y, 0).norm();
            let m = StepMetrics {
                err_r: n,
                err_omega: 0.0,
                err_x: None,
                err_xdot: None,
                f: None,
                ortho_residual: 2.0 * n,
                v_tilde: p.k_e() * n * n,
                q: None,
            };
            (m, Vec::new())
        }
    })
}

/// Runs the closed loop over `[0, t_end]`, recording every
/// `record_stride`-th step (the initial state included).
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let kind = match cfg.scenario {
        Scenario::Rigid { .. } => TrajectoryKind::Rigid,
        Scenario::Quad { .. } => TrajectoryKind::Quad,
        Scenario::ZsDecay { .. } => TrajectoryKind::ZsDecay,
    };
    let steps = cfg.steps();
    let capacity = steps / cfg.record_stride + 1;
    let mut traj = Trajectory {
        kind,
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        controls: Vec::with_capacity(capacity),
        metrics: Vec::with_capacity(capacity),
    };
    let field = |t: f64, y: &[f64], dy: &mut [f64]| closed_loop(cfg, t, y, dy);

    let mut y = initial_vector(cfg);
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        if k % cfg.record_stride == 0 {
            let (m, u) = observe(cfg, t, &y)?;
            traj.times.push(t);
            traj.states.push(y.clone());
            traj.controls.push(u);
            traj.metrics.push(m);
        }
        if k < steps {
            y = rk4_step(&field, t, &y, cfg.dt)?;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxMetrics {
    pub err_r: f64,
    pub err_omega: f64,
    pub err_x: Option<f64>,
    pub err_xdot: Option<f64>,
    pub ortho_residual: f64,
    pub v_tilde: f64,
    pub total_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub samples: usize,
    pub t_final: f64,
    pub final_metrics: StepMetrics,
    pub final_total_error: f64,
    pub max: MaxMetrics,
    pub min_f: Option<f64>,
    /// Exponential rate of `v_tilde`, absent when it never rises above the
    /// fit floor (runs that start on the manifold).
    pub v_tilde_decay: Option<DecayFit>,
    pub error_decay: Option<DecayFit>,
    /// First recorded time after which the total error stays below
    /// [`SETTLING_THRESHOLD`]; absent if it never settles.
    pub settling_time: Option<f64>,
}

fn max_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.fold(None, |acc, v| match (acc, v) {
        (None, v) => v,
        (a, None) => a,
        (Some(a), Some(b)) => Some(a.max(b)),
    })
}

pub fn metrics_summary(traj: &Trajectory) -> Result<MetricsSummary, SimError> {
    let last = *traj.metrics.last().ok_or(SimError::EmptyTrajectory)?;
    let m = &traj.metrics;
    let fmax = |f: fn(&StepMetrics) -> f64| m.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let totals = traj.total_errors();
    let v: Vec<f64> = m.iter().map(|s| s.v_tilde).collect();

    let settling_time = match totals.iter().rposition(|e| !(*e < SETTLING_THRESHOLD)) {
        None => Some(traj.times[0]),
        Some(i) if i + 1 < totals.len() => Some(traj.times[i + 1]),
        Some(_) => None,
    };

    Ok(MetricsSummary {
        samples: traj.len(),
        t_final: *traj.times.last().unwrap_or(&0.0),
        final_metrics: last,
        final_total_error: last.total_error(),
        max: MaxMetrics {
            err_r: fmax(|s| s.err_r),
            err_omega: fmax(|s| s.err_omega),
            err_x: max_opt(m.iter().map(|s| s.err_x)),
            err_xdot: max_opt(m.iter().map(|s| s.err_xdot)),
            ortho_residual: fmax(|s| s.ortho_residual),
            v_tilde: fmax(|s| s.v_tilde),
            total_error: totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
        min_f: m
            .iter()
            .filter_map(|s| s.f)
            .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.min(f)))),
        v_tilde_decay: fit_decay_rate(&traj.times, &v).ok(),
        error_decay: fit_decay_rate(&traj.times, &totals).ok(),
        settling_time,
    })
}
