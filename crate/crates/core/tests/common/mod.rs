//! Checks shared by the property and acceptance targets. Each returns a short
//! description of the worst case on success and of the violation on failure.

#![allow(dead_code)]

use std::f64::consts::PI;

use manifold_ctrl::embedding::{grad_tilde_v, tilde_v};
use manifold_ctrl::matlib::{commutator, e2, frob, hat, rot_exp, vee, Mat3, Vec3};
use manifold_ctrl::odesim::{rk4_step, simulate, Scenario, SimConfig, SimError, ThrustExtension, Trajectory};
use manifold_ctrl::quadcopter::{
    quad_error_coords, quad_rhs_mul_ext, recover_coords, reference_quad, OutputCoords, QuadController, QuadGains,
    QuadState, QuadStateMul,
};
use manifold_ctrl::rigid_body::{RigidController, RigidGains, RigidState, RigidVariant};
use manifold_ctrl::StabilizationParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut impl Rng, scale: f64) -> Vec3 {
    Vec3::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn rand_mat(rng: &mut impl Rng, scale: f64) -> Mat3 {
    Mat3::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn rand_rotation(rng: &mut impl Rng) -> Mat3 {
    let axis = loop {
        let a = rand_vec(rng, 1.0);
        if a.norm() > 0.1 {
            break a.normalize();
        }
    };
    rot_exp(&axis, rng.random_range(-PI..PI)).expect("unit axis")
}

pub fn rand_symmetric(rng: &mut impl Rng, scale: f64) -> Mat3 {
    let a = rand_mat(rng, scale);
    0.5 * (a + a.transpose())
}

pub fn unit_params() -> StabilizationParams {
    StabilizationParams::new(1.0).expect("positive gain")
}

/// Rigid scenario with default gains for `variant`, started at rotation angle
/// `angle` about `e2` and body rate `(-1, -1, -1)`.
pub fn rigid_config(variant: RigidVariant, angle: f64, t_end: f64) -> SimConfig {
    let controller = RigidController::new(RigidGains::defaults(variant)).expect("default gains are valid");
    let mut cfg = SimConfig::new(Scenario::Rigid {
        controller,
        initial: RigidState {
            r: rot_exp(&e2(), angle).expect("unit axis"),
            omega: Vec3::repeat(-1.0),
        },
    });
    cfg.t_end = t_end;
    cfg
}

pub fn quad_config(extension: ThrustExtension, disturbed: bool, t_end: f64) -> SimConfig {
    let controller = QuadController::new(QuadGains::default(), unit_params()).expect("default gains are valid");
    let mut cfg = SimConfig::new(Scenario::Quad {
        controller,
        initial: QuadState::experiment_initial(1.0),
        extension,
        disturbed,
    });
    cfg.t_end = t_end;
    cfg
}

pub fn algebra_identities(seed: u64, samples: usize) -> Check {
    let mut rng = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (u, v) = (rand_vec(&mut rng, 2.0), rand_vec(&mut rng, 2.0));
        worst = worst.max((frob(&hat(&u), &hat(&v)) - 2.0 * u.dot(&v)).abs());
        let c = vee(&commutator(&hat(&u), &hat(&v))).map_err(|e| e.to_string())?;
        worst = worst.max((c - u.cross(&v)).norm());
        let r = rand_rotation(&mut rng);
        let (a, b) = (rand_mat(&mut rng, 2.0), rand_mat(&mut rng, 2.0));
        worst = worst.max((frob(&(r * a), &(r * b)) - frob(&a, &b)).abs());
        let axis = rand_vec(&mut rng, 1.0).normalize();
        let (t1, t2) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let d = (rot_exp(&axis, t1).unwrap() - rot_exp(&axis, t2).unwrap()).norm();
        if d > 2.0 * 2f64.sqrt() + 1e-12 {
            return Err(format!("rotation distance {d} exceeds 2 sqrt 2"));
        }
    }
    if worst < 1e-12 {
        Ok(format!("worst residual {worst:.2e} over {samples} samples"))
    } else {
        Err(format!("residual {worst:.2e} exceeds 1e-12"))
    }
}

/// Central differences with step `1e-6` against `<grad, D>` at random ambient points.
pub fn gradient_fd(seed: u64, samples: usize) -> Check {
    let mut rng = rng(seed);
    let p = StabilizationParams::new(1.3).unwrap();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let r = rand_rotation(&mut rng) + rand_mat(&mut rng, 0.5);
        let d = rand_mat(&mut rng, 1.0);
        let fd = (tilde_v(&(r + h * d), &p) - tilde_v(&(r - h * d), &p)) / (2.0 * h);
        let exact = frob(&grad_tilde_v(&r, &p), &d);
        let rel = (fd - exact).abs() / exact.abs().max(1e-3);
        worst = worst.max(rel);
    }
    if worst < 1e-6 {
        Ok(format!("worst relative error {worst:.2e} over {samples} points"))
    } else {
        Err(format!("relative error {worst:.2e} exceeds 1e-6"))
    }
}

/// Forward map to output coordinates then back, at random error states and times.
pub fn coordinate_round_trip(seed: u64, states: usize, times: usize) -> Check {
    let mut rng = rng(seed);
    let p = unit_params();
    let mut worst = 0.0f64;
    for _ in 0..times {
        let reference = reference_quad(rng.random_range(0.0..20.0), 1.0);
        for _ in 0..states {
            let mut s = reference.state();
            s.r = reference.r0 * rot_exp(&rand_vec(&mut rng, 1.0).normalize(), rng.random_range(-2.5..2.5)).unwrap()
                + rand_mat(&mut rng, 0.05);
            s.omega += rand_vec(&mut rng, 1.0);
            s.x += rand_vec(&mut rng, 1.0);
            s.v += rand_vec(&mut rng, 1.0);
            s.f += rng.random_range(-1.0..1.0);
            s.f_dot += rng.random_range(-1.0..1.0);
            let e = quad_error_coords(&s, &reference, &p);
            let back = recover_coords(&OutputCoords::from(&e), &reference, &p).map_err(|e| e.to_string())?;
            let err = (back.z_k - e.z_k)
                .norm()
                .max((back.z_k_rate - e.z_k_rate).norm())
                .max((back.df - e.df).abs())
                .max((back.df_dot - e.df_dot).abs());
            worst = worst.max(err);
        }
    }
    if worst < 1e-10 {
        Ok(format!("worst error {worst:.2e} over {} samples", states * times))
    } else {
        Err(format!("round-trip error {worst:.2e} exceeds 1e-10"))
    }
}

fn max_ortho(traj: &Trajectory) -> f64 {
    traj.metrics.iter().map(|m| m.ortho_residual).fold(0.0, f64::max)
}

/// Runs started on `SO(3)` stay within `1e-6` of it over `[0, 20]`.
pub fn on_manifold_invariance() -> Check {
    let mut worst = 0.0f64;
    for v in RigidVariant::ALL {
        let traj = simulate(&rigid_config(v, 0.99 * PI, 20.0)).map_err(|e| e.to_string())?;
        worst = worst.max(max_ortho(&traj));
    }
    for ext in [ThrustExtension::Additive, ThrustExtension::Multiplicative] {
        let traj = simulate(&quad_config(ext, true, 20.0)).map_err(|e| e.to_string())?;
        worst = worst.max(max_ortho(&traj));
    }
    if worst < 1e-6 {
        Ok(format!("max |R^T R - I| = {worst:.2e}"))
    } else {
        Err(format!("max |R^T R - I| = {worst:.2e} exceeds 1e-6"))
    }
}

fn final_state(variant: RigidVariant, dt: f64) -> Result<Vec<f64>, SimError> {
    let mut cfg = rigid_config(variant, 0.99 * PI, 1.0);
    cfg.dt = dt;
    cfg.record_stride = 1;
    simulate(&cfg).map(|t| t.states.last().cloned().unwrap_or_default())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Ratio of global errors at `t = 1` for `dt = 0.01` and `dt = 0.005`,
/// measured against a `dt = 1e-4` run.
pub fn rk4_order_factor(variant: RigidVariant) -> Result<f64, String> {
    let fine = final_state(variant, 1e-4).map_err(|e| e.to_string())?;
    let coarse = final_state(variant, 0.01).map_err(|e| e.to_string())?;
    let half = final_state(variant, 0.005).map_err(|e| e.to_string())?;
    Ok(distance(&coarse, &fine) / distance(&half, &fine))
}

pub fn rk4_order() -> Check {
    let mut factors = Vec::new();
    for v in [RigidVariant::P4, RigidVariant::P2, RigidVariant::Lee] {
        let k = rk4_order_factor(v)?;
        if !(8.0..=32.0).contains(&k) {
            return Err(format!("{v}: step-halving factor {k:.2} outside [8, 32]"));
        }
        factors.push(format!("{v} {k:.2}"));
    }
    Ok(format!("factors {}", factors.join(", ")))
}

/// Thrust stays positive under the multiplicative extension, both in the
/// closed loop and under random piecewise-constant inputs.
pub fn multiplicative_positivity(seed: u64) -> Check {
    let traj = simulate(&quad_config(ThrustExtension::Multiplicative, true, 20.0)).map_err(|e| e.to_string())?;
    let closed = traj.metrics.iter().filter_map(|m| m.f).fold(f64::INFINITY, f64::min);
    if !(closed > 0.0) {
        return Err(format!("closed-loop min f = {closed}"));
    }
    let mut rng = rng(seed);
    let p = unit_params();
    let dt = 1e-3;
    let mut open = f64::INFINITY;
    for _ in 0..20 {
        let mut s = QuadStateMul {
            r: rand_rotation(&mut rng),
            omega: rand_vec(&mut rng, 1.0),
            x: Vec3::zeros(),
            v: Vec3::zeros(),
            f: rng.random_range(0.01..3.0),
            h: rng.random_range(-2.0..2.0),
        };
        let (mut u, mut q) = (Vec3::zeros(), 0.0);
        for k in 0..2000 {
            if k % 100 == 0 {
                u = rand_vec(&mut rng, 5.0);
                q = rng.random_range(-20.0..20.0);
            }
            let y = pack_mul(&s);
            let field = |_: f64, y: &[f64], dy: &mut [f64]| {
                let d = quad_rhs_mul_ext(&unpack_mul(y), &u, q, &p, 1.0, &Vec3::zeros());
                dy.copy_from_slice(&pack_mul(&d));
                Ok(())
            };
            s = unpack_mul(&rk4_step(&field, k as f64 * dt, &y, dt).map_err(|e| e.to_string())?);
            open = open.min(s.f);
            if !(s.f > 0.0) {
                return Err(format!("open-loop f reached {} at step {k}", s.f));
            }
        }
    }
    Ok(format!("closed-loop min f {closed:.4}, random-input min f {open:.2e}"))
}

fn pack_mul(s: &QuadStateMul) -> Vec<f64> {
    let mut y: Vec<f64> = s.r.transpose().iter().copied().collect();
    y.extend(s.omega.iter().chain(s.x.iter()).chain(s.v.iter()));
    y.push(s.f);
    y.push(s.h);
    y
}

fn unpack_mul(y: &[f64]) -> QuadStateMul {
    QuadStateMul {
        r: Mat3::from_row_slice(&y[0..9]),
        omega: Vec3::from_column_slice(&y[9..12]),
        x: Vec3::from_column_slice(&y[12..15]),
        v: Vec3::from_column_slice(&y[15..18]),
        f: y[18],
        h: y[19],
    }
}

/// Largest value over samples with `lo <= t <= hi`.
pub fn max_over(times: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Value at the sample closest to `t`.
pub fn value_at(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    values[i]
}

/// Peaks over consecutive windows of width `w` never increase after the
/// window holding the global peak.
pub fn windowed_monotone(times: &[f64], values: &[f64], w: f64) -> Result<(), String> {
    let t_end = times.last().copied().unwrap_or(0.0);
    let n = (t_end / w).ceil() as usize;
    let peaks: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = (i as f64 * w, (i + 1) as f64 * w);
            times
                .iter()
                .zip(values)
                .filter(|(t, _)| **t >= lo && **t < hi)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        })
        .collect();
    let start = peaks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    for i in start + 1..peaks.len() {
        if peaks[i] > peaks[i - 1] {
            return Err(format!("window peak rises at t = {}: {:.3e} > {:.3e}", i as f64 * w, peaks[i], peaks[i - 1]));
        }
    }
    Ok(())
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}
