//! Quadcopter with a dynamically extended thrust.
//!
//! Plant (after torque cancellation, in the ambient space):
//!
//! ```text
//! R'   = R hat(Omega) - k_e R (R^T R - I)
//! W'   = u (+ R^T d)
//! x''  = -g e3 + f R e3 (+ d)
//! f''  = q
//! ```
//!
//! Linearised along a reference and written in the outputs
//! `(Z_s, dx, dx', dx'', dx''', z_k3, z_k3')` the error dynamics reduce, by the
//! feedback in [`assemble_controls`], to `dx'''' = v`, `z_k3'' = w` and the
//! self-decaying `Z_s' = [Z_s, hat(Omega0)] - 2 k_e Z_s`.

use crate::embedding::{modified_rhs, AmbientAttitude, StabilizationParams};
use crate::matlib::{commutator, e2, e3, hat, rot_exp, skew, sym, vee_of_skew_part, Mat3, Vec3};
use crate::rigid_body::reference_rigid;
use crate::stability::{matrix_polynomial_is_hurwitz, scalar_polynomial_is_hurwitz};
use crate::ControlError;

/// `B0` invertibility floor as a fraction of `g`.
pub const THRUST_FLOOR_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadState {
    pub r: Mat3,
    pub omega: Vec3,
    pub x: Vec3,
    pub v: Vec3,
    /// Thrust per unit mass.
    pub f: f64,
    pub f_dot: f64,
}

impl AmbientAttitude for QuadState {
    fn attitude(&self) -> &Mat3 {
        &self.r
    }
    fn attitude_mut(&mut self) -> &mut Mat3 {
        &mut self.r
    }
}

impl QuadState {
    /// Initial condition of the reproduced experiment.
    pub fn experiment_initial(g: f64) -> Self {
        QuadState {
            r: rot_exp(&e2(), 0.25 * std::f64::consts::PI).expect("unit axis"),
            omega: Vec3::zeros(),
            x: Vec3::new(-0.5 * g, -0.5 * g, 0.0),
            v: Vec3::zeros(),
            f: 2.0 * g,
            f_dot: 0.0,
        }
    }
}

/// State under the multiplicative extension `f' = f h`, `h' = q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadStateMul {
    pub r: Mat3,
    pub omega: Vec3,
    pub x: Vec3,
    pub v: Vec3,
    pub f: f64,
    pub h: f64,
}

impl AmbientAttitude for QuadStateMul {
    fn attitude(&self) -> &Mat3 {
        &self.r
    }
    fn attitude_mut(&mut self) -> &mut Mat3 {
        &mut self.r
    }
}

impl QuadStateMul {
    /// Requires `f > 0`; `h = f' / f`.
    pub fn from_additive(s: &QuadState) -> Option<Self> {
        (s.f > 0.0).then(|| QuadStateMul {
            r: s.r,
            omega: s.omega,
            x: s.x,
            v: s.v,
            f: s.f,
            h: s.f_dot / s.f,
        })
    }

    pub fn to_additive(&self) -> QuadState {
        QuadState {
            r: self.r,
            omega: self.omega,
            x: self.x,
            v: self.v,
            f: self.f,
            f_dot: self.f * self.h,
        }
    }
}

/// `h'` that produces a desired `f'' = q` under the multiplicative extension:
/// `f'' = f h^2 + f h'`.
pub fn multiplicative_input(q: f64, f: f64, h: f64) -> f64 {
    (q - f * h * h) / f
}

/// `d(t) = sin(2 pi (t - 3)) (1, 1, 1)` on `[3, 4]`, zero elsewhere.
pub fn disturbance(t: f64) -> Vec3 {
    if (3.0..=4.0).contains(&t) {
        Vec3::repeat((2.0 * std::f64::consts::PI * (t - 3.0)).sin())
    } else {
        Vec3::zeros()
    }
}

fn quad_rhs(s: &QuadState, input: &(Vec3, f64, f64, Vec3)) -> QuadState {
    let (u, q, g, d) = input;
    QuadState {
        r: s.r * hat(&s.omega),
        omega: u + s.r.transpose() * d,
        x: s.v,
        v: -*g * e3() + s.f * s.r * e3() + d,
        f: s.f_dot,
        f_dot: *q,
    }
}

/// Derivative of the modified extended quadcopter; `d = 0` is the nominal plant.
pub fn quad_rhs_modified(s: &QuadState, u: &Vec3, q: f64, p: &StabilizationParams, g: f64, d: &Vec3) -> QuadState {
    modified_rhs(quad_rhs, *p)(s, &(*u, q, g, *d))
}

fn quad_rhs_mul(s: &QuadStateMul, input: &(Vec3, f64, f64, Vec3)) -> QuadStateMul {
    let (u, q, g, d) = input;
    QuadStateMul {
        r: s.r * hat(&s.omega),
        omega: u + s.r.transpose() * d,
        x: s.v,
        v: -*g * e3() + s.f * s.r * e3() + d,
        f: s.f * s.h,
        h: *q,
    }
}

/// As [`quad_rhs_modified`] with the thrust block `f' = f h`, `h' = q`.
pub fn quad_rhs_mul_ext(s: &QuadStateMul, u: &Vec3, q: f64, p: &StabilizationParams, g: f64, d: &Vec3) -> QuadStateMul {
    modified_rhs(quad_rhs_mul, *p)(s, &(*u, q, g, *d))
}

/// Reference signals and the derivatives the controller needs at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub g: f64,
    pub r0: Mat3,
    pub r0_dot: Mat3,
    pub r0_ddot: Mat3,
    pub omega0: Vec3,
    pub u0: Vec3,
    pub u0_dot: Vec3,
    pub x0: Vec3,
    pub x0_dot: Vec3,
    pub x0_ddot: Vec3,
    pub f0: f64,
    pub f0_dot: f64,
    pub f0_ddot: f64,
    pub q0: f64,
    pub a0: Mat3,
    pub a0_dot: Mat3,
    pub a0_ddot: Mat3,
    pub b0: Mat3,
}

/// Reference: the rigid-body attitude reference, constant thrust `2g`, and
/// the position it generates.
pub fn reference_quad(t: f64, g: f64) -> ReferenceSample {
    let rr = reference_rigid(t);
    let (s, c) = t.sin_cos();
    let (s2, c2, c3) = ((2.0 * t).sin(), (2.0 * t).cos(), (3.0 * t).cos());

    let x0 = g * Vec3::new(
        0.5 * t * t + 4.0 / 9.0 * s - 0.5 * s * s + 2.0 / 9.0 * s * c * c,
        4.0 / 9.0 - 4.0 / 9.0 * c - 0.5 * c * s - 2.0 / 9.0 * c * s * s,
        0.5 * s * s,
    );
    let x0_dot = g * Vec3::new(
        t - 0.5 * s2 + 0.5 * c + c3 / 6.0,
        2.0 / 3.0 * s * s * s + s * s - 0.5,
        0.5 * s2,
    );
    let x0_ddot = g * Vec3::new(2.0 * (s - c * c) * s, 2.0 * (1.0 + s) * s * c, c2);

    let (f0, f0_dot, f0_ddot) = (2.0 * g, 0.0, 0.0);
    let w_hat = hat(&rr.omega0);
    let r0_dot = rr.r0 * w_hat;
    let r0_ddot = rr.r0 * (w_hat * w_hat + hat(&rr.u0));
    ReferenceSample {
        g,
        r0: rr.r0,
        r0_dot,
        r0_ddot,
        omega0: rr.omega0,
        u0: rr.u0,
        u0_dot: rr.u0_dot,
        x0,
        x0_dot,
        x0_ddot,
        f0,
        f0_dot,
        f0_ddot,
        q0: f0_ddot,
        a0: f0 * rr.r0,
        a0_dot: f0_dot * rr.r0 + f0 * r0_dot,
        a0_ddot: f0_ddot * rr.r0 + 2.0 * f0_dot * r0_dot + f0 * r0_ddot,
        b0: Mat3::from_diagonal(&Vec3::new(f0, -f0, 1.0)),
    }
}

impl ReferenceSample {
    pub fn state(&self) -> QuadState {
        QuadState {
            r: self.r0,
            omega: self.omega0,
            x: self.x0,
            v: self.x0_dot,
            f: self.f0,
            f_dot: self.f0_dot,
        }
    }

    fn b0_inverse(&self) -> Result<Mat3, ControlError> {
        let floor = THRUST_FLOOR_REL * self.g.abs();
        if !(self.f0.abs() >= floor && self.f0.abs() > 0.0) {
            return Err(ControlError::SingularB0 { f0: self.f0, floor });
        }
        Ok(Mat3::from_diagonal(&Vec3::new(1.0 / self.f0, -1.0 / self.f0, 1.0)))
    }
}

/// `Z_s' = [Z_s, hat(Omega0)] - 2 k_e Z_s`.
pub fn z_s_rate(z_s: &Mat3, omega0: &Vec3, p: &StabilizationParams) -> Mat3 {
    commutator(z_s, &hat(omega0)) - 2.0 * p.k_e() * z_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadErrorCoords {
    pub z_s: Mat3,
    pub z_k: Vec3,
    /// `(Z_k')^vee = z_k x Omega0 + dOmega`.
    pub z_k_rate: Vec3,
    pub d_omega: Vec3,
    pub dx: Vec3,
    pub dx_dot: Vec3,
    pub df: f64,
    pub df_dot: f64,
    pub dx_ddot: Vec3,
    pub dx_dddot: Vec3,
}

/// `df R0 e3 + A0 (Z_s + Z_k) e3`.
fn accel_error(df: f64, z: &Mat3, r: &ReferenceSample) -> Vec3 {
    (df * r.r0 + r.a0 * z) * e3()
}

/// Part of `dx'''` that does not involve `df'` or `Z_k'`.
fn jerk_error_drift(df: f64, z_s: &Mat3, z_k: &Mat3, r: &ReferenceSample, p: &StabilizationParams) -> Vec3 {
    (df * r.r0_dot + r.a0_dot * (z_s + z_k) + r.a0 * z_s_rate(z_s, &r.omega0, p)) * e3()
}

pub fn quad_error_coords(s: &QuadState, r: &ReferenceSample, p: &StabilizationParams) -> QuadErrorCoords {
    let rel = r.r0.transpose() * s.r;
    let z_s = sym(&(rel - Mat3::identity()));
    let z_k = vee_of_skew_part(&skew(&rel));
    let d_omega = s.omega - r.omega0;
    let z_k_rate = z_k.cross(&r.omega0) + d_omega;
    let df = s.f - r.f0;
    let df_dot = s.f_dot - r.f0_dot;
    let zk_hat = hat(&z_k);
    let dx_ddot = accel_error(df, &(z_s + zk_hat), r);
    let dx_dddot = (df_dot * r.r0 + r.a0 * hat(&z_k_rate)) * e3() + jerk_error_drift(df, &z_s, &zk_hat, r, p);
    QuadErrorCoords {
        z_s,
        z_k,
        z_k_rate,
        d_omega,
        dx: s.x - r.x0,
        dx_dot: s.v - r.x0_dot,
        df,
        df_dot,
        dx_ddot,
        dx_dddot,
    }
}

/// Error coordinates after the change to integrator-chain outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputCoords {
    pub z_s: Mat3,
    pub dx: Vec3,
    pub dx_dot: Vec3,
    pub dx_ddot: Vec3,
    pub dx_dddot: Vec3,
    pub z_k3: f64,
    pub z_k3_rate: f64,
}

impl From<&QuadErrorCoords> for OutputCoords {
    fn from(e: &QuadErrorCoords) -> Self {
        OutputCoords {
            z_s: e.z_s,
            dx: e.dx,
            dx_dot: e.dx_dot,
            dx_ddot: e.dx_ddot,
            dx_dddot: e.dx_dddot,
            z_k3: e.z_k.z,
            z_k3_rate: e.z_k_rate.z,
        }
    }
}

/// The coordinates `(z_k, z_k', df, df')` recovered from [`OutputCoords`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredCoords {
    pub z_k: Vec3,
    pub z_k_rate: Vec3,
    pub df: f64,
    pub df_dot: f64,
}

/// Inverse of the coordinate change:
/// `(z_k2, z_k1, df) = B0^{-1} R0^T (dx'' - A0 Z_s e3)` and
/// `(z_k2', z_k1', df') = B0^{-1} R0^T (dx''' - drift)`.
pub fn recover_coords(o: &OutputCoords, r: &ReferenceSample, p: &StabilizationParams) -> Result<RecoveredCoords, ControlError> {
    let map = r.b0_inverse()? * r.r0.transpose();
    let a = map * (o.dx_ddot - r.a0 * o.z_s * e3());
    let (z_k2, z_k1, df) = (a.x, a.y, a.z);
    let z_k = Vec3::new(z_k1, z_k2, o.z_k3);
    let b = map * (o.dx_dddot - jerk_error_drift(df, &o.z_s, &hat(&z_k), r, p));
    Ok(RecoveredCoords {
        z_k,
        z_k_rate: Vec3::new(b.y, b.x, o.z_k3_rate),
        df,
        df_dot: b.z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralGains {
    pub k_i: Mat3,
    pub a_i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadGains {
    pub k0: Mat3,
    pub k1: Mat3,
    pub k2: Mat3,
    pub k3: Mat3,
    pub a0: f64,
    pub a1: f64,
    pub integral: Option<IntegralGains>,
}

impl Default for QuadGains {
    /// Position poles at `-2 +- 2j`, yaw-error poles at `-4 +- 2j`.
    fn default() -> Self {
        let i = Mat3::identity();
        QuadGains {
            k0: 64.0 * i,
            k1: 64.0 * i,
            k2: 32.0 * i,
            k3: 8.0 * i,
            a0: 20.0,
            a1: 8.0,
            integral: None,
        }
    }
}

impl QuadGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        match &self.integral {
            None => {
                if !matrix_polynomial_is_hurwitz(&[self.k0, self.k1, self.k2, self.k3]) {
                    return Err(ControlError::invalid(
                        "quad",
                        "Hurwitz check failed: det(L^4 I + L^3 K3 + L^2 K2 + L K1 + K0) has a root with non-negative real part",
                    ));
                }
                if !(self.a0 > 0.0 && self.a1 > 0.0) || !scalar_polynomial_is_hurwitz(&[self.a0, self.a1]) {
                    return Err(ControlError::invalid(
                        "quad",
                        format!("Hurwitz check failed: a0, a1 must be positive, got {}, {}", self.a0, self.a1),
                    ));
                }
            }
            Some(ig) => {
                if !matrix_polynomial_is_hurwitz(&[ig.k_i, self.k0, self.k1, self.k2, self.k3]) {
                    return Err(ControlError::invalid(
                        "quad-pid",
                        "Hurwitz check failed: det(L^5 I + L^4 K3 + L^3 K2 + L^2 K1 + L K0 + K_I) has a root with non-negative real part",
                    ));
                }
                if !scalar_polynomial_is_hurwitz(&[ig.a_i, self.a0, self.a1]) {
                    return Err(ControlError::invalid(
                        "quad-pid",
                        "Hurwitz check failed: L^3 + a1 L^2 + a0 L + a_I has a root with non-negative real part",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn vw_unchecked(g: &QuadGains, e: &QuadErrorCoords, integrals: &(Vec3, f64)) -> (Vec3, f64) {
    let mut v = -g.k3 * e.dx_dddot - g.k2 * e.dx_ddot - g.k1 * e.dx_dot - g.k0 * e.dx;
    let mut w = -g.a1 * e.z_k_rate.z - g.a0 * e.z_k.z;
    if let Some(ig) = &g.integral {
        v -= ig.k_i * integrals.0;
        w -= ig.a_i * integrals.1;
    }
    (v, w)
}

/// Outer-loop inputs `(v, w)` for the integrator chains. `integrals` holds
/// `(int dx, int z_k3)` and is ignored without integral gains.
pub fn outer_loop_vw(g: &QuadGains, e: &QuadErrorCoords, integrals: &(Vec3, f64)) -> Result<(Vec3, f64), ControlError> {
    g.validate()?;
    Ok(vw_unchecked(g, e, integrals))
}

/// Maps `(v, w)` back to the plant inputs `(u, q)`.
pub fn assemble_controls(
    v: &Vec3,
    w: f64,
    e: &QuadErrorCoords,
    r: &ReferenceSample,
    p: &StabilizationParams,
) -> Result<(Vec3, f64), ControlError> {
    let b0_inv = r.b0_inverse()?;
    let w_hat = hat(&r.omega0);
    let z_s_dot = z_s_rate(&e.z_s, &r.omega0, p);
    let z_k_hat = hat(&e.z_k);
    let z_k_dot_hat = hat(&e.z_k_rate);
    let c = 2.0 * e.df_dot * r.r0_dot
        + 2.0 * r.a0_dot * (z_s_dot + z_k_dot_hat)
        + e.df * r.r0_ddot
        + r.a0_ddot * (e.z_s + z_k_hat)
        + r.a0
            * (commutator(&z_s_dot, &w_hat) + commutator(&e.z_s, &hat(&r.u0)) - 2.0 * p.k_e() * z_s_dot);
    let sol = b0_inv * r.r0.transpose() * (v - c * e3());
    let u_tilde = Vec3::new(sol.y, sol.x, w);
    let du = -e.z_k_rate.cross(&r.omega0) - e.z_k.cross(&r.u0) + u_tilde;
    Ok((r.u0 + du, r.q0 + sol.z))
}

/// A validated quadcopter tracking law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadController {
    gains: QuadGains,
    params: StabilizationParams,
}

impl QuadController {
    pub fn new(gains: QuadGains, params: StabilizationParams) -> Result<Self, ControlError> {
        gains.validate()?;
        Ok(Self { gains, params })
    }

    pub fn gains(&self) -> &QuadGains {
        &self.gains
    }

    pub fn has_integral(&self) -> bool {
        self.gains.integral.is_some()
    }

    /// `(u, q)` for the additive extension `f'' = q`.
    pub fn control(&self, s: &QuadState, r: &ReferenceSample, integrals: &(Vec3, f64)) -> Result<(Vec3, f64), ControlError> {
        let e = quad_error_coords(s, r, &self.params);
        let (v, w) = vw_unchecked(&self.gains, &e, integrals);
        assemble_controls(&v, w, &e, r, &self.params)
    }
}
