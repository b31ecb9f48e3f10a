//! Fully actuated rigid body.
//!
//! After the torque `tau = I u - (I Omega) x Omega` cancels the gyroscopic
//! term, the plant is `R' = R hat(Omega)`, `Omega' = u`. It is simulated in the
//! ambient space with the transversal term `-k_e R (R^T R - I)` added.
//!
//! Tracking errors are expressed through `Z = R0^T (R - R0)`, split into
//! `Z_s = Sym(Z)` (decays on its own at rate `2 k_e`) and `z_k = Skew(Z)^vee`,
//! which with `dOmega = Omega - Omega0` obeys
//! `z_k' = z_k x Omega0 + dOmega`, `dOmega' = du`.

use serde::{Deserialize, Serialize};

use crate::embedding::{modified_rhs, AmbientAttitude, StabilizationParams};
use crate::matlib::{hat, skew, sym, vee_of_skew_part, Mat3, Vec3};
use crate::stability::{check_hurwitz_pair, check_hurwitz_triple, is_spd, symmetric_eigen_bounds};
use crate::ControlError;

/// Rejects `1 + tr(R0^T R)` below this in [`lee_u`].
pub const LEE_SINGULARITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidState {
    pub r: Mat3,
    pub omega: Vec3,
}

impl AmbientAttitude for RigidState {
    fn attitude(&self) -> &Mat3 {
        &self.r
    }
    fn attitude_mut(&mut self) -> &mut Mat3 {
        &mut self.r
    }
}

/// Symmetric positive definite moment of inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    mat: Mat3,
    inv: Mat3,
}

impl Inertia {
    pub fn new(mat: Mat3) -> Result<Self, ControlError> {
        if (mat - mat.transpose()).norm() > 1e-12 || !is_spd(&mat) {
            return Err(ControlError::BadGains(
                "inertia must be symmetric positive definite".into(),
            ));
        }
        let inv = mat
            .try_inverse()
            .ok_or_else(|| ControlError::BadGains("inertia is singular".into()))?;
        Ok(Self { mat, inv })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.mat
    }

    /// `I^{-1}((I Omega) x Omega) + I^{-1} tau`, the uncancelled body dynamics.
    pub fn omega_dot(&self, omega: &Vec3, torque: &Vec3) -> Vec3 {
        self.inv * (self.mat * omega).cross(omega) + self.inv * torque
    }
}

/// `R' = R hat(Omega)`, `Omega' = u`.
pub fn rigid_rhs(s: &RigidState, u: &Vec3) -> RigidState {
    RigidState {
        r: s.r * hat(&s.omega),
        omega: *u,
    }
}

/// `R' = R hat(Omega) - k_e R (R^T R - I)`, `Omega' = u`.
pub fn rigid_rhs_modified(s: &RigidState, u: &Vec3, p: &StabilizationParams) -> RigidState {
    modified_rhs(rigid_rhs, *p)(s, u)
}

/// Torque realising the virtual input `u`: `I (u - I^{-1}((I Omega) x Omega))`.
pub fn torque_from_u(s: &RigidState, u: &Vec3, inertia: &Inertia) -> Vec3 {
    let i = inertia.matrix();
    i * u - (i * s.omega).cross(&s.omega)
}

/// Reference attitude, angular velocity and their derivatives at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidReference {
    pub r0: Mat3,
    pub omega0: Vec3,
    /// `Omega0'`
    pub u0: Vec3,
    /// `Omega0''`
    pub u0_dot: Vec3,
}

pub fn reference_rigid(t: f64) -> RigidReference {
    let (s, c) = t.sin_cos();
    let r0 = Mat3::new(
        c * c,
        (1.0 + s) * c * s,
        (s - c * c) * s,
        -s * c,
        c * c - s * s * s,
        (1.0 + s) * c * s,
        s,
        -c * s,
        c * c,
    );
    let omega0 = Vec3::new(-1.0 - s, (-1.0 + s) * c, -s - c * c);
    let u0 = Vec3::new(-c, s + c * c - s * s, -c + 2.0 * c * s);
    let u0_dot = Vec3::new(s, c - 4.0 * s * c, s + 2.0 * (c * c - s * s));
    RigidReference {
        r0,
        omega0,
        u0,
        u0_dot,
    }
}

/// `max ||Omega0(t)||` over the grid `0, step, 2 step, ... <= horizon`.
pub fn reference_omega_bound(horizon: f64, step: f64) -> f64 {
    let n = (horizon / step).floor() as usize;
    (0..=n)
        .map(|k| reference_rigid(k as f64 * step).omega0.norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCoords {
    pub z_s: Mat3,
    pub z_k: Vec3,
    pub d_omega: Vec3,
}

impl ErrorCoords {
    /// `z_k' = z_k x Omega0 + dOmega` along the linearised flow.
    pub fn z_k_rate(&self, omega0: &Vec3) -> Vec3 {
        self.z_k.cross(omega0) + self.d_omega
    }
}

pub fn error_coords(s: &RigidState, r0: &Mat3, omega0: &Vec3) -> ErrorCoords {
    let rel = r0.transpose() * s.r;
    let z = rel - Mat3::identity();
    ErrorCoords {
        z_s: sym(&z),
        // Skew(R0^T R) == Skew(Z): the identity has no skew part.
        z_k: vee_of_skew_part(&skew(&rel)),
        d_omega: s.omega - omega0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RigidVariant {
    P1,
    P2,
    P3,
    P4,
    P5,
    Lee,
}

impl RigidVariant {
    pub const ALL: [RigidVariant; 6] = [
        RigidVariant::P1,
        RigidVariant::P2,
        RigidVariant::P3,
        RigidVariant::P4,
        RigidVariant::P5,
        RigidVariant::Lee,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RigidVariant::P1 => "p1",
            RigidVariant::P2 => "p2",
            RigidVariant::P3 => "p3",
            RigidVariant::P4 => "p4",
            RigidVariant::P5 => "p5",
            RigidVariant::Lee => "lee",
        }
    }
}

impl std::str::FromStr for RigidVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RigidVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown controller `{s}` (expected p1..p5 or lee)"))
    }
}

impl std::fmt::Display for RigidVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RigidGains {
    /// Matrix PD with reference feedforward; `[[0, I], [-K_P, -K_D]]` Hurwitz.
    P1 { k_p: Mat3, k_d: Mat3 },
    /// P1 plus integral of `z_k`; `det(L^3 + L^2 K_D + L K_P + K_I)` Hurwitz.
    P2 { k_p: Mat3, k_d: Mat3, k_i: Mat3 },
    /// Reference-free PD; `k_p > 0`, `K_D` SPD.
    P3 { k_p: f64, k_d: Mat3 },
    /// P3 plus `-eps (z_k x Omega0)`, eps below the bound of [`eps_bound`].
    P4 { k_p: f64, k_d: Mat3, eps: f64 },
    P5 { k_r: f64, k_omega: f64 },
    /// Geometric comparison law, not derived from the linearisation.
    Lee { k_r: f64, k_omega: f64 },
}

impl RigidGains {
    pub fn variant(&self) -> RigidVariant {
        match self {
            RigidGains::P1 { .. } => RigidVariant::P1,
            RigidGains::P2 { .. } => RigidVariant::P2,
            RigidGains::P3 { .. } => RigidVariant::P3,
            RigidGains::P4 { .. } => RigidVariant::P4,
            RigidGains::P5 { .. } => RigidVariant::P5,
            RigidGains::Lee { .. } => RigidVariant::Lee,
        }
    }

    /// Gains used for the reproduced experiments.
    pub fn defaults(variant: RigidVariant) -> Self {
        let i = Mat3::identity();
        match variant {
            RigidVariant::P1 => RigidGains::P1 {
                k_p: 4.0 * i,
                k_d: 2.0 * i,
            },
            RigidVariant::P2 => RigidGains::P2 {
                k_p: 11.0 * i,
                k_d: 6.0 * i,
                k_i: 6.0 * i,
            },
            RigidVariant::P3 => RigidGains::P3 {
                k_p: 4.0,
                k_d: 2.0 * i,
            },
            RigidVariant::P4 => RigidGains::P4 {
                k_p: 4.0,
                k_d: 2.0 * i,
                eps: 1.0,
            },
            RigidVariant::P5 => RigidGains::P5 {
                k_r: 4.0,
                k_omega: 2.0,
            },
            RigidVariant::Lee => RigidGains::Lee {
                k_r: 4.0,
                k_omega: 2.0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let law = self.variant().name();
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ControlError::invalid(law, format!("{name} must be positive, got {x}")))
            }
        };
        let pair = |k_p: f64, k_d: &Mat3| {
            if check_hurwitz_pair(&(k_p * Mat3::identity()), k_d) {
                Ok(())
            } else {
                Err(ControlError::invalid(
                    law,
                    format!("Hurwitz check failed: [[0, I], [-k I, -K_D]] with k = {k_p} has an eigenvalue with non-negative real part"),
                ))
            }
        };
        match self {
            RigidGains::P1 { k_p, k_d } => {
                if !check_hurwitz_pair(k_p, k_d) {
                    return Err(ControlError::invalid(
                        law,
                        "Hurwitz check failed: [[0, I], [-K_P, -K_D]] has an eigenvalue with non-negative real part",
                    ));
                }
            }
            RigidGains::P2 { k_p, k_d, k_i } => {
                if !check_hurwitz_triple(k_p, k_d, k_i) {
                    return Err(ControlError::invalid(
                        law,
                        "Hurwitz check failed: det(L^3 I + L^2 K_D + L K_P + K_I) has a root with non-negative real part",
                    ));
                }
            }
            RigidGains::P3 { k_p, k_d } => {
                pair(*k_p, k_d)?;
                positive("k_P", *k_p)?;
                if !is_spd(k_d) {
                    return Err(ControlError::invalid(law, "K_D must be symmetric positive definite"));
                }
            }
            RigidGains::P4 { k_p, k_d, eps } => {
                pair(*k_p, k_d)?;
                match check_eps_condition(EpsVariant::P4 { eps: *eps }, *k_p, k_d, 0.0) {
                    Ok(EpsCheck::Satisfied(true)) => {}
                    Ok(_) => {
                        let bound = eps_bound(EpsVariant::P4 { eps: *eps }, *k_p, k_d, 0.0)?;
                        return Err(ControlError::invalid(
                            law,
                            format!("eps condition failed: need 0 < eps < {bound}, got {eps}"),
                        ));
                    }
                    Err(e) => return Err(ControlError::invalid(law, e.to_string())),
                }
            }
            RigidGains::P5 { k_r, k_omega } | RigidGains::Lee { k_r, k_omega } => {
                pair(*k_r, &(*k_omega * Mat3::identity()))?;
                positive("k_R", *k_r)?;
                positive("k_Omega", *k_omega)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsVariant {
    /// The eps of the reference-free law only enters its stability proof;
    /// a valid value is suggested.
    P3Auto,
    /// The law uses `eps` explicitly; it is checked.
    P4 { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsCheck {
    Satisfied(bool),
    Suggested(f64),
}

/// Upper limit on eps:
/// `min{sqrt(k_P), 4 k_P l_min / (4 k_P + (M + l_max)^2)}` for P3 and the
/// same with `M = 0` for P4, with `l_min`, `l_max` the extreme eigenvalues of
/// `K_D` and `M` a bound on `||Omega0(t)||`.
pub fn eps_bound(variant: EpsVariant, k_p: f64, k_d: &Mat3, m_bound: f64) -> Result<f64, ControlError> {
    if !(k_p > 0.0 && k_p.is_finite()) {
        return Err(ControlError::BadGains(format!("k_P must be positive, got {k_p}")));
    }
    let (lo, hi) = symmetric_eigen_bounds(k_d)
        .filter(|(lo, _)| *lo > 0.0)
        .ok_or_else(|| ControlError::BadGains("K_D must be symmetric positive definite".into()))?;
    let m = match variant {
        EpsVariant::P3Auto => m_bound,
        EpsVariant::P4 { .. } => 0.0,
    };
    Ok(k_p.sqrt().min(4.0 * k_p * lo / (4.0 * k_p + (m + hi).powi(2))))
}

pub fn check_eps_condition(
    variant: EpsVariant,
    k_p: f64,
    k_d: &Mat3,
    m_bound: f64,
) -> Result<EpsCheck, ControlError> {
    let bound = eps_bound(variant, k_p, k_d, m_bound)?;
    Ok(match variant {
        EpsVariant::P3Auto => EpsCheck::Suggested(0.9 * bound),
        EpsVariant::P4 { eps } => EpsCheck::Satisfied(eps > 0.0 && eps < bound),
    })
}

/// Velocity-error feedback `du` of the linear laws P1..P5.
///
/// Validates `g` first; `integral_zk` is `int_0^t z_k` and only read by P2.
pub fn rigid_delta_u(
    g: &RigidGains,
    e: &ErrorCoords,
    omega0: &Vec3,
    u0: &Vec3,
    integral_zk: &Vec3,
) -> Result<Vec3, ControlError> {
    g.validate()?;
    delta_u_unchecked(g, e, omega0, u0, integral_zk)
}

fn delta_u_unchecked(
    g: &RigidGains,
    e: &ErrorCoords,
    omega0: &Vec3,
    u0: &Vec3,
    integral_zk: &Vec3,
) -> Result<Vec3, ControlError> {
    let zk = &e.z_k;
    let dw = &e.d_omega;
    let zk_rate = e.z_k_rate(omega0);
    Ok(match g {
        RigidGains::P1 { k_p, k_d } => -k_p * zk - k_d * zk_rate - zk_rate.cross(omega0) - zk.cross(u0),
        RigidGains::P2 { k_p, k_d, k_i } => {
            -k_p * zk - k_d * zk_rate - k_i * integral_zk - zk_rate.cross(omega0) - zk.cross(u0)
        }
        RigidGains::P3 { k_p, k_d } => -*k_p * zk - k_d * dw,
        RigidGains::P4 { k_p, k_d, eps } => -*k_p * zk - k_d * dw - *eps * zk.cross(omega0),
        RigidGains::P5 { k_r, k_omega } => -*k_r * zk - *k_omega * dw + dw.cross(omega0),
        RigidGains::Lee { .. } => {
            return Err(ControlError::invalid(
                "lee",
                "the geometric law has no linear du form; use lee_u",
            ))
        }
    })
}

/// Geometric tracking law
/// `u = -k_R e_R - k_W e_W - hat(Omega) R^T R0 Omega0 + R^T R0 Omega0'` with
/// `e_R = Skew(R0^T R)^vee / sqrt(1 + tr(R0^T R))` and `e_W = Omega - R^T R0 Omega0`.
pub fn lee_u(
    s: &RigidState,
    r0: &Mat3,
    omega0: &Vec3,
    omega0_dot: &Vec3,
    k_r: f64,
    k_omega: f64,
) -> Result<Vec3, ControlError> {
    let rel = r0.transpose() * s.r;
    let one_plus_trace = 1.0 + rel.trace();
    if !(one_plus_trace >= LEE_SINGULARITY_FLOOR) {
        return Err(ControlError::NearSingular { one_plus_trace });
    }
    let e_r = vee_of_skew_part(&rel) / one_plus_trace.sqrt();
    let rt_r0 = s.r.transpose() * r0;
    let e_w = s.omega - rt_r0 * omega0;
    Ok(-k_r * e_r - k_omega * e_w - hat(&s.omega) * rt_r0 * omega0 + rt_r0 * omega0_dot)
}

/// A validated rigid-body tracking law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidController {
    gains: RigidGains,
}

impl RigidController {
    pub fn new(gains: RigidGains) -> Result<Self, ControlError> {
        gains.validate()?;
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &RigidGains {
        &self.gains
    }

    pub fn has_integral(&self) -> bool {
        matches!(self.gains, RigidGains::P2 { .. })
    }

    /// Full input `u` at state `s` against `reference`.
    pub fn control(
        &self,
        s: &RigidState,
        reference: &RigidReference,
        integral_zk: &Vec3,
    ) -> Result<Vec3, ControlError> {
        match self.gains {
            RigidGains::Lee { k_r, k_omega } => lee_u(
                s,
                &reference.r0,
                &reference.omega0,
                &reference.u0,
                k_r,
                k_omega,
            ),
            ref g => {
                let e = error_coords(s, &reference.r0, &reference.omega0);
                Ok(reference.u0 + delta_u_unchecked(g, &e, &reference.omega0, &reference.u0, integral_zk)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlib::{e1, e2, e3, orthogonality_residual, rot_exp};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit() -> StabilizationParams {
        StabilizationParams::new(1.0).unwrap()
    }

    #[test]
    fn modified_rhs_examples() {
        let s = RigidState {
            r: Mat3::identity(),
            omega: e3(),
        };
        let d = rigid_rhs_modified(&s, &Vec3::zeros(), &unit());
        assert_eq!(d.r, hat(&e3()));
        assert_eq!(d.omega, Vec3::zeros());

        let s = RigidState {
            r: 2.0 * Mat3::identity(),
            omega: Vec3::zeros(),
        };
        assert_eq!(rigid_rhs_modified(&s, &Vec3::zeros(), &unit()).r, -6.0 * Mat3::identity());

        let s = RigidState {
            r: rot_exp(&Vec3::new(0.0, 0.8, -0.6), 2.1).unwrap(),
            omega: Vec3::new(0.3, 1.0, -2.0),
        };
        let u = Vec3::new(1.0, 2.0, 3.0);
        let a = rigid_rhs_modified(&s, &u, &unit());
        let b = rigid_rhs(&s, &u);
        assert!((a.r - b.r).norm() < 1e-14);
        assert_eq!(a.omega, u);
    }

    #[test]
    fn torque_examples() {
        let inertia = Inertia::new(Mat3::from_diagonal(&Vec3::new(1.0, 2.0, 3.0))).unwrap();
        let u = Vec3::new(0.5, -1.0, 2.0);
        let still = RigidState {
            r: Mat3::identity(),
            omega: Vec3::zeros(),
        };
        assert_eq!(torque_from_u(&still, &u, &inertia), inertia.matrix() * u);

        let spinning = RigidState {
            r: Mat3::identity(),
            omega: Vec3::new(1.0, 1.0, 1.0),
        };
        assert_eq!(torque_from_u(&spinning, &Vec3::zeros(), &inertia), Vec3::new(1.0, -2.0, 1.0));
        let tau = torque_from_u(&spinning, &u, &inertia);
        assert!((inertia.omega_dot(&spinning.omega, &tau) - u).norm() < 1e-14);
    }

    #[test]
    fn inertia_validation() {
        assert!(Inertia::new(-Mat3::identity()).is_err());
        let mut m = Mat3::identity();
        m[(0, 1)] = 0.1;
        assert!(Inertia::new(m).is_err());
    }

    #[test]
    fn reference_at_zero() {
        let r = reference_rigid(0.0);
        assert_eq!(r.r0, Mat3::identity());
        assert_eq!(r.omega0, Vec3::new(-1.0, -1.0, -1.0));
        assert_eq!(r.u0, Vec3::new(-1.0, 1.0, -1.0));
    }

    #[test]
    fn reference_is_a_rotation_and_consistent() {
        let h = 1e-5;
        for k in 0..200 {
            let t = 0.05 + 0.1 * k as f64;
            let r = reference_rigid(t);
            assert!(orthogonality_residual(&r.r0) < 1e-12);
            assert_relative_eq!(r.r0.determinant(), 1.0, epsilon = 1e-12);
            let (a, b) = (reference_rigid(t + h), reference_rigid(t - h));
            let fd_r = (a.r0 - b.r0) / (2.0 * h);
            assert!((fd_r - r.r0 * hat(&r.omega0)).norm() < 1e-8);
            assert!(((a.omega0 - b.omega0) / (2.0 * h) - r.u0).norm() < 1e-8);
            assert!(((a.u0 - b.u0) / (2.0 * h) - r.u0_dot).norm() < 1e-8);
        }
    }

    #[test]
    fn error_coords_examples() {
        let reference = reference_rigid(0.8);
        let on = RigidState {
            r: reference.r0,
            omega: reference.omega0,
        };
        let e = error_coords(&on, &reference.r0, &reference.omega0);
        assert!(e.z_s.norm() < 1e-15 && e.z_k.norm() < 1e-15 && e.d_omega.norm() == 0.0);

        let flip = rot_exp(&e2(), 0.99 * PI).unwrap();
        let s = RigidState {
            r: reference.r0 * flip,
            omega: reference.omega0,
        };
        let d_r = (s.r - reference.r0).norm();
        assert_relative_eq!(d_r, (6.0 - 2.0 * flip.trace()).sqrt(), epsilon = 1e-12);
        assert!((d_r - 2.8281).abs() < 1e-4);
        let e = error_coords(&s, &reference.r0, &reference.omega0);
        assert_relative_eq!((e.z_s + hat(&e.z_k)).norm(), d_r, epsilon = 1e-12);
    }

    #[test]
    fn delta_u_examples() {
        let z = ErrorCoords {
            z_s: Mat3::zeros(),
            z_k: Vec3::zeros(),
            d_omega: Vec3::zeros(),
        };
        let w0 = Vec3::new(0.3, -1.0, 2.0);
        let u0 = Vec3::new(1.0, 0.0, -1.0);
        for v in &RigidVariant::ALL[..5] {
            let du = rigid_delta_u(&RigidGains::defaults(*v), &z, &w0, &u0, &Vec3::zeros()).unwrap();
            assert_eq!(du, Vec3::zeros(), "{v}");
        }

        let e = ErrorCoords {
            z_s: Mat3::zeros(),
            z_k: e1(),
            d_omega: Vec3::zeros(),
        };
        let du = rigid_delta_u(&RigidGains::defaults(RigidVariant::P4), &e, &e3(), &Vec3::zeros(), &Vec3::zeros()).unwrap();
        assert_eq!(du, Vec3::new(-4.0, 1.0, 0.0));

        let e = ErrorCoords {
            z_s: Mat3::zeros(),
            z_k: Vec3::new(0.2, -0.1, 0.4),
            d_omega: Vec3::new(-0.5, 0.3, 0.1),
        };
        let g = RigidGains::defaults(RigidVariant::P1);
        let du = rigid_delta_u(&g, &e, &Vec3::zeros(), &Vec3::zeros(), &Vec3::zeros()).unwrap();
        assert!((du - (-4.0 * e.z_k - 2.0 * e.d_omega)).norm() < 1e-15);
    }

    #[test]
    fn delta_u_rejects_bad_gains() {
        let e = ErrorCoords {
            z_s: Mat3::zeros(),
            z_k: Vec3::zeros(),
            d_omega: Vec3::zeros(),
        };
        let g = RigidGains::P1 {
            k_p: -Mat3::identity(),
            k_d: Mat3::identity(),
        };
        let err = rigid_delta_u(&g, &e, &Vec3::zeros(), &Vec3::zeros(), &Vec3::zeros()).unwrap_err();
        assert!(err.to_string().contains("Hurwitz"), "{err}");
        let g = RigidGains::P4 {
            k_p: 4.0,
            k_d: 2.0 * Mat3::identity(),
            eps: 1.7,
        };
        assert!(matches!(g.validate(), Err(ControlError::InvalidGains { .. })));
        assert!(RigidController::new(RigidGains::P5 { k_r: 0.0, k_omega: 1.0 }).is_err());
    }

    #[test]
    fn lee_examples() {
        let reference = reference_rigid(1.3);
        let on = RigidState {
            r: reference.r0,
            omega: reference.omega0,
        };
        let u = lee_u(&on, &reference.r0, &reference.omega0, &reference.u0, 4.0, 2.0).unwrap();
        assert!((u - reference.u0).norm() < 1e-13);

        let quarter = RigidState {
            r: reference.r0 * rot_exp(&e2(), PI / 2.0).unwrap(),
            omega: reference.omega0,
        };
        let rel = reference.r0.transpose() * quarter.r;
        let e_r = vee_of_skew_part(&rel) / (1.0 + rel.trace()).sqrt();
        assert!((e_r - e2() / 2f64.sqrt()).norm() < 1e-12);

        let flipped = RigidState {
            r: reference.r0 * rot_exp(&e1(), PI).unwrap(),
            omega: reference.omega0,
        };
        assert!(matches!(
            lee_u(&flipped, &reference.r0, &reference.omega0, &reference.u0, 4.0, 2.0),
            Err(ControlError::NearSingular { .. })
        ));
    }

    #[test]
    fn eps_examples() {
        let kd = 2.0 * Mat3::identity();
        let b = eps_bound(EpsVariant::P4 { eps: 1.0 }, 4.0, &kd, 0.0).unwrap();
        assert_relative_eq!(b, 1.6, epsilon = 1e-15);
        assert_eq!(
            check_eps_condition(EpsVariant::P4 { eps: 1.0 }, 4.0, &kd, 0.0).unwrap(),
            EpsCheck::Satisfied(true)
        );
        assert_eq!(
            check_eps_condition(EpsVariant::P4 { eps: 1.7 }, 4.0, &kd, 0.0).unwrap(),
            EpsCheck::Satisfied(false)
        );
        match check_eps_condition(EpsVariant::P3Auto, 4.0, &kd, 2.0).unwrap() {
            EpsCheck::Suggested(e) => assert_relative_eq!(e, 0.9, epsilon = 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            check_eps_condition(EpsVariant::P3Auto, 0.0, &kd, 2.0),
            Err(ControlError::BadGains(_))
        ));
        assert!(matches!(
            check_eps_condition(EpsVariant::P3Auto, 1.0, &-kd, 2.0),
            Err(ControlError::BadGains(_))
        ));
    }

    #[test]
    fn omega_bound_on_default_horizon() {
        let m = reference_omega_bound(20.0, 0.01);
        assert!(m > 3f64.sqrt() && m < 3.0, "{m}");
    }

    #[test]
    fn variant_names_round_trip() {
        for v in RigidVariant::ALL {
            assert_eq!(v.name().parse::<RigidVariant>().unwrap(), v);
        }
        assert!("p6".parse::<RigidVariant>().is_err());
    }
}
