//! Small fixed-size matrix algebra on `so(3)` and `SO(3)`.
//!
//! All norms are Frobenius norms and all inner products are the entrywise
//! (Euclidean) inner product `<A, B> = tr(A^T B)`.

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Absolute tolerance on `||A + A^T||` accepted by [`vee`].
pub const TOL_SKEW: f64 = 1e-9;

/// Tolerance on `||axis|| - 1` accepted by [`rot_exp`].
pub const TOL_AXIS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MatError {
    #[error("matrix is not skew-symmetric: ||A + A^T|| = {residual:e}")]
    NotSkew { residual: f64 },
    #[error("rotation axis is not a unit vector: ||axis|| = {norm}")]
    BadAxis { norm: f64 },
}

pub fn e1() -> Vec3 {
    Vec3::new(1.0, 0.0, 0.0)
}

pub fn e2() -> Vec3 {
    Vec3::new(0.0, 1.0, 0.0)
}

pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// The hat map `R^3 -> so(3)`, so that `hat(v) * w == v.cross(&w)`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// The vee map `so(3) -> R^3`, inverse of [`hat`].
///
/// The input is first projected onto its skew part, so matrices that are
/// skew only up to rounding give a deterministic answer.
pub fn vee(a: &Mat3) -> Result<Vec3, MatError> {
    let residual = (a + a.transpose()).norm();
    if !(residual <= TOL_SKEW) {
        return Err(MatError::NotSkew { residual });
    }
    Ok(vee_of_skew_part(a))
}

/// `vee(Skew(A))` for an arbitrary square matrix, without any skewness check.
pub fn vee_of_skew_part(a: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (a[(2, 1)] - a[(1, 2)]),
        0.5 * (a[(0, 2)] - a[(2, 0)]),
        0.5 * (a[(1, 0)] - a[(0, 1)]),
    )
}

pub fn sym(a: &Mat3) -> Mat3 {
    0.5 * (a + a.transpose())
}

pub fn skew(a: &Mat3) -> Mat3 {
    0.5 * (a - a.transpose())
}

/// Splits `a` into its symmetric and skew-symmetric parts.
pub fn decompose(a: &Mat3) -> (Mat3, Mat3) {
    (sym(a), skew(a))
}

/// Frobenius inner product `sum_ij A_ij B_ij`.
pub fn frob(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

/// Matrix commutator `[A, B] = AB - BA`.
pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    a * b - b * a
}

/// Rotation by `angle` radians about the unit vector `axis` (Rodrigues).
pub fn rot_exp(axis: &Vec3, angle: f64) -> Result<Mat3, MatError> {
    let norm = axis.norm();
    if !((norm - 1.0).abs() <= TOL_AXIS) {
        return Err(MatError::BadAxis { norm });
    }
    let k = hat(axis);
    Ok(Mat3::identity() + angle.sin() * k + (1.0 - angle.cos()) * (k * k))
}

/// `||R^T R - I||`, the distance of `r` from the orthogonal group.
pub fn orthogonality_residual(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hat_matches_display() {
        let m = hat(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
        assert_eq!(hat(&Vec3::zeros()), Mat3::zeros());
        assert_eq!(hat(&e1()) * e2(), e3());
    }

    #[test]
    fn vee_reads_off_components() {
        let v = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(vee(&hat(&v)).unwrap(), v);
        assert_eq!(vee(&Mat3::zeros()).unwrap(), Vec3::zeros());
        let a = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(vee(&a).unwrap(), e3());
    }

    #[test]
    fn vee_rejects_non_skew() {
        let err = vee(&Mat3::identity()).unwrap_err();
        assert!(matches!(err, MatError::NotSkew { .. }));
        // just inside the tolerance
        let mut a = hat(&Vec3::new(0.3, -0.2, 0.1));
        a[(0, 0)] = 0.4e-9;
        assert!(vee(&a).is_ok());
        assert!(vee(&Mat3::from_element(f64::NAN)).is_err());
    }

    #[test]
    fn decompose_examples() {
        let (s, k) = decompose(&Mat3::identity());
        assert_eq!((s, k), (Mat3::identity(), Mat3::zeros()));

        let h = hat(&Vec3::new(-1.0, 0.5, 2.0));
        assert_eq!(decompose(&h), (Mat3::zeros(), h));

        let a = Mat3::new(1.0, 4.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let (s, k) = decompose(&a);
        assert_eq!(s, Mat3::new(1.0, 3.0, 0.0, 3.0, 1.0, 0.0, 0.0, 0.0, 1.0));
        assert_eq!(k, Mat3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn frob_examples() {
        assert_eq!(frob(&hat(&e1()), &hat(&e1())), 2.0);
        assert_eq!(frob(&Mat3::identity(), &Mat3::identity()), 3.0);
        let a = Mat3::new(0.3, -1.2, 4.0, 2.2, 0.1, -0.7, 5.0, 0.25, -3.0);
        let (s, k) = decompose(&a);
        assert_relative_eq!(frob(&s, &k), 0.0, epsilon = 1e-14);
        assert_relative_eq!(frob(&a, &a), a.norm_squared(), epsilon = 1e-12);
    }

    #[test]
    fn rot_exp_examples() {
        let r = rot_exp(&e2(), PI).unwrap();
        let expected = Mat3::from_diagonal(&Vec3::new(-1.0, 1.0, -1.0));
        assert!((r - expected).norm() < 1e-15);
        assert_eq!(rot_exp(&Vec3::new(0.6, 0.0, 0.8), 0.0).unwrap(), Mat3::identity());
        let half_turn = rot_exp(&e1(), PI).unwrap();
        assert_relative_eq!((half_turn - Mat3::identity()).norm(), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert!(orthogonality_residual(&rot_exp(&e3(), 1.234).unwrap()) < 1e-12);
    }

    #[test]
    fn rot_exp_rejects_bad_axis() {
        assert!(matches!(
            rot_exp(&Vec3::new(1.0, 1.0, 0.0), 0.1),
            Err(MatError::BadAxis { .. })
        ));
        assert!(rot_exp(&Vec3::zeros(), 0.1).is_err());
    }

    #[test]
    fn orthogonality_residual_examples() {
        assert!(orthogonality_residual(&rot_exp(&e1(), 0.7).unwrap()) < 1e-15);
        assert_relative_eq!(orthogonality_residual(&(2.0 * Mat3::identity())), 3.0 * 3f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(orthogonality_residual(&Mat3::zeros()), 3f64.sqrt(), epsilon = 1e-15);
    }
}
