//! Hurwitz tests for matrix polynomials through their block companion matrix.
//!
//! A monic matrix polynomial `L^n I + L^{n-1} C_{n-1} + ... + C_0` has
//! `det(...)` equal to the characteristic polynomial of
//!
//! ```text
//! [   0    I    0  ...    0     ]
//! [   0    0    I  ...    0     ]
//! [  ...                        ]
//! [ -C_0 -C_1  ...     -C_{n-1} ]
//! ```
//!
//! so the polynomial is Hurwitz iff that matrix is.

use nalgebra::{Complex, DMatrix};

use crate::matlib::Mat3;

/// Eigenvalues with real part in `(-TOL_HURWITZ, +inf)` fail the test.
pub const TOL_HURWITZ: f64 = 1e-9;

/// Relative distance under which computed eigenvalues are treated as one
/// multiple eigenvalue by [`spectrum`].
const CLUSTER_TOL: f64 = 1e-5;

/// Block companion matrix of a monic matrix polynomial. `coeffs[i]` is the
/// coefficient of `L^i`; the leading identity is implicit.
pub fn block_companion(coeffs: &[Mat3]) -> DMatrix<f64> {
    let n = coeffs.len();
    let dim = 3 * n;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..n.saturating_sub(1) {
        for k in 0..3 {
            m[(3 * i + k, 3 * (i + 1) + k)] = 1.0;
        }
    }
    for (j, c) in coeffs.iter().enumerate() {
        m.view_mut((3 * (n - 1), 3 * j), (3, 3)).copy_from(&(-c));
    }
    m
}

/// Companion matrix of the monic scalar polynomial `L^n + sum coeffs[i] L^i`.
pub fn scalar_companion(coeffs: &[f64]) -> DMatrix<f64> {
    let n = coeffs.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = 1.0;
    }
    for (j, c) in coeffs.iter().enumerate() {
        m[(n - 1, j)] = -c;
    }
    m
}

fn raw_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    crate::eigen::eigenvalues(m)
}

/// Eigenvalues of `m`, sorted by (real, imaginary) part.
///
/// Numerically coincident eigenvalues (a multiple eigenvalue split apart by
/// rounding, typically by `O(eps^(1/k))` for a `k`-fold Jordan block) are
/// replaced by their cluster mean, which is accurate to `O(eps)`.
pub fn spectrum(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let mut eig = raw_eigenvalues(m)?;
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = CLUSTER_TOL * scale;

    let mut cluster_of: Vec<usize> = (0..eig.len()).collect();
    fn root(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for i in 0..eig.len() {
        for j in (i + 1)..eig.len() {
            if (eig[i] - eig[j]).norm() < tol {
                let (a, b) = (root(&mut cluster_of, i), root(&mut cluster_of, j));
                cluster_of[a.max(b)] = a.min(b);
            }
        }
    }
    let roots: Vec<usize> = (0..eig.len()).map(|i| root(&mut cluster_of, i)).collect();
    let means: Vec<Complex<f64>> = (0..eig.len())
        .map(|i| {
            let members: Vec<Complex<f64>> =
                (0..eig.len()).filter(|&j| roots[j] == roots[i]).map(|j| eig[j]).collect();
            members.iter().sum::<Complex<f64>>() / members.len() as f64
        })
        .collect();
    for (z, m) in eig.iter_mut().zip(means) {
        *z = m;
    }
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Some(eig)
}

/// Largest real part over the eigenvalues of `m`, `None` for non-finite input.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Option<f64> {
    raw_eigenvalues(m).map(|e| e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    spectral_abscissa(m).is_some_and(|a| a < -TOL_HURWITZ)
}

/// `det(L^n I + ... + C_0)` Hurwitz, with `coeffs[i]` multiplying `L^i`.
pub fn matrix_polynomial_is_hurwitz(coeffs: &[Mat3]) -> bool {
    !coeffs.is_empty() && is_hurwitz(&block_companion(coeffs))
}

/// Monic scalar polynomial Hurwitz, with `coeffs[i]` multiplying `L^i`.
pub fn scalar_polynomial_is_hurwitz(coeffs: &[f64]) -> bool {
    !coeffs.is_empty() && is_hurwitz(&scalar_companion(coeffs))
}

/// `[[0, I], [-K_P, -K_D]]` Hurwitz.
pub fn check_hurwitz_pair(k_p: &Mat3, k_d: &Mat3) -> bool {
    matrix_polynomial_is_hurwitz(&[*k_p, *k_d])
}

/// `det(L^3 I + L^2 K_D + L K_P + K_I)` Hurwitz.
pub fn check_hurwitz_triple(k_p: &Mat3, k_d: &Mat3, k_i: &Mat3) -> bool {
    matrix_polynomial_is_hurwitz(&[*k_i, *k_p, *k_d])
}

/// Extreme eigenvalues of a symmetric matrix, `None` if `k` is not symmetric
/// to `1e-12` (relative to its norm) or not finite.
pub fn symmetric_eigen_bounds(k: &Mat3) -> Option<(f64, f64)> {
    if k.iter().any(|x| !x.is_finite()) {
        return None;
    }
    if (k - k.transpose()).norm() > 1e-12 * k.norm().max(1.0) {
        return None;
    }
    let ev = crate::matlib::sym(k).symmetric_eigenvalues();
    Some((ev.min(), ev.max()))
}

/// Symmetric with strictly positive eigenvalues.
pub fn is_spd(k: &Mat3) -> bool {
    symmetric_eigen_bounds(k).is_some_and(|(lo, _)| lo > 0.0)
}
