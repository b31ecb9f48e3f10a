//! Eigenvalues of small dense real matrices: balancing, reduction to upper
//! Hessenberg form by stabilised elimination, then Francis double-shift QR
//! with exceptional shifts and a hard iteration cap.

#![allow(clippy::needless_range_loop)]

use nalgebra::{Complex, DMatrix};

const MAX_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Row-major working copy; the algorithms below index `a[i][j]`.
type Work = Vec<Vec<f64>>;

fn balance(a: &mut Work) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg(a: &mut Work) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0f64;
        let mut pivot = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                pivot = j;
            }
        }
        if pivot != m {
            a.swap(pivot, m);
            for row in a.iter_mut() {
                row.swap(pivot, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[i][j] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix; `None` if QR fails to converge.
#[allow(clippy::many_single_char_names)]
fn hessenberg_qr(a: &mut Work) -> Option<Vec<Complex<f64>>> {
    let n = a.len();
    let mut out = vec![Complex::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    let mut t = 0.0;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                out[nu] = Complex::new(x + t, 0.0);
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        out[nu - 1] = Complex::new(x + z, 0.0);
                        out[nu] = Complex::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                    } else {
                        out[nu] = Complex::new(x + p, -z);
                        out[nu - 1] = Complex::new(x + p, z);
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITERATIONS_PER_EIGENVALUE {
                        return None;
                    }
                    if its > 0 && its % 10 == 0 {
                        t += x;
                        for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                            row[i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..nu - 1 {
                        a[i + 2][i] = 0.0;
                        if i != m {
                            a[i + 2][i - 1] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = if k + 1 != nu { a[k + 2][k - 1] } else { 0.0 };
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k + 1 != nu {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for row in a.iter_mut().take(mmin + 1).skip(l) {
                                p = x * row[k] + y * row[k + 1];
                                if k + 1 != nu {
                                    p += z * row[k + 2];
                                    row[k + 2] -= p * r;
                                }
                                row[k + 1] -= p * q;
                                row[k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if !(nn >= 0 && (l + 1) < nn as usize) {
                break;
            }
        }
    }
    Some(out)
}

/// All eigenvalues of a square matrix, `None` for non-finite input or if the
/// QR iteration does not converge.
pub fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n || m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut a: Work = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    balance(&mut a);
    to_hessenberg(&mut a);
    let eig = hessenberg_qr(&mut a)?;
    eig.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_and_triangular() {
        let m = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 4.0, 0.0, -2.0, 5.0, 0.0, 0.0, 7.0]);
        let e = sorted(eigenvalues(&m).unwrap());
        for (z, want) in e.iter().zip([-2.0, 3.0, 7.0]) {
            assert!((z - Complex::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_block() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let e = sorted(eigenvalues(&m).unwrap());
        assert!((e[0] - Complex::new(0.0, -2.0)).norm() < 1e-14);
        assert!((e[1] - Complex::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_and_determinant_are_preserved() {
        let m = DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 2.0, -1.0, 0.5, 3.0, //
                -2.0, 0.3, 4.0, 1.0, 0.0, //
                0.7, -1.5, 2.0, 0.0, 1.0, //
                3.0, 0.0, 1.0, -4.0, 2.0, //
                0.1, 1.0, 0.0, 2.0, 0.5,
            ],
        );
        let e = eigenvalues(&m).unwrap();
        let tr: Complex<f64> = e.iter().sum();
        let det: Complex<f64> = e.iter().product();
        assert!((tr.re - m.trace()).abs() < 1e-11 && tr.im.abs() < 1e-11);
        assert!((det.re - m.determinant()).abs() < 1e-9 && det.im.abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_element(2, 2, f64::NAN);
        assert!(eigenvalues(&m).is_none());
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).is_none());
    }

    #[test]
    fn zero_matrix() {
        let e = eigenvalues(&DMatrix::zeros(4, 4)).unwrap();
        assert!(e.iter().all(|z| z.norm() == 0.0));
    }
}
