//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by implicit-shift QL iterations. Eigenvalues only.

use nalgebra::DMatrix;

use super::NumericsError;

const MAX_QL_ITERATIONS: usize = 60;

/// Ascending eigenvalues of a symmetric matrix.
///
/// The input must be symmetric to within `1e-12` relative to its largest
/// entry.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, NumericsError> {
    symmetric_eigenvalues_with(m, 1e-12)
}

pub fn symmetric_eigenvalues_with(
    m: &DMatrix<f64>,
    symmetry_tol: f64,
) -> Result<Vec<f64>, NumericsError> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(NumericsError::InvalidArgument(format!(
            "matrix is {}x{}, not square",
            n,
            m.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !scale.is_finite() {
        return Err(NumericsError::InvalidArgument("matrix has non-finite entries".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > symmetry_tol * scale.max(f64::MIN_POSITIVE) {
                return Err(NumericsError::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }

    // Row-major lower triangle copy; the reduction only reads/writes a[i][k]
    // with k ≤ i.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..=i).map(|k| 0.5 * (m[(i, k)] + m[(k, i)])).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut a, &mut d, &mut e);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Householder reduction of the symmetric matrix stored as a lower triangle.
/// On return `d` holds the diagonal and `e[1..]` the sub-diagonal.
fn tridiagonalize(a: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let scale: f64 = a[i][..=l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                let mut h = 0.0;
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i][i];
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<(), NumericsError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(NumericsError::NoConvergence(MAX_QL_ITERATIONS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
