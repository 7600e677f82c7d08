use crate::error::{QslError, Result};

/// Eigenvalues of a real symmetric tridiagonal matrix together with the
/// first and last components of each normalized eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub first: Vec<f64>,
    pub last: Vec<f64>,
}

/// Implicit QL with Wilkinson shifts. Only the two boundary rows of the
/// eigenvector matrix are accumulated, so the cost is O(n²).
pub fn tridiagonal_eigen(diagonal: &[f64], off_diagonal: &[f64]) -> Result<TridiagonalEigen> {
    let n = diagonal.len();
    if n == 0 {
        return Err(QslError::EmptyInput("tridiagonal matrix"));
    }
    if off_diagonal.len() + 1 != n {
        return Err(QslError::LengthMismatch {
            expected: n - 1,
            found: off_diagonal.len(),
        });
    }
    let mut d = diagonal.to_vec();
    let mut e = off_diagonal.to_vec();
    e.push(0.0);
    let mut z0 = vec![0.0; n];
    let mut z1 = vec![0.0; n];
    z0[0] = 1.0;
    z1[n - 1] = 1.0;

    for l in 0..n {
        let mut iterations = 0;
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
            iterations += 1;
            if iterations > 60 {
                return Err(QslError::EigenFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
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
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for z in [&mut z0, &mut z1] {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&k| d[k]).collect(),
        first: order.iter().map(|&k| z0[k]).collect(),
        last: order.iter().map(|&k| z1[k]).collect(),
    })
}
