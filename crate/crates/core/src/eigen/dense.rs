//! Dense real-symmetric eigensolver: Householder reduction to tridiagonal
//! form followed by implicit QL with Wilkinson-style shifts.

use crate::error::{Error, Result};

/// Eigen-decomposition of a dense symmetric matrix.
///
/// `a` is row-major `n × n`; only its values are read. Returns eigenvalues in
/// ascending order and the matching orthonormal eigenvectors, one per row of
/// the returned buffer (vector `k` occupies `vecs[k*n..(k+1)*n]`).
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut z = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, n, &mut d, &mut e);
    // columns of z are the accumulated transform; make them rows
    let mut zt = transpose(&z, n);
    tql(&mut d, &mut e, Some(&mut zt), n)?;
    Ok(sort_pairs(d, zt, n))
}

/// Eigenvalues of a symmetric tridiagonal matrix (diagonal `diag`,
/// off-diagonal `off` with `off.len() == diag.len() - 1`), ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    // tql expects e[i] to hold the coupling between i-1 and i
    e[1..n].copy_from_slice(&off[..n.saturating_sub(1)]);
    tql(&mut d, &mut e, None, n)?;
    d.sort_by(|x, y| x.total_cmp(y));
    Ok(d)
}

fn transpose(z: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = z[i * n + j];
        }
    }
    t
}

fn sort_pairs(d: Vec<f64>, zt: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n * n);
    for &k in &order {
        vals.push(d[k]);
        vecs.extend_from_slice(&zt[k * n..(k + 1) * n]);
    }
    (vals, vecs)
}

/// Householder reduction. On exit `d` is the diagonal, `e[i]` the coupling
/// between rows i-1 and i (`e[0] = 0`), and `z` the orthogonal transform.
fn tridiagonalize(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..i).map(|k| z[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[at(i, l)];
            } else {
                for k in 0..i {
                    z[at(i, k)] /= scale;
                    h += z[at(i, k)] * z[at(i, k)];
                }
                let f = z[at(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[at(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..i {
                    z[at(j, i)] = z[at(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[at(j, k)] * z[at(i, k)];
                    }
                    for k in j + 1..i {
                        g += z[at(k, j)] * z[at(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * z[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = z[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[at(j, k)] -= f * e[k] + g * z[at(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[at(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[at(i, k)] * z[at(k, j)];
                }
                for k in 0..i {
                    z[at(k, j)] -= g * z[at(k, i)];
                }
            }
        }
        d[i] = z[at(i, i)];
        z[at(i, i)] = 1.0;
        for j in 0..i {
            z[at(j, i)] = 0.0;
            z[at(i, j)] = 0.0;
        }
    }
}

/// Implicit QL on a tridiagonal matrix. `zt` holds eigenvectors as rows.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // absolute floor so blocks of near-zero eigenvalues still deflate
    let floor = f64::EPSILON
        * d.iter()
            .zip(e.iter())
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence {
                    iterations: iter,
                    best_residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m as isize - 1;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((iu + 1) * n);
                    let row_i = &mut lo[iu * n..];
                    let row_next = &mut hi[..n];
                    for k in 0..n {
                        let f = row_next[k];
                        row_next[k] = s * row_i[k] + c * f;
                        row_i[k] = c * row_i[k] - s * f;
                    }
                }
                i -= 1;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
