//! Eigenpairs of banded symmetric matrices.
//!
//! [`eig_all`] diagonalizes densely and is meant for small dimensions.
//! [`eig_interior`] finds the eigenpairs nearest a target energy by
//! shift-invert block Krylov iteration on a band LU factorization of
//! H − σI, which costs O(dim) per solve.

pub mod dense;
mod factor;

pub use factor::{count_below, count_in, BandedLu};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::BandedSymmetricMatrix;

/// An eigenvalue with its unit-norm eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target: ‖Hx − λx‖ ≤ tol·‖H‖.
    pub tol: f64,
    /// Block Krylov steps before a restart.
    pub max_steps: usize,
    pub max_restarts: usize,
    /// Largest dimension [`eig_all`] accepts.
    pub dense_ceiling: usize,
    /// Seed for the start block.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_steps: 20,
            max_restarts: 20,
            dense_ceiling: 20_000,
            seed: 0x5eed,
        }
    }
}

/// Full ascending spectrum by dense diagonalization.
pub fn eig_all(h: &BandedSymmetricMatrix) -> Result<Vec<EigenPair>> {
    eig_all_with(h, &SolverOptions::default())
}

pub fn eig_all_with(h: &BandedSymmetricMatrix, opts: &SolverOptions) -> Result<Vec<EigenPair>> {
    let n = h.dim();
    if n > opts.dense_ceiling {
        return Err(Error::Capacity(format!(
            "dimension {n} exceeds the dense ceiling {}",
            opts.dense_ceiling
        )));
    }
    let (vals, vecs) = dense::symmetric_eigen(&h.to_dense(), n)?;
    Ok(vals
        .into_iter()
        .enumerate()
        .map(|(k, value)| EigenPair {
            value,
            vector: vecs[k * n..(k + 1) * n].to_vec(),
        })
        .collect())
}

/// The `count` eigenpairs nearest `sigma`, ascending by value.
pub fn eig_interior(h: &BandedSymmetricMatrix, sigma: f64, count: usize) -> Result<Vec<EigenPair>> {
    eig_interior_with(h, sigma, count, &SolverOptions::default())
}

pub fn eig_interior_with(
    h: &BandedSymmetricMatrix,
    sigma: f64,
    count: usize,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>> {
    let n = h.dim();
    if count == 0 {
        return Ok(Vec::new());
    }
    if count > n {
        return Err(invalid(format!("asked for {count} eigenpairs of a {n}-dimensional matrix")));
    }
    if n <= 4 * count + 8 {
        let mut all = eig_all(h)?;
        all.sort_by(|a, b| (a.value - sigma).abs().total_cmp(&(b.value - sigma).abs()));
        all.truncate(count);
        all.sort_by(|a, b| a.value.total_cmp(&b.value));
        return Ok(all);
    }
    let lu = match BandedLu::new(h, sigma) {
        Ok(lu) => lu,
        Err(Error::Singular(_)) => {
            let s = sigma + 1e-8 * sigma.abs().max(1.0);
            BandedLu::new(h, s)?
        }
        Err(e) => return Err(e),
    };
    let norm = h.norm_inf().max(f64::MIN_POSITIVE);
    let mut want = count;
    for attempt in 0..6 {
        let block = (want + attempt).min(n);
        let mut found = krylov(h, &lu, want.min(n), block, norm, opts)?;
        found.sort_by(|a, b| (a.value - sigma).abs().total_cmp(&(b.value - sigma).abs()));
        // inertia check: every eigenvalue within the count-th distance,
        // ties included, must be among those found
        let reach = (found[count - 1].value - sigma).abs();
        let pad = 1e-9 * reach.max(1.0) + opts.tol * norm;
        let ball = count_in(h, sigma - reach - pad, sigma + reach + pad);
        let inside = found
            .iter()
            .filter(|p| (p.value - sigma).abs() < reach + pad)
            .count();
        if inside >= ball {
            found.truncate(count);
            found.sort_by(|a, b| a.value.total_cmp(&b.value));
            return Ok(found);
        }
        if want >= n {
            break;
        }
        want = ball.max(want + 1);
    }
    Err(Error::Convergence {
        iterations: 0,
        best_residual: f64::NAN,
    })
}

/// Eigenvalues per shift-invert solve in [`eig_range`].
const RANGE_TILE: usize = 4;

/// All eigenpairs with value in [lo, hi), ascending.
pub fn eig_range(h: &BandedSymmetricMatrix, lo: f64, hi: f64) -> Result<Vec<EigenPair>> {
    eig_range_with(h, lo, hi, &SolverOptions::default())
}

pub fn eig_range_with(
    h: &BandedSymmetricMatrix,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>> {
    let k = count_in(h, lo, hi);
    if k == 0 {
        return Ok(Vec::new());
    }
    // small tiles keep the Krylov basis short; stop splitting at clusters
    if k > RANGE_TILE && hi - lo > 1e-9 * lo.abs().max(hi.abs()).max(1.0) {
        let mid = split_point(h, lo, hi);
        let mut left = eig_range_with(h, lo, mid, opts)?;
        left.extend(eig_range_with(h, mid, hi, opts)?);
        return Ok(left);
    }
    // the k values nearest the midpoint are exactly those inside
    let mut pairs = eig_interior_with(h, 0.5 * (lo + hi), k, opts)?;
    pairs.retain(|p| p.value >= lo && p.value < hi);
    Ok(pairs)
}

/// A point near the middle of (lo, hi) with no eigenvalue close by, so
/// rounding cannot move a value across the split.
fn split_point(h: &BandedSymmetricMatrix, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let mid = 0.5 * (lo + hi);
    for j in 0..9 {
        let offset = 0.05 * width * ((j + 1) / 2) as f64;
        let x = if j % 2 == 0 { mid + offset } else { mid - offset };
        let eps = 1e-8 * x.abs().max(1.0);
        if count_in(h, x - eps, x + eps) == 0 {
            return x;
        }
    }
    mid
}

/// ‖Hx − λx‖₂
pub fn residual_norm(h: &BandedSymmetricMatrix, pair: &EigenPair) -> f64 {
    let hx = h.apply(&pair.vector);
    hx.iter()
        .zip(&pair.vector)
        .map(|(a, b)| {
            let r = a - pair.value * b;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalize `w` against `basis` (two passes) and normalize it.
/// Returns false if nothing independent is left.
fn orthonormalize_against(basis: &[Vec<f64>], w: &mut [f64]) -> bool {
    let before = dot(w, w).sqrt();
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
    let after = dot(w, w).sqrt();
    if after <= 1e-10 * before {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= after);
    true
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

/// Shift-invert block Krylov with full reorthogonalization and restarts
/// from the current Ritz vectors.
fn krylov(
    h: &BandedSymmetricMatrix,
    lu: &BandedLu,
    count: usize,
    block: usize,
    norm: f64,
    opts: &SolverOptions,
) -> Result<Vec<EigenPair>> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<f64>> = (0..block).map(|_| random_vector(&mut rng, n)).collect();
    let max_basis = (block * (opts.max_steps + 1)).min(n);
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        for mut v in start.drain(..) {
            while !orthonormalize_against(&basis, &mut v) {
                v = random_vector(&mut rng, n);
            }
            basis.push(v);
        }
        // t[i][j] = v_i · OP v_j
        let mut t: Vec<Vec<f64>> = Vec::new();
        let mut last = 0..basis.len();
        loop {
            iterations += 1;
            let mut images = Vec::with_capacity(last.len());
            for j in last.clone() {
                let mut w = basis[j].clone();
                lu.solve_in_place(&mut w);
                images.push(w);
            }
            let m = basis.len();
            for row in t.iter_mut() {
                row.resize(m, 0.0);
            }
            t.resize(m, vec![0.0; m]);
            for (jj, j) in last.clone().enumerate() {
                for i in 0..m {
                    let c = dot(&basis[i], &images[jj]);
                    t[i][j] = c;
                    if i < last.start {
                        t[j][i] = c;
                    }
                }
            }
            for i in last.clone() {
                for j in last.start..i {
                    let avg = 0.5 * (t[i][j] + t[j][i]);
                    t[i][j] = avg;
                    t[j][i] = avg;
                }
            }

            let (ritz, converged, worst) = ritz_pairs(h, &basis, &t, count, norm, opts.tol)?;
            best_residual = best_residual.min(worst);
            if converged {
                let mut out = ritz;
                out.sort_by(|a, b| a.value.total_cmp(&b.value));
                return Ok(out);
            }
            if basis.len() + last.len() > max_basis {
                start = ritz.into_iter().map(|p| p.vector).collect();
                while start.len() < block {
                    start.push(random_vector(&mut rng, n));
                }
                break;
            }
            let begin = basis.len();
            for mut w in images {
                if !orthonormalize_against(&basis, &mut w) {
                    // invariant subspace reached; continue with a fresh direction
                    w = random_vector(&mut rng, n);
                    if !orthonormalize_against(&basis, &mut w) {
                        continue;
                    }
                }
                basis.push(w);
            }
            if basis.len() == begin {
                start = ritz.into_iter().map(|p| p.vector).collect();
                break;
            }
            last = begin..basis.len();
        }
    }
    Err(Error::Convergence {
        iterations,
        best_residual,
    })
}

/// Ritz pairs of the projected inverse for the `count` largest |θ|.
fn ritz_pairs(
    h: &BandedSymmetricMatrix,
    basis: &[Vec<f64>],
    t: &[Vec<f64>],
    count: usize,
    norm: f64,
    tol: f64,
) -> Result<(Vec<EigenPair>, bool, f64)> {
    let m = basis.len();
    let n = h.dim();
    let flat: Vec<f64> = t.iter().flat_map(|r| r.iter().copied()).collect();
    let (theta, s) = dense::symmetric_eigen(&flat, m)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| theta[b].abs().total_cmp(&theta[a].abs()));
    let mut pairs = Vec::with_capacity(count);
    let mut worst: f64 = 0.0;
    for &k in order.iter().take(count) {
        let coeffs = &s[k * m..(k + 1) * m];
        let mut x = vec![0.0; n];
        for (c, v) in coeffs.iter().zip(basis) {
            axpy(*c, v, &mut x);
        }
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|xi| *xi /= nx);
        // Rayleigh quotient, more accurate than σ + 1/θ
        let hx = h.apply(&x);
        let value = dot(&x, &hx);
        let res = hx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
        pairs.push(EigenPair { value, vector: x });
    }
    Ok((pairs, worst <= tol * norm, worst))
}
