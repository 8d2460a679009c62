//! Factorizations of the shifted band matrix H − σI.

use crate::error::{Error, Result};
use crate::hamiltonian::BandedSymmetricMatrix;

/// LU factorization with partial pivoting of a band matrix with `kl` lower
/// and `ku` upper diagonals. Row interchanges and multipliers are applied to
/// the right-hand side in factorization order.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    // row-position major: entry (i, j) at i * width + (j + kl - i)
    lu: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factor H − σI.
    pub fn new(h: &BandedSymmetricMatrix, sigma: f64) -> Result<Self> {
        let n = h.dim();
        let k = h.bandwidth();
        let (kl, ku) = (k, k);
        let width = 2 * kl + ku + 1;
        let mut lu = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for j in i.saturating_sub(k)..=(i + k).min(n.saturating_sub(1)) {
                let mut v = h.get(i, j);
                if i == j {
                    v -= sigma;
                }
                lu[at(i, j)] = v;
            }
        }
        let mut pivots = vec![0; n];
        let scale = h.norm_inf().max(sigma.abs()).max(1.0);
        for c in 0..n {
            let last_row = (c + kl).min(n - 1);
            let last_col = (c + kl + ku).min(n - 1);
            let mut p = c;
            let mut best = lu[at(c, c)].abs();
            for i in c + 1..=last_row {
                let v = lu[at(i, c)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * 1e-3 * scale {
                return Err(Error::Singular(c));
            }
            pivots[c] = p;
            if p != c {
                for j in c..=last_col {
                    lu.swap(at(c, j), at(p, j));
                }
            }
            let piv = lu[at(c, c)];
            for i in c + 1..=last_row {
                let l = lu[at(i, c)] / piv;
                lu[at(i, c)] = l;
                if l != 0.0 {
                    for j in c + 1..=last_col {
                        lu[at(i, j)] -= l * lu[at(c, j)];
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            width,
            lu,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve (H − σI)x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        for c in 0..n {
            let p = self.pivots[c];
            if p != c {
                b.swap(c, p);
            }
            let bc = b[c];
            if bc != 0.0 {
                for i in c + 1..=(c + kl).min(n - 1) {
                    b[i] -= self.lu[at(i, c)] * bc;
                }
            }
        }
        for c in (0..n).rev() {
            let mut acc = b[c];
            for j in c + 1..=(c + kl + ku).min(n - 1) {
                acc -= self.lu[at(c, j)] * b[j];
            }
            b[c] = acc / self.lu[at(c, c)];
        }
    }
}

/// Number of eigenvalues of `h` strictly below `x`, from the signs of the
/// pivots of an unpivoted LDLᵀ factorization of H − xI (Sylvester inertia).
pub fn count_below(h: &BandedSymmetricMatrix, x: f64) -> usize {
    let n = h.dim();
    let k = h.bandwidth();
    let w = k + 1;
    let mut a = h.bands().to_vec();
    for i in 0..n {
        a[i * w] -= x;
    }
    let tiny = f64::EPSILON * h.norm_inf().max(x.abs()).max(1.0) * 1e-2;
    let mut negatives = 0;
    for c in 0..n {
        let mut d = a[c * w];
        if d.abs() < tiny {
            d = tiny;
        }
        if d < 0.0 {
            negatives += 1;
        }
        let last = (c + k).min(n - 1);
        for i in c + 1..=last {
            let aci = a[c * w + (i - c)];
            if aci == 0.0 {
                continue;
            }
            let f = aci / d;
            for j in i..=last {
                a[i * w + (j - i)] -= f * a[c * w + (j - c)];
            }
        }
    }
    negatives
}

/// Number of eigenvalues in the half-open interval [lo, hi).
pub fn count_in(h: &BandedSymmetricMatrix, lo: f64, hi: f64) -> usize {
    if hi <= lo {
        return 0;
    }
    count_below(h, hi).saturating_sub(count_below(h, lo))
}
