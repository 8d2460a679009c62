//! The spin-boson Hamiltonian in the Fock ⊗ spin product basis, and the
//! scalar pieces of the rotated-frame operator as functions of the oscillator
//! coordinate y.
//!
//! Convention: a + a† = √2·y, so [2U(a+a†)/ΔE]² = 8U²y²/ΔE².

use std::io::{self, Write};

use crate::error::{invalid, Error, Result};
use crate::model::{BasisIndex, ModelParams, Spin};
use crate::rotated1d;

/// A real symmetric band matrix. Only the diagonal and the `bandwidth`
/// superdiagonals are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedSymmetricMatrix {
    dim: usize,
    bandwidth: usize,
    // ab[i * (bandwidth + 1) + k] = A[i, i + k]
    bands: Vec<f64>,
}

impl BandedSymmetricMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        BandedSymmetricMatrix {
            dim,
            bandwidth,
            bands: vec![0.0; dim * (bandwidth + 1)],
        }
    }

    /// Build from a diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), 0);
        m.bands.copy_from_slice(diag);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Raw band storage: entry `i * (bandwidth + 1) + k` is A[i, i + k].
    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let k = c - r;
        (k <= self.bandwidth && c < self.dim).then(|| r * (self.bandwidth + 1) + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.bands[s])
    }

    /// Set A[i, j] (and A[j, i]).
    ///
    /// # Panics
    /// If (i, j) lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band {}", self.bandwidth));
        self.bands[s] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.bands[i * (self.bandwidth + 1)]).collect()
    }

    /// y = A·x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let w = self.bandwidth + 1;
        y.fill(0.0);
        for i in 0..self.dim {
            let row = &self.bands[i * w..(i + 1) * w];
            let mut acc = row[0] * x[i];
            let kmax = self.bandwidth.min(self.dim - 1 - i);
            for k in 1..=kmax {
                let a = row[k];
                acc += a * x[i + k];
                y[i + k] += a * x[i];
            }
            y[i] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..=self.bandwidth.min(n - 1 - i) {
                let v = self.bands[i * (self.bandwidth + 1) + k];
                a[i * n + i + k] = v;
                a[(i + k) * n + i] = v;
            }
        }
        a
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim;
        let mut sums = vec![0.0f64; n];
        for i in 0..n {
            for k in 0..=self.bandwidth.min(n - 1 - i) {
                let v = self.bands[i * (self.bandwidth + 1) + k].abs();
                sums[i] += v;
                if k > 0 {
                    sums[i + k] += v;
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Write the nonzero upper-triangle entries as `row col value` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# dim {} bandwidth {}", self.dim, self.bandwidth)?;
        for i in 0..self.dim {
            for k in 0..=self.bandwidth.min(self.dim - 1 - i) {
                let v = self.bands[i * (self.bandwidth + 1) + k];
                if v != 0.0 {
                    writeln!(out, "{} {} {:.17e}", i, i + k, v)?;
                }
            }
        }
        Ok(())
    }
}

/// Band half-width of the Hamiltonian under flat ordering: 2S+2.
pub fn hamiltonian_bandwidth(spin: Spin) -> usize {
    spin.dim() + 1
}

/// Most band entries [`build_hamiltonian`] will allocate (8 GiB of f64).
/// The shift-invert factors need a few times as much again.
pub const MAX_BAND_ENTRIES: usize = 1 << 30;

/// Assemble H = ΔE·Sz + a†a + U(a + a†)·2Sx, truncated at n_max.
pub fn build_hamiltonian(params: &ModelParams) -> Result<BandedSymmetricMatrix> {
    params.validate()?;
    let spin = params.spin;
    let dim = params.dim()?;
    let d = spin.dim();
    let entries = dim.checked_mul(hamiltonian_bandwidth(spin) + 1);
    if !matches!(entries, Some(e) if e <= MAX_BAND_ENTRIES) {
        return Err(Error::Capacity(format!(
            "n_max = {} needs more than {MAX_BAND_ENTRIES} band entries",
            params.n_max
        )));
    }
    let mut h = BandedSymmetricMatrix::zeros(dim, hamiltonian_bandwidth(spin));
    let u = params.coupling_u;
    for n in 0..=params.n_max {
        let sqrt_next = ((n + 1) as f64).sqrt();
        for (k, m) in spin.projections().enumerate() {
            let i = n * d + k;
            h.set(i, i, params.delta_e * m + n as f64 * params.omega0);
            if n == params.n_max || u == 0.0 {
                continue;
            }
            // ⟨M+1|2Sx|M⟩ = ⟨M|2Sx|M+1⟩ = √(S(S+1) − M(M+1))
            let up = spin.raising_element(m);
            if up != 0.0 {
                let j = BasisIndex::new(n + 1, m + 1.0).flatten(spin)?;
                h.set(i, j, u * sqrt_next * up);
            }
            let down = spin.raising_element(m - 1.0);
            if down != 0.0 {
                let j = BasisIndex::new(n + 1, m - 1.0).flatten(spin)?;
                h.set(i, j, u * sqrt_next * down);
            }
        }
    }
    Ok(h)
}

/// Apply the spin part ΔE·Sz + U(a + a†)·2Sx of H, i.e. H − a†a, to `x`.
pub fn apply_spin_part(params: &ModelParams, h: &BandedSymmetricMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = h.apply(x);
    let d = params.spin.dim();
    for (i, yi) in y.iter_mut().enumerate() {
        *yi -= (i / d) as f64 * params.omega0 * x[i];
    }
    y
}

/// The rotated-frame potential V_M(y) = y²/2 + M·√(ΔE² + 8U²y²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatedPotential {
    pub delta_e: f64,
    pub coupling_u: f64,
    pub m: f64,
}

impl RotatedPotential {
    pub fn new(params: &ModelParams, m: f64) -> Self {
        RotatedPotential {
            delta_e: params.delta_e,
            coupling_u: params.coupling_u,
            m,
        }
    }

    /// √(ΔE² + 8U²y²)
    pub fn dressed_gap(&self, y: f64) -> f64 {
        let u = self.coupling_u;
        (self.delta_e * self.delta_e + 8.0 * u * u * y * y).sqrt()
    }

    pub fn value(&self, y: f64) -> f64 {
        0.5 * y * y + self.m * self.dressed_gap(y)
    }

    /// dV/dy
    pub fn derivative(&self, y: f64) -> f64 {
        let u = self.coupling_u;
        y + self.m * 8.0 * u * u * y / self.dressed_gap(y)
    }
}

/// The coupling kernel f(y) = (U/ΔE)/(1 + 8U²y²/ΔE²).
pub fn v_coupling_function(params: &ModelParams) -> impl Fn(f64) -> f64 {
    let r = params.coupling_u / params.delta_e;
    move |y: f64| r / (1.0 + 8.0 * r * r * y * y)
}

/// ⟨S,M|(2Sy)²|S,M⟩ = 2(S(S+1) − M²).
pub fn sy2_factor(spin: Spin, m: f64) -> f64 {
    let s = spin.value();
    2.0 * (s * (s + 1.0) - m * m)
}

/// Diagonal expectation of the neglected W term in the rotated level
/// u_{n,M}. Finite differences up to n = 5000, the semiclassical orbit
/// average above.
pub fn w_expectation(params: &ModelParams, n: usize, m: f64) -> Result<f64> {
    if (m.abs() - params.spin.value()) > 1e-12 {
        return Err(invalid(format!("M = {m} outside spin {}", params.spin.value())));
    }
    if params.coupling_u == 0.0 {
        return Ok(0.0);
    }
    let spin_factor = sy2_factor(params.spin, m);
    let f = v_coupling_function(params);
    let kernel = |y: f64| {
        let v = f(y);
        v * v
    };
    let avg = if n <= rotated1d::FD_MAX_N {
        let (_, u) = rotated1d::solve_rotated_level(params, m, n)?;
        u.expectation(kernel)
    } else {
        rotated1d::orbit_average(params, m, n as f64, kernel)?
    };
    Ok(params.omega0 * avg * spin_factor)
}
