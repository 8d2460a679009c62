//! Units, physical parameters, spin matrices and product-basis indexing.
//!
//! Everything runs in natural units: ħ = 1 and ω₀ = 1, so energies are in
//! units of ħω₀ and times in units of 1/ω₀.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Oscillator frequency. Fixed by the unit convention.
pub const OMEGA0: f64 = 1.0;

/// A spin quantum number S, stored as the positive integer 2S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-12 {
            return Err(invalid(format!("spin {s} is not a positive half-integer")));
        }
        Ok(Spin {
            twice: twice.round() as u32,
        })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(invalid("spin 0 has no transitions"));
        }
        Ok(Spin { twice })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Number of spin states, 2S+1.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Projections M = −S, −S+1, …, S in ascending order.
    pub fn projections(self) -> impl Iterator<Item = f64> {
        let s = self.value();
        (0..self.dim()).map(move |k| k as f64 - s)
    }

    /// ⟨M+1|S₊|M⟩ = √(S(S+1) − M(M+1)), zero outside the multiplet.
    pub fn raising_element(self, m: f64) -> f64 {
        let s = self.value();
        let v = s * (s + 1.0) - m * (m + 1.0);
        if v <= 0.0 || m >= s {
            0.0
        } else {
            v.sqrt()
        }
    }
}

impl Default for Spin {
    fn default() -> Self {
        Spin::ONE
    }
}

/// Physical configuration of the spin-boson model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Bare transition energy ΔE.
    pub delta_e: f64,
    /// Oscillator quantum, always [`OMEGA0`].
    pub omega0: f64,
    /// Coupling strength U.
    pub coupling_u: f64,
    pub spin: Spin,
    /// Reference oscillator occupation n₀.
    pub n0: usize,
    /// Fock truncation; states |n⟩ with n ≤ n_max are kept.
    pub n_max: usize,
}

impl ModelParams {
    pub fn new(delta_e: f64, coupling_u: f64, spin: Spin, n0: usize, n_max: usize) -> Result<Self> {
        let p = ModelParams {
            delta_e,
            omega0: OMEGA0,
            coupling_u,
            spin,
            n0,
            n_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from the dimensionless coupling g = U√n₀/ΔE.
    pub fn from_g(delta_e: f64, g: f64, spin: Spin, n0: usize, n_max: usize) -> Result<Self> {
        let u = coupling_from_g(g, n0, delta_e)?;
        Self::new(delta_e, u, spin, n0, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_e.is_finite() && self.delta_e > 0.0) {
            return Err(invalid(format!("delta_e must be > 0, got {}", self.delta_e)));
        }
        if !(self.coupling_u.is_finite() && self.coupling_u >= 0.0) {
            return Err(invalid(format!(
                "coupling_u must be >= 0, got {}",
                self.coupling_u
            )));
        }
        if self.n_max <= self.n0 {
            return Err(invalid(format!(
                "n_max ({}) must exceed n0 ({})",
                self.n_max, self.n0
            )));
        }
        Ok(())
    }

    /// Dimensionless coupling g = U√n₀/ΔE.
    pub fn g(&self) -> f64 {
        self.coupling_u * (self.n0 as f64).sqrt() / self.delta_e
    }

    pub fn with_coupling_u(mut self, u: f64) -> Result<Self> {
        self.coupling_u = u;
        self.validate()?;
        Ok(self)
    }

    /// Same model at a different g, keeping n₀ fixed.
    pub fn with_g(self, g: f64) -> Result<Self> {
        let u = coupling_from_g(g, self.n0, self.delta_e)?;
        self.with_coupling_u(u)
    }

    /// Move to a different reference occupation, keeping U.
    pub fn with_n0(mut self, n0: usize, n_max: usize) -> Result<Self> {
        self.n0 = n0;
        self.n_max = n_max;
        self.validate()?;
        Ok(self)
    }

    /// Dimension of the truncated Fock ⊗ spin space.
    pub fn dim(&self) -> Result<usize> {
        (self.n_max)
            .checked_add(1)
            .and_then(|n| n.checked_mul(self.spin.dim()))
            .ok_or_else(|| Error::Capacity(format!("n_max = {} overflows the basis index", self.n_max)))
    }

    /// ΔE ≫ ħω₀. Informational only.
    pub fn large_mismatch(&self) -> bool {
        self.delta_e >= 5.0 * self.omega0
    }

    /// Whether n_max ≥ n₀ + Δn + 10√n₀, the truncation we consider safe.
    pub fn truncation_adequate(&self, delta_n: usize) -> bool {
        let need = self.n0 as f64 + delta_n as f64 + 10.0 * (self.n0 as f64).sqrt();
        self.n_max as f64 >= need
    }
}

/// Smallest n_max passing [`ModelParams::truncation_adequate`], plus a margin.
pub fn recommended_n_max(n0: usize, delta_n: usize) -> usize {
    n0 + delta_n + (10.0 * (n0 as f64).sqrt()).ceil() as usize + 40
}

/// g = U√n₀/ΔE.
pub fn dimensionless_g(coupling_u: f64, n0: usize, delta_e: f64) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(invalid(format!("delta_e must be > 0, got {delta_e}")));
    }
    Ok(coupling_u * (n0 as f64).sqrt() / delta_e)
}

/// Inverse of [`dimensionless_g`].
pub fn coupling_from_g(g: f64, n0: usize, delta_e: f64) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(invalid(format!("delta_e must be > 0, got {delta_e}")));
    }
    if n0 == 0 {
        if g == 0.0 {
            return Ok(0.0);
        }
        return Err(invalid("g is undefined at n0 = 0 unless g = 0"));
    }
    Ok(g * delta_e / (n0 as f64).sqrt())
}

/// Dense spin matrices in the basis |S⟩, |S−1⟩, …, |−S⟩ (row-major).
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub spin: Spin,
    pub sx: Vec<Complex64>,
    pub sy: Vec<Complex64>,
    pub sz: Vec<Complex64>,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Row/column of projection M in these matrices.
    pub fn index_of(&self, m: f64) -> usize {
        (self.spin.value() - m).round() as usize
    }

    pub fn get(mat: &[Complex64], dim: usize, row: usize, col: usize) -> Complex64 {
        mat[row * dim + col]
    }
}

pub fn spin_matrices(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let s = spin.value();
    let zero = Complex64::new(0.0, 0.0);
    let mut sx = vec![zero; d * d];
    let mut sy = vec![zero; d * d];
    let mut sz = vec![zero; d * d];
    for i in 0..d {
        let m = s - i as f64;
        sz[i * d + i] = Complex64::new(m, 0.0);
    }
    // S₊ maps M → M+1, i.e. column i+1 → row i.
    for i in 0..d - 1 {
        let m_low = s - (i + 1) as f64;
        let up = spin.raising_element(m_low);
        // Sx = (S₊ + S₋)/2, Sy = (S₊ − S₋)/(2i)
        sx[i * d + i + 1] = Complex64::new(up / 2.0, 0.0);
        sx[(i + 1) * d + i] = Complex64::new(up / 2.0, 0.0);
        sy[i * d + i + 1] = Complex64::new(0.0, -up / 2.0);
        sy[(i + 1) * d + i] = Complex64::new(0.0, up / 2.0);
    }
    SpinOperators { spin, sx, sy, sz }
}

/// Position of (n, M) in the flat product basis: n·(2S+1) + (M+S).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub n: usize,
    /// 2M, exact for half-integer spins.
    pub twice_m: i32,
}

impl BasisIndex {
    pub fn new(n: usize, m: f64) -> Self {
        BasisIndex {
            n,
            twice_m: (2.0 * m).round() as i32,
        }
    }

    pub fn m(self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    pub fn flatten(self, spin: Spin) -> Result<usize> {
        let tm = self.twice_m + spin.twice() as i32;
        if tm < 0 || tm > 2 * spin.twice() as i32 || tm % 2 != 0 {
            return Err(invalid(format!("M = {} outside spin {}", self.m(), spin.value())));
        }
        self.n
            .checked_mul(spin.dim())
            .and_then(|v| v.checked_add(tm as usize / 2))
            .ok_or_else(|| Error::Capacity(format!("flat index overflow at n = {}", self.n)))
    }

    pub fn unflatten(flat: usize, spin: Spin) -> Self {
        let d = spin.dim();
        let n = flat / d;
        let k = (flat % d) as i32;
        BasisIndex {
            n,
            twice_m: 2 * k - spin.twice() as i32,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                for j in 0..d {
                    c[i * d + j] += a[i * d + k] * b[k * d + j];
                }
            }
        }
        c
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = spin_matrices(Spin::HALF);
        assert_eq!(ops.sz[0].re, 0.5);
        assert_eq!(ops.sz[3].re, -0.5);
        assert_eq!(ops.sx[1].re, 0.5);
        assert_eq!(ops.sx[2].re, 0.5);
    }

    #[test]
    fn spin_one_ladder_entries() {
        let ops = spin_matrices(Spin::ONE);
        let diag: Vec<f64> = (0..3).map(|i| ops.sz[i * 3 + i].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
        let r = 1.0 / 2f64.sqrt();
        assert!((ops.sx[1].re - r).abs() < 1e-15);
        assert!((ops.sx[5].re - r).abs() < 1e-15);
        assert!((ops.sx[3].re - r).abs() < 1e-15);
        assert_eq!(ops.sx[2].re, 0.0);
    }

    #[test]
    fn commutators_and_casimir() {
        for twice in 1..=8 {
            let spin = Spin::from_twice(twice).unwrap();
            let ops = spin_matrices(spin);
            let d = ops.dim();
            let xy = mat_mul(&ops.sx, &ops.sy, d);
            let yx = mat_mul(&ops.sy, &ops.sx, d);
            let mut err: f64 = 0.0;
            for k in 0..d * d {
                let c = xy[k] - yx[k] - Complex64::i() * ops.sz[k];
                err = err.max(c.norm());
            }
            assert!(err < 1e-13, "spin {}: [Sx,Sy] error {err}", spin.value());

            let s = spin.value();
            let x2 = mat_mul(&ops.sx, &ops.sx, d);
            let y2 = mat_mul(&ops.sy, &ops.sy, d);
            let z2 = mat_mul(&ops.sz, &ops.sz, d);
            for i in 0..d {
                for j in 0..d {
                    let v = x2[i * d + j] + y2[i * d + j] + z2[i * d + j];
                    let want = if i == j { s * (s + 1.0) } else { 0.0 };
                    assert!((v - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sx_real_sy_imaginary() {
        let ops = spin_matrices(Spin::new(1.5).unwrap());
        for k in 0..ops.sx.len() {
            assert_eq!(ops.sx[k].im, 0.0);
            assert_eq!(ops.sy[k].re, 0.0);
        }
    }

    #[test]
    fn rejects_non_half_integer_spin() {
        assert!(Spin::new(0.7).is_err());
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert!(Spin::new(2.5).is_ok());
    }

    #[test]
    fn g_definition() {
        assert_eq!(dimensionless_g(0.0, 1_000_000, 11.0).unwrap(), 0.0);
        let de = 11.0;
        let n0 = 12345;
        let u = de / (n0 as f64).sqrt();
        assert!((dimensionless_g(u, n0, de).unwrap() - 1.0).abs() < 1e-15);
        assert!((dimensionless_g(1.1e-3, 1_000_000, 11.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(dimensionless_g(1.0, 10, 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(11.0, 0.01, Spin::ONE, 100, 100).is_err());
        assert!(ModelParams::new(0.0, 0.01, Spin::ONE, 100, 200).is_err());
        assert!(ModelParams::new(11.0, -1.0, Spin::ONE, 100, 200).is_err());
        let p = ModelParams::from_g(11.0, 0.3, Spin::ONE, 10_000, 12_000).unwrap();
        assert!((p.g() - 0.3).abs() < 1e-14);
        assert!(ModelParams::new(11.0, 0.0, Spin::ONE, 100, 200).unwrap().large_mismatch());
    }

    #[test]
    fn basis_index_round_trip() {
        let spin = Spin::ONE;
        for n in 0..20 {
            for m in spin.projections() {
                let b = BasisIndex::new(n, m);
                let flat = b.flatten(spin).unwrap();
                assert_eq!(BasisIndex::unflatten(flat, spin), b);
            }
        }
        assert!(BasisIndex::new(0, 2.0).flatten(spin).is_err());
    }
}
