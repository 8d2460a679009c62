//! Dressed transition energy ΔE(g), its small-g series, the Hermann–Swain
//! resonance condition, and the resonant coupling g*.

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{periodic_mean, StateExpectation};

/// Above this Fock index the dressed energy uses the classical phase average.
pub const PHASE_AVERAGE_ABOVE: usize = 10_000;

/// Relative error allowed in the Gauss–Hermite evaluation.
pub const QUADRATURE_RTOL: f64 = 1e-9;

/// Upper end of the resonance search in g.
pub const G_MAX: f64 = 2.0;

/// An odd resonance order Δn = 2k + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResonanceSpec {
    pub delta_n: usize,
    pub k: usize,
}

impl ResonanceSpec {
    pub fn new(delta_n: usize) -> Result<Self> {
        if delta_n % 2 == 0 {
            return Err(invalid(format!("delta_n = {delta_n} must be odd")));
        }
        Ok(ResonanceSpec {
            delta_n,
            k: (delta_n - 1) / 2,
        })
    }

    pub fn from_k(k: usize) -> Self {
        ResonanceSpec {
            delta_n: 2 * k + 1,
            k,
        }
    }
}

/// Evaluates ΔE(g)/ΔE = ⟨n|√(1 + a·y²)|n⟩ for a fixed Fock index n and any
/// kernel strength a = 8U²/ΔE². Build once and reuse across couplings.
#[derive(Clone, Debug)]
pub struct DressedEvaluator {
    n: usize,
    rule: Option<StateExpectation>,
}

impl DressedEvaluator {
    pub fn new(n: usize) -> Result<Self> {
        let rule = if n <= PHASE_AVERAGE_ABOVE {
            Some(StateExpectation::new(n)?)
        } else {
            None
        };
        Ok(DressedEvaluator { n, rule })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ratio(&self, a: f64) -> Result<f64> {
        if a == 0.0 {
            return Ok(1.0);
        }
        match &self.rule {
            Some(rule) => {
                let (v, err) = rule.expect(|y| (1.0 + a * y * y).sqrt());
                if err > QUADRATURE_RTOL {
                    return Err(Error::Accuracy(format!(
                        "dressed energy quadrature at n = {} has relative error {err:.2e}",
                        self.n
                    )));
                }
                Ok(v)
            }
            None => phase_average_ratio(a, self.n),
        }
    }

    pub fn energy(&self, params: &ModelParams) -> Result<f64> {
        Ok(params.delta_e * self.ratio(kernel_strength(params))?)
    }
}

/// a = 8U²/ΔE², so that 1 + 4U²(a+a†)²/ΔE² = 1 + a·y².
pub fn kernel_strength(params: &ModelParams) -> f64 {
    let r = params.coupling_u / params.delta_e;
    8.0 * r * r
}

/// Dressed transition energy ΔE·⟨n|√(1 + 4U²(a+a†)²/ΔE²)|n⟩.
pub fn dressed_energy(params: &ModelParams, n: usize) -> Result<f64> {
    if n > params.n_max {
        return Err(invalid(format!("n = {n} above n_max = {}", params.n_max)));
    }
    if params.coupling_u == 0.0 {
        return Ok(params.delta_e);
    }
    DressedEvaluator::new(n)?.energy(params)
}

/// Classical limit: (1/2π)∮√(1 + a(2n+1)cos²θ) dθ.
pub fn phase_average_ratio(a: f64, n: usize) -> Result<f64> {
    let amp = a * (2.0 * n as f64 + 1.0);
    periodic_mean(|t| (1.0 + amp * t.cos().powi(2)).sqrt(), 1e-15)
}

/// (1/2π)∮√(1 + 16g²cos²θ) dθ, the n₀ → ∞ limit at fixed g.
pub fn classical_ratio(g: f64) -> Result<f64> {
    periodic_mean(|t| (1.0 + 16.0 * g * g * t.cos().powi(2)).sqrt(), 1e-15)
}

/// 1 + 4g² − 12g⁴
pub fn dressed_energy_series(g: f64) -> f64 {
    let g2 = g * g;
    1.0 + 4.0 * g2 - 12.0 * g2 * g2
}

/// The g² coefficient of [`hermann_swain_lhs`]: 4(2k+1)²/(4k(k+1)).
pub fn hermann_swain_g2_coefficient(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k = 0 is a pole of the Hermann-Swain condition"));
    }
    let p = (2 * k + 1) as f64;
    let q = 4.0 * (k * (k + 1)) as f64;
    Ok(4.0 * p * p / q)
}

/// 1 + 4g²(2k+1)²/(4k(k+1)) − 4(2k+1)⁴[3(2k+1)² − 7]g⁴/[4k(k+1)]³
pub fn hermann_swain_lhs(g: f64, k: usize) -> Result<f64> {
    let c2 = hermann_swain_g2_coefficient(k)?;
    let p = (2 * k + 1) as f64;
    let q = 4.0 * (k * (k + 1)) as f64;
    let c4 = 4.0 * p.powi(4) * (3.0 * p * p - 7.0) / q.powi(3);
    let g2 = g * g;
    Ok(1.0 + c2 * g2 - c4 * g2 * g2)
}

/// Root g* of ΔE(g) = Δn·ħω₀ at n = n₀, g ∈ [0, 2].
pub fn resonance_g(delta_e: f64, spec: ResonanceSpec, n0: usize) -> Result<f64> {
    let eval = DressedEvaluator::new(n0)?;
    resonance_g_with(&eval, delta_e, spec, n0)
}

/// [`resonance_g`] reusing a prepared evaluator for n₀.
pub fn resonance_g_with(
    eval: &DressedEvaluator,
    delta_e: f64,
    spec: ResonanceSpec,
    n0: usize,
) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(invalid(format!("delta_e must be > 0, got {delta_e}")));
    }
    if eval.n() != n0 {
        return Err(invalid("evaluator prepared for a different n0"));
    }
    let target = spec.delta_n as f64;
    let tol = 1e-10 * target;
    let f0 = delta_e - target;
    if f0.abs() <= tol {
        return Ok(0.0);
    }
    if f0 > 0.0 {
        return Err(Error::NoResonance(format!(
            "delta_n = {} lies below the bare gap {delta_e}",
            spec.delta_n
        )));
    }
    if n0 == 0 {
        return Err(Error::NoResonance("no coupling at n0 = 0".into()));
    }
    let nf = n0 as f64;
    let f = |g: f64| -> Result<f64> { Ok(delta_e * eval.ratio(8.0 * g * g / nf)? - target) };
    let (mut lo, mut hi) = (0.0, G_MAX);
    let (mut flo, mut fhi) = (f0, f(hi)?);
    if fhi < 0.0 {
        return Err(Error::NoResonance(format!(
            "dressed energy stays below {target} for g <= {G_MAX}"
        )));
    }
    for _ in 0..200 {
        // secant step, fall back to bisection when it leaves the middle of the bracket
        let mut g = hi - fhi * (hi - lo) / (fhi - flo);
        let width = hi - lo;
        if !(g > lo + 0.05 * width && g < hi - 0.05 * width) {
            g = 0.5 * (lo + hi);
        }
        let fg = f(g)?;
        if fg.abs() <= tol {
            return Ok(g);
        }
        if fg < 0.0 {
            lo = g;
            flo = fg;
        } else {
            hi = g;
            fhi = fg;
        }
        if hi - lo <= 1e-15 * hi {
            return Ok(g);
        }
    }
    Err(Error::Convergence {
        iterations: 200,
        best_residual: flo.abs().min(fhi.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Spin;

    #[test]
    fn series_values() {
        assert_eq!(dressed_energy_series(0.0), 1.0);
        assert!((dressed_energy_series(0.1) - 1.0388).abs() < 1e-15);
        assert!((dressed_energy_series(0.05) - 1.009925).abs() < 1e-15);
    }

    #[test]
    fn hermann_swain_values() {
        assert_eq!(hermann_swain_lhs(0.0, 3).unwrap(), 1.0);
        let v = hermann_swain_lhs(0.1, 1).unwrap();
        assert!((v - 1.04373).abs() < 5e-6, "{v}");
        assert!(hermann_swain_lhs(0.1, 0).is_err());
    }

    #[test]
    fn zero_coupling_is_bare() {
        let p = ModelParams::new(11.0, 0.0, Spin::ONE, 100, 200).unwrap();
        assert_eq!(dressed_energy(&p, 100).unwrap(), 11.0);
    }

    #[test]
    fn quadrature_matches_phase_average_at_switch() {
        // n = 2000 exercises the Gauss-Hermite branch at a size where the
        // phase average is already accurate to ~1e-7
        let n = 2000;
        let a = 8.0 * 0.3f64.powi(2) / n as f64;
        let q = DressedEvaluator::new(n).unwrap().ratio(a).unwrap();
        let c = phase_average_ratio(a, n).unwrap();
        assert!((q / c - 1.0).abs() < 1e-6, "{q} vs {c}");
    }

    #[test]
    fn bare_resonance_gives_zero() {
        assert_eq!(resonance_g(15.0, ResonanceSpec::new(15).unwrap(), 1000).unwrap(), 0.0);
    }

    #[test]
    fn resonance_below_gap_rejected() {
        let err = resonance_g(11.0, ResonanceSpec::new(9).unwrap(), 1000).unwrap_err();
        assert!(matches!(err, Error::NoResonance(_)));
    }

    #[test]
    fn even_order_rejected() {
        assert!(ResonanceSpec::new(14).is_err());
    }

    #[test]
    fn resonance_ordering_and_seed() {
        let g15 = resonance_g(11.0, ResonanceSpec::new(15).unwrap(), 100_000).unwrap();
        let g13 = resonance_g(11.0, ResonanceSpec::new(13).unwrap(), 100_000).unwrap();
        assert!(g13 < g15);
        // first-order series inversion seeds the bracket near 0.30
        let seed = ((15.0 / 11.0 - 1.0) / 4.0f64).sqrt();
        assert!((g15 - seed).abs() < 0.05, "{g15} vs {seed}");
        let p = ModelParams::from_g(11.0, g15, Spin::ONE, 100_000, 110_000).unwrap();
        let e = dressed_energy(&p, 100_000).unwrap();
        assert!((e - 15.0).abs() < 1e-9);
    }
}
