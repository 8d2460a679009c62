//! Three-state dynamics among |n₀+Δn, −1⟩, |n₀, 0⟩, |n₀−Δn, +1⟩.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::eigen::dense::symmetric_eigen;
use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

/// Amplitudes (c₋₁, c₀, c₁) at time t (units of 1/ω₀).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeStateAmplitudes {
    pub c: [Complex64; 3],
    pub t: f64,
}

impl ThreeStateAmplitudes {
    /// All population in the M = −1 state at t = 0.
    pub fn lower() -> Self {
        Self::basis(0)
    }

    pub fn upper() -> Self {
        Self::basis(2)
    }

    pub fn basis(k: usize) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); 3];
        c[k] = Complex64::new(1.0, 0.0);
        ThreeStateAmplitudes { c, t: 0.0 }
    }

    pub fn probabilities(&self) -> [f64; 3] {
        self.c.map(|z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// ⟨M⟩ = Σ M|c_M|²
    pub fn expect_m(&self) -> f64 {
        let p = self.probabilities();
        p[2] - p[0]
    }
}

/// Tridiagonal 3×3 Hamiltonian with couplings v₋ (−1↔0) and v₊ (0↔1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeStateHamiltonian {
    pub eps: [f64; 3],
    pub v_minus: f64,
    pub v_plus: f64,
}

impl ThreeStateHamiltonian {
    pub fn new(eps: [f64; 3], v: f64) -> Self {
        ThreeStateHamiltonian {
            eps,
            v_minus: v,
            v_plus: v,
        }
    }

    pub fn degenerate(eps0: f64, v: f64) -> Self {
        Self::new([eps0; 3], v)
    }

    /// Outer states shifted by −δ from the middle one: δ = ε₀ − ε±₁.
    pub fn detuned(eps0: f64, delta: f64, v: f64) -> Self {
        Self::new([eps0 - delta, eps0, eps0 - delta], v)
    }

    fn matrix(&self) -> [f64; 9] {
        let [a, b, c] = self.eps;
        [a, self.v_minus, 0.0, self.v_minus, b, self.v_plus, 0.0, self.v_plus, c]
    }

    fn validate(&self) -> Result<()> {
        if self.matrix().iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(invalid("three-state Hamiltonian has non-finite entries"))
        }
    }
}

/// v = 2U·I/ΔE (ħ = ω₀ = 1).
pub fn coupling_v(params: &ModelParams, i_integral: f64) -> f64 {
    2.0 * params.coupling_u * i_integral / params.delta_e
}

/// Closed-form degenerate solution starting from the M = −1 state.
///
/// The middle amplitude is −(i/√2)·sin(√2vt), the exact solution for the
/// stated sign of v; flipping the sign of v flips it.
pub fn evolve_analytic(t: f64, v: f64, eps0: f64) -> ThreeStateAmplitudes {
    let phase = Complex64::from_polar(1.0, -eps0 * t);
    let w = SQRT_2 * v * t;
    let (s, c) = w.sin_cos();
    ThreeStateAmplitudes {
        c: [
            phase * (0.5 * (c + 1.0)),
            phase * Complex64::new(0.0, -s / SQRT_2),
            phase * (0.5 * (c - 1.0)),
        ],
        t,
    }
}

/// Exact propagation through the eigendecomposition of `h`.
pub fn evolve_numeric(
    initial: &ThreeStateAmplitudes,
    h: &ThreeStateHamiltonian,
    t_grid: &[f64],
) -> Result<Vec<ThreeStateAmplitudes>> {
    h.validate()?;
    let (vals, vecs) = symmetric_eigen(&h.matrix(), 3)?;
    // coefficients of the initial state in the eigenbasis (rows of vecs)
    let proj: Vec<Complex64> = (0..3)
        .map(|k| (0..3).map(|i| initial.c[i] * vecs[k * 3 + i]).sum())
        .collect();
    Ok(t_grid
        .iter()
        .map(|&t| {
            let dt = t - initial.t;
            let mut c = [Complex64::new(0.0, 0.0); 3];
            for k in 0..3 {
                let a = proj[k] * Complex64::from_polar(1.0, -vals[k] * dt);
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci += a * vecs[k * 3 + i];
                }
            }
            ThreeStateAmplitudes { c, t }
        })
        .collect())
}

/// Evenly spaced times 0, t_max/steps, ..., t_max.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max >= 0.0 && t_max.is_finite()) || steps == 0 {
        return Err(invalid("time grid needs t_max >= 0 and t_steps >= 1"));
    }
    Ok((0..=steps).map(|i| t_max * i as f64 / steps as f64).collect())
}

/// One sample of ⟨M⟩ and ⟨n − n₀⟩ = −Δn·⟨M⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub t: f64,
    pub m: f64,
    pub dn: f64,
}

pub fn expectations(traj: &[ThreeStateAmplitudes], delta_n: usize) -> Vec<Expectation> {
    traj.iter()
        .map(|a| {
            let m = a.expect_m();
            Expectation {
                t: a.t,
                m,
                dn: -(delta_n as f64) * m,
            }
        })
        .collect()
}

/// Fit of ⟨M⟩(t) to −cos(Ωt).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationFit {
    pub omega: f64,
    pub rms: f64,
    /// Residual above [`OSCILLATION_RESIDUAL`]: not a clean sinusoid.
    pub violated: bool,
}

pub const OSCILLATION_RESIDUAL: f64 = 1e-6;

/// Least-squares fit of ⟨M⟩(t) to −S·cos(Ωt) with S = 1.
pub fn sz_oscillation_check(traj: &[ThreeStateAmplitudes]) -> Result<OscillationFit> {
    if traj.len() < 4 {
        return Err(invalid("oscillation fit needs at least four samples"));
    }
    let t: Vec<f64> = traj.iter().map(|a| a.t).collect();
    let m: Vec<f64> = traj.iter().map(|a| a.expect_m()).collect();
    let mean = m.iter().sum::<f64>() / m.len() as f64;
    let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m.len() as f64;
    if var < 1e-14 {
        return Err(invalid("constant ⟨M⟩ has no oscillation frequency"));
    }
    let resid = |omega: f64| -> f64 {
        t.iter()
            .zip(&m)
            .map(|(&t, &m)| (m + (omega * t).cos()).powi(2))
            .sum::<f64>()
    };
    // seed: scan Ω over frequencies the sampling can resolve
    let span = t[t.len() - 1] - t[0];
    if span <= 0.0 {
        return Err(invalid("oscillation fit needs a time span"));
    }
    let nyquist = std::f64::consts::PI * (t.len() - 1) as f64 / span;
    let trials = 4 * t.len();
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..=trials {
        let omega = nyquist * k as f64 / trials as f64;
        let r = resid(omega);
        if r < best.0 {
            best = (r, omega);
        }
    }
    // Newton on the normal equation dR/dΩ = 0
    let mut omega = best.1;
    for _ in 0..100 {
        let (mut g, mut h) = (0.0, 0.0);
        for (&t, &m) in t.iter().zip(&m) {
            let (s, c) = (omega * t).sin_cos();
            let r = m + c;
            g += -r * s * t;
            h += (s * s - r * c) * t * t;
        }
        if h <= 0.0 {
            break;
        }
        let step = g / h;
        omega -= step;
        if step.abs() <= 1e-15 * omega.abs() {
            break;
        }
    }
    let rms = (resid(omega) / m.len() as f64).sqrt();
    if !rms.is_finite() {
        return Err(Error::Accuracy("oscillation fit diverged".into()));
    }
    Ok(OscillationFit {
        omega,
        rms,
        violated: rms > OSCILLATION_RESIDUAL,
    })
}

/// CSV with columns t_omega0, p_m1, p_0, p_p1, expect_M, expect_dn.
pub fn trajectory_csv(traj: &[ThreeStateAmplitudes], delta_n: usize) -> String {
    let mut out = String::from("t_omega0,p_m1,p_0,p_p1,expect_M,expect_dn\n");
    for (a, e) in traj.iter().zip(expectations(traj, delta_n)) {
        let p = a.probabilities();
        let _ = writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            a.t, p[0], p[1], p[2], e.m, e.dn
        );
    }
    out
}
