//! The rotated-frame one-dimensional problem
//!
//! −½u″ + [½y² + M·√(ΔE² + 8U²y²)]·u = (E + ½)·u
//!
//! solved by finite differences for moderate n, and by WKB action
//! quantization for large n. Also the coupling integrals I and J between
//! levels Δn apart, and the large-n₀ constants D, F and I/√n₀.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{v_coupling_function, RotatedPotential};
use crate::model::ModelParams;
use crate::quadrature::gauss_legendre;

/// Largest n solved on a finite-difference grid; above it the semiclassical
/// routes are used.
pub const FD_MAX_N: usize = 5000;

/// Finite-difference grid controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    /// Grid points per local wavelength at the bottom of the well.
    pub points_per_wavelength: f64,
    /// Extra room beyond the classical turning point.
    pub margin: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            points_per_wavelength: 40.0,
            margin: 10.0,
        }
    }
}

impl GridOptions {
    /// Finer grid used for the coupling integrals, where phase error matters.
    pub fn for_integrals() -> Self {
        GridOptions {
            points_per_wavelength: 160.0,
            margin: 10.0,
        }
    }
}

/// Interior points y_i = −L + (i+1)·h, i = 0..len, with u(±L) = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub half_width: f64,
    pub len: usize,
}

impl Grid {
    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.len + 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.step()
    }

    /// The grid with twice the step and the same end points.
    pub fn coarsened(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            len: self.len.div_ceil(2) - 1,
        }
    }

    /// Grid wide and fine enough for level (n, M).
    pub fn for_level(params: &ModelParams, m: f64, n: usize, opts: &GridOptions) -> Result<Grid> {
        let pot = RotatedPotential::new(params, m);
        let eps = wkb_energy(params, n as f64, m)? + 0.5;
        let yt = turning_point(&pot, eps)?;
        let half_width = (yt + opts.margin).max((2.0 * n as f64).sqrt() + opts.margin);
        let p0 = (2.0 * (eps - pot.value(0.0))).sqrt();
        let h = 2.0 * PI / p0 / opts.points_per_wavelength;
        let mut intervals = (2.0 * half_width / h).ceil() as usize;
        intervals += intervals % 2;
        Ok(Grid {
            half_width,
            len: intervals.max(8) - 1,
        })
    }
}

/// Samples of u_{n,M}(y) on a uniform grid, normalized so Σ|u|²·step = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub y_min: f64,
    pub y_max: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * self.step
    }

    /// Sign changes, ignoring samples below 1e-9 of the peak.
    pub fn node_count(&self) -> usize {
        let peak = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let floor = 1e-9 * peak;
        let mut last = 0.0f64;
        let mut nodes = 0;
        for &v in &self.values {
            if v.abs() <= floor {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                nodes += 1;
            }
            last = v;
        }
        nodes
    }

    /// Largest |u| at the two ends of the grid.
    pub fn boundary_value(&self) -> f64 {
        let a = self.values.first().copied().unwrap_or(0.0).abs();
        let b = self.values.last().copied().unwrap_or(0.0).abs();
        a.max(b)
    }

    /// Σ u² f(y) step
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, u)| u * u * f(self.y(i)))
            .sum::<f64>()
            * self.step
    }

    /// Centered-difference derivative (one-sided zero boundary values).
    pub fn derivative(&self) -> Vec<f64> {
        let n = self.values.len();
        let u = |i: isize| -> f64 {
            if i < 0 || i as usize >= n {
                0.0
            } else {
                self.values[i as usize]
            }
        };
        (0..n as isize)
            .map(|i| (u(i + 1) - u(i - 1)) / (2.0 * self.step))
            .collect()
    }

    fn same_grid(&self, other: &GridFunction) -> bool {
        self.values.len() == other.values.len()
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.y_min - other.y_min).abs() <= 1e-12 * self.y_min.abs().max(1.0)
    }

    /// Two-column `y u` text.
    pub fn write_columns<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# y u")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.12e} {:.12e}", self.y(i), v)?;
        }
        Ok(())
    }
}

fn validate_m(params: &ModelParams, m: f64) -> Result<()> {
    let s = params.spin.value();
    if m.abs() > s + 1e-12 || ((m + s) - (m + s).round()).abs() > 1e-12 {
        return Err(invalid(format!("M = {m} is not a projection of spin {s}")));
    }
    Ok(())
}

/// Number of eigenvalues of the tridiagonal (diag, off) below x.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let off2 = off * off;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - x } else { d - x - off2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (T − λ)x = b for a tridiagonal T with constant off-diagonal,
/// Gaussian elimination with partial pivoting.
fn tridiagonal_solve(diag: &[f64], off: f64, lambda: f64, b: &mut [f64]) {
    let n = diag.len();
    // rows after pivoting have up to two superdiagonals
    let mut d = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut sub = vec![0.0; n];
    for i in 0..n {
        d[i] = diag[i] - lambda;
        if i + 1 < n {
            u1[i] = off;
            sub[i] = off;
        }
    }
    let tiny = f64::EPSILON * diag.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for i in 0..n.saturating_sub(1) {
        if sub[i].abs() > d[i].abs() {
            // swap rows i and i+1
            std::mem::swap(&mut d[i], &mut sub[i]);
            let (a, bb) = (u1[i], d[i + 1]);
            u1[i] = bb;
            d[i + 1] = a;
            let (a2, b2) = (u2[i], u1[i + 1]);
            u2[i] = b2;
            u1[i + 1] = a2;
            b.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let l = sub[i] / d[i];
        d[i + 1] -= l * u1[i];
        u1[i + 1] -= l * u2[i];
        b[i + 1] -= l * b[i];
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut acc = b[i];
        if i + 1 < n {
            acc -= u1[i] * b[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * b[i + 2];
        }
        b[i] = acc / d[i];
    }
}

/// n-th eigenvalue (E + ½) of the finite-difference operator on `grid`.
fn fd_level_value(pot: &RotatedPotential, n: usize, grid: &Grid) -> Result<(f64, Vec<f64>, f64)> {
    if n >= grid.len {
        return Err(Error::GridResolution(format!(
            "level {n} needs more than {} grid points",
            grid.len
        )));
    }
    let h = grid.step();
    let kin = 1.0 / (h * h);
    let off = -0.5 * kin;
    let diag: Vec<f64> = (0..grid.len).map(|i| kin + pot.value(grid.y(i))).collect();
    // Gershgorin bounds
    let mut lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let mut hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, off, mid) > n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    Ok((0.5 * (lo + hi), diag, off))
}

/// n-th level (E, u) on a given grid. E excludes the zero-point ½.
pub fn solve_on_grid(params: &ModelParams, m: f64, n: usize, grid: &Grid) -> Result<(f64, GridFunction)> {
    validate_m(params, m)?;
    let pot = RotatedPotential::new(params, m);
    let (lambda, diag, off) = fd_level_value(&pot, n, grid)?;
    let h = grid.step();
    // inverse iteration from a deterministic start
    let mut x: Vec<f64> = (0..grid.len).map(|i| 1.0 + 0.1 * ((i % 7) as f64)).collect();
    for _ in 0..3 {
        tridiagonal_solve(&diag, off, lambda, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let norm = (x.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    // sign convention: positive outermost lobe on the right
    let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(&v) = x.iter().rev().find(|v| v.abs() > 1e-3 * peak) {
        if v < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let u = GridFunction {
        y_min: grid.y(0),
        y_max: grid.y(grid.len - 1),
        step: h,
        values: x,
    };
    let nodes = u.node_count();
    if nodes != n {
        return Err(Error::GridResolution(format!(
            "level {n} (M = {m}) has {nodes} nodes on a {}-point grid",
            grid.len
        )));
    }
    if u.boundary_value() >= 1e-8 {
        return Err(Error::GridResolution(format!(
            "level {n} (M = {m}) is not contained in |y| < {:.1}",
            grid.half_width
        )));
    }
    Ok((lambda - 0.5, u))
}

/// Raw finite-difference energy E on a grid of `len` interior points
/// spanning the default width for the level.
pub fn fd_energy(params: &ModelParams, m: f64, n: usize, len: usize) -> Result<f64> {
    validate_m(params, m)?;
    let base = Grid::for_level(params, m, n, &GridOptions::default())?;
    let grid = Grid {
        half_width: base.half_width,
        len,
    };
    let pot = RotatedPotential::new(params, m);
    Ok(fd_level_value(&pot, n, &grid)?.0 - 0.5)
}

/// The n-th rotated-frame level with default grid options. The energy is
/// Richardson-extrapolated from steps h and 2h; the function is from step h.
pub fn solve_rotated_level(params: &ModelParams, m: f64, n: usize) -> Result<(f64, GridFunction)> {
    solve_rotated_level_with(params, m, n, &GridOptions::default())
}

pub fn solve_rotated_level_with(
    params: &ModelParams,
    m: f64,
    n: usize,
    opts: &GridOptions,
) -> Result<(f64, GridFunction)> {
    if n > params.n_max {
        return Err(invalid(format!("n = {n} above n_max = {}", params.n_max)));
    }
    validate_m(params, m)?;
    let grid = Grid::for_level(params, m, n, opts)?;
    let (e_fine, u) = solve_on_grid(params, m, n, &grid)?;
    let pot = RotatedPotential::new(params, m);
    let e_coarse = fd_level_value(&pot, n, &grid.coarsened())?.0 - 0.5;
    Ok(((4.0 * e_fine - e_coarse) / 3.0, u))
}

/// Which spin projections the coupling integrals use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Pairing {
    /// Bra u_{n+Δn, M−1}, ket u_{n, M}: the pair actually coupled.
    #[default]
    Geometric,
    /// Both functions at the same M.
    SameM,
}

impl Pairing {
    pub fn bra_m(self, m: f64) -> f64 {
        match self {
            Pairing::Geometric => m - 1.0,
            Pairing::SameM => m,
        }
    }
}

/// I = ∫ u_bra · k(y) · u_ket′ dy with k = 1/(1 + 8U²y²/ΔE²).
pub fn integral_i_from(params: &ModelParams, bra: &GridFunction, ket: &GridFunction) -> Result<f64> {
    if !bra.same_grid(ket) {
        return Err(invalid("bra and ket live on different grids"));
    }
    let k = kernel(params);
    let dket = ket.derivative();
    Ok(bra
        .values
        .iter()
        .zip(&dket)
        .enumerate()
        .map(|(i, (b, d))| b * k(bra.y(i)) * d)
        .sum::<f64>()
        * bra.step)
}

/// J = −∫ u_bra′ · k(y) · u_ket dy.
pub fn integral_j_from(params: &ModelParams, bra: &GridFunction, ket: &GridFunction) -> Result<f64> {
    if !bra.same_grid(ket) {
        return Err(invalid("bra and ket live on different grids"));
    }
    let k = kernel(params);
    let dbra = bra.derivative();
    Ok(-dbra
        .iter()
        .zip(&ket.values)
        .enumerate()
        .map(|(i, (d, u))| d * k(bra.y(i)) * u)
        .sum::<f64>()
        * bra.step)
}

fn kernel(params: &ModelParams) -> impl Fn(f64) -> f64 {
    let f = v_coupling_function(params);
    let r = params.coupling_u / params.delta_e;
    move |y| if r == 0.0 { 1.0 } else { f(y) / r }
}

/// Both coupling integrals for the bra at n + Δn and ket at n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingIntegrals {
    pub i: f64,
    pub j: f64,
}

pub fn coupling_integrals(
    params: &ModelParams,
    m: f64,
    n: usize,
    delta_n: usize,
    pairing: Pairing,
    opts: &GridOptions,
) -> Result<CouplingIntegrals> {
    let bra_m = pairing.bra_m(m);
    validate_m(params, m)?;
    validate_m(params, bra_m)?;
    let bra_n = n + delta_n;
    if bra_n > params.n_max {
        return Err(invalid(format!("n + delta_n = {bra_n} above n_max = {}", params.n_max)));
    }
    // one grid that holds both states
    let g1 = Grid::for_level(params, bra_m, bra_n, opts)?;
    let g2 = Grid::for_level(params, m, n, opts)?;
    let half_width = g1.half_width.max(g2.half_width);
    let step = g1.step().min(g2.step());
    let mut intervals = (2.0 * half_width / step).ceil() as usize;
    intervals += intervals % 2;
    let grid = Grid {
        half_width,
        len: intervals - 1,
    };
    let (_, bra) = solve_on_grid(params, bra_m, bra_n, &grid)?;
    let (_, ket) = solve_on_grid(params, m, n, &grid)?;
    Ok(CouplingIntegrals {
        i: integral_i_from(params, &bra, &ket)?,
        j: integral_j_from(params, &bra, &ket)?,
    })
}

/// I for bra (n+Δn, M−1), ket (n, M) on the integral grid.
pub fn integral_i(params: &ModelParams, m: f64, n: usize, delta_n: usize) -> Result<f64> {
    Ok(coupling_integrals(params, m, n, delta_n, Pairing::Geometric, &GridOptions::for_integrals())?.i)
}

/// J for bra (n+Δn, M−1), ket (n, M) on the integral grid.
pub fn integral_j(params: &ModelParams, m: f64, n: usize, delta_n: usize) -> Result<f64> {
    Ok(coupling_integrals(params, m, n, delta_n, Pairing::Geometric, &GridOptions::for_integrals())?.j)
}

/// Semiclassical |I| between (n+Δn, M−1) and (n, M) along the harmonic
/// orbit of action J = n + (Δn+1)/2, with the spin-flip phase
/// ∫(W − W̄)dθ carried by the dressed gap W = ΔE√(1 + 2aJ cos²θ).
pub fn semiclassical_i(params: &ModelParams, n: usize, delta_n: usize) -> Result<f64> {
    let r = params.coupling_u / params.delta_e;
    let a = 8.0 * r * r;
    let action = n as f64 + 0.5 * (delta_n as f64 + 1.0);
    let b = 2.0 * a * action;
    let w = |t: f64| params.delta_e * (1.0 + b * t.cos().powi(2)).sqrt();
    // cosine series of W(θ), period π
    const TERMS: usize = 64;
    const SAMPLES: usize = 1024;
    let mut c = [0.0; TERMS + 1];
    for j in 0..SAMPLES {
        let t = PI * j as f64 / SAMPLES as f64;
        let wt = w(t);
        for (k, ck) in c.iter_mut().enumerate() {
            *ck += wt * (2.0 * k as f64 * t).cos();
        }
    }
    c[0] /= SAMPLES as f64;
    for ck in c.iter_mut().skip(1) {
        *ck *= 2.0 / SAMPLES as f64;
    }
    let phase = |t: f64| -> f64 {
        (1..=TERMS)
            .map(|k| c[k] * (2.0 * k as f64 * t).sin() / (2.0 * k as f64))
            .sum()
    };
    let dn = delta_n as f64;
    let integrand = |t: f64| -> Complex64 {
        let ft = 1.0 / (1.0 + b * t.cos().powi(2));
        let arg = -(dn * t + phase(t));
        Complex64::from_polar(ft * t.sin(), arg)
    };
    let mut points = 2048;
    let mut prev = f64::NAN;
    loop {
        let s: Complex64 = (0..points)
            .map(|j| integrand(2.0 * PI * j as f64 / points as f64))
            .sum::<Complex64>()
            / points as f64;
        let val = (2.0 * action).sqrt() * s.norm();
        if (val - prev).abs() <= 1e-12 * val.abs().max(1e-300) || points >= 1 << 20 {
            return Ok(val);
        }
        prev = val;
        points *= 2;
    }
}

/// |I|/√n: finite differences up to [`FD_MAX_N`], semiclassical above.
pub fn i_over_sqrt_n(params: &ModelParams, n: usize, delta_n: usize) -> Result<f64> {
    let i = if n <= FD_MAX_N {
        integral_i(params, 0.0, n, delta_n)?.abs()
    } else {
        semiclassical_i(params, n, delta_n)?
    };
    Ok(i / (n as f64).sqrt())
}

// ---- WKB ----

const WKB_NODES: usize = 400;

fn turning_point(pot: &RotatedPotential, eps: f64) -> Result<f64> {
    if eps <= pot.value(0.0) {
        return Err(invalid(format!("energy {eps} below the well bottom")));
    }
    let mut hi = (2.0 * (eps - pot.value(0.0))).sqrt().max(1.0);
    while pot.value(hi) < eps {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pot.value(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn single_well(params: &ModelParams, m: f64) -> Result<()> {
    // V''(0) = 1 + 8U²M/ΔE must stay positive
    let curv = 1.0 + 8.0 * params.coupling_u.powi(2) * m / params.delta_e;
    if curv <= 0.0 {
        return Err(invalid(format!(
            "the M = {m} potential is a double well; WKB quantization assumes a single well"
        )));
    }
    Ok(())
}

struct Orbit {
    action: f64,
    period: f64,
}

/// ∮p dy and the period ∮dy/p at energy ε, via y = y_t sin φ.
fn orbit(pot: &RotatedPotential, eps: f64, gl: &(Vec<f64>, Vec<f64>)) -> Result<Orbit> {
    let yt = turning_point(pot, eps)?;
    let (x, w) = gl;
    let mut action = 0.0;
    let mut period = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        // φ ∈ [0, π/2]
        let phi = 0.25 * PI * (xi + 1.0);
        let wphi = 0.25 * PI * wi;
        let y = yt * phi.sin();
        let dy = yt * phi.cos();
        let p2 = 2.0 * (eps - pot.value(y));
        let p = if p2 > 0.0 { p2.sqrt() } else { 0.0 };
        action += wphi * p * dy;
        if p > 0.0 {
            period += wphi * dy / p;
        } else {
            // at the turning point dy/p → y_t/√(2 y_t V′(y_t))
            period += wphi * yt / (2.0 * yt * pot.derivative(yt)).sqrt();
        }
    }
    Ok(Orbit {
        action: 4.0 * action,
        period: 4.0 * period,
    })
}

/// WKB energy E(n, M) from ∮p dy = 2π(n + ½), continuous in n and M.
pub fn wkb_energy(params: &ModelParams, n: f64, m: f64) -> Result<f64> {
    WkbLevelModel::new(*params)?.energy(n, m)
}

/// Classical orbit average ⟨f(y)⟩ over the WKB orbit of level (n, M).
pub fn orbit_average(params: &ModelParams, m: f64, n: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    single_well(params, m)?;
    let pot = RotatedPotential::new(params, m);
    let eps = wkb_energy(params, n, m)? + 0.5;
    let yt = turning_point(&pot, eps)?;
    let (x, w) = gauss_legendre(WKB_NODES);
    let (mut num, mut den) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let phi = 0.25 * PI * (xi + 1.0);
        let y = yt * phi.sin();
        let p = (2.0 * (eps - pot.value(y))).max(0.0).sqrt();
        let g = if p > 0.0 {
            yt * phi.cos() / p
        } else {
            yt / (2.0 * yt * pot.derivative(yt)).sqrt()
        };
        num += wi * g * f(y);
        den += wi * g;
    }
    Ok(num / den)
}

/// E(n, M) by action quantization, with D = ∂²E/∂n∂M and F = ½∂²E/∂M²
/// from centered differences (δn = 1, δM = ½).
#[derive(Clone, Debug)]
pub struct WkbLevelModel {
    params: ModelParams,
    gl: (Vec<f64>, Vec<f64>),
}

impl WkbLevelModel {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(WkbLevelModel {
            params,
            gl: gauss_legendre(WKB_NODES),
        })
    }

    pub fn energy(&self, n: f64, m: f64) -> Result<f64> {
        if !(n > -0.5) {
            return Err(invalid(format!("WKB level index {n} must exceed -1/2")));
        }
        single_well(&self.params, m)?;
        let pot = RotatedPotential::new(&self.params, m);
        let target = 2.0 * PI * (n + 0.5);
        let bottom = pot.value(0.0);
        let mut eps = (n + 0.5 + m * self.params.delta_e).max(bottom + 1e-3);
        for it in 0..100 {
            let o = orbit(&pot, eps, &self.gl)?;
            let step = (target - o.action) / o.period;
            let mut next = eps + step;
            if next <= bottom {
                next = 0.5 * (eps + bottom);
            }
            // rounding noise in the action scales with the kinetic energy
            // ε − V(0) as well as with |ε|
            let scale = eps.abs().max(eps - bottom).max(1.0);
            let done = step.abs() <= 1e-15 * scale;
            eps = next;
            if done || (it > 5 && step.abs() <= 16.0 * f64::EPSILON * scale) {
                return Ok(eps - 0.5);
            }
        }
        Err(Error::Convergence {
            iterations: 100,
            best_residual: f64::NAN,
        })
    }

    /// ∂²E/∂n∂M at (n, M = 0).
    pub fn d_at(&self, n: f64) -> Result<f64> {
        let (dn, dm) = (1.0, 0.5);
        let e = |a: f64, b: f64| self.energy(n + a, b);
        Ok((e(dn, dm)? - e(dn, -dm)? - e(-dn, dm)? + e(-dn, -dm)?) / (4.0 * dn * dm))
    }

    /// ½∂²E/∂M² at (n, M = 0).
    pub fn f_at(&self, n: f64) -> Result<f64> {
        let dm = 0.5;
        Ok(0.5 * (self.energy(n, dm)? - 2.0 * self.energy(n, 0.0)? + self.energy(n, -dm)?) / (dm * dm))
    }
}

/// Large-n₀ constants n₀D, n₀F and I/√n₀ at fixed g.
#[derive(Clone, Debug, PartialEq)]
pub struct WkbParameters {
    pub n0_d: f64,
    pub n0_f: f64,
    pub i_over_sqrt_n0: f64,
    /// (n₀, n₀D, n₀F, I/√n₀) at each ladder point.
    pub ladder: Vec<(usize, f64, f64, f64)>,
}

/// The n₀ ladder used by [`wkb_parameters`].
pub const WKB_LADDER: [usize; 4] = [10_000, 20_000, 40_000, 80_000];

/// Evaluate n₀D, n₀F and I/√n₀ along [`WKB_LADDER`] at the g of `params`
/// and extrapolate linearly in 1/n₀.
pub fn wkb_parameters(params: &ModelParams, delta_n: usize) -> Result<WkbParameters> {
    let g = params.g();
    let mut ladder = Vec::with_capacity(WKB_LADDER.len());
    for &n0 in &WKB_LADDER {
        let p = ModelParams::from_g(params.delta_e, g, params.spin, n0, n0 + 2 * delta_n + 1)?;
        let model = WkbLevelModel::new(p)?;
        let nf = n0 as f64;
        let d = model.d_at(nf)? * nf;
        let f = model.f_at(nf)? * nf;
        let i = semiclassical_i(&p, n0, delta_n)? / nf.sqrt();
        ladder.push((n0, d, f, i));
    }
    let extrapolate = |pick: fn(&(usize, f64, f64, f64)) -> f64, name: &str| -> Result<f64> {
        let est: Vec<f64> = ladder
            .windows(2)
            .map(|w| {
                let (x1, x2) = (1.0 / w[0].0 as f64, 1.0 / w[1].0 as f64);
                let (y1, y2) = (pick(&w[0]), pick(&w[1]));
                y2 - x2 * (y2 - y1) / (x2 - x1)
            })
            .collect();
        let last = est[est.len() - 1];
        let prev = est[est.len() - 2];
        if (last - prev).abs() > 0.05 * last.abs() {
            return Err(Error::Accuracy(format!(
                "{name} extrapolation not settled: {prev:.6e} then {last:.6e}"
            )));
        }
        Ok(last)
    };
    Ok(WkbParameters {
        n0_d: extrapolate(|r| r.1, "n0*D")?,
        n0_f: extrapolate(|r| r.2, "n0*F")?,
        i_over_sqrt_n0: extrapolate(|r| r.3, "I/sqrt(n0)")?,
        ladder,
    })
}
