//! Labels, level fits and anticrossings of the full Hamiltonian.
//!
//! Eigenstates are labeled in the rotated frame: the spin part
//! H_s = H − a†a acts on a dressed state |n, M⟩ like M·W(y) with
//! W = √(ΔE² + 8U²y²), so ⟨H_s⟩/ΔE(g) estimates M and ‖H_s x‖²/⟨W²⟩
//! estimates M². Lab-frame ⟨Sz⟩ is reported alongside but shrinks with g.

use rayon::prelude::*;

use crate::dressed::{phase_average_ratio, resonance_g, DressedEvaluator, ResonanceSpec};
use crate::eigen::dense::symmetric_eigen;
use crate::eigen::{count_in, eig_interior_with, eig_range_with, EigenPair, SolverOptions};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{apply_spin_part, build_hamiltonian, BandedSymmetricMatrix};
use crate::model::{recommended_n_max, ModelParams, Spin};
use crate::rotated1d::{i_over_sqrt_n, WkbLevelModel};

/// Labels below this confidence are treated as mixed.
pub const LABEL_CONFIDENCE: f64 = 0.8;

/// An eigenvalue with its (n, M) label and expectation values.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledLevel {
    pub energy: f64,
    pub n_label: usize,
    pub m_label: f64,
    /// Lab-frame ⟨Sz⟩.
    pub sz_expect: f64,
    /// ⟨a†a⟩
    pub occ_expect: f64,
    /// Rotated-frame ⟨M⟩ and ⟨M²⟩ estimates.
    pub m_rotated: f64,
    pub m2_rotated: f64,
    /// 1 for a pure product state, near 0 for an even mixture.
    pub confidence: f64,
    pub mixed: bool,
}

impl LabeledLevel {
    /// A level with an exact label, as for a decoupled state.
    pub fn exact(energy: f64, n: usize, m: f64) -> Self {
        LabeledLevel {
            energy,
            n_label: n,
            m_label: m,
            sz_expect: m,
            occ_expect: n as f64,
            m_rotated: m,
            m2_rotated: m * m,
            confidence: 1.0,
            mixed: false,
        }
    }
}

struct Moments {
    sz: f64,
    occ: f64,
    m1: f64,
    m2: f64,
}

fn moments(params: &ModelParams, h: &BandedSymmetricMatrix, x: &[f64]) -> Result<Moments> {
    let d = params.spin.dim();
    let s = params.spin.value();
    let (mut sz, mut occ, mut norm) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let p = xi * xi;
        norm += p;
        occ += p * (i / d) as f64;
        sz += p * ((i % d) as f64 - s);
    }
    sz /= norm;
    occ /= norm;
    let hs = apply_spin_part(params, h, x);
    let e_spin = x.iter().zip(&hs).map(|(a, b)| a * b).sum::<f64>() / norm;
    let hs2 = hs.iter().map(|v| v * v).sum::<f64>() / norm;
    let r = params.coupling_u / params.delta_e;
    let n_est = occ.round().max(0.0) as usize;
    let gap = params.delta_e * phase_average_ratio(8.0 * r * r, n_est)?;
    let w2 = params.delta_e.powi(2) + 4.0 * params.coupling_u.powi(2) * (2.0 * occ + 1.0);
    Ok(Moments {
        sz,
        occ,
        m1: e_spin / gap,
        m2: hs2 / w2,
    })
}

/// Attach expectations and (n, M) labels to eigenpairs of `build_hamiltonian(params)`.
pub fn label_states(pairs: &[EigenPair], params: &ModelParams) -> Result<Vec<LabeledLevel>> {
    let h = build_hamiltonian(params)?;
    label_with(pairs, params, &h)
}

/// Within an exactly degenerate eigenspace any basis is valid; pick the one
/// that diagonalizes the spin part so product states come out pure.
fn resolve_clusters(params: &ModelParams, h: &BandedSymmetricMatrix, pairs: &[EigenPair]) -> Result<Vec<EigenPair>> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].value.total_cmp(&pairs[b].value));
    let mut out: Vec<EigenPair> = pairs.to_vec();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let (a, b) = (pairs[order[end - 1]].value, pairs[order[end]].value);
            if (b - a).abs() > CLUSTER_RTOL * a.abs().max(1.0) {
                break;
            }
            end += 1;
        }
        let k = end - start;
        if k > 1 {
            let members: Vec<&EigenPair> = order[start..end].iter().map(|&i| &pairs[i]).collect();
            let images: Vec<Vec<f64>> = members
                .iter()
                .map(|p| apply_spin_part(params, h, &p.vector))
                .collect();
            let mut a = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    a[i * k + j] = 0.5
                        * (dot(&members[i].vector, &images[j]) + dot(&members[j].vector, &images[i]));
                }
            }
            let (_, rot) = symmetric_eigen(&a, k)?;
            for (r, &slot) in order[start..end].iter().enumerate() {
                let mut v = vec![0.0; members[0].vector.len()];
                for (c, m) in rot[r * k..(r + 1) * k].iter().zip(&members) {
                    for (vi, xi) in v.iter_mut().zip(&m.vector) {
                        *vi += c * xi;
                    }
                }
                out[slot].vector = v;
            }
        }
        start = end;
    }
    Ok(out)
}

/// Eigenvalues closer than this (relative) are treated as one degenerate level.
const CLUSTER_RTOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn label_with(pairs: &[EigenPair], params: &ModelParams, h: &BandedSymmetricMatrix) -> Result<Vec<LabeledLevel>> {
    let s = params.spin.value();
    let r = params.coupling_u / params.delta_e;
    let pairs = resolve_clusters(params, h, pairs)?;
    pairs
        .iter()
        .map(|p| {
            let mo = moments(params, h, &p.vector)?;
            let m_label = ((mo.m1 + s).round() - s).clamp(-s, s);
            let n_est = mo.occ.round().max(0.0) as usize;
            let gap = params.delta_e * phase_average_ratio(8.0 * r * r, n_est)?;
            let n_label = (p.value - m_label * gap).round().max(0.0) as usize;
            let confidence =
                (1.0 - 2.0 * (mo.m1 - m_label).abs() - (mo.m2 - mo.m1 * mo.m1).max(0.0)).clamp(0.0, 1.0);
            Ok(LabeledLevel {
                energy: p.value,
                n_label,
                m_label,
                sz_expect: mo.sz,
                occ_expect: mo.occ,
                m_rotated: mo.m1,
                m2_rotated: mo.m2,
                confidence,
                mixed: confidence < LABEL_CONFIDENCE,
            })
        })
        .collect()
}

/// Labeled levels with |n_label − n₀| ≤ window, ascending in energy.
pub fn spectrum_window(params: &ModelParams, window: usize, opts: &SolverOptions) -> Result<Vec<LabeledLevel>> {
    let h = build_hamiltonian(params)?;
    let r = params.coupling_u / params.delta_e;
    let reach = params.spin.value() * params.delta_e * phase_average_ratio(8.0 * r * r, params.n0)?;
    let n0 = params.n0 as f64;
    let w = window as f64 + 0.5;
    let pairs = eig_range_with(&h, n0 - w - reach - 1.0, n0 + w + reach + 1.0, opts)?;
    let mut levels = label_with(&pairs, params, &h)?;
    levels.retain(|l| l.n_label.abs_diff(params.n0) <= window);
    Ok(levels)
}

/// E = A + B(n−n₀) + C·M + D·M(n−n₀) + F·M²
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub residual_rms: f64,
    pub levels_used: usize,
}

impl FitCoefficients {
    pub fn energy(&self, dn: f64, m: f64) -> f64 {
        self.a + self.b * dn + self.c * m + self.d * m * dn + self.f * m * m
    }
}

/// Least-squares fit of the level expansion over |n − n₀| ≤ window,
/// skipping mixed levels.
pub fn fit_levels(levels: &[LabeledLevel], n0: usize, window: usize) -> Result<FitCoefficients> {
    let used: Vec<&LabeledLevel> = levels
        .iter()
        .filter(|l| !l.mixed && l.confidence >= LABEL_CONFIDENCE)
        .filter(|l| l.n_label.abs_diff(n0) <= window)
        .collect();
    if used.len() < 15 {
        return Err(invalid(format!(
            "only {} clean levels within {window} of n0 = {n0}; at least 15 are needed",
            used.len()
        )));
    }
    let rows: Vec<[f64; 5]> = used
        .iter()
        .map(|l| {
            let dn = l.n_label as f64 - n0 as f64;
            let m = l.m_label;
            [1.0, dn, m, m * dn, m * m]
        })
        .collect();
    let rhs: Vec<f64> = used.iter().map(|l| l.energy).collect();
    let x = least_squares(&rows, &rhs)?;
    let fit = FitCoefficients {
        a: x[0],
        b: x[1],
        c: x[2],
        d: x[3],
        f: x[4],
        residual_rms: 0.0,
        levels_used: used.len(),
    };
    let ss: f64 = rows
        .iter()
        .zip(&rhs)
        .map(|(r, e)| (fit.energy(r[1], r[2]) - e).powi(2))
        .sum();
    Ok(FitCoefficients {
        residual_rms: (ss / rows.len() as f64).sqrt(),
        ..fit
    })
}

/// Householder QR least squares for a tall system with five columns.
fn least_squares(rows: &[[f64; 5]], rhs: &[f64]) -> Result<[f64; 5]> {
    const K: usize = 5;
    let m = rows.len();
    let mut a: Vec<[f64; K]> = rows.to_vec();
    let mut b = rhs.to_vec();
    let scale: Vec<f64> = (0..K)
        .map(|j| a.iter().map(|r| r[j].abs()).fold(0.0, f64::max))
        .collect();
    for j in 0..K {
        let norm = (j..m).map(|i| a[i][j] * a[i][j]).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale[j].max(1e-300) || scale[j] == 0.0 {
            return Err(invalid("fit design is rank deficient; widen the window"));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| a[i][j]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for c in j..K {
            let dot: f64 = (j..m).map(|i| v[i - j] * a[i][c]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                a[i][c] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..m {
            b[i] -= f * v[i - j];
        }
    }
    let mut x = [0.0; K];
    for j in (0..K).rev() {
        let mut acc = b[j];
        for c in j + 1..K {
            acc -= a[j][c] * x[c];
        }
        x[j] = acc / a[j][j];
    }
    Ok(x)
}

/// F − D·Δn: how far the M = ±1 partners sit from the M = 0 level at
/// resonance.
pub fn basis_mismatch(fit: &FitCoefficients, delta_n: usize) -> f64 {
    fit.f - fit.d * delta_n as f64
}

/// |[n₀(F − DΔn)]∞| / (2√2·g·[I/√n₀]∞)
pub fn n_crit_estimate(n0_mismatch_const: f64, g_star: f64, i_over_sqrt_n0: f64) -> Result<f64> {
    let denom = 2.0 * 2f64.sqrt() * g_star * i_over_sqrt_n0;
    if denom == 0.0 || !denom.is_finite() {
        return Err(invalid("n_crit needs a nonzero coupling"));
    }
    Ok(n0_mismatch_const.abs() / denom)
}

/// Controls for [`find_anticrossing`].
#[derive(Clone, Debug, PartialEq)]
pub struct AnticrossingOptions {
    pub solver: SolverOptions,
    /// Coarse scan points across the bracket.
    pub scan_points: usize,
    /// Relative tolerance on g* in the refinement.
    pub g_rtol: f64,
}

impl Default for AnticrossingOptions {
    fn default() -> Self {
        AnticrossingOptions {
            solver: SolverOptions {
                tol: 1e-12,
                ..SolverOptions::default()
            },
            scan_points: 15,
            g_rtol: 1e-9,
        }
    }
}

/// Bracket [0.95, 1.02]·g_res used when none is given.
pub const DEFAULT_BRACKET: (f64, f64) = (0.95, 1.02);

#[derive(Clone, Debug, PartialEq)]
pub struct AnticrossingResult {
    pub g_star: f64,
    /// Minimum gap between the resonant pair.
    pub splitting: f64,
    pub n0: usize,
    pub delta_n: usize,
    /// g from the dressed-energy resonance condition.
    pub g_resonance: f64,
    /// The resonant pair at g*, lower level first.
    pub pair: [LabeledLevel; 2],
    /// The third member of the triplet (mostly M = 0 far from n_crit).
    pub partner: LabeledLevel,
    /// Gap evaluations spent.
    pub evaluations: usize,
}

/// The three levels nearest σ = n₀ at coupling g, labeled, ascending.
fn triplet(
    template: &ModelParams,
    g: f64,
    opts: &SolverOptions,
) -> Result<Vec<LabeledLevel>> {
    let params = template.with_g(g)?;
    let h = build_hamiltonian(&params)?;
    let sigma = params.n0 as f64;
    let found = count_in(&h, sigma - 0.5, sigma + 0.5);
    if found != 3 {
        return Err(Error::Accuracy(format!(
            "expected 3 levels within 0.5 of {sigma} at g = {g}, inertia count gives {found}"
        )));
    }
    let pairs = eig_interior_with(&h, sigma, 3, opts)?;
    label_with(&pairs, &params, &h)
}

/// Indices of the resonant pair: the two levels with the largest ⟨M²⟩.
fn pair_indices(levels: &[LabeledLevel]) -> (usize, usize) {
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| levels[b].m2_rotated.total_cmp(&levels[a].m2_rotated));
    let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
    (a, b)
}

fn pair_gap(levels: &[LabeledLevel]) -> f64 {
    let (a, b) = pair_indices(levels);
    (levels[b].energy - levels[a].energy).abs()
}

/// Splitting between the resonant pair at coupling g (no minimization).
pub fn pair_gap_at(template: &ModelParams, g: f64, opts: &SolverOptions) -> Result<f64> {
    Ok(pair_gap(&triplet(template, g, opts)?))
}

fn require_spin_one(params: &ModelParams) -> Result<()> {
    if params.spin != Spin::ONE {
        return Err(invalid("anticrossing search is defined for spin 1"));
    }
    Ok(())
}

/// Minimize the gap of the resonant pair over g.
///
/// `g_bracket` is absolute; `None` uses [`DEFAULT_BRACKET`] around the
/// dressed-energy resonance.
pub fn find_anticrossing(
    template: &ModelParams,
    delta_n: usize,
    g_bracket: Option<(f64, f64)>,
    opts: &AnticrossingOptions,
) -> Result<AnticrossingResult> {
    require_spin_one(template)?;
    let spec = ResonanceSpec::new(delta_n)?;
    if template.n0 == 0 {
        return Err(Error::NoResonance("n0 = 0 has no multiphoton anticrossing".into()));
    }
    let g_res = resonance_g(template.delta_e, spec, template.n0)?;
    if g_res == 0.0 {
        return Err(Error::NoResonance("resonance at zero coupling".into()));
    }
    let (lo, hi) = g_bracket.unwrap_or((DEFAULT_BRACKET.0 * g_res, DEFAULT_BRACKET.1 * g_res));
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid(format!("bad g bracket [{lo}, {hi}]")));
    }
    let mut evaluations = 0;
    let mut gap = |g: f64| -> Result<f64> {
        evaluations += 1;
        pair_gap_at(template, g, &opts.solver)
    };
    let pts = opts.scan_points.max(5);
    let grid: Vec<f64> = (0..pts)
        .map(|i| lo + (hi - lo) * i as f64 / (pts - 1) as f64)
        .collect();
    let mut values = Vec::with_capacity(pts);
    for &g in &grid {
        values.push(gap(g)?);
    }
    let best = (0..pts)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    if best == 0 || best == pts - 1 {
        return Err(Error::Bracket(format!(
            "gap minimum at the bracket edge g = {:.6e} (bracket [{lo:.6e}, {hi:.6e}])",
            grid[best]
        )));
    }
    let (g_star, _) = brent_minimize(
        |g| gap(g).map(|v| v * v),
        grid[best - 1],
        grid[best],
        grid[best + 1],
        opts.g_rtol,
    )?;
    let levels = triplet(template, g_star, &opts.solver)?;
    evaluations += 1;
    let (a, b) = pair_indices(&levels);
    let other = 3 - a - b;
    Ok(AnticrossingResult {
        g_star,
        splitting: (levels[b].energy - levels[a].energy).abs(),
        n0: template.n0,
        delta_n,
        g_resonance: g_res,
        pair: [levels[a].clone(), levels[b].clone()],
        partner: levels[other].clone(),
        evaluations,
    })
}

/// Brent's minimization from a bracketing triple a < b < c, f(b) < f(a), f(c).
fn brent_minimize(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    c: f64,
    rtol: f64,
) -> Result<(f64, f64)> {
    const CGOLD: f64 = 0.381_966_011_250_105;
    let (mut lo, mut hi) = (a, c);
    let mut x = b;
    let mut fx = f(x)?;
    let (mut w, mut v, mut fw, mut fv) = (x, x, fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (lo + hi);
        let tol1 = rtol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            return Ok((x, fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::Convergence {
        iterations: 200,
        best_residual: fx,
    })
}

/// One point of a splitting scan.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub n0: usize,
    pub result: Result<ScanValues>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanValues {
    pub anticrossing: AnticrossingResult,
    /// v = 2g·I at this n₀ (I from the rotated-frame integral).
    pub v_predicted: f64,
    /// F − DΔn from the WKB level model at this n₀.
    pub mismatch: f64,
}

/// find_anticrossing at each n₀ (n_max from [`recommended_n_max`]),
/// in parallel, returned in ascending n₀ order. Failed points are kept.
pub fn splitting_scan(
    template: &ModelParams,
    delta_n: usize,
    n0_list: &[usize],
    opts: &AnticrossingOptions,
) -> Vec<ScanPoint> {
    let mut list = n0_list.to_vec();
    list.sort_unstable();
    list.dedup();
    list.par_iter()
        .map(|&n0| ScanPoint {
            n0,
            result: scan_point(template, delta_n, n0, opts),
        })
        .collect()
}

fn scan_point(template: &ModelParams, delta_n: usize, n0: usize, opts: &AnticrossingOptions) -> Result<ScanValues> {
    let params = ModelParams::new(
        template.delta_e,
        template.coupling_u,
        template.spin,
        n0,
        recommended_n_max(n0, delta_n),
    )?;
    let anticrossing = find_anticrossing(&params, delta_n, None, opts)?;
    let at = params.with_g(anticrossing.g_star)?;
    let i = i_over_sqrt_n(&at, n0, delta_n)? * (n0 as f64).sqrt();
    let v_predicted = 2.0 * at.coupling_u * i / at.delta_e;
    let wkb = WkbLevelModel::new(at)?;
    let mismatch = wkb.f_at(n0 as f64)? - wkb.d_at(n0 as f64)? * delta_n as f64;
    Ok(ScanValues {
        anticrossing,
        v_predicted,
        mismatch,
    })
}

/// Three-level saturation law s(n₀) = √(δ²/4 + P²) − δ/2 with δ = c/n₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationFit {
    pub c: f64,
    pub plateau: f64,
    /// RMS of the relative residuals.
    pub rms: f64,
}

impl SaturationFit {
    pub fn splitting(&self, n0: f64) -> f64 {
        let delta = self.c / n0;
        (0.25 * delta * delta + self.plateau * self.plateau).sqrt() - 0.5 * delta
    }
}

/// Fit (c, P) to (n₀, splitting) points by Gauss–Newton on relative residuals.
pub fn fit_saturation(points: &[(f64, f64)]) -> Result<SaturationFit> {
    if points.len() < 2 {
        return Err(invalid("saturation fit needs at least two points"));
    }
    if points.iter().any(|&(n, s)| !(n > 0.0 && s > 0.0)) {
        return Err(invalid("saturation fit needs positive n0 and splittings"));
    }
    let smax = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let (n_small, s_small) = points
        .iter()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((1.0, 1.0));
    // work in logs so both parameters stay positive
    let mut lp = (1.2 * smax).ln();
    let p0 = lp.exp();
    let mut lc = ((p0 * p0 / s_small).max(1e-12) * n_small).ln();
    let residuals = |lc: f64, lp: f64| -> Vec<f64> {
        let fit = SaturationFit {
            c: lc.exp(),
            plateau: lp.exp(),
            rms: 0.0,
        };
        points.iter().map(|&(n, s)| fit.splitting(n) / s - 1.0).collect()
    };
    let mut lambda = 1e-3;
    let mut r = residuals(lc, lp);
    let mut cost: f64 = r.iter().map(|x| x * x).sum();
    for _ in 0..200 {
        let h = 1e-7;
        let rc = residuals(lc + h, lp);
        let rp = residuals(lc, lp + h);
        let jc: Vec<f64> = rc.iter().zip(&r).map(|(a, b)| (a - b) / h).collect();
        let jp: Vec<f64> = rp.iter().zip(&r).map(|(a, b)| (a - b) / h).collect();
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..r.len() {
            a11 += jc[k] * jc[k];
            a12 += jc[k] * jp[k];
            a22 += jp[k] * jp[k];
            g1 += jc[k] * r[k];
            g2 += jp[k] * r[k];
        }
        let (b11, b22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
        let det = b11 * b22 - a12 * a12;
        if det == 0.0 {
            break;
        }
        let dc = -(b22 * g1 - a12 * g2) / det;
        let dp = -(b11 * g2 - a12 * g1) / det;
        let trial = residuals(lc + dc, lp + dp);
        let tcost: f64 = trial.iter().map(|x| x * x).sum();
        if tcost < cost {
            lc += dc;
            lp += dp;
            r = trial;
            let done = (cost - tcost) <= 1e-15 * cost.max(1e-300);
            cost = tcost;
            lambda *= 0.3;
            if done {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    Ok(SaturationFit {
        c: lc.exp(),
        plateau: lp.exp(),
        rms: (cost / points.len() as f64).sqrt(),
    })
}

/// n₀ where the measured splitting first reaches `level`, by linear
/// interpolation in log n₀ between bracketing points.
pub fn crossover(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.windows(2).find_map(|w| {
        let ((n1, s1), (n2, s2)) = (w[0], w[1]);
        if s1 < level && s2 >= level {
            let t = (level - s1) / (s2 - s1);
            Some((n1.ln() + t * (n2.ln() - n1.ln())).exp())
        } else {
            None
        }
    })
}

/// Whether [`DressedEvaluator`] can be built for n₀ (a cheap precheck for
/// scans driven from configuration).
pub fn resonance_available(delta_e: f64, delta_n: usize, n0: usize) -> Result<f64> {
    let spec = ResonanceSpec::new(delta_n)?;
    let eval = DressedEvaluator::new(n0)?;
    crate::dressed::resonance_g_with(&eval, delta_e, spec, n0)
}
