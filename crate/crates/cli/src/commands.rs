use std::f64::consts::{PI, SQRT_2};

use bloch_siegert::config::RunConfig;
use bloch_siegert::dressed::{
    dressed_energy_series, hermann_swain_lhs, resonance_g, DressedEvaluator, QUADRATURE_RTOL,
};
use bloch_siegert::dynamics::{
    coupling_v, evolve_analytic, evolve_numeric, expectations, sz_oscillation_check, time_grid,
    trajectory_csv, ThreeStateAmplitudes, ThreeStateHamiltonian,
};
use bloch_siegert::eigen::SolverOptions;
use bloch_siegert::rotated1d::{i_over_sqrt_n, wkb_parameters};
use bloch_siegert::spectroscopy::{
    basis_mismatch, crossover, find_anticrossing, fit_levels, fit_saturation, n_crit_estimate,
    spectrum_window, splitting_scan, AnticrossingOptions, LabeledLevel, ScanPoint, LABEL_CONFIDENCE,
};
use bloch_siegert::{Error, ModelParams};
use serde::Serialize;
use serde_json::json;

use crate::output::{num, Csv, Failure, Manifest, OutDir, ParamsRecord};
use crate::CliError;

/// The n₀ ladder used by the scan commands when `n0_list` is absent.
pub const DEFAULT_N0_LIST: [usize; 5] = [1_000, 3_000, 10_000, 30_000, 100_000];
const DEFAULT_WINDOW: usize = 20;
const DEFAULT_T_STEPS: usize = 400;
/// Time window when the coupling is zero and there is no period to scale by.
const IDLE_T_MAX: f64 = 1000.0;

pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub seed: u64,
    pub out: &'a OutDir,
    pub manifest: &'a mut Manifest,
}

impl Run<'_> {
    fn solver(&self) -> SolverOptions {
        SolverOptions {
            seed: self.seed,
            ..SolverOptions::default()
        }
    }

    fn anticrossing_options(&self) -> AnticrossingOptions {
        let mut opts = AnticrossingOptions::default();
        opts.solver.seed = self.seed;
        opts
    }

    fn record(&mut self, p: &ModelParams) {
        self.manifest.params = Some(ParamsRecord::from(p));
    }
}

fn zero_coupling_requested(cfg: &RunConfig) -> bool {
    cfg.coupling_u == Some(0.0) || cfg.g == Some(0.0)
}

fn reject_zero_coupling(cfg: &RunConfig) -> Result<(), CliError> {
    if zero_coupling_requested(cfg) {
        return Err(Error::NoResonance("the configured coupling is zero, so no level pair anticrosses".into()).into());
    }
    Ok(())
}

/// Model parameters with the configured coupling, or the resonant one for
/// the configured Δn when none is given.
fn resonant_params(cfg: &RunConfig) -> Result<ModelParams, CliError> {
    let p = cfg.model_params()?;
    if cfg.coupling()?.is_some() {
        return Ok(p);
    }
    let g = resonance_g(p.delta_e, cfg.resonance_spec()?, p.n0)?;
    Ok(p.with_g(g)?)
}

#[derive(Serialize)]
struct LevelRecord {
    energy: f64,
    n: usize,
    m: f64,
    confidence: f64,
    mixed: bool,
    m_rotated: f64,
    m2_rotated: f64,
    sz_expect: f64,
    occ_expect: f64,
}

impl From<&LabeledLevel> for LevelRecord {
    fn from(l: &LabeledLevel) -> Self {
        LevelRecord {
            energy: l.energy,
            n: l.n_label,
            m: l.m_label,
            confidence: l.confidence,
            mixed: l.mixed,
            m_rotated: l.m_rotated,
            m2_rotated: l.m2_rotated,
            sz_expect: l.sz_expect,
            occ_expect: l.occ_expect,
        }
    }
}

pub fn dressed(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    let spec = cfg.resonance_spec()?;
    let n0 = cfg.n0();
    let (g_min, g_max, steps) = (cfg.g_min.unwrap_or(0.0), cfg.g_max.unwrap_or(0.5), cfg.g_steps.unwrap_or(50));
    if !(g_min >= 0.0 && g_max >= g_min) {
        return Err(Error::InvalidParameter(format!("config: g range [{g_min}, {g_max}] must satisfy 0 <= g_min <= g_max")).into());
    }
    let eval = DressedEvaluator::new(n0)?;
    let mut csv = Csv::new(&["g", "dressed_ratio", "series_ratio", "hs_ratio_k"]);
    for i in 0..=steps {
        let g = g_min + (g_max - g_min) * i as f64 / steps as f64;
        let a = 8.0 * g * g / n0 as f64;
        csv.row(&[
            num(g),
            num(eval.ratio(a)?),
            num(dressed_energy_series(g)),
            num(hermann_swain_lhs(g, spec.k)?),
        ]);
    }
    run.record(&cfg.model_params()?);
    run.manifest.settings = json!({ "g_min": g_min, "g_max": g_max, "g_steps": steps, "k": spec.k, "n": n0 });
    run.manifest.tolerances = json!({ "quadrature_rtol": QUADRATURE_RTOL });
    run.out.write(run.manifest, "dressed.csv", &csv.into_string())?;
    Ok(())
}

pub fn resonance(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    reject_zero_coupling(cfg)?;
    let spec = cfg.resonance_spec()?;
    let p = cfg.model_params()?;
    let opts = run.anticrossing_options();
    let bracket = cfg.g_bracket.map(|[lo, hi]| (lo, hi));
    let res = find_anticrossing(&p, spec.delta_n, bracket, &opts)?;
    let at = p.with_g(res.g_star)?;
    run.record(&at);
    let report = json!({
        "delta_e": p.delta_e,
        "delta_n": spec.delta_n,
        "n0": p.n0,
        "n_max": p.n_max,
        "g_resonance": res.g_resonance,
        "g_star": res.g_star,
        "g_star_over_g_resonance": res.g_star / res.g_resonance,
        "coupling_u_star": at.coupling_u,
        "splitting": res.splitting,
        "pair": [LevelRecord::from(&res.pair[0]), LevelRecord::from(&res.pair[1])],
        "partner": LevelRecord::from(&res.partner),
    });
    run.manifest.settings = json!({ "g_bracket": bracket, "scan_points": opts.scan_points });
    run.manifest.tolerances = json!({ "eigen_tol": opts.solver.tol, "g_rtol": opts.g_rtol });
    run.manifest.diagnostics = json!({ "gap_evaluations": res.evaluations });
    run.out.write_json(run.manifest, "resonance.json", &report)?;
    Ok(())
}

fn labeled_spectrum(run: &mut Run) -> Result<(ModelParams, usize, Vec<LabeledLevel>), CliError> {
    let p = resonant_params(run.cfg)?;
    let window = run.cfg.window.unwrap_or(DEFAULT_WINDOW);
    let solver = run.solver();
    let levels = spectrum_window(&p, window, &solver)?;
    run.record(&p);
    run.manifest.settings = json!({ "window": window });
    run.manifest.tolerances = json!({ "eigen_tol": solver.tol, "label_confidence": LABEL_CONFIDENCE });
    Ok((p, window, levels))
}

pub fn spectrum(run: &mut Run) -> Result<(), CliError> {
    let (p, _, levels) = labeled_spectrum(run)?;
    let mut csv = Csv::new(&[
        "energy", "n", "m", "n_minus_n0", "confidence", "mixed", "m_rotated", "m2_rotated", "sz_expect", "occ_expect",
    ]);
    for l in &levels {
        csv.row(&[
            num(l.energy),
            l.n_label.to_string(),
            format!("{}", l.m_label),
            (l.n_label as i64 - p.n0 as i64).to_string(),
            num(l.confidence),
            u8::from(l.mixed).to_string(),
            num(l.m_rotated),
            num(l.m2_rotated),
            num(l.sz_expect),
            num(l.occ_expect),
        ]);
    }
    let mixed = levels.iter().filter(|l| l.mixed).count();
    run.manifest.diagnostics = json!({ "levels": levels.len(), "mixed": mixed });
    run.out.write(run.manifest, "spectrum.csv", &csv.into_string())?;
    Ok(())
}

pub fn fit(run: &mut Run) -> Result<(), CliError> {
    let (p, window, levels) = labeled_spectrum(run)?;
    let dn = run.cfg.resonance_spec()?.delta_n;
    let fit = fit_levels(&levels, p.n0, window)?;
    let n0 = p.n0 as f64;
    let mismatch = basis_mismatch(&fit, dn);
    let report = json!({
        "n0": p.n0,
        "delta_n": dn,
        "a": fit.a,
        "b": fit.b,
        "c": fit.c,
        "d": fit.d,
        "f": fit.f,
        "n0_d": n0 * fit.d,
        "n0_f": n0 * fit.f,
        "mismatch": mismatch,
        "n0_mismatch": n0 * mismatch,
        "b_delta_n_minus_c": fit.b * dn as f64 - fit.c,
        "residual_rms": fit.residual_rms,
        "levels_used": fit.levels_used,
    });
    run.manifest.diagnostics = json!({ "levels": levels.len(), "residual_rms": fit.residual_rms });
    run.out.write_json(run.manifest, "fit.json", &report)?;
    Ok(())
}

fn scan_list(cfg: &RunConfig) -> Vec<usize> {
    cfg.n0_list.clone().unwrap_or_else(|| DEFAULT_N0_LIST.to_vec())
}

/// (n₀, splitting) of the successful points; failures go to the manifest.
fn collect_scan(scan: &[ScanPoint], manifest: &mut Manifest) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    for p in scan {
        match &p.result {
            Ok(v) => points.push((p.n0 as f64, v.anticrossing.splitting)),
            Err(e) => manifest.failures.push(Failure {
                n0: p.n0,
                error: e.to_string(),
            }),
        }
    }
    points
}

fn saturation_summary(points: &[(f64, f64)]) -> serde_json::Value {
    match fit_saturation(points) {
        Ok(fit) => json!({
            "plateau": fit.plateau,
            "c": fit.c,
            "rms": fit.rms,
            "half_plateau_crossover": crossover(points, 0.5 * fit.plateau),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Error for a scan where more than half of the points failed.
fn majority_failure(scan: &[ScanPoint]) -> Option<CliError> {
    let failed: Vec<&Error> = scan.iter().filter_map(|p| p.result.as_ref().err()).collect();
    if 2 * failed.len() > scan.len() {
        let first = failed[0].clone();
        Some(CliError::Scan {
            code: crate::exit_code(&first),
            message: format!("{} of {} scan points failed; first: {first}", failed.len(), scan.len()),
        })
    } else {
        None
    }
}

pub fn splitting(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    reject_zero_coupling(cfg)?;
    let spec = cfg.resonance_spec()?;
    let list = scan_list(cfg);
    if list.is_empty() {
        return Err(Error::InvalidParameter("config: `n0_list` is empty".into()).into());
    }
    let template = cfg.model_params()?;
    let opts = run.anticrossing_options();
    let scan = splitting_scan(&template, spec.delta_n, &list, &opts);
    let mut csv = Csv::new(&[
        "n0", "g_resonance", "g_star", "splitting", "v_predicted", "sqrt2_v", "mismatch", "n0_mismatch",
    ]);
    for p in &scan {
        if let Ok(v) = &p.result {
            let a = &v.anticrossing;
            csv.row(&[
                p.n0.to_string(),
                num(a.g_resonance),
                num(a.g_star),
                num(a.splitting),
                num(v.v_predicted),
                num(SQRT_2 * v.v_predicted.abs()),
                num(v.mismatch),
                num(p.n0 as f64 * v.mismatch),
            ]);
        }
    }
    let points = collect_scan(&scan, run.manifest);
    let summary = json!({
        "delta_e": template.delta_e,
        "delta_n": spec.delta_n,
        "points_ok": points.len(),
        "points_failed": scan.len() - points.len(),
        "saturation": if points.len() >= 2 { saturation_summary(&points) } else { serde_json::Value::Null },
    });
    run.record(&template);
    run.manifest.settings = json!({ "n0_list": list, "n_max": "recommended per point" });
    run.manifest.tolerances = json!({ "eigen_tol": opts.solver.tol, "g_rtol": opts.g_rtol });
    run.out.write(run.manifest, "splitting_scan.csv", &csv.into_string())?;
    run.out.write_json(run.manifest, "splitting_summary.json", &summary)?;
    majority_failure(&scan).map_or(Ok(()), Err)
}

pub fn ncrit(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    reject_zero_coupling(cfg)?;
    let spec = cfg.resonance_spec()?;
    let base = cfg.model_params()?;
    let g_star = resonance_g(base.delta_e, spec, base.n0)?;
    let p = base.with_g(g_star)?;
    let w = wkb_parameters(&p, spec.delta_n)?;
    let n0_mismatch = w.n0_f - w.n0_d * spec.delta_n as f64;
    let estimate = n_crit_estimate(n0_mismatch, g_star, w.i_over_sqrt_n0)?;

    let list = scan_list(cfg);
    let opts = run.anticrossing_options();
    let (measured, saturation, scan_rows) = if list.is_empty() {
        (None, serde_json::Value::Null, Vec::new())
    } else {
        let scan = splitting_scan(&base, spec.delta_n, &list, &opts);
        let points = collect_scan(&scan, run.manifest);
        if let Some(err) = majority_failure(&scan) {
            return Err(err);
        }
        let measured = fit_saturation(&points).ok().and_then(|f| crossover(&points, 0.5 * f.plateau));
        let rows: Vec<_> = points.iter().map(|&(n, s)| json!({ "n0": n, "splitting": s })).collect();
        (measured, saturation_summary(&points), rows)
    };
    let report = json!({
        "n_crit_estimate": estimate,
        "n_crit_measured": measured,
        "inputs": {
            "delta_e": p.delta_e,
            "delta_n": spec.delta_n,
            "n0": p.n0,
            "g_star": g_star,
            "n0_d": w.n0_d,
            "n0_f": w.n0_f,
            "n0_mismatch": n0_mismatch,
            "i_over_sqrt_n0": w.i_over_sqrt_n0,
        },
        "saturation": saturation,
        "scan": scan_rows,
    });
    run.record(&p);
    run.manifest.settings = json!({ "n0_list": list });
    run.manifest.tolerances = json!({ "eigen_tol": opts.solver.tol, "g_rtol": opts.g_rtol });
    run.out.write_json(run.manifest, "ncrit.json", &report)?;
    Ok(())
}

pub fn dynamics(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    let dn = cfg.resonance_spec()?.delta_n;
    let p = resonant_params(cfg)?;
    let v = if p.coupling_u == 0.0 {
        0.0
    } else {
        let n0 = p.n0 as f64;
        coupling_v(&p, i_over_sqrt_n(&p, p.n0, dn)? * n0.sqrt())
    };
    let period = if v == 0.0 { f64::INFINITY } else { 2.0 * PI / (SQRT_2 * v.abs()) };
    let t_max = cfg.t_max.unwrap_or(if v == 0.0 { IDLE_T_MAX } else { 2.0 * period });
    let steps = cfg.t_steps.unwrap_or(DEFAULT_T_STEPS);
    let h = match cfg.detuning {
        Some(d) => ThreeStateHamiltonian::detuned(0.0, d, v),
        None => ThreeStateHamiltonian::degenerate(0.0, v),
    };
    let traj = evolve_numeric(&ThreeStateAmplitudes::lower(), &h, &time_grid(t_max, steps)?)?;
    let closed_form_error = cfg.detuning.is_none().then(|| {
        traj.iter()
            .map(|a| {
                let b = evolve_analytic(a.t, v, 0.0);
                (0..3).map(|k| (a.c[k] - b.c[k]).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    });
    let oscillation = sz_oscillation_check(&traj).ok();
    let ends = expectations(&traj, dn);
    let drift = traj.iter().map(|a| (a.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    let report = json!({
        "delta_n": dn,
        "v": v,
        "period": if period.is_finite() { Some(period) } else { None },
        "detuning": cfg.detuning,
        "t_max": t_max,
        "t_steps": steps,
        "expect_dn_start": ends.first().map(|e| e.dn),
        "expect_dn_end": ends.last().map(|e| e.dn),
        "oscillation_omega": oscillation.map(|o| o.omega),
        "oscillation_rms": oscillation.map(|o| o.rms),
        "closed_form_max_error": closed_form_error,
    });
    run.record(&p);
    run.manifest.settings = json!({ "t_max": t_max, "t_steps": steps, "detuning": cfg.detuning });
    run.manifest.diagnostics = json!({ "unitarity_drift": drift, "closed_form_max_error": closed_form_error });
    run.out.write(run.manifest, "trajectory.csv", &trajectory_csv(&traj, dn))?;
    run.out.write_json(run.manifest, "dynamics.json", &report)?;
    Ok(())
}

pub fn wkb(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg;
    let dn = cfg.resonance_spec()?.delta_n;
    let p = resonant_params(cfg)?;
    let w = wkb_parameters(&p, dn)?;
    let mut csv = Csv::new(&["n0", "n0_d", "n0_f", "i_over_sqrt_n0"]);
    for &(n0, d, f, i) in &w.ladder {
        csv.row(&[n0.to_string(), num(d), num(f), num(i)]);
    }
    let report = json!({
        "delta_e": p.delta_e,
        "delta_n": dn,
        "g": p.g(),
        "n0_d": w.n0_d,
        "n0_f": w.n0_f,
        "n0_mismatch": w.n0_f - w.n0_d * dn as f64,
        "i_over_sqrt_n0": w.i_over_sqrt_n0,
    });
    run.record(&p);
    run.out.write(run.manifest, "wkb_ladder.csv", &csv.into_string())?;
    run.out.write_json(run.manifest, "wkb.json", &report)?;
    Ok(())
}
