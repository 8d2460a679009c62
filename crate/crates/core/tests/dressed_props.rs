use bloch_siegert::dressed::{
    classical_ratio, dressed_energy, dressed_energy_series, hermann_swain_g2_coefficient, hermann_swain_lhs,
    phase_average_ratio, DressedEvaluator,
};
use bloch_siegert::{ModelParams, Spin};
use proptest::prelude::*;

#[test]
fn strictly_increasing_in_coupling() {
    let n = 500;
    let eval = DressedEvaluator::new(n).unwrap();
    let mut last = 0.0;
    for i in 0..40 {
        let u = 0.002 * i as f64;
        let p = ModelParams::new(11.0, u, Spin::ONE, n, 2 * n).unwrap();
        let e = eval.energy(&p).unwrap();
        assert!(e > last, "U={u}: {e} <= {last}");
        last = e;
    }
}

#[test]
fn evaluators_agree_in_their_domains() {
    // series: the first omitted term is 80g⁶
    for g in [0.01, 0.02, 0.05] {
        let c = classical_ratio(g).unwrap();
        assert!((c - dressed_energy_series(g)).abs() <= 81.0 * g.powi(6), "g={g}");
    }
    // phase average vs quadrature at n₀ = 10⁴
    let n = 10_000;
    let eval = DressedEvaluator::new(n).unwrap();
    for g in [0.1, 0.3386, 0.5] {
        let a = 8.0 * g * g / n as f64;
        let q = eval.ratio(a).unwrap();
        let c = phase_average_ratio(a, n).unwrap();
        assert!((q / c - 1.0).abs() < 1e-4, "g={g}: {q} vs {c}");
    }
}

#[test]
fn hermann_swain_limit() {
    for k in 1..=50usize {
        let kk = (k * (k + 1)) as f64;
        let c = hermann_swain_g2_coefficient(k).unwrap() / 4.0;
        let want = ((2 * k + 1) as f64).powi(2) / (4.0 * kk);
        assert!((c - want).abs() <= 1e-15 * want);
        assert!(c - 1.0 > 0.0 && c - 1.0 <= 1.0 / (4.0 * kk) + 1e-15);
    }
}

#[test]
fn hermann_swain_reduces_to_series() {
    // large k: the Hermann-Swain form approaches 1 + 4g² − 12g⁴
    let g: f64 = 0.05;
    let lhs = hermann_swain_lhs(g, 2000).unwrap();
    assert!((lhs - dressed_energy_series(g)).abs() < 1e-6);
}

#[test]
fn truncation_respected() {
    let p = ModelParams::new(11.0, 0.01, Spin::ONE, 100, 120).unwrap();
    assert!(dressed_energy(&p, 121).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn phase_average_increasing_and_bounded(g in 0.0f64..1.0, dg in 1e-4f64..0.1) {
        let a = classical_ratio(g).unwrap();
        let b = classical_ratio(g + dg).unwrap();
        prop_assert!(b > a);
        // √(1 + 16g²cos²θ) ≤ 1 + 8g²cos²θ, so the mean is ≤ 1 + 4g²
        prop_assert!(a >= 1.0 && a <= 1.0 + 4.0 * g * g + 1e-15);
    }
}
