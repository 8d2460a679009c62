use bloch_siegert::eigen::{count_in, eig_all, eig_interior, eig_range, residual_norm};
use bloch_siegert::hamiltonian::{build_hamiltonian, BandedSymmetricMatrix};
use bloch_siegert::{ModelParams, Spin};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_banded(dim: usize, bw: usize, seed: u64) -> BandedSymmetricMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut h = BandedSymmetricMatrix::zeros(dim, bw);
    for i in 0..dim {
        for j in i..(i + bw + 1).min(dim) {
            h.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    h
}

fn nalgebra_eigenvalues(h: &BandedSymmetricMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = DMatrix::from_row_slice(n, n, &h.to_dense());
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn random_500_banded_matches_dense() {
    let h = random_banded(500, 4, 7);
    let ours = eig_all(&h).unwrap();
    let oracle = nalgebra_eigenvalues(&h);
    let worst = ours
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a.value - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "max |Δλ| = {worst}");
}

#[test]
fn decoupled_triple_at_n0() {
    // U = 0, ΔE = 11: E = n + 11M, so σ = n₀ + 0.25 sees (n₀,0) and
    // its two neighbours in the M = 0 ladder plus (n₀∓11, ±1)
    let p = ModelParams::new(11.0, 0.0, Spin::ONE, 200, 400).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let got = eig_interior(&h, 200.25, 3).unwrap();
    let vals: Vec<f64> = got.iter().map(|e| e.value).collect();
    assert_eq!(vals.len(), 3);
    for v in &vals {
        assert!((v - 200.0).abs() < 1e-10, "{vals:?}");
    }
}

#[test]
fn shift_invert_agrees_with_dense_on_model() {
    let p = ModelParams::new(5.0, 0.3 * 5.0 / 20.0, Spin::ONE, 300, 600).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let all = nalgebra_eigenvalues(&h);
    for sigma in [10.3, 300.0, 555.5] {
        let near = eig_interior(&h, sigma, 6).unwrap();
        for e in &near {
            let closest = all
                .iter()
                .map(|a| (a - e.value).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-9, "σ={sigma}: {} off by {closest}", e.value);
        }
    }
}

#[test]
fn range_is_complete() {
    let h = random_banded(3000, 3, 11);
    let got = eig_range(&h, -0.2, 0.1).unwrap();
    assert_eq!(got.len(), count_in(&h, -0.2, 0.1));
    let norm = h.norm_inf();
    for p in &got {
        assert!(residual_norm(&h, p) <= 1e-10 * norm);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn banded_spectrum_matches_dense(dim in 2usize..120, bw in 1usize..5, seed in any::<u64>()) {
        let h = random_banded(dim, bw, seed);
        let ours = eig_all(&h).unwrap();
        let oracle = nalgebra_eigenvalues(&h);
        for (a, b) in ours.iter().zip(&oracle) {
            prop_assert!((a.value - b).abs() < 1e-10);
        }
    }

    #[test]
    fn interior_subset_of_full(dim in 60usize..300, seed in any::<u64>(), frac in 0.05f64..0.95) {
        let h = random_banded(dim, 3, seed);
        let all = eig_all(&h).unwrap();
        let sigma = all[0].value + frac * (all[dim - 1].value - all[0].value) + 1e-7;
        let near = eig_interior(&h, sigma, 5).unwrap();
        let mut by_distance: Vec<f64> = all.iter().map(|a| a.value).collect();
        by_distance.sort_by(|a, b| (a - sigma).abs().total_cmp(&(b - sigma).abs()));
        let mut want = by_distance[..5].to_vec();
        want.sort_by(f64::total_cmp);
        for (a, b) in near.iter().zip(&want) {
            prop_assert!((a.value - b).abs() < 1e-10, "{} vs {}", a.value, b);
        }
        // orthonormal set
        for i in 0..near.len() {
            for j in 0..near.len() {
                let d: f64 = near[i].vector.iter().zip(&near[j].vector).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inertia_matches_eigen_count(dim in 10usize..200, seed in any::<u64>(), lo in -2.0f64..0.0, width in 0.01f64..2.0) {
        let h = random_banded(dim, 2, seed);
        let all = eig_all(&h).unwrap();
        let hi = lo + width;
        let want = all.iter().filter(|p| p.value >= lo && p.value < hi).count();
        prop_assert_eq!(count_in(&h, lo, hi), want);
    }
}
