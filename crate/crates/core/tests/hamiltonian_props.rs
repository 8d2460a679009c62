use bloch_siegert::dressed::{resonance_g, ResonanceSpec};
use bloch_siegert::hamiltonian::{build_hamiltonian, w_expectation, BandedSymmetricMatrix};
use bloch_siegert::rotated1d::i_over_sqrt_n;
use bloch_siegert::{ModelParams, Spin};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Dense H written out directly from the matrix elements, spin index k = M + S.
fn dense_oracle(p: &ModelParams) -> DMatrix<f64> {
    let d = p.spin.dim();
    let s = p.spin.value();
    let dim = (p.n_max + 1) * d;
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=p.n_max {
        for k in 0..d {
            let m = k as f64 - s;
            let i = n * d + k;
            h[(i, i)] = p.delta_e * m + n as f64;
            if n < p.n_max && k + 1 < d {
                // ⟨n+1, M+1| U(a+a†)(S+ + S−) |n, M⟩
                let v = p.coupling_u * ((n + 1) as f64).sqrt() * (s * (s + 1.0) - m * (m + 1.0)).sqrt();
                let j = (n + 1) * d + k + 1;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
            if n < p.n_max && k >= 1 {
                let v = p.coupling_u * ((n + 1) as f64).sqrt() * (s * (s + 1.0) - m * (m - 1.0)).sqrt();
                let j = (n + 1) * d + k - 1;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
    }
    h
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn matches_independent_dense_builder() {
    for spin in [Spin::HALF, Spin::ONE, Spin::new(1.5).unwrap()] {
        let p = ModelParams::new(3.0, 0.07, spin, 10, 30).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let oracle = dense_oracle(&p);
        let dim = h.dim();
        let dense = h.to_dense();
        for i in 0..dim {
            for j in 0..dim {
                assert!((dense[i * dim + j] - oracle[(i, j)]).abs() < 1e-14, "({i},{j})");
            }
        }
    }
}

#[test]
fn spin_half_lowest_eigenvalue_matches_dense() {
    let p = ModelParams::new(1.0, 0.01, Spin::HALF, 100, 200).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    let lowest = bloch_siegert::eigen::eig_interior(&h, -2.0, 1).unwrap()[0].value;
    let want = sorted_eigenvalues(dense_oracle(&p))[0];
    assert!((lowest - want).abs() < 1e-10, "{lowest} vs {want}");
}

#[test]
fn parity_symmetric_spectrum() {
    // at U = 0 the spectrum minus ΔE·M is the oscillator ladder for every M
    let p = ModelParams::new(2.5, 0.0, Spin::ONE, 5, 12).unwrap();
    let h = build_hamiltonian(&p).unwrap();
    for (i, e) in h.diagonal().iter().enumerate() {
        let (n, k) = (i / 3, i % 3);
        assert_eq!(e - 2.5 * (k as f64 - 1.0), n as f64);
    }
    // for U > 0 the blocks of Π = exp(iπ(a†a + Sz + S)), which flips a and Sx,
    // together reproduce the banded spectrum
    let p = ModelParams::new(2.5, 0.13, Spin::ONE, 5, 40).unwrap();
    let full = sorted_eigenvalues(dense_oracle(&p));
    let dim = full.len();
    let oracle = dense_oracle(&p);
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = 1.0;
        if (i / 3 + i % 3) % 2 == 0 {
            even.push(e);
        } else {
            odd.push(e);
        }
    }
    let q_even = DMatrix::from_columns(&even);
    let q_odd = DMatrix::from_columns(&odd);
    let mixed = q_even.transpose() * &oracle * &q_odd;
    assert!(mixed.amax() == 0.0);
    let project = |basis: &[DVector<f64>]| {
        let q = DMatrix::from_columns(basis);
        sorted_eigenvalues(q.transpose() * &oracle * &q)
    };
    let mut joined = project(&even);
    joined.extend(project(&odd));
    joined.sort_by(f64::total_cmp);
    let banded = bloch_siegert::eigen::eig_all(&build_hamiltonian(&p).unwrap()).unwrap();
    for ((a, b), c) in joined.iter().zip(&full).zip(&banded) {
        assert!((a - b).abs() < 1e-10 && (b - c.value).abs() < 1e-10);
    }
}

#[test]
fn w_term_small_against_coupling() {
    let (n0, dn) = (100_000, 15);
    let g = resonance_g(11.0, ResonanceSpec::new(dn).unwrap(), n0).unwrap();
    let p = ModelParams::from_g(11.0, g, Spin::ONE, n0, n0 + 4000).unwrap();
    let v = 2.0 * g * i_over_sqrt_n(&p, n0, dn).unwrap();
    for m in [-1.0, 0.0, 1.0] {
        let w = w_expectation(&p, n0, m).unwrap();
        assert!(w.abs() / v < 0.1, "M={m}: w={w} v={v}");
    }
}

fn random_banded(dim: usize, bw: usize, seed: u64) -> BandedSymmetricMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut h = BandedSymmetricMatrix::zeros(dim, bw);
    for i in 0..dim {
        for j in i..(i + bw + 1).min(dim) {
            h.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn banded_matvec_matches_dense(dim in 1usize..80, bw in 0usize..6, seed in any::<u64>()) {
        let h = random_banded(dim, bw, seed);
        let x: Vec<f64> = (0..dim).map(|i| ((i as f64) * 0.37 + seed as f64 * 1e-20).sin()).collect();
        let y = h.apply(&x);
        let dense = h.to_dense();
        for i in 0..dim {
            let want: f64 = (0..dim).map(|j| dense[i * dim + j] * x[j]).sum();
            prop_assert!((y[i] - want).abs() < 1e-13);
        }
    }
}
