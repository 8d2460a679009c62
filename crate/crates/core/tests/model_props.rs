use bloch_siegert::model::{spin_matrices, SpinOperators};
use bloch_siegert::{BasisIndex, Spin};
use num_complex::Complex64;
use proptest::prelude::*;

fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                out[i * d + j] += a[i * d + k] * b[k * d + j];
            }
        }
    }
    out
}

#[test]
fn casimir_on_every_basis_vector() {
    for twice in 1..=7u32 {
        let spin = Spin::from_twice(twice).unwrap();
        let ops = spin_matrices(spin);
        let d = ops.dim();
        let mut total = vec![Complex64::new(0.0, 0.0); d * d];
        for m in [&ops.sx, &ops.sy, &ops.sz] {
            for (t, v) in total.iter_mut().zip(matmul(m, m, d)) {
                *t += v;
            }
        }
        let s = spin.value();
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { s * (s + 1.0) } else { 0.0 };
                let got = SpinOperators::get(&total, d, i, j);
                assert!((got - want).norm() < 1e-12, "S={s} ({i},{j}) {got}");
            }
        }
    }
}

proptest! {
    #[test]
    fn basis_index_round_trips(twice in 1u32..6, n in 0usize..100_000, k in 0usize..6) {
        let spin = Spin::from_twice(twice).unwrap();
        let k = k % spin.dim();
        let m = k as f64 - spin.value();
        let idx = BasisIndex::new(n, m);
        let flat = idx.flatten(spin).unwrap();
        prop_assert_eq!(flat, n * spin.dim() + k);
        prop_assert_eq!(BasisIndex::unflatten(flat, spin), idx);
    }
}
