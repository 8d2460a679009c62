//! Gauss–Legendre and Gauss–Hermite rules, and expectation values in
//! harmonic-oscillator eigenstates.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Recurrence coefficients √(2/(k+1)) and √(k/(k+1)) for k < len.
struct HermiteRecurrence {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HermiteRecurrence {
    fn new(len: usize) -> Self {
        let a = (0..len).map(|k| (2.0 / (k as f64 + 1.0)).sqrt()).collect();
        let b = (0..len).map(|k| (k as f64 / (k as f64 + 1.0)).sqrt()).collect();
        HermiteRecurrence { a, b }
    }

    /// Orthonormal Hermite polynomials p̃_k (weight e^{−x²}) at `x`, kept in
    /// range by rescaling. Returns the scaled p̃_want, p̃_last, p̃_{last+1}
    /// and the log of each scale.
    fn values(&self, x: f64, want: usize, last: usize) -> HermiteValues {
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25);
        let mut log = 0.0;
        let split = want.min(last);
        self.run(x, 0, split, &mut prev, &mut cur, &mut log);
        let (w, w_log) = if want <= last { (cur, log) } else { (0.0, 0.0) };
        self.run(x, split, last, &mut prev, &mut cur, &mut log);
        let next = self.a[last] * x * cur - self.b[last] * prev;
        HermiteValues {
            want: w,
            want_log: w_log,
            last: cur,
            next,
            log,
        }
    }

    /// Advance (p̃_{from−1}, p̃_from) to (p̃_{to−1}, p̃_to).
    fn run(&self, x: f64, from: usize, to: usize, prev: &mut f64, cur: &mut f64, log: &mut f64) {
        const BIG: f64 = 1e100;
        let (mut p, mut c) = (*prev, *cur);
        for (chunk_a, chunk_b) in self.a[from..to].chunks(32).zip(self.b[from..to].chunks(32)) {
            for (&a, &b) in chunk_a.iter().zip(chunk_b) {
                let nxt = a * x * c - b * p;
                p = c;
                c = nxt;
            }
            if c.abs() > BIG {
                p /= BIG;
                c /= BIG;
                *log += BIG.ln();
            }
        }
        *prev = p;
        *cur = c;
    }
}

struct HermiteValues {
    want: f64,
    want_log: f64,
    last: f64,
    next: f64,
    log: f64,
}

/// Nonnegative nodes of the N-point Gauss–Hermite rule, descending, each
/// with the product w_i·p̃_want(x_i)² of its weight and the squared
/// orthonormal polynomial of degree `want`.
fn hermite_positive_nodes(n: usize, want: usize, rec: &HermiteRecurrence) -> Result<Vec<(f64, f64)>> {
    let nu = 2.0 * n as f64 + 1.0;
    let half = n / 2;
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(half + 1);
    let weight = |v: &HermiteValues| {
        // w_i p̃_want² = p̃_want² / (N p̃_{N−1}²); scales cancel in the ratio
        let r = v.want / v.last * (v.want_log - v.log).exp();
        r * r / n as f64
    };
    for k in 1..=half {
        // semiclassical guess: (ν/2)(φ − sin φ cos φ) = π(k − 1/4)
        let target = 2.0 * PI * (k as f64 - 0.25) / nu;
        let mut phi = (1.5 * target).cbrt().min(PI / 2.0);
        for _ in 0..50 {
            let g = phi - phi.sin() * phi.cos() - target;
            let d = 2.0 * phi.sin().powi(2);
            let step = g / d;
            phi = (phi - step).clamp(1e-12, PI / 2.0);
            if step.abs() < 1e-15 {
                break;
            }
        }
        let mut x = nu.sqrt() * phi.cos();
        let mut found = None;
        for _ in 0..40 {
            let v = rec.values(x, want, n - 1);
            // p̃_N / p̃_N' with p̃_N' = √(2N) p̃_{N−1}
            let dx = v.next / ((2.0 * n as f64).sqrt() * v.last);
            x -= dx;
            if dx.abs() <= 1e-14 * x.abs().max(1.0) {
                // the step is below the weight's sensitivity; keep these values
                found = Some((x, weight(&v)));
                break;
            }
        }
        let Some((x, w)) = found.filter(|(x, _)| x.is_finite()) else {
            return Err(Error::Convergence {
                iterations: 40,
                best_residual: f64::NAN,
            });
        };
        if let Some(&(prev, _)) = nodes.last() {
            if x >= prev {
                return Err(Error::Accuracy(format!(
                    "Gauss-Hermite root {k} of {n} did not separate from its neighbour"
                )));
            }
        }
        nodes.push((x, w));
    }
    if n % 2 == 1 {
        let v = rec.values(0.0, want, n - 1);
        nodes.push((0.0, weight(&v)));
    }
    Ok(nodes)
}

/// The N-point Gauss–Hermite rule specialised to expectations in the
/// oscillator eigenstate ψ_n: ∫ψ_n(y)² f(y) dy ≈ Σ w_i f(y_i).
#[derive(Clone, Debug)]
pub struct StateRule {
    pub n: usize,
    pub points: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl StateRule {
    pub fn new(n: usize, points: usize) -> Result<Self> {
        if points <= n {
            return Err(crate::error::invalid(format!(
                "{points}-point rule cannot resolve state {n}"
            )));
        }
        let rec = HermiteRecurrence::new(points);
        let pos = hermite_positive_nodes(points, n, &rec)?;
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for &(x, w) in &pos {
            nodes.push(x);
            weights.push(w);
            if x != 0.0 {
                nodes.push(-x);
                weights.push(w);
            }
        }
        Ok(StateRule {
            n,
            points,
            nodes,
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ⟨n| f(y) |n⟩
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// A pair of rules with N and 1.25N points for expectations in ψ_n; the
/// difference between them is the error estimate.
#[derive(Clone, Debug)]
pub struct StateExpectation {
    coarse: StateRule,
    fine: StateRule,
}

impl StateExpectation {
    /// N = max(200, 4n).
    pub fn new(n: usize) -> Result<Self> {
        let points = (4 * n).max(200);
        let fine_points = (points * 5).div_ceil(4);
        Ok(StateExpectation {
            coarse: StateRule::new(n, points)?,
            fine: StateRule::new(n, fine_points)?,
        })
    }

    pub fn n(&self) -> usize {
        self.coarse.n
    }

    /// (value, relative error estimate)
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let a = self.coarse.expect(&f);
        let b = self.fine.expect(&f);
        let err = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        (a, err)
    }
}

/// Trapezoid rule for a 2π-periodic function, doubling until the change is
/// below `rtol`. Returns the mean value over one period.
pub fn periodic_mean(f: impl Fn(f64) -> f64, rtol: f64) -> Result<f64> {
    let mut m = 16usize;
    let mut prev = (0..m).map(|k| f(2.0 * PI * k as f64 / m as f64)).sum::<f64>() / m as f64;
    while m < 1 << 22 {
        let odd: f64 = (0..m)
            .map(|k| f(2.0 * PI * (k as f64 + 0.5) / m as f64))
            .sum::<f64>();
        let cur = 0.5 * prev + 0.5 * odd / m as f64;
        m *= 2;
        if (cur - prev).abs() <= rtol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy("periodic trapezoid rule did not converge".into()))
}
