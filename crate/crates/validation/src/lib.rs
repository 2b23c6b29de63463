//! Reference computations that share no code with `rdlattice`.

use nalgebra::DMatrix;

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `e^{-x} I_n(x)` from the power series, summed in log space.
pub fn scaled_bessel_i(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let terms = (x + 60.0 * x.sqrt() + 200.0) as usize;
    let lf = ln_factorials(terms + n as usize);
    let lx = (0.5 * x).ln();
    let mut sum = 0.0;
    for k in 0..=terms {
        let e = -x + (2 * k + n as usize) as f64 * lx - lf[k] - lf[k + n as usize];
        sum += e.exp();
    }
    sum
}

/// Lattice heat kernel `e^{-2t/h²} I_n(2t/h²) / h`.
pub fn heat_kernel(t: f64, n: i64, h: f64) -> f64 {
    scaled_bessel_i(n.unsigned_abs() as u32, 2.0 * t / (h * h)) / h
}

/// `exp(t L) f` for the Dirichlet second difference on nodes `1..=m`,
/// zero at `0` and `m + 1`. `f` holds nodes `1..=m`.
pub fn dirichlet_exp(h: f64, t: f64, f: &[f64]) -> Vec<f64> {
    let m = f.len();
    let r = 1.0 / (h * h);
    let l = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            -2.0 * r
        } else if i.abs_diff(j) == 1 {
            r
        } else {
            0.0
        }
    });
    let e = (l * t).exp();
    let v = e * nalgebra::DVector::from_column_slice(f);
    v.iter().copied().collect()
}

/// Classical RK4 for `dc/dt = -λ s(t) (a + b c) c` with `s` linear on each
/// step of the history. Returns `c` after every step, starting with `c0`.
pub fn rk4_calcite(c0: f64, s: &[f64], k: f64, lambda: f64, a: f64, b: f64, substeps: usize) -> Vec<f64> {
    let rhs = |s: f64, c: f64| -lambda * s * (a + b * c) * c;
    let dt = k / substeps as f64;
    let mut c = c0;
    let mut out = Vec::with_capacity(s.len());
    out.push(c);
    for w in s.windows(2) {
        let at = |tau: f64| w[0] + (w[1] - w[0]) * tau / k;
        for j in 0..substeps {
            let t0 = j as f64 * dt;
            let k1 = rhs(at(t0), c);
            let k2 = rhs(at(t0 + 0.5 * dt), c + 0.5 * dt * k1);
            let k3 = rhs(at(t0 + 0.5 * dt), c + 0.5 * dt * k2);
            let k4 = rhs(at(t0 + dt), c + dt * k3);
            c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(c);
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
