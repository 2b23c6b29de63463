//! Discrete heat kernel on `hZ`, its half-line Dirichlet version and the
//! boundary-driven heat solution.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::RwLock;

use crate::boundary::BoundaryPath;
use crate::error::{invalid, Error, Result};
use crate::lattice::{Lattice, LatticeField, LineField, TruncationPolicy};

/// Trapezoid node count for the torus integral: even and at least 64.
pub fn quadrature_nodes(t: f64, n: i64, h: f64) -> usize {
    let spread = (4.0 * t / (h * h)).sqrt().ceil() as usize;
    let q = (8 * spread + 8 * n.unsigned_abs() as usize).max(64);
    q + q % 2
}

/// `H_D(t, nh) = (1/2πh) ∫_{-π}^{π} cos(nθ) exp(-(4t/h²) sin²(θ/2)) dθ`.
pub fn hd(t: f64, n: i64, h: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("kernel time must be >= 0, got {t}")));
    }
    if !(h > 0.0) {
        return Err(invalid(format!("mesh must be positive, got {h}")));
    }
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 / h } else { 0.0 });
    }
    Ok(hd_with_nodes(t, n, h, quadrature_nodes(t, n, h)))
}

fn hd_with_nodes(t: f64, n: i64, h: f64, q: usize) -> f64 {
    let c = 4.0 * t / (h * h);
    let nf = n as f64;
    let mut s = 0.0;
    for j in 0..q {
        let theta = -PI + 2.0 * PI * j as f64 / q as f64;
        let half = (0.5 * theta).sin();
        s += (nf * theta).cos() * (-c * half * half).exp();
    }
    s / (q as f64 * h)
}

/// Half-line Dirichlet kernel `H_D(t,(n-m)h) - H_D(t,(n+m)h)`.
pub fn gd(t: f64, n: i64, m: i64, h: f64) -> Result<f64> {
    if n < 0 || m < 0 {
        return Err(invalid("half-line kernel needs n, m >= 0"));
    }
    Ok(hd(t, n - m, h)? - hd(t, n + m, h)?)
}

/// `H_D(t, nh)` for `n = 0..=n_max`.
pub fn kernel_row(t: f64, h: f64, n_max: usize) -> Result<Vec<f64>> {
    (0..=n_max as i64).map(|n| hd(t, n, h)).collect()
}

/// Memoised kernel values for one mesh, keyed by `(t, n)`.
#[derive(Debug)]
pub struct KernelCache {
    h: f64,
    map: RwLock<HashMap<(u64, i64), f64>>,
}

impl KernelCache {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn get(&self, t: f64, n: i64) -> Result<f64> {
        let key = (t.to_bits(), n.abs());
        if let Some(v) = self.map.read().expect("kernel cache poisoned").get(&key) {
            return Ok(*v);
        }
        let v = hd(t, n.abs(), self.h)?;
        self.map
            .write()
            .expect("kernel cache poisoned")
            .insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("kernel cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const TAIL_TOL: f64 = 1e-10;

fn tail_ok(values: &[f64], left: bool) -> bool {
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return true;
    }
    let r = values.last().unwrap().abs();
    let l = values[0].abs();
    r <= TAIL_TOL * sup && (!left || l <= TAIL_TOL * sup)
}

/// `h Σ_y H_D(t, x - y) f(y)` on the window of `f`.
///
/// The window must be wide enough that both the input and the output are
/// negligible at its ends.
pub fn semigroup_apply_line(f: &LineField, t: f64) -> Result<LineField> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    if !tail_ok(&f.values, true) {
        return Err(Error::Truncation(
            "input field does not decay at the window edges".into(),
        ));
    }
    let len = f.values.len();
    let row = kernel_row(t, f.h, len)?;
    let mut out = vec![0.0; len];
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in f.values.iter().enumerate() {
            if *v != 0.0 {
                s += row[i.abs_diff(j)] * v;
            }
        }
        *o = f.h * s;
    }
    if !tail_ok(&out, true) {
        return Err(Error::Truncation(format!(
            "heat flow at t = {t} reaches the window edges"
        )));
    }
    Ok(LineField::new(f.h, f.first, out))
}

/// Dirichlet half-line semigroup by odd reflection: `h Σ_{y≥1} G_D(t,x,y) f(y)`.
pub fn semigroup_apply_half(f: &LatticeField, t: f64) -> Result<LatticeField> {
    if t == 0.0 {
        let mut g = f.clone();
        g.values_mut()[0] = 0.0;
        return Ok(g);
    }
    let m = f.lattice().m();
    let row = kernel_row(t, f.h(), 2 * m)?;
    let v = f.values();
    if !tail_ok(v, false) {
        return Err(Error::Truncation(
            "input field does not decay at the right edge".into(),
        ));
    }
    let mut out = vec![0.0; m + 1];
    for (n, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for (y, fy) in v.iter().enumerate().skip(1) {
            if *fy != 0.0 {
                s += (row[n.abs_diff(y)] - row[n + y]) * fy;
            }
        }
        *o = f.h() * s;
    }
    if !tail_ok(&out, false) {
        return Err(Error::Truncation(format!(
            "heat flow at t = {t} reaches the right edge"
        )));
    }
    LatticeField::new(f.lattice(), out)
}

/// `(1 - e^{-x})/x`.
fn phi1(x: f64) -> f64 {
    if x < 1e-2 {
        let mut term = 1.0;
        let mut s = 1.0;
        for k in 2..12 {
            term *= -x / k as f64;
            s += term;
        }
        s
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(1 - e^{-x}(1 + x))/x²`.
fn phi2(x: f64) -> f64 {
    if x < 0.5 {
        // Σ_{k≥2} (-1)^k (k-1) x^{k-2} / k!
        let mut s = 0.0;
        let mut xp = 1.0;
        let mut fact = 2.0;
        for k in 2..30 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (k - 1) as f64 * xp / fact;
            xp *= x;
            fact *= (k + 1) as f64;
        }
        s
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

/// Boundary-driven heat solution `u` with `u(t,0) = ψ(t)`, `u(0,x>0) = 0`.
///
/// ψ is taken piecewise linear on its grid and the time integral of the
/// boundary kernel `K(s, nh) = (H_D(s,(n-1)h) - H_D(s,(n+1)h))/h` over each
/// grid interval is done in closed form inside the torus quadrature.
/// Weights depend only on the lag, so one table serves every path on the grid.
#[derive(Debug, Clone)]
pub struct BoundaryConvolution {
    lattice: Lattice,
    dt: f64,
    steps: usize,
    /// `near[l][n-1]` multiplies ψ at the later end of the interval at lag `l`.
    near: Vec<Vec<f64>>,
    far: Vec<Vec<f64>>,
}

impl BoundaryConvolution {
    pub fn new(dt: f64, steps: usize, lattice: Lattice) -> Result<Self> {
        if !(dt > 0.0) || steps == 0 {
            return Err(invalid("boundary convolution needs dt > 0 and at least one step"));
        }
        let h = lattice.h();
        let m = lattice.m();
        let t_max = dt * steps as f64;
        let q = quadrature_nodes(t_max, m as i64 + 1, h);
        // integrand is even in θ: sum over θ_j in (0, π) and double
        let half = q / 2;
        let thetas: Vec<f64> = (1..half).map(|j| 2.0 * PI * j as f64 / q as f64).collect();
        let mu: Vec<f64> = thetas
            .iter()
            .map(|th| {
                let s = (0.5 * th).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        // basis[n-1][j] = 2 sin(nθ) sin θ · 2 / (q h²)
        let scale = 2.0 / (q as f64 * h * h);
        let basis: Vec<Vec<f64>> = (1..=m)
            .map(|n| {
                thetas
                    .iter()
                    .map(|th| scale * 2.0 * (n as f64 * th).sin() * th.sin())
                    .collect()
            })
            .collect();
        let mut near = Vec::with_capacity(steps);
        let mut far = Vec::with_capacity(steps);
        let mut e0 = vec![0.0; thetas.len()];
        let mut e1 = vec![0.0; thetas.len()];
        for l in 0..steps {
            let a = l as f64 * dt;
            for (j, mu) in mu.iter().enumerate() {
                let decay = (-mu * a).exp();
                let x = mu * dt;
                e0[j] = decay * dt * phi1(x);
                e1[j] = decay * dt * phi2(x);
            }
            let mut wn = vec![0.0; m];
            let mut wf = vec![0.0; m];
            for (row, (n_out, f_out)) in basis.iter().zip(wn.iter_mut().zip(wf.iter_mut())) {
                let mut s0 = 0.0;
                let mut s1 = 0.0;
                for j in 0..row.len() {
                    s0 += row[j] * e0[j];
                    s1 += row[j] * e1[j];
                }
                *n_out = s0 - s1;
                *f_out = s1;
            }
            near.push(wn);
            far.push(wf);
        }
        Ok(Self {
            lattice,
            dt,
            steps,
            near,
            far,
        })
    }

    pub fn for_path(path: &BoundaryPath, lattice: Lattice) -> Result<Self> {
        Self::new(path.dt(), path.steps(), lattice)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `u(t_i, ·)` for path values `psi` on this grid.
    pub fn u_at_step(&self, psi: &[f64], i: usize) -> Result<LatticeField> {
        if psi.len() != self.steps + 1 {
            return Err(Error::ShapeMismatch {
                expected: self.steps + 1,
                got: psi.len(),
            });
        }
        if i > self.steps {
            return Err(invalid(format!(
                "step {i} exceeds the path horizon ({} steps)",
                self.steps
            )));
        }
        let m = self.lattice.m();
        let mut u = vec![0.0; m + 1];
        u[0] = psi[i];
        for l in 0..i {
            let pn = psi[i - l];
            let pf = psi[i - l - 1];
            if pn == 0.0 && pf == 0.0 {
                continue;
            }
            let (wn, wf) = (&self.near[l], &self.far[l]);
            for n in 0..m {
                u[n + 1] += wn[n] * pn + wf[n] * pf;
            }
        }
        LatticeField::new(self.lattice, u)
    }

    /// `∫_0^{t_i} K(s, x_n) ds` for each node, the response to ψ ≡ 1.
    pub fn unit_response(&self, i: usize) -> Result<LatticeField> {
        self.u_at_step(&vec![1.0; self.steps + 1], i)
    }
}

/// `u(t, ·)` for a time `t` on the path grid.
pub fn boundary_solution_u(psi: &BoundaryPath, t: f64, lattice: Lattice) -> Result<LatticeField> {
    if t > psi.t_end() * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "t = {t} exceeds path horizon {}",
            psi.t_end()
        )));
    }
    let s = t / psi.dt();
    let i = s.round();
    if (s - i).abs() > 1e-9 * s.max(1.0) {
        return Err(invalid(format!("t = {t} is not on the path grid")));
    }
    if psi.values()[0] != 0.0 {
        log::warn!("boundary path starts at {} instead of 0", psi.values()[0]);
    }
    let i = i as usize;
    let conv = BoundaryConvolution::new(psi.dt(), i.max(1), lattice)?;
    let start = &psi.values()[..=i];
    if i == 0 {
        let mut u = LatticeField::zeros(lattice);
        u.values_mut()[0] = start[0];
        return Ok(u);
    }
    conv.u_at_step(start, i)
}

/// Explicit FTCS solver for the heat equation with Dirichlet data at `x_0`.
#[derive(Debug, Clone)]
pub struct HeatFtcs {
    u: Vec<f64>,
    dbar: f64,
    policy: TruncationPolicy,
}

impl HeatFtcs {
    pub fn new(initial: &LatticeField, k: f64) -> Self {
        let h = initial.h();
        Self {
            u: initial.values().to_vec(),
            dbar: k / (h * h),
            policy: initial.policy(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    /// One step; `boundary` is the new value at `x_0`.
    pub fn step(&mut self, boundary: f64) {
        let g = self.policy.ghost(&self.u);
        let n = self.u.len();
        let mut prev = self.u[0];
        for i in 1..n {
            let cur = self.u[i];
            let next = if i + 1 < n { self.u[i + 1] } else { g };
            self.u[i] = cur + self.dbar * (next - 2.0 * cur + prev);
            prev = cur;
        }
        self.u[0] = boundary;
    }
}

/// Writes `t,n,value` rows.
pub fn write_kernel_csv<W: Write>(w: W, rows: &[(f64, i64, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "n", "value"])?;
    for (t, n, v) in rows {
        wr.write_record([t.to_string(), n.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
