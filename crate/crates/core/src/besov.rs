//! Lattice Fourier transform, dyadic partition of unity and Besov norms.
//!
//! Frequencies live on the torus `[-π/h, π/h]`, sampled at `Q` points
//! `ξ_r = 2π r/(hQ)` (FFT order, negative frequencies wrap). The transform is
//! `F f(ξ) = h Σ_z e^{iξz} f(z)`, the inverse is the periodic trapezoid rule
//! for `(1/2π) ∫ e^{-izξ} g(ξ) dξ`; on this grid the pair is an exact FFT pair.
//!
//! Partition: `χ(r) = 1` for `r ≤ 3/4`, `0` for `r ≥ 4/3`, with the smooth
//! transition `ρ(1-s)/(ρ(1-s)+ρ(s))`, `s = (r-3/4)/(4/3-3/4)`, `ρ(x) = e^{-1/x}`.
//! Blocks are `φ_{-1} = χ(|ξ|)` and `φ_j = χ(|ξ|/2^{j+1}) - χ(|ξ|/2^j)`;
//! the top block `J_h` takes the remainder `1 - χ(|ξ|/2^{J_h})`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeField, LineField};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn rho(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth radial cutoff.
pub fn chi(r: f64) -> f64 {
    let r = r.abs();
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        let s = (r - INNER) / (OUTER - INNER);
        let a = rho(1.0 - s);
        a / (a + rho(s))
    }
}

/// Outer radius of `supp φ_j`.
fn block_radius(j: i32) -> f64 {
    if j < 0 {
        OUTER
    } else {
        2f64.powi(j) * 2.0 * OUTER
    }
}

/// Smallest `j ≥ -1` whose block support is not contained in `[-π/h, π/h]`.
pub fn j_h(h: f64) -> i32 {
    let edge = PI / h;
    let mut j = -1;
    while block_radius(j) <= edge {
        j += 1;
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    h: f64,
    q: usize,
}

impl TorusGrid {
    pub fn new(h: f64, q: usize) -> Result<Self> {
        if !(h > 0.0) || q < 4 || q % 2 != 0 {
            return Err(invalid(format!("torus grid needs h > 0 and even Q >= 4, got h = {h}, Q = {q}")));
        }
        Ok(Self { h, q })
    }

    /// Grid for fields spanning `span` nodes: `Q = max(8 span, 64/h)`, even.
    pub fn for_span(h: f64, span: usize) -> Result<Self> {
        let q = (8 * span).max((64.0 / h).ceil() as usize).max(64);
        Self::new(h, q + q % 2)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Frequency of FFT bin `r`.
    pub fn xi(&self, r: usize) -> f64 {
        let r = if r < self.q / 2 {
            r as f64
        } else {
            r as f64 - self.q as f64
        };
        2.0 * PI * r / (self.h * self.q as f64)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.q).map(|r| self.xi(r)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DyadicPartition {
    j_max: i32,
    /// `blocks[j + 1][r]`.
    blocks: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: &TorusGrid) -> Self {
        let j_max = j_h(grid.h());
        let xi = grid.frequencies();
        let blocks = (-1..=j_max)
            .map(|j| {
                xi.iter()
                    .map(|x| {
                        let r = x.abs();
                        match (j, j == j_max) {
                            (-1, true) => 1.0,
                            (-1, false) => chi(r),
                            (_, true) => 1.0 - chi(r / 2f64.powi(j)),
                            _ => chi(r / 2f64.powi(j + 1)) - chi(r / 2f64.powi(j)),
                        }
                    })
                    .collect()
            })
            .collect();
        Self { j_max, blocks }
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn block(&self, j: i32) -> Result<&[f64]> {
        if j < -1 || j > self.j_max {
            return Err(invalid(format!("block {j} outside [-1, {}]", self.j_max)));
        }
        Ok(&self.blocks[(j + 1) as usize])
    }

    /// `max_r |Σ_j φ_j(ξ_r) - 1|`.
    pub fn unity_residual(&self) -> f64 {
        let q = self.blocks[0].len();
        (0..q)
            .map(|r| (self.blocks.iter().map(|b| b[r]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovSpec {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        let s = Self { alpha, p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.q >= 1.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("Besov exponents need p, q >= 1, got {self:?}")));
        }
        Ok(())
    }
}

/// Transforms, blocks and norms for one `(h, Q)`.
#[derive(Clone)]
pub struct BesovEvaluator {
    grid: TorusGrid,
    partition: DyadicPartition,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BesovEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BesovEvaluator")
            .field("grid", &self.grid)
            .field("j_max", &self.partition.j_max)
            .finish()
    }
}

impl BesovEvaluator {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.q());
        let inverse = planner.plan_fft_inverse(grid.q());
        Self {
            partition: DyadicPartition::new(&grid),
            grid,
            forward,
            inverse,
        }
    }

    pub fn for_span(h: f64, span: usize) -> Result<Self> {
        Ok(Self::new(TorusGrid::for_span(h, span)?))
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    fn check_mesh(&self, h: f64) -> Result<()> {
        if h != self.grid.h() {
            return Err(Error::MeshMismatch(h, self.grid.h()));
        }
        Ok(())
    }

    /// `F f(ξ_r)` in FFT order.
    pub fn dft(&self, f: &LineField) -> Result<Vec<Complex64>> {
        self.check_mesh(f.h)?;
        let q = self.grid.q();
        let span = f.values.len();
        if span > q {
            return Err(invalid(format!("field spans {span} nodes, more than Q = {q}")));
        }
        if span > q / 4 && span < q {
            log::warn!("field spans {span} nodes; Q = {q} risks aliasing");
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); q];
        for (i, v) in f.values.iter().enumerate() {
            let idx = (f.first + i as i64).rem_euclid(q as i64) as usize;
            buf[idx].re += v;
        }
        // Σ_m f_m e^{+2πi r m / Q} is the unnormalised inverse FFT
        self.inverse.process(&mut buf);
        for z in &mut buf {
            *z *= f.h;
        }
        Ok(buf)
    }

    /// Inverse transform over one period, nodes `-Q/2 .. Q/2 - 1`.
    pub fn idft(&self, g: &[Complex64]) -> Result<LineField> {
        let q = self.grid.q();
        if g.len() != q {
            return Err(Error::ShapeMismatch { expected: q, got: g.len() });
        }
        let mut buf = g.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / (self.grid.h() * q as f64);
        let half = (q / 2) as i64;
        let values = (-half..half)
            .map(|m| buf[m.rem_euclid(q as i64) as usize].re * scale)
            .collect();
        Ok(LineField::new(self.grid.h(), -half, values))
    }

    fn block_from_transform(&self, fh: &[Complex64], j: i32) -> Result<LineField> {
        let phi = self.partition.block(j)?;
        let g: Vec<Complex64> = fh.iter().zip(phi).map(|(z, w)| z * *w).collect();
        self.idft(&g)
    }

    /// Littlewood-Paley block `Δ_j f`.
    pub fn lp_block(&self, f: &LineField, j: i32) -> Result<LineField> {
        let fh = self.dft(f)?;
        self.block_from_transform(&fh, j)
    }

    /// `‖Δ_j f‖_p` for `j = -1..=J_h`.
    pub fn block_norms(&self, f: &LineField, p: f64) -> Result<Vec<f64>> {
        let fh = self.dft(f)?;
        (-1..=self.partition.j_max())
            .map(|j| self.block_from_transform(&fh, j)?.lp_norm(p))
            .collect()
    }

    /// `(Σ_j (2^{jα} ‖Δ_j f‖_p)^q)^{1/q}`, maximum over `j` for `q = ∞`.
    pub fn norm(&self, f: &LineField, spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        let norms = self.block_norms(f, spec.p)?;
        Ok(combine(&norms, spec))
    }

    pub fn norm_half_line(&self, f: &LatticeField, spec: &BesovSpec) -> Result<f64> {
        self.norm(&LineField::from(f), spec)
    }
}

/// Weighted `ℓ^q` sum of block norms starting at `j = -1`.
pub fn combine(block_norms: &[f64], spec: &BesovSpec) -> f64 {
    let weighted = block_norms
        .iter()
        .enumerate()
        .map(|(i, n)| 2f64.powf((i as f64 - 1.0) * spec.alpha) * n);
    if spec.q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        weighted.map(|w| w.powf(spec.q)).sum::<f64>().powf(1.0 / spec.q)
    }
}

/// Besov norm of a half-line field on its own lattice with the default grid.
pub fn besov_norm(f: &LatticeField, spec: &BesovSpec) -> Result<f64> {
    BesovEvaluator::for_span(f.h(), f.len())?.norm_half_line(f, spec)
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(invalid("need at least two times"));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(invalid("times must increase"));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(invalid("time grid must be uniform"));
        }
    }
    Ok(dt)
}

/// Space-time distance of two trajectories on a common uniform time grid:
///
/// `(∫ ‖d(t)‖_B^r dt)^{1/r} + (∫∫_{|s|<1} ‖d(τ+s) - d(τ)‖_B^r / |s|^{1+rᾱ} ds dτ)^{1/r}`
///
/// with `d = a - b`, trapezoid in time and a left-endpoint sum over grid shifts.
pub fn spacetime_besov_distance(
    a: &[LatticeField],
    b: &[LatticeField],
    times: &[f64],
    bar_alpha: f64,
    spec: &BesovSpec,
    r: f64,
    eval: &BesovEvaluator,
) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(invalid(format!("time exponent r must be >= 1, got {r}")));
    }
    if !(bar_alpha > 0.0 && bar_alpha < 1.0) {
        return Err(invalid(format!(
            "time regularity must lie in (0, 1) for an integrable kernel, got {bar_alpha}"
        )));
    }
    if a.len() != b.len() || a.len() != times.len() {
        return Err(invalid("trajectories and times must have equal length"));
    }
    let dt = check_uniform(times)?;
    let diffs: Vec<LatticeField> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.zip_with(y, |p, q| p - q))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = diffs
        .iter()
        .map(|d| eval.norm_half_line(d, spec))
        .collect::<Result<_>>()?;
    let n = norms.len();
    let mut first = 0.0;
    for (i, v) in norms.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        first += w * dt * v.powf(r);
    }
    let first = first.powf(1.0 / r);
    let max_lag = ((1.0 / dt) - 1e-9).ceil() as usize;
    let mut second = 0.0;
    for i in 0..n {
        for l in 1..max_lag.min(n) {
            let s = l as f64 * dt;
            if s >= 1.0 {
                break;
            }
            let kernel = s.powf(-(1.0 + r * bar_alpha));
            for j in [i.checked_add(l), i.checked_sub(l)].into_iter().flatten() {
                if j < n {
                    let dd = diffs[j].zip_with(&diffs[i], |p, q| p - q)?;
                    second += dt * dt * eval.norm_half_line(&dd, spec)?.powf(r) * kernel;
                }
            }
        }
    }
    Ok(first + second.powf(1.0 / r))
}

/// Writes `h,alpha,p,q,value` rows.
pub fn write_norm_csv<W: Write>(w: W, rows: &[(f64, BesovSpec, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["h", "alpha", "p", "q", "value"])?;
    for (h, s, v) in rows {
        wr.write_record([h.to_string(), s.alpha.to_string(), s.p.to_string(), s.q.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
