//! Feynman-Kac Monte Carlo for nearest-neighbour lattice equations.
//!
//! A generator describes a backward equation in chain time `σ ∈ [t0, T]`:
//! jump rates up/down per unit time, a potential `V ≥ 0`, terminal data at
//! `T` and boundary data at node 0. Paths are sampled exactly by thinning
//! against a uniform bound on the total jump rate.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPath;
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeField, TruncationPolicy};
use crate::seed::stream_rng;
use crate::solver::{SchemeConfig, Trajectory};

pub trait Generator: Sync {
    fn h(&self) -> f64;

    /// Uniform bound on `up + down`.
    fn rate_bound(&self) -> f64;

    /// Jump rates `(up, down)` per unit time at node `n ≥ 1`.
    fn rates(&self, sigma: f64, n: i64) -> (f64, f64);

    /// `∫_a^b V(σ, n) dσ`.
    fn potential_integral(&self, a: f64, b: f64, n: i64) -> f64;

    fn terminal(&self, n: i64) -> f64;

    /// Value collected when the chain reaches node 0 at time `σ`.
    fn boundary(&self, sigma: f64) -> f64;

    /// Node beyond which the chain is killed with value 0, if any.
    fn right_absorber(&self) -> Option<i64> {
        None
    }
}

type RateFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Generator built from closures of `(σ, x)`.
pub struct FnGenerator {
    pub h: f64,
    pub bound: f64,
    pub up: RateFn,
    pub down: RateFn,
    pub potential: RateFn,
    pub terminal: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub boundary: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Largest trapezoid substep for the potential integral.
    pub v_substep: f64,
}

impl FnGenerator {
    /// Pure heat generator `Δ_h`: rate `1/h²` each way, no potential.
    pub fn heat(
        h: f64,
        terminal: impl Fn(f64) -> f64 + Send + Sync + 'static,
        boundary: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let r = 1.0 / (h * h);
        FnGenerator {
            h,
            bound: 2.0 * r,
            up: Box::new(move |_, _| r),
            down: Box::new(move |_, _| r),
            potential: Box::new(|_, _| 0.0),
            terminal: Box::new(terminal),
            boundary: Box::new(boundary),
            v_substep: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid("h must be positive"));
        }
        if !(self.bound >= 0.0) || !self.bound.is_finite() {
            return Err(invalid("rate bound must be finite and nonnegative"));
        }
        if !(self.v_substep > 0.0) {
            return Err(invalid("potential substep must be positive"));
        }
        Ok(())
    }
}

impl Generator for FnGenerator {
    fn h(&self) -> f64 {
        self.h
    }

    fn rate_bound(&self) -> f64 {
        self.bound
    }

    fn rates(&self, sigma: f64, n: i64) -> (f64, f64) {
        let x = n as f64 * self.h;
        ((self.up)(sigma, x), (self.down)(sigma, x))
    }

    fn potential_integral(&self, a: f64, b: f64, n: i64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let x = n as f64 * self.h;
        let pieces = if self.v_substep.is_finite() {
            ((b - a) / self.v_substep).ceil().max(1.0) as usize
        } else {
            1
        };
        let d = (b - a) / pieces as f64;
        let mut s = 0.5 * ((self.potential)(a, x) + (self.potential)(b, x));
        for i in 1..pieces {
            s += (self.potential)(a + i as f64 * d, x);
        }
        s * d
    }

    fn terminal(&self, n: i64) -> f64 {
        (self.terminal)(n as f64 * self.h)
    }

    fn boundary(&self, sigma: f64) -> f64 {
        (self.boundary)(sigma)
    }
}

/// Heat equation on the half-line at physical time `t`: initial data `s0`
/// (zero beyond the lattice) and boundary path `ψ`. The chain runs over
/// `σ ∈ [0, t]` and collects `ψ(t − σ)` at the boundary.
pub struct HeatGenerator {
    h: f64,
    t: f64,
    s0: Vec<f64>,
    psi: Option<BoundaryPath>,
}

impl HeatGenerator {
    pub fn new(s0: &LatticeField, psi: Option<BoundaryPath>, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(invalid("t must be nonnegative"));
        }
        if let Some(p) = &psi {
            if p.t_end() < t * (1.0 - 1e-12) {
                return Err(invalid("boundary path ends before t"));
            }
        }
        Ok(HeatGenerator {
            h: s0.h(),
            t,
            s0: s0.values().to_vec(),
            psi,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }
}

impl Generator for HeatGenerator {
    fn h(&self) -> f64 {
        self.h
    }

    fn rate_bound(&self) -> f64 {
        2.0 / (self.h * self.h)
    }

    fn rates(&self, _: f64, _: i64) -> (f64, f64) {
        let r = 1.0 / (self.h * self.h);
        (r, r)
    }

    fn potential_integral(&self, _: f64, _: f64, _: i64) -> f64 {
        0.0
    }

    fn terminal(&self, n: i64) -> f64 {
        usize::try_from(n)
            .ok()
            .and_then(|i| self.s0.get(i).copied())
            .unwrap_or(0.0)
    }

    fn boundary(&self, sigma: f64) -> f64 {
        self.psi.as_ref().map_or(0.0, |p| p.eval(self.t - sigma))
    }
}

/// The linear equation satisfied by the pollutant when the calcite history
/// `g` and the quadratic factor `f` are frozen:
/// `∂_t s = Δ_h s + (D⁺φ D⁺s + D⁻φ D⁻s)/(2φ) − λ g (1 − B f) s`, `φ = A + B g`.
///
/// Histories hold the state at steps `0..N` of size `k`; they are read
/// piecewise constant in time (left value).
pub struct HistoryGenerator {
    h: f64,
    k: f64,
    t: f64,
    len: usize,
    /// `(up, down)` per step and node `1..=M`.
    rates: Vec<Vec<(f64, f64)>>,
    /// `V` per step and node `0..=M`.
    potential: Vec<Vec<f64>>,
    /// `V` beyond the lattice per step.
    potential_far: Vec<f64>,
    bound: f64,
    s0: Vec<f64>,
    psi: BoundaryPath,
    policy: TruncationPolicy,
}

impl HistoryGenerator {
    /// `g[j]`, `f[j]` are the fields after `j` steps, `j = 0..N` with
    /// `N k = t`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        lambda: f64,
        k: f64,
        g: &[Vec<f64>],
        f: &[Vec<f64>],
        s0: &LatticeField,
        psi: BoundaryPath,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        let steps = g.len();
        if steps == 0 || f.len() != steps {
            return Err(invalid("histories must be nonempty and of equal length"));
        }
        let len = s0.len();
        let h = s0.h();
        let h2 = h * h;
        let mut rates = Vec::with_capacity(steps);
        let mut potential = Vec::with_capacity(steps);
        let mut potential_far = Vec::with_capacity(steps);
        let mut bound = 2.0 / h2;
        for (j, (gj, fj)) in g.iter().zip(f).enumerate() {
            if gj.len() != len || fj.len() != len {
                return Err(Error::ShapeMismatch {
                    expected: len,
                    got: gj.len().min(fj.len()),
                });
            }
            let phi: Vec<f64> = gj.iter().map(|c| a + b * c).collect();
            if let Some(m) = phi.iter().position(|p| !(*p > 0.0)) {
                return Err(invalid(format!(
                    "negative jump rate: porosity {} at step {j}, node {m}",
                    phi[m]
                )));
            }
            let mut row = vec![(0.0, 0.0); len];
            for m in 1..len {
                let next = if m + 1 < len { phi[m + 1] } else { phi[m] };
                let up = if m + 1 == len && policy == TruncationPolicy::LastValue {
                    0.0
                } else {
                    (phi[m] + next) / (2.0 * h2 * phi[m])
                };
                let down = (phi[m] + phi[m - 1]) / (2.0 * h2 * phi[m]);
                bound = bound.max(up + down);
                row[m] = (up, down);
            }
            rates.push(row);
            potential.push(
                gj.iter()
                    .zip(fj)
                    .map(|(c, s)| lambda * c * (1.0 - b * s))
                    .collect(),
            );
            potential_far.push(lambda * gj[len - 1]);
        }
        let t = steps as f64 * k;
        if psi.t_end() < t * (1.0 - 1e-12) {
            return Err(invalid("boundary path ends before t"));
        }
        Ok(HistoryGenerator {
            h,
            k,
            t,
            len,
            rates,
            potential,
            potential_far,
            bound,
            s0: s0.values().to_vec(),
            psi,
            policy,
        })
    }

    /// Generator for `s(t, ·)` of a solver run with snapshots at every step.
    pub fn from_run(cfg: &SchemeConfig, run: &Trajectory, t: f64) -> Result<Self> {
        let steps = (t / cfg.k).round() as usize;
        if (steps as f64 * cfg.k - t).abs() > 1e-9 * t.max(cfg.k) {
            return Err(invalid("t must be a multiple of the solver step"));
        }
        let mut g = Vec::with_capacity(steps);
        let mut f = Vec::with_capacity(steps);
        for j in 0..steps {
            let snap = run
                .at_step(j)
                .ok_or_else(|| invalid(format!("run lacks a snapshot at step {j}")))?;
            g.push(snap.c.clone());
            f.push(snap.s.clone());
        }
        HistoryGenerator::new(
            cfg.a,
            cfg.b,
            cfg.lambda,
            cfg.k,
            &g,
            &f,
            &cfg.s0,
            cfg.psi.clone(),
            cfg.truncation,
        )
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    /// History index at chain time `σ`, i.e. physical time `t − σ`.
    fn step_at(&self, sigma: f64) -> usize {
        let r = (self.t - sigma) / self.k;
        (r.max(0.0).floor() as usize).min(self.rates.len() - 1)
    }

    fn v(&self, j: usize, n: i64) -> f64 {
        match usize::try_from(n) {
            Ok(i) if i < self.len => self.potential[j][i],
            _ => self.potential_far[j],
        }
    }
}

impl Generator for HistoryGenerator {
    fn h(&self) -> f64 {
        self.h
    }

    fn rate_bound(&self) -> f64 {
        self.bound
    }

    fn rates(&self, sigma: f64, n: i64) -> (f64, f64) {
        match usize::try_from(n) {
            Ok(i) if i < self.len => self.rates[self.step_at(sigma)][i],
            _ => {
                let r = 1.0 / (self.h * self.h);
                (r, r)
            }
        }
    }

    /// Exact for the piecewise-constant history.
    fn potential_integral(&self, a: f64, b: f64, n: i64) -> f64 {
        if b <= a {
            return 0.0;
        }
        // physical interval [t - b, t - a]
        let lo = (self.t - b).max(0.0);
        let hi = (self.t - a).max(0.0);
        let last = self.rates.len() - 1;
        let mut s = 0.0;
        let mut r = lo;
        while r < hi {
            let j = ((r / self.k).floor() as usize).min(last);
            let end = if j == last { hi } else { ((j + 1) as f64 * self.k).min(hi) };
            let end = if end <= r { hi } else { end };
            s += self.v(j, n) * (end - r);
            r = end;
        }
        s
    }

    fn terminal(&self, n: i64) -> f64 {
        usize::try_from(n)
            .ok()
            .and_then(|i| self.s0.get(i).copied())
            .unwrap_or(0.0)
    }

    fn boundary(&self, sigma: f64) -> f64 {
        self.psi.eval(self.t - sigma)
    }

    fn right_absorber(&self) -> Option<i64> {
        match self.policy {
            TruncationPolicy::Zero => Some(self.len as i64),
            TruncationPolicy::LastValue => None,
        }
    }
}

/// A sampled path on `[t0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtmcPath {
    pub t0: f64,
    pub t_end: f64,
    pub jump_times: Vec<f64>,
    /// Node indices; `positions[0]` is the start, `positions[i + 1]` the
    /// node after `jump_times[i]`.
    pub positions: Vec<i64>,
    /// First time at node 0, if before `T`.
    pub hitting_time: Option<f64>,
}

impl CtmcPath {
    pub fn end(&self) -> i64 {
        *self.positions.last().expect("path has a start")
    }

    pub fn jumps(&self) -> usize {
        self.jump_times.len()
    }
}

enum Exit {
    Terminal(i64),
    Boundary(f64),
    Killed,
}

/// Walks one path, calling `segment(a, b, n)` for each constant piece and
/// `jump(σ, n)` after each accepted jump.
fn walk<R: Rng + ?Sized>(
    gen: &impl Generator,
    t0: f64,
    n0: i64,
    t_end: f64,
    rng: &mut R,
    mut segment: impl FnMut(f64, f64, i64),
    mut jump: impl FnMut(f64, i64),
) -> Result<Exit> {
    if n0 <= 0 {
        return Ok(Exit::Boundary(t0));
    }
    let bound = gen.rate_bound();
    let absorber = gen.right_absorber();
    let mut n = n0;
    let mut last = t0;
    if bound == 0.0 {
        segment(t0, t_end, n);
        return Ok(Exit::Terminal(n));
    }
    let clock = Exp::new(bound).map_err(|e| invalid(e.to_string()))?;
    let mut sigma = t0;
    loop {
        sigma += clock.sample(rng);
        if sigma >= t_end {
            segment(last, t_end, n);
            return Ok(Exit::Terminal(n));
        }
        let (up, down) = gen.rates(sigma, n);
        let total = up + down;
        if total > bound * (1.0 + 1e-12) || up < 0.0 || down < 0.0 {
            return Err(Error::RateBound { rate: total, bound });
        }
        let u: f64 = rng.random::<f64>() * bound;
        let step = if u < up {
            1
        } else if u < total {
            -1
        } else {
            continue;
        };
        segment(last, sigma, n);
        last = sigma;
        n += step;
        jump(sigma, n);
        if n == 0 {
            return Ok(Exit::Boundary(sigma));
        }
        if absorber == Some(n) {
            return Ok(Exit::Killed);
        }
    }
}

/// One path of the chain started at node `n0` at time `t0`.
pub fn simulate_ctmc(gen: &impl Generator, t0: f64, n0: i64, t_end: f64, seed: u64) -> Result<CtmcPath> {
    if !(t_end >= t0) {
        return Err(invalid("T must not precede t0"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut jump_times = Vec::new();
    let mut positions = vec![n0];
    let exit = walk(gen, t0, n0, t_end, &mut rng, |_, _, _| {}, |s, n| {
        jump_times.push(s);
        positions.push(n);
    })?;
    let hitting_time = match exit {
        Exit::Boundary(s) => Some(s),
        _ => None,
    };
    Ok(CtmcPath {
        t0,
        t_end,
        jump_times,
        positions,
        hitting_time,
    })
}

/// Monte Carlo estimate with a 95% normal confidence half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkEstimate {
    pub t: f64,
    pub x: f64,
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
    /// Sample standard deviation.
    pub std: f64,
}

impl FkEstimate {
    /// Standard error `σ/√n`.
    pub fn std_error(&self) -> f64 {
        self.std / (self.n as f64).sqrt()
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// One sample of the discounted functional.
pub fn fk_sample(gen: &impl Generator, t0: f64, n0: i64, t_end: f64, seed: u64, index: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, index);
    let mut exponent = 0.0;
    let exit = walk(
        gen,
        t0,
        n0,
        t_end,
        &mut rng,
        |a, b, n| exponent += gen.potential_integral(a, b, n),
        |_, _| {},
    )?;
    let payoff = match exit {
        Exit::Terminal(n) => gen.terminal(n),
        Exit::Boundary(s) => gen.boundary(s),
        Exit::Killed => 0.0,
    };
    Ok((-exponent).exp() * payoff)
}

/// Estimate of `E[e^{-∫V} (F0(X_T) 1_{τ>T} + φ(τ) 1_{τ≤T})]` for the chain
/// started at node `n0` at time `t0`. Sample `i` uses stream `i` of `seed`.
pub fn fk_estimate(
    gen: &impl Generator,
    t0: f64,
    n0: i64,
    t_end: f64,
    n_samples: usize,
    seed: u64,
) -> Result<FkEstimate> {
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    if !(t_end >= t0) {
        return Err(invalid("T must not precede t0"));
    }
    let samples = (0..n_samples as u64)
        .map(|i| fk_sample(gen, t0, n0, t_end, seed, i))
        .collect::<Result<Vec<f64>>>()?;
    let n = n_samples as f64;
    let mean = pairwise_sum(&samples) / n;
    let dev: Vec<f64> = samples.iter().map(|v| (v - mean) * (v - mean)).collect();
    let std = if n_samples > 1 {
        (pairwise_sum(&dev) / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(FkEstimate {
        t: t_end - t0,
        x: n0 as f64 * gen.h(),
        mean,
        ci95: 1.96 * std / n.sqrt(),
        n: n_samples,
        std,
    })
}

/// Estimate of the pollutant `s(t, x_node)` from frozen histories
/// `g = c`, `f = s` of a run with snapshots at every step.
pub fn fk_verify_s_tilde(
    cfg: &SchemeConfig,
    run: &Trajectory,
    t: f64,
    node: usize,
    n_samples: usize,
    seed: u64,
) -> Result<FkEstimate> {
    let gen = HistoryGenerator::from_run(cfg, run, t)?;
    let mut e = fk_estimate(&gen, 0.0, node as i64, gen.horizon(), n_samples, seed)?;
    e.t = t;
    Ok(e)
}

/// Writes estimates as a JSON array.
pub fn write_estimates_json<W: Write>(w: W, estimates: &[FkEstimate]) -> Result<()> {
    serde_json::to_writer_pretty(w, estimates)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn constant_functional_is_exact() {
        let g = FnGenerator::heat(0.1, |_| 1.0, |_| 1.0);
        let e = fk_estimate(&g, 0.0, 5, 0.3, 500, 7).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.ci95, 0.0);
    }

    #[test]
    fn frozen_chain_never_moves() {
        let mut g = FnGenerator::heat(0.1, |_| 0.0, |_| 0.0);
        g.up = Box::new(|_, _| 0.0);
        g.down = Box::new(|_, _| 0.0);
        g.bound = 0.0;
        let p = simulate_ctmc(&g, 0.0, 4, 10.0, 1).unwrap();
        assert_eq!(p.positions, vec![4]);
        assert!(p.hitting_time.is_none());
    }

    #[test]
    fn start_on_boundary_hits_immediately() {
        let g = FnGenerator::heat(0.1, |_| 0.0, |_| 2.5);
        let p = simulate_ctmc(&g, 0.25, 0, 1.0, 1).unwrap();
        assert_eq!(p.hitting_time, Some(0.25));
        assert_eq!(fk_estimate(&g, 0.25, 0, 1.0, 3, 1).unwrap().mean, 2.5);
    }

    #[test]
    fn paths_are_nearest_neighbour_and_stop_at_zero() {
        let g = FnGenerator::heat(0.2, |_| 0.0, |_| 0.0);
        for seed in 0..50 {
            let p = simulate_ctmc(&g, 0.0, 2, 1.0, seed).unwrap();
            for w in p.positions.windows(2) {
                assert_eq!((w[1] - w[0]).abs(), 1);
            }
            if let Some(tau) = p.hitting_time {
                assert_eq!(p.end(), 0);
                assert_eq!(*p.jump_times.last().unwrap(), tau);
            }
            assert!(p.jump_times.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rate_above_bound_is_an_error() {
        let mut g = FnGenerator::heat(0.5, |_| 0.0, |_| 0.0);
        g.bound = 1.0;
        assert!(matches!(
            fk_estimate(&g, 0.0, 40, 1.0, 10, 1),
            Err(Error::RateBound { .. })
        ));
    }

    #[test]
    fn boundary_only_estimate_is_bounded_per_sample() {
        let lat = Lattice::new(0.1, 40).unwrap();
        let psi = BoundaryPath::from_fn(0.5, 100, |t| 0.3 * (9.0 * t).sin()).unwrap();
        let g = HeatGenerator::new(&LatticeField::zeros(lat), Some(psi), 0.5).unwrap();
        for i in 0..200 {
            assert!(fk_sample(&g, 0.0, 3, 0.5, 11, i).unwrap().abs() <= 0.3);
        }
    }

    #[test]
    fn constant_potential_discounts_exactly() {
        let mut g = FnGenerator::heat(0.1, |_| 1.0, |_| 1.0);
        g.potential = Box::new(|_, _| 2.0);
        g.v_substep = 0.01;
        let far = fk_estimate(&g, 0.0, 1000, 0.4, 50, 3).unwrap();
        assert!((far.mean - (-0.8f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn history_potential_integral_is_exact() {
        let lat = Lattice::new(0.5, 3).unwrap();
        let g = vec![vec![0.2; 4], vec![0.4; 4], vec![0.8; 4]];
        let f = vec![vec![0.0; 4]; 3];
        let psi = BoundaryPath::from_fn(0.3, 3, |_| 0.0).unwrap();
        let gen = HistoryGenerator::new(
            1.0,
            -1.0,
            2.0,
            0.1,
            &g,
            &f,
            &LatticeField::zeros(lat),
            psi,
            TruncationPolicy::Zero,
        )
        .unwrap();
        // chain time [0, 0.3] covers physical steps 2, 1, 0
        let whole = gen.potential_integral(0.0, 0.3, 1);
        assert!((whole - 2.0 * 0.1 * (0.2 + 0.4 + 0.8)).abs() < 1e-14);
        let part = gen.potential_integral(0.05, 0.15, 2);
        assert!((part - 2.0 * 0.05 * (0.8 + 0.4)).abs() < 1e-14);
        assert_eq!(gen.rates(0.0, 2), (4.0, 4.0));
    }

    #[test]
    fn history_rejects_nonpositive_porosity() {
        let lat = Lattice::new(0.5, 2).unwrap();
        let psi = BoundaryPath::from_fn(0.1, 1, |_| 0.0).unwrap();
        let r = HistoryGenerator::new(
            1.0,
            1.0,
            1.0,
            0.1,
            &[vec![0.0, -2.0, 0.0]],
            &[vec![0.0; 3]],
            &LatticeField::zeros(lat),
            psi,
            TruncationPolicy::Zero,
        );
        assert!(r.is_err());
    }

    #[test]
    fn estimates_are_reproducible() {
        let g = FnGenerator::heat(0.1, |x| (-x).exp(), |s| s);
        let a = fk_estimate(&g, 0.0, 3, 0.2, 300, 99).unwrap();
        let b = fk_estimate(&g, 0.0, 3, 0.2, 300, 99).unwrap();
        assert_eq!(a, b);
        let c = fk_estimate(&g, 0.0, 3, 0.2, 300, 100).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
