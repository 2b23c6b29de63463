//! Direct explicit scheme for `(s, c)`.

use super::{divergence, prepare, Monitors, Outcome, SchemeConfig, Snapshot, Trajectory};
use crate::error::Result;

/// One step of the scheme from `(s, c)` at step `n` into `(s_out, c_out)`.
///
/// `psi_now` and `psi_next` are `ψ^n` and `ψ^{n+1}`. Returns the smallest
/// s-update coefficient.
pub fn step_direct(
    cfg: &SchemeConfig,
    s: &[f64],
    c: &[f64],
    psi_now: f64,
    psi_next: f64,
    s_out: &mut [f64],
    c_out: &mut [f64],
) -> f64 {
    let n = s.len();
    let k = cfg.k;
    let dbar = cfg.dbar();
    let (lambda, b) = (cfg.lambda, cfg.b);
    let gs = cfg.truncation.ghost(s);
    let gc = c[n - 1];
    let mut min_coef = f64::INFINITY;
    for m in 1..n {
        let (sn, cn) = if m + 1 < n { (s[m + 1], c[m + 1]) } else { (gs, gc) };
        let pm = cfg.phi(c[m]);
        let pp = cfg.phi(cn);
        let pl = cfg.phi(c[m - 1]);
        let inv = 1.0 / (2.0 * pm);
        let up = dbar * (pm + pp) * inv;
        let down = dbar * (pm + pl) * inv;
        let mid = 1.0 - dbar * (1.0 + (pp + pl) * inv) - lambda * k * c[m] * (1.0 - b * s[m]);
        min_coef = min_coef.min(up).min(down).min(mid);
        s_out[m] = up * sn + down * s[m - 1] + mid * s[m];
    }
    s_out[0] = psi_next;
    for m in 0..n {
        let sm = if m == 0 { psi_now } else { s[m] };
        c_out[m] = c[m] * (-lambda * k * sm * cfg.phi(c[m])).exp();
    }
    min_coef
}

/// Stateful driver of the direct scheme.
#[derive(Debug, Clone)]
pub struct DirectSolver<'a> {
    cfg: &'a SchemeConfig,
    psi: Vec<f64>,
    steps: usize,
    pub n: usize,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    scratch_s: Vec<f64>,
    scratch_c: Vec<f64>,
    pub monitors: Monitors,
    c0_max: f64,
}

impl<'a> DirectSolver<'a> {
    /// Starts from `(s0, c0)` with `s_0 = ψ^0`. Does not apply the gate.
    pub fn new(cfg: &'a SchemeConfig) -> Result<Self> {
        let psi = cfg.psi_grid()?;
        let steps = cfg.steps()?;
        let mut s = cfg.s0.values().to_vec();
        s[0] = psi[0];
        let c = cfg.c0.values().to_vec();
        let mut monitors = Monitors::new();
        let c0_max = cfg.c0_max();
        monitors.observe(0, &s, &c, cfg, c0_max);
        Ok(Self {
            cfg,
            psi,
            steps,
            n: 0,
            scratch_s: vec![0.0; s.len()],
            scratch_c: vec![0.0; s.len()],
            s,
            c,
            monitors,
            c0_max,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t(&self) -> f64 {
        self.n as f64 * self.cfg.k
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            n: self.n,
            t: self.t(),
            s: self.s.clone(),
            c: self.c.clone(),
            u: None,
            v: None,
        }
    }

    /// Advances one step; `Some(outcome)` when the state diverged.
    pub fn step(&mut self) -> Option<Outcome> {
        let n = self.n;
        let coef = step_direct(
            self.cfg,
            &self.s,
            &self.c,
            self.psi[n],
            self.psi[n + 1],
            &mut self.scratch_s,
            &mut self.scratch_c,
        );
        self.monitors.min_coefficient = self.monitors.min_coefficient.min(coef);
        self.monitors.add_gradient(&self.s, self.cfg);
        std::mem::swap(&mut self.s, &mut self.scratch_s);
        std::mem::swap(&mut self.c, &mut self.scratch_c);
        self.n += 1;
        if let Some(o) = divergence(self.n, &self.s, self.cfg.eta) {
            return Some(o);
        }
        self.monitors
            .observe(self.n, &self.s, &self.c, self.cfg, self.c0_max);
        None
    }
}

/// Runs the direct scheme to `T`, recording snapshots every `snapshot_stride` steps.
pub fn run_direct(cfg: &SchemeConfig) -> Result<Trajectory> {
    let (stability, warnings) = prepare(cfg)?;
    let mut solver = DirectSolver::new(cfg)?;
    let steps = solver.steps();
    let mut snapshots = vec![solver.snapshot()];
    let mut outcome = Outcome::Completed;
    for _ in 0..steps {
        if let Some(o) = solver.step() {
            outcome = o;
            snapshots.push(solver.snapshot());
            break;
        }
        if solver.n % cfg.snapshot_stride == 0 || solver.n == steps {
            snapshots.push(solver.snapshot());
        }
    }
    Ok(Trajectory {
        lattice: cfg.lattice,
        k: cfg.k,
        snapshots,
        monitors: solver.monitors,
        outcome,
        stability,
        warnings,
    })
}
