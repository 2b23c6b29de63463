//! Explicit schemes for the coupled pollutant/calcite system.
//!
//! `s` is the pollutant, `c` the calcite, `φ(c) = A + Bc` the porosity and
//! `ψ` the Dirichlet boundary path. Two solvers share one configuration:
//! the direct FTCS scheme for `(s, c)` and the `u + v` splitting.

mod direct;
mod lte;
mod split;

pub use direct::{run_direct, step_direct, DirectSolver};
pub use lte::{local_truncation_error, LteRow, LteTable};
pub use split::{c_explicit, run_split, step_split, CouplingMode, SplitOptions, SplitState, UProvider};

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPath;
use crate::error::{invalid, Result};
use crate::lattice::{Lattice, LatticeField, TruncationPolicy};

/// Physical data, meshes, initial fields and boundary path of one run.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub eta: f64,
    pub lattice: Lattice,
    pub k: f64,
    pub t_end: f64,
    pub truncation: TruncationPolicy,
    pub s0: LatticeField,
    pub c0: LatticeField,
    /// Any uniform grid that the step size `k` subdivides into whole cells.
    pub psi: BoundaryPath,
    /// Allow B outside {+1, -1}.
    pub general_b: bool,
    pub allow_unstable: bool,
    pub snapshot_stride: usize,
}

impl SchemeConfig {
    #[inline]
    pub fn phi(&self, c: f64) -> f64 {
        self.a + self.b * c
    }

    pub fn h(&self) -> f64 {
        self.lattice.h()
    }

    pub fn dbar(&self) -> f64 {
        self.k / (self.h() * self.h())
    }

    /// Number of time steps `N = T/k`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_end / self.k).round();
        if n < 1.0 || (n * self.k - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(invalid(format!(
                "T = {} is not a whole number of steps k = {}",
                self.t_end, self.k
            )));
        }
        Ok(n as usize)
    }

    /// `ψ^n` for `n = 0..=N`.
    pub fn psi_grid(&self) -> Result<Vec<f64>> {
        let n = self.steps()?;
        if (self.psi.t_end() - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(invalid(format!(
                "boundary path horizon {} differs from T = {}",
                self.psi.t_end(),
                self.t_end
            )));
        }
        let np = self.psi.steps();
        if n % np == 0 && np < n {
            let dt = self.t_end / n as f64;
            return Ok((0..=n).map(|i| self.psi.eval(i as f64 * dt)).collect());
        }
        if np % n != 0 {
            return Err(invalid(format!(
                "boundary path has {np} steps, not a multiple of the {n} solver steps"
            )));
        }
        let r = np / n;
        Ok((0..=n).map(|i| self.psi.values()[i * r]).collect())
    }

    /// Checks the data; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for (name, v) in [
            ("A", self.a),
            ("B", self.b),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("k", self.k),
            ("T", self.t_end),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        if !(self.k > 0.0 && self.t_end > 0.0 && self.eta > 0.0) {
            return Err(invalid("k, T and eta must be positive"));
        }
        if self.lambda < 0.0 {
            return Err(invalid("lambda must be nonnegative"));
        }
        if !self.general_b && !(self.a == 1.0 && (self.b == 1.0 || self.b == -1.0)) {
            return Err(invalid(format!(
                "scaled regime needs A = 1 and B = ±1 (got A = {}, B = {}); enable general_b otherwise",
                self.a, self.b
            )));
        }
        if self.general_b && !(self.a > 0.0) {
            return Err(invalid("A must be positive"));
        }
        if self.b > 0.0 && self.b >= 1.0 / self.eta {
            return Err(invalid(format!(
                "B = {} must stay below 1/eta = {}",
                self.b,
                1.0 / self.eta
            )));
        }
        for f in [&self.s0, &self.c0] {
            if f.lattice() != self.lattice {
                return Err(invalid("initial fields must live on the configured lattice"));
            }
            if !f.is_finite() {
                return Err(invalid("initial fields must be finite"));
            }
        }
        if self.s0.values().iter().any(|v| *v < 0.0 || *v > self.eta) {
            return Err(invalid("s0 must lie in [0, eta]"));
        }
        if self.c0.values().iter().any(|v| *v <= 0.0) {
            return Err(invalid("c0 must be positive"));
        }
        let (pmin, pmax) = self.phi_range();
        if pmin <= 0.0 {
            return Err(invalid(format!("porosity must be positive, min is {pmin}")));
        }
        if pmax >= 1.0 {
            warnings.push(format!("porosity range [{pmin}, {pmax}] leaves (0, 1)"));
        }
        if self.s0.values()[0] != 0.0 {
            warnings.push(format!("s0(0) = {} is not 0", self.s0.values()[0]));
        }
        let psi = self.psi_grid()?;
        if psi[0] != 0.0 {
            warnings.push(format!("psi(0) = {} is not 0", psi[0]));
        }
        if psi.iter().any(|v| *v < 0.0 || *v > self.eta) {
            warnings.push("boundary path leaves [0, eta]".into());
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot stride must be at least 1"));
        }
        Ok(warnings)
    }

    pub fn c0_max(&self) -> f64 {
        self.c0.values().iter().fold(f64::MIN, |m, v| m.max(*v))
    }

    pub fn phi_range(&self) -> (f64, f64) {
        self.c0
            .values()
            .iter()
            .map(|c| self.phi(*c))
            .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub k: f64,
    pub k_max: f64,
    /// `h²/2`.
    pub k_heat: f64,
    /// The reaction-dependent bound.
    pub k_reaction: f64,
    pub branch: String,
    pub c0_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

/// Largest step for which the direct scheme keeps `s ∈ [0, η)` and `c ∈ [0, max c0]`.
pub fn k_max(a: f64, b: f64, lambda: f64, eta: f64, h: f64, c0: &[f64]) -> Result<StabilityReport> {
    if b > 0.0 && b >= 1.0 / eta {
        return Err(invalid(format!("B = {b} violates B < 1/eta = {}", 1.0 / eta)));
    }
    let c0_max = c0.iter().fold(f64::MIN, |m, v| m.max(*v));
    let (phi_min, phi_max) = c0
        .iter()
        .map(|c| a + b * c)
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let h2 = h * h;
    let k_heat = h2 / 2.0;
    let (k_reaction, branch) = if b <= 0.0 {
        (h2 / (2.0 + lambda * c0_max * h2 * (1.0 - b * eta)), "B<0")
    } else {
        (h2 / (2.0 + phi_max / phi_min + lambda * c0_max * h2), "0<B<1/eta")
    };
    Ok(StabilityReport {
        stable: true,
        k: f64::NAN,
        k_max: k_heat.min(k_reaction),
        k_heat,
        k_reaction,
        branch: branch.into(),
        c0_max,
        phi_min,
        phi_max,
    })
}

pub fn check_stability(cfg: &SchemeConfig) -> Result<StabilityReport> {
    let mut r = k_max(cfg.a, cfg.b, cfg.lambda, cfg.eta, cfg.h(), cfg.c0.values())?;
    r.k = cfg.k;
    r.stable = cfg.k <= r.k_max;
    Ok(r)
}

/// Running diagnostics of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub s_min: f64,
    pub s_max: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `sup_n h Σ_{m≥1} (s^n_m)²`.
    pub energy_sup_l2: f64,
    /// `Σ_n k h Σ_{m≥0} (D⁺s^n_m)²`.
    pub energy_grad: f64,
    /// Smallest s-update coefficient seen.
    pub min_coefficient: f64,
    /// `max_n |s^n_M| / sup_m |s^n_m|`.
    pub tail_ratio: f64,
    /// Nodes outside `s ∈ [0, η)` or `c ∈ [0, max c0]`.
    pub range_violations: u64,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub node: usize,
    pub s: f64,
    pub c: f64,
}

impl Monitors {
    fn new() -> Self {
        Self {
            s_min: f64::INFINITY,
            s_max: f64::NEG_INFINITY,
            c_min: f64::INFINITY,
            c_max: f64::NEG_INFINITY,
            phi_min: f64::INFINITY,
            phi_max: f64::NEG_INFINITY,
            energy_sup_l2: 0.0,
            energy_grad: 0.0,
            min_coefficient: f64::INFINITY,
            tail_ratio: 0.0,
            range_violations: 0,
            first_violation: None,
        }
    }

    /// The energy functional `sup ‖s‖² + Σ k‖D⁺s‖²`.
    pub fn energy(&self) -> f64 {
        self.energy_sup_l2 + self.energy_grad
    }

    /// Right-edge values stayed below `1e-8` of the field sup.
    pub fn truncation_trusted(&self) -> bool {
        self.tail_ratio < 1e-8
    }

    fn observe(&mut self, step: usize, s: &[f64], c: &[f64], cfg: &SchemeConfig, c0_max: f64) {
        let h = cfg.h();
        let mut l2 = 0.0;
        let mut sup = 0.0_f64;
        for (m, (&sv, &cv)) in s.iter().zip(c).enumerate() {
            self.s_min = self.s_min.min(sv);
            self.s_max = self.s_max.max(sv);
            self.c_min = self.c_min.min(cv);
            self.c_max = self.c_max.max(cv);
            let p = cfg.phi(cv);
            self.phi_min = self.phi_min.min(p);
            self.phi_max = self.phi_max.max(p);
            sup = sup.max(sv.abs());
            if m >= 1 {
                l2 += sv * sv;
            }
            // the boundary node carries ψ, which may touch η
            let s_ok = sv >= 0.0 && if m == 0 { sv <= cfg.eta } else { sv < cfg.eta };
            let c_ok = cv >= 0.0 && cv <= c0_max;
            if !(s_ok && c_ok) {
                self.range_violations += 1;
                if self.first_violation.is_none() {
                    self.first_violation = Some(Violation { step, node: m, s: sv, c: cv });
                }
            }
        }
        self.energy_sup_l2 = self.energy_sup_l2.max(h * l2);
        if sup > 0.0 {
            self.tail_ratio = self.tail_ratio.max(s[s.len() - 1].abs() / sup);
        }
    }

    /// Adds `k h Σ_{m≥0} (D⁺s_m)²` for the state a step started from.
    fn add_gradient(&mut self, s: &[f64], cfg: &SchemeConfig) {
        let h = cfg.h();
        let g = cfg.truncation.ghost(s);
        let n = s.len();
        let mut d2 = 0.0;
        for m in 0..n {
            let next = if m + 1 < n { s[m + 1] } else { g };
            let d = (next - s[m]) / h;
            d2 += d * d;
        }
        self.energy_grad += cfg.k * h * d2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: usize,
    pub t: f64,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Diverged { step: usize, node: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lattice: Lattice,
    pub k: f64,
    pub snapshots: Vec<Snapshot>,
    pub monitors: Monitors,
    pub outcome: Outcome,
    pub stability: StabilityReport,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn diverged(&self) -> bool {
        !matches!(self.outcome, Outcome::Completed)
    }

    /// Snapshot at step `n`, if recorded.
    pub fn at_step(&self, n: usize) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&n, |s| s.n)
            .ok()
            .map(|i| &self.snapshots[i])
    }
}

fn divergence(step: usize, s: &[f64], eta: f64) -> Option<Outcome> {
    s.iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || v.abs() > 10.0 * eta)
        .map(|(node, v)| Outcome::Diverged {
            step,
            node,
            value: *v,
        })
}

/// Gate check shared by both solvers; returns the report and warnings.
fn prepare(cfg: &SchemeConfig) -> Result<(StabilityReport, Vec<String>)> {
    let warnings = cfg.validate()?;
    let report = check_stability(cfg)?;
    if !report.stable && !cfg.allow_unstable {
        return Err(crate::error::Error::Unstable {
            k: cfg.k,
            k_max: report.k_max,
        });
    }
    Ok((report, warnings))
}

/// Semi-discrete right-hand side
/// `Δ_h s + (1/2φ)[D⁺φ D⁺s + D⁻φ D⁻s] − λcs + λBcs²` at nodes `1..=M`.
pub fn semi_discrete_rhs(s: &[f64], c: &[f64], cfg: &SchemeConfig) -> Vec<f64> {
    let h = cfg.h();
    let h2 = h * h;
    let n = s.len();
    let gs = cfg.truncation.ghost(s);
    let gc = c[n - 1];
    let mut out = vec![0.0; n];
    for m in 1..n {
        let (sn, cn) = if m + 1 < n { (s[m + 1], c[m + 1]) } else { (gs, gc) };
        let pm = cfg.phi(c[m]);
        let pp = cfg.phi(cn);
        let pl = cfg.phi(c[m - 1]);
        let lap = (sn - 2.0 * s[m] + s[m - 1]) / h2;
        let grad = ((pp - pm) * (sn - s[m]) + (pm - pl) * (s[m] - s[m - 1])) / (2.0 * pm * h2);
        out[m] = lap + grad - cfg.lambda * c[m] * s[m] * (1.0 - cfg.b * s[m]);
    }
    out
}
