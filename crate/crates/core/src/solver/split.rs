//! `s = u + v` splitting: `u` carries the boundary through the heat equation,
//! `v` solves the nonlinear equation with zero boundary and `v(0) = s0`.

use serde::{Deserialize, Serialize};

use super::{divergence, prepare, Monitors, Outcome, SchemeConfig, Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::heat_kernel::{BoundaryConvolution, HeatFtcs};
use crate::lattice::LatticeField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UProvider {
    /// FTCS heat solver with the same `k`.
    #[default]
    Ftcs,
    /// Kernel convolution of the boundary path.
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Closed-form `c` from the trapezoid time integral of `s`.
    #[default]
    Explicit,
    /// The exponential update of the direct scheme.
    Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitOptions {
    pub u_provider: UProvider,
    pub coupling: CouplingMode,
}

/// `c = A c0 / (φ(c0) e^{λA ∫s} − B c0)`.
pub fn c_explicit(c0: &LatticeField, s_integral: &LatticeField, cfg: &SchemeConfig) -> Result<LatticeField> {
    let mut out = vec![0.0; c0.len()];
    c_explicit_into(c0.values(), s_integral.values(), cfg, &mut out)?;
    LatticeField::new(c0.lattice(), out)
}

fn c_explicit_into(c0: &[f64], integral: &[f64], cfg: &SchemeConfig, out: &mut [f64]) -> Result<()> {
    for (m, ((c, i), o)) in c0.iter().zip(integral).zip(out.iter_mut()).enumerate() {
        let den = cfg.phi(*c) * (cfg.lambda * cfg.a * i).exp() - cfg.b * c;
        if !(den > 0.0) {
            return Err(Error::NonPositiveDenominator { node: m });
        }
        *o = cfg.a * c / den;
    }
    Ok(())
}

/// State of the split solver at step `n`.
#[derive(Debug, Clone)]
pub struct SplitState {
    pub n: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub c: Vec<f64>,
    /// `∫_0^{t_n} s dτ` per node.
    pub s_integral: Vec<f64>,
    /// `B / (2φ(c))`.
    pub b_c: Vec<f64>,
    /// `λ c`.
    pub gamma_c: Vec<f64>,
}

impl SplitState {
    pub fn s(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a + b).collect()
    }

    fn refresh_coefficients(&mut self, cfg: &SchemeConfig) {
        for ((b, g), c) in self.b_c.iter_mut().zip(self.gamma_c.iter_mut()).zip(&self.c) {
            *b = 0.5 * cfg.b / cfg.phi(*c);
            *g = cfg.lambda * c;
        }
    }
}

/// Advances `v` and `c` one step given `u` at steps `n` and `n + 1`.
pub fn step_split(
    state: &mut SplitState,
    u_next: &[f64],
    cfg: &SchemeConfig,
    coupling: CouplingMode,
) -> Result<()> {
    let n = state.v.len();
    let h = cfg.h();
    let h2 = h * h;
    let k = cfg.k;
    let u = &state.u;
    let v = &state.v;
    let c = &state.c;
    let gv = cfg.truncation.ghost(v);
    let gu = cfg.truncation.ghost(u);
    let gc = c[n - 1];
    let mut v_next = vec![0.0; n];
    for m in 1..n {
        let (vn, un, cn) = if m + 1 < n {
            (v[m + 1], u[m + 1], c[m + 1])
        } else {
            (gv, gu, gc)
        };
        let dpc = cn - c[m];
        let dmc = c[m] - c[m - 1];
        let lap = (vn - 2.0 * v[m] + v[m - 1]) / h2;
        let grad_v = (dpc * (vn - v[m]) + dmc * (v[m] - v[m - 1])) / h2;
        let grad_u = (dpc * (un - u[m]) + dmc * (u[m] - u[m - 1])) / h2;
        let b = state.b_c[m];
        let g = state.gamma_c[m];
        let s = u[m] + v[m];
        let rhs = lap + b * grad_v - g * v[m] + b * grad_u - g * u[m] + g * cfg.b * s * s;
        v_next[m] = v[m] + k * rhs;
    }
    let s_now = state.s();
    let s_next: Vec<f64> = u_next.iter().zip(&v_next).map(|(a, b)| a + b).collect();
    match coupling {
        CouplingMode::Scheme => {
            for m in 0..n {
                state.c[m] *= (-cfg.lambda * k * s_now[m] * cfg.phi(state.c[m])).exp();
            }
        }
        CouplingMode::Explicit => {
            for m in 0..n {
                state.s_integral[m] += 0.5 * k * (s_now[m] + s_next[m]);
            }
            let c0 = cfg.c0.values();
            c_explicit_into(c0, &state.s_integral, cfg, &mut state.c)?;
        }
    }
    state.v = v_next;
    state.u = u_next.to_vec();
    state.n += 1;
    state.refresh_coefficients(cfg);
    Ok(())
}

enum USource {
    Ftcs(HeatFtcs),
    Kernel(BoundaryConvolution),
}

/// Runs the split solver to `T`. Snapshots carry `u`, `v` and `s = u + v`.
pub fn run_split(cfg: &SchemeConfig, opts: SplitOptions) -> Result<Trajectory> {
    let (stability, mut warnings) = prepare(cfg)?;
    let psi = cfg.psi_grid()?;
    let steps = cfg.steps()?;
    if psi[0] != 0.0 {
        warnings.push("split solver run with psi(0) != 0".into());
    }
    let lattice = cfg.lattice;
    let len = lattice.len();
    let mut u0 = vec![0.0; len];
    u0[0] = psi[0];
    let mut v0 = cfg.s0.values().to_vec();
    v0[0] = 0.0;
    let mut state = SplitState {
        n: 0,
        u: u0.clone(),
        v: v0,
        c: cfg.c0.values().to_vec(),
        s_integral: vec![0.0; len],
        b_c: vec![0.0; len],
        gamma_c: vec![0.0; len],
    };
    state.refresh_coefficients(cfg);
    let mut source = match opts.u_provider {
        UProvider::Ftcs => USource::Ftcs(HeatFtcs::new(
            &LatticeField::new(lattice, u0)?.with_policy(cfg.truncation),
            cfg.k,
        )),
        UProvider::Kernel => USource::Kernel(BoundaryConvolution::new(cfg.k, steps, lattice)?),
    };
    let c0_max = cfg.c0_max();
    let mut monitors = Monitors::new();
    let snap = |st: &SplitState| Snapshot {
        n: st.n,
        t: st.n as f64 * cfg.k,
        s: st.s(),
        c: st.c.clone(),
        u: Some(st.u.clone()),
        v: Some(st.v.clone()),
    };
    monitors.observe(0, &state.s(), &state.c, cfg, c0_max);
    let mut snapshots = vec![snap(&state)];
    let mut outcome = Outcome::Completed;
    for n in 0..steps {
        let u_next = match &mut source {
            USource::Ftcs(f) => {
                f.step(psi[n + 1]);
                f.values().to_vec()
            }
            USource::Kernel(conv) => conv.u_at_step(&psi, n + 1)?.into_values(),
        };
        monitors.add_gradient(&state.s(), cfg);
        step_split(&mut state, &u_next, cfg, opts.coupling)?;
        let s = state.s();
        if let Some(o) = divergence(state.n, &s, cfg.eta) {
            outcome = o;
            snapshots.push(snap(&state));
            break;
        }
        monitors.observe(state.n, &s, &state.c, cfg, c0_max);
        if state.n % cfg.snapshot_stride == 0 || state.n == steps {
            snapshots.push(snap(&state));
        }
    }
    Ok(Trajectory {
        lattice,
        k: cfg.k,
        snapshots,
        monitors,
        outcome,
        stability,
        warnings,
    })
}
