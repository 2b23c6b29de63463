//! Local truncation error in time.

use serde::{Deserialize, Serialize};

use super::{semi_discrete_rhs, SchemeConfig, Trajectory};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LteRow {
    pub n: usize,
    pub t: f64,
    /// `max_m |τ^n_m|` over nodes `1..=M`.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LteTable {
    pub k: f64,
    pub rows: Vec<LteRow>,
}

impl LteTable {
    pub fn max(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.max_residual))
    }
}

/// Inserts a finer-step reference run into the coarse update of `cfg`:
/// `τ^n = (s_ref(t_{n+1}) - s_ref(t_n))/k - f(s_ref(t_n), c_ref(t_n))`.
///
/// The reference must share the lattice and hold snapshots at every multiple
/// of the coarse step.
pub fn local_truncation_error(cfg: &SchemeConfig, reference: &Trajectory) -> Result<LteTable> {
    if reference.lattice != cfg.lattice {
        return Err(invalid("reference run must use the same lattice"));
    }
    let ratio = (cfg.k / reference.k).round();
    if ratio < 1.0 || (ratio * reference.k - cfg.k).abs() > 1e-9 * cfg.k {
        return Err(invalid(format!(
            "coarse step {} is not a multiple of the reference step {}",
            cfg.k, reference.k
        )));
    }
    let r = ratio as usize;
    let steps = cfg.steps()?;
    let mut rows = Vec::with_capacity(steps);
    for n in 0..steps {
        let (a, b) = match (reference.at_step(n * r), reference.at_step((n + 1) * r)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(invalid(format!(
                    "reference run lacks snapshots at coarse step {n}"
                )))
            }
        };
        let f = semi_discrete_rhs(&a.s, &a.c, cfg);
        let mut worst = 0.0_f64;
        for m in 1..a.s.len() {
            let tau = (b.s[m] - a.s[m]) / cfg.k - f[m];
            worst = worst.max(tau.abs());
        }
        rows.push(LteRow {
            n,
            t: n as f64 * cfg.k,
            max_residual: worst,
        });
    }
    Ok(LteTable { k: cfg.k, rows })
}
