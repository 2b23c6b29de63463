//! Refinement study: one run per mesh level with a shared boundary path,
//! distances between consecutive levels and empirical orders.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::besov::{BesovEvaluator, BesovSpec};
use crate::boundary::BoundaryPath;
use crate::config::{SimulationConfig, SolverKind};
use crate::error::{invalid, Error, Result};
use crate::interp::{intergrid_distance_series, GridNorm};
use crate::lattice::LatticeField;
use crate::solver::{k_max, run_direct, run_split, Trajectory};

fn default_fraction() -> f64 {
    0.9
}

fn default_besov() -> BesovSpec {
    BesovSpec {
        alpha: 0.45,
        p: 2.0,
        q: 2.0,
    }
}

/// Study definition. `base` is a run config without `h`, `M` and `k`,
/// which are set per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub base: Value,
    /// Mesh sizes, coarse to fine; consecutive ratios must be powers of two.
    pub levels: Vec<f64>,
    /// Domain length; `M = length / h`.
    pub length: f64,
    /// `k(h)` is at most this fraction of the gate bound.
    #[serde(default = "default_fraction")]
    pub k_fraction: f64,
    #[serde(default = "default_besov")]
    pub besov: BesovSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub h: f64,
    pub m: usize,
    pub k: f64,
    pub k_max: f64,
    pub steps: usize,
    /// Steps between compared snapshots.
    pub stride: usize,
    pub range_violations: u64,
    pub diverged: bool,
    /// Boundary path inside `[0, η]` at this level's time grid, generated in
    /// the bounded regime.
    pub pearson_bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h_coarse: f64,
    pub h_fine: f64,
    /// `L²_t B^α_{p,q}` on the finest lattice of the study.
    pub d_besov: f64,
    /// `L^∞_t L²_x` of the piecewise-constant extensions.
    pub d_linf_l2: f64,
    /// `L^∞_t` of the `L²` distance at the coarse nodes.
    pub d_nodal: f64,
    /// `log₂(d_ℓ / d_{ℓ+1})`, on all but the last row.
    pub order_besov: Option<f64>,
    pub order_linf_l2: Option<f64>,
    pub order_nodal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub levels: Vec<LevelInfo>,
    pub rows: Vec<ConvergenceRow>,
    pub times: Vec<f64>,
    pub psi_seed: Option<u64>,
    pub pearson_bounded: bool,
}

impl StudyReport {
    /// Every distance strictly below the previous one by at least `factor`.
    pub fn decreasing_by(&self, factor: f64, pick: impl Fn(&ConvergenceRow) -> f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| pick(&w[1]) > 0.0 && pick(&w[0]) / pick(&w[1]) >= factor)
    }
}

fn power_of_two_ratio(coarse: f64, fine: f64) -> Result<usize> {
    let r = (coarse / fine).round();
    if r < 1.0 || (r * fine - coarse).abs() > 1e-9 * coarse || !(r as u64).is_power_of_two() {
        return Err(Error::NonNested { coarse, fine });
    }
    Ok(r as usize)
}

fn level_config(study: &StudyConfig, h: f64, k: Option<f64>, stride: usize) -> Result<SimulationConfig> {
    let mut doc = study.base.clone();
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| invalid("study base must be a JSON object"))?;
    let m = (study.length / h).round();
    if (m * h - study.length).abs() > 1e-9 * study.length {
        return Err(invalid(format!("h = {h} does not divide the length {}", study.length)));
    }
    obj.insert("h".into(), h.into());
    obj.insert("M".into(), (m as usize).into());
    obj.insert("snapshot_stride".into(), stride.into());
    match k {
        Some(k) => obj.insert("k".into(), k.into()),
        None => obj.remove("k"),
    };
    Ok(serde_json::from_value(doc)?)
}

fn run(cfg: &SimulationConfig, psi: Option<&BoundaryPath>) -> Result<(Trajectory, BoundaryPath, f64)> {
    let mut resolved = cfg.resolve()?;
    if let Some(p) = psi {
        resolved.scheme.psi = p.clone();
    }
    let tr = match cfg.solver {
        SolverKind::Direct => run_direct(&resolved.scheme)?,
        SolverKind::Split => run_split(&resolved.scheme, resolved.split)?,
    };
    let eta = resolved.scheme.eta;
    Ok((tr, resolved.scheme.psi, eta))
}

fn nodal_distance(a: &LatticeField, b: &LatticeField) -> Result<f64> {
    let (coarse, fine) = if a.h() >= b.h() { (a, b) } else { (b, a) };
    let r = power_of_two_ratio(coarse.h(), fine.h())?;
    let mut s = 0.0;
    for (m, v) in coarse.values().iter().enumerate() {
        let w = fine.values().get(m * r).copied().unwrap_or(0.0);
        s += (v - w) * (v - w);
    }
    Ok((coarse.h() * s).sqrt())
}

pub fn run_study(study: &StudyConfig) -> Result<StudyReport> {
    let n_levels = study.levels.len();
    if n_levels < 3 {
        return Err(invalid("a study needs at least three levels"));
    }
    if !(study.k_fraction > 0.0 && study.k_fraction <= 1.0) {
        return Err(invalid("k_fraction must lie in (0, 1]"));
    }
    study.besov.validate()?;
    for w in study.levels.windows(2) {
        power_of_two_ratio(w[0], w[1])?;
    }
    let base = level_config(study, study.levels[0], None, 1)?;
    let t_end = base.t_end;

    // gate bound per level, from c0 on that level's lattice
    let mut gates = Vec::with_capacity(n_levels);
    for &h in &study.levels {
        let cfg = level_config(study, h, None, 1)?;
        let c0 = cfg.c0.resolve(cfg.lattice()?)?;
        gates.push(k_max(cfg.a, cfg.b, cfg.lambda, cfg.eta, h, c0.values())?.k_max);
    }
    let fine = n_levels - 1;
    let k_fine0 = study.k_fraction * gates[fine];
    // step multiples r_ℓ: largest powers of two keeping k_ℓ under the gate
    let ratios: Vec<usize> = gates
        .iter()
        .map(|g| {
            let mut r = 1usize;
            while 2.0 * r as f64 * k_fine0 <= study.k_fraction * g {
                r *= 2;
            }
            r
        })
        .collect();
    let big = *ratios.iter().max().expect("levels are nonempty");
    let mut n_fine = (t_end / k_fine0).ceil() as usize;
    n_fine = n_fine.div_ceil(big) * big;
    let k_fine = t_end / n_fine as f64;

    // the finest level fixes the shared boundary path
    let fine_cfg = level_config(study, study.levels[fine], Some(k_fine), big / ratios[fine])?;
    let fine_run = fine_cfg.resolve()?;
    let psi = fine_run.scheme.psi.clone();
    let psi_seed = fine_run.seeds.get("psi").copied();
    let pearson_regime = fine_run
        .config
        .psi
        .pearson_params(fine_cfg.eta)
        .map(|p| p.bounded_regime());

    let mut trajectories = Vec::with_capacity(n_levels);
    let mut levels = Vec::with_capacity(n_levels);
    for (l, &h) in study.levels.iter().enumerate() {
        let k = k_fine * ratios[l] as f64;
        let stride = big / ratios[l];
        let cfg = level_config(study, h, Some(k), stride)?;
        let (tr, path, eta) = run(&cfg, Some(&psi))?;
        let steps = n_fine / ratios[l];
        let grid = {
            let mut r = cfg.resolve()?.scheme;
            r.psi = path.clone();
            r.psi_grid()?
        };
        let inside = grid.iter().all(|v| (0.0..=eta).contains(v));
        levels.push(LevelInfo {
            h,
            m: cfg.m,
            k,
            k_max: gates[l],
            steps,
            stride,
            range_violations: tr.monitors.range_violations,
            diverged: tr.diverged(),
            pearson_bounded: inside && pearson_regime.unwrap_or(true),
        });
        trajectories.push(tr);
    }

    let n_common = n_fine / big;
    let dt_common = k_fine * big as f64;
    let times: Vec<f64> = (0..=n_common).map(|j| j as f64 * dt_common).collect();
    let fields = |tr: &Trajectory, stride_steps: usize| -> Result<Vec<LatticeField>> {
        (0..=n_common)
            .map(|j| {
                let snap = tr
                    .at_step(j * stride_steps)
                    .ok_or_else(|| invalid(format!("missing snapshot at common time {j}")))?;
                LatticeField::new(tr.lattice, snap.s.clone())
            })
            .collect()
    };
    let series: Vec<Vec<LatticeField>> = trajectories
        .iter()
        .zip(&levels)
        .map(|(tr, lv)| fields(tr, lv.stride))
        .collect::<Result<_>>()?;

    let finest = study.levels[fine];
    let span = levels[fine].m + 1;
    let evaluator = BesovEvaluator::for_span(finest, span)?;
    let besov_norm = GridNorm::Besov(study.besov, evaluator);
    let l2 = GridNorm::Lp(2.0);
    let mut rows = Vec::with_capacity(n_levels - 1);
    for l in 0..n_levels - 1 {
        let (a, b) = (&series[l], &series[l + 1]);
        let d_besov = intergrid_distance_series(a, b, &times, &besov_norm, 2.0)?;
        let d_linf_l2 = intergrid_distance_series(a, b, &times, &l2, f64::INFINITY)?;
        let d_nodal = a
            .iter()
            .zip(b)
            .map(|(x, y)| nodal_distance(x, y))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            h_coarse: study.levels[l],
            h_fine: study.levels[l + 1],
            d_besov,
            d_linf_l2,
            d_nodal,
            order_besov: None,
            order_linf_l2: None,
            order_nodal: None,
        });
    }
    for l in 0..rows.len().saturating_sub(1) {
        let order = |a: f64, b: f64| (a > 0.0 && b > 0.0).then(|| (a / b).log2());
        rows[l].order_besov = order(rows[l].d_besov, rows[l + 1].d_besov);
        rows[l].order_linf_l2 = order(rows[l].d_linf_l2, rows[l + 1].d_linf_l2);
        rows[l].order_nodal = order(rows[l].d_nodal, rows[l + 1].d_nodal);
    }
    let pearson_bounded = levels.iter().all(|l| l.pearson_bounded);
    Ok(StudyReport {
        levels,
        rows,
        times,
        psi_seed,
        pearson_bounded,
    })
}

/// Writes the rows as CSV.
pub fn write_study_csv<W: std::io::Write>(mut w: W, report: &StudyReport, comment: &str) -> Result<()> {
    writeln!(w, "{comment}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "h_coarse",
        "h_fine",
        "d_besov",
        "d_linf_l2",
        "d_nodal",
        "order_besov",
        "order_linf_l2",
        "order_nodal",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.rows {
        out.write_record([
            r.h_coarse.to_string(),
            r.h_fine.to_string(),
            r.d_besov.to_string(),
            r.d_linf_l2.to_string(),
            r.d_nodal.to_string(),
            opt(r.order_besov),
            opt(r.order_linf_l2),
            opt(r.order_nodal),
        ])?;
    }
    out.flush()?;
    Ok(())
}
