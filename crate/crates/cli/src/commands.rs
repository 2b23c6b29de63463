//! Subcommand bodies. Each returns the exit code or a JSON error for stderr.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rdlattice::besov::{besov_norm, BesovSpec};
use rdlattice::config::{apply_overrides, parse_override, FieldSpec, PsiSpec, SimulationConfig, SolverKind};
use rdlattice::convergence::{run_study, write_study_csv, StudyConfig};
use rdlattice::feynman_kac::{fk_estimate, HeatGenerator};
use rdlattice::heat_kernel::{hd, semigroup_apply_half, BoundaryConvolution};
use rdlattice::output::{create_file, write_json_file, write_trajectory_csv, Provenance, RunSummary};
use rdlattice::seed::derive_seed;
use rdlattice::solver::{check_stability, run_direct, run_split};
use rdlattice::{Error, Lattice, LatticeField};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_UNSTABLE: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

pub struct Common {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub allow_unstable: bool,
    pub set: Vec<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub body: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unstable { .. } => EXIT_UNSTABLE,
            _ => EXIT_ERROR,
        };
        CliError {
            code,
            body: json!({"error": e.kind(), "message": e.to_string()}).to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = std::result::Result<u8, CliError>;

/// Config document with `--set`, `--seed` and `--allow-unstable` applied.
/// `seed_key` and `unstable_key` name where those flags land.
fn load(common: &Common, seed_key: Option<&str>, unstable_key: Option<&str>) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(Error::from)?;
    let mut doc: Value = serde_json::from_str(&text)?;
    let mut overrides = common
        .set
        .iter()
        .map(|s| parse_override(s))
        .collect::<rdlattice::Result<Vec<_>>>()?;
    if let (Some(seed), Some(key)) = (common.seed, seed_key) {
        overrides.push((key.into(), seed.to_string()));
    }
    if let (true, Some(key)) = (common.allow_unstable, unstable_key) {
        overrides.push((key.into(), "true".into()));
    }
    apply_overrides(&mut doc, &overrides)?;
    Ok(doc)
}

fn out_dir(common: &Common) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&common.out).map_err(Error::from)?;
    Ok(&common.out)
}

fn config_dir(common: &Common) -> Option<PathBuf> {
    common.config.parent().map(Path::to_path_buf)
}

/// CSV boundary paths are resolved relative to the config file.
fn anchor_csv(psi: &mut PsiSpec, dir: Option<PathBuf>) {
    if let (PsiSpec::Csv { path }, Some(dir)) = (psi, dir) {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
}

pub fn simulate(common: &Common) -> CmdResult {
    let doc = load(common, Some("seed"), Some("allow_unstable"))?;
    let mut cfg: SimulationConfig = serde_json::from_value(doc)?;
    anchor_csv(&mut cfg.psi, config_dir(common));
    let run = cfg.resolve()?;
    let dir = out_dir(common)?;
    let prov = Provenance::new("simulate", &run.config, run.seeds.clone())?;
    let stability = check_stability(&run.scheme)?;
    let steps = run.scheme.steps()?;
    if !stability.stable && !run.scheme.allow_unstable {
        let summary = RunSummary::refused(stability.clone(), prov, steps);
        write_json_file(&dir.join("summary.json"), &summary)?;
        return Err(CliError {
            code: EXIT_UNSTABLE,
            body: json!({
                "error": "unstable",
                "message": format!("k = {} exceeds k_max = {}", stability.k, stability.k_max),
                "stability": stability,
            })
            .to_string(),
        });
    }
    let traj = match run.config.solver {
        SolverKind::Direct => run_direct(&run.scheme)?,
        SolverKind::Split => run_split(&run.scheme, run.split)?,
    };
    write_trajectory_csv(create_file(&dir.join("trajectory.csv"))?, &traj, &prov)?;
    run.scheme
        .psi
        .write_csv_file(&dir.join("psi.csv"))?;
    let summary = RunSummary::from_run(&traj, prov, &run.config);
    write_json_file(&dir.join("summary.json"), &summary)?;
    if traj.diverged() {
        return Err(CliError {
            code: EXIT_DIVERGED,
            body: json!({"error": "diverged", "outcome": traj.outcome}).to_string(),
        });
    }
    Ok(EXIT_OK)
}

pub fn converge(common: &Common) -> CmdResult {
    let doc = load(common, Some("base.seed"), Some("base.allow_unstable"))?;
    let mut study: StudyConfig = serde_json::from_value(doc)?;
    if let Some(psi) = study.base.get("psi").cloned() {
        let mut spec: PsiSpec = serde_json::from_value(psi)?;
        anchor_csv(&mut spec, config_dir(common));
        study.base["psi"] = serde_json::to_value(spec)?;
    }
    let report = run_study(&study)?;
    let dir = out_dir(common)?;
    let mut seeds = BTreeMap::new();
    if let Some(s) = report.psi_seed {
        seeds.insert("psi".to_string(), s);
    }
    if let Some(seed) = study.base.get("seed").and_then(Value::as_u64) {
        seeds.insert("root".to_string(), seed);
    }
    let prov = Provenance::new("converge", &study, seeds)?;
    write_study_csv(create_file(&dir.join("convergence.csv"))?, &report, &prov.comment()?)?;
    write_json_file(&dir.join("convergence.json"), &json!({"provenance": prov, "report": report}))?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub h: f64,
    pub times: Vec<f64>,
    /// Sites `n = 0..=n_max` are tabulated.
    pub n_max: usize,
}

/// `t,n,x,hd,mass` where `mass = h Σ_n H_D(t, nh)` over the whole lattice.
pub fn kernel(common: &Common) -> CmdResult {
    let cfg: KernelConfig = serde_json::from_value(load(common, None, None)?)?;
    let dir = out_dir(common)?;
    let prov = Provenance::new("kernel", &cfg, BTreeMap::new())?;
    let mut w = csv_with_comment(&dir.join("kernel.csv"), &prov)?;
    w.write_record(["t", "n", "x", "hd", "mass"]).map_err(Error::from)?;
    for &t in &cfg.times {
        let reach = cfg.n_max.max((40.0 * (2.0 * t).sqrt() / cfg.h).ceil() as usize + 40) as i64;
        let mut mass = hd(t, 0, cfg.h)?;
        for n in 1..=reach {
            mass += 2.0 * hd(t, n, cfg.h)?;
        }
        mass *= cfg.h;
        for n in 0..=cfg.n_max as i64 {
            w.write_record([
                t.to_string(),
                n.to_string(),
                (n as f64 * cfg.h).to_string(),
                hd(t, n, cfg.h)?.to_string(),
                mass.to_string(),
            ])
            .map_err(Error::from)?;
        }
    }
    w.flush().map_err(Error::from)?;
    Ok(EXIT_OK)
}

fn default_q() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovConfig {
    /// Mesh sizes for the sweep.
    pub hs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Offsets `α − (1/p − 1)`.
    pub offsets: Vec<f64>,
    #[serde(default = "default_q")]
    pub q: f64,
    /// Lattice length in units of `x`.
    pub length: f64,
}

/// Besov norm of the lattice Dirac mass `δ₀ = 1/h` at node 0.
pub fn besov(common: &Common) -> CmdResult {
    let cfg: BesovConfig = serde_json::from_value(load(common, None, None)?)?;
    let dir = out_dir(common)?;
    let prov = Provenance::new("besov", &cfg, BTreeMap::new())?;
    let mut w = csv_with_comment(&dir.join("besov.csv"), &prov)?;
    w.write_record(["h", "p", "q", "offset", "alpha", "norm"]).map_err(Error::from)?;
    for &p in &cfg.ps {
        for &offset in &cfg.offsets {
            let alpha = 1.0 / p - 1.0 + offset;
            let spec = BesovSpec::new(alpha, p, cfg.q)?;
            for &h in &cfg.hs {
                let m = (cfg.length / h).round() as usize;
                let delta = LatticeField::delta0(Lattice::new(h, m)?);
                let norm = besov_norm(&delta, &spec)?;
                w.write_record([
                    h.to_string(),
                    p.to_string(),
                    cfg.q.to_string(),
                    offset.to_string(),
                    alpha.to_string(),
                    norm.to_string(),
                ])
                .map_err(Error::from)?;
            }
        }
    }
    w.flush().map_err(Error::from)?;
    Ok(EXIT_OK)
}

fn default_psi_steps() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkConfig {
    pub h: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// Evaluation time.
    #[serde(rename = "T")]
    pub t_end: f64,
    pub s0: FieldSpec,
    #[serde(default)]
    pub psi: PsiSpec,
    /// Boundary path steps on `[0, T]`.
    #[serde(default = "default_psi_steps")]
    pub psi_steps: usize,
    /// Probe nodes.
    pub probes: Vec<usize>,
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FkRow {
    node: usize,
    x: f64,
    t: f64,
    mean: f64,
    ci95: f64,
    n: usize,
    deterministic: f64,
    /// `|mean − deterministic| / (σ/√n)`.
    z: f64,
}

/// Heat equation with boundary path: FK estimates next to the kernel solution.
pub fn fk(common: &Common) -> CmdResult {
    let mut cfg: FkConfig = serde_json::from_value(load(common, Some("seed"), None)?)?;
    anchor_csv(&mut cfg.psi, config_dir(common));
    let lattice = Lattice::new(cfg.h, cfg.m)?;
    let s0 = cfg.s0.resolve(lattice)?;
    let (psi, psi_spec, psi_seed) = cfg.psi.resolve(cfg.t_end, cfg.psi_steps, 1.0, cfg.seed)?;
    cfg.psi = psi_spec;
    let mut seeds = BTreeMap::from([("root".to_string(), cfg.seed)]);
    if let Some(s) = psi_seed {
        seeds.insert("psi".into(), s);
    }
    let fk_seed = derive_seed(cfg.seed, "fk");
    seeds.insert("fk".into(), fk_seed);

    let mut exact = semigroup_apply_half(&s0, cfg.t_end)?;
    let conv = BoundaryConvolution::for_path(&psi, lattice)?;
    let u = conv.u_at_step(psi.values(), psi.steps())?;
    for (e, v) in exact.values_mut().iter_mut().zip(u.values()) {
        *e += v;
    }
    let gen = HeatGenerator::new(&s0, Some(psi), cfg.t_end)?;
    let mut rows = Vec::with_capacity(cfg.probes.len());
    for (i, &node) in cfg.probes.iter().enumerate() {
        let seed = derive_seed(fk_seed, &format!("probe{i}"));
        let e = fk_estimate(&gen, 0.0, node as i64, cfg.t_end, cfg.n_samples, seed)?;
        let det = exact.values().get(node).copied().unwrap_or(0.0);
        let se = e.std_error();
        rows.push(FkRow {
            node,
            x: e.x,
            t: cfg.t_end,
            mean: e.mean,
            ci95: e.ci95,
            n: e.n,
            deterministic: det,
            z: if se > 0.0 { (e.mean - det).abs() / se } else { 0.0 },
        });
    }
    let dir = out_dir(common)?;
    let prov = Provenance::new("fk", &cfg, seeds)?;
    let mut w = csv_with_comment(&dir.join("fk.csv"), &prov)?;
    for r in &rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    write_json_file(&dir.join("fk.json"), &json!({"provenance": prov, "estimates": rows}))?;
    Ok(EXIT_OK)
}

fn csv_with_comment(
    path: &Path,
    prov: &Provenance,
) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>, CliError> {
    use std::io::Write;
    let mut f = create_file(path)?;
    writeln!(f, "{}", prov.comment()?).map_err(Error::from)?;
    Ok(csv::Writer::from_writer(f))
}
