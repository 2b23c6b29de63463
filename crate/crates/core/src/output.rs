//! CSV and JSON artifacts. Every file carries the resolved config and seeds.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::solver::{Monitors, Outcome, StabilityReport, Trajectory};

/// Resolved config and seeds, as embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub version: String,
}

impl Provenance {
    pub fn new(command: &str, config: &impl Serialize, seeds: BTreeMap<String, u64>) -> Result<Self> {
        Ok(Provenance {
            command: command.into(),
            config: serde_json::to_value(config)?,
            seeds,
            version: env!("CARGO_PKG_VERSION").into(),
        })
    }

    /// One-line `# provenance {...}` comment for CSV headers.
    pub fn comment(&self) -> Result<String> {
        Ok(format!("# provenance {}", serde_json::to_string(self)?))
    }
}

/// Reads the provenance comment back from a CSV written here.
pub fn read_provenance(text: &str) -> Option<Provenance> {
    let line = text.lines().next()?;
    let json = line.strip_prefix("# provenance ")?;
    serde_json::from_str(json).ok()
}

/// `n,t,m,x,s,c` rows (plus `u,v` for split runs), one per snapshot and node.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory, prov: &Provenance) -> Result<()> {
    writeln!(w, "{}", prov.comment()?)?;
    let split = traj.snapshots.first().is_some_and(|s| s.u.is_some());
    let mut out = csv::Writer::from_writer(w);
    if split {
        out.write_record(["n", "t", "m", "x", "s", "c", "u", "v"])?;
    } else {
        out.write_record(["n", "t", "m", "x", "s", "c"])?;
    }
    let lattice = traj.lattice;
    for snap in &traj.snapshots {
        for m in 0..snap.s.len() {
            let mut rec = vec![
                snap.n.to_string(),
                snap.t.to_string(),
                m.to_string(),
                lattice.x(m).to_string(),
                snap.s[m].to_string(),
                snap.c[m].to_string(),
            ];
            if let (Some(u), Some(v)) = (&snap.u, &snap.v) {
                rec.push(u[m].to_string());
                rec.push(v[m].to_string());
            }
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Summary of a `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// `completed`, `diverged` or `refused`.
    pub status: String,
    pub provenance: Provenance,
    pub stability: StabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitors: Option<Monitors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_trusted: Option<bool>,
    pub warnings: Vec<String>,
    pub steps: usize,
}

impl RunSummary {
    pub fn from_run(traj: &Trajectory, prov: Provenance, cfg: &SimulationConfig) -> Self {
        let status = if traj.diverged() { "diverged" } else { "completed" };
        let k = traj.k;
        RunSummary {
            status: status.into(),
            provenance: prov,
            stability: traj.stability.clone(),
            monitors: Some(traj.monitors.clone()),
            outcome: Some(traj.outcome.clone()),
            energy: Some(traj.monitors.energy()),
            truncation_trusted: Some(traj.monitors.truncation_trusted()),
            warnings: traj.warnings.clone(),
            steps: (cfg.t_end / k).round() as usize,
        }
    }

    /// The gate refused the step size.
    pub fn refused(stability: StabilityReport, prov: Provenance, steps: usize) -> Self {
        RunSummary {
            status: "refused".into(),
            provenance: prov,
            stability,
            monitors: None,
            outcome: None,
            energy: None,
            truncation_trusted: None,
            warnings: vec![],
            steps,
        }
    }
}

pub fn write_json_file(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
