//! JSON run configuration and its resolution into solver input.
//!
//! Keys follow the model notation (`A`, `B`, `lambda`, `eta`, `h`, `M`, `k`,
//! `T`). A resolved config has `k` and every seed filled in, so writing it
//! back out and re-running it reproduces the same output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary::{
    deterministic_path, simulate_pearson, BoundaryPath, PathFamily, PearsonParams, PearsonScheme,
};
use crate::error::{invalid, Result};
use crate::lattice::{Lattice, LatticeField, TruncationPolicy};
use crate::seed::derive_seed;
use crate::solver::{k_max, CouplingMode, SchemeConfig, SplitOptions, UProvider};

/// Initial field families on `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `height · exp(1 - 1/(1 - r²))` for `r = (x - center)/width`, `|r| < 1`.
    Bump {
        center: f64,
        width: f64,
        height: f64,
    },
    Gaussian {
        center: f64,
        width: f64,
        height: f64,
    },
    /// `offset + amplitude · sin(freq · x)`.
    Sine {
        amplitude: f64,
        freq: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `scale · x e^{-rate x}`.
    Xexp {
        scale: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FieldSpec::Zero => 0.0,
            FieldSpec::Constant { value } => value,
            FieldSpec::Bump {
                center,
                width,
                height,
            } => {
                let r = (x - center) / width;
                if r.abs() < 1.0 {
                    height * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            FieldSpec::Gaussian {
                center,
                width,
                height,
            } => {
                let r = (x - center) / width;
                height * (-0.5 * r * r).exp()
            }
            FieldSpec::Sine {
                amplitude,
                freq,
                offset,
            } => offset + amplitude * (freq * x).sin(),
            FieldSpec::Xexp { scale, rate } => scale * x * (-rate * x).exp(),
            FieldSpec::Values { .. } => f64::NAN,
        }
    }

    pub fn resolve(&self, lattice: Lattice) -> Result<LatticeField> {
        match self {
            FieldSpec::Values { values } => LatticeField::new(lattice, values.clone()),
            FieldSpec::Bump { width, .. } | FieldSpec::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(invalid("field width must be positive"))
            }
            _ => Ok(LatticeField::from_fn(lattice, |x| self.eval(x))),
        }
    }
}

/// Where the boundary path comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PsiSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `scale · t^beta`.
    Power {
        beta: f64,
        #[serde(default)]
        scale: Option<f64>,
    },
    Pearson {
        nu1: f64,
        nu2: f64,
        gamma: f64,
        /// Defaults to the model `eta`.
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        psi0: f64,
        #[serde(default)]
        scheme: PearsonScheme,
        /// Derived from the root seed when absent.
        #[serde(default)]
        seed: Option<u64>,
        /// Path steps per solver step.
        #[serde(default)]
        substeps: Option<usize>,
    },
    /// CSV with `t,psi` columns.
    Csv {
        path: PathBuf,
    },
    Sampled {
        values: Vec<f64>,
    },
}

impl Default for PsiSpec {
    fn default() -> Self {
        PsiSpec::Zero
    }
}

impl PsiSpec {
    /// The path on `steps` uniform steps over `[0, T]` (times the Pearson
    /// substep factor), the spec with its seed made explicit, and that seed.
    pub fn resolve(
        &self,
        t_end: f64,
        steps: usize,
        model_eta: f64,
        root_seed: u64,
    ) -> Result<(BoundaryPath, PsiSpec, Option<u64>)> {
        let n = steps.max(1);
        let path = match self {
            PsiSpec::Zero => deterministic_path(&PathFamily::Zero, t_end, n)?,
            PsiSpec::Constant { value } => {
                deterministic_path(&PathFamily::Constant { value: *value }, t_end, n)?
            }
            PsiSpec::Power { beta, scale } => deterministic_path(
                &PathFamily::Power {
                    beta: *beta,
                    scale: *scale,
                },
                t_end,
                n,
            )?,
            PsiSpec::Sampled { values } => {
                let n = values.len().saturating_sub(1);
                deterministic_path(&PathFamily::Sampled { values: values.clone() }, t_end, n)?
            }
            PsiSpec::Csv { path } => {
                let f = std::fs::File::open(path)?;
                BoundaryPath::read_csv(f)?
            }
            PsiSpec::Pearson {
                nu1,
                nu2,
                gamma,
                eta,
                psi0,
                scheme,
                seed,
                substeps,
            } => {
                let seed = seed.unwrap_or_else(|| derive_seed(root_seed, "psi"));
                let sub = substeps.unwrap_or(1).max(1);
                let params = PearsonParams {
                    nu1: *nu1,
                    nu2: *nu2,
                    gamma: *gamma,
                    eta: eta.unwrap_or(model_eta),
                    psi0: *psi0,
                };
                let spec = PsiSpec::Pearson {
                    nu1: *nu1,
                    nu2: *nu2,
                    gamma: *gamma,
                    eta: Some(params.eta),
                    psi0: *psi0,
                    scheme: *scheme,
                    seed: Some(seed),
                    substeps: Some(sub),
                };
                let path = simulate_pearson(&params, t_end, n * sub, seed, *scheme)?;
                return Ok((path, spec, Some(seed)));
            }
        };
        Ok((path, self.clone(), None))
    }

    /// Pearson parameters, if this is a Pearson source.
    pub fn pearson_params(&self, model_eta: f64) -> Option<PearsonParams> {
        match self {
            PsiSpec::Pearson {
                nu1,
                nu2,
                gamma,
                eta,
                psi0,
                ..
            } => Some(PearsonParams {
                nu1: *nu1,
                nu2: *nu2,
                gamma: *gamma,
                eta: eta.unwrap_or(model_eta),
                psi0: *psi0,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Direct,
    Split,
}

/// Run configuration as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub lambda: f64,
    pub eta: f64,
    pub h: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// Time step; `0.9 k_max` rounded down to divide `T` when absent.
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    pub s0: FieldSpec,
    pub c0: FieldSpec,
    #[serde(default)]
    pub psi: PsiSpec,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub u_provider: UProvider,
    #[serde(default)]
    pub coupling: CouplingMode,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub allow_unstable: bool,
    #[serde(default)]
    pub general_b: bool,
    /// Root seed; component seeds are derived from it by name.
    #[serde(default)]
    pub seed: u64,
}

fn one_usize() -> usize {
    1
}

/// A config with every default and seed made explicit, plus the solver input.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: SimulationConfig,
    pub scheme: SchemeConfig,
    pub split: SplitOptions,
    pub seeds: BTreeMap<String, u64>,
}

impl SimulationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        // relative CSV paths are relative to the config file
        if let PsiSpec::Csv { path: p } = &mut cfg.psi {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.h, self.m)
    }

    /// The time step: given, or `0.9 k_max` shrunk so that `T/k` is whole.
    pub fn resolve_k(&self, c0: &LatticeField) -> Result<f64> {
        if let Some(k) = self.k {
            return Ok(k);
        }
        let gate = k_max(self.a, self.b, self.lambda, self.eta, self.h, c0.values())?;
        let n = (self.t_end / (0.9 * gate.k_max)).ceil().max(1.0);
        Ok(self.t_end / n)
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let lattice = self.lattice()?;
        if !(self.t_end > 0.0) {
            return Err(invalid("T must be positive"));
        }
        let s0 = self.s0.resolve(lattice)?.with_policy(self.truncation);
        let c0 = self.c0.resolve(lattice)?;
        let k = self.resolve_k(&c0)?;
        if !(k > 0.0) {
            return Err(invalid("k must be positive"));
        }
        let steps = (self.t_end / k).round() as usize;
        let mut resolved = self.clone();
        resolved.k = Some(k);
        let mut seeds = BTreeMap::new();
        seeds.insert("root".to_string(), self.seed);
        let (psi, psi_resolved, psi_seed) = self.psi.resolve(self.t_end, steps, self.eta, self.seed)?;
        resolved.psi = psi_resolved;
        if let Some(seed) = psi_seed {
            seeds.insert("psi".to_string(), seed);
        }
        let scheme = SchemeConfig {
            a: self.a,
            b: self.b,
            lambda: self.lambda,
            eta: self.eta,
            lattice,
            k,
            t_end: self.t_end,
            truncation: self.truncation,
            s0,
            c0,
            psi,
            general_b: self.general_b,
            allow_unstable: self.allow_unstable,
            snapshot_stride: self.snapshot_stride,
        };
        Ok(ResolvedRun {
            config: resolved,
            scheme,
            split: SplitOptions {
                u_provider: self.u_provider,
                coupling: self.coupling,
            },
            seeds,
        })
    }
}

/// Sets `key=value` pairs on a JSON object. Keys may be dotted paths into
/// nested objects; values are parsed as JSON and fall back to strings.
pub fn apply_overrides(doc: &mut Value, overrides: &[(String, String)]) -> Result<()> {
    for (key, raw) in overrides {
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        let mut node = &mut *doc;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| invalid(format!("cannot set {key}: not an object")))?;
            node = obj
                .entry(part.to_string())
                .or_insert_with(|| Value::Object(Default::default()));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| invalid(format!("cannot set {key}: not an object")))?;
        obj.insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}

/// Parses `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| invalid(format!("override {s:?} is not key=value")))?;
    if k.is_empty() {
        return Err(invalid("empty override key"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}
