//! Boundary paths: Pearson diffusion, deterministic families, Hölder diagnostics.

use std::f64::consts::FRAC_PI_2;
use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::stream_rng;

/// Parameters of `dψ = ν1(γ - ψ)dt + ν2 sqrt(ψ(η - ψ)) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonParams {
    pub nu1: f64,
    pub nu2: f64,
    pub gamma: f64,
    pub eta: f64,
    pub psi0: f64,
}

impl PearsonParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.nu1 > 0.0
            && self.nu2 >= 0.0
            && self.eta > 0.0
            && self.gamma > 0.0
            && self.gamma <= self.eta
            && (0.0..=self.eta).contains(&self.psi0)
            && [self.nu1, self.nu2, self.gamma, self.eta, self.psi0]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid Pearson parameters {self:?}")))
        }
    }

    /// The diffusion never leaves `[0, η]` when this holds.
    pub fn bounded_regime(&self) -> bool {
        let lhs = (2.0 * self.nu1 * self.gamma).min(2.0 * self.nu1 * (self.eta - self.gamma));
        lhs >= self.nu2 * self.nu2 * self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PearsonScheme {
    /// Euler on `Z = arcsin(2ψ/η - 1)` with the drift pole smoothed over width `epsilon`.
    Lamperti { epsilon: f64 },
    /// Euler-Maruyama on ψ, clamped to `[0, η]`.
    ProjectedEuler,
}

impl Default for PearsonScheme {
    fn default() -> Self {
        PearsonScheme::Lamperti { epsilon: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathMeta {
    pub generator: String,
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    /// Generated inside the bounded regime (or deterministic).
    pub certified: bool,
    /// Number of ψ values clamped into `[0, η]`.
    pub clamps: u64,
    /// Number of reflections of the transformed variable.
    pub folds: u64,
}

/// `ψ(t_n)` on the uniform grid `t_n = n T / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPath {
    t_end: f64,
    values: Vec<f64>,
    pub meta: PathMeta,
}

impl BoundaryPath {
    pub fn new(t_end: f64, values: Vec<f64>, meta: PathMeta) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a path needs at least two grid points"));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(invalid(format!("path horizon must be positive, got {t_end}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("path values must be finite"));
        }
        Ok(Self { t_end, values, meta })
    }

    /// Path sampled from `f` on `N` uniform steps.
    pub fn from_fn(t_end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = t_end / n as f64;
        let values = (0..=n).map(|i| f(i as f64 * dt)).collect();
        Self::new(
            t_end,
            values,
            PathMeta {
                generator: "callable".into(),
                certified: true,
                ..Default::default()
            },
        )
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps() {
            self.t_end
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation; constant extrapolation outside `[0, T]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= self.t_end {
            return self.values[self.steps()];
        }
        let s = t / self.dt();
        let i = (s.floor() as usize).min(self.steps() - 1);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Keep every `factor`-th sample.
    pub fn downsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps() % factor != 0 {
            return Err(invalid(format!(
                "factor {factor} does not divide N = {}",
                self.steps()
            )));
        }
        let values = self.values.iter().step_by(factor).copied().collect();
        Self::new(self.t_end, values, self.meta.clone())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "psi"])?;
        for (i, v) in self.values.iter().enumerate() {
            wr.write_record([self.time(i).to_string(), v.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `t,psi` rows; the time grid must be uniform and start at 0.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| invalid("short row in path csv"))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("bad number in path csv: {e}")))
            };
            ts.push(parse(0)?);
            vs.push(parse(1)?);
        }
        if ts.len() < 2 || ts[0] != 0.0 {
            return Err(invalid("path csv must start at t = 0 with >= 2 rows"));
        }
        let t_end = *ts.last().unwrap();
        let dt = t_end / (ts.len() - 1) as f64;
        for (i, t) in ts.iter().enumerate() {
            if (t - i as f64 * dt).abs() > 1e-9 * t_end.max(1.0) {
                return Err(invalid("path csv time grid is not uniform"));
            }
        }
        Self::new(
            t_end,
            vs,
            PathMeta {
                generator: "csv".into(),
                certified: true,
                ..Default::default()
            },
        )
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Deterministic fixture families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum PathFamily {
    Zero,
    Constant { value: f64 },
    Power { beta: f64, scale: Option<f64> },
    Sampled { values: Vec<f64> },
}

pub fn deterministic_path(family: &PathFamily, t_end: f64, n: usize) -> Result<BoundaryPath> {
    let meta = |name: &str| PathMeta {
        generator: name.into(),
        certified: true,
        ..Default::default()
    };
    let dt = t_end / n as f64;
    let grid = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..=n)
            .map(|i| f(if i == n { t_end } else { i as f64 * dt }))
            .collect()
    };
    match family {
        PathFamily::Zero => BoundaryPath::new(t_end, vec![0.0; n + 1], meta("zero")),
        PathFamily::Constant { value } => {
            BoundaryPath::new(t_end, vec![*value; n + 1], meta("constant"))
        }
        PathFamily::Power { beta, scale } => {
            if !(*beta > 0.0 && *beta <= 1.0) {
                return Err(invalid(format!("power exponent must be in (0, 1], got {beta}")));
            }
            let a = scale.unwrap_or(1.0);
            BoundaryPath::new(t_end, grid(&|t| a * t.powf(*beta)), meta("power"))
        }
        PathFamily::Sampled { values } => {
            if values.len() != n + 1 {
                return Err(invalid(format!(
                    "sampled path has {} values, grid needs {}",
                    values.len(),
                    n + 1
                )));
            }
            BoundaryPath::new(t_end, values.clone(), meta("sampled"))
        }
    }
}

/// Pearson path with `N` Euler steps on `[0, T]`.
pub fn simulate_pearson(
    params: &PearsonParams,
    t_end: f64,
    n: usize,
    seed: u64,
    scheme: PearsonScheme,
) -> Result<BoundaryPath> {
    params.validate()?;
    if n == 0 {
        return Err(invalid("need N >= 1 steps"));
    }
    let mut rng = stream_rng(seed, 0);
    let dt = t_end / n as f64;
    let sq = dt.sqrt();
    let PearsonParams {
        nu1,
        nu2,
        gamma,
        eta,
        psi0,
    } = *params;
    let mut values = Vec::with_capacity(n + 1);
    values.push(psi0);
    let mut clamps = 0u64;
    let mut folds = 0u64;
    let scheme_tag;

    if nu2 == 0.0 {
        scheme_tag = "euler-ode".to_string();
        let mut psi = psi0;
        for _ in 0..n {
            psi += nu1 * (gamma - psi) * dt;
            values.push(psi);
        }
    } else {
        match scheme {
            PearsonScheme::Lamperti { epsilon } => {
                scheme_tag = format!("lamperti(eps={epsilon})");
                let a = nu1 * (2.0 * gamma / eta - 1.0);
                let b = nu1 - 0.5 * nu2 * nu2;
                let eps2 = epsilon * epsilon;
                let mut z = (2.0 * psi0 / eta - 1.0).clamp(-1.0, 1.0).asin();
                for _ in 0..n {
                    let (sz, cz) = z.sin_cos();
                    let drift = (a - b * sz) * cz / (cz * cz + eps2);
                    let dw: f64 = StandardNormal.sample(&mut rng);
                    z += drift * dt + nu2 * sq * dw;
                    // sin is symmetric about ±π/2, so folding leaves ψ unchanged
                    while z.abs() > FRAC_PI_2 {
                        z = z.signum() * std::f64::consts::PI - z;
                        folds += 1;
                    }
                    let psi = 0.5 * eta * (1.0 + z.sin());
                    values.push(psi.clamp(0.0, eta));
                }
            }
            PearsonScheme::ProjectedEuler => {
                scheme_tag = "projected-euler".to_string();
                let mut psi = psi0;
                for _ in 0..n {
                    let dw: f64 = StandardNormal.sample(&mut rng);
                    let diff = (psi * (eta - psi)).max(0.0).sqrt();
                    psi += nu1 * (gamma - psi) * dt + nu2 * diff * sq * dw;
                    if !(0.0..=eta).contains(&psi) {
                        clamps += 1;
                        psi = psi.clamp(0.0, eta);
                    }
                    values.push(psi);
                }
            }
        }
    }
    let meta = PathMeta {
        generator: "pearson".into(),
        seed: Some(seed),
        scheme: Some(scheme_tag),
        certified: params.bounded_regime() || nu2 == 0.0,
        clamps,
        folds,
    };
    BoundaryPath::new(t_end, values, meta)
}

/// `max_{n<m} |ψ_m - ψ_n| / (t_m - t_n)^β` over all grid pairs.
pub fn holder_seminorm(path: &BoundaryPath, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid(format!("Hölder exponent must be in (0, 1], got {beta}")));
    }
    let v = path.values();
    let dt = path.dt();
    let n = v.len();
    // lag weights are shared by every pair at that lag
    let w: Vec<f64> = (0..n).map(|l| (l as f64 * dt).powf(-beta)).collect();
    let mut best = 0.0_f64;
    for i in 0..n {
        let vi = v[i];
        for j in i + 1..n {
            let r = (v[j] - vi).abs() * w[j - i];
            if r > best {
                best = r;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deterministic_families() {
        let p = deterministic_path(&PathFamily::Power { beta: 0.5, scale: None }, 1.0, 4).unwrap();
        let want = [0.0, 0.5, 0.5f64.sqrt(), 0.75f64.sqrt(), 1.0];
        for (a, b) in p.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let z = deterministic_path(&PathFamily::Zero, 1.0, 5).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
        let c = deterministic_path(&PathFamily::Constant { value: 0.3 }, 2.0, 5).unwrap();
        assert!(c.values().iter().all(|v| *v == 0.3));
        assert!(deterministic_path(&PathFamily::Power { beta: 1.5, scale: None }, 1.0, 4).is_err());
    }

    #[test]
    fn holder_examples() {
        let lin = BoundaryPath::from_fn(1.0, 64, |t| t).unwrap();
        assert!((holder_seminorm(&lin, 0.5).unwrap() - 1.0).abs() < 1e-14);
        let c = BoundaryPath::from_fn(1.0, 16, |_| 0.4).unwrap();
        assert_eq!(holder_seminorm(&c, 0.3).unwrap(), 0.0);
        let sq = BoundaryPath::from_fn(1.0, 256, f64::sqrt).unwrap();
        assert!((holder_seminorm(&sq, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downsample_rules() {
        let p = BoundaryPath::from_fn(1.0, 8, |t| t * t).unwrap();
        assert_eq!(p.downsample(1).unwrap(), p);
        let d = p.downsample(2).unwrap();
        assert_eq!(d.values().len(), 5);
        assert_eq!(d.values()[1], p.values()[2]);
        assert_eq!(d.downsample(2).unwrap(), p.downsample(4).unwrap());
        assert!(p.downsample(3).is_err());
    }

    #[test]
    fn noiseless_pearson() {
        let base = PearsonParams {
            nu1: 2.0,
            nu2: 0.0,
            gamma: 0.4,
            eta: 1.0,
            psi0: 0.4,
        };
        let p = simulate_pearson(&base, 1.0, 100, 1, PearsonScheme::default()).unwrap();
        assert!(p.values().iter().all(|v| *v == 0.4));
        let q = PearsonParams { psi0: 0.0, ..base };
        for n in [100, 200, 400] {
            let p = simulate_pearson(&q, 1.0, n, 1, PearsonScheme::default()).unwrap();
            let err = p
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| (v - (0.4 - 0.4 * (-2.0 * p.time(i)).exp())).abs())
                .fold(0.0, f64::max);
            // Euler error for this ODE is below 0.3/N
            assert!(err < 0.3 / n as f64, "N = {n}: {err}");
        }
    }

    #[test]
    fn seed_determinism_and_meta() {
        let prm = PearsonParams {
            nu1: 2.0,
            nu2: 0.5,
            gamma: 0.5,
            eta: 1.0,
            psi0: 0.0,
        };
        assert!(prm.bounded_regime());
        let a = simulate_pearson(&prm, 1.0, 500, 9, PearsonScheme::default()).unwrap();
        let b = simulate_pearson(&prm, 1.0, 500, 9, PearsonScheme::default()).unwrap();
        let c = simulate_pearson(&prm, 1.0, 500, 10, PearsonScheme::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
        assert!(a.meta.certified);
        assert_eq!(a.meta.clamps, 0);
    }

    #[test]
    fn projected_euler_counts_clamps() {
        let prm = PearsonParams {
            nu1: 0.5,
            nu2: 3.0,
            gamma: 0.5,
            eta: 1.0,
            psi0: 0.5,
        };
        assert!(!prm.bounded_regime());
        let p = simulate_pearson(&prm, 1.0, 1000, 3, PearsonScheme::ProjectedEuler).unwrap();
        assert!(!p.meta.certified);
        assert!(p.meta.clamps > 0);
        assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn csv_round_trip() {
        let p = BoundaryPath::from_fn(0.7, 10, |t| (3.0 * t).sin() / 3.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,psi\n"));
        let q = BoundaryPath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
        assert_eq!(p.t_end(), q.t_end());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bounded_regime_paths_stay_in_range(
            seed in any::<u64>(),
            nu1 in 0.5..4.0f64,
            frac in 0.2..0.8f64,
            n in 10usize..400,
        ) {
            let eta = 1.0;
            let gamma = frac * eta;
            let nu2_max = (2.0 * nu1 * gamma.min(eta - gamma) / eta).sqrt();
            let prm = PearsonParams { nu1, nu2: 0.9 * nu2_max, gamma, eta, psi0: 0.0 };
            let p = simulate_pearson(&prm, 1.0, n, seed, PearsonScheme::default()).unwrap();
            prop_assert!(p.values().iter().all(|v| (0.0..=eta).contains(v)));
            prop_assert_eq!(p.meta.clamps, 0);
        }

        #[test]
        fn holder_nondecreasing_in_beta_on_unit_horizon(seed in any::<u64>()) {
            let prm = PearsonParams { nu1: 2.0, nu2: 0.5, gamma: 0.5, eta: 1.0, psi0: 0.0 };
            let p = simulate_pearson(&prm, 1.0, 128, seed, PearsonScheme::default()).unwrap();
            let mut last = 0.0;
            for beta in [0.1, 0.25, 0.45, 0.6, 0.9] {
                let s = holder_seminorm(&p, beta).unwrap();
                prop_assert!(s >= last);
                last = s;
            }
        }
    }
}
