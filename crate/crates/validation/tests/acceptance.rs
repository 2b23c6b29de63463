//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use rdlattice::besov::{besov_norm, BesovSpec};
use rdlattice::boundary::{simulate_pearson, BoundaryPath, PathMeta, PearsonParams, PearsonScheme};
use rdlattice::config::{FieldSpec, PsiSpec, SimulationConfig};
use rdlattice::convergence::{run_study, StudyConfig};
use rdlattice::feynman_kac::{fk_estimate, fk_verify_s_tilde, simulate_ctmc, HeatGenerator};
use rdlattice::heat_kernel::{hd, kernel_row, semigroup_apply_half, BoundaryConvolution};
use rdlattice::interp::duality_residual;
use rdlattice::lattice::{d_minus, d_plus, inner_product, laplacian_h};
use rdlattice::output::{write_trajectory_csv, Provenance};
use rdlattice::seed::{derive_seed, splitmix64};
use rdlattice::solver::{
    k_max, local_truncation_error, run_direct, run_split, CouplingMode, SchemeConfig, SplitOptions, Trajectory,
    UProvider,
};
use rdlattice::{Lattice, LatticeField, TruncationPolicy};
use rdlattice_validation::{dirichlet_exp, heat_kernel, log_log_slope, rk4_calcite};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load_sim(name: &str) -> SimulationConfig {
    SimulationConfig::from_file(&configs().join(name)).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn criterion(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(v) => (v.pass, v.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    if let Some(l) = limit {
        if elapsed > l {
            pass = false;
            detail.push_str(&format!("; over the {:.0} s budget", l.as_secs_f64()));
        }
    }
    println!(
        "{} criterion {id:>2}: {name}: {detail} [{:.2} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn kernel_oracle() -> Verdict {
    let mut worst = 0.0_f64;
    let mut worst_mass = 0.0_f64;
    for h in [0.1, 0.05] {
        for t in [0.01, 0.1, 1.0] {
            for n in 0..=30 {
                worst = worst.max((hd(t, n, h).unwrap() - heat_kernel(t, n, h)).abs());
            }
            let row = kernel_row(t, h, 600).unwrap();
            let mass = h * (row[0] + 2.0 * row[1..].iter().sum::<f64>());
            worst_mass = worst_mass.max((mass - 1.0).abs());
        }
    }
    verdict(
        worst <= 1e-10 && worst_mass <= 1e-10,
        format!("max |hd - bessel| = {worst:.2e}, mass residual = {worst_mass:.2e} (tol 1e-10)"),
    )
}

fn semigroup_vs_expm() -> Verdict {
    let lattice = Lattice::new(0.1, 400).unwrap();
    let f = FieldSpec::Bump {
        center: 12.0,
        width: 3.0,
        height: 1.0,
    }
    .resolve(lattice)
    .unwrap();
    let mut worst = 0.0_f64;
    for t in [0.01, 0.1, 0.5, 1.0] {
        let got = semigroup_apply_half(&f, t).unwrap();
        let want = dirichlet_exp(0.1, t, &f.values()[1..]);
        worst = worst.max(sup_diff(&got.values()[1..], &want));
    }
    verdict(worst <= 1e-8, format!("sup error = {worst:.2e} (tol 1e-8)"))
}

fn random_field(rng: &mut ChaCha8Rng, lattice: Lattice, lo: f64, hi: f64, pad: usize) -> LatticeField {
    let n = lattice.len();
    let v = (0..n)
        .map(|i| if i + pad < n { rng.random_range(lo..hi) } else { 0.0 })
        .collect();
    LatticeField::new(lattice, v).unwrap()
}

fn positive_sum(f: &[f64], g: &[f64], h: f64) -> f64 {
    h * f.iter().zip(g).skip(1).map(|(a, b)| a * b).sum::<f64>()
}

fn identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(3, "identities"));
    let mut worst = [0.0_f64; 7];
    for _ in 0..100 {
        let l = Lattice::new(rng.random_range(0.05..0.5), rng.random_range(8..60)).unwrap();
        let h = l.h();
        let f = random_field(&mut rng, l, -1.0, 1.0, 0);
        let g = random_field(&mut rng, l, -1.0, 1.0, 0);
        let (dpf, dpg, dmf, dmg) = (d_plus(&f), d_plus(&g), d_minus(&f), d_minus(&g));
        let fv = f.values();

        let fg = f.zip_with(&g, |a, b| a * b).unwrap();
        let sg = g.shift_forward();
        let lhs = d_plus(&fg);
        for m in 0..l.len() {
            let r = fv[m] * dpg.values()[m] + dpf.values()[m] * sg.values()[m];
            worst[0] = worst[0].max((lhs.values()[m] - r).abs());
        }

        let a = d_plus(&f.zip_with(&dmg, |x, y| x * y).unwrap());
        let b = d_minus(&f.zip_with(&dpg, |x, y| x * y).unwrap());
        let lap = laplacian_h(&g);
        for m in 1..l.m() {
            let lhs = 0.5 * (a.values()[m] + b.values()[m]);
            let r = fv[m] * lap.values()[m]
                + 0.5 * (dpf.values()[m] * dpg.values()[m] + dmf.values()[m] * dmg.values()[m]);
            worst[1] = worst[1].max((lhs - r).abs() / (1.0 + r.abs()));
        }

        let fc = random_field(&mut rng, l, -1.0, 1.0, 3);
        let gc = random_field(&mut rng, l, -1.0, 1.0, 3);
        let (f0g0, fcv, gcv) = (fc.values()[0] * gc.values()[0], fc.values(), gc.values());
        let lhs = positive_sum(fcv, d_minus(&gc).values(), h);
        let r = -f0g0 - inner_product(&d_plus(&fc), &gc).unwrap();
        worst[2] = worst[2].max((lhs - r).abs());
        let lhs = inner_product(&fc, &d_plus(&gc)).unwrap();
        let r = -f0g0 - positive_sum(d_minus(&fc).values(), gcv, h);
        worst[3] = worst[3].max((lhs - r).abs());
        let lhs = positive_sum(fcv, laplacian_h(&gc).values(), h);
        let bd = d_plus(&fc).values()[0] * gcv[0] - fcv[0] * d_plus(&gc).values()[0];
        let r = bd + positive_sum(laplacian_h(&fc).values(), gcv, h);
        worst[4] = worst[4].max((lhs - r).abs() / (1.0 + lhs.abs()));

        let gp = random_field(&mut rng, l, 0.5, 2.0, 0);
        let q = d_plus(&f.zip_with(&gp, |x, y| x / y).unwrap());
        let dgp = d_plus(&gp);
        for m in 0..l.m() {
            let (gm, gn) = (gp.values()[m], gp.values()[m + 1]);
            let r = (gm * dpf.values()[m] - fv[m] * dgp.values()[m]) / (gn * gm);
            worst[5] = worst[5].max((q.values()[m] - r).abs() / (1.0 + r.abs()));
        }

        let small = Lattice::new(0.1, 30).unwrap();
        let fs = random_field(&mut rng, small, -1.0, 1.0, 0);
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        worst[6] = worst[6].max(duality_residual(&fs, move |x| c[0] + x * (c[1] + x * (c[2] + x * c[3]))));
    }
    let names = ["leibniz", "gradients", "parts-", "parts+", "parts2", "quotient", "duality"];
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(worst.iter().all(|w| *w <= 1e-10), format!("{detail} (tol 1e-10)"))
}

fn uniform_path(t_end: f64, values: Vec<f64>) -> BoundaryPath {
    BoundaryPath::new(t_end, values, PathMeta::default()).unwrap()
}

/// A config passing the gate, and the name of its `c0` family.
fn random_stable_config(rng: &mut ChaCha8Rng) -> (SchemeConfig, usize) {
    let b = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    let eta = if b > 0.0 {
        rng.random_range(0.2..0.95)
    } else {
        rng.random_range(0.2..2.0)
    };
    let a = 1.0;
    let lambda = rng.random_range(0.0..5.0);
    let h = rng.random_range(0.05..0.3);
    let lattice = Lattice::new(h, rng.random_range(20..80)).unwrap();
    let c_hi = if b < 0.0 { 0.9 * a } else { rng.random_range(0.1..2.0) };
    let family = rng.random_range(0..3);
    let c0 = match family {
        0 => LatticeField::from_fn(lattice, |_| c_hi),
        1 => {
            let (freq, amp) = (rng.random_range(0.2..3.0), rng.random_range(0.0..0.5));
            LatticeField::from_fn(lattice, |x| c_hi * (1.0 - amp * (1.0 + (freq * x).sin()) / 2.0))
        }
        _ => random_field(rng, lattice, 0.0, c_hi, 0),
    };
    let gate = k_max(a, b, lambda, eta, h, c0.values()).unwrap();
    let k = rng.random_range(0.2..1.0) * gate.k_max;
    let steps = rng.random_range(20..200);
    let t_end = steps as f64 * k;
    let psi = if rng.random_bool(0.5) {
        let p = PearsonParams {
            nu1: 2.0,
            nu2: 1.0,
            gamma: 0.5 * eta,
            eta,
            psi0: rng.random_range(0.0..eta),
        };
        let path = simulate_pearson(&p, t_end, steps, rng.random(), PearsonScheme::default()).unwrap();
        let v = path.values().iter().map(|x| x.min(0.999 * eta)).collect();
        uniform_path(t_end, v)
    } else {
        uniform_path(t_end, (0..=steps).map(|_| rng.random_range(0.0..0.95 * eta)).collect())
    };
    let mut s0 = if rng.random_bool(0.5) {
        random_field(rng, lattice, 0.0, 0.95 * eta, 0)
    } else {
        let (center, width) = (rng.random_range(0.0..3.0), rng.random_range(0.3..2.0));
        let height = rng.random_range(0.0..0.95 * eta);
        FieldSpec::Bump { center, width, height }.resolve(lattice).unwrap()
    };
    s0.values_mut()[0] = psi.values()[0];
    let cfg = SchemeConfig {
        a,
        b,
        lambda,
        eta,
        lattice,
        k,
        t_end,
        truncation: if rng.random_bool(0.5) {
            TruncationPolicy::Zero
        } else {
            TruncationPolicy::LastValue
        },
        s0,
        c0,
        psi,
        general_b: false,
        allow_unstable: false,
        snapshot_stride: steps,
    };
    (cfg, family)
}

fn positivity_sweep() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(4, "positivity"));
    let mut violations = 0u64;
    let mut diverged = 0;
    let mut by_sign = [0u64; 2];
    let mut first = None;
    // configs with violations, by c0 family: constant, smooth, rough
    let mut bad = [[0u32; 3]; 2];
    let mut total = [[0u32; 3]; 2];
    for i in 0..1000 {
        let (cfg, family) = random_stable_config(&mut rng);
        let sign = usize::from(cfg.b > 0.0);
        total[sign][family] += 1;
        let run = run_direct(&cfg).unwrap();
        let v = run.monitors.range_violations;
        violations += v;
        by_sign[sign] += v;
        diverged += usize::from(run.diverged());
        if v > 0 || run.diverged() {
            bad[sign][family] += 1;
        }
        if v > 0 && first.is_none() {
            first = Some((i, run.monitors.first_violation.clone()));
        }
    }
    let mut detail = format!(
        "{violations} violations (B=-1: {}, B=+1: {}), {diverged} diverged over 1000 configs",
        by_sign[0], by_sign[1]
    );
    for (sign, name) in [(0, "B=-1"), (1, "B=+1")] {
        detail.push_str(&format!(
            "; failing {name} configs by c0 constant/smooth/rough: {}/{}, {}/{}, {}/{}",
            bad[sign][0], total[sign][0], bad[sign][1], total[sign][1], bad[sign][2], total[sign][2]
        ));
    }
    if let Some((i, v)) = first {
        detail.push_str(&format!("; first in config {i}: {v:?}"));
    }
    verdict(violations == 0 && diverged == 0, detail)
}

fn gate_values() -> Verdict {
    let one = k_max(1.0, -1.0, 1.0, 1.0, 0.1, &[0.3, 1.0]).unwrap().k_max;
    let want_one = 0.01 / 2.02;
    let two = k_max(1.0, 1.0, 1.0, 0.5, 0.1, &[0.2, 0.3, 0.4]).unwrap().k_max;
    let want_two = 0.01 / (2.0 + 1.4 / 1.2 + 0.004);
    let e = (one - want_one).abs().max((two - want_two).abs());
    verdict(
        e <= 1e-12,
        format!("B=-1: {one:.10e}, B=+1: {two:.10e}, max deviation {e:.1e} (tol 1e-12)"),
    )
}

fn max_principles() -> Verdict {
    let lattice = Lattice::new(0.1, 100).unwrap();
    let (t_end, steps) = (1.0, 200);
    let conv = BoundaryConvolution::new(t_end / steps as f64, steps, lattice).unwrap();
    let p = PearsonParams {
        nu1: 2.0,
        nu2: 1.0,
        gamma: 0.25,
        eta: 0.5,
        psi0: 0.0,
    };
    let root = derive_seed(6, "max-principle");
    let mut excess = f64::NEG_INFINITY;
    for i in 0..100 {
        let path = simulate_pearson(&p, t_end, steps, derive_seed(root, &format!("path{i}")), PearsonScheme::default())
            .unwrap();
        let bound = path.sup_abs();
        for j in 1..=steps {
            let u = conv.u_at_step(path.values(), j).unwrap();
            let sup = u.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            excess = excess.max(sup - bound);
        }
    }
    let heat_ok = excess <= 1e-8;

    let mut cfg = load_sim("simulate_demo.json");
    cfg.h = 0.2;
    cfg.m = 40;
    cfg.t_end = 0.2;
    cfg.snapshot_stride = 1;
    let resolved = cfg.resolve().unwrap();
    let scheme = resolved.scheme;
    let run = run_direct(&scheme).unwrap();
    let steps = scheme.steps().unwrap();
    let fk_root = derive_seed(6, "fk-probes");
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::NEG_INFINITY;
    let mut inside = true;
    let mut probe = 0;
    for q in 1..=4 {
        let j = steps * q / 4;
        let t = j as f64 * scheme.k;
        for node in [1, 2, 4, 8, 15] {
            let e = fk_verify_s_tilde(&scheme, &run, t, node, 100_000, derive_seed(fk_root, &probe.to_string())).unwrap();
            probe += 1;
            let se = e.std_error();
            inside &= e.mean >= -3.0 * se && e.mean <= scheme.eta + 3.0 * se;
            worst_low = worst_low.min(e.mean + 3.0 * se);
            worst_high = worst_high.max(e.mean - 3.0 * se - scheme.eta);
        }
    }
    verdict(
        heat_ok && inside,
        format!(
            "max(|u| - |psi|) = {excess:.2e} (tol 1e-8) over 100 paths; FK s on {probe} probes: min(mean+3se) = {worst_low:.3e}, max(mean-3se-eta) = {worst_high:.3e}"
        ),
    )
}

fn calcite_formula() -> Verdict {
    let mut cfg = load_sim("simulate_demo.json");
    cfg.m = 60;
    cfg.t_end = 0.5;
    cfg.snapshot_stride = 1;
    let resolved = cfg.resolve().unwrap();
    let scheme = resolved.scheme;
    let run = run_split(
        &scheme,
        SplitOptions {
            u_provider: UProvider::Ftcs,
            coupling: CouplingMode::Explicit,
        },
    )
    .unwrap();
    let mut worst = 0.0_f64;
    for m in 0..scheme.lattice.len() {
        let s: Vec<f64> = run.snapshots.iter().map(|snap| snap.s[m]).collect();
        let oracle = rk4_calcite(scheme.c0.values()[m], &s, scheme.k, scheme.lambda, scheme.a, scheme.b, 8);
        for (snap, want) in run.snapshots.iter().zip(&oracle) {
            worst = worst.max((snap.c[m] - want).abs() / want.abs());
        }
    }
    verdict(
        worst <= 1e-6,
        format!("max rel error = {worst:.2e} over {} steps (tol 1e-6)", run.snapshots.len() - 1),
    )
}

fn fk_cross_validation() -> Verdict {
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("fk_heat.json")).unwrap()).unwrap();
    let h = doc["h"].as_f64().unwrap();
    let t_end = doc["T"].as_f64().unwrap();
    let lattice = Lattice::new(h, doc["M"].as_u64().unwrap() as usize).unwrap();
    let s0 = serde_json::from_value::<FieldSpec>(doc["s0"].clone())
        .unwrap()
        .resolve(lattice)
        .unwrap();
    let spec: PsiSpec = serde_json::from_value(doc["psi"].clone()).unwrap();
    let (psi, _, _) = spec.resolve(t_end, 400, 1.0, 0).unwrap();
    let mut exact = semigroup_apply_half(&s0, t_end).unwrap();
    let u = BoundaryConvolution::for_path(&psi, lattice)
        .unwrap()
        .u_at_step(psi.values(), psi.steps())
        .unwrap();
    for (e, v) in exact.values_mut().iter_mut().zip(u.values()) {
        *e += v;
    }
    let gen = HeatGenerator::new(&s0, Some(psi), t_end).unwrap();
    let root = derive_seed(8, "fk-heat");
    let mut worst_z = 0.0_f64;
    for (i, node) in [1usize, 2, 3, 5, 7, 10, 12, 15, 20, 25].into_iter().enumerate() {
        let e = fk_estimate(&gen, 0.0, node as i64, t_end, 100_000, derive_seed(root, &i.to_string())).unwrap();
        let se = e.std_error();
        let diff = (e.mean - exact.values()[node]).abs();
        worst_z = worst_z.max(if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }

    // occupation of a walk that cannot reach the boundary
    let far = Lattice::new(0.1, 400).unwrap();
    let t = 0.1;
    let gen = HeatGenerator::new(&LatticeField::zeros(far), None, t).unwrap();
    let n_paths = 100_000u64;
    let half = 10i64;
    let mut counts = vec![0u64; 2 * half as usize + 2];
    let base = derive_seed(8, "occupation");
    for i in 0..n_paths {
        let path = simulate_ctmc(&gen, 0.0, 200, t, splitmix64(base.wrapping_add(i))).unwrap();
        let d = path.end() - 200;
        let bin = if d.abs() <= half { (d + half) as usize } else { counts.len() - 1 };
        counts[bin] += 1;
    }
    let mut probs: Vec<f64> = (-half..=half).map(|d| 0.1 * heat_kernel(t, d, 0.1)).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * n_paths as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = (counts.len() - 1) as f64;
    let crit = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    verdict(
        worst_z <= 3.0 && stat <= crit,
        format!("max |mean - exact|/se = {worst_z:.2} (tol 3) on 10 probes; chi2 = {stat:.2} vs {crit:.2} (df {df})"),
    )
}

fn split_vs_direct(scheme: &SchemeConfig, coupling: CouplingMode) -> f64 {
    let direct = run_direct(scheme).unwrap();
    let split = run_split(
        scheme,
        SplitOptions {
            u_provider: UProvider::Ftcs,
            coupling,
        },
    )
    .unwrap();
    assert_eq!(direct.snapshots.len(), split.snapshots.len());
    direct
        .snapshots
        .iter()
        .zip(&split.snapshots)
        .fold(0.0, |m, (a, b)| m.max(sup_diff(&a.s, &b.s)))
}

fn splitting() -> Verdict {
    let mut cfg = load_sim("simulate_demo.json");
    cfg.m = 60;
    cfg.t_end = 0.5;
    cfg.psi = PsiSpec::Zero;
    let mut scheme = cfg.resolve().unwrap().scheme;
    scheme.s0.values_mut()[0] = 0.0;
    let zero_gap = split_vs_direct(&scheme, CouplingMode::Scheme);

    let mut cfg = load_sim("simulate_demo.json");
    cfg.m = 60;
    cfg.t_end = 0.5;
    cfg.k = None;
    let base = cfg.resolve().unwrap().scheme;
    let n0 = base.steps().unwrap();
    let mut gaps = Vec::new();
    for level in 0..3 {
        let n = n0 << level;
        let mut scheme = base.clone();
        scheme.k = scheme.t_end / n as f64;
        scheme.psi = BoundaryPath::from_fn(scheme.t_end, n, |t| 0.2 * (1.0 - (4.0 * t).cos())).unwrap();
        scheme.snapshot_stride = 1 << level;
        gaps.push(split_vs_direct(&scheme, CouplingMode::Explicit));
    }
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    let ratios_ok = ratios.iter().all(|r| (1.5..=2.5).contains(r));
    verdict(
        zero_gap <= 1e-12 && ratios_ok,
        format!(
            "psi = 0 gap {zero_gap:.1e} (tol 1e-12); nonzero psi gaps {:?}, ratios {:?} (want 2 +- 25%)",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn besov_threshold() -> Verdict {
    let hs = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.0, 2.0] {
        let series = |offset: f64| -> Vec<f64> {
            let spec = BesovSpec::new(1.0 / p - 1.0 + offset, p, 2.0).unwrap();
            hs.iter()
                .map(|&h| {
                    let l = Lattice::new(h, (4.0 / h).round() as usize).unwrap();
                    besov_norm(&LatticeField::delta0(l), &spec).unwrap()
                })
                .collect()
        };
        let below = series(-0.2);
        let above = series(0.2);
        let inc: Vec<f64> = below.windows(2).map(|w| w[1] - w[0]).collect();
        let bounded = inc.windows(2).all(|w| w[1].abs() < w[0].abs());
        let growth: Vec<f64> = above.windows(2).map(|w| w[1] / w[0]).collect();
        let grows = growth.iter().all(|g| *g >= 2.0);
        ok &= bounded && grows;
        parts.push(format!(
            "p={p}: below {:?} bounded={bounded}, growth above {:?} (want >= 2)",
            below.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            growth.iter().map(|g| format!("{g:.3}")).collect::<Vec<_>>()
        ));
    }
    verdict(ok, parts.join("; "))
}

fn convergence_study() -> Verdict {
    let text = std::fs::read_to_string(configs().join("converge_nonlinear.json")).unwrap();
    let study: StudyConfig = serde_json::from_str(&text).unwrap();
    let report = run_study(&study).unwrap();
    let d: Vec<f64> = report.rows.iter().map(|r| r.d_besov).collect();
    let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = report.decreasing_by(1.3, |r| r.d_besov) && report.pearson_bounded;
    verdict(
        ok,
        format!(
            "d = {:?}, ratios {:?} (want >= 1.3), pearson bounded {}",
            d.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            report.pearson_bounded
        ),
    )
}

fn lte_order() -> Verdict {
    let lattice = Lattice::new(0.2, 40).unwrap();
    let t_end = 0.16;
    let base = SchemeConfig {
        a: 1.0,
        b: -1.0,
        lambda: 1.0,
        eta: 0.5,
        lattice,
        k: 0.016,
        t_end,
        truncation: TruncationPolicy::Zero,
        s0: FieldSpec::Xexp { scale: 0.5, rate: 1.0 }.resolve(lattice).unwrap(),
        c0: FieldSpec::Sine {
            amplitude: 0.1,
            freq: 1.3,
            offset: 0.4,
        }
        .resolve(lattice)
        .unwrap(),
        psi: BoundaryPath::from_fn(t_end, 10, |_| 0.0).unwrap(),
        general_b: false,
        allow_unstable: false,
        snapshot_stride: 1,
    };
    let mut reference = base.clone();
    reference.k = base.k / 128.0;
    let reference: Trajectory = run_direct(&reference).unwrap();
    let ks: Vec<f64> = (0..4).map(|l| base.k / f64::from(1 << l)).collect();
    let lte: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let mut cfg = base.clone();
            cfg.k = k;
            local_truncation_error(&cfg, &reference).unwrap().max()
        })
        .collect();
    let slope = log_log_slope(&ks, &lte);
    verdict(
        slope >= 0.8,
        format!(
            "max LTE {:?} at k = {ks:?}, slope {slope:.3} (want >= 0.8)",
            lte.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn reproducibility() -> Verdict {
    let render = || -> Vec<u8> {
        let cfg = load_sim("simulate_demo.json");
        let r = cfg.resolve().unwrap();
        let run = run_direct(&r.scheme).unwrap();
        let prov = Provenance::new("simulate", &r.config, r.seeds.clone()).unwrap();
        let mut out = Vec::new();
        write_trajectory_csv(&mut out, &run, &prov).unwrap();
        r.scheme.psi.write_csv(&mut out).unwrap();
        out
    };
    let fk = || {
        let l = Lattice::new(0.1, 40).unwrap();
        let s0 = LatticeField::from_fn(l, |x| x * (-x).exp());
        let gen = HeatGenerator::new(&s0, None, 0.1).unwrap();
        fk_estimate(&gen, 0.0, 5, 0.1, 2000, 99).unwrap()
    };
    let (a, b) = (render(), render());
    let same_run = a == b;
    let (e1, e2) = (fk(), fk());
    let same_fk = e1.mean.to_bits() == e2.mean.to_bits() && e1.std.to_bits() == e2.std.to_bits();
    verdict(
        same_run && same_fk,
        format!("trajectory+psi bytes identical: {same_run} ({} bytes); FK estimate identical: {same_fk}", a.len()),
    )
}

fn main() {
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let sec = |s: u64| Some(Duration::from_secs(s));
    let results = [
        criterion(1, "heat kernel vs Bessel series", sec(5), kernel_oracle),
        criterion(2, "half-line semigroup vs matrix exponential", sec(10), semigroup_vs_expm),
        criterion(3, "lattice identities", sec(5), identities),
        criterion(4, "positivity and bounds on random stable configs", min(5), positivity_sweep),
        criterion(5, "stability gate values", None, gate_values),
        criterion(6, "maximum principles", None, max_principles),
        criterion(7, "closed-form calcite vs RK4", None, calcite_formula),
        criterion(8, "Feynman-Kac cross-validation", min(2), fk_cross_validation),
        criterion(9, "splitting consistency", None, splitting),
        criterion(10, "Besov threshold of the lattice Dirac mass", None, besov_threshold),
        criterion(11, "mesh convergence study", min(15), convergence_study),
        criterion(12, "local truncation error order", None, lte_order),
        criterion(13, "bit-identical reruns", None, reproducibility),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
