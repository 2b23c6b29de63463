//! Piecewise-constant extension, cell-average discretization and distances
//! between solutions on nested lattices.

use crate::besov::{BesovEvaluator, BesovSpec};
use crate::error::{invalid, Error, Result};
use crate::lattice::{lp_norm_values, Lattice, LatticeField};

/// `E_h f`: the value `f(z)` on `[z, z + h)`, zero beyond the last cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    pub h: f64,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let i = (x / self.h).floor() as usize;
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Cell boundaries `0, h, ..., (M+1) h`.
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.values.len()).map(|i| i as f64 * self.h).collect()
    }

    pub fn integral(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    /// Continuum `L^p` norm evaluated on a grid `refine` times finer.
    pub fn lp_norm_refined(&self, p: f64, refine: usize) -> Result<f64> {
        let fine: Vec<f64> = self
            .values
            .iter()
            .flat_map(|v| std::iter::repeat_n(*v, refine))
            .collect();
        lp_norm_values(&fine, self.h / refine as f64, p)
    }
}

pub fn extend(f: &LatticeField) -> PiecewiseConstant {
    PiecewiseConstant {
        h: f.h(),
        values: f.values().to_vec(),
    }
}

const MIN_SAMPLES: usize = 16;

/// Something whose average over a cell can be computed.
pub trait CellAverage {
    fn cell_average(&self, a: f64, b: f64) -> f64;
}

impl<F: Fn(f64) -> f64> CellAverage for F {
    /// Composite Simpson with 16 subintervals.
    fn cell_average(&self, a: f64, b: f64) -> f64 {
        let n = MIN_SAMPLES;
        let dx = (b - a) / n as f64;
        let mut s = self(a) + self(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * self(a + i as f64 * dx);
        }
        s * dx / 3.0 / (b - a)
    }
}

impl CellAverage for PiecewiseConstant {
    /// Exact, by summing the overlapping cells.
    fn cell_average(&self, a: f64, b: f64) -> f64 {
        let first = (a / self.h).floor().max(0.0) as usize;
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate().skip(first) {
            let lo = (i as f64 * self.h).max(a);
            let hi = ((i + 1) as f64 * self.h).min(b);
            if hi <= lo {
                if lo >= b {
                    break;
                }
                continue;
            }
            s += v * (hi - lo);
        }
        s / (b - a)
    }
}

/// `D_h g(z) = (1/h) ∫_z^{z+h} g`.
pub fn discretize(g: &impl CellAverage, lattice: Lattice) -> LatticeField {
    let h = lattice.h();
    LatticeField::from_fn(lattice, |z| g.cell_average(z, z + h))
}

/// Cell averages from fine samples `fine[i] = g(i fine_h)`; each cell needs
/// an even number, at least 16, of fine intervals.
pub fn discretize_samples(fine: &[f64], fine_h: f64, lattice: Lattice) -> Result<LatticeField> {
    let ratio = (lattice.h() / fine_h).round();
    if (ratio * fine_h - lattice.h()).abs() > 1e-9 * lattice.h() {
        return Err(invalid("fine samples must subdivide the cells"));
    }
    let r = ratio as usize;
    if r < MIN_SAMPLES || r % 2 != 0 {
        return Err(invalid(format!(
            "need an even number >= {MIN_SAMPLES} of samples per cell, got {r}"
        )));
    }
    if fine.len() < lattice.len() * r + 1 {
        return Err(invalid("fine samples do not cover the last cell"));
    }
    let values = (0..lattice.len())
        .map(|c| {
            let base = c * r;
            let mut s = fine[base] + fine[base + r];
            for i in 1..r {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * fine[base + i];
            }
            s / (3.0 * r as f64)
        })
        .collect();
    LatticeField::new(lattice, values)
}

/// `|∫ g E_h f dx − h Σ D_h(g) f|`, the left side by 3-point Gauss-Legendre per cell.
pub fn duality_residual(f: &LatticeField, g: impl Fn(f64) -> f64) -> f64 {
    let h = f.h();
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut lhs = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let mid = (i as f64 + 0.5) * h;
        let cell: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * g(mid + 0.5 * h * x))
            .sum();
        lhs += v * 0.5 * h * cell;
    }
    let dg = discretize(&g, f.lattice());
    let rhs: f64 = h * dg.values().iter().zip(f.values()).map(|(a, b)| a * b).sum::<f64>();
    (lhs - rhs).abs()
}

/// How two lattice fields are compared.
#[derive(Debug, Clone)]
pub enum GridNorm {
    /// `L^p` of the extensions (exact on the common fine lattice).
    Lp(f64),
    /// Besov norm on the evaluator's lattice, which must refine both fields.
    Besov(BesovSpec, BesovEvaluator),
}

fn refinement(coarse: f64, fine: f64) -> Result<usize> {
    let r = coarse / fine;
    let rr = r.round();
    let nested = rr >= 1.0
        && (rr * fine - coarse).abs() <= 1e-9 * coarse
        && (rr as u64).is_power_of_two();
    if !nested {
        return Err(Error::NonNested { coarse, fine });
    }
    Ok(rr as usize)
}

/// Values of `E_h f` at the nodes of the finer mesh `fine_h`.
pub fn resample(f: &LatticeField, fine_h: f64) -> Result<Vec<f64>> {
    let r = refinement(f.h(), fine_h)?;
    Ok(f.values()
        .iter()
        .flat_map(|v| std::iter::repeat_n(*v, r))
        .collect())
}

/// Distance between `E_h a` and `E_{h'} b`, measured on the finer of the two
/// lattices (or the Besov evaluator's lattice).
pub fn intergrid_distance(a: &LatticeField, b: &LatticeField, norm: &GridNorm) -> Result<f64> {
    let target = match norm {
        GridNorm::Lp(_) => a.h().min(b.h()),
        GridNorm::Besov(_, e) => e.grid().h(),
    };
    let mut ra = resample(a, target)?;
    let mut rb = resample(b, target)?;
    let len = ra.len().max(rb.len());
    ra.resize(len, 0.0);
    rb.resize(len, 0.0);
    let diff: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| x - y).collect();
    match norm {
        GridNorm::Lp(p) => lp_norm_values(&diff, target, *p),
        GridNorm::Besov(spec, e) => {
            let line = crate::lattice::LineField::new(target, 0, diff);
            e.norm(&line, spec)
        }
    }
}

/// `L^{p_t}` in time (trapezoid) of spatial inter-grid distances; `p_t = ∞`
/// gives the maximum over snapshots.
pub fn intergrid_distance_series(
    a: &[LatticeField],
    b: &[LatticeField],
    times: &[f64],
    norm: &GridNorm,
    p_time: f64,
) -> Result<f64> {
    if a.len() != b.len() || a.len() != times.len() || a.is_empty() {
        return Err(invalid("series must be nonempty and of equal length"));
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| intergrid_distance(x, y, norm))
        .collect::<Result<_>>()?;
    if p_time.is_infinite() {
        return Ok(d.iter().fold(0.0, |m, v| m.max(*v)));
    }
    if d.len() == 1 {
        return Ok(d[0]);
    }
    let mut s = 0.0;
    for i in 0..d.len() - 1 {
        let dt = times[i + 1] - times[i];
        s += 0.5 * dt * (d[i].powf(p_time) + d[i + 1].powf(p_time));
    }
    Ok(s.powf(1.0 / p_time))
}
