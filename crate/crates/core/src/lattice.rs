//! Half-line lattice, lattice fields and difference operators.
//!
//! The lattice is `{0, h, ..., M h}` with `x_0 = 0` the boundary node. Norms and
//! integrals are h-weighted: `(h Σ |f|^p)^{1/p}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// What an operator sees at the exterior node `x_{M+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    #[default]
    Zero,
    LastValue,
}

impl TruncationPolicy {
    /// Ghost value at `x_{M+1}` for the given stored values.
    #[inline]
    pub fn ghost(self, values: &[f64]) -> f64 {
        match self {
            TruncationPolicy::Zero => 0.0,
            TruncationPolicy::LastValue => *values.last().unwrap_or(&0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    h: f64,
    m: usize,
}

impl Lattice {
    pub fn new(h: f64, m: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("mesh h must be positive, got {h}")));
        }
        if m < 2 {
            return Err(invalid(format!("need M >= 2, got {m}")));
        }
        Ok(Self { h, m })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the last node.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.m).map(move |i| self.x(i))
    }
}

/// Values of a function on the truncated half-line lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    lattice: Lattice,
    values: Vec<f64>,
    policy: TruncationPolicy,
}

impl LatticeField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::ShapeMismatch {
                expected: lattice.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            lattice,
            values,
            policy: TruncationPolicy::Zero,
        })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            lattice,
            values: vec![0.0; lattice.len()],
            policy: TruncationPolicy::Zero,
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(f64) -> f64) -> Self {
        let values = lattice.nodes().map(f).collect();
        Self {
            lattice,
            values,
            policy: TruncationPolicy::Zero,
        }
    }

    /// Lattice Dirac mass at the origin: `1/h` at node 0.
    pub fn delta0(lattice: Lattice) -> Self {
        let mut f = Self::zeros(lattice);
        f.values[0] = 1.0 / lattice.h();
        f
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn h(&self) -> f64 {
        self.lattice.h()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn ghost(&self) -> f64 {
        self.policy.ghost(&self.values)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.h() != other.h() {
            return Err(Error::MeshMismatch(self.h(), other.h()));
        }
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }

    fn map_values(&self, values: Vec<f64>) -> Self {
        Self {
            lattice: self.lattice,
            values,
            policy: self.policy,
        }
    }

    /// Pointwise combination of two fields on the same lattice.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same(other)?;
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(self.map_values(v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map_values(self.values.iter().map(|v| f(*v)).collect())
    }

    /// `f(x + h)`, with the truncation policy at the right edge.
    pub fn shift_forward(&self) -> Self {
        let g = self.ghost();
        let n = self.len();
        let v = (0..n)
            .map(|i| if i + 1 < n { self.values[i + 1] } else { g })
            .collect();
        self.map_values(v)
    }
}

/// Forward difference `(f(x+h) - f(x))/h`.
pub fn d_plus(f: &LatticeField) -> LatticeField {
    let h = f.h();
    let g = f.ghost();
    let v = &f.values;
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            let next = if i + 1 < n { v[i + 1] } else { g };
            (next - v[i]) / h
        })
        .collect();
    f.map_values(out)
}

/// Backward difference `(f(x) - f(x-h))/h`; zero at the boundary node.
pub fn d_minus(f: &LatticeField) -> LatticeField {
    let h = f.h();
    let v = &f.values;
    let out = (0..v.len())
        .map(|i| if i == 0 { 0.0 } else { (v[i] - v[i - 1]) / h })
        .collect();
    f.map_values(out)
}

/// Second difference `(f(x+h) - 2f(x) + f(x-h))/h²`; zero at the boundary node.
pub fn laplacian_h(f: &LatticeField) -> LatticeField {
    let h2 = f.h() * f.h();
    let g = f.ghost();
    let v = &f.values;
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                let next = if i + 1 < n { v[i + 1] } else { g };
                (next - 2.0 * v[i] + v[i - 1]) / h2
            }
        })
        .collect();
    f.map_values(out)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("exponent p must be >= 1, got {p}")));
    }
    Ok(())
}

/// h-weighted `L^p` norm of raw values; `p = ∞` gives the sup norm.
pub fn lp_norm_values(values: &[f64], h: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(h * values.iter().map(|v| v.abs()).sum::<f64>());
    }
    if p == 2.0 {
        return Ok((h * values.iter().map(|v| v * v).sum::<f64>()).sqrt());
    }
    let s: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((h * s).powf(1.0 / p))
}

pub fn lp_norm(f: &LatticeField, p: f64) -> Result<f64> {
    lp_norm_values(&f.values, f.h(), p)
}

/// `h Σ f g` over the stored range.
pub fn inner_product(f: &LatticeField, g: &LatticeField) -> Result<f64> {
    f.check_same(g)?;
    Ok(f.h() * f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>())
}

/// Field on a window of the full lattice `hZ`: `values[i]` sits at `(first + i) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineField {
    pub h: f64,
    pub first: i64,
    pub values: Vec<f64>,
}

impl LineField {
    pub fn new(h: f64, first: i64, values: Vec<f64>) -> Self {
        Self { h, first, values }
    }

    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    /// Value at node index `n`, zero outside the window.
    pub fn at(&self, n: i64) -> f64 {
        let i = n - self.first;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_values(&self.values, self.h, p)
    }

    /// `h Σ f`.
    pub fn mass(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    /// Restriction to the nodes `0..=m`.
    pub fn to_half_line(&self, m: usize) -> Result<LatticeField> {
        let lattice = Lattice::new(self.h, m)?;
        let values = (0..=m as i64).map(|n| self.at(n)).collect();
        LatticeField::new(lattice, values)
    }

    /// Odd extension of a half-line field: `f(-x) = -f(x)`, `f(0)` dropped.
    pub fn odd_extension(f: &LatticeField) -> Self {
        let m = f.lattice().m() as i64;
        let v = f.values();
        let values = (-m..=m)
            .map(|n| match n.cmp(&0) {
                std::cmp::Ordering::Less => -v[(-n) as usize],
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => v[n as usize],
            })
            .collect();
        Self::new(f.h(), -m, values)
    }
}

impl From<&LatticeField> for LineField {
    /// Zero extension to the negative half-line.
    fn from(f: &LatticeField) -> Self {
        LineField::new(f.h(), 0, f.values().to_vec())
    }
}
