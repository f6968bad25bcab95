//! Concrete operator families on a discretized X and numerical probes of the
//! sector and decay hypotheses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{inverse, opnorm2, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplacian1d,
    FourthOrder,
    Volterra,
    Oblique,
    Wentzell,
    Caputo,
    Custom,
}

/// Description of one operator on the discretized space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub dim: usize,
    pub grid_step: f64,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl OperatorSpec {
    pub fn spatial(kind: OperatorKind, n: usize) -> Self {
        Self {
            kind,
            dim: n,
            grid_step: grid_step(n),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidArgument(format!("dim = {} < 2", self.dim)));
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::InvalidArgument("grid_step must be positive".into()));
        }
        let spatial = !matches!(self.kind, OperatorKind::Caputo | OperatorKind::Custom);
        if spatial && (self.grid_step * (self.dim as f64 + 1.0) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "grid_step * (dim + 1) = {} for a spatial operator",
                self.grid_step * (self.dim as f64 + 1.0)
            )));
        }
        Ok(())
    }
}

/// Outcome of a hypothesis probe: a maximum over samples and, where a
/// decay rate is fitted, its exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisProbeResult {
    pub constant_estimate: f64,
    pub exponent_estimate: f64,
    pub sample_count: usize,
    pub worst_point: C64,
    /// Samples where the resolvent could not be formed.
    pub skipped_samples: Vec<C64>,
}

/// Mesh width for `n` interior nodes on (0, 1).
pub fn grid_step(n: usize) -> f64 {
    1.0 / (n as f64 + 1.0)
}

/// Interior nodes `y_i = (i + 1) h`.
pub fn interior_nodes(n: usize) -> Vec<f64> {
    let h = grid_step(n);
    (0..n).map(|i| (i + 1) as f64 * h).collect()
}

/// Second difference with homogeneous Dirichlet conditions.
pub fn dirichlet_laplacian_1d(n: usize) -> ComplexMatrix {
    assert!(n >= 2, "dirichlet_laplacian_1d needs n >= 2");
    let h = grid_step(n);
    let s = 1.0 / (h * h);
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(-2.0 * s, 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(s, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `A = −L²`, so that `√(−A) = −L` holds exactly.
pub fn fourth_order_a(n: usize) -> ComplexMatrix {
    let l = dirichlet_laplacian_1d(n);
    -&(&l * &l)
}

/// Boundary operator of the Wentzell example.
pub fn wentzell_h(a: &ComplexMatrix) -> ComplexMatrix {
    -a
}

/// Volterra operator `ψ ↦ ∫₀^y φ(y, ξ) ψ(ξ) dξ` by composite trapezoid on
/// `{0, y₁, …, y_i}`. The unknown value at ξ = 0 is extrapolated linearly
/// from the first two nodes so the rule stays second order.
pub fn volterra_h(n: usize, phi: &dyn Fn(f64, f64) -> f64) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("volterra_h needs n >= 2".into()));
    }
    let ys = interior_nodes(n);
    let mut worst: f64 = 0.0;
    for &xi in std::iter::once(&0.0).chain(&ys).chain(std::iter::once(&1.0)) {
        worst = worst.max(phi(1.0, xi).abs());
    }
    if worst > 1e-12 {
        return Err(Error::KernelRowNonzeroAtOne(worst));
    }
    let h = grid_step(n);
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, &y) in ys.iter().enumerate() {
        // node ξ = 0 with weight h/2, psi(0) ≈ 2ψ₁ − ψ₂
        let w0 = 0.5 * h * phi(y, 0.0);
        m[(i, 0)] += C64::new(2.0 * w0, 0.0);
        m[(i, 1)] += C64::new(-w0, 0.0);
        for (j, &xi) in ys.iter().enumerate().take(i + 1) {
            let w = if j == i { 0.5 * h } else { h };
            m[(i, j)] += C64::new(w * phi(y, xi), 0.0);
        }
    }
    Ok(m)
}

/// Oblique-derivative operator `ψ ↦ −c(y) ψ'(y)` with central differences,
/// one-sided second-order differences at the first and last interior nodes.
pub fn oblique_h(n: usize, c: &dyn Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (c0, c1) = (c(0.0), c(1.0));
    if c0.abs() > 1e-12 || c1.abs() > 1e-12 {
        return Err(Error::CoefficientBoundaryNonzero { c0, c1 });
    }
    if n < 3 {
        return Err(Error::InvalidArgument("oblique_h needs n >= 3".into()));
    }
    let h = grid_step(n);
    let ys = interior_nodes(n);
    let mut m = ComplexMatrix::zeros(n, n);
    let r = |x: f64| C64::new(x, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let k = -c(y) / (2.0 * h);
        if i == 0 {
            m[(i, 0)] = r(-3.0 * k);
            m[(i, 1)] = r(4.0 * k);
            m[(i, 2)] = r(-k);
        } else if i == n - 1 {
            m[(i, n - 1)] = r(3.0 * k);
            m[(i, n - 2)] = r(-4.0 * k);
            m[(i, n - 3)] = r(k);
        } else {
            m[(i, i + 1)] = r(k);
            m[(i, i - 1)] = r(-k);
        }
    }
    Ok(m)
}

/// L1 discretization of the Caputo derivative of order ν on `m` uniform
/// time nodes `t_k = k·dt`. Row 0 (the initial node) is zero.
pub fn caputo_h(m: usize, nu: f64, dt: f64) -> Result<ComplexMatrix> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::NuOutOfRange(nu));
    }
    if m < 2 || !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("caputo_h needs m >= 2 and dt > 0".into()));
    }
    let coef = dt.powf(-nu) / statrs::function::gamma::gamma(2.0 - nu);
    let b = |j: usize| ((j + 1) as f64).powf(1.0 - nu) - (j as f64).powf(1.0 - nu);
    let mut d = ComplexMatrix::zeros(m, m);
    for k in 1..m {
        for j in 0..k {
            // b_j (g_{k-j} - g_{k-j-1})
            d[(k, k - j)] += C64::new(coef * b(j), 0.0);
            d[(k, k - j - 1)] -= C64::new(coef * b(j), 0.0);
        }
    }
    Ok(d)
}

/// Operators of the fractional-boundary example on the flattened (y, t)
/// space (t fastest): `A = L ⊗ I_t`, `H = I_y ⊗ D_t^ν`.
pub fn caputo_pair(ny: usize, mt: usize, nu: f64, horizon: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let dt = horizon / (mt - 1) as f64;
    let c = caputo_h(mt, nu, dt)?;
    let l = dirichlet_laplacian_1d(ny);
    let n = ny * mt;
    let a = ComplexMatrix::from_fn(n, n, |r, s| {
        let (yi, ti) = (r / mt, r % mt);
        let (yj, tj) = (s / mt, s % mt);
        if ti == tj {
            l[(yi, yj)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let h = ComplexMatrix::from_fn(n, n, |r, s| {
        let (yi, ti) = (r / mt, r % mt);
        let (yj, tj) = (s / mt, s % mt);
        if yi == yj {
            c[(ti, tj)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok((a, h))
}

/// Closed sector `S_φ = {z : |arg z| ≤ φ} ∪ {0}`.
pub fn in_sector(z: C64, phi: f64) -> bool {
    z == C64::new(0.0, 0.0) || z.arg().abs() <= phi + 1e-12
}

/// `max (1 + |λ|)·‖(a − λI)⁻¹‖` over the samples.
pub fn sector_bound_probe(a: &ComplexMatrix, phi0: f64, samples: &[C64]) -> Result<HypothesisProbeResult> {
    if let Some(z) = samples.iter().find(|z| !in_sector(**z, phi0)) {
        return Err(Error::InvalidArgument(format!("sample {z} outside the sector")));
    }
    let mut best = 0.0;
    let mut worst_point = C64::new(0.0, 0.0);
    let mut skipped = Vec::new();
    for &lambda in samples {
        let resolvent = match inverse(&a.shift(-lambda)) {
            Ok(r) => r,
            Err(_) => {
                skipped.push(lambda);
                continue;
            }
        };
        let value = (1.0 + lambda.norm()) * opnorm2(&resolvent)?;
        if value > best {
            best = value;
            worst_point = lambda;
        }
    }
    if skipped.len() == samples.len() && !samples.is_empty() {
        let z = samples[0];
        return Err(Error::SingularResolvent { re: z.re, im: z.im });
    }
    Ok(HypothesisProbeResult {
        constant_estimate: best,
        exponent_estimate: 0.0,
        sample_count: samples.len() - skipped.len(),
        worst_point,
        skipped_samples: skipped,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Decay of `‖h Q_t⁻¹‖` with `Q_t = −√(−a + tI)`.
///
/// The exponent is the log-log slope over the upper half of `ts`; the
/// constant is `max (1 + t)^ε̂ ‖h Q_t⁻¹‖` with `ε̂ = −slope` clipped to (0, 1/2].
pub fn hq_decay_probe(h: &ComplexMatrix, a: &ComplexMatrix, ts: &[f64]) -> Result<HypothesisProbeResult> {
    if ts.is_empty() || ts.iter().any(|t| !(*t >= 0.0)) || ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("ts must be nonnegative and ascending".into()));
    }
    let mut norms = Vec::with_capacity(ts.len());
    for &t in ts {
        if h.norm_max() == 0.0 {
            norms.push(0.0);
            continue;
        }
        let q = crate::calculus::q_of(a, C64::new(t, 0.0))?;
        let q_inv = inverse(&q)?;
        norms.push(opnorm2(&(h * &q_inv))?);
    }
    let half = ts.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts[half..]
        .iter()
        .zip(&norms[half..])
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .unzip();
    let slope = ls_slope(&xs, &ys).unwrap_or(0.0);
    let eps_hat = (-slope).clamp(f64::MIN_POSITIVE, 0.5);
    let mut best = 0.0;
    let mut worst = 0.0;
    for (&t, &v) in ts.iter().zip(&norms) {
        let value = (1.0 + t).powf(eps_hat) * v;
        if value > best {
            best = value;
            worst = t;
        }
    }
    Ok(HypothesisProbeResult {
        constant_estimate: best,
        exponent_estimate: slope,
        sample_count: ts.len(),
        worst_point: C64::new(worst, 0.0),
        skipped_samples: Vec::new(),
    })
}

/// Default Volterra kernel `φ(y, ξ) = k(1 − y)(1 + ξ)`, zero on the row y = 1.
pub fn volterra_kernel(k: f64) -> impl Fn(f64, f64) -> f64 {
    move |y, xi| k * (1.0 - y) * (1.0 + xi)
}

/// Default oblique coefficient `c(y) = k·y(1 − y)`.
pub fn oblique_coefficient(k: f64) -> impl Fn(f64) -> f64 {
    move |y| k * y * (1.0 - y)
}

fn param(spec: &OperatorSpec, key: &str, default: f64) -> f64 {
    spec.parameters.get(key).copied().unwrap_or(default)
}

/// Builds `(A, H)` from their descriptions.
///
/// `A` is `laplacian1d` or `fourth_order`. `H` is `wentzell` (−A),
/// `volterra` (parameter `k`), `oblique` (parameter `k`), `laplacian1d`
/// or `fourth_order`, or `caputo` (parameters `mt`, `nu`, `horizon`), in
/// which case `A` becomes `L ⊗ I_t` with `a.dim` spatial nodes.
pub fn build_pair(a: &OperatorSpec, h: &OperatorSpec) -> Result<(ComplexMatrix, ComplexMatrix)> {
    a.validate()?;
    let spatial = |spec: &OperatorSpec| match spec.kind {
        OperatorKind::Laplacian1d => Ok(dirichlet_laplacian_1d(spec.dim)),
        OperatorKind::FourthOrder => Ok(fourth_order_a(spec.dim)),
        other => Err(Error::InvalidArgument(format!("{other:?} cannot serve as A"))),
    };
    if h.kind == OperatorKind::Caputo {
        if a.kind != OperatorKind::Laplacian1d {
            return Err(Error::InvalidArgument("the Caputo family needs a laplacian1d A".into()));
        }
        let mt = param(h, "mt", 8.0);
        if mt < 2.0 || mt.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!("mt = {mt} must be an integer >= 2")));
        }
        return caputo_pair(a.dim, mt as usize, param(h, "nu", 0.5), param(h, "horizon", 1.0));
    }
    let a_mat = spatial(a)?;
    if h.kind != OperatorKind::Wentzell && h.dim != a.dim {
        return Err(Error::DimensionMismatch(format!(
            "H has dim {} but A has {}",
            h.dim, a.dim
        )));
    }
    let h_mat = match h.kind {
        OperatorKind::Wentzell => wentzell_h(&a_mat),
        OperatorKind::Volterra => volterra_h(h.dim, &volterra_kernel(param(h, "k", 1.0)))?,
        OperatorKind::Oblique => oblique_h(h.dim, &oblique_coefficient(param(h, "k", 1.0)))?,
        OperatorKind::Laplacian1d | OperatorKind::FourthOrder => spatial(h)?,
        OperatorKind::Custom | OperatorKind::Caputo => {
            return Err(Error::InvalidArgument(
                "custom operators are supplied programmatically".into(),
            ))
        }
    };
    Ok((a_mat, h_mat))
}
