//! λ,μ-dependent operators: Q_λ, T_λ, semigroup values, the determinant
//! Λ_{λ,μ}, the kernels S and S̃, and the discrete norms used by the
//! estimates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{
    expm, inverse, jacobi_eigen, lu_factor, sqrtm_principal, vec_norm2, ComplexMatrix, LUFactorization, C64,
};

pub const DEFAULT_PHI: f64 = 3.0 * PI / 4.0;

/// Spectral parameters of one problem instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: C64,
    pub mu: C64,
    #[serde(default = "default_phi")]
    pub phi0: f64,
    #[serde(default)]
    pub phi1: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

fn default_phi() -> f64 {
    DEFAULT_PHI
}

impl SpectralPoint {
    pub fn new(lambda: C64, mu: C64) -> Self {
        Self {
            lambda,
            mu,
            phi0: DEFAULT_PHI,
            phi1: Some(DEFAULT_PHI),
            epsilon: None,
        }
    }

    pub fn real(lambda: f64, mu: f64) -> Self {
        Self::new(C64::new(lambda, 0.0), C64::new(mu, 0.0))
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_angles(mut self, phi0: f64, phi1: Option<f64>) -> Self {
        self.phi0 = phi0;
        self.phi1 = phi1;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub in_omega: bool,
    pub in_pi: bool,
    pub r: f64,
    pub rho: f64,
}

/// `Q_λ = −√(−a + λI)`.
pub fn q_of(a: &ComplexMatrix, lambda: C64) -> Result<ComplexMatrix> {
    let root = sqrtm_principal(&(-a).shift(lambda))?;
    Ok(-&root)
}

/// `T_λ = Q_0 − Q_λ`.
pub fn t_of(a: &ComplexMatrix, lambda: C64) -> Result<ComplexMatrix> {
    let q0 = q_of(a, C64::new(0.0, 0.0))?;
    let ql = q_of(a, lambda)?;
    Ok(&q0 - &ql)
}

/// Operators derived from one spectral point. Immutable once built.
#[derive(Clone, Debug)]
pub struct CalculusCache {
    q_lambda: ComplexMatrix,
    q_factorization: LUFactorization,
    exp_q: ComplexMatrix,
    exp_2q: ComplexMatrix,
    inv_i_minus_e2q: ComplexMatrix,
    h_mu: ComplexMatrix,
    lambda_det: Option<ComplexMatrix>,
    lambda_det_factorization: Option<LUFactorization>,
    build_point: SpectralPoint,
}

impl CalculusCache {
    pub fn q_lambda(&self) -> &ComplexMatrix {
        &self.q_lambda
    }
    pub fn q_factorization(&self) -> &LUFactorization {
        &self.q_factorization
    }
    pub fn exp_q(&self) -> &ComplexMatrix {
        &self.exp_q
    }
    pub fn exp_2q(&self) -> &ComplexMatrix {
        &self.exp_2q
    }
    pub fn inv_i_minus_e2q(&self) -> &ComplexMatrix {
        &self.inv_i_minus_e2q
    }
    pub fn h_mu(&self) -> &ComplexMatrix {
        &self.h_mu
    }
    /// Λ_{λ,μ}; absent for caches built for the Dirichlet problem.
    pub fn lambda_det(&self) -> Option<&ComplexMatrix> {
        self.lambda_det.as_ref()
    }
    pub fn lambda_det_factorization(&self) -> Option<&LUFactorization> {
        self.lambda_det_factorization.as_ref()
    }
    pub fn build_point(&self) -> &SpectralPoint {
        &self.build_point
    }
    pub fn dim(&self) -> usize {
        self.q_lambda.rows()
    }

    /// `Λ_{λ,μ}⁻¹` formed from the stored factorization.
    pub fn lambda_det_inverse(&self) -> Option<ComplexMatrix> {
        self.lambda_det_factorization.as_ref().map(|lu| lu.inverse())
    }

    pub fn q_inverse(&self) -> ComplexMatrix {
        self.q_factorization.inverse()
    }
}

fn build_common(a: &ComplexMatrix, h: &ComplexMatrix, point: SpectralPoint) -> Result<CalculusCache> {
    if !a.is_square() || h.rows() != a.rows() || h.cols() != a.cols() {
        return Err(Error::DimensionMismatch("A and H must be square of equal size".into()));
    }
    if !point.lambda.re.is_finite()
        || !point.lambda.im.is_finite()
        || !point.mu.re.is_finite()
        || !point.mu.im.is_finite()
    {
        return Err(Error::NonFinite("spectral point"));
    }
    let n = a.rows();
    let q = q_of(a, point.lambda)?;
    let q_factorization = lu_factor(&q)?;
    let exp_q = expm(&q)?;
    let exp_2q = expm(&q.scale_real(2.0))?;
    let inv_i_minus_e2q = inverse(&(&ComplexMatrix::identity(n) - &exp_2q))?;
    Ok(CalculusCache {
        q_lambda: q,
        q_factorization,
        exp_q,
        exp_2q,
        inv_i_minus_e2q,
        h_mu: h.shift(point.mu),
        lambda_det: None,
        lambda_det_factorization: None,
        build_point: point,
    })
}

/// `Λ_{λ,μ} = (Q_λ − H_μ) + e^{2Q_λ}(Q_λ + H_μ)`, factorized once.
pub fn build_cache(a: &ComplexMatrix, h: &ComplexMatrix, point: SpectralPoint) -> Result<CalculusCache> {
    let mut cache = build_common(a, h, point)?;
    let q = &cache.q_lambda;
    let det = &(q - &cache.h_mu) + &(&cache.exp_2q * &(q + &cache.h_mu));
    let lu = lu_factor(&det).map_err(|_| Error::LambdaSingular {
        lambda_re: point.lambda.re,
        lambda_im: point.lambda.im,
        mu_re: point.mu.re,
        mu_im: point.mu.im,
    })?;
    cache.lambda_det = Some(det);
    cache.lambda_det_factorization = Some(lu);
    Ok(cache)
}

/// Cache without Λ, for the Dirichlet problem (no boundary operator).
pub fn build_cache_dirichlet(a: &ComplexMatrix, point: SpectralPoint) -> Result<CalculusCache> {
    build_common(a, &ComplexMatrix::zeros(a.rows(), a.cols()), point)
}

/// `e^{xQ_λ}`, evaluated independently for each x.
pub fn exp_xq(cache: &CalculusCache, x: f64) -> Result<ComplexMatrix> {
    expm(&cache.q_lambda.scale_real(x))
}

fn kernel(cache: &CalculusCache, x: f64, sign: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [0, 1]")));
    }
    let left = exp_xq(cache, x)?;
    let right = &exp_xq(cache, 1.0 - x)? * &cache.exp_q;
    Ok(&cache.inv_i_minus_e2q * &(&left + &right.scale_real(sign)))
}

/// `S(x) = (I − e^{2Q})⁻¹(e^{xQ} − e^{(1−x)Q}e^{Q})`.
pub fn s_kernel(cache: &CalculusCache, x: f64) -> Result<ComplexMatrix> {
    kernel(cache, x, -1.0)
}

/// `S̃(x) = (I − e^{2Q})⁻¹(e^{xQ} + e^{(1−x)Q}e^{Q})`.
pub fn s_tilde_kernel(cache: &CalculusCache, x: f64) -> Result<ComplexMatrix> {
    kernel(cache, x, 1.0)
}

/// Composite-trapezoid `(∫₀¹ ‖u(x)‖^p dx)^{1/p}` on a uniform grid
/// including both endpoints, with the Euclidean vector norm.
pub fn lp_grid_norm(samples: &[Vec<C64>], p: f64) -> f64 {
    lp_grid_norm_weighted(samples, p, 1.0)
}

/// As [`lp_grid_norm`] with each vector norm multiplied by `weight`
/// (√h_y turns the Euclidean norm into the discrete L²(0,1) norm in y).
pub fn lp_grid_norm_weighted(samples: &[Vec<C64>], p: f64, weight: f64) -> f64 {
    let nx = samples.len();
    if nx == 0 {
        return 0.0;
    }
    if nx == 1 {
        return weight * vec_norm2(&samples[0]);
    }
    let hx = 1.0 / (nx - 1) as f64;
    let mut sum = 0.0;
    for (i, v) in samples.iter().enumerate() {
        let w = if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
        sum += w * (weight * vec_norm2(v)).powf(p);
    }
    sum.powf(1.0 / p)
}

pub const INTERP_T_MIN: f64 = 1e-6;
pub const INTERP_T_MAX: f64 = 1e8;
pub const INTERP_POINTS: usize = 400;

enum InterpPath {
    Eigen { values: Vec<f64>, vectors: Vec<f64> },
    General(ComplexMatrix),
}

/// Evaluator of the interpolation norm
/// `‖w‖ + (∫ ‖t^{1−1/2p} A(A−t)⁻¹w‖^p dt/t)^{1/p}` for a fixed `A`,
/// by the trapezoid rule in log t on a truncated interval.
pub struct InterpNorm {
    path: InterpPath,
    p: f64,
    t_min: f64,
    t_max: f64,
    points: usize,
}

impl InterpNorm {
    pub fn new(a: &ComplexMatrix, p: f64) -> Result<Self> {
        Self::with_range(a, p, INTERP_T_MIN, INTERP_T_MAX, INTERP_POINTS)
    }

    pub fn with_range(a: &ComplexMatrix, p: f64, t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(p > 1.0) || !(t_min > 0.0 && t_max > t_min) || points < 2 {
            return Err(Error::InvalidArgument("interpolation norm parameters".into()));
        }
        let n = a.rows();
        let path = if a.symmetry_defect() <= 1e-12 * a.norm_max().max(1.0) {
            let (values, vectors) = jacobi_eigen(a.real_parts(), n);
            InterpPath::Eigen { values, vectors }
        } else {
            InterpPath::General(a.clone())
        };
        Ok(Self {
            path,
            p,
            t_min,
            t_max,
            points,
        })
    }

    /// Forces the per-node LU path even for symmetric `a`.
    pub fn general(a: &ComplexMatrix, p: f64) -> Result<Self> {
        let mut out = Self::with_range(a, p, INTERP_T_MIN, INTERP_T_MAX, INTERP_POINTS)?;
        out.path = InterpPath::General(a.clone());
        Ok(out)
    }

    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (s0, s1) = (self.t_min.ln(), self.t_max.ln());
        let ds = (s1 - s0) / (self.points - 1) as f64;
        (0..self.points).map(move |k| {
            let w = if k == 0 || k == self.points - 1 { 0.5 * ds } else { ds };
            ((s0 + k as f64 * ds).exp(), w)
        })
    }

    pub fn eval(&self, w: &[C64]) -> Result<f64> {
        let base = vec_norm2(w);
        if base == 0.0 {
            return Ok(0.0);
        }
        let expo = 1.0 - 1.0 / (2.0 * self.p);
        let mut integral = 0.0;
        match &self.path {
            InterpPath::Eigen { values, vectors } => {
                let n = values.len();
                let coeffs: Vec<f64> = (0..n)
                    .map(|j| {
                        let c = (0..n).fold(C64::new(0.0, 0.0), |acc, i| acc + w[i] * vectors[i * n + j]);
                        c.norm_sqr()
                    })
                    .collect();
                for (t, weight) in self.nodes() {
                    let mut s = 0.0;
                    for (k, c) in values.iter().zip(&coeffs) {
                        let d = k - t;
                        if d == 0.0 {
                            return Err(Error::ResolventSingular(t));
                        }
                        s += (k / d).powi(2) * c;
                    }
                    integral += weight * (t.powf(expo) * s.sqrt()).powf(self.p);
                }
            }
            InterpPath::General(a) => {
                for (t, weight) in self.nodes() {
                    let lu = lu_factor(&a.shift(C64::new(-t, 0.0))).map_err(|_| Error::ResolventSingular(t))?;
                    let x = lu.solve_vec(w);
                    let ax = a.mul_vec(&x);
                    integral += weight * (t.powf(expo) * vec_norm2(&ax)).powf(self.p);
                }
            }
        }
        Ok(base + integral.powf(1.0 / self.p))
    }
}

/// Interpolation norm of `w` for `a` (see [`InterpNorm`]).
pub fn interp_norm(w: &[C64], a: &ComplexMatrix, p: f64) -> Result<f64> {
    InterpNorm::new(a, p)?.eval(w)
}

/// Membership in Ω (`|λ| ≥ r`, `|μ|²/|λ| ≥ r`, sectors) and in Π
/// (`|λ| ≥ ρ`, `|λ|/|μ|^{1/ε} ≥ ρ`, +∞ when μ = 0).
pub fn region_membership(point: &SpectralPoint, r: f64, rho: f64) -> RegionMembership {
    use crate::operators::in_sector;
    let lam = point.lambda.norm();
    let mu = point.mu.norm();
    let phi1 = point.phi1.unwrap_or(point.phi0);
    let in_omega =
        in_sector(point.lambda, point.phi0) && in_sector(point.mu, phi1) && lam >= r && lam > 0.0 && mu * mu / lam >= r;
    let in_pi = match point.epsilon {
        Some(eps) if eps > 0.0 => {
            let ratio = if mu == 0.0 {
                f64::INFINITY
            } else {
                lam / mu.powf(1.0 / eps)
            };
            in_sector(point.lambda, point.phi0) && lam >= rho && ratio >= rho
        }
        _ => false,
    };
    RegionMembership {
        in_omega,
        in_pi,
        r,
        rho,
    }
}
