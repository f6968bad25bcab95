//! Classical solutions from the representation formulas.
//!
//! With `T = (I − e^{2Q})⁻¹`, the Robin solution is
//! `u(x) = S(x)μ₀ + S(1−x)μ₁ + I(x) + J(x)` where `μ₁ = u₁ − I(1)` and
//! `μ₀ = Λ⁻¹[(I − e^{2Q})d₀ + 2Qe^{Q}μ₁ + 2QJ(0)] − J(0)`. The Dirichlet
//! solution uses `μ₀ = u₀ − J(0)` instead. Semigroup values at the grid
//! nodes are obtained by propagating vectors with `E = e^{h_x Q}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::calculus::{
    build_cache, build_cache_dirichlet, lp_grid_norm_weighted, region_membership, CalculusCache, SpectralPoint,
};
use crate::error::{Error, Result};
use crate::matfun::{expm, vec_add, vec_norm2, vec_scale, vec_sub, ComplexMatrix, C64, ONE, ZERO};

/// One Robin problem instance on the grid `x_i = i/(nx − 1)`.
#[derive(Clone, Debug)]
pub struct RobinProblem {
    pub a: ComplexMatrix,
    pub h: ComplexMatrix,
    pub point: SpectralPoint,
    pub f_samples: Vec<Vec<C64>>,
    pub d0: Vec<C64>,
    pub u1: Vec<C64>,
    pub p: f64,
    pub nx: usize,
    /// Factor turning the Euclidean vector norm into the norm of X.
    pub norm_weight: f64,
}

/// Dirichlet counterpart: `u(0) = u₀`, `u(1) = u₁`.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub a: ComplexMatrix,
    pub point: SpectralPoint,
    pub f_samples: Vec<Vec<C64>>,
    pub u0: Vec<C64>,
    pub u1: Vec<C64>,
    pub p: f64,
    pub nx: usize,
    pub norm_weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileNorms {
    pub u: f64,
    pub du: f64,
    pub ddu: f64,
    pub q2u: f64,
    pub f: f64,
    /// Norm of the independent second difference of u.
    pub ddu_fd: f64,
}

#[derive(Clone, Debug)]
pub struct SolutionProfile {
    pub x: Vec<f64>,
    pub u: Vec<Vec<C64>>,
    pub du: Vec<Vec<C64>>,
    pub ddu: Vec<Vec<C64>>,
    pub q2u: Vec<Vec<C64>>,
    pub norms: ProfileNorms,
    /// Lᵖ-grid norm of `D²_h u + Au − λu − f` over interior nodes.
    pub residual_interior: f64,
    /// `‖u'(0) − H_μ u(0) − d₀‖` (zero for Dirichlet problems).
    pub residual_robin: f64,
    pub residual_dirichlet_end: f64,
    /// `‖u(0) − u₀‖` for Dirichlet problems, zero otherwise.
    pub residual_dirichlet_start: f64,
    /// Scale against which the boundary residuals are judged.
    pub boundary_scale: f64,
}

fn check_samples(f: &[Vec<C64>], nx: usize, n: usize, vectors: &[&[C64]]) -> Result<()> {
    if nx < 3 {
        return Err(Error::InvalidArgument("nx must be at least 3".into()));
    }
    if f.len() != nx || f.iter().any(|v| v.len() != n) || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("problem data do not match A and nx".into()));
    }
    let finite = |v: &[C64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    if !f.iter().all(|v| finite(v)) || !vectors.iter().all(|v| finite(v)) {
        return Err(Error::NonFinite("problem data"));
    }
    Ok(())
}

impl RobinProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::InvalidArgument(format!("p = {} must exceed 1", self.p)));
        }
        if self.h.rows() != self.a.rows() || !self.h.is_square() {
            return Err(Error::DimensionMismatch("H must match A".into()));
        }
        check_samples(&self.f_samples, self.nx, self.a.rows(), &[&self.d0, &self.u1])
    }
}

impl DirichletProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::InvalidArgument(format!("p = {} must exceed 1", self.p)));
        }
        check_samples(&self.f_samples, self.nx, self.a.rows(), &[&self.u0, &self.u1])
    }
}

/// φ₁(Z) and φ₂(Z) for `Z = h_x Q`, by Taylor series when Z is small and
/// by solves against Q otherwise.
fn phi_functions(cache: &CalculusCache, hx: f64, e: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = cache.dim();
    let z = cache.q_lambda().scale_real(hx);
    let eye = ComplexMatrix::identity(n);
    if z.norm_1() <= 0.5 {
        // φ_k(Z) = Σ_j Z^j/(j+k)!
        let mut phi1 = ComplexMatrix::zeros(n, n);
        let mut phi2 = ComplexMatrix::zeros(n, n);
        let mut power = eye.clone();
        let mut fact1 = 1.0; // (j+1)!
        let mut fact2 = 2.0; // (j+2)!
        for j in 0..24 {
            phi1 = &phi1 + &power.scale_real(1.0 / fact1);
            phi2 = &phi2 + &power.scale_real(1.0 / fact2);
            power = &power * &z;
            fact1 *= (j + 2) as f64;
            fact2 *= (j + 3) as f64;
        }
        return (phi1, phi2);
    }
    let solve_z = |m: &ComplexMatrix| cache.q_factorization().solve(m).scale_real(1.0 / hx);
    let phi1 = solve_z(&(e - &eye));
    let phi2 = solve_z(&(&phi1 - &eye));
    (phi1, phi2)
}

/// One-step propagator data for the uniform x-grid.
struct StepOperators {
    e: ComplexMatrix,
    b0: ComplexMatrix,
    b1: ComplexMatrix,
}

fn step_operators(cache: &CalculusCache, nx: usize) -> Result<StepOperators> {
    let hx = 1.0 / (nx - 1) as f64;
    let e = expm(&cache.q_lambda().scale_real(hx))?;
    let (phi1, phi2) = phi_functions(cache, hx, &e);
    let half_h_qinv = |m: &ComplexMatrix| cache.q_factorization().solve(m).scale_real(0.5 * hx);
    let b0 = half_h_qinv(&(&phi1 - &phi2));
    let b1 = half_h_qinv(&phi2);
    Ok(StepOperators { e, b0, b1 })
}

fn duhamel_with(ops: &StepOperators, f: &[Vec<C64>]) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let nx = f.len();
    let n = ops.e.rows();
    let mut i_prof = vec![vec![ZERO; n]; nx];
    let mut j_prof = vec![vec![ZERO; n]; nx];
    for k in 0..nx - 1 {
        let next = vec_add(
            &vec_add(&ops.e.mul_vec(&i_prof[k]), &ops.b0.mul_vec(&f[k])),
            &ops.b1.mul_vec(&f[k + 1]),
        );
        i_prof[k + 1] = next;
    }
    for k in (0..nx - 1).rev() {
        let next = vec_add(
            &vec_add(&ops.e.mul_vec(&j_prof[k + 1]), &ops.b1.mul_vec(&f[k])),
            &ops.b0.mul_vec(&f[k + 1]),
        );
        j_prof[k] = next;
    }
    (i_prof, j_prof)
}

/// `I(x) = ½Q⁻¹∫₀^x e^{(x−s)Q}f(s)ds` and `J(x) = ½Q⁻¹∫_x^1 e^{(s−x)Q}f(s)ds`
/// at every node, exact for the piecewise-linear interpolant of f.
pub fn duhamel_terms(
    cache: &CalculusCache,
    f_samples: &[Vec<C64>],
    nx: usize,
) -> Result<(Vec<Vec<C64>>, Vec<Vec<C64>>)> {
    check_samples(f_samples, nx, cache.dim(), &[])?;
    let ops = step_operators(cache, nx)?;
    Ok(duhamel_with(&ops, f_samples))
}

/// `E^k v` for `k < count`. Once the iterate has decayed below `1e-250` of
/// the start it is replaced by zero: far past double precision, and it keeps
/// the tail out of subnormal arithmetic.
fn propagate(e: &ComplexMatrix, v: &[C64], count: usize) -> Vec<Vec<C64>> {
    let floor = 1e-250 * vec_norm2(v);
    let mut out = Vec::with_capacity(count);
    out.push(v.to_vec());
    for k in 1..count {
        let prev = &out[k - 1];
        let next = if vec_norm2(prev) <= floor {
            vec![ZERO; v.len()]
        } else {
            e.mul_vec(prev)
        };
        out.push(next);
    }
    out
}

struct Assembly<'a> {
    cache: &'a CalculusCache,
    a: &'a ComplexMatrix,
    f: &'a [Vec<C64>],
    p: f64,
    weight: f64,
}

impl Assembly<'_> {
    /// Builds u, u′, u″, Q²u from μ₀, μ₁ and the Duhamel terms.
    fn profile(
        &self,
        ops: &StepOperators,
        mu0: &[C64],
        mu1: &[C64],
        i_prof: &[Vec<C64>],
        j_prof: &[Vec<C64>],
    ) -> SolutionProfile {
        let cache = self.cache;
        let nx = self.f.len();
        let last = nx - 1;
        let q = cache.q_lambda();
        let t = cache.inv_i_minus_e2q();
        let qt = q * t;
        let eq = cache.exp_q();
        let seq_a = propagate(&ops.e, mu0, nx);
        let seq_b = propagate(&ops.e, &eq.mul_vec(mu0), nx);
        let seq_c = propagate(&ops.e, mu1, nx);
        let seq_d = propagate(&ops.e, &eq.mul_vec(mu1), nx);

        let mut u = Vec::with_capacity(nx);
        let mut du = Vec::with_capacity(nx);
        let mut q2u = Vec::with_capacity(nx);
        let mut ddu = Vec::with_capacity(nx);
        for k in 0..nx {
            let s_part = vec_add(
                &vec_sub(&seq_a[k], &seq_b[last - k]),
                &vec_sub(&seq_c[last - k], &seq_d[k]),
            );
            let st_part = vec_sub(
                &vec_add(&seq_a[k], &seq_b[last - k]),
                &vec_add(&seq_c[last - k], &seq_d[k]),
            );
            let uk = vec_add(&t.mul_vec(&s_part), &vec_add(&i_prof[k], &j_prof[k]));
            let duk = vec_add(&qt.mul_vec(&st_part), &q.mul_vec(&vec_sub(&i_prof[k], &j_prof[k])));
            let q2 = q.mul_vec(&q.mul_vec(&uk));
            ddu.push(vec_add(&q2, &self.f[k]));
            q2u.push(q2);
            u.push(uk);
            du.push(duk);
        }

        let hx = 1.0 / last as f64;
        let lambda = cache.build_point().lambda;
        let mut fd = vec![vec![ZERO; u[0].len()]; nx];
        let mut residual = vec![vec![ZERO; u[0].len()]; nx];
        for k in 1..last {
            let second: Vec<C64> = (0..u[k].len())
                .map(|c| (u[k + 1][c] - 2.0 * u[k][c] + u[k - 1][c]) / (hx * hx))
                .collect();
            let au = self.a.mul_vec(&u[k]);
            residual[k] = (0..second.len())
                .map(|c| second[c] + au[c] - lambda * u[k][c] - self.f[k][c])
                .collect();
            fd[k] = second;
        }
        // endpoints of the finite-difference profile copy their neighbours
        fd[0] = fd[1].clone();
        fd[last] = fd[last - 1].clone();

        let x: Vec<f64> = (0..nx).map(|k| k as f64 * hx).collect();
        let norm = |s: &[Vec<C64>]| lp_grid_norm_weighted(s, self.p, self.weight);
        let norms = ProfileNorms {
            u: norm(&u),
            du: norm(&du),
            ddu: norm(&ddu),
            q2u: norm(&q2u),
            f: norm(self.f),
            ddu_fd: norm(&fd),
        };
        SolutionProfile {
            x,
            residual_interior: norm(&residual),
            u,
            du,
            ddu,
            q2u,
            norms,
            residual_robin: 0.0,
            residual_dirichlet_end: 0.0,
            residual_dirichlet_start: 0.0,
            boundary_scale: 0.0,
        }
    }
}

/// Robin solve reusing a cache built at the problem's spectral point.
#[allow(clippy::too_many_arguments)]
pub fn solve_robin_with_cache(
    cache: &CalculusCache,
    a: &ComplexMatrix,
    f: &[Vec<C64>],
    d0: &[C64],
    u1: &[C64],
    p: f64,
    norm_weight: f64,
) -> Result<SolutionProfile> {
    let nx = f.len();
    check_samples(f, nx, cache.dim(), &[d0, u1])?;
    let lu = cache
        .lambda_det_factorization()
        .ok_or_else(|| Error::InvalidArgument("cache has no Λ factorization".into()))?;
    let ops = step_operators(cache, nx)?;
    let (i_prof, j_prof) = duhamel_with(&ops, f);
    let q = cache.q_lambda();
    let eq = cache.exp_q();
    let mu1 = vec_sub(u1, &i_prof[nx - 1]);
    let d_term = vec_sub(d0, &cache.exp_2q().mul_vec(d0));
    let two = C64::new(2.0, 0.0);
    let rhs = vec_add(
        &vec_add(&d_term, &vec_scale(&q.mul_vec(&eq.mul_vec(&mu1)), two)),
        &vec_scale(&q.mul_vec(&j_prof[0]), two),
    );
    let mu0 = vec_sub(&lu.solve_vec(&rhs), &j_prof[0]);
    let assembly = Assembly {
        cache,
        a,
        f,
        p,
        weight: norm_weight,
    };
    let mut prof = assembly.profile(&ops, &mu0, &mu1, &i_prof, &j_prof);
    let hu0 = cache.h_mu().mul_vec(&prof.u[0]);
    prof.residual_robin = vec_norm2(&vec_sub(&vec_sub(&prof.du[0], &hu0), d0));
    prof.residual_dirichlet_end = vec_norm2(&vec_sub(&prof.u[nx - 1], u1));
    prof.boundary_scale =
        1.0 + vec_norm2(d0) + vec_norm2(u1) + vec_norm2(&prof.du[0]) + vec_norm2(&hu0) + vec_norm2(&prof.u[0]);
    Ok(prof)
}

pub fn solve_robin(problem: &RobinProblem) -> Result<SolutionProfile> {
    problem.validate()?;
    let cache = build_cache(&problem.a, &problem.h, problem.point)?;
    solve_robin_with_cache(
        &cache,
        &problem.a,
        &problem.f_samples,
        &problem.d0,
        &problem.u1,
        problem.p,
        problem.norm_weight,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn solve_dirichlet_with_cache(
    cache: &CalculusCache,
    a: &ComplexMatrix,
    f: &[Vec<C64>],
    u0: &[C64],
    u1: &[C64],
    p: f64,
    norm_weight: f64,
) -> Result<SolutionProfile> {
    let nx = f.len();
    check_samples(f, nx, cache.dim(), &[u0, u1])?;
    let ops = step_operators(cache, nx)?;
    let (i_prof, j_prof) = duhamel_with(&ops, f);
    let mu0 = vec_sub(u0, &j_prof[0]);
    let mu1 = vec_sub(u1, &i_prof[nx - 1]);
    let assembly = Assembly {
        cache,
        a,
        f,
        p,
        weight: norm_weight,
    };
    let mut prof = assembly.profile(&ops, &mu0, &mu1, &i_prof, &j_prof);
    prof.residual_dirichlet_start = vec_norm2(&vec_sub(&prof.u[0], u0));
    prof.residual_dirichlet_end = vec_norm2(&vec_sub(&prof.u[nx - 1], u1));
    prof.boundary_scale = 1.0 + vec_norm2(u0) + vec_norm2(u1);
    Ok(prof)
}

pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<SolutionProfile> {
    problem.validate()?;
    let cache = build_cache_dirichlet(&problem.a, problem.point)?;
    solve_dirichlet_with_cache(
        &cache,
        &problem.a,
        &problem.f_samples,
        &problem.u0,
        &problem.u1,
        problem.p,
        problem.norm_weight,
    )
}

/// Settings shared by the product-space resolvent and the evolution demo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSpaceOptions {
    pub nx: usize,
    pub p: f64,
    /// Ω threshold that `(λ, λ + μ)` must meet.
    pub r: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub norm_weight: f64,
}

impl ProductSpaceOptions {
    pub fn new(nx: usize, r: f64) -> Self {
        Self {
            nx,
            p: 2.0,
            r,
            phi0: crate::calculus::DEFAULT_PHI,
            phi1: crate::calculus::DEFAULT_PHI,
            norm_weight: 1.0,
        }
    }

    fn point(&self, lambda: C64, mu: C64) -> SpectralPoint {
        SpectralPoint::new(lambda, lambda + mu).with_angles(self.phi0, Some(self.phi1))
    }

    pub(crate) fn check_region(&self, lambda: C64, mu: C64) -> Result<SpectralPoint> {
        let point = self.point(lambda, mu);
        if !region_membership(&point, self.r, 1.0).in_omega {
            return Err(Error::RegionViolation(format!(
                "(λ, λ+μ) = ({}, {}) is outside Ω with r = {}",
                point.lambda, point.mu, self.r
            )));
        }
        Ok(point)
    }
}

/// `(‖u‖_Y^p + ‖v‖_X^p)^{1/p}` on Z = Y × X.
pub fn z_norm(u: &[Vec<C64>], v: &[C64], p: f64, norm_weight: f64) -> f64 {
    let y = lp_grid_norm_weighted(u, p, norm_weight);
    let x = norm_weight * vec_norm2(v);
    (y.powf(p) + x.powf(p)).powf(1.0 / p)
}

/// `(𝒫 − λI)⁻¹(f, τ)` for the product-space operator
/// `𝒫(u, u(0)) = (u'' + Au, u'(0) − Hu(0) − μu(0))` with `u(1) = 0`.
/// Returns the profile of u and `v = u(0)`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_product_space(
    a: &ComplexMatrix,
    h: &ComplexMatrix,
    mu: C64,
    lambda: C64,
    f_samples: &[Vec<C64>],
    tau: &[C64],
    options: &ProductSpaceOptions,
) -> Result<(SolutionProfile, Vec<C64>)> {
    let point = options.check_region(lambda, mu)?;
    let cache = build_cache(a, h, point)?;
    let zero = vec![ZERO; a.rows()];
    let prof = solve_robin_with_cache(&cache, a, f_samples, tau, &zero, options.p, options.norm_weight)?;
    let v = prof.u[0].clone();
    Ok((prof, v))
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub z_norms: Vec<f64>,
    pub y_norms: Vec<f64>,
    pub boundary_norms: Vec<f64>,
    pub final_u: Vec<Vec<C64>>,
    pub final_v: Vec<C64>,
}

/// Implicit Euler for `w' = 𝒫w`: `w_{k+1} = (I − dt𝒫)⁻¹w_k`, i.e. the
/// product-space resolvent at λ = 1/dt applied to `−w_k/dt`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_implicit_euler(
    a: &ComplexMatrix,
    h: &ComplexMatrix,
    mu: C64,
    w0: (&[Vec<C64>], &[C64]),
    dt: f64,
    steps: usize,
    options: &ProductSpaceOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let lambda = C64::new(1.0 / dt, 0.0);
    let point = options.check_region(lambda, mu)?;
    let cache = build_cache(a, h, point)?;
    let (p, wgt) = (options.p, options.norm_weight);
    let n = a.rows();
    check_samples(w0.0, options.nx, n, &[w0.1])?;
    let zero = vec![ZERO; n];
    let mut u = w0.0.to_vec();
    let mut v = w0.1.to_vec();
    let mut traj = Trajectory {
        dt,
        times: vec![0.0],
        z_norms: vec![z_norm(&u, &v, p, wgt)],
        y_norms: vec![lp_grid_norm_weighted(&u, p, wgt)],
        boundary_norms: vec![wgt * vec_norm2(&v)],
        final_u: Vec::new(),
        final_v: Vec::new(),
    };
    let scale = C64::new(-1.0 / dt, 0.0);
    for k in 0..steps {
        let f: Vec<Vec<C64>> = u.iter().map(|x| vec_scale(x, scale)).collect();
        let tau = vec_scale(&v, scale);
        let prof = solve_robin_with_cache(&cache, a, &f, &tau, &zero, p, wgt)?;
        u = prof.u;
        v = u[0].clone();
        traj.times.push((k + 1) as f64 * dt);
        traj.z_norms.push(z_norm(&u, &v, p, wgt));
        traj.y_norms.push(lp_grid_norm_weighted(&u, p, wgt));
        traj.boundary_norms.push(wgt * vec_norm2(&v));
    }
    traj.final_u = u;
    traj.final_v = v;
    Ok(traj)
}

fn fmt_f(out: &mut String, x: f64) {
    let _ = write!(out, "{x:e}");
}

impl SolutionProfile {
    /// CSV with `#` metadata lines, a header row and one row per node:
    /// x, then Re/Im of each component of u, then ‖u(x)‖.
    pub fn to_csv(&self, metadata: &[String]) -> String {
        let mut out = String::new();
        for line in metadata {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# residual_interior={:e}", self.residual_interior);
        let _ = writeln!(out, "# residual_robin={:e}", self.residual_robin);
        let _ = writeln!(out, "# residual_dirichlet_start={:e}", self.residual_dirichlet_start);
        let _ = writeln!(out, "# residual_dirichlet_end={:e}", self.residual_dirichlet_end);
        let n = self.u.first().map_or(0, Vec::len);
        out.push('x');
        for c in 0..n {
            let _ = write!(out, ",u{c}_re,u{c}_im");
        }
        out.push_str(",norm_u\n");
        for (x, uk) in self.x.iter().zip(&self.u) {
            fmt_f(&mut out, *x);
            for z in uk {
                out.push(',');
                fmt_f(&mut out, z.re);
                out.push(',');
                fmt_f(&mut out, z.im);
            }
            out.push(',');
            fmt_f(&mut out, vec_norm2(uk));
            out.push('\n');
        }
        out
    }
}

impl Trajectory {
    pub fn to_csv(&self, metadata: &[String]) -> String {
        let mut out = String::new();
        for line in metadata {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("step,t,z_norm,y_norm,boundary_norm\n");
        for k in 0..self.times.len() {
            let _ = writeln!(
                out,
                "{k},{:e},{:e},{:e},{:e}",
                self.times[k], self.z_norms[k], self.y_norms[k], self.boundary_norms[k]
            );
        }
        out
    }
}

/// Samples `g` on the x-grid.
pub fn sample_on_grid(nx: usize, g: impl Fn(f64) -> Vec<C64>) -> Vec<Vec<C64>> {
    (0..nx).map(|k| g(k as f64 / (nx - 1) as f64)).collect()
}

/// Constant unit vector helper used by scalar examples.
pub fn scalar_vec(z: f64) -> Vec<C64> {
    vec![ONE * z]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::build_cache_dirichlet;
    use crate::operators::dirichlet_laplacian_1d;

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::scalar(C64::new(x, 0.0))
    }

    fn scalar_robin(nx: usize, u1: f64) -> RobinProblem {
        RobinProblem {
            a: scalar(-1.0),
            h: scalar(0.0),
            point: SpectralPoint::real(0.0, 0.0),
            f_samples: vec![vec![ZERO]; nx],
            d0: vec![ZERO],
            u1: scalar_vec(u1),
            p: 2.0,
            nx,
            norm_weight: 1.0,
        }
    }

    #[test]
    fn robin_scalar_cosh() {
        let prof = solve_robin(&scalar_robin(65, 1.0)).unwrap();
        assert!((prof.u[0][0].re - 0.648054274).abs() < 1e-9);
        for (x, u) in prof.x.iter().zip(&prof.u) {
            assert!((u[0].re - x.cosh() / 1f64.cosh()).abs() < 1e-12);
        }
        let zero = solve_robin(&scalar_robin(9, 0.0)).unwrap();
        assert!(zero.u.iter().all(|v| v[0] == ZERO));
    }

    #[test]
    fn dirichlet_scalar_sinh() {
        let nx = 65;
        let prob = DirichletProblem {
            a: scalar(-1.0),
            point: SpectralPoint::real(0.0, 0.0),
            f_samples: vec![vec![ZERO]; nx],
            u0: vec![ZERO],
            u1: scalar_vec(1.0),
            p: 2.0,
            nx,
            norm_weight: 1.0,
        };
        let prof = solve_dirichlet(&prob).unwrap();
        assert!((prof.u[32][0].re - 0.443409442).abs() < 1e-9);
        assert!(prof.residual_dirichlet_start < 1e-12 && prof.residual_dirichlet_end < 1e-12);
    }

    #[test]
    fn duhamel_zero_and_constant() {
        let n = 6;
        let a = dirichlet_laplacian_1d(n);
        let cache = build_cache_dirichlet(&a, SpectralPoint::real(3.0, 0.0)).unwrap();
        let nx = 33;
        let (i0, j0) = duhamel_terms(&cache, &vec![vec![ZERO; n]; nx], nx).unwrap();
        assert!(i0.iter().chain(&j0).all(|v| v.iter().all(|z| *z == ZERO)));
        let f0: Vec<C64> = (0..n).map(|k| C64::new(1.0 + k as f64, 0.5)).collect();
        let (ip, jp) = duhamel_terms(&cache, &vec![f0.clone(); nx], nx).unwrap();
        assert!(vec_norm2(&ip[0]) == 0.0 && vec_norm2(&jp[nx - 1]) == 0.0);
        // I(x) = ½Q⁻²(e^{xQ} − I)f₀
        let q = cache.q_lambda();
        let q2 = q * q;
        let lu = crate::matfun::lu_factor(&q2).unwrap();
        for k in [5, 17, 32] {
            let x = k as f64 / (nx - 1) as f64;
            let ex = crate::calculus::exp_xq(&cache, x).unwrap();
            let want = vec_scale(&lu.solve_vec(&vec_sub(&ex.mul_vec(&f0), &f0)), C64::new(0.5, 0.0));
            let err = vec_norm2(&vec_sub(&ip[k], &want));
            assert!(err <= 1e-9 * vec_norm2(&want), "x = {x}: {err}");
        }
    }

    #[test]
    fn duhamel_scalar_linear_forcing() {
        let cache = build_cache_dirichlet(&scalar(-1.0), SpectralPoint::real(0.0, 0.0)).unwrap();
        let nx = 17;
        let f = sample_on_grid(nx, |x| scalar_vec(x));
        let (ip, _) = duhamel_terms(&cache, &f, nx).unwrap();
        for k in [4, 9, 16] {
            let x = k as f64 / (nx - 1) as f64;
            let want = 0.5 * -1.0 * crate::oracle::quad_adaptive(|s| (-(x - s)).exp() * s, 0.0, x).unwrap();
            assert!((ip[k][0].re - want).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn evolve_zero_stays_zero() {
        let n = 4;
        let a = dirichlet_laplacian_1d(n);
        let h = -&a;
        let opts = ProductSpaceOptions::new(9, 1.0);
        let u0 = vec![vec![ZERO; n]; 9];
        let traj = evolve_implicit_euler(&a, &h, ZERO, (&u0, &[ZERO; 4]), 0.01, 3, &opts).unwrap();
        assert!(traj.z_norms.iter().all(|z| *z == 0.0));
    }

    #[test]
    fn product_space_region_violation() {
        let a = dirichlet_laplacian_1d(4);
        let h = -&a;
        let opts = ProductSpaceOptions::new(9, 1e6);
        let f = vec![vec![ZERO; 4]; 9];
        let r = resolvent_product_space(&a, &h, ZERO, C64::new(10.0, 0.0), &f, &[ZERO; 4], &opts);
        assert!(matches!(r, Err(Error::RegionViolation(_))));
    }
}
