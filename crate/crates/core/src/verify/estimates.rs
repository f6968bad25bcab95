//! Sharp-estimate sweeps: `max{(1+|λ|)‖u‖, ‖u″‖, ‖Q_λ²u‖}` against α, β
//! or the Dirichlet right-hand side.

use serde::{Deserialize, Serialize};

use super::grid::RegionGrid;
use super::par_map;
use super::report::{EstimateReport, Sample};
use crate::calculus::{build_cache, build_cache_dirichlet, CalculusCache, InterpNorm, SpectralPoint};
use crate::data::DataGenerator;
use crate::error::{Error, Result};
use crate::matfun::{lu_factor, vec_norm2, vec_scale, ComplexMatrix, C64, ONE, ZERO};
use crate::solver::{solve_dirichlet_with_cache, solve_robin_with_cache, SolutionProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateCase {
    /// Ω region, α right-hand side.
    First,
    /// Π region, β right-hand side.
    Second,
    /// Sector, no boundary operator.
    Dirichlet,
}

/// Which data are switched on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataMask {
    pub f: bool,
    pub d0: bool,
    pub u0: bool,
    pub u1: bool,
}

impl DataMask {
    pub const ALL: DataMask = DataMask {
        f: true,
        d0: true,
        u0: true,
        u1: true,
    };
    pub const F_ONLY: DataMask = DataMask {
        f: true,
        d0: false,
        u0: false,
        u1: false,
    };
    pub const NONE: DataMask = DataMask {
        f: false,
        d0: false,
        u0: false,
        u1: false,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemData {
    pub f: Vec<Vec<C64>>,
    pub d0: Vec<C64>,
    pub u0: Vec<C64>,
    pub u1: Vec<C64>,
}

/// Operators, seeded data and discretization settings shared by a sweep.
#[derive(Clone, Debug)]
pub struct ProblemTemplate {
    pub a: ComplexMatrix,
    pub h: ComplexMatrix,
    pub p: f64,
    pub nx_min: usize,
    pub nx_max: usize,
    /// x-nodes per boundary-layer width `1/√(1+|λ|)`.
    pub nodes_per_layer: f64,
    pub norm_weight: f64,
    pub seed: u64,
    pub mask: DataMask,
    /// Common factor applied to all data.
    pub scale: C64,
    pub threads: usize,
}

impl ProblemTemplate {
    pub fn new(a: ComplexMatrix, h: ComplexMatrix) -> Self {
        let n = a.rows();
        Self {
            a,
            h,
            p: 2.0,
            nx_min: 65,
            nx_max: 20_001,
            nodes_per_layer: 12.0,
            norm_weight: 1.0 / ((n + 1) as f64).sqrt(),
            seed: 0,
            mask: DataMask::ALL,
            scale: ONE,
            threads: 1,
        }
    }

    pub fn nx_for(&self, lambda: C64) -> usize {
        let want = (self.nodes_per_layer * (1.0 + lambda.norm()).sqrt()).ceil() as usize + 1;
        want.clamp(self.nx_min.max(3), self.nx_max.max(3))
    }

    /// Data drawn in a fixed order, so vectors do not depend on `nx`.
    pub fn data(&self, nx: usize) -> ProblemData {
        let n = self.a.rows();
        let mut g = DataGenerator::new(self.seed);
        let on = |flag: bool| if flag { self.scale } else { ZERO };
        let f = g
            .smooth_profile(nx, n)
            .into_iter()
            .map(|v| vec_scale(&v, on(self.mask.f)))
            .collect();
        let d0 = vec_scale(&g.smooth_vector(n), on(self.mask.d0));
        let u0 = vec_scale(&g.smooth_vector(n), on(self.mask.u0));
        let u1 = vec_scale(&g.smooth_vector(n), on(self.mask.u1));
        ProblemData { f, d0, u0, u1 }
    }
}

/// X-norms of the data entering the right-hand sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DataNorms {
    pub f: f64,
    pub d0: f64,
    pub u0: f64,
    pub u0_interp: f64,
    pub u1: f64,
    pub u1_interp: f64,
    /// `w = (Q_λ − H_μ)⁻¹d₀`.
    pub w: f64,
    pub w_interp: f64,
}

fn lambda_power(point: &SpectralPoint, p: f64) -> f64 {
    point.lambda.norm().powf(1.0 - 1.0 / (2.0 * p))
}

/// `(1+|λ|+|μ|)/(1+|μ|)·(‖d₀‖ + ‖f‖) + ‖u₁‖_interp + |λ|^{1−1/2p}‖u₁‖`.
pub fn alpha_rhs(point: &SpectralPoint, p: f64, n: &DataNorms) -> f64 {
    let (l, m) = (point.lambda.norm(), point.mu.norm());
    (1.0 + l + m) / (1.0 + m) * (n.d0 + n.f) + n.u1_interp + lambda_power(point, p) * n.u1
}

/// `‖d₀‖ + ‖f‖ + ‖w‖_interp + |λ|^{1−1/2p}‖w‖ + ‖u₁‖_interp + |λ|^{1−1/2p}‖u₁‖`.
pub fn beta_rhs(point: &SpectralPoint, p: f64, n: &DataNorms) -> f64 {
    let lp = lambda_power(point, p);
    n.d0 + n.f + n.w_interp + lp * n.w + n.u1_interp + lp * n.u1
}

/// `‖f‖ + ‖u₀‖_interp + ‖u₁‖_interp + |λ|^{1−1/2p}(‖u₀‖ + ‖u₁‖)`.
pub fn dirichlet_rhs(point: &SpectralPoint, p: f64, n: &DataNorms) -> f64 {
    n.f + n.u0_interp + n.u1_interp + lambda_power(point, p) * (n.u0 + n.u1)
}

/// `max{(1+|λ|)‖u‖, ‖u″‖, ‖Q_λ²u‖}`.
pub fn estimate_lhs(profile: &SolutionProfile, lambda: C64) -> f64 {
    let n = &profile.norms;
    ((1.0 + lambda.norm()) * n.u).max(n.ddu).max(n.q2u)
}

/// `(Q_λ − H_μ)⁻¹d₀`.
pub fn q_minus_h_solve(cache: &CalculusCache, d0: &[C64]) -> Result<Vec<C64>> {
    let m = cache.q_lambda() - cache.h_mu();
    let lu = lu_factor(&m).map_err(|_| Error::QminusHSingular)?;
    Ok(lu.solve_vec(d0))
}

struct SweepContext<'a> {
    template: &'a ProblemTemplate,
    interp: InterpNorm,
    u0_interp: f64,
    u1_interp: f64,
}

impl SweepContext<'_> {
    fn evaluate(&self, case: EstimateCase, point: &SpectralPoint) -> Result<Sample> {
        let t = self.template;
        let wgt = t.norm_weight;
        let nx = t.nx_for(point.lambda);
        let data = t.data(nx);
        let mut norms = DataNorms {
            d0: wgt * vec_norm2(&data.d0),
            u0: wgt * vec_norm2(&data.u0),
            u0_interp: self.u0_interp,
            u1: wgt * vec_norm2(&data.u1),
            u1_interp: self.u1_interp,
            ..DataNorms::default()
        };
        let (prof, rhs) = match case {
            EstimateCase::First | EstimateCase::Second => {
                let cache = build_cache(&t.a, &t.h, *point)?;
                let prof = solve_robin_with_cache(&cache, &t.a, &data.f, &data.d0, &data.u1, t.p, wgt)?;
                norms.f = prof.norms.f;
                if case == EstimateCase::First {
                    (prof, alpha_rhs(point, t.p, &norms))
                } else {
                    let w = q_minus_h_solve(&cache, &data.d0)?;
                    norms.w = wgt * vec_norm2(&w);
                    norms.w_interp = wgt * self.interp.eval(&w)?;
                    (prof, beta_rhs(point, t.p, &norms))
                }
            }
            EstimateCase::Dirichlet => {
                let cache = build_cache_dirichlet(&t.a, *point)?;
                let prof = solve_dirichlet_with_cache(&cache, &t.a, &data.f, &data.u0, &data.u1, t.p, wgt)?;
                norms.f = prof.norms.f;
                (prof, dirichlet_rhs(point, t.p, &norms))
            }
        };
        Ok(Sample::measured(
            point.lambda,
            point.mu,
            estimate_lhs(&prof, point.lambda),
            rhs,
        ))
    }
}

fn context(template: &ProblemTemplate) -> Result<SweepContext<'_>> {
    let interp = InterpNorm::new(&template.a, template.p)?;
    let data = template.data(3);
    let u0_interp = template.norm_weight * interp.eval(&data.u0)?;
    let u1_interp = template.norm_weight * interp.eval(&data.u1)?;
    Ok(SweepContext {
        template,
        interp,
        u0_interp,
        u1_interp,
    })
}

/// Ratio lhs/rhs at every grid point. Per-point failures are recorded and
/// the sweep continues.
pub fn check_sharp_estimate(
    case: EstimateCase,
    grid: &RegionGrid,
    template: &ProblemTemplate,
) -> Result<EstimateReport> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "the grid is empty after region filtering".into(),
        ));
    }
    let ctx = context(template)?;
    let samples = par_map(&points, template.threads, |pt| {
        ctx.evaluate(case, pt)
            .unwrap_or_else(|e| Sample::failed(pt.lambda, pt.mu, e))
    });
    let label = match case {
        EstimateCase::First => "sharp_first",
        EstimateCase::Second => "sharp_second",
        EstimateCase::Dirichlet => "sharp_dirichlet",
    };
    Ok(EstimateReport::from_samples_keyed(label, samples, |l, m| {
        grid.mu_factor(l, m)
    }))
}

/// `(1+|μ|)‖u(0)‖` against `‖f‖ + ‖d₀‖` with `u₁ = 0`.
pub fn check_boundary_trace(grid: &RegionGrid, template: &ProblemTemplate) -> Result<EstimateReport> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "the grid is empty after region filtering".into(),
        ));
    }
    let samples = par_map(&points, template.threads, |pt| {
        let run = || -> Result<Sample> {
            let t = template;
            let nx = t.nx_for(pt.lambda);
            let data = t.data(nx);
            let zero = vec![ZERO; t.a.rows()];
            let cache = build_cache(&t.a, &t.h, *pt)?;
            let prof = solve_robin_with_cache(&cache, &t.a, &data.f, &data.d0, &zero, t.p, t.norm_weight)?;
            let lhs = (1.0 + pt.mu.norm()) * t.norm_weight * vec_norm2(&prof.u[0]);
            let rhs = prof.norms.f + t.norm_weight * vec_norm2(&data.d0);
            Ok(Sample::measured(pt.lambda, pt.mu, lhs, rhs))
        };
        run().unwrap_or_else(|e| Sample::failed(pt.lambda, pt.mu, e))
    });
    Ok(EstimateReport::from_samples_keyed("boundary_trace", samples, |l, m| {
        grid.mu_factor(l, m)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{interp_norm, q_of};

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::scalar(C64::new(x, 0.0))
    }

    #[test]
    fn rhs_zero_data() {
        let pt = SpectralPoint::real(16.0, 4.0);
        let n = DataNorms::default();
        assert_eq!(alpha_rhs(&pt, 2.0, &n), 0.0);
        assert_eq!(beta_rhs(&pt, 2.0, &n), 0.0);
        assert_eq!(dirichlet_rhs(&pt, 2.0, &n), 0.0);
    }

    #[test]
    fn alpha_scalar_u1_term() {
        let a = scalar(-1.0);
        let pt = SpectralPoint::real(16.0, 0.0);
        let interp = interp_norm(&[ONE], &a, 2.0).unwrap();
        let n = DataNorms {
            u1: 1.0,
            u1_interp: interp,
            ..DataNorms::default()
        };
        let want = 16f64.powf(0.75) + interp;
        assert!((alpha_rhs(&pt, 2.0, &n) - want).abs() < 1e-14);
        assert!((16f64.powf(0.75) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_weight_with_coupled_mu() {
        for l in [1.0, 10.0, 1e3, 1e6] {
            let pt = SpectralPoint::real(l, l);
            let n = DataNorms {
                f: 1.0,
                ..DataNorms::default()
            };
            let w = alpha_rhs(&pt, 2.0, &n);
            assert!(w > 1.0 && w <= 2.0);
        }
    }

    #[test]
    fn beta_scalar_arithmetic() {
        let (a, h) = (scalar(-1.0), scalar(0.1));
        let pt = SpectralPoint::real(100.0, 0.0);
        let cache = build_cache(&a, &h, pt).unwrap();
        let w = q_minus_h_solve(&cache, &[ONE]).unwrap();
        let want = 1.0 / (-(101f64.sqrt()) - 0.1);
        assert!((w[0].re - want).abs() < 1e-14);
        assert!((q_of(&a, pt.lambda).unwrap()[(0, 0)].re + 101f64.sqrt()).abs() < 1e-13);
        let wi = interp_norm(&w, &a, 2.0).unwrap();
        let n = DataNorms {
            d0: 1.0,
            w: want.abs(),
            w_interp: wi,
            ..DataNorms::default()
        };
        let direct = 1.0 + wi + 100f64.powf(0.75) * want.abs();
        assert!((beta_rhs(&pt, 2.0, &n) - direct).abs() < 1e-12);
    }

    #[test]
    fn zero_data_all_skipped() {
        let a = crate::operators::dirichlet_laplacian_1d(4);
        let mut t = ProblemTemplate::new(a.clone(), -&a);
        t.mask = DataMask::NONE;
        let grid = RegionGrid {
            lambda_moduli: vec![10.0, 100.0],
            lambda_args: vec![0.0],
            mu_moduli: vec![],
            mu_args: vec![],
            mu_scale: Default::default(),
            filter: super::super::grid::RegionFilter::Sector,
            phi0: crate::calculus::DEFAULT_PHI,
            phi1: crate::calculus::DEFAULT_PHI,
        };
        let r = check_sharp_estimate(EstimateCase::Dirichlet, &grid, &t).unwrap();
        assert_eq!(r.skipped, 2);
        assert!(r.points.is_empty());
    }

    #[test]
    fn dirichlet_scalar_ratio_matches_closed_form() {
        // a = −1, f = 0, u₀ = 0, u₁ = 1: u = sinh(kx)/sinh(k), k = √(1+λ)
        let a = scalar(-1.0);
        let mut t = ProblemTemplate::new(a.clone(), a.clone());
        t.norm_weight = 1.0;
        t.nodes_per_layer = 40.0;
        t.mask = DataMask {
            f: false,
            d0: false,
            u0: false,
            u1: true,
        };
        let lam = 50.0;
        let grid = RegionGrid {
            lambda_moduli: vec![lam],
            lambda_args: vec![0.0],
            mu_moduli: vec![],
            mu_args: vec![],
            mu_scale: Default::default(),
            filter: super::super::grid::RegionFilter::Sector,
            phi0: crate::calculus::DEFAULT_PHI,
            phi1: crate::calculus::DEFAULT_PHI,
        };
        let r = check_sharp_estimate(EstimateCase::Dirichlet, &grid, &t).unwrap();
        let u1 = t.data(3).u1[0].norm();
        let k = (1.0 + lam).sqrt();
        // ∫ sinh²(kx)dx/sinh²(k) = (sinh(2k)/(4k) − 1/2)/sinh²(k)
        let l2 = ((((2.0 * k).sinh() / (4.0 * k)) - 0.5) / k.sinh().powi(2)).sqrt() * u1;
        let lhs = (1.0 + lam) * l2;
        let rhs = interp_norm(&t.data(3).u1, &a, 2.0).unwrap() + lam.powf(0.75) * u1;
        let got = r.points[0].ratio;
        assert!((got - lhs / rhs).abs() < 1e-3 * lhs / rhs, "{got} vs {}", lhs / rhs);
    }

    #[test]
    fn ratios_invariant_under_data_scaling() {
        let a = crate::operators::dirichlet_laplacian_1d(6);
        let grid = RegionGrid {
            lambda_moduli: vec![20.0, 200.0],
            lambda_args: vec![0.0, 1.0],
            mu_moduli: vec![100.0],
            mu_args: vec![0.0],
            mu_scale: Default::default(),
            filter: super::super::grid::RegionFilter::Omega { r: 4.0 },
            phi0: crate::calculus::DEFAULT_PHI,
            phi1: crate::calculus::DEFAULT_PHI,
        };
        let base = ProblemTemplate::new(a.clone(), -&a);
        let mut scaled = base.clone();
        scaled.scale = C64::new(-3.5, 2.0);
        let r0 = check_sharp_estimate(EstimateCase::First, &grid, &base).unwrap();
        let r1 = check_sharp_estimate(EstimateCase::First, &grid, &scaled).unwrap();
        assert_eq!(r0.points.len(), r1.points.len());
        for (x, y) in r0.points.iter().zip(&r1.points) {
            assert!((x.ratio - y.ratio).abs() <= 1e-12 * x.ratio);
        }
    }
}
