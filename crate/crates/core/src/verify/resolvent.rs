//! Resolvent-type bounds: Dore–Yakubov estimates for `D_λ = L + λ`,
//! convolution decay, and generation scans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::estimates::ProblemTemplate;
use super::par_map;
use super::report::{EstimateReport, Sample, Verdict};
use crate::calculus::{build_cache, build_cache_dirichlet, lp_grid_norm_weighted, t_of, SpectralPoint};
use crate::data::DataGenerator;
use crate::error::{Error, Result};
use crate::matfun::{inverse, opnorm2, sqrtm_principal, vec_add, vec_scale, ComplexMatrix, C64, ZERO};
use crate::operators::in_sector;
use crate::solver::{duhamel_terms, solve_dirichlet_with_cache, solve_robin_with_cache, z_norm, ProductSpaceOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoreYakubovReport {
    /// `(|λ|+|ν|+1)‖(D_λ+ν)⁻¹‖`
    pub resolvent: EstimateReport,
    /// `(|ν|+√(|λ|+1))‖(D_λ^{1/2}+ν)⁻¹‖`
    pub sqrt_resolvent: EstimateReport,
    /// `√(|λ|+1)‖D_λ^{−1/2}‖`
    pub inverse_sqrt: EstimateReport,
    /// `‖T_λ‖/√|λ|`
    pub t_lambda: EstimateReport,
}

impl DoreYakubovReport {
    pub fn reports(&self) -> [&EstimateReport; 4] {
        [
            &self.resolvent,
            &self.sqrt_resolvent,
            &self.inverse_sqrt,
            &self.t_lambda,
        ]
    }
}

/// How `nu_grid` entries are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuScale {
    #[default]
    Absolute,
    /// Multiples of each bound's own scale: `ν·(|λ|+1)` for the resolvent,
    /// `ν·√(|λ|+1)` for the square-root resolvent.
    Natural,
}

/// Measures the Dore–Yakubov quantities for `l = −A` over `λ ∈ S_φ`
/// (`lambda_grid`) and shifts `ν` (`nu_grid`). In the reports ν takes the
/// place of μ.
pub fn check_dore_yakubov(
    l: &ComplexMatrix,
    phi: f64,
    lambda_grid: &[C64],
    nu_grid: &[C64],
    nu_scale: NuScale,
    threads: usize,
) -> Result<DoreYakubovReport> {
    if let Some(bad) = lambda_grid.iter().find(|z| !in_sector(**z, phi) || z.norm() == 0.0) {
        return Err(Error::InvalidArgument(format!("λ = {bad} is outside S_φ")));
    }
    let a = -l;
    let per_lambda = par_map(lambda_grid, threads, |&lambda| -> Vec<(usize, Sample)> {
        let zero = C64::new(0.0, 0.0);
        let lam1 = lambda.norm() + 1.0;
        let d = l.shift(lambda);
        let mut out = Vec::new();
        let root = match sqrtm_principal(&d) {
            Ok(r) => r,
            Err(e) => {
                for k in 0..4 {
                    out.push((k, Sample::failed(lambda, zero, &e)));
                }
                return out;
            }
        };
        let (s0, s1) = match nu_scale {
            NuScale::Absolute => (1.0, 1.0),
            NuScale::Natural => (lam1, lam1.sqrt()),
        };
        for &nu_factor in nu_grid {
            let nu = nu_factor * s0;
            let r = inverse(&d.shift(nu)).and_then(|m| opnorm2(&m));
            out.push((
                0,
                match r {
                    Ok(v) => Sample::measured(lambda, nu, (lam1 + nu.norm()) * v, 1.0),
                    Err(e) => Sample::failed(lambda, nu, e),
                },
            ));
            let nu = nu_factor * s1;
            let s = inverse(&root.shift(nu)).and_then(|m| opnorm2(&m));
            out.push((
                1,
                match s {
                    Ok(v) => Sample::measured(lambda, nu, (nu.norm() + lam1.sqrt()) * v, 1.0),
                    Err(e) => Sample::failed(lambda, nu, e),
                },
            ));
        }
        let inv_sqrt = inverse(&root).and_then(|m| opnorm2(&m));
        out.push((
            2,
            match inv_sqrt {
                Ok(v) => Sample::measured(lambda, zero, lam1.sqrt() * v, 1.0),
                Err(e) => Sample::failed(lambda, zero, e),
            },
        ));
        let t = t_of(&a, lambda).and_then(|m| opnorm2(&m));
        out.push((
            3,
            match t {
                Ok(v) => Sample::measured(lambda, zero, v / lambda.norm().sqrt(), 1.0),
                Err(e) => Sample::failed(lambda, zero, e),
            },
        ));
        out
    });
    let mut buckets: [Vec<Sample>; 4] = Default::default();
    for (k, s) in per_lambda.into_iter().flatten() {
        buckets[k].push(s);
    }
    let [b0, b1, b2, b3] = buckets;
    let keyed = |label: &str, b: Vec<Sample>, scale: fn(f64) -> f64| match nu_scale {
        NuScale::Absolute => EstimateReport::from_samples(label, b),
        NuScale::Natural => EstimateReport::from_samples_keyed(label, b, |l, nu| nu.norm() / scale(l.norm() + 1.0)),
    };
    Ok(DoreYakubovReport {
        resolvent: keyed("dy_resolvent", b0, |x| x),
        sqrt_resolvent: keyed("dy_sqrt_resolvent", b1, f64::sqrt),
        inverse_sqrt: EstimateReport::from_samples("dy_inverse_sqrt", b2),
        t_lambda: EstimateReport::from_samples("dy_t_lambda", b3),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionReport {
    /// `√(|λ|+1)‖U_{λ,f}‖/‖f‖`
    pub decay: EstimateReport,
    /// `(√(|λ|+1)‖U‖ + ‖U′‖ + ‖Q_λU‖)/‖f‖`
    pub reg_max: EstimateReport,
}

/// `U_{λ,f}(x) = ∫₀^x e^{(x−s)Q_λ}f(s)ds` for `trials` seeded smooth `f`
/// per λ; each point keeps the worst trial. Uses `template.a`, `.p`,
/// `.seed`, the x-grid rule and the norm weight.
pub fn check_convolution_decay(
    template: &ProblemTemplate,
    lambda_grid: &[C64],
    trials: usize,
) -> Result<ConvolutionReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let (p, wgt) = (template.p, template.norm_weight);
    let n = template.a.rows();
    let per_lambda = par_map(lambda_grid, template.threads, |&lambda| -> [Sample; 2] {
        let zero = C64::new(0.0, 0.0);
        let run = || -> Result<[Sample; 2]> {
            let cache = build_cache_dirichlet(&template.a, SpectralPoint::new(lambda, zero))?;
            let q = cache.q_lambda();
            let nx = template.nx_for(lambda);
            let root = (lambda.norm() + 1.0).sqrt();
            let mut best = [(0.0, 0.0), (0.0, 0.0)];
            for t in 0..trials {
                let f = DataGenerator::new(template.seed.wrapping_add(t as u64)).smooth_profile(nx, n);
                let (i_prof, _) = duhamel_terms(&cache, &f, nx)?;
                let u: Vec<Vec<C64>> = i_prof
                    .iter()
                    .map(|v| vec_scale(&q.mul_vec(v), C64::new(2.0, 0.0)))
                    .collect();
                let gu: Vec<Vec<C64>> = u.iter().map(|v| q.mul_vec(v)).collect();
                let du: Vec<Vec<C64>> = gu.iter().zip(&f).map(|(g, fk)| vec_add(g, fk)).collect();
                let nf = lp_grid_norm_weighted(&f, p, wgt);
                let nu = lp_grid_norm_weighted(&u, p, wgt);
                let decay = root * nu;
                let reg = decay + lp_grid_norm_weighted(&du, p, wgt) + lp_grid_norm_weighted(&gu, p, wgt);
                for (slot, lhs) in best.iter_mut().zip([decay, reg]) {
                    if nf > 0.0 && (slot.1 == 0.0 || lhs / nf > slot.0 / slot.1) {
                        *slot = (lhs, nf);
                    }
                }
            }
            Ok(best.map(|(lhs, rhs)| Sample::measured(lambda, zero, lhs, rhs)))
        };
        run().unwrap_or_else(|e| [Sample::failed(lambda, zero, &e), Sample::failed(lambda, zero, &e)])
    });
    let (decay, reg): (Vec<Sample>, Vec<Sample>) = per_lambda.into_iter().map(|[a, b]| (a, b)).unzip();
    Ok(ConvolutionReport {
        decay: EstimateReport::from_samples("convolution_decay", decay),
        reg_max: EstimateReport::from_samples("convolution_reg_max", reg),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationOperator {
    /// 𝒫_{A,H,μ} on Z = Y × X (first case).
    ProductSpace,
    /// L_{A,H,μ} on Y with homogeneous Robin data (second case).
    SecondCase,
    /// L_A on Y with homogeneous Dirichlet data.
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationScan {
    pub operator: GenerationOperator,
    /// Arguments of the sampled rays.
    pub rays: Vec<f64>,
    pub radii: Vec<f64>,
    pub mu: C64,
    /// Ω threshold used by the product-space check.
    pub r: f64,
    /// Size of the fixed random input batch.
    pub batch: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayVerdict {
    pub arg: f64,
    pub slope: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub report: EstimateReport,
    pub rays: Vec<RayVerdict>,
    /// Largest |arg λ| such that every scanned ray up to it is flat.
    pub widest_flat_arg: Option<f64>,
}

fn generation_point(scan: &GenerationScan, template: &ProblemTemplate, lambda: C64) -> Result<Sample> {
    let (a, h) = (&template.a, &template.h);
    let n = a.rows();
    let (p, wgt) = (template.p, template.norm_weight);
    let nx = template.nx_for(lambda);
    let zero = vec![ZERO; n];
    let mut best = (0.0, 0.0);
    let mut keep = |out: f64, input: f64| {
        if input > 0.0 && (best.1 == 0.0 || out / input > best.0 / best.1) {
            best = (out, input);
        }
    };
    let inputs = |k: usize| {
        let mut g = DataGenerator::new(template.seed.wrapping_add(k as u64));
        let f = g.smooth_profile(nx, n);
        let tau = g.smooth_vector(n);
        (f, tau)
    };
    match scan.operator {
        GenerationOperator::ProductSpace => {
            let mut opts = ProductSpaceOptions::new(nx, scan.r);
            opts.p = p;
            opts.norm_weight = wgt;
            let point = opts.check_region(lambda, scan.mu)?;
            let cache = build_cache(a, h, point)?;
            for k in 0..scan.batch {
                let (f, tau) = inputs(k);
                let prof = solve_robin_with_cache(&cache, a, &f, &tau, &zero, p, wgt)?;
                keep(z_norm(&prof.u, &prof.u[0], p, wgt), z_norm(&f, &tau, p, wgt));
            }
        }
        GenerationOperator::SecondCase => {
            let cache = build_cache(a, h, SpectralPoint::new(lambda, scan.mu))?;
            for k in 0..scan.batch {
                let (f, _) = inputs(k);
                let prof = solve_robin_with_cache(&cache, a, &f, &zero, &zero, p, wgt)?;
                keep(prof.norms.u, prof.norms.f);
            }
        }
        GenerationOperator::Dirichlet => {
            let cache = build_cache_dirichlet(a, SpectralPoint::new(lambda, C64::new(0.0, 0.0)))?;
            for k in 0..scan.batch {
                let (f, _) = inputs(k);
                let prof = solve_dirichlet_with_cache(&cache, a, &f, &zero, &zero, p, wgt)?;
                keep(prof.norms.u, prof.norms.f);
            }
        }
    }
    Ok(Sample::measured(
        lambda,
        scan.mu,
        (1.0 + lambda.norm()) * best.0,
        best.1,
    ))
}

/// `(1+|λ|)·‖(𝒜 − λ)⁻¹‖`, the norm estimated as the largest gain over a
/// fixed seeded batch of smooth inputs.
pub fn scan_generation(scan: &GenerationScan, template: &ProblemTemplate) -> Result<GenerationReport> {
    if scan.batch == 0 || scan.rays.is_empty() || scan.radii.is_empty() {
        return Err(Error::InvalidArgument(
            "generation scan needs rays, radii and a batch".into(),
        ));
    }
    let lambdas: Vec<C64> = scan
        .rays
        .iter()
        .flat_map(|&arg| scan.radii.iter().map(move |&r| C64::from_polar(r, arg)))
        .collect();
    let samples = par_map(&lambdas, template.threads, |&lambda| {
        generation_point(scan, template, lambda).unwrap_or_else(|e| Sample::failed(lambda, scan.mu, e))
    });
    let mut per_ray: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for (k, s) in samples.iter().enumerate() {
        per_ray.entry(k / scan.radii.len()).or_default().push(s.clone());
    }
    let mut rays: Vec<RayVerdict> = per_ray
        .into_iter()
        .map(|(ray, s)| {
            let arg = scan.rays[ray];
            let r = EstimateReport::from_samples("ray", s);
            let verdict = if r.failures.is_empty() {
                r.verdict
            } else {
                Verdict::InsufficientData
            };
            RayVerdict {
                arg,
                slope: r.loglog_slopes.lambda,
                verdict,
            }
        })
        .collect();
    rays.sort_by(|x, y| x.arg.abs().total_cmp(&y.arg.abs()).then(x.arg.total_cmp(&y.arg)));
    let mut widest_flat_arg = None;
    for ray in &rays {
        if ray.verdict != Verdict::Flat {
            break;
        }
        widest_flat_arg = Some(ray.arg.abs());
    }
    let label = match scan.operator {
        GenerationOperator::ProductSpace => "generation_product_space",
        GenerationOperator::SecondCase => "generation_second_case",
        GenerationOperator::Dirichlet => "generation_dirichlet",
    };
    Ok(GenerationReport {
        report: EstimateReport::from_samples(label, samples),
        rays,
        widest_flat_arg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::dirichlet_laplacian_1d;

    #[test]
    fn scalar_dore_yakubov_values() {
        let l = ComplexMatrix::scalar(C64::new(1.0, 0.0));
        let lam = [C64::new(3.0, 0.0)];
        let nu = [C64::new(0.0, 0.0)];
        let r = check_dore_yakubov(&l, 3.0 * std::f64::consts::FRAC_PI_4, &lam, &nu, NuScale::Absolute, 1).unwrap();
        assert!((r.resolvent.points[0].ratio - 1.0).abs() < 1e-12);
        assert!((r.resolvent.points[0].ratio - 4.0 / (1.0 + lam[0] + nu[0]).norm()).abs() < 1e-12);
        // (0 + 2)·(1/2) = 1
        assert!((r.sqrt_resolvent.points[0].ratio - 1.0).abs() < 1e-12);
        assert!((r.inverse_sqrt.points[0].ratio - 1.0).abs() < 1e-12);
        assert!((r.t_lambda.points[0].ratio - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identity_replicates_scalar() {
        let lam = [C64::new(3.0, 0.0), C64::from_polar(10.0, 2.0)];
        let nu = [C64::new(0.0, 0.0), C64::from_polar(2.0, 0.5)];
        let phi = 3.0 * std::f64::consts::FRAC_PI_4;
        let s = check_dore_yakubov(&ComplexMatrix::identity(1), phi, &lam, &nu, NuScale::Absolute, 1).unwrap();
        let m = check_dore_yakubov(&ComplexMatrix::identity(5), phi, &lam, &nu, NuScale::Absolute, 1).unwrap();
        for (x, y) in s.reports().iter().zip(m.reports()) {
            for (p, q) in x.points.iter().zip(&y.points) {
                assert!((p.ratio - q.ratio).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn convolution_zero_and_scalar_limit() {
        // a = −1, f ≡ 1: U(x) = (e^{xq} − 1)/q, so √(1+λ)‖U‖ → 1 for large λ
        let a = ComplexMatrix::scalar(C64::new(-1.0, 0.0));
        let mut t = ProblemTemplate::new(a.clone(), a);
        t.norm_weight = 1.0;
        let lam = C64::new(1e4, 0.0);
        let cache = build_cache_dirichlet(&t.a, SpectralPoint::new(lam, C64::new(0.0, 0.0))).unwrap();
        let nx = t.nx_for(lam);
        let f = vec![vec![C64::new(1.0, 0.0)]; nx];
        let (i_prof, _) = duhamel_terms(&cache, &f, nx).unwrap();
        let q = cache.q_lambda()[(0, 0)];
        for (k, v) in i_prof.iter().enumerate() {
            let x = k as f64 / (nx - 1) as f64;
            let want = ((q * x).exp() - 1.0) / q;
            assert!((2.0 * q * v[0] - want).norm() < 1e-12);
        }
        let zero = vec![vec![ZERO]; nx];
        let (iz, _) = duhamel_terms(&cache, &zero, nx).unwrap();
        assert!(iz.iter().all(|v| v[0] == ZERO));
    }

    #[test]
    fn dirichlet_generation_modal_bound() {
        let n = 8;
        let a = dirichlet_laplacian_1d(n);
        let mut t = ProblemTemplate::new(a.clone(), a);
        t.nx_min = 33;
        let scan = GenerationScan {
            operator: GenerationOperator::Dirichlet,
            rays: vec![0.0],
            radii: vec![1.0, 10.0, 100.0],
            mu: C64::new(0.0, 0.0),
            r: 1.0,
            batch: 3,
        };
        let rep = scan_generation(&scan, &t).unwrap();
        for p in &rep.report.points {
            assert!(p.ratio <= 1.0 + 1e-9, "{}", p.ratio);
        }
    }
}
