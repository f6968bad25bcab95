//! Empirical Λ-invertibility thresholds by doubling.

use serde::{Deserialize, Serialize};

use super::grid::{MuScale, RegionFilter, RegionGrid};
use super::par_map;
use super::report::{EstimateReport, Sample};
use crate::calculus::{build_cache, CalculusCache, SpectralPoint, DEFAULT_PHI};
use crate::error::{Error, Result};
use crate::matfun::{inverse, opnorm2, ComplexMatrix, C64};

/// Doubling stops with `RegionNotFound` beyond this threshold.
pub const MAX_THRESHOLD: f64 = 1_099_511_627_776.0; // 2^40

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionCase {
    /// Ω, contraction (est).
    First,
    /// Π, contractions (est2) and (est Q-H).
    Second,
}

/// Grid shape relative to the threshold t: `|λ| = t·λ-factor`. In the
/// first case `|μ| = t·μ-factor`; in the second `|μ|` is taken as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionTemplate {
    pub lambda_factors: Vec<f64>,
    pub lambda_args: Vec<f64>,
    pub mu_factors: Vec<f64>,
    pub mu_args: Vec<f64>,
    #[serde(default)]
    pub mu_scale: MuScale,
    pub phi0: f64,
    pub phi1: f64,
    /// Π exponent ε (second case only).
    pub epsilon: f64,
    pub start: f64,
    #[serde(default = "one")]
    pub threads: usize,
}

fn one() -> usize {
    1
}

impl RegionTemplate {
    pub fn new(lambda_factors: Vec<f64>, mu_factors: Vec<f64>) -> Self {
        Self {
            lambda_factors,
            lambda_args: vec![0.0, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2],
            mu_factors,
            mu_args: vec![0.0],
            mu_scale: Default::default(),
            phi0: DEFAULT_PHI,
            phi1: DEFAULT_PHI,
            epsilon: 0.5,
            start: 1.0,
            threads: 1,
        }
    }

    pub fn grid(&self, case: RegionCase, threshold: f64) -> RegionGrid {
        let scale = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<_>>();
        let mu_first = match self.mu_scale {
            MuScale::Absolute => scale(&self.mu_factors, threshold),
            MuScale::Edge => self.mu_factors.clone(),
        };
        let (mu_moduli, filter) = match case {
            RegionCase::First => (mu_first, RegionFilter::Omega { r: threshold }),
            RegionCase::Second => (
                self.mu_factors.clone(),
                RegionFilter::Pi {
                    rho: threshold,
                    epsilon: self.epsilon,
                },
            ),
        };
        RegionGrid {
            lambda_moduli: scale(&self.lambda_factors, threshold),
            lambda_args: self.lambda_args.clone(),
            mu_moduli,
            mu_args: self.mu_args.clone(),
            mu_scale: self.mu_scale,
            filter,
            phi0: self.phi0,
            phi1: self.phi1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionPoint {
    pub lambda: C64,
    pub mu: C64,
    /// First case: [(est)]. Second case: [‖H_μQ⁻¹‖, (est2) second term, (est Q-H)].
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub case: RegionCase,
    /// Empirical r₀ (first case) or ρ₀ (second case).
    pub threshold: f64,
    pub doublings: usize,
    pub contraction_max: f64,
    pub contraction: Vec<ContractionPoint>,
    /// `(1+|μ|)‖Λ⁻¹‖` (first) or `(1+|λ|)^{1/2}‖Λ⁻¹‖` (second).
    pub lambda_inverse: EstimateReport,
    /// `‖Q²Λ⁻¹‖(1+|μ|)/(1+|λ|+|μ|)` (first) or `‖QΛ⁻¹‖` (second).
    pub q_lambda_inverse: EstimateReport,
    /// `‖Q²(Q−H_μ)⁻¹Q⁻¹‖`, second case only.
    pub stab_op: Option<EstimateReport>,
}

/// `(I − e^{2Q})⁻¹(I + e^{2Q})Q H_μ⁻¹`.
fn est_first(cache: &CalculusCache) -> Result<f64> {
    let n = cache.dim();
    let eye = ComplexMatrix::identity(n);
    let h_inv = inverse(cache.h_mu())?;
    let m = &(cache.inv_i_minus_e2q() * &(&eye + cache.exp_2q())) * &(cache.q_lambda() * &h_inv);
    opnorm2(&m)
}

fn est_second(cache: &CalculusCache) -> Result<Vec<f64>> {
    let n = cache.dim();
    let eye = ComplexMatrix::identity(n);
    let q = cache.q_lambda();
    let hq = cache.h_mu() * &cache.q_inverse();
    let plus_inv = inverse(&(&eye + cache.exp_2q()))?;
    let second = &(&plus_inv * &(&eye - cache.exp_2q())) * &hq;
    let qmh_inv = inverse(&(q - cache.h_mu())).map_err(|_| Error::QminusHSingular)?;
    let qh = &(cache.exp_2q() * &(q + cache.h_mu())) * &qmh_inv;
    Ok(vec![opnorm2(&hq)?, opnorm2(&second)?, opnorm2(&qh)?])
}

/// Contraction quantities at one point; any failure reads as +∞.
pub fn contraction_values(case: RegionCase, a: &ComplexMatrix, h: &ComplexMatrix, point: &SpectralPoint) -> Vec<f64> {
    let run = || -> Result<Vec<f64>> {
        let cache = build_cache(a, h, *point)?;
        match case {
            RegionCase::First => Ok(vec![est_first(&cache)?]),
            RegionCase::Second => est_second(&cache),
        }
    };
    run().unwrap_or_else(|_| vec![f64::INFINITY])
}

fn accepted(values: &[f64]) -> bool {
    values.iter().all(|v| *v <= 0.5)
}

/// Doubles the threshold from `template.start` until every grid point
/// satisfies the contraction bounds, then measures the weighted Λ⁻¹ norms
/// on the accepted grid.
pub fn check_lambda_regions(
    case: RegionCase,
    template: &RegionTemplate,
    a: &ComplexMatrix,
    h: &ComplexMatrix,
) -> Result<RegionReport> {
    if !(template.start > 0.0) {
        return Err(Error::InvalidArgument("start threshold must be positive".into()));
    }
    let mut threshold = template.start;
    let mut doublings = 0;
    let (points, contraction) = loop {
        let points = template.grid(case, threshold).points();
        if points.is_empty() {
            return Err(Error::InvalidArgument("the region grid is empty".into()));
        }
        let values = par_map(&points, template.threads, |pt| contraction_values(case, a, h, pt));
        if values.iter().all(|v| accepted(v)) {
            break (points, values);
        }
        threshold *= 2.0;
        doublings += 1;
        if threshold > MAX_THRESHOLD {
            return Err(Error::RegionNotFound(threshold));
        }
    };
    let contraction: Vec<ContractionPoint> = points
        .iter()
        .zip(contraction)
        .map(|(p, values)| ContractionPoint {
            lambda: p.lambda,
            mu: p.mu,
            values,
        })
        .collect();
    let contraction_max = contraction
        .iter()
        .flat_map(|c| c.values.iter().copied())
        .fold(0.0, f64::max);

    let weighted = par_map(&points, template.threads, |pt| weighted_norms(case, a, h, pt));
    let split = |k: usize| -> Vec<Sample> {
        points
            .iter()
            .zip(&weighted)
            .map(|(pt, w)| match w {
                Ok(v) => Sample::measured(pt.lambda, pt.mu, v[k], 1.0),
                Err(e) => Sample::failed(pt.lambda, pt.mu, e),
            })
            .collect()
    };
    let grid = template.grid(case, threshold);
    let report =
        |label: String, k: usize| EstimateReport::from_samples_keyed(label, split(k), |l, m| grid.mu_factor(l, m));
    let prefix = match case {
        RegionCase::First => "first",
        RegionCase::Second => "second",
    };
    Ok(RegionReport {
        case,
        threshold,
        doublings,
        contraction_max,
        contraction,
        lambda_inverse: report(format!("{prefix}_lambda_inverse"), 0),
        q_lambda_inverse: report(format!("{prefix}_q_lambda_inverse"), 1),
        stab_op: (case == RegionCase::Second).then(|| report("second_stab_op".into(), 2)),
    })
}

fn weighted_norms(case: RegionCase, a: &ComplexMatrix, h: &ComplexMatrix, pt: &SpectralPoint) -> Result<Vec<f64>> {
    let cache = build_cache(a, h, *pt)?;
    let lam_inv = cache
        .lambda_det_inverse()
        .ok_or_else(|| Error::InvalidArgument("missing Λ".into()))?;
    let q = cache.q_lambda();
    let (l, m) = (pt.lambda.norm(), pt.mu.norm());
    let inv_norm = opnorm2(&lam_inv)?;
    match case {
        RegionCase::First => {
            let q2 = q * &(q * &lam_inv);
            Ok(vec![(1.0 + m) * inv_norm, opnorm2(&q2)? * (1.0 + m) / (1.0 + l + m)])
        }
        RegionCase::Second => {
            let qmh_inv = inverse(&(q - cache.h_mu())).map_err(|_| Error::QminusHSingular)?;
            let stab = &(q * &(q * &qmh_inv)) * &cache.q_inverse();
            Ok(vec![
                (1.0 + l).sqrt() * inv_norm,
                opnorm2(&(q * &lam_inv))?,
                opnorm2(&stab)?,
            ])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::grid::log_space;

    fn scalar(x: f64) -> ComplexMatrix {
        ComplexMatrix::scalar(C64::new(x, 0.0))
    }

    #[test]
    fn scalar_wentzell_contraction_by_hand() {
        let (a, h) = (scalar(-1.0), scalar(1.0));
        let pt = SpectralPoint::real(100.0, 10.0);
        let got = contraction_values(RegionCase::First, &a, &h, &pt)[0];
        let q = -(101f64.sqrt());
        let e = (2.0 * q).exp();
        let want = ((1.0 + e) / (1.0 - e) * q / 11.0).abs();
        assert!((got - want).abs() < 1e-12 * want);
        assert!(got <= 0.5 || want > 0.5);
    }

    #[test]
    fn scalar_second_case_decay() {
        let (a, h) = (scalar(-1.0), scalar(0.1));
        for l in [10.0, 100.0, 1000.0] {
            let pt = SpectralPoint::real(l, 0.0).with_epsilon(0.5);
            let v = contraction_values(RegionCase::Second, &a, &h, &pt);
            let q = -((1.0 + l) as f64).sqrt();
            let want = ((2.0 * q).exp() * (q + 0.1) / (q - 0.1)).abs();
            assert!((v[2] - want).abs() < 1e-12 * want.max(1e-300));
            assert!((v[0] - 0.1 / q.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_h_second_case_closed_form() {
        // H = 0: H_μQ⁻¹ = μQ⁻¹, so ‖·‖ ≤ 1/2 iff |μ| ≤ √(1+λ)/2 for a = −1, λ > 0
        let a = scalar(-1.0);
        let h = scalar(0.0);
        let mu = 5.0;
        let lam_edge: f64 = 4.0 * mu * mu - 1.0;
        let below = contraction_values(
            RegionCase::Second,
            &a,
            &h,
            &SpectralPoint::real(lam_edge * 0.9, mu).with_epsilon(0.5),
        );
        let above = contraction_values(
            RegionCase::Second,
            &a,
            &h,
            &SpectralPoint::real(lam_edge * 1.1, mu).with_epsilon(0.5),
        );
        assert!(below[0] > 0.5 && above[0] < 0.5);
    }

    #[test]
    fn doubling_finds_scalar_threshold() {
        let (a, h) = (scalar(-1.0), scalar(1.0));
        let mut t = RegionTemplate::new(log_space(1.0, 1e2, 3), log_space(1.0, 1e2, 3));
        t.lambda_args = vec![0.0];
        let rep = check_lambda_regions(RegionCase::First, &t, &a, &h).unwrap();
        assert!(rep.contraction_max <= 0.5);
        assert!(rep.threshold >= 1.0);
        for c in &rep.contraction {
            assert!(c.values[0] <= 0.5);
        }
    }
}
