use serde::{Deserialize, Serialize};

use crate::calculus::{region_membership, SpectralPoint, DEFAULT_PHI};
use crate::matfun::C64;
use crate::operators::in_sector;

/// `count` points from `lo` to `hi`, evenly spaced in log.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect();
    // exact endpoints, so that a grid starting at a region threshold is kept
    out[0] = lo;
    out[count - 1] = hi;
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionFilter {
    Omega {
        r: f64,
    },
    Pi {
        rho: f64,
        epsilon: f64,
    },
    /// λ in the sector only; μ is fixed at 0.
    Sector,
}

/// How `mu_moduli` are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuScale {
    /// Plain moduli.
    #[default]
    Absolute,
    /// Multiples of the region edge at the current λ: `√(r|λ|)` for Ω,
    /// `(|λ|/ρ)^ε` for Π. A λ-series then runs at a fixed relative position.
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub lambda_moduli: Vec<f64>,
    pub lambda_args: Vec<f64>,
    #[serde(default)]
    pub mu_moduli: Vec<f64>,
    #[serde(default)]
    pub mu_args: Vec<f64>,
    #[serde(default)]
    pub mu_scale: MuScale,
    pub filter: RegionFilter,
    #[serde(default = "default_phi")]
    pub phi0: f64,
    #[serde(default = "default_phi")]
    pub phi1: f64,
}

fn default_phi() -> f64 {
    DEFAULT_PHI
}

impl RegionGrid {
    fn edge(&self, lambda: f64) -> f64 {
        match (self.mu_scale, self.filter) {
            // nudged inward so that factor 1 survives the membership test
            (MuScale::Edge, RegionFilter::Omega { r }) => (r * lambda).sqrt() * (1.0 + 1e-12),
            (MuScale::Edge, RegionFilter::Pi { rho, epsilon }) => (lambda / rho).powf(epsilon) * (1.0 - 1e-12),
            _ => 1.0,
        }
    }

    /// `|μ|` in grid units: the μ modulus before edge scaling.
    pub fn mu_factor(&self, lambda: C64, mu: C64) -> f64 {
        mu.norm() / self.edge(lambda.norm())
    }

    fn mu_values(&self, lambda: f64) -> Vec<C64> {
        let mut out = Vec::new();
        let edge = self.edge(lambda);
        for m in self.mu_moduli.iter().map(|m| m * edge) {
            if m == 0.0 {
                out.push(C64::new(0.0, 0.0));
                continue;
            }
            let args: &[f64] = if self.mu_args.is_empty() { &[0.0] } else { &self.mu_args };
            out.extend(args.iter().map(|&a| C64::from_polar(m, a)));
        }
        if out.is_empty() {
            out.push(C64::new(0.0, 0.0));
        }
        out
    }

    /// Grid points that pass the filter, λ-major order.
    pub fn points(&self) -> Vec<SpectralPoint> {
        let mut out = Vec::new();
        for &arg in &self.lambda_args {
            for &m in &self.lambda_moduli {
                let lambda = C64::from_polar(m, arg);
                let mus = match self.filter {
                    RegionFilter::Sector => vec![C64::new(0.0, 0.0)],
                    _ => self.mu_values(m),
                };
                for &mu in &mus {
                    let mut point = SpectralPoint::new(lambda, mu).with_angles(self.phi0, Some(self.phi1));
                    let keep = match self.filter {
                        RegionFilter::Omega { r } => region_membership(&point, r, 1.0).in_omega,
                        RegionFilter::Pi { rho, epsilon } => {
                            point = point.with_epsilon(epsilon);
                            region_membership(&point, 1.0, rho).in_pi
                        }
                        RegionFilter::Sector => m > 0.0 && in_sector(lambda, self.phi0),
                    };
                    if keep {
                        out.push(point);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1.0, 1e4, 5);
        assert_eq!(v.len(), 5);
        assert!((v[2] - 100.0).abs() < 1e-9);
        assert!((v[4] - 1e4).abs() < 1e-8);
    }

    #[test]
    fn omega_filter_respected() {
        let grid = RegionGrid {
            lambda_moduli: log_space(4.0, 4e4, 5),
            lambda_args: vec![0.0, 1.0],
            mu_moduli: log_space(4.0, 4e4, 5),
            mu_args: vec![0.0],
            mu_scale: MuScale::Absolute,
            filter: RegionFilter::Omega { r: 4.0 },
            phi0: DEFAULT_PHI,
            phi1: DEFAULT_PHI,
        };
        let pts = grid.points();
        assert!(!pts.is_empty() && pts.len() < 50);
        for p in pts {
            assert!(region_membership(&p, 4.0, 1.0).in_omega);
        }
    }

    #[test]
    fn pi_filter_with_zero_mu() {
        let grid = RegionGrid {
            lambda_moduli: vec![10.0, 100.0],
            lambda_args: vec![0.0],
            mu_moduli: vec![0.0, 5.0],
            mu_args: vec![std::f64::consts::FRAC_PI_4],
            mu_scale: MuScale::Absolute,
            filter: RegionFilter::Pi {
                rho: 10.0,
                epsilon: 0.5,
            },
            phi0: DEFAULT_PHI,
            phi1: DEFAULT_PHI,
        };
        // μ = 0 always passes; |μ| = 5 needs |λ| ≥ 10·25
        assert_eq!(grid.points().len(), 2);
    }
}
