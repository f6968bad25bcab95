//! Representation solver against the finite-difference oracle.

use serde::{Deserialize, Serialize};

use super::estimates::{DataMask, ProblemData, ProblemTemplate};
use crate::calculus::{lp_grid_norm, SpectralPoint};
use crate::error::Result;
use crate::matfun::{vec_sub, ComplexMatrix, C64};
use crate::operators::{build_pair, OperatorKind, OperatorSpec};
use crate::oracle::{assemble_abstract_bvp, solve_block_tridiag, BoundaryKind};
use crate::solver::{solve_dirichlet, solve_robin, DirichletProblem, RobinProblem, SolutionProfile};

/// Time nodes of the flattened Caputo family.
pub const CAPUTO_TIME_NODES: usize = 8;

/// The worked example families with their boundary data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleFamily {
    /// `H = −A`, coupling `μ = λ`; data f and d₀.
    Wentzell,
    /// Volterra boundary operator; homogeneous boundary data.
    Volterra,
    /// `A = −L²` with an oblique-derivative H; homogeneous boundary data.
    Oblique,
    /// Flattened (y, t) space with a Caputo-derivative H; data f, d₀, u₁.
    Caputo,
}

impl ExampleFamily {
    pub const ALL: [ExampleFamily; 4] = [
        ExampleFamily::Wentzell,
        ExampleFamily::Volterra,
        ExampleFamily::Oblique,
        ExampleFamily::Caputo,
    ];

    /// Operator descriptions for total dimension n. The Caputo family uses
    /// `n / CAPUTO_TIME_NODES` spatial nodes.
    pub fn specs(self, n: usize) -> (OperatorSpec, OperatorSpec) {
        use OperatorKind::*;
        let mt = CAPUTO_TIME_NODES;
        let ny = if self == ExampleFamily::Caputo {
            (n / mt).max(2)
        } else {
            n
        };
        let lap = OperatorSpec::spatial(Laplacian1d, ny);
        match self {
            ExampleFamily::Wentzell => (lap, OperatorSpec::spatial(Wentzell, n)),
            ExampleFamily::Volterra => (lap, OperatorSpec::spatial(Volterra, n)),
            ExampleFamily::Oblique => (OperatorSpec::spatial(FourthOrder, n), OperatorSpec::spatial(Oblique, n)),
            ExampleFamily::Caputo => (
                lap,
                OperatorSpec {
                    kind: Caputo,
                    dim: ny * mt,
                    grid_step: 1.0 / (mt - 1) as f64,
                    parameters: Default::default(),
                }
                .with_parameter("mt", mt as f64),
            ),
        }
    }

    pub fn operators(self, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let (a, h) = self.specs(n);
        build_pair(&a, &h)
    }

    pub fn mask(self) -> DataMask {
        match self {
            ExampleFamily::Wentzell => DataMask {
                f: true,
                d0: true,
                u0: false,
                u1: false,
            },
            ExampleFamily::Volterra | ExampleFamily::Oblique => DataMask::F_ONLY,
            ExampleFamily::Caputo => DataMask::ALL,
        }
    }

    /// The Robin spectral point used for a given λ.
    pub fn point(self, lambda: C64) -> SpectralPoint {
        match self {
            ExampleFamily::Wentzell => SpectralPoint::new(lambda, lambda),
            _ => SpectralPoint::new(lambda, C64::new(0.0, 0.0)),
        }
    }

    /// Π exponent ε of the second-case families.
    pub fn epsilon(self) -> Option<f64> {
        match self {
            ExampleFamily::Wentzell => None,
            ExampleFamily::Oblique => Some(0.25),
            ExampleFamily::Volterra | ExampleFamily::Caputo => Some(0.5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub nx: usize,
    /// `‖u_solver − u_oracle‖/‖u_oracle‖` in the L²-grid norm.
    pub relative_difference: f64,
    pub residual_interior: f64,
}

fn relative_difference(solver: &[Vec<C64>], oracle: &[Vec<C64>]) -> f64 {
    let diff: Vec<Vec<C64>> = solver.iter().zip(oracle).map(|(a, b)| vec_sub(a, b)).collect();
    let den = lp_grid_norm(oracle, 2.0);
    if den == 0.0 {
        return lp_grid_norm(&diff, 2.0);
    }
    lp_grid_norm(&diff, 2.0) / den
}

pub fn robin_oracle_difference(problem: &RobinProblem) -> Result<(SolutionProfile, OracleComparison)> {
    let prof = solve_robin(problem)?;
    let sys = assemble_abstract_bvp(
        &problem.a,
        &problem.h,
        problem.point.lambda,
        problem.point.mu,
        &problem.f_samples,
        &problem.d0,
        &problem.u1,
        BoundaryKind::Robin,
    )?;
    let oracle = solve_block_tridiag(&sys)?;
    let cmp = OracleComparison {
        nx: problem.nx,
        relative_difference: relative_difference(&prof.u, &oracle),
        residual_interior: prof.residual_interior,
    };
    Ok((prof, cmp))
}

pub fn dirichlet_oracle_difference(problem: &DirichletProblem) -> Result<(SolutionProfile, OracleComparison)> {
    let prof = solve_dirichlet(problem)?;
    let sys = assemble_abstract_bvp(
        &problem.a,
        &problem.a,
        problem.point.lambda,
        problem.point.mu,
        &problem.f_samples,
        &problem.u0,
        &problem.u1,
        BoundaryKind::Dirichlet,
    )?;
    let oracle = solve_block_tridiag(&sys)?;
    let cmp = OracleComparison {
        nx: problem.nx,
        relative_difference: relative_difference(&prof.u, &oracle),
        residual_interior: prof.residual_interior,
    };
    Ok((prof, cmp))
}

/// `log₂(coarse/fine)` for a halving of h.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Solver-vs-oracle differences at `nx` and at the halved step `2nx − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub coarse: OracleComparison,
    pub fine: OracleComparison,
    /// Order of the solver-vs-oracle difference.
    pub order: f64,
    /// Order of the independent interior residual.
    pub residual_order: f64,
}

fn robin_problem(template: &ProblemTemplate, point: SpectralPoint, data: ProblemData, nx: usize) -> RobinProblem {
    RobinProblem {
        a: template.a.clone(),
        h: template.h.clone(),
        point,
        f_samples: data.f,
        d0: data.d0,
        u1: data.u1,
        p: template.p,
        nx,
        norm_weight: template.norm_weight,
    }
}

pub fn robin_refinement(template: &ProblemTemplate, point: SpectralPoint, nx: usize) -> Result<RefinementStudy> {
    let run = |m: usize| robin_oracle_difference(&robin_problem(template, point, template.data(m), m)).map(|r| r.1);
    let coarse = run(nx)?;
    let fine = run(2 * nx - 1)?;
    Ok(RefinementStudy {
        order: observed_order(coarse.relative_difference, fine.relative_difference),
        residual_order: observed_order(coarse.residual_interior, fine.residual_interior),
        coarse,
        fine,
    })
}

pub fn dirichlet_refinement(template: &ProblemTemplate, lambda: C64, nx: usize) -> Result<RefinementStudy> {
    let run = |m: usize| {
        let data = template.data(m);
        let problem = DirichletProblem {
            a: template.a.clone(),
            point: SpectralPoint::new(lambda, C64::new(0.0, 0.0)),
            f_samples: data.f,
            u0: data.u0,
            u1: data.u1,
            p: template.p,
            nx: m,
            norm_weight: template.norm_weight,
        };
        dirichlet_oracle_difference(&problem).map(|r| r.1)
    };
    let coarse = run(nx)?;
    let fine = run(2 * nx - 1)?;
    Ok(RefinementStudy {
        order: observed_order(coarse.relative_difference, fine.relative_difference),
        residual_order: observed_order(coarse.residual_interior, fine.residual_interior),
        coarse,
        fine,
    })
}
