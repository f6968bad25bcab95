//! Which sign in `Λ⁻¹ = (Q−H_μ)⁻¹(I ± e^{2Q}W)` matches a direct inverse,
//! where `W = R(I + e^{2Q}R)⁻¹` and `R = (Q+H_μ)(Q−H_μ)⁻¹`.

use serde::{Deserialize, Serialize};

use crate::calculus::{build_cache, SpectralPoint};
use crate::error::{Error, Result};
use crate::matfun::ComplexMatrix;
use crate::matfun::{inverse, C64};

/// Agreement threshold for a candidate formula.
pub const SIGN_MATCH_TOL: f64 = 1e-10;
/// A candidate "fails" only if it misses by at least this much.
pub const SIGN_FAIL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignOutcome {
    Minus,
    Plus,
    /// Both or neither candidate matches.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignProbePoint {
    pub lambda: C64,
    pub mu: C64,
    /// Relative Frobenius error of the minus-sign candidate.
    pub error_minus: f64,
    pub error_plus: f64,
    /// `‖e^{2Q}‖_F`; when negligible both candidates coincide.
    pub exp_2q_norm: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignProbeReport {
    pub points: Vec<SignProbePoint>,
    pub minus_matches: usize,
    pub plus_matches: usize,
    /// Points where the plus candidate misses by at least `SIGN_FAIL_TOL`.
    pub plus_fails: usize,
    pub outcome: SignOutcome,
}

fn probe_point(a: &ComplexMatrix, h: &ComplexMatrix, point: &SpectralPoint) -> Result<SignProbePoint> {
    let cache = build_cache(a, h, *point)?;
    let n = cache.dim();
    let eye = ComplexMatrix::identity(n);
    let q = cache.q_lambda();
    let e2 = cache.exp_2q();
    let qmh_inv = inverse(&(q - cache.h_mu())).map_err(|_| Error::QminusHSingular)?;
    let r = &(q + cache.h_mu()) * &qmh_inv;
    let w = &r * &inverse(&(&eye + &(e2 * &r)))?;
    let corr = e2 * &w;
    let minus = &qmh_inv * &(&eye - &corr);
    let plus = &qmh_inv * &(&eye + &corr);
    let direct = cache
        .lambda_det_inverse()
        .ok_or_else(|| Error::InvalidArgument("missing Λ".into()))?;
    let scale = direct.norm_fro();
    let error_minus = (&minus - &direct).norm_fro() / scale;
    let error_plus = (&plus - &direct).norm_fro() / scale;
    Ok(SignProbePoint {
        lambda: point.lambda,
        mu: point.mu,
        error_minus,
        error_plus,
        exp_2q_norm: e2.norm_fro(),
        degenerate: error_minus <= SIGN_MATCH_TOL && error_plus <= SIGN_MATCH_TOL,
    })
}

/// Compares both candidate formulas against the directly inverted Λ.
pub fn sign_probe_rel_lambda(
    a: &ComplexMatrix,
    h: &ComplexMatrix,
    points: &[SpectralPoint],
) -> Result<SignProbeReport> {
    let points = points
        .iter()
        .map(|p| probe_point(a, h, p))
        .collect::<Result<Vec<_>>>()?;
    let minus_matches = points.iter().filter(|p| p.error_minus <= SIGN_MATCH_TOL).count();
    let plus_matches = points.iter().filter(|p| p.error_plus <= SIGN_MATCH_TOL).count();
    let plus_fails = points.iter().filter(|p| p.error_plus >= SIGN_FAIL_TOL).count();
    let minus_fails = points.iter().filter(|p| p.error_minus >= SIGN_FAIL_TOL).count();
    let outcome = if minus_matches == points.len() && plus_fails > 0 {
        SignOutcome::Minus
    } else if plus_matches == points.len() && minus_fails > 0 {
        SignOutcome::Plus
    } else {
        SignOutcome::Undetermined
    };
    Ok(SignProbeReport {
        points,
        minus_matches,
        plus_matches,
        plus_fails,
        outcome,
    })
}
