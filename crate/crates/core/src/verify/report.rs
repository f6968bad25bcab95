use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::matfun::C64;
use crate::operators::ls_slope;

/// Largest log-log slope still read as "bounded".
pub const FLAT_SLOPE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Flat,
    Growing,
    InsufficientData,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatePoint {
    pub lambda: C64,
    pub mu: C64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub lambda: C64,
    pub mu: C64,
    pub message: String,
}

/// Outcome of one sweep point.
#[derive(Clone, Debug)]
pub enum Sample {
    Measured(EstimatePoint),
    /// Both sides vanish.
    Degenerate,
    Failed(PointFailure),
}

impl Sample {
    pub fn measured(lambda: C64, mu: C64, lhs: f64, rhs: f64) -> Self {
        if lhs == 0.0 && rhs == 0.0 {
            return Sample::Degenerate;
        }
        Sample::Measured(EstimatePoint {
            lambda,
            mu,
            lhs,
            rhs,
            ratio: lhs / rhs,
        })
    }

    pub fn failed(lambda: C64, mu: C64, err: impl ToString) -> Self {
        Sample::Failed(PointFailure {
            lambda,
            mu,
            message: err.to_string(),
        })
    }
}

/// Worst per-series slopes of `ln ratio` against `ln(1 + |λ|)` and
/// `ln(1 + |μ|)`, and the widest span (in decades) any fitted series had.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogLogSlopes {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub lambda_decades: f64,
    pub mu_decades: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub label: String,
    pub points: Vec<EstimatePoint>,
    pub sup_ratio: f64,
    pub loglog_slopes: LogLogSlopes,
    pub verdict: Verdict,
    pub skipped: usize,
    pub failures: Vec<PointFailure>,
}

#[derive(Serialize)]
struct Summary<'a> {
    label: &'a str,
    sup_ratio: f64,
    loglog_slopes: &'a LogLogSlopes,
    verdict: Verdict,
    points: usize,
    skipped: usize,
    failed: usize,
}

fn key(z: C64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

/// Arguments agree only to rounding across moduli (`from_polar` then `arg`).
fn arg_key(z: C64) -> i64 {
    (z.arg() * 1e9).round() as i64
}

fn quantize(x: f64) -> i64 {
    if x == 0.0 {
        i64::MIN
    } else {
        (x.ln() * 1e6).round() as i64
    }
}

/// Minimum span, in decades of `1 + |x|`, a fitted window must cover.
/// A window may fall short by [`DECADE_SLACK`], so that a grid of exactly two
/// decades in `|x|` still qualifies.
pub const MIN_DECADES: f64 = 2.0;
pub const DECADE_SLACK: f64 = 0.01;

/// Fit of `ln ratio` against `ln(1 + |x|)` over the upper part of a series:
/// the top [`MIN_DECADES`] or the top half of its span, whichever is wider.
/// Series too short to fill the window give `None`.
fn series_slope(pts: Vec<(f64, f64)>) -> Option<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = pts.into_iter().map(|(m, y)| (1.0 + m, y)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return None;
    }
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    let width = MIN_DECADES.max(0.5 * (hi / lo).log10());
    let cut = hi * 10f64.powf(-width - DECADE_SLACK);
    let window: Vec<_> = pts.into_iter().filter(|(m, _)| *m >= cut).collect();
    let span = (window[window.len() - 1].0 / window[0].0).log10();
    if window.len() < 3 || span < MIN_DECADES - DECADE_SLACK {
        return None;
    }
    let xs: Vec<f64> = window.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    ls_slope(&xs, &ys).map(|s| (s, span))
}

fn worst_slope<K: Ord>(groups: BTreeMap<K, Vec<(f64, f64)>>) -> (Option<f64>, f64) {
    let mut worst: Option<f64> = None;
    let mut decades: f64 = 0.0;
    for pts in groups.into_values() {
        if let Some((s, span)) = series_slope(pts) {
            worst = Some(worst.map_or(s, |w| w.max(s)));
            decades = decades.max(span);
        }
    }
    (worst, decades)
}

impl EstimateReport {
    pub fn from_samples(label: impl Into<String>, samples: Vec<Sample>) -> Self {
        Self::from_samples_keyed(label, samples, |_, mu| mu.norm())
    }

    /// λ-series are grouped by `(arg λ, arg μ, mu_key(λ, μ))`, so a series may
    /// follow a μ that moves with λ.
    pub fn from_samples_keyed(
        label: impl Into<String>,
        samples: Vec<Sample>,
        mu_key: impl Fn(C64, C64) -> f64,
    ) -> Self {
        let mut points = Vec::new();
        let mut failures = Vec::new();
        let mut skipped = 0;
        for s in samples {
            match s {
                Sample::Measured(p) => points.push(p),
                Sample::Degenerate => skipped += 1,
                Sample::Failed(f) => failures.push(f),
            }
        }
        let sup_ratio = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
        let mut by_lambda = BTreeMap::new();
        let mut by_mu = BTreeMap::new();
        for p in points.iter().filter(|p| p.ratio > 0.0 && p.ratio.is_finite()) {
            let y = p.ratio.ln();
            by_lambda
                .entry((arg_key(p.lambda), arg_key(p.mu), quantize(mu_key(p.lambda, p.mu))))
                .or_insert_with(Vec::new)
                .push((p.lambda.norm(), y));
            by_mu
                .entry((key(p.lambda), arg_key(p.mu)))
                .or_insert_with(Vec::new)
                .push((p.mu.norm(), y));
        }
        let (lambda, lambda_decades) = worst_slope(by_lambda);
        let (mu, mu_decades) = worst_slope(by_mu);
        let slopes = LogLogSlopes {
            lambda,
            mu,
            lambda_decades,
            mu_decades,
        };
        let verdict = match (lambda, mu) {
            (None, None) => Verdict::InsufficientData,
            _ if lambda.into_iter().chain(mu).all(|s| s <= FLAT_SLOPE) => Verdict::Flat,
            _ => Verdict::Growing,
        };
        Self {
            label: label.into(),
            points,
            sup_ratio,
            loglog_slopes: slopes,
            verdict,
            skipped,
            failures,
        }
    }

    /// One row per measured point.
    pub fn to_csv(&self, metadata: &[String]) -> String {
        let mut out = String::new();
        for line in metadata {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(out, "# report={}", self.label);
        out.push_str("re_lambda,im_lambda,re_mu,im_mu,lhs,rhs,ratio\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                p.lambda.re, p.lambda.im, p.mu.re, p.mu.im, p.lhs, p.rhs, p.ratio
            );
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            label: &self.label,
            sup_ratio: self.sup_ratio,
            loglog_slopes: &self.loglog_slopes,
            verdict: self.verdict,
            points: self.points.len(),
            skipped: self.skipped,
            failed: self.failures.len(),
        })
        .unwrap_or(serde_json::Value::Null)
    }
}
