//! Command execution and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use opcalc_core::data::DataGenerator;
use opcalc_core::matfun::{ComplexMatrix, C64};
use opcalc_core::operators::{build_pair, hq_decay_probe, sector_bound_probe, OperatorKind, OperatorSpec};
use opcalc_core::solver::{evolve_implicit_euler, DirichletProblem, ProductSpaceOptions, RobinProblem};
use opcalc_core::verify::compare::{dirichlet_oracle_difference, observed_order, robin_oracle_difference};
use opcalc_core::verify::{
    check_boundary_trace, check_convolution_decay, check_dore_yakubov, check_lambda_regions, check_sharp_estimate,
    scan_generation, sign_probe_rel_lambda, EstimateReport, ProblemTemplate,
};

use crate::config::{profile, Boundary, Command, ProbeConfig, RunConfig, ScanConfig};
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the canonical JSON of `cfg` without the settings that cannot
/// change results (output directory, thread count).
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut canon = cfg.clone();
    canon.output_dir = None;
    canon.threads = None;
    let text = serde_json::to_string(&canon).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub struct Output {
    dir: PathBuf,
    meta: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, command: Command, cfg: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&dir)?;
        let meta = vec![
            format!("opcalc {VERSION}"),
            format!("config_sha256={}", config_hash(cfg)),
            format!(
                "command={}",
                serde_json::to_value(command)
                    .unwrap_or(Value::Null)
                    .as_str()
                    .unwrap_or("")
            ),
            format!("seed={}", cfg.seed),
        ];
        Ok(Self {
            dir,
            meta,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, make: impl FnOnce(&[String]) -> String) -> Result<(), CliError> {
        let text = make(&self.meta);
        self.write(name, &text)
    }

    /// JSON artifacts carry the same metadata under `"meta"`.
    fn json(&mut self, name: &str, mut body: Value) -> Result<(), CliError> {
        if let Value::Object(map) = &mut body {
            map.insert("meta".into(), json!(self.meta));
        }
        let mut text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn report(&mut self, r: &EstimateReport) -> Result<Value, CliError> {
        self.csv(&format!("{}.csv", r.label), |m| r.to_csv(m))?;
        Ok(r.summary_json())
    }
}

/// `custom` operators are `value·I` (parameters `value`, `value_im`).
fn custom(spec: &OperatorSpec, field: &str) -> Result<ComplexMatrix, CliError> {
    let re = spec
        .parameters
        .get("value")
        .ok_or_else(|| CliError::Config(format!("field `{field}.parameters`: custom operators need `value`")))?;
    let im = spec.parameters.get("value_im").copied().unwrap_or(0.0);
    Ok(ComplexMatrix::identity(spec.dim).scale(C64::new(*re, im)))
}

fn operators(cfg: &RunConfig) -> Result<(ComplexMatrix, ComplexMatrix), CliError> {
    let a_spec = &cfg.operator_a;
    let h_spec = cfg.operator_h.clone().unwrap_or_else(|| a_spec.clone());
    let custom_a = a_spec.kind == OperatorKind::Custom;
    let custom_h = h_spec.kind == OperatorKind::Custom;
    if !custom_a && !custom_h {
        return build_pair(a_spec, &h_spec).map_err(|e| CliError::Config(format!("operators: {e}")));
    }
    let a = if custom_a {
        custom(a_spec, "operator_a")?
    } else {
        build_pair(a_spec, a_spec)
            .map_err(|e| CliError::Config(format!("operator_a: {e}")))?
            .0
    };
    let h = if custom_h {
        custom(&h_spec, "operator_h")?
    } else {
        build_pair(a_spec, &h_spec)
            .map_err(|e| CliError::Config(format!("operator_h: {e}")))?
            .1
    };
    if h.rows() != a.rows() {
        return Err(CliError::Config(format!(
            "field `operator_h.dim`: H has dimension {} but A has {}",
            h.rows(),
            a.rows()
        )));
    }
    Ok((a, h))
}

fn template(cfg: &RunConfig, a: ComplexMatrix, h: ComplexMatrix, threads: usize) -> ProblemTemplate {
    let mut t = ProblemTemplate::new(a, h);
    t.p = cfg.p;
    t.seed = cfg.seed;
    t.threads = threads;
    t.norm_weight = cfg.weight();
    t
}

fn rays(moduli: &[f64], args: &[f64]) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for &a in args {
        for &m in moduli {
            let z = C64::from_polar(m, a);
            if !out.contains(&z) {
                out.push(z);
            }
        }
    }
    out
}

struct Case<'a> {
    cfg: &'a RunConfig,
    a: ComplexMatrix,
    h: ComplexMatrix,
    base: &'a Path,
    threads: usize,
}

impl Case<'_> {
    fn robin(&self, nx: usize) -> Result<RobinProblem, CliError> {
        let cfg = self.cfg;
        let d = cfg.data.load(cfg.seed, nx, self.a.rows(), self.base)?;
        Ok(RobinProblem {
            a: self.a.clone(),
            h: self.h.clone(),
            point: cfg.point.expect("validated"),
            f_samples: d.f,
            d0: d.d0,
            u1: d.u1,
            p: cfg.p,
            nx,
            norm_weight: cfg.weight(),
        })
    }

    fn dirichlet(&self, nx: usize) -> Result<DirichletProblem, CliError> {
        let cfg = self.cfg;
        let d = cfg.data.load(cfg.seed, nx, self.a.rows(), self.base)?;
        Ok(DirichletProblem {
            a: self.a.clone(),
            point: cfg.point.expect("validated"),
            f_samples: d.f,
            u0: d.u0,
            u1: d.u1,
            p: cfg.p,
            nx,
            norm_weight: cfg.weight(),
        })
    }

    fn solve(&self, out: &mut Output) -> Result<(), CliError> {
        let nx = self.cfg.nx;
        let prof = match self.cfg.boundary {
            Boundary::Robin => opcalc_core::solver::solve_robin(&self.robin(nx)?)?,
            Boundary::Dirichlet => opcalc_core::solver::solve_dirichlet(&self.dirichlet(nx)?)?,
        };
        out.csv("solution.csv", |m| prof.to_csv(m))?;
        out.json(
            "summary.json",
            json!({
                "point": self.cfg.point,
                "nx": nx,
                "norms": prof.norms,
                "residual_interior": prof.residual_interior,
                "residual_robin": prof.residual_robin,
                "residual_dirichlet_start": prof.residual_dirichlet_start,
                "residual_dirichlet_end": prof.residual_dirichlet_end,
                "boundary_scale": prof.boundary_scale,
            }),
        )
    }

    fn compare(&self, out: &mut Output) -> Result<(), CliError> {
        let nx = self.cfg.nx;
        let sizes = match &self.cfg.compare {
            Some(c) if !c.nx_values.is_empty() => c.nx_values.clone(),
            _ => vec![nx, 2 * nx - 1],
        };
        let mut rows = Vec::new();
        for &m in &sizes {
            let cmp = match self.cfg.boundary {
                Boundary::Robin => robin_oracle_difference(&self.robin(m)?)?.1,
                Boundary::Dirichlet => dirichlet_oracle_difference(&self.dirichlet(m)?)?.1,
            };
            rows.push(cmp);
        }
        out.csv("compare.csv", |meta| {
            let mut s = String::new();
            for line in meta {
                s.push_str(&format!("# {line}\n"));
            }
            s.push_str("nx,relative_difference,residual_interior,order\n");
            for (k, r) in rows.iter().enumerate() {
                let order = match k {
                    0 => String::new(),
                    _ => format!(
                        "{:e}",
                        observed_order(rows[k - 1].relative_difference, r.relative_difference)
                    ),
                };
                s.push_str(&format!(
                    "{},{:e},{:e},{order}\n",
                    r.nx, r.relative_difference, r.residual_interior
                ));
            }
            s
        })?;
        out.json("compare.json", json!({ "point": self.cfg.point, "rows": rows }))
    }

    fn scan(&self, out: &mut Output) -> Result<(), CliError> {
        let cfg = self.cfg;
        let scan = cfg.scan.as_ref().expect("validated");
        let mut tpl = template(cfg, self.a.clone(), self.h.clone(), self.threads);
        let mut summaries = Vec::new();
        let mut extra = json!({});
        let mut violation = None;
        match scan {
            ScanConfig::Sharp { case, mask } => {
                tpl.mask = *mask;
                let grid = cfg.grid.as_ref().expect("validated");
                summaries.push(out.report(&check_sharp_estimate(*case, grid, &tpl)?)?);
            }
            ScanConfig::BoundaryTrace { mask } => {
                tpl.mask = *mask;
                let grid = cfg.grid.as_ref().expect("validated");
                summaries.push(out.report(&check_boundary_trace(grid, &tpl)?)?);
            }
            ScanConfig::Regions { case, template } => {
                let mut t = template.clone();
                t.threads = self.threads;
                let r = check_lambda_regions(*case, &t, &self.a, &self.h)?;
                for rep in [Some(&r.lambda_inverse), Some(&r.q_lambda_inverse), r.stab_op.as_ref()]
                    .into_iter()
                    .flatten()
                {
                    summaries.push(out.report(rep)?);
                }
                extra = json!({
                    "case": r.case,
                    "threshold": r.threshold,
                    "doublings": r.doublings,
                    "contraction_max": r.contraction_max,
                    "contraction_points": r.contraction.len(),
                });
                if r.contraction_max > 0.5 {
                    violation = Some(format!("contraction {} exceeds 1/2", r.contraction_max));
                }
            }
            ScanConfig::DoreYakubov {
                phi,
                lambda_moduli,
                lambda_args,
                nu_moduli,
                nu_args,
                nu_scale,
            } => {
                let l = -&self.a;
                let lambdas = rays(lambda_moduli, lambda_args);
                let nus = rays(nu_moduli, nu_args);
                let r = check_dore_yakubov(&l, *phi, &lambdas, &nus, *nu_scale, self.threads)?;
                for rep in r.reports() {
                    summaries.push(out.report(rep)?);
                }
            }
            ScanConfig::Convolution {
                lambda_moduli,
                lambda_args,
                trials,
            } => {
                let r = check_convolution_decay(&tpl, &rays(lambda_moduli, lambda_args), *trials)?;
                summaries.push(out.report(&r.decay)?);
                summaries.push(out.report(&r.reg_max)?);
            }
            ScanConfig::Generation { scan } => {
                let g = scan_generation(scan, &tpl)?;
                summaries.push(out.report(&g.report)?);
                extra = json!({ "rays": g.rays, "widest_flat_arg": g.widest_flat_arg });
            }
        }
        let verdict = summaries
            .iter()
            .map(|s| s["verdict"].as_str().unwrap_or("insufficient_data").to_string())
            .reduce(|a, b| if a == "flat" { b } else { a })
            .unwrap_or_default();
        out.json(
            "summary.json",
            json!({ "verdict": verdict, "reports": summaries, "details": extra }),
        )?;
        match violation {
            Some(msg) => Err(CliError::Region(msg)),
            None => Ok(()),
        }
    }

    fn evolve(&self, out: &mut Output) -> Result<(), CliError> {
        let cfg = self.cfg;
        let ev = cfg.evolve.as_ref().expect("validated");
        let n = self.a.rows();
        let seeded = DataGenerator::new(cfg.seed).smooth_profile(cfg.nx, n);
        let u0 = profile(&ev.initial, &seeded, cfg.nx, n, self.base, "evolve.initial")?;
        let v0 = u0[0].clone();
        let mut opts = ProductSpaceOptions::new(cfg.nx, ev.r);
        opts.p = cfg.p;
        opts.norm_weight = cfg.weight();
        let tr = evolve_implicit_euler(&self.a, &self.h, ev.mu, (&u0, &v0), ev.dt, ev.steps, &opts)?;
        out.csv("trajectory.csv", |m| tr.to_csv(m))?;
        let monotone = tr.z_norms.windows(2).all(|w| w[1] <= w[0]);
        out.json(
            "summary.json",
            json!({
                "steps": ev.steps,
                "dt": ev.dt,
                "z_norm_initial": tr.z_norms.first(),
                "z_norm_final": tr.z_norms.last(),
                "z_norm_nonincreasing": monotone,
            }),
        )
    }

    fn probe(&self, out: &mut Output) -> Result<(), CliError> {
        let body = match self.cfg.probe.as_ref().expect("validated") {
            ProbeConfig::HqDecay { ts } => {
                json!({ "hq_decay": hq_decay_probe(&self.h, &self.a, ts)? })
            }
            ProbeConfig::SectorBound { phi0, samples } => {
                json!({ "sector_bound": sector_bound_probe(&self.a, *phi0, samples)? })
            }
            ProbeConfig::Sign { points } => {
                json!({ "sign": sign_probe_rel_lambda(&self.a, &self.h, points)? })
            }
        };
        out.json("probe.json", body)
    }
}

/// Runs `command` and returns the files written.
pub fn run(command: Command, cfg: &RunConfig, base: &Path, threads: usize) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate(command)?;
    let (a, h) = operators(cfg)?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = Output::new(dir, command, cfg)?;
    let case = Case {
        cfg,
        a,
        h,
        base,
        threads,
    };
    let result = match command {
        Command::Solve => case.solve(&mut out),
        Command::Scan => case.scan(&mut out),
        Command::Compare => case.compare(&mut out),
        Command::Evolve => case.evolve(&mut out),
        Command::Probe => case.probe(&mut out),
    };
    result.map(|_| out.written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_threads_and_output_dir() {
        let text = r#"{"operator_a": {"kind": "laplacian1d", "dim": 3, "grid_step": 0.25}}"#;
        let cfg = crate::config::parse(text, "t").unwrap();
        let mut other = cfg.clone();
        other.threads = Some(4);
        other.output_dir = Some("elsewhere".into());
        assert_eq!(config_hash(&cfg), config_hash(&other));
        other.seed = 1;
        assert_ne!(config_hash(&cfg), config_hash(&other));
        assert_eq!(config_hash(&cfg).len(), 64);
    }

    #[test]
    fn rays_drop_duplicate_origin() {
        let z = rays(&[0.0, 1.0], &[0.0, 1.0]);
        assert_eq!(z.len(), 3);
    }
}
