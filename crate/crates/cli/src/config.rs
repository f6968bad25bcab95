//! Run configuration: parsing, validation and data loading.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use opcalc_core::calculus::SpectralPoint;
use opcalc_core::data::DataGenerator;
use opcalc_core::matfun::{vec_scale, C64};
use opcalc_core::operators::{OperatorKind, OperatorSpec};
use opcalc_core::verify::{DataMask, EstimateCase, GenerationScan, NuScale, RegionCase, RegionGrid, RegionTemplate};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Scan,
    Compare,
    Evolve,
    Probe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Robin,
    Dirichlet,
}

/// Where one datum comes from. Vectors have the dimension of A; a profile
/// (f, or the initial state of `evolve`) has one vector per x-node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    #[default]
    Zero,
    /// Every component equals `value`.
    Constant { value: C64 },
    /// An explicit vector; for a profile it is used at every node.
    Values { values: Vec<C64> },
    /// Smooth random data from the run seed.
    Seeded {
        #[serde(default = "unit")]
        scale: f64,
    },
    /// CSV file: a vector is one `re,im` row per component; a profile is one
    /// row per x-node holding `re,im` pairs.
    File { path: PathBuf },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub f: DataSource,
    #[serde(default)]
    pub d0: DataSource,
    #[serde(default)]
    pub u0: DataSource,
    #[serde(default)]
    pub u1: DataSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanConfig {
    /// α, β or Dirichlet estimate over `grid`.
    Sharp {
        case: EstimateCase,
        #[serde(default = "all_data")]
        mask: DataMask,
    },
    /// `(1+|μ|)‖u(0)‖` over `grid`.
    BoundaryTrace {
        #[serde(default = "all_data")]
        mask: DataMask,
    },
    Regions {
        case: RegionCase,
        template: RegionTemplate,
    },
    DoreYakubov {
        phi: f64,
        lambda_moduli: Vec<f64>,
        lambda_args: Vec<f64>,
        nu_moduli: Vec<f64>,
        nu_args: Vec<f64>,
        #[serde(default)]
        nu_scale: NuScale,
    },
    Convolution {
        lambda_moduli: Vec<f64>,
        lambda_args: Vec<f64>,
        trials: usize,
    },
    Generation {
        scan: GenerationScan,
    },
}

fn all_data() -> DataMask {
    DataMask::ALL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps: usize,
    pub mu: C64,
    /// Ω threshold for `(1/dt, 1/dt + μ)`.
    pub r: f64,
    #[serde(default = "seeded")]
    pub initial: DataSource,
}

fn seeded() -> DataSource {
    DataSource::Seeded { scale: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// x-grid sizes; the default is `nx` and its halving `2nx − 1`.
    #[serde(default)]
    pub nx_values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// Decay of `‖HQ_t⁻¹‖` in t.
    HqDecay {
        ts: Vec<f64>,
    },
    SectorBound {
        phi0: f64,
        samples: Vec<C64>,
    },
    /// Sign in the Λ⁻¹ factorization at the given points.
    Sign {
        points: Vec<SpectralPoint>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub operator_a: OperatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_h: Option<OperatorSpec>,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<SpectralPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<RegionGrid>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    /// Expected dimension of A, checked when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Factor turning the Euclidean norm into the norm of X; defaults to
    /// `1/√(n+1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

fn default_p() -> f64 {
    2.0
}

fn default_nx() -> usize {
    129
}

/// Parses JSON text; errors name the line, column and field path.
pub fn parse(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path.is_empty() || path == "." {
            String::new()
        } else {
            format!(" at `{path}`")
        };
        let (line, col) = (inner.line(), inner.column());
        let msg = inner.to_string();
        let msg = msg.trim_end_matches(&format!(" at line {line} column {col}"));
        CliError::Config(format!("{origin}:{line}:{col}{field}: {msg}"))
    })
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl RunConfig {
    /// Dimension of the operators `build_pair` will produce.
    pub fn dim(&self) -> usize {
        match &self.operator_h {
            Some(h) if h.kind == OperatorKind::Caputo => {
                let mt = h.parameters.get("mt").copied().unwrap_or(8.0);
                self.operator_a.dim * mt.max(0.0) as usize
            }
            _ => self.operator_a.dim,
        }
    }

    pub fn weight(&self) -> f64 {
        self.norm_weight
            .unwrap_or_else(|| 1.0 / ((self.dim() + 1) as f64).sqrt())
    }

    /// Checks the settings `command` needs.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(invalid(
                    "command",
                    format!("config is for {c:?} but {command:?} was requested"),
                ));
            }
        }
        self.operator_a.validate().map_err(|e| invalid("operator_a", e))?;
        if let Some(h) = &self.operator_h {
            if h.kind != OperatorKind::Caputo {
                h.validate().map_err(|e| invalid("operator_h", e))?;
            }
        }
        if let Some(n) = self.n {
            if n != self.dim() {
                return Err(invalid(
                    "n",
                    format!("{n} does not match the operator dimension {}", self.dim()),
                ));
            }
        }
        if !(self.p >= 1.0) {
            return Err(invalid("p", "must be at least 1"));
        }
        if self.nx < 3 {
            return Err(invalid("nx", "must be at least 3"));
        }
        if matches!(self.norm_weight, Some(w) if !(w > 0.0 && w.is_finite())) {
            return Err(invalid("norm_weight", "must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be positive"));
        }
        let needs_h = match command {
            Command::Solve | Command::Compare => self.boundary == Boundary::Robin,
            Command::Evolve => true,
            Command::Scan => !matches!(
                self.scan,
                Some(ScanConfig::Sharp {
                    case: EstimateCase::Dirichlet,
                    ..
                }) | Some(ScanConfig::DoreYakubov { .. })
                    | Some(ScanConfig::Convolution { .. })
            ),
            Command::Probe => !matches!(self.probe, Some(ProbeConfig::SectorBound { .. })),
        };
        if needs_h && self.operator_h.is_none() {
            return Err(invalid("operator_h", "required for this command"));
        }
        match command {
            Command::Solve | Command::Compare => {
                if self.point.is_none() {
                    return Err(invalid("point", "required"));
                }
                if let Some(c) = &self.compare {
                    if c.nx_values.iter().any(|&m| m < 3) {
                        return Err(invalid("compare.nx_values", "entries must be at least 3"));
                    }
                }
            }
            Command::Scan => match &self.scan {
                None => return Err(invalid("scan", "required")),
                Some(ScanConfig::Sharp { .. } | ScanConfig::BoundaryTrace { .. }) if self.grid.is_none() => {
                    return Err(invalid("grid", "required for this scan"))
                }
                Some(ScanConfig::Convolution { trials: 0, .. }) => {
                    return Err(invalid("scan.trials", "must be positive"))
                }
                _ => {}
            },
            Command::Evolve => match &self.evolve {
                None => return Err(invalid("evolve", "required")),
                Some(e) if !(e.dt > 0.0 && e.dt.is_finite()) => return Err(invalid("evolve.dt", "must be positive")),
                _ => {}
            },
            Command::Probe => {
                if self.probe.is_none() {
                    return Err(invalid("probe", "required"));
                }
            }
        }
        Ok(())
    }
}

/// Data vectors of a run, drawn in a fixed order from the seed so that
/// each seeded field does not depend on the others' sources.
pub struct LoadedData {
    pub f: Vec<Vec<C64>>,
    pub d0: Vec<C64>,
    pub u0: Vec<C64>,
    pub u1: Vec<C64>,
}

fn read_rows(path: &Path, base: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let full = if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    };
    let text = fs::read_to_string(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            // a single header row is allowed
            Err(_) if rows.is_empty() => continue,
            Err(e) => return Err(CliError::Config(format!("{}:{}: {e}", full.display(), k + 1))),
        }
    }
    Ok(rows)
}

fn pairs(row: &[f64]) -> Vec<C64> {
    row.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

fn vector(src: &DataSource, seeded: &[C64], n: usize, base: &Path, field: &str) -> Result<Vec<C64>, CliError> {
    let v = match src {
        DataSource::Zero => vec![C64::new(0.0, 0.0); n],
        DataSource::Constant { value } => vec![*value; n],
        DataSource::Values { values } => values.clone(),
        DataSource::Seeded { scale } => vec_scale(seeded, C64::new(*scale, 0.0)),
        DataSource::File { path } => {
            let rows = read_rows(path, base)?;
            if rows.iter().any(|r| r.len() != 2) {
                return Err(invalid(field, "vector files need two columns (re, im)"));
            }
            rows.iter().map(|r| C64::new(r[0], r[1])).collect()
        }
    };
    if v.len() != n {
        return Err(invalid(field, format!("has {} components, expected {n}", v.len())));
    }
    Ok(v)
}

pub fn profile(
    src: &DataSource,
    seeded: &[Vec<C64>],
    nx: usize,
    n: usize,
    base: &Path,
    field: &str,
) -> Result<Vec<Vec<C64>>, CliError> {
    let prof = match src {
        DataSource::File { path } => {
            let rows = read_rows(path, base)?;
            if rows.len() != nx || rows.iter().any(|r| r.len() != 2 * n) {
                return Err(invalid(
                    field,
                    format!("profile files need {nx} rows of {} columns", 2 * n),
                ));
            }
            rows.iter().map(|r| pairs(r)).collect()
        }
        DataSource::Seeded { scale } => seeded.iter().map(|v| vec_scale(v, C64::new(*scale, 0.0))).collect(),
        other => {
            let v = vector(other, &[], n, base, field)?;
            vec![v; nx]
        }
    };
    Ok(prof)
}

impl DataConfig {
    pub fn load(&self, seed: u64, nx: usize, n: usize, base: &Path) -> Result<LoadedData, CliError> {
        let mut g = DataGenerator::new(seed);
        let f = g.smooth_profile(nx, n);
        let d0 = g.smooth_vector(n);
        let u0 = g.smooth_vector(n);
        let u1 = g.smooth_vector(n);
        Ok(LoadedData {
            f: profile(&self.f, &f, nx, n, base, "data.f")?,
            d0: vector(&self.d0, &d0, n, base, "data.d0")?,
            u0: vector(&self.u0, &u0, n, base, "data.u0")?,
            u1: vector(&self.u1, &u1, n, base, "data.u1")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"{
        "command": "solve",
        "operator_a": {"kind": "laplacian1d", "dim": 4, "grid_step": 0.2},
        "operator_h": {"kind": "volterra", "dim": 4, "grid_step": 0.2, "parameters": {"k": 2.0}},
        "point": {"lambda": [10.0, 1.0], "mu": [0.5, 0.0]},
        "data": {"f": {"kind": "seeded", "scale": 0.5}, "u1": {"kind": "constant", "value": [1.0, 0.0]}},
        "nx": 65,
        "seed": 3
    }"#;

    #[test]
    fn round_trip_preserves_settings() {
        let cfg = parse(SOLVE, "inline").unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let again = parse(&text, "again").unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.p, 2.0);
        cfg.validate(Command::Solve).unwrap();
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = SOLVE.replace("\"volterra\"", "\"volterrra\"");
        let err = parse(&bad, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("operator_h.kind"), "{err}");
        assert!(err.contains("cfg.json:4:42 "), "{err}");
        assert!(!err.contains("column 42"), "{err}");
        let unknown = SOLVE.replace("\"nx\"", "\"nxx\"");
        assert!(parse(&unknown, "cfg.json").is_err());
    }

    #[test]
    fn validation_catches_missing_sections() {
        let cfg = parse(SOLVE, "inline").unwrap();
        assert!(cfg.validate(Command::Scan).is_err());
        let mut no_cmd = cfg.clone();
        no_cmd.command = None;
        let err = no_cmd.validate(Command::Scan).unwrap_err().to_string();
        assert!(err.contains("`scan`"), "{err}");
        let mut wrong_n = cfg;
        wrong_n.n = Some(5);
        assert!(wrong_n.validate(Command::Solve).is_err());
    }

    #[test]
    fn seeded_fields_do_not_depend_on_each_other() {
        let cfg = parse(SOLVE, "inline").unwrap();
        let a = cfg.data.load(3, 9, 4, Path::new(".")).unwrap();
        let mut other = cfg.data.clone();
        other.d0 = DataSource::Seeded { scale: 1.0 };
        let b = other.load(3, 9, 4, Path::new(".")).unwrap();
        assert_eq!(a.f, b.f);
        assert_eq!(a.u1, vec![C64::new(1.0, 0.0); 4]);
        assert!(a.d0.iter().all(|z| z.norm() == 0.0));
        assert!(b.d0.iter().any(|z| z.norm() > 0.0));
    }
}
