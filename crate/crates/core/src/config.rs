//! Plain-text run configuration: one `section.key = value` per line, `#`
//! comments, unknown or inapplicable keys rejected with their line number.
//! The echo form writes every applicable key with defaults filled in and
//! survives a parse/echo round trip byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::basis::SigmaRule;
use crate::error::{McError, Result};
use crate::model::{ChainSpec, Geometry, ModelSpec, PhysicalParams, PotentialSpec, TimeWindow};
use crate::sampler::Method;
use crate::transition::StreamMode;

pub const DEFAULT_N_SLICES: usize = 64;
pub const DEFAULT_N_PATHS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_STEP_SIZE: f64 = 0.5;
pub const DEFAULT_N_THERMALIZE: usize = 100;
pub const DEFAULT_N_DECORRELATE: usize = 10;
pub const DEFAULT_N_WAVEFUNCTIONS: usize = 4;
pub const DEFAULT_ORACLE_LEVELS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSection {
    Regular {
        counts: Vec<usize>,
        box_low: Vec<f64>,
        box_high: Vec<f64>,
    },
    Stochastic {
        n_nodes: usize,
        seed: u64,
        sigma_rule: SigmaRule,
        sigma_scale: f64,
        sigma_time: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSection {
    pub n_paths: usize,
    pub method: Method,
    pub seed: u64,
    pub stream: StreamMode,
    pub symmetric_fill: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    /// Inverse temperatures for the thermodynamic table; empty skips it.
    pub beta_grid: Vec<f64>,
    pub n_wavefunctions: usize,
    pub write_matrix: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSection {
    pub enabled: bool,
    pub n_levels: usize,
    /// Grid-solver shape overrides; when absent the runner derives them
    /// from the basis box.
    pub grid_points: Option<Vec<usize>>,
    pub grid_box_low: Option<Vec<f64>>,
    pub grid_box_high: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub basis: BasisSection,
    pub mc: McSection,
    pub output: OutputSection,
    pub oracle: OracleSection,
}

fn cfg_err(line: usize, msg: impl Into<String>) -> McError {
    McError::Config { line, msg: msg.into() }
}

/// Raw `key → (line, value)` table with duplicate detection and tracked
/// consumption; anything left unconsumed is an unknown or inapplicable key.
struct RawEntries {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawEntries {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cfg_err(line_no, format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.split('.').count() != 2 || key.split('.').any(str::is_empty) {
                return Err(cfg_err(line_no, format!("key `{key}` must look like `section.name`")));
            }
            if let Some((first_line, _)) = entries.get(&key) {
                return Err(cfg_err(
                    line_no,
                    format!("key `{key}` already set on line {first_line}"),
                ));
            }
            entries.insert(key, (line_no, value));
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| McError::ConfigGeneral(format!("missing required key: {key}")))
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.into_iter().min_by_key(|(_, (l, _))| *l) {
            return Err(cfg_err(line, format!("unknown or inapplicable key `{key}`")));
        }
        Ok(())
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| cfg_err(line, format!("{key}: `{v}` is not a number")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| cfg_err(line, format!("{key}: `{v}` is not a non-negative integer")))
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse().map_err(|_| cfg_err(line, format!("{key}: `{v}` is not a non-negative integer")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(cfg_err(line, format!("{key}: `{v}` must be true or false"))),
    }
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|part| parse_f64(line, key, part.trim())).collect()
}

fn parse_usize_list(line: usize, key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|part| parse_usize(line, key, part.trim())).collect()
}

fn structural(err: McError) -> McError {
    match err {
        McError::Input(msg) => McError::ConfigGeneral(msg),
        other => other,
    }
}

/// Optional key with a default.
fn opt<T>(
    raw: &mut RawEntries,
    key: &str,
    default: T,
    parse: impl FnOnce(usize, &str, &str) -> Result<T>,
) -> Result<T> {
    match raw.take(key) {
        Some((line, v)) => parse(line, key, &v),
        None => Ok(default),
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut raw = RawEntries::parse(text)?;

    // model
    let (kind_line, kind) = raw.require("model.kind")?;
    let mass = opt(&mut raw, "model.mass", 1.0, parse_f64)?;
    let hbar = opt(&mut raw, "model.hbar", 1.0, parse_f64)?;
    let params = PhysicalParams::new(mass, hbar).map_err(structural)?;

    let t_total = {
        let (line, v) = raw.require("time.t_total")?;
        parse_f64(line, "time.t_total", &v)?
    };
    let n_slices = opt(&mut raw, "time.n_slices", DEFAULT_N_SLICES, parse_usize)?;
    let time = TimeWindow::new(t_total, n_slices).map_err(structural)?;

    let model = match kind.as_str() {
        "point" => {
            let (pot_line, pot) = raw.require("model.potential")?;
            let omega = |raw: &mut RawEntries| -> Result<f64> {
                let (line, v) = raw.require("model.omega")?;
                parse_f64(line, "model.omega", &v)
            };
            let potential = match pot.as_str() {
                "zero" => PotentialSpec::Zero,
                "harmonic" => PotentialSpec::Harmonic1D { omega: omega(&mut raw)? },
                "sech_well" => {
                    let (line, v) = raw.require("model.v0")?;
                    PotentialSpec::SechWell { v0: parse_f64(line, "model.v0", &v)? }
                }
                "anharmonic" => PotentialSpec::Anharmonic,
                "abs_linear" => PotentialSpec::AbsLinear,
                "wall_linear" => {
                    let (line, v) = raw.require("model.force")?;
                    PotentialSpec::WallLinear { force: parse_f64(line, "model.force", &v)? }
                }
                "harmonic_2d" => PotentialSpec::Harmonic2D { omega: omega(&mut raw)? },
                "coupled_2d" => {
                    let w = omega(&mut raw)?;
                    let (line, v) = raw.require("model.lambda")?;
                    PotentialSpec::CoupledHarmonic2D {
                        omega: w,
                        lambda: parse_f64(line, "model.lambda", &v)?,
                    }
                }
                "harmonic_3d" => PotentialSpec::Harmonic3D { omega: omega(&mut raw)? },
                other => {
                    return Err(cfg_err(
                        pot_line,
                        format!(
                            "model.potential: `{other}` is not one of zero, harmonic, sech_well, \
                             anharmonic, abs_linear, wall_linear, harmonic_2d, coupled_2d, \
                             harmonic_3d"
                        ),
                    ))
                }
            };
            ModelSpec::point(potential, params, time)
        }
        "chain" => {
            let (line_n, v_n) = raw.require("model.n_osc")?;
            let (line_c, v_c) = raw.require("model.omega_coupling")?;
            let (line_o, v_o) = raw.require("model.omega_onsite")?;
            let chain = ChainSpec::new(
                parse_usize(line_n, "model.n_osc", &v_n)?,
                parse_f64(line_c, "model.omega_coupling", &v_c)?,
                parse_f64(line_o, "model.omega_onsite", &v_o)?,
            )
            .map_err(structural)?;
            ModelSpec::chain(chain, params, time)
        }
        other => {
            return Err(cfg_err(kind_line, format!("model.kind: `{other}` must be point or chain")))
        }
    };

    // basis
    let (basis_line, basis_kind) = raw.require("basis.kind")?;
    let basis = match basis_kind.as_str() {
        "regular" => {
            let (line, v) = raw.require("basis.counts")?;
            let counts = parse_usize_list(line, "basis.counts", &v)?;
            let (line, v) = raw.require("basis.box_low")?;
            let box_low = parse_f64_list(line, "basis.box_low", &v)?;
            let (line, v) = raw.require("basis.box_high")?;
            let box_high = parse_f64_list(line, "basis.box_high", &v)?;
            BasisSection::Regular { counts, box_low, box_high }
        }
        "stochastic" => {
            let (line, v) = raw.require("basis.n_nodes")?;
            let n_nodes = parse_usize(line, "basis.n_nodes", &v)?;
            let seed = opt(&mut raw, "basis.seed", DEFAULT_SEED, parse_u64)?;
            let sigma_rule =
                match raw.take("basis.sigma_rule") {
                    Some((line, v)) => match v.as_str() {
                        "sinh" => SigmaRule::Sinh,
                        "kernel_width" => SigmaRule::KernelWidth,
                        other => {
                            return Err(cfg_err(
                                line,
                                format!("basis.sigma_rule: `{other}` must be sinh or kernel_width"),
                            ))
                        }
                    },
                    None => return Err(McError::ConfigGeneral(
                        "basis.kind = stochastic requires basis.sigma_rule (sinh or kernel_width)"
                            .into(),
                    )),
                };
            let sigma_scale = opt(&mut raw, "basis.sigma_scale", 1.0, parse_f64)?;
            let sigma_time = opt(&mut raw, "basis.sigma_time", t_total, parse_f64)?;
            BasisSection::Stochastic { n_nodes, seed, sigma_rule, sigma_scale, sigma_time }
        }
        other => {
            return Err(cfg_err(
                basis_line,
                format!("basis.kind: `{other}` must be regular or stochastic"),
            ))
        }
    };

    // mc
    let n_paths = opt(&mut raw, "mc.n_paths", DEFAULT_N_PATHS, parse_usize)?;
    let seed = opt(&mut raw, "mc.seed", DEFAULT_SEED, parse_u64)?;
    let method = match raw.take("mc.method") {
        None => Method::BrownianBridge,
        Some((_, v)) if v == "brownian_bridge" => Method::BrownianBridge,
        Some((_, v)) if v == "metropolis" => Method::Metropolis {
            step_size: opt(&mut raw, "mc.step_size", DEFAULT_STEP_SIZE, parse_f64)?,
            n_thermalize: opt(&mut raw, "mc.n_thermalize", DEFAULT_N_THERMALIZE, parse_usize)?,
            n_decorrelate: opt(&mut raw, "mc.n_decorrelate", DEFAULT_N_DECORRELATE, parse_usize)?,
        },
        Some((line, v)) => {
            return Err(cfg_err(
                line,
                format!("mc.method: `{v}` must be brownian_bridge or metropolis"),
            ))
        }
    };
    let stream = match raw.take("mc.stream") {
        None => StreamMode::Shared,
        Some((_, v)) if v == "shared" => StreamMode::Shared,
        Some((_, v)) if v == "per_entry" => StreamMode::PerEntry,
        Some((line, v)) => {
            return Err(cfg_err(line, format!("mc.stream: `{v}` must be shared or per_entry")))
        }
    };
    let symmetric_fill = opt(&mut raw, "mc.symmetric_fill", true, parse_bool)?;
    let mc = McSection { n_paths, method, seed, stream, symmetric_fill };

    // output
    let beta_grid = match raw.take("output.beta_grid") {
        Some((line, v)) => parse_f64_list(line, "output.beta_grid", &v)?,
        None => Vec::new(),
    };
    let n_wavefunctions =
        opt(&mut raw, "output.n_wavefunctions", DEFAULT_N_WAVEFUNCTIONS, parse_usize)?;
    let write_matrix = opt(&mut raw, "output.write_matrix", true, parse_bool)?;
    let output = OutputSection { beta_grid, n_wavefunctions, write_matrix };

    // oracle
    let enabled = opt(&mut raw, "oracle.enabled", false, parse_bool)?;
    let n_levels = opt(&mut raw, "oracle.n_levels", DEFAULT_ORACLE_LEVELS, parse_usize)?;
    let grid_points = match raw.take("oracle.grid_points") {
        Some((line, v)) => Some(parse_usize_list(line, "oracle.grid_points", &v)?),
        None => None,
    };
    let grid_box_low = match raw.take("oracle.grid_box_low") {
        Some((line, v)) => Some(parse_f64_list(line, "oracle.grid_box_low", &v)?),
        None => None,
    };
    let grid_box_high = match raw.take("oracle.grid_box_high") {
        Some((line, v)) => Some(parse_f64_list(line, "oracle.grid_box_high", &v)?),
        None => None,
    };
    let oracle = OracleSection { enabled, n_levels, grid_points, grid_box_low, grid_box_high };

    raw.finish()?;
    Ok(RunConfig { model, basis, mc, output, oracle })
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn join_usize(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Canonical text for a configuration: every applicable key present, fixed
/// order, one section per block. parse(echo(c)) reproduces `c`, and
/// echo(parse(echo(c))) is byte-identical to echo(c).
pub fn echo_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let model = &cfg.model;
    match &model.geometry {
        Geometry::PointParticle { potential, .. } => {
            s.push_str("model.kind = point\n");
            match potential {
                PotentialSpec::Zero => s.push_str("model.potential = zero\n"),
                PotentialSpec::Harmonic1D { omega } => {
                    let _ = writeln!(s, "model.potential = harmonic\nmodel.omega = {omega}");
                }
                PotentialSpec::SechWell { v0 } => {
                    let _ = writeln!(s, "model.potential = sech_well\nmodel.v0 = {v0}");
                }
                PotentialSpec::Anharmonic => s.push_str("model.potential = anharmonic\n"),
                PotentialSpec::AbsLinear => s.push_str("model.potential = abs_linear\n"),
                PotentialSpec::WallLinear { force } => {
                    let _ = writeln!(s, "model.potential = wall_linear\nmodel.force = {force}");
                }
                PotentialSpec::Harmonic2D { omega } => {
                    let _ = writeln!(s, "model.potential = harmonic_2d\nmodel.omega = {omega}");
                }
                PotentialSpec::CoupledHarmonic2D { omega, lambda } => {
                    let _ = writeln!(
                        s,
                        "model.potential = coupled_2d\nmodel.omega = {omega}\nmodel.lambda = {lambda}"
                    );
                }
                PotentialSpec::Harmonic3D { omega } => {
                    let _ = writeln!(s, "model.potential = harmonic_3d\nmodel.omega = {omega}");
                }
            }
        }
        Geometry::OscillatorChain(chain) => {
            s.push_str("model.kind = chain\n");
            let _ = writeln!(s, "model.n_osc = {}", chain.n_osc);
            let _ = writeln!(s, "model.omega_coupling = {}", chain.omega_coupling);
            let _ = writeln!(s, "model.omega_onsite = {}", chain.omega_onsite);
        }
    }
    let _ = writeln!(s, "model.mass = {}", model.params.mass);
    let _ = writeln!(s, "model.hbar = {}", model.params.hbar);

    s.push('\n');
    let _ = writeln!(s, "time.t_total = {}", model.time.t_total);
    let _ = writeln!(s, "time.n_slices = {}", model.time.n_slices);

    s.push('\n');
    match &cfg.basis {
        BasisSection::Regular { counts, box_low, box_high } => {
            s.push_str("basis.kind = regular\n");
            let _ = writeln!(s, "basis.counts = {}", join_usize(counts));
            let _ = writeln!(s, "basis.box_low = {}", join_f64(box_low));
            let _ = writeln!(s, "basis.box_high = {}", join_f64(box_high));
        }
        BasisSection::Stochastic { n_nodes, seed, sigma_rule, sigma_scale, sigma_time } => {
            s.push_str("basis.kind = stochastic\n");
            let _ = writeln!(s, "basis.n_nodes = {n_nodes}");
            let _ = writeln!(s, "basis.seed = {seed}");
            let rule = match sigma_rule {
                SigmaRule::Sinh => "sinh",
                SigmaRule::KernelWidth => "kernel_width",
            };
            let _ = writeln!(s, "basis.sigma_rule = {rule}");
            let _ = writeln!(s, "basis.sigma_scale = {sigma_scale}");
            let _ = writeln!(s, "basis.sigma_time = {sigma_time}");
        }
    }

    s.push('\n');
    let _ = writeln!(s, "mc.n_paths = {}", cfg.mc.n_paths);
    match cfg.mc.method {
        Method::BrownianBridge => s.push_str("mc.method = brownian_bridge\n"),
        Method::Metropolis { step_size, n_thermalize, n_decorrelate } => {
            s.push_str("mc.method = metropolis\n");
            let _ = writeln!(s, "mc.step_size = {step_size}");
            let _ = writeln!(s, "mc.n_thermalize = {n_thermalize}");
            let _ = writeln!(s, "mc.n_decorrelate = {n_decorrelate}");
        }
    }
    let _ = writeln!(s, "mc.seed = {}", cfg.mc.seed);
    let stream = match cfg.mc.stream {
        StreamMode::Shared => "shared",
        StreamMode::PerEntry => "per_entry",
    };
    let _ = writeln!(s, "mc.stream = {stream}");
    let _ = writeln!(s, "mc.symmetric_fill = {}", cfg.mc.symmetric_fill);

    s.push('\n');
    if !cfg.output.beta_grid.is_empty() {
        let _ = writeln!(s, "output.beta_grid = {}", join_f64(&cfg.output.beta_grid));
    }
    let _ = writeln!(s, "output.n_wavefunctions = {}", cfg.output.n_wavefunctions);
    let _ = writeln!(s, "output.write_matrix = {}", cfg.output.write_matrix);

    s.push('\n');
    let _ = writeln!(s, "oracle.enabled = {}", cfg.oracle.enabled);
    let _ = writeln!(s, "oracle.n_levels = {}", cfg.oracle.n_levels);
    if let Some(p) = &cfg.oracle.grid_points {
        let _ = writeln!(s, "oracle.grid_points = {}", join_usize(p));
    }
    if let Some(p) = &cfg.oracle.grid_box_low {
        let _ = writeln!(s, "oracle.grid_box_low = {}", join_f64(p));
    }
    if let Some(p) = &cfg.oracle.grid_box_high {
        let _ = writeln!(s, "oracle.grid_box_high = {}", join_f64(p));
    }
    s
}
