//! Orchestration: config → basis → transition matrix → spectrum → files.

use std::path::{Path, PathBuf};

use crate::basis::{build_regular_basis, build_stochastic_basis, stochastic_sigma_with, BasisSet};
use crate::config::{echo_config, BasisSection, OracleSection, RunConfig};
use crate::error::{McError, Result};
use crate::model::{Geometry, ModelSpec, PotentialSpec};
use crate::oracle::{chain_levels, tensor_lowest};
use crate::oracle_grid::{grid_levels, GridOracleConfig};
use crate::report::{diagnostics_text, oracle_csv, spectrum_csv, thermo_csv, wavefunctions_csv};
use crate::sampler::SamplerConfig;
use crate::spectral::{diagonalize, thermodynamics, EffectiveSpectrum};
use crate::transition::{build_matrix_with, BuildOptions};

#[derive(Debug)]
pub struct RunSummary {
    pub spectrum: EffectiveSpectrum,
    pub reference: Option<Vec<f64>>,
    /// True when the stochastic-basis width fell back to the free rule
    /// because the potential has no closed-form width.
    pub used_free_sigma_fallback: bool,
    pub n_high_error: usize,
    pub min_acceptance: f64,
    pub files: Vec<PathBuf>,
}

/// Basis described by the config. The second value reports whether a
/// stochastic width had to fall back to the free-particle rule.
pub fn build_basis(cfg: &RunConfig) -> Result<(BasisSet, bool)> {
    let dim = cfg.model.dimension();
    match &cfg.basis {
        BasisSection::Regular { counts, box_low, box_high } => {
            Ok((build_regular_basis(dim, counts, box_low, box_high)?, false))
        }
        BasisSection::Stochastic { n_nodes, seed, sigma_rule, sigma_scale, sigma_time } => {
            let policy = stochastic_sigma_with(&cfg.model, *sigma_time, *sigma_rule)?;
            let sigma: Vec<f64> = policy.sigma.iter().map(|s| s * sigma_scale).collect();
            let basis = build_stochastic_basis(dim, *n_nodes, &sigma, *seed)?;
            Ok((basis, policy.used_free_fallback))
        }
    }
}

fn harmonic_ladder(omega: f64, hbar: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| hbar * omega * (k as f64 + 0.5)).collect()
}

fn grid_box(
    oracle: &OracleSection,
    basis_box: Option<(&[f64], &[f64])>,
    dim: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match (&oracle.grid_box_low, &oracle.grid_box_high) {
        (Some(low), Some(high)) => Ok((low.clone(), high.clone())),
        (None, None) => match basis_box {
            Some((low, high)) => Ok((low.to_vec(), high.to_vec())),
            None => Err(McError::Input(
                "grid reference needs oracle.grid_box_low/high (no box to inherit from this basis)"
                    .into(),
            )),
        },
        _ => Err(McError::Input(
            "oracle.grid_box_low and oracle.grid_box_high must be given together".into(),
        )),
    }
    .and_then(|(low, high)| {
        if low.len() != dim || high.len() != dim {
            return Err(McError::Input(format!("oracle grid box must have {dim} coordinates")));
        }
        Ok((low, high))
    })
}

/// Reference spectrum for the configured model: closed forms where they
/// exist (harmonic ladders and their tensor products, chain normal modes),
/// otherwise the finite-difference grid solver.
pub fn reference_levels(
    model: &ModelSpec,
    oracle: &OracleSection,
    basis_box: Option<(&[f64], &[f64])>,
) -> Result<Vec<f64>> {
    let n = oracle.n_levels;
    let hbar = model.params.hbar;
    match &model.geometry {
        Geometry::OscillatorChain(chain) => {
            let spectrum = chain_levels(chain, &model.params, n)?;
            Ok(spectrum.levels.into_iter().map(|l| l.energy).collect())
        }
        Geometry::PointParticle { potential, dimension } => match potential {
            PotentialSpec::Harmonic1D { omega } => Ok(harmonic_ladder(*omega, hbar, n)),
            PotentialSpec::Harmonic2D { omega } => {
                let ladder = harmonic_ladder(*omega, hbar, n);
                tensor_lowest(&[ladder.clone(), ladder], n)
            }
            PotentialSpec::Harmonic3D { omega } => {
                let ladder = harmonic_ladder(*omega, hbar, n);
                tensor_lowest(&[ladder.clone(), ladder.clone(), ladder], n)
            }
            PotentialSpec::CoupledHarmonic2D { omega, lambda } => {
                let m = model.params.mass;
                let base = m * omega * omega;
                if base - lambda.abs() <= 0.0 {
                    return Err(McError::Input(format!(
                        "coupling λ = {lambda} destabilizes the quadratic form (mω² = {base})"
                    )));
                }
                let w_plus = ((base + lambda) / m).sqrt();
                let w_minus = ((base - lambda) / m).sqrt();
                tensor_lowest(
                    &[harmonic_ladder(w_plus, hbar, n), harmonic_ladder(w_minus, hbar, n)],
                    n,
                )
            }
            PotentialSpec::Zero
            | PotentialSpec::SechWell { .. }
            | PotentialSpec::Anharmonic
            | PotentialSpec::AbsLinear
            | PotentialSpec::WallLinear { .. } => {
                let dim = *dimension;
                let (box_low, box_high) = grid_box(oracle, basis_box, dim)?;
                let points = match &oracle.grid_points {
                    Some(p) => {
                        if p.len() != dim {
                            return Err(McError::Input(format!(
                                "oracle.grid_points must have {dim} entries"
                            )));
                        }
                        p.clone()
                    }
                    None => {
                        if dim == 1 {
                            vec![2000]
                        } else {
                            vec![49; dim]
                        }
                    }
                };
                grid_levels(
                    model,
                    &GridOracleConfig { box_low, box_high, points_per_axis: points, n_levels: n },
                )
            }
        },
    }
}

fn basis_box_of(basis: &BasisSection) -> Option<(&[f64], &[f64])> {
    match basis {
        BasisSection::Regular { box_low, box_high, .. } => Some((box_low, box_high)),
        BasisSection::Stochastic { .. } => None,
    }
}

fn write_file(dir: &Path, name: &str, content: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    files.push(path);
    Ok(())
}

/// Full pipeline run; writes all artifacts into `out_dir` (created if
/// missing) and returns the in-memory results.
pub fn execute_run(cfg: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();

    let (basis, used_free_sigma_fallback) = build_basis(cfg)?;
    let sampler =
        SamplerConfig { n_paths: cfg.mc.n_paths, method: cfg.mc.method, seed: cfg.mc.seed };
    let opts = BuildOptions {
        symmetric_fill: cfg.mc.symmetric_fill,
        stream_mode: cfg.mc.stream,
        stream_tags: None,
    };
    let matrix = build_matrix_with(&cfg.model, &basis, &sampler, &opts)?;
    let spectrum = diagonalize(&matrix, cfg.model.params.hbar)?;

    let reference = if cfg.oracle.enabled {
        Some(reference_levels(&cfg.model, &cfg.oracle, basis_box_of(&cfg.basis))?)
    } else {
        None
    };

    write_file(out_dir, "config_echo.conf", &echo_config(cfg), &mut files)?;
    write_file(out_dir, "basis.txt", &basis.to_text_table(), &mut files)?;
    if cfg.output.write_matrix {
        let bin = out_dir.join("matrix.bin");
        matrix.write_binary(&bin)?;
        files.push(bin);
        let csv = out_dir.join("matrix.csv");
        matrix.write_csv(&csv)?;
        files.push(csv);
    }
    write_file(
        out_dir,
        "spectrum.csv",
        &spectrum_csv(&spectrum, reference.as_deref()),
        &mut files,
    )?;
    write_file(
        out_dir,
        "wavefunctions.csv",
        &wavefunctions_csv(&spectrum, cfg.output.n_wavefunctions),
        &mut files,
    )?;
    if !cfg.output.beta_grid.is_empty() {
        let points = thermodynamics(&spectrum.energies, &cfg.output.beta_grid)?;
        write_file(out_dir, "thermo.csv", &thermo_csv(&points), &mut files)?;
    }
    if let Some(levels) = &reference {
        write_file(out_dir, "oracle.csv", &oracle_csv(levels), &mut files)?;
    }
    write_file(out_dir, "diagnostics.txt", &diagnostics_text(&matrix, &spectrum), &mut files)?;

    Ok(RunSummary {
        spectrum,
        reference,
        used_free_sigma_fallback,
        n_high_error: matrix.n_high_error,
        min_acceptance: matrix.min_acceptance,
        files,
    })
}

/// Reference spectrum only; writes oracle.csv and returns the levels.
pub fn execute_oracle(cfg: &RunConfig, out_dir: &Path) -> Result<(Vec<f64>, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let levels = reference_levels(&cfg.model, &cfg.oracle, basis_box_of(&cfg.basis))?;
    let path = out_dir.join("oracle.csv");
    std::fs::write(&path, oracle_csv(&levels))?;
    Ok((levels, path))
}
