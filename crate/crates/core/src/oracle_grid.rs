//! Grid-diagonalization oracle: low-lying levels of the point-particle
//! Hamiltonian from a second-order finite-difference discretization with
//! Dirichlet walls at the box edges. Independent of the MC pipeline; used
//! to validate it for potentials without closed-form spectra.

use crate::error::{McError, Result};
use crate::linalg::{symmetric_eigenvalues, tridiagonal_eigenvalues};
use crate::model::{evaluate_potential, Geometry, ModelSpec, PotentialValue};

/// On-site value standing in for an infinite barrier at forbidden nodes;
/// large enough that leakage is invisible at the oracle's accuracy.
const FORBIDDEN_VALUE: f64 = 1e10;

/// Dense 2-D solves grow as (nx·ny)³; beyond this they stop being a cheap
/// oracle.
const MAX_DENSE_NODES: usize = 2500;

#[derive(Debug, Clone)]
pub struct GridOracleConfig {
    pub box_low: Vec<f64>,
    pub box_high: Vec<f64>,
    /// Interior points per axis; the box edges themselves are Dirichlet
    /// nodes and not represented.
    pub points_per_axis: Vec<usize>,
    pub n_levels: usize,
}

fn axis_nodes(low: f64, high: f64, n: usize) -> (f64, Vec<f64>) {
    let h = (high - low) / (n as f64 + 1.0);
    (h, (0..n).map(|i| low + (i as f64 + 1.0) * h).collect())
}

fn potential_at(model: &ModelSpec, x: &[f64]) -> Result<f64> {
    Ok(match evaluate_potential(model, x)? {
        PotentialValue::Finite(v) => v,
        PotentialValue::Forbidden => FORBIDDEN_VALUE,
    })
}

/// Lowest `n_levels` eigenvalues of the discretized Hamiltonian, ascending.
/// Supports one- and two-dimensional point-particle models.
pub fn grid_levels(model: &ModelSpec, cfg: &GridOracleConfig) -> Result<Vec<f64>> {
    let Geometry::PointParticle { dimension, .. } = &model.geometry else {
        return Err(McError::Input("grid oracle supports point-particle models only".into()));
    };
    let dim = *dimension;
    if dim > 2 {
        return Err(McError::Input(format!("grid oracle supports dimension 1 or 2, got {dim}")));
    }
    if cfg.box_low.len() != dim || cfg.box_high.len() != dim || cfg.points_per_axis.len() != dim {
        return Err(McError::Input("grid config arrays must match the model dimension".into()));
    }
    for d in 0..dim {
        if !(cfg.box_high[d] > cfg.box_low[d]) {
            return Err(McError::Input(format!("degenerate box on axis {d}")));
        }
        if cfg.points_per_axis[d] < 2 {
            return Err(McError::Input("need at least 2 grid points per axis".into()));
        }
    }
    let hbar = model.params.hbar;
    let m = model.params.mass;

    match dim {
        1 => {
            let n = cfg.points_per_axis[0];
            let (h, xs) = axis_nodes(cfg.box_low[0], cfg.box_high[0], n);
            let kin = hbar * hbar / (m * h * h);
            let mut diag = Vec::with_capacity(n);
            for x in &xs {
                diag.push(kin + potential_at(model, &[*x])?);
            }
            let off = vec![-0.5 * kin; n - 1];
            Ok(tridiagonal_eigenvalues(&diag, &off, cfg.n_levels))
        }
        _ => {
            let (nx, ny) = (cfg.points_per_axis[0], cfg.points_per_axis[1]);
            let total = nx * ny;
            if total > MAX_DENSE_NODES {
                return Err(McError::Input(format!(
                    "2-D grid with {total} nodes exceeds the dense-solver cap {MAX_DENSE_NODES}"
                )));
            }
            let (hx, xs) = axis_nodes(cfg.box_low[0], cfg.box_high[0], nx);
            let (hy, ys) = axis_nodes(cfg.box_low[1], cfg.box_high[1], ny);
            let kx = hbar * hbar / (m * hx * hx);
            let ky = hbar * hbar / (m * hy * hy);
            let mut a = vec![0.0; total * total];
            for (ix, &x) in xs.iter().enumerate() {
                for (iy, &y) in ys.iter().enumerate() {
                    let row = ix * ny + iy;
                    a[row * total + row] = kx + ky + potential_at(model, &[x, y])?;
                    if ix + 1 < nx {
                        let col = (ix + 1) * ny + iy;
                        a[row * total + col] = -0.5 * kx;
                        a[col * total + row] = -0.5 * kx;
                    }
                    if iy + 1 < ny {
                        let col = ix * ny + iy + 1;
                        a[row * total + col] = -0.5 * ky;
                        a[col * total + row] = -0.5 * ky;
                    }
                }
            }
            Ok(symmetric_eigenvalues(&a, total, cfg.n_levels))
        }
    }
}

/// Richardson extrapolation over a grid refinement: solve at the configured
/// resolution and at halved spacing (n → 2n+1 keeps the box), then cancel
/// the leading O(h²) error with (4·fine − coarse)/3.
pub fn grid_levels_richardson(model: &ModelSpec, cfg: &GridOracleConfig) -> Result<Vec<f64>> {
    let coarse = grid_levels(model, cfg)?;
    let fine_cfg = GridOracleConfig {
        points_per_axis: cfg.points_per_axis.iter().map(|&n| 2 * n + 1).collect(),
        ..cfg.clone()
    };
    let fine = grid_levels(model, &fine_cfg)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}
