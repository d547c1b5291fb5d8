//! The N×N normalized transition matrix: analytic free-kernel prefactor
//! times MC potential weights, scaled by the basis cell measures.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::basis::BasisSet;
use crate::error::{McError, Result};
use crate::model::{ModelSpec, PhysicalParams};
use crate::sampler::{
    draw_zero_bridge, measure_potential_weight, path_weight, time_weights, BridgeChain, Method,
    PathEnsembleStats, SamplerConfig, WeightAccumulator,
};
use crate::streams::{rng_for, stream_key, DOMAIN_PATH};

const MATRIX_MAGIC: &[u8; 8] = b"MCHMAT01";
/// Paths per shared-ensemble block; fixed so results never depend on
/// threading. Blocks bound the bridge cache memory.
const PATH_BLOCK: usize = 1024;

#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub n: usize,
    /// Row-major values; entry (r, c) is the amplitude from node c to node r
    /// scaled by √(measure_r · measure_c).
    pub values: Vec<f64>,
    /// Propagated standard errors, same layout.
    pub errors: Vec<f64>,
    pub basis: BasisSet,
    pub basis_id: String,
    pub t_total: f64,
    pub seed: u64,
    /// Entries whose relative error exceeds 50% (kept, only flagged).
    pub n_high_error: usize,
    /// Smallest Metropolis acceptance rate seen, 1 for BrownianBridge.
    pub min_acceptance: f64,
}

impl TransitionMatrix {
    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n + c]
    }

    pub fn error(&self, r: usize, c: usize) -> f64 {
        self.errors[r * self.n + c]
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                worst = worst.max((self.value(r, c) - self.value(c, r)).abs());
            }
        }
        worst
    }

    /// Median of entry errors relative to the largest entry magnitude;
    /// feeds the eigenvalue floor.
    pub fn relative_error_level(&self) -> f64 {
        let max_abs = self.max_abs_value();
        if max_abs == 0.0 {
            return 0.0;
        }
        let mut errs: Vec<f64> = self.errors.clone();
        errs.sort_by(f64::total_cmp);
        errs[errs.len() / 2] / max_abs
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(MATRIX_MAGIC)?;
        f.write_all(&(self.n as u64).to_le_bytes())?;
        f.write_all(&self.t_total.to_le_bytes())?;
        f.write_all(&self.seed.to_le_bytes())?;
        for v in self.values.iter().chain(self.errors.iter()) {
            f.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a dump written by write_binary; the dump does not store basis
    /// information, so the result is only suitable for value inspection.
    pub fn read_binary_raw(path: &Path) -> Result<RawMatrixDump> {
        let mut f = std::fs::File::open(path)?;
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != MATRIX_MAGIC {
            return Err(McError::Input("not a transition-matrix dump".into()));
        }
        let mut w8 = [0u8; 8];
        f.read_exact(&mut w8)?;
        let n = u64::from_le_bytes(w8) as usize;
        f.read_exact(&mut w8)?;
        let t_total = f64::from_le_bytes(w8);
        f.read_exact(&mut w8)?;
        let seed = u64::from_le_bytes(w8);
        let mut read_block = |len: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                f.read_exact(&mut w8)?;
                out.push(f64::from_le_bytes(w8));
            }
            Ok(out)
        };
        let values = read_block(n * n)?;
        let errors = read_block(n * n)?;
        Ok(RawMatrixDump { n, t_total, seed, values, errors })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("row,col,value,error\n");
        for r in 0..self.n {
            for c in 0..self.n {
                out.push_str(&format!(
                    "{r},{c},{:.16e},{:.16e}\n",
                    self.value(r, c),
                    self.error(r, c)
                ));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Raw contents of a binary matrix dump.
#[derive(Debug, Clone)]
pub struct RawMatrixDump {
    pub n: usize,
    pub t_total: f64,
    pub seed: u64,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Free-particle imaginary-time kernel
/// (m/(2πħT))^{D/2} · exp(−m|x_b−x_a|²/(2ħT)).
pub fn free_kernel(params: &PhysicalParams, x_a: &[f64], x_b: &[f64], t_total: f64) -> Result<f64> {
    if !(t_total > 0.0) {
        return Err(McError::Input(format!("T must be positive, got {t_total}")));
    }
    if x_a.len() != x_b.len() {
        return Err(McError::Input("endpoint dimensions differ".into()));
    }
    let d = x_a.len() as f64;
    let m = params.mass;
    let hbar = params.hbar;
    let mut dist2 = 0.0;
    for (a, b) in x_a.iter().zip(x_b) {
        dist2 += (b - a) * (b - a);
    }
    let prefactor = (m / (2.0 * std::f64::consts::PI * hbar * t_total)).powf(d / 2.0);
    Ok(prefactor * (-m * dist2 / (2.0 * hbar * t_total)).exp())
}

/// MC transition amplitude between two configurations: ⟨O_V⟩ × free kernel,
/// with the propagated statistical error.
pub fn amplitude(
    model: &ModelSpec,
    x_a: &[f64],
    x_b: &[f64],
    cfg: &SamplerConfig,
) -> Result<(f64, f64)> {
    let stats = measure_potential_weight(model, x_a, x_b, cfg)?;
    let kernel = free_kernel(&model.params, x_a, x_b, model.time.t_total)?;
    Ok((stats.mean_weight * kernel, stats.std_error * kernel))
}

/// How matrix entries derive their path ensembles from the sampler seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// Every entry reuses the fluctuation ensemble keyed by the seed alone.
    /// Entry estimates are correlated smoothly across endpoints, which keeps
    /// MC noise from burying the small eigenvalues that carry the upper part
    /// of the spectrum; this is the default.
    Shared,
    /// Each entry derives an independent stream from (seed, tag_r, tag_c).
    PerEntry,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Measure the upper triangle only and mirror (the exact matrix is
    /// symmetric); halves cost and yields an exactly symmetric matrix.
    pub symmetric_fill: bool,
    pub stream_mode: StreamMode,
    /// Per-node identity tags for PerEntry streams; defaults to node indices.
    /// Keying streams to identities makes basis reorderings permute the
    /// full-fill matrix exactly; under symmetric fill the measured triangle
    /// itself depends on the ordering.
    pub stream_tags: Option<Vec<u64>>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { symmetric_fill: true, stream_mode: StreamMode::Shared, stream_tags: None }
    }
}

/// Assemble M with default options (symmetric fill, shared streams).
pub fn build_matrix(
    model: &ModelSpec,
    basis: &BasisSet,
    cfg: &SamplerConfig,
) -> Result<TransitionMatrix> {
    build_matrix_with(model, basis, cfg, &BuildOptions::default())
}

struct EntryTask {
    row: usize,
    col: usize,
    kernel: f64,
    scale: f64, // √(measure_row · measure_col)
}

/// Assemble M_{rc} = √(Δx_r Δx_c) · amplitude(x_c → x_r).
pub fn build_matrix_with(
    model: &ModelSpec,
    basis: &BasisSet,
    cfg: &SamplerConfig,
    opts: &BuildOptions,
) -> Result<TransitionMatrix> {
    cfg.validate()?;
    if basis.dimension != model.dimension() {
        return Err(McError::Input(format!(
            "basis dimension {} does not match model dimension {}",
            basis.dimension,
            model.dimension()
        )));
    }
    let n = basis.len();
    if n == 0 {
        return Err(McError::Input("empty basis".into()));
    }
    if let Some(tags) = &opts.stream_tags {
        if tags.len() != n {
            return Err(McError::Input(format!(
                "stream_tags length {} does not match basis size {n}",
                tags.len()
            )));
        }
    }

    let mut entries: Vec<(usize, usize)> = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !opts.symmetric_fill || r <= c {
                entries.push((r, c));
            }
        }
    }

    let tasks: Vec<EntryTask> = entries
        .iter()
        .map(|&(r, c)| {
            let kernel = free_kernel(
                &model.params,
                &basis.nodes[c].position,
                &basis.nodes[r].position,
                model.time.t_total,
            )?;
            Ok(EntryTask {
                row: r,
                col: c,
                kernel,
                scale: (basis.nodes[r].cell_measure * basis.nodes[c].cell_measure).sqrt(),
            })
        })
        .collect::<Result<_>>()?;

    let (stats, min_acceptance) = match opts.stream_mode {
        StreamMode::Shared => run_shared(model, basis, cfg, &tasks)?,
        StreamMode::PerEntry => run_per_entry(model, basis, cfg, opts, &tasks)?,
    };

    let mut values = vec![0.0; n * n];
    let mut errors = vec![0.0; n * n];
    let mut n_high_error = 0usize;
    for (task, st) in tasks.iter().zip(&stats) {
        let value = task.scale * task.kernel * st.mean_weight;
        let error = task.scale * task.kernel * st.std_error;
        if value != 0.0 && error / value.abs() > 0.5 {
            n_high_error += 1;
        }
        values[task.row * n + task.col] = value;
        errors[task.row * n + task.col] = error;
        if opts.symmetric_fill && task.row != task.col {
            values[task.col * n + task.row] = value;
            errors[task.col * n + task.row] = error;
        }
    }

    Ok(TransitionMatrix {
        n,
        values,
        errors,
        basis: basis.clone(),
        basis_id: basis.id(),
        t_total: model.time.t_total,
        seed: cfg.seed,
        n_high_error,
        min_acceptance,
    })
}

/// Shared mode: one fluctuation ensemble serves every entry. Bridges are
/// produced in fixed path-index blocks and applied to all entries, so each
/// entry accumulates exactly the sequence measure_potential_weight would
/// produce with the same seed, bit for bit, at a fraction of the RNG cost.
fn run_shared(
    model: &ModelSpec,
    basis: &BasisSet,
    cfg: &SamplerConfig,
    tasks: &[EntryTask],
) -> Result<(Vec<PathEnsembleStats>, f64)> {
    let dim = model.dimension();
    let n_slices = model.time.n_slices;
    let stride = (n_slices + 1) * dim;
    let t_weights = time_weights(model);

    let mut chain = match cfg.method {
        Method::BrownianBridge => None,
        Method::Metropolis { step_size, n_thermalize, n_decorrelate } => {
            Some(BridgeChain::new(model, cfg.seed, step_size, n_thermalize, n_decorrelate))
        }
    };

    let mut accs: Vec<WeightAccumulator> =
        tasks.iter().map(|_| WeightAccumulator::new(cfg.n_paths)).collect();
    let mut block = vec![0.0; PATH_BLOCK.min(cfg.n_paths) * stride];
    let mut done = 0usize;
    while done < cfg.n_paths {
        let count = PATH_BLOCK.min(cfg.n_paths - done);
        for i in 0..count {
            let xi = &mut block[i * stride..(i + 1) * stride];
            match &mut chain {
                None => {
                    let mut rng = rng_for(cfg.seed, DOMAIN_PATH, (done + i) as u64);
                    draw_zero_bridge(model, &mut rng, xi);
                }
                Some(chain) => chain.next_bridge(xi),
            }
        }
        let block_ref = &block;
        tasks.par_iter().zip(accs.par_iter_mut()).for_each_init(
            || vec![0.0; dim],
            |scratch, (task, acc)| {
                let start = &basis.nodes[task.col].position;
                let end = &basis.nodes[task.row].position;
                for i in 0..count {
                    let xi = &block_ref[i * stride..(i + 1) * stride];
                    acc.push(path_weight(model, start, end, xi, &t_weights, scratch));
                }
            },
        );
        done += count;
    }
    let acceptance = chain.map_or(1.0, |c| c.acceptance_rate());
    let stats = accs.into_iter().map(|a| a.finish(acceptance)).collect();
    Ok((stats, acceptance))
}

/// PerEntry mode: every entry runs its own full measurement with a child
/// seed mixed from the entry's stream tags.
fn run_per_entry(
    model: &ModelSpec,
    basis: &BasisSet,
    cfg: &SamplerConfig,
    opts: &BuildOptions,
    tasks: &[EntryTask],
) -> Result<(Vec<PathEnsembleStats>, f64)> {
    let tag = |i: usize| opts.stream_tags.as_ref().map_or(i as u64, |t| t[i]);
    let stats: Vec<PathEnsembleStats> = tasks
        .par_iter()
        .map(|task| {
            let child =
                SamplerConfig { seed: stream_key(cfg.seed, tag(task.row), tag(task.col)), ..*cfg };
            measure_potential_weight(
                model,
                &basis.nodes[task.col].position,
                &basis.nodes[task.row].position,
                &child,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let min_acceptance = stats.iter().fold(1.0f64, |m, s| m.min(s.acceptance_rate));
    Ok((stats, min_acceptance))
}
