//! Fixed-endpoint free-path ensembles and the potential weight ⟨O_V⟩.
//!
//! Any free path from a to b decomposes as the straight line from a to b
//! plus a zero-endpoint bridge ξ, and the kinetic action splits as
//! S₀[line + ξ] = S₀[line] + S₀[ξ] (the cross term vanishes because the
//! line has constant slope and ξ sums to zero increments). The samplers
//! therefore generate zero bridges, keyed only by (seed, path index), and
//! shift them by the endpoint line; ensembles for different endpoint pairs
//! under one seed share the same fluctuation fields.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{McError, Result};
use crate::model::{evaluate_potential, ModelSpec, PotentialValue};
use crate::streams::{rng_for, DOMAIN_CHAIN, DOMAIN_PATH};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Exact sequential-conditional bridge construction; zero autocorrelation.
    BrownianBridge,
    /// Single-site Metropolis updates of the zero bridge; cross-check sampler.
    Metropolis { step_size: f64, n_thermalize: usize, n_decorrelate: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub n_paths: usize,
    pub method: Method,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(McError::Input(format!(
                "n_paths must be >= 2 for error estimation, got {}",
                self.n_paths
            )));
        }
        if let Method::Metropolis { step_size, n_decorrelate, .. } = self.method {
            if !(step_size > 0.0) {
                return Err(McError::Input(format!("step_size must be > 0, got {step_size}")));
            }
            if n_decorrelate < 1 {
                return Err(McError::Input("n_decorrelate must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// MC estimate of one ⟨O_V⟩ with its statistical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEnsembleStats {
    pub mean_weight: f64,
    pub std_error: f64,
    /// Sample count that would give this std_error under i.i.d. sampling.
    pub n_effective: f64,
    /// Metropolis acceptance fraction during measurement; 1 for BrownianBridge.
    pub acceptance_rate: f64,
}

/// Batch count for batch-means error bars.
pub fn n_batches(n_paths: usize) -> usize {
    n_paths.min(16)
}

/// Zero-endpoint bridge fluctuations, flattened as [slice][dim]; slice 0 and
/// slice n_slices are identically zero. Interior slice k is drawn conditioned
/// on slice k−1 with mean ξ_{k−1}·r/(r+1) and variance (ħ/m)Δt·r/(r+1),
/// r = n_slices − k, which reproduces the bridge marginals exactly.
pub(crate) fn draw_zero_bridge(model: &ModelSpec, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let n = model.time.n_slices;
    let dim = model.dimension();
    debug_assert_eq!(out.len(), (n + 1) * dim);
    let diff = model.params.hbar / model.params.mass * model.time.dt();
    for d in 0..dim {
        out[d] = 0.0;
        out[n * dim + d] = 0.0;
    }
    for k in 1..n {
        let remain = (n - k) as f64;
        let shrink = remain / (remain + 1.0);
        let sd = (diff * shrink).sqrt();
        for d in 0..dim {
            let prev = out[(k - 1) * dim + d];
            let z: f64 = rng.sample(StandardNormal);
            out[k * dim + d] = prev * shrink + sd * z;
        }
    }
}

/// One free path from x_start to x_end: exact Brownian-bridge draw using the
/// caller's RNG stream. Returned as n_slices+1 configuration points.
pub fn sample_free_path(
    model: &ModelSpec,
    x_start: &[f64],
    x_end: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    model.check_dim(x_start)?;
    model.check_dim(x_end)?;
    let n = model.time.n_slices;
    let dim = model.dimension();
    let mut xi = vec![0.0; (n + 1) * dim];
    draw_zero_bridge(model, rng, &mut xi);
    let mut path = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let frac = k as f64 / n as f64;
        let mut point = Vec::with_capacity(dim);
        for d in 0..dim {
            point.push(x_start[d] + frac * (x_end[d] - x_start[d]) + xi[k * dim + d]);
        }
        path.push(point);
    }
    Ok(path)
}

/// Trapezoidal quadrature weights for ∫V dt over the slices (endpoints ½Δt).
pub(crate) fn time_weights(model: &ModelSpec) -> Vec<f64> {
    let n = model.time.n_slices;
    let dt = model.time.dt();
    let mut w = vec![dt; n + 1];
    w[0] = 0.5 * dt;
    w[n] = 0.5 * dt;
    w
}

/// exp(−Σ_k w_k V(line_k + ξ_k)/ħ) for one bridge, or 0 if the path touches
/// a forbidden region. `xi` is flattened [slice][dim].
pub(crate) fn path_weight(
    model: &ModelSpec,
    x_start: &[f64],
    x_end: &[f64],
    xi: &[f64],
    t_weights: &[f64],
    scratch: &mut [f64],
) -> f64 {
    let n = model.time.n_slices;
    let dim = model.dimension();
    let mut integral = 0.0;
    for k in 0..=n {
        let frac = k as f64 / n as f64;
        for d in 0..dim {
            scratch[d] = x_start[d] + frac * (x_end[d] - x_start[d]) + xi[k * dim + d];
        }
        match evaluate_potential(model, &scratch[..dim]).expect("dimension pre-checked") {
            PotentialValue::Finite(v) => integral += t_weights[k] * v,
            PotentialValue::Forbidden => return 0.0,
        }
    }
    (-integral / model.params.hbar).exp()
}

/// Streaming accumulator for one matrix entry: running sums plus batch means.
#[derive(Debug, Clone)]
pub(crate) struct WeightAccumulator {
    n_paths: usize,
    count: usize,
    sum: f64,
    sum_sq: f64,
    batch_sums: Vec<f64>,
}

impl WeightAccumulator {
    pub fn new(n_paths: usize) -> Self {
        Self { n_paths, count: 0, sum: 0.0, sum_sq: 0.0, batch_sums: vec![0.0; n_batches(n_paths)] }
    }

    pub fn push(&mut self, w: f64) {
        let b = self.count * self.batch_sums.len() / self.n_paths;
        self.batch_sums[b] += w;
        self.sum += w;
        self.sum_sq += w * w;
        self.count += 1;
    }

    pub fn finish(&self, acceptance_rate: f64) -> PathEnsembleStats {
        assert_eq!(self.count, self.n_paths, "accumulator not fully fed");
        let n = self.n_paths as f64;
        let nb = self.batch_sums.len();
        let mean = self.sum / n;
        // Path p lands in batch ⌊p·nb/n⌋, so batch b spans
        // [⌈b·n/nb⌉, ⌈(b+1)·n/nb⌉); sizes differ by at most one path and
        // the variance treats them as equal.
        let mut var_bm = 0.0;
        for (b, s) in self.batch_sums.iter().enumerate() {
            let lo = (b * self.n_paths).div_ceil(nb);
            let hi = ((b + 1) * self.n_paths).div_ceil(nb);
            let bm = s / (hi - lo) as f64;
            var_bm += (bm - mean) * (bm - mean);
        }
        let std_error = if nb > 1 { (var_bm / (nb * (nb - 1)) as f64).sqrt() } else { 0.0 };
        let sample_var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let n_effective = if std_error > 0.0 { sample_var / (std_error * std_error) } else { n };
        PathEnsembleStats { mean_weight: mean, std_error, n_effective, acceptance_rate }
    }
}

/// Metropolis chain over the interior slices of the zero bridge, targeting
/// exp(−S₀[ξ]/ħ). Gaussian proposals of width step_size per coordinate.
pub(crate) struct BridgeChain {
    xi: Vec<f64>,
    rng: ChaCha8Rng,
    step_size: f64,
    n_decorrelate: usize,
    accepted: u64,
    proposed: u64,
    stiffness: f64, // m/(ħ·Δt)
    n_slices: usize,
    dim: usize,
}

impl BridgeChain {
    pub fn new(
        model: &ModelSpec,
        seed: u64,
        step_size: f64,
        n_thermalize: usize,
        n_decorrelate: usize,
    ) -> Self {
        let n = model.time.n_slices;
        let dim = model.dimension();
        let mut chain = Self {
            xi: vec![0.0; (n + 1) * dim],
            rng: rng_for(seed, DOMAIN_CHAIN, 0),
            step_size,
            n_decorrelate,
            accepted: 0,
            proposed: 0,
            stiffness: model.params.mass / (model.params.hbar * model.time.dt()),
            n_slices: n,
            dim,
        };
        for _ in 0..n_thermalize {
            chain.sweep();
        }
        chain.accepted = 0;
        chain.proposed = 0;
        chain
    }

    fn sweep(&mut self) {
        let dim = self.dim;
        for k in 1..self.n_slices {
            for d in 0..dim {
                let old = self.xi[k * dim + d];
                let prev = self.xi[(k - 1) * dim + d];
                let next = self.xi[(k + 1) * dim + d];
                let z: f64 = self.rng.sample(StandardNormal);
                let new = old + self.step_size * z;
                // ΔS₀/ħ for moving one interior coordinate.
                let s_old = (old - prev) * (old - prev) + (next - old) * (next - old);
                let s_new = (new - prev) * (new - prev) + (next - new) * (next - new);
                let d_action = 0.5 * self.stiffness * (s_new - s_old);
                self.proposed += 1;
                let accept = d_action <= 0.0 || {
                    let u: f64 = self.rng.gen();
                    u < (-d_action).exp()
                };
                if accept {
                    self.xi[k * dim + d] = new;
                    self.accepted += 1;
                }
            }
        }
    }

    /// Advance n_decorrelate sweeps and expose the current bridge.
    pub fn next_bridge(&mut self, out: &mut [f64]) {
        for _ in 0..self.n_decorrelate {
            self.sweep();
        }
        out.copy_from_slice(&self.xi);
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Estimate ⟨exp(−∫V dt/ħ)⟩ over the free ensemble between fixed endpoints.
///
/// Deterministic for a fixed config: path p of a BrownianBridge ensemble is
/// keyed by (seed, p) and a Metropolis chain by the seed alone, independent
/// of the endpoints, so one seed defines one fluctuation ensemble.
pub fn measure_potential_weight(
    model: &ModelSpec,
    x_start: &[f64],
    x_end: &[f64],
    cfg: &SamplerConfig,
) -> Result<PathEnsembleStats> {
    cfg.validate()?;
    model.check_dim(x_start)?;
    model.check_dim(x_end)?;
    for (name, x) in [("x_start", x_start), ("x_end", x_end)] {
        if evaluate_potential(model, x)? == PotentialValue::Forbidden {
            return Err(McError::Input(format!("{name} lies in the forbidden region")));
        }
    }
    let n = model.time.n_slices;
    let dim = model.dimension();
    let t_weights = time_weights(model);
    let mut acc = WeightAccumulator::new(cfg.n_paths);
    let mut xi = vec![0.0; (n + 1) * dim];
    let mut scratch = vec![0.0; dim];
    let acceptance = match cfg.method {
        Method::BrownianBridge => {
            for p in 0..cfg.n_paths {
                let mut rng = rng_for(cfg.seed, DOMAIN_PATH, p as u64);
                draw_zero_bridge(model, &mut rng, &mut xi);
                acc.push(path_weight(model, x_start, x_end, &xi, &t_weights, &mut scratch));
            }
            1.0
        }
        Method::Metropolis { step_size, n_thermalize, n_decorrelate } => {
            let mut chain =
                BridgeChain::new(model, cfg.seed, step_size, n_thermalize, n_decorrelate);
            for _ in 0..cfg.n_paths {
                chain.next_bridge(&mut xi);
                acc.push(path_weight(model, x_start, x_end, &xi, &t_weights, &mut scratch));
            }
            chain.acceptance_rate()
        }
    };
    Ok(acc.finish(acceptance))
}
