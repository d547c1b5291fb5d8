//! Position-space bases: regular box grids and stochastic Gaussian nodes
//! with importance-sampled cell measures.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{McError, Result};
use crate::model::{Geometry, ModelSpec, PotentialSpec};
use crate::streams::{rng_for, DOMAIN_BASIS};

#[derive(Debug, Clone, PartialEq)]
pub struct BasisNode {
    pub position: Vec<f64>,
    /// D-dimensional volume assigned to this node.
    pub cell_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    Regular { box_low: Vec<f64>, box_high: Vec<f64> },
    Stochastic { sigma: Vec<f64>, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub nodes: Vec<BasisNode>,
    pub kind: BasisKind,
    pub dimension: usize,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Short identifier used in reports and matrix headers.
    pub fn id(&self) -> String {
        match &self.kind {
            BasisKind::Regular { .. } => format!("regular-{}d-n{}", self.dimension, self.len()),
            BasisKind::Stochastic { seed, .. } => {
                format!("stochastic-{}d-n{}-seed{}", self.dimension, self.len(), seed)
            }
        }
    }

    /// Text table: one node per line, `index coords... cell_measure`.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{i}"));
            for c in &node.position {
                out.push_str(&format!(" {c:.16e}"));
            }
            out.push_str(&format!(" {:.16e}\n", node.cell_measure));
        }
        out
    }

    /// Scale every cell measure by c (used by normalization-shift tests).
    pub fn scale_measures(&self, c: f64) -> BasisSet {
        let mut scaled = self.clone();
        for node in &mut scaled.nodes {
            node.cell_measure *= c;
        }
        scaled
    }
}

/// Uniform tensor grid with nodes at the lower-left corner of each cell.
pub fn build_regular_basis(
    dimension: usize,
    per_axis_counts: &[usize],
    box_low: &[f64],
    box_high: &[f64],
) -> Result<BasisSet> {
    if per_axis_counts.len() != dimension
        || box_low.len() != dimension
        || box_high.len() != dimension
    {
        return Err(McError::Input(format!(
            "regular basis needs {dimension} counts and bounds per axis"
        )));
    }
    if per_axis_counts.iter().any(|&c| c < 1) {
        return Err(McError::Input("per-axis counts must be >= 1".into()));
    }
    for d in 0..dimension {
        if !(box_low[d] < box_high[d]) {
            return Err(McError::Input(format!(
                "degenerate box on axis {d}: [{}, {}]",
                box_low[d], box_high[d]
            )));
        }
    }
    let widths: Vec<f64> =
        (0..dimension).map(|d| (box_high[d] - box_low[d]) / per_axis_counts[d] as f64).collect();
    let cell_measure: f64 = widths.iter().product();
    let total: usize = per_axis_counts.iter().product();
    let mut nodes = Vec::with_capacity(total);
    let mut index = vec![0usize; dimension];
    for _ in 0..total {
        let position: Vec<f64> =
            (0..dimension).map(|d| box_low[d] + index[d] as f64 * widths[d]).collect();
        nodes.push(BasisNode { position, cell_measure });
        // odometer increment, last axis fastest
        for d in (0..dimension).rev() {
            index[d] += 1;
            if index[d] < per_axis_counts[d] {
                break;
            }
            index[d] = 0;
        }
    }
    Ok(BasisSet {
        nodes,
        kind: BasisKind::Regular { box_low: box_low.to_vec(), box_high: box_high.to_vec() },
        dimension,
    })
}

/// Width rule for the stochastic-node Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRule {
    /// σ² = ħ·sinh(ω t')/(m ω); reduces to ħt'/m as ω → 0, grows
    /// exponentially in ω t'.
    Sinh,
    /// σ² = ħ·tanh(ω t')/(m ω); the squared width of the imaginary-time
    /// kernel from the origin, saturating at the ground-state width ħ/(m ω).
    KernelWidth,
}

/// Per-coordinate σ plus a flag marking potentials without a dedicated rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPolicy {
    pub sigma: Vec<f64>,
    pub used_free_fallback: bool,
}

fn sigma_1d(rule: SigmaRule, hbar: f64, mass: f64, omega: f64, t_prime: f64) -> f64 {
    if omega == 0.0 {
        return (hbar * t_prime / mass).sqrt();
    }
    let arg = omega * t_prime;
    match rule {
        SigmaRule::Sinh => (hbar * arg.sinh() / (mass * omega)).sqrt(),
        SigmaRule::KernelWidth => (hbar * arg.tanh() / (mass * omega)).sqrt(),
    }
}

/// Gaussian width for stochastic nodes under an explicit rule. Harmonic
/// potentials use their ω per coordinate; the chain uses the uncoupled
/// single-oscillator rule with ω := Ω₀ on every coordinate; potentials
/// without a width rule fall back to the free value √(ħt'/m) (flagged).
pub fn stochastic_sigma_with(
    model: &ModelSpec,
    t_prime: f64,
    rule: SigmaRule,
) -> Result<SigmaPolicy> {
    if !(t_prime > 0.0) {
        return Err(McError::Input(format!("t_prime must be positive, got {t_prime}")));
    }
    let hbar = model.params.hbar;
    let mass = model.params.mass;
    let dim = model.dimension();
    let free = (hbar * t_prime / mass).sqrt();
    let (sigma, fallback) = match &model.geometry {
        Geometry::PointParticle { potential, .. } => match potential {
            PotentialSpec::Zero => (vec![free; dim], false),
            PotentialSpec::Harmonic1D { omega }
            | PotentialSpec::Harmonic2D { omega }
            | PotentialSpec::Harmonic3D { omega } => {
                (vec![sigma_1d(rule, hbar, mass, *omega, t_prime); dim], false)
            }
            _ => (vec![free; dim], true),
        },
        Geometry::OscillatorChain(c) => {
            (vec![sigma_1d(rule, hbar, mass, c.omega_onsite, t_prime); dim], false)
        }
    };
    Ok(SigmaPolicy { sigma, used_free_fallback: fallback })
}

/// Gaussian width under the sinh rule (see SigmaRule::Sinh).
pub fn stochastic_sigma(model: &ModelSpec, t_prime: f64) -> Result<SigmaPolicy> {
    stochastic_sigma_with(model, t_prime, SigmaRule::Sinh)
}

/// Product-Gaussian density at x for the given per-coordinate widths.
pub fn gaussian_density(sigma: &[f64], x: &[f64]) -> f64 {
    let mut p = 1.0;
    for (xi, si) in x.iter().zip(sigma) {
        p *= (-xi * xi / (2.0 * si * si)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * si);
    }
    p
}

/// N i.i.d. draws from the centered product Gaussian; node n carries the
/// importance-sampling measure 1/(N·P(x_n)), making Σ_n measure·f(x_n) an
/// unbiased estimate of ∫f dx.
pub fn build_stochastic_basis(
    dimension: usize,
    n_nodes: usize,
    sigma: &[f64],
    seed: u64,
) -> Result<BasisSet> {
    if n_nodes < 1 {
        return Err(McError::Input("stochastic basis needs N >= 1".into()));
    }
    if sigma.len() != dimension || sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(McError::Input("sigma must be positive and match the dimension".into()));
    }
    let mut rng = rng_for(seed, DOMAIN_BASIS, 0);
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let position: Vec<f64> = (0..dimension)
            .map(|d| {
                let z: f64 = rng.sample(StandardNormal);
                sigma[d] * z
            })
            .collect();
        let density = gaussian_density(sigma, &position);
        nodes.push(BasisNode { position, cell_measure: 1.0 / (n_nodes as f64 * density) });
    }
    Ok(BasisSet { nodes, kind: BasisKind::Stochastic { sigma: sigma.to_vec(), seed }, dimension })
}
