//! Closed-form references the MC pipeline is checked against: normal-mode
//! chain spectra, imaginary-time kernels for free and harmonic motion, and
//! product-spectrum composition.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{McError, Result};
use crate::model::{ChainSpec, PhysicalParams};

/// Normal-mode frequencies of the periodic chain,
/// ω_l = √(Ω² (2 sin(πl/N))² + Ω₀²), for the N integers
/// l = −⌊(N−1)/2⌋ ..= ⌈(N−1)/2⌉, in that order.
pub fn chain_frequencies(chain: &ChainSpec) -> Vec<f64> {
    let n = chain.n_osc as i64;
    let lo = -((n - 1) / 2);
    let hi = n / 2;
    (lo..=hi)
        .map(|l| {
            let s = 2.0 * (PI * l as f64 / n as f64).sin();
            (chain.omega_coupling * chain.omega_coupling * s * s
                + chain.omega_onsite * chain.omega_onsite)
                .sqrt()
        })
        .collect()
}

/// The chain potential as a dense quadratic form ½ qᵀ A q; the square roots
/// of A's eigenvalues are the frequencies by an independent route.
pub fn chain_quadratic_form(chain: &ChainSpec) -> Vec<f64> {
    let n = chain.n_osc;
    let w2 = chain.omega_coupling * chain.omega_coupling;
    let w02 = chain.omega_onsite * chain.omega_onsite;
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        a[j * n + j] += w02 + 2.0 * w2;
        let next = (j + 1) % n;
        a[j * n + next] -= w2;
        a[next * n + j] -= w2;
    }
    if n == 1 {
        // A single site couples to itself periodically; the difference term
        // vanishes identically.
        a[0] = w02;
    }
    a
}

#[derive(Debug, Clone)]
pub struct ChainLevel {
    pub energy: f64,
    /// Quanta per mode, aligned with the frequency ordering.
    pub occupations: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExactChainSpectrum {
    pub frequencies: Vec<f64>,
    /// Ascending by energy.
    pub levels: Vec<ChainLevel>,
    /// True when the requested cut falls inside a degenerate multiplet, so
    /// the last level has equal-energy partners that were not returned.
    pub truncated_degenerate: bool,
}

struct HeapState {
    energy: f64,
    occupations: Vec<usize>,
    /// Highest mode index incremented so far; successors may only increment
    /// modes at or past it, giving every state a unique generation path.
    frontier: usize,
}

impl PartialEq for HeapState {
    fn eq(&self, other: &Self) -> bool {
        self.energy == other.energy
    }
}
impl Eq for HeapState {}
impl PartialOrd for HeapState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapState {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.energy.total_cmp(&other.energy)
    }
}

/// Lowest `n_levels` exact energies E = Σ_k (n_k + ½) ħ ω_k by best-first
/// enumeration of occupation vectors.
pub fn chain_levels(
    chain: &ChainSpec,
    params: &PhysicalParams,
    n_levels: usize,
) -> Result<ExactChainSpectrum> {
    let frequencies = chain_frequencies(chain);
    if frequencies.iter().any(|&w| w <= 0.0) {
        return Err(McError::Input(
            "chain has a zero mode; level enumeration needs every frequency positive".into(),
        ));
    }
    let ground: f64 = frequencies.iter().map(|w| 0.5 * params.hbar * w).sum();
    let n_modes = frequencies.len();

    let mut heap: BinaryHeap<Reverse<HeapState>> = BinaryHeap::new();
    heap.push(Reverse(HeapState { energy: ground, occupations: vec![0; n_modes], frontier: 0 }));
    let mut levels = Vec::with_capacity(n_levels);
    while levels.len() < n_levels {
        let Some(Reverse(state)) = heap.pop() else { break };
        for j in state.frontier..n_modes {
            let mut occ = state.occupations.clone();
            occ[j] += 1;
            heap.push(Reverse(HeapState {
                energy: state.energy + params.hbar * frequencies[j],
                occupations: occ,
                frontier: j,
            }));
        }
        levels.push(ChainLevel { energy: state.energy, occupations: state.occupations });
    }

    let truncated_degenerate = match (levels.last(), heap.peek()) {
        (Some(last), Some(Reverse(next))) => {
            (next.energy - last.energy).abs() <= 1e-12 * last.energy.abs().max(1.0)
        }
        _ => false,
    };
    Ok(ExactChainSpectrum { frequencies, levels, truncated_degenerate })
}

/// Reference imaginary-time kernels (one factor per coordinate).
#[derive(Debug, Clone, Copy)]
pub enum ExactKernel {
    Free,
    Harmonic { omega: f64 },
}

/// ⟨x_b| e^{−HT/ħ} |x_a⟩ for the reference Hamiltonian, independent of the
/// MC code path. Free: (m/(2πħT))^{1/2} e^{−mΔx²/(2ħT)} per coordinate.
/// Harmonic: √(mω/(2πħ sinh ωT)) ·
/// exp(−(mω/2ħ)[(x_a²+x_b²) coth ωT − 2 x_a x_b / sinh ωT]) per coordinate.
pub fn exact_kernel_value(
    kernel: ExactKernel,
    params: &PhysicalParams,
    x_a: &[f64],
    x_b: &[f64],
    t_total: f64,
) -> Result<f64> {
    if x_a.len() != x_b.len() {
        return Err(McError::Input("endpoint dimensions differ".into()));
    }
    if !(t_total > 0.0) {
        return Err(McError::Input(format!("T must be positive, got {t_total}")));
    }
    let m = params.mass;
    let hbar = params.hbar;
    let mut value = 1.0;
    for (&a, &b) in x_a.iter().zip(x_b) {
        value *= match kernel {
            ExactKernel::Free => {
                (m / (2.0 * PI * hbar * t_total)).sqrt()
                    * (-m * (b - a) * (b - a) / (2.0 * hbar * t_total)).exp()
            }
            ExactKernel::Harmonic { omega } => {
                if !(omega > 0.0) {
                    return Err(McError::Input(format!(
                        "harmonic kernel needs omega > 0, got {omega}"
                    )));
                }
                let wt = omega * t_total;
                (m * omega / (2.0 * PI * hbar * wt.sinh())).sqrt()
                    * (-(m * omega / (2.0 * hbar)) * ((a * a + b * b) * wt.cosh() - 2.0 * a * b)
                        / wt.sinh())
                    .exp()
            }
        };
    }
    Ok(value)
}

/// Orthonormal real normal modes of the periodic chain, row k = mode k,
/// ordered to pair with `chain_mode_frequencies_for_matrix`.
fn chain_modes(n: usize) -> (Vec<Vec<f64>>, Vec<i64>) {
    let mut rows = Vec::with_capacity(n);
    let mut ls = Vec::with_capacity(n);
    let norm0 = 1.0 / (n as f64).sqrt();
    rows.push(vec![norm0; n]);
    ls.push(0);
    let half = (n - 1) / 2;
    for l in 1..=half {
        let c = (2.0 / n as f64).sqrt();
        rows.push((0..n).map(|j| c * (2.0 * PI * l as f64 * j as f64 / n as f64).cos()).collect());
        ls.push(l as i64);
        rows.push((0..n).map(|j| c * (2.0 * PI * l as f64 * j as f64 / n as f64).sin()).collect());
        ls.push(-(l as i64));
    }
    if n.is_multiple_of(2) && n > 1 {
        rows.push((0..n).map(|j| norm0 * if j % 2 == 0 { 1.0 } else { -1.0 }).collect());
        ls.push((n / 2) as i64);
    }
    (rows, ls)
}

/// Exact chain transition amplitude by normal-mode factorization: rotate
/// both endpoint configurations into mode coordinates and multiply one
/// harmonic kernel per mode.
pub fn chain_exact_kernel(
    chain: &ChainSpec,
    params: &PhysicalParams,
    q_a: &[f64],
    q_b: &[f64],
    t_total: f64,
) -> Result<f64> {
    let n = chain.n_osc;
    if q_a.len() != n || q_b.len() != n {
        return Err(McError::Input(format!(
            "chain endpoints must have {n} coordinates, got {} and {}",
            q_a.len(),
            q_b.len()
        )));
    }
    let (modes, ls) = chain_modes(n);
    let mut value = 1.0;
    for (row, &l) in modes.iter().zip(&ls) {
        let s = 2.0 * (PI * l as f64 / n as f64).sin();
        let omega = (chain.omega_coupling * chain.omega_coupling * s * s
            + chain.omega_onsite * chain.omega_onsite)
            .sqrt();
        let pa: f64 = row.iter().zip(q_a).map(|(u, q)| u * q).sum();
        let pb: f64 = row.iter().zip(q_b).map(|(u, q)| u * q).sum();
        value *=
            exact_kernel_value(ExactKernel::Harmonic { omega }, params, &[pa], &[pb], t_total)?;
    }
    Ok(value)
}

/// Lowest `n_levels` sums Σ_d ladder[d][i_d] over index tuples, ascending.
/// Each ladder must be ascending. Composes product spectra, e.g. an
/// isotropic 3-D oscillator from three 1-D ladders.
pub fn tensor_lowest(ladders: &[Vec<f64>], n_levels: usize) -> Result<Vec<f64>> {
    if ladders.is_empty() || ladders.iter().any(|l| l.is_empty()) {
        return Err(McError::Input("tensor composition needs non-empty ladders".into()));
    }
    for l in ladders {
        if l.windows(2).any(|w| w[0] > w[1]) {
            return Err(McError::Input("ladders must be ascending".into()));
        }
    }
    let dims = ladders.len();
    let base: f64 = ladders.iter().map(|l| l[0]).sum();
    let mut heap: BinaryHeap<Reverse<HeapState>> = BinaryHeap::new();
    heap.push(Reverse(HeapState { energy: base, occupations: vec![0; dims], frontier: 0 }));
    let mut out = Vec::with_capacity(n_levels);
    while out.len() < n_levels {
        let Some(Reverse(state)) = heap.pop() else { break };
        for d in state.frontier..dims {
            let idx = state.occupations[d] + 1;
            if idx >= ladders[d].len() {
                continue;
            }
            let mut occ = state.occupations.clone();
            occ[d] = idx;
            heap.push(Reverse(HeapState {
                energy: state.energy + ladders[d][idx] - ladders[d][idx - 1],
                occupations: occ,
                frontier: d,
            }));
        }
        out.push(state.energy);
    }
    Ok(out)
}
