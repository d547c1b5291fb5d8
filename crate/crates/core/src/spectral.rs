//! From the transition matrix to effective energies, wave functions at the
//! basis nodes, and canonical-ensemble quantities.

use crate::basis::BasisNode;
use crate::error::{McError, Result};
use crate::linalg::jacobi_eigen;
use crate::transition::TransitionMatrix;

/// Eigenvalues at or below this floor carry no usable signal and are
/// discarded; the floor rises with the measured noise level so that noise
/// eigenvalues cannot masquerade as high levels.
fn lambda_floor(matrix: &TransitionMatrix, lambda_max: f64) -> f64 {
    (1e-3 * matrix.relative_error_level() * lambda_max).max(1e-12)
}

#[derive(Debug, Clone)]
pub struct EffectiveSpectrum {
    /// Kept energies, ascending: E_n = −(ħ/T) ln λ_n.
    pub energies: Vec<f64>,
    /// Matching transfer eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// wavefunctions[n][i] is ψ_n at node i, normalized to Σ_i Δx_i ψ² = 1
    /// with the largest-magnitude component positive.
    pub wavefunctions: Vec<Vec<f64>>,
    pub nodes: Vec<BasisNode>,
    /// Eigenvalues dropped at the floor (noise or negative).
    pub n_discarded: usize,
    pub lambda_floor: f64,
    pub t_total: f64,
    pub hbar: f64,
    /// Worst |M_{rc} − M_{cr}| of the input before symmetrization.
    pub max_asymmetry: f64,
}

impl EffectiveSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// (position, amplitude) pairs for level n.
    pub fn wavefunction(&self, n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        if n >= self.len() {
            return Err(McError::Input(format!(
                "level {n} out of range, spectrum holds {}",
                self.len()
            )));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.wavefunctions[n])
            .map(|(node, &amp)| (node.position.clone(), amp))
            .collect())
    }
}

/// Symmetrize, diagonalize, convert eigenvalues to energies. Levels whose
/// eigenvalue falls at or below the noise floor are discarded; if nothing
/// survives the run cannot say anything about the spectrum and that is a
/// diagnostic failure.
pub fn diagonalize(matrix: &TransitionMatrix, hbar: f64) -> Result<EffectiveSpectrum> {
    if !(hbar > 0.0) {
        return Err(McError::Input(format!("hbar must be positive, got {hbar}")));
    }
    let n = matrix.n;
    let max_asymmetry = matrix.max_asymmetry();
    let mut sym = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            sym[r * n + c] = 0.5 * (matrix.values[r * n + c] + matrix.values[c * n + r]);
        }
    }
    let (lambdas, vectors) = jacobi_eigen(&sym, n);

    let floor = lambda_floor(matrix, lambdas[0].max(0.0));
    let kept = lambdas.iter().take_while(|&&l| l > floor).count();
    if kept == 0 {
        return Err(McError::Diagnostic(format!(
            "no transfer eigenvalue above the noise floor {floor:.3e} (largest: {:.3e})",
            lambdas[0]
        )));
    }

    let energies: Vec<f64> =
        lambdas[..kept].iter().map(|&l| -(hbar / matrix.t_total) * l.ln()).collect();

    let mut wavefunctions = Vec::with_capacity(kept);
    for k in 0..kept {
        // Eigenvector components carry a √measure factor relative to ψ.
        let mut psi: Vec<f64> = (0..n)
            .map(|i| vectors[i * n + k] / matrix.basis.nodes[i].cell_measure.sqrt())
            .collect();
        let norm2: f64 =
            psi.iter().zip(&matrix.basis.nodes).map(|(p, node)| node.cell_measure * p * p).sum();
        let mut scale = 1.0 / norm2.sqrt();
        let lead = psi.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            scale = -scale;
        }
        for p in &mut psi {
            *p *= scale;
        }
        wavefunctions.push(psi);
    }

    Ok(EffectiveSpectrum {
        energies,
        eigenvalues: lambdas[..kept].to_vec(),
        wavefunctions,
        nodes: matrix.basis.nodes.clone(),
        n_discarded: n - kept,
        lambda_floor: floor,
        t_total: matrix.t_total,
        hbar,
        max_asymmetry,
    })
}

/// Indices grouped by equal energy within `rel_tol` of the local scale,
/// for degeneracy reporting. Every level lands in exactly one group.
pub fn degenerate_groups(energies: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &e) in energies.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - energies[g[0]]).abs() <= rel_tol * e.abs().max(1.0) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

#[derive(Debug, Clone, Copy)]
pub struct ThermoPoint {
    pub beta: f64,
    /// Partition sum over the retained levels with energies shifted by the
    /// ground energy; the shift keeps exponentials in range at large β.
    pub partition: f64,
    pub shift: f64,
    pub internal_energy: f64,
    pub specific_heat: f64,
    pub free_energy: f64,
    /// Boltzmann weight of the highest retained level relative to Z; small
    /// values mean the truncation does not bite at this β.
    pub top_level_weight: f64,
}

/// Canonical-ensemble quantities from a finite set of levels. Energies must
/// be ascending; β values must be positive.
pub fn thermodynamics(energies: &[f64], betas: &[f64]) -> Result<Vec<ThermoPoint>> {
    if energies.is_empty() {
        return Err(McError::Input("no energy levels for thermodynamics".into()));
    }
    if energies.windows(2).any(|w| w[0] > w[1]) {
        return Err(McError::Input("energies must be ascending".into()));
    }
    let shift = energies[0];
    betas
        .iter()
        .map(|&beta| {
            if !(beta > 0.0) {
                return Err(McError::Input(format!("beta must be positive, got {beta}")));
            }
            let mut z = 0.0;
            let mut sum_e = 0.0;
            let mut sum_e2 = 0.0;
            for &e in energies {
                let de = e - shift;
                let w = (-beta * de).exp();
                z += w;
                sum_e += de * w;
                sum_e2 += de * de * w;
            }
            let mean = sum_e / z;
            let var = sum_e2 / z - mean * mean;
            Ok(ThermoPoint {
                beta,
                partition: z,
                shift,
                internal_energy: shift + mean,
                specific_heat: beta * beta * var,
                free_energy: shift - z.ln() / beta,
                top_level_weight: (-beta * (energies[energies.len() - 1] - shift)).exp() / z,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_regular_basis;
    use crate::model::{ModelSpec, PhysicalParams, PotentialSpec, TimeWindow};
    use crate::sampler::{Method, SamplerConfig};
    use crate::transition::build_matrix;
    use approx::assert_relative_eq;

    /// Matrix with prescribed values over a unit-measure basis.
    fn matrix_from(values: Vec<f64>, errors: Vec<f64>, n: usize, t_total: f64) -> TransitionMatrix {
        let basis = build_regular_basis(1, &[n], &[0.0], &[n as f64]).unwrap();
        TransitionMatrix {
            n,
            values,
            errors,
            basis_id: basis.id(),
            basis,
            t_total,
            seed: 0,
            n_high_error: 0,
            min_acceptance: 1.0,
        }
    }

    #[test]
    fn diagonal_exponentials_invert_to_energies() {
        let t = 2.0;
        let m = matrix_from(
            vec![(-0.5f64 * t).exp(), 0.0, 0.0, (-1.5f64 * t).exp()],
            vec![0.0; 4],
            2,
            t,
        );
        let s = diagonalize(&m, 1.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s.energies[0], 0.5, max_relative = 1e-13);
        assert_relative_eq!(s.energies[1], 1.5, max_relative = 1e-13);
        assert_eq!(s.n_discarded, 0);
    }

    #[test]
    fn hbar_scales_energies() {
        let m = matrix_from(vec![(-1.0f64).exp()], vec![0.0], 1, 1.0);
        let s = diagonalize(&m, 2.0).unwrap();
        assert_relative_eq!(s.energies[0], 2.0, max_relative = 1e-13);
    }

    #[test]
    fn floor_discards_tiny_eigenvalues() {
        let m = matrix_from(vec![0.5, 0.0, 0.0, 1e-14], vec![0.0; 4], 2, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.n_discarded, 1);
        assert_eq!(s.lambda_floor, 1e-12);
    }

    #[test]
    fn negative_eigenvalues_discarded() {
        let m = matrix_from(vec![0.5, 0.0, 0.0, -0.25], vec![0.0; 4], 2, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.n_discarded, 1);
    }

    #[test]
    fn all_below_floor_is_diagnostic_error() {
        let m = matrix_from(vec![1e-15, 0.0, 0.0, 1e-16], vec![0.0; 4], 2, 1.0);
        match diagonalize(&m, 1.0) {
            Err(McError::Diagnostic(_)) => {}
            other => panic!("expected diagnostic error, got {other:?}"),
        }
    }

    #[test]
    fn noisy_matrix_raises_floor() {
        // Errors at 10% of the top entry push the floor to 1e-4·λmax scale.
        let m = matrix_from(vec![0.5, 0.0, 0.0, 1e-6], vec![0.05; 4], 2, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.lambda_floor > 1e-6);
    }

    #[test]
    fn wavefunctions_measure_orthonormal() {
        // Non-uniform measures: basis over [0,3] with 3 cells, matrix mixing
        // all nodes; orthonormality must hold in the Σ Δx ψψ' sense.
        let basis = build_regular_basis(1, &[3], &[0.0], &[3.0]).unwrap();
        let basis = basis.scale_measures(0.7);
        let values = vec![
            0.9, 0.2, 0.05, //
            0.2, 0.7, 0.1, //
            0.05, 0.1, 0.5,
        ];
        let m = TransitionMatrix {
            n: 3,
            values,
            errors: vec![0.0; 9],
            basis_id: basis.id(),
            basis,
            t_total: 1.0,
            seed: 0,
            n_high_error: 0,
            min_acceptance: 1.0,
        };
        let s = diagonalize(&m, 1.0).unwrap();
        for a in 0..s.len() {
            for b in 0..s.len() {
                let dot: f64 = (0..3)
                    .map(|i| {
                        s.nodes[i].cell_measure * s.wavefunctions[a][i] * s.wavefunctions[b][i]
                    })
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sign_convention_positive_peak() {
        let m = matrix_from(vec![0.8, 0.1, 0.1, 0.3], vec![0.0; 4], 2, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        for psi in &s.wavefunctions {
            let lead =
                psi.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn asymmetric_input_symmetrized_and_recorded() {
        let m = matrix_from(vec![0.5, 0.3, 0.1, 0.5], vec![0.0; 4], 2, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        assert_relative_eq!(s.max_asymmetry, 0.2, max_relative = 1e-14);
        // Eigenvalues are those of the symmetrized matrix [0.5, 0.2; 0.2, 0.5].
        assert_relative_eq!(s.eigenvalues[0], 0.7, max_relative = 1e-13);
        assert_relative_eq!(s.eigenvalues[1], 0.3, max_relative = 1e-13);
    }

    #[test]
    fn harmonic_pipeline_recovers_low_levels() {
        let model = ModelSpec::point(
            PotentialSpec::Harmonic1D { omega: 1.0 },
            PhysicalParams::unit(),
            TimeWindow::new(2.0, 32).unwrap(),
        );
        let basis = build_regular_basis(1, &[32], &[-5.0], &[5.0]).unwrap();
        let cfg = SamplerConfig { n_paths: 2000, method: Method::BrownianBridge, seed: 11 };
        let m = build_matrix(&model, &basis, &cfg).unwrap();
        let s = diagonalize(&m, 1.0).unwrap();
        assert!(s.len() >= 3);
        for (k, expect) in [0.5, 1.5, 2.5].iter().enumerate() {
            assert_relative_eq!(s.energies[k], expect, max_relative = 0.05);
        }
    }

    #[test]
    fn wavefunction_accessor_pairs_positions() {
        let m = matrix_from(vec![0.5], vec![0.0], 1, 1.0);
        let s = diagonalize(&m, 1.0).unwrap();
        let wf = s.wavefunction(0).unwrap();
        assert_eq!(wf.len(), 1);
        assert_eq!(wf[0].0, vec![0.0]);
        assert!(s.wavefunction(5).is_err());
    }

    #[test]
    fn degenerate_grouping() {
        let groups = degenerate_groups(&[1.0, 1.0 + 1e-12, 2.0, 2.0, 3.0], 1e-8);
        assert_eq!(groups, vec![vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn harmonic_ladder_thermodynamics_closed_form() {
        // E_n = n + 1/2 for 60 levels; at βω ≥ 1 truncation is ≤ e⁻⁶⁰.
        let energies: Vec<f64> = (0..60).map(|n| n as f64 + 0.5).collect();
        for beta in [1.0, 2.0, 5.0] {
            let p = &thermodynamics(&energies, &[beta]).unwrap()[0];
            let z_exact = 1.0 / (1.0 - (-beta).exp());
            let u_exact = 0.5 + 1.0 / (beta.exp() - 1.0);
            let c_exact = beta * beta * beta.exp() / (beta.exp() - 1.0).powi(2);
            assert_relative_eq!(p.partition, z_exact, max_relative = 1e-9);
            assert_relative_eq!(p.internal_energy, u_exact, max_relative = 1e-9);
            assert_relative_eq!(p.specific_heat, c_exact, max_relative = 1e-8);
            assert_eq!(p.shift, 0.5);
        }
    }

    #[test]
    fn low_temperature_limit_is_ground_energy() {
        let energies = vec![0.5, 1.5, 2.5];
        let p = &thermodynamics(&energies, &[200.0]).unwrap()[0];
        assert_relative_eq!(p.internal_energy, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.free_energy, 0.5, epsilon = 1e-12);
        assert!(p.top_level_weight < 1e-100);
    }

    #[test]
    fn thermodynamics_rejects_bad_input() {
        assert!(thermodynamics(&[], &[1.0]).is_err());
        assert!(thermodynamics(&[2.0, 1.0], &[1.0]).is_err());
        assert!(thermodynamics(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn single_level_thermodynamics() {
        let p = &thermodynamics(&[0.75], &[3.0]).unwrap()[0];
        assert_eq!(p.partition, 1.0);
        assert_eq!(p.internal_energy, 0.75);
        assert_eq!(p.specific_heat, 0.0);
        assert_eq!(p.top_level_weight, 1.0);
    }
}
