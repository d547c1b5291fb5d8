//! Acceptance gate: one test per criterion, each printing a single
//! `criterion N: PASS/FAIL` line (visible with `--nocapture`) before
//! asserting. Run as
//!
//!   cargo test --test acceptance -- --nocapture --test-threads=1

use std::time::Instant;

use mch::basis::{build_regular_basis, build_stochastic_basis, stochastic_sigma_with, SigmaRule};
use mch::linalg::jacobi_eigen;
use mch::model::{ChainSpec, ModelSpec, PhysicalParams, PotentialSpec, TimeWindow};
use mch::oracle::{
    chain_frequencies, chain_levels, chain_quadratic_form, exact_kernel_value, ExactKernel,
};
use mch::oracle_grid::{grid_levels, GridOracleConfig};
use mch::sampler::{measure_potential_weight, Method, SamplerConfig};
use mch::spectral::{diagonalize, thermodynamics};
use mch::transition::{amplitude, build_matrix};

fn report(n: u32, ok: bool, detail: &str) {
    println!("criterion {n}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
}

/// Twenty lowest exact levels of the nine-site chain with unit coupling and
/// on-site frequency 2, from the closed-form mode sum.
const NINE_SITE_LEVELS: [f64; 20] = [
    10.944060480668,
    12.944060480668,
    13.057803869484,
    13.057803869484,
    13.321601993380,
    13.321601993380,
    13.589811791733,
    13.589811791733,
    13.751084748745,
    13.751084748745,
    14.944060480668,
    15.057803869484,
    15.057803869484,
    15.171547258300,
    15.171547258300,
    15.171547258300,
    15.321601993380,
    15.321601993380,
    15.435345382196,
    15.435345382196,
];

#[test]
fn criterion_1_chain_level_enumeration() {
    let start = Instant::now();
    let chain = ChainSpec::new(9, 1.0, 2.0).unwrap();
    let spectrum = chain_levels(&chain, &PhysicalParams::unit(), 20).unwrap();
    let mut worst = 0.0f64;
    for (level, expect) in spectrum.levels.iter().zip(&NINE_SITE_LEVELS) {
        worst = worst.max((level.energy - expect).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-9 && elapsed < 1.0;
    report(1, ok, &format!("20 nine-site levels, worst |dev| {worst:.2e}, {elapsed:.3}s"));
    assert!(worst <= 1e-9, "worst deviation {worst:.3e} exceeds 1e-9");
    assert!(elapsed < 1.0, "took {elapsed:.3}s, limit 1s");
}

#[test]
fn criterion_2_chain_frequencies_vs_quadratic_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n_osc in 2..=12 {
        let chain = ChainSpec::new(n_osc, 1.0, 2.0).unwrap();
        let a = chain_quadratic_form(&chain);
        let (mut eigs, _) = jacobi_eigen(&a, n_osc);
        eigs.reverse();
        let mut freqs = chain_frequencies(&chain);
        freqs.sort_by(f64::total_cmp);
        for (w, lam) in freqs.iter().zip(&eigs) {
            worst = worst.max((w - lam.max(0.0).sqrt()).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && elapsed < 1.0;
    report(2, ok, &format!("sites 2..=12, worst |dev| {worst:.2e}, {elapsed:.3}s"));
    assert!(worst <= 1e-12, "worst deviation {worst:.3e} exceeds 1e-12");
    assert!(elapsed < 1.0, "took {elapsed:.3}s, limit 1s");
}

#[test]
fn criterion_3_amplitudes_vs_harmonic_kernel() {
    let start = Instant::now();
    let model = ModelSpec::point(
        PotentialSpec::Harmonic1D { omega: 1.0 },
        PhysicalParams::unit(),
        TimeWindow::new(2.0, 64).unwrap(),
    );
    let cfg = SamplerConfig { n_paths: 10_000, method: Method::BrownianBridge, seed: 29 };
    let mut worst_rel = 0.0f64;
    let mut worst_pull = 0.0f64;
    for &xa in &[-2.0, 0.0, 2.0] {
        for &xb in &[-2.0, 0.0, 2.0] {
            let (value, error) = amplitude(&model, &[xa], &[xb], &cfg).unwrap();
            let exact = exact_kernel_value(
                ExactKernel::Harmonic { omega: 1.0 },
                &model.params,
                &[xa],
                &[xb],
                2.0,
            )
            .unwrap();
            let rel = ((value - exact) / exact).abs();
            let pull = (value - exact).abs() / error;
            worst_rel = worst_rel.max(rel);
            worst_pull = worst_pull.max(pull);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_rel < 0.02 && worst_pull <= 3.0 && elapsed < 10.0;
    report(
        3,
        ok,
        &format!(
            "9 endpoint pairs, worst rel {worst_rel:.4}, worst pull {worst_pull:.2} sigma, {elapsed:.2}s"
        ),
    );
    assert!(worst_pull <= 3.0, "worst deviation {worst_pull:.2} sigma exceeds 3");
    assert!(worst_rel < 0.02, "worst relative deviation {worst_rel:.4} exceeds 2%");
    assert!(elapsed < 10.0, "took {elapsed:.2}s, limit 10s");
}

#[test]
fn criterion_4_harmonic_pipeline_vs_grid() {
    let start = Instant::now();
    let model = ModelSpec::point(
        PotentialSpec::Harmonic1D { omega: 1.0 },
        PhysicalParams::unit(),
        TimeWindow::new(2.0, 64).unwrap(),
    );
    let basis = build_regular_basis(1, &[32], &[-5.0], &[5.0]).unwrap();
    let cfg = SamplerConfig { n_paths: 10_000, method: Method::BrownianBridge, seed: 29 };
    let matrix = build_matrix(&model, &basis, &cfg).unwrap();
    let spectrum = diagonalize(&matrix, 1.0).unwrap();

    let oracle = grid_levels(
        &model,
        &GridOracleConfig {
            box_low: vec![-10.0],
            box_high: vec![10.0],
            points_per_axis: vec![2000],
            n_levels: 5,
        },
    )
    .unwrap();

    let rels: Vec<f64> = oracle
        .iter()
        .enumerate()
        .map(|(k, o)| (spectrum.energies.get(k).copied().unwrap_or(f64::NAN) - o) / o)
        .collect();
    let worst = rels.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let elapsed = start.elapsed().as_secs_f64();
    let ok = spectrum.len() >= 5 && worst <= 0.03 && rels[0].abs() <= 0.01 && elapsed < 300.0;
    report(
        4,
        ok,
        &format!(
            "lowest 5 rel devs [{}], {elapsed:.1}s",
            rels.iter().map(|r| format!("{r:+.4}")).collect::<Vec<_>>().join(", ")
        ),
    );
    assert!(spectrum.len() >= 5, "only {} levels above the floor", spectrum.len());
    assert!(worst <= 0.03, "worst relative deviation {worst:.4} exceeds 3%");
    assert!(rels[0].abs() <= 0.01, "ground deviation {:.4} exceeds 1%", rels[0]);
    assert!(elapsed < 300.0, "took {elapsed:.1}s, limit 300s");
}

#[test]
fn criterion_5_chain_pipeline_stochastic_basis() {
    let model = ModelSpec::chain(
        ChainSpec::new(3, 1.0, 2.0).unwrap(),
        PhysicalParams::unit(),
        TimeWindow::new(2.0, 16).unwrap(),
    );
    // Width of the T-window kernel per coordinate; the plain amplitude
    // envelope (sinh rule) is far wider than the ground state and starves
    // every matrix entry, so the kernel-width rule is the usable reading.
    let policy = stochastic_sigma_with(&model, 2.0, SigmaRule::KernelWidth).unwrap();
    assert!(!policy.used_free_fallback);
    let basis = build_stochastic_basis(3, 300, &policy.sigma, 7).unwrap();
    let cfg = SamplerConfig { n_paths: 2000, method: Method::BrownianBridge, seed: 17 };
    let matrix = build_matrix(&model, &basis, &cfg).unwrap();
    let spectrum = diagonalize(&matrix, 1.0).unwrap();

    let exact =
        chain_levels(&ChainSpec::new(3, 1.0, 2.0).unwrap(), &PhysicalParams::unit(), 10).unwrap();
    let mut rels = Vec::new();
    for (k, level) in exact.levels.iter().enumerate() {
        let e = spectrum.energies.get(k).copied().unwrap_or(f64::NAN);
        let rel = (e - level.energy) / level.energy;
        println!("  level {k}: measured {e:.4}, exact {:.4}, rel {rel:+.4}", level.energy);
        rels.push(rel);
    }
    let worst = rels.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let ok = spectrum.len() >= 10 && worst <= 0.03 && rels.iter().all(|r| r.is_finite());
    report(
        5,
        ok,
        &format!(
            "three-site chain, 300 stochastic nodes, 2000 paths/entry: worst rel dev {worst:.4} over 10 levels (levels kept: {})",
            spectrum.len()
        ),
    );
    assert!(
        ok,
        "lowest 10 chain levels deviate up to {:.1}% (tolerance 3%); the statistical noise floor \
         of the transition matrix at 2000 paths/entry sits above the eigenvalues that carry \
         levels beyond the ground state in this 6-dimensional endpoint space",
        100.0 * worst
    );
}

#[test]
fn criterion_6_invariant_suite() {
    // Eigen-reconstruction and orthonormality at machine precision.
    let n = 7;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = ((i * 3 + j * 5) as f64).cos() + if i == j { 3.0 } else { 0.0 };
            a[i * n + j] = v;
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let (vals, vecs) = jacobi_eigen(&a, n);
    let mut recon_err = 0.0f64;
    let mut ortho_err = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let mut av = 0.0;
            let mut vv = 0.0;
            for k in 0..n {
                av += vecs[r * n + k] * vals[k] * vecs[c * n + k];
                vv += vecs[k * n + r] * vecs[k * n + c];
            }
            recon_err = recon_err.max((av - a[r * n + c]).abs());
            ortho_err = ortho_err.max((vv - if r == c { 1.0 } else { 0.0 }).abs());
        }
    }

    // Measure rescaling shifts every energy by -(hbar/T) ln c and leaves
    // differences unchanged.
    let model = ModelSpec::point(
        PotentialSpec::Harmonic1D { omega: 1.0 },
        PhysicalParams::unit(),
        TimeWindow::new(2.0, 16).unwrap(),
    );
    let basis = build_regular_basis(1, &[12], &[-4.0], &[4.0]).unwrap();
    let cfg = SamplerConfig { n_paths: 500, method: Method::BrownianBridge, seed: 3 };
    let m1 = build_matrix(&model, &basis, &cfg).unwrap();
    let c = 1.7;
    let m2 = build_matrix(&model, &basis.scale_measures(c), &cfg).unwrap();
    let s1 = diagonalize(&m1, 1.0).unwrap();
    let s2 = diagonalize(&m2, 1.0).unwrap();
    let expected_shift = -(1.0 / 2.0) * c.ln();
    let mut shift_err = 0.0f64;
    let mut diff_err = 0.0f64;
    let kept = s1.len().min(s2.len()).min(6);
    for k in 0..kept {
        shift_err = shift_err.max((s2.energies[k] - s1.energies[k] - expected_shift).abs());
        if k > 0 {
            diff_err = diff_err
                .max(((s2.energies[k] - s2.energies[0]) - (s1.energies[k] - s1.energies[0])).abs());
        }
    }

    // Determinism: identical config reproduces the matrix bit for bit.
    let m3 = build_matrix(&model, &basis, &cfg).unwrap();
    let replay_ok = m1.values == m3.values && m1.errors == m3.errors;

    // Free weights are exactly one with zero error.
    let free = ModelSpec::point(
        PotentialSpec::Zero,
        PhysicalParams::unit(),
        TimeWindow::new(2.0, 16).unwrap(),
    );
    let stats = measure_potential_weight(&free, &[0.7], &[-1.1], &cfg).unwrap();
    let free_ok = stats.mean_weight == 1.0 && stats.std_error == 0.0;

    // Errors shrink like 1/sqrt(paths): quadrupling paths halves the error.
    let mut ratio_sum = 0.0;
    let reps = 10;
    for rep in 0..reps {
        let small =
            SamplerConfig { n_paths: 2000, method: Method::BrownianBridge, seed: 100 + rep };
        let large =
            SamplerConfig { n_paths: 8000, method: Method::BrownianBridge, seed: 200 + rep };
        let a = measure_potential_weight(&model, &[1.0], &[-1.0], &small).unwrap();
        let b = measure_potential_weight(&model, &[1.0], &[-1.0], &large).unwrap();
        ratio_sum += a.std_error / b.std_error;
    }
    let clt_ratio = ratio_sum / reps as f64;
    let clt_ok = (1.5..2.7).contains(&clt_ratio);

    let ok = recon_err <= 1e-10
        && ortho_err <= 1e-12
        && shift_err <= 1e-12
        && diff_err <= 1e-12
        && replay_ok
        && free_ok
        && clt_ok;
    report(
        6,
        ok,
        &format!(
            "recon {recon_err:.1e}, ortho {ortho_err:.1e}, rescale shift {shift_err:.1e}, \
             diffs {diff_err:.1e}, replay {replay_ok}, free weights {free_ok}, clt ratio {clt_ratio:.2}"
        ),
    );
    assert!(recon_err <= 1e-10, "eigen reconstruction error {recon_err:.2e}");
    assert!(ortho_err <= 1e-12, "orthonormality error {ortho_err:.2e}");
    assert!(shift_err <= 1e-12, "measure-rescale shift error {shift_err:.2e}");
    assert!(diff_err <= 1e-12, "level-difference drift {diff_err:.2e}");
    assert!(replay_ok, "replay was not byte-identical");
    assert!(free_ok, "free-potential weights deviate from one");
    assert!(clt_ok, "error ratio {clt_ratio:.2} outside [1.5, 2.7] for 4x paths");
}

#[test]
fn criterion_7_thermodynamics_closed_form() {
    let energies: Vec<f64> = (0..20).map(|n| n as f64 + 0.5).collect();
    let mut worst_z = 0.0f64;
    for beta in [1.0, 2.0, 5.0] {
        let p = &thermodynamics(&energies, &[beta]).unwrap()[0];
        let z_exact = 1.0 / (1.0 - (-beta).exp());
        worst_z = worst_z.max(((p.partition - z_exact) / z_exact).abs());
    }
    // Low-temperature limit: beta far beyond the first gap.
    let cold = &thermodynamics(&energies, &[50.0]).unwrap()[0];
    let u_dev = (cold.internal_energy - energies[0]).abs();
    let ok = worst_z <= 1e-6 && u_dev <= 1e-6;
    report(
        7,
        ok,
        &format!("20-level ladder: worst Z rel dev {worst_z:.1e}, U(beta=50) - E_1 = {u_dev:.1e}"),
    );
    assert!(worst_z <= 1e-6, "partition function deviates by {worst_z:.2e}");
    assert!(u_dev <= 1e-6, "low-temperature energy deviates by {u_dev:.2e}");
}
