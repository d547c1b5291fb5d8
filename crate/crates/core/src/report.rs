//! Text artifacts of a run: CSV tables at full double precision and a
//! deterministic diagnostics block (no timings, so artifacts are
//! reproducible byte for byte).

use crate::error::{McError, Result};
use crate::spectral::{degenerate_groups, EffectiveSpectrum, ThermoPoint};
use crate::transition::TransitionMatrix;

/// Spectrum table; when a reference is given each level also carries the
/// reference energy and the relative deviation.
pub fn spectrum_csv(spectrum: &EffectiveSpectrum, reference: Option<&[f64]>) -> String {
    let mut s = String::new();
    match reference {
        None => s.push_str("level,energy,eigenvalue\n"),
        Some(_) => s.push_str("level,energy,eigenvalue,reference,rel_deviation\n"),
    }
    for (n, (&e, &lam)) in spectrum.energies.iter().zip(&spectrum.eigenvalues).enumerate() {
        match reference {
            None => {
                s.push_str(&format!("{n},{e:.16e},{lam:.16e}\n"));
            }
            Some(r) if n < r.len() => {
                let rel = (e - r[n]) / r[n].abs().max(f64::MIN_POSITIVE);
                s.push_str(&format!("{n},{e:.16e},{lam:.16e},{:.16e},{rel:.16e}\n", r[n]));
            }
            Some(_) => {
                s.push_str(&format!("{n},{e:.16e},{lam:.16e},,\n"));
            }
        }
    }
    s
}

/// Wave-function table: one row per node with coordinates, cell measure,
/// and the amplitudes of the first `n_levels` kept levels.
pub fn wavefunctions_csv(spectrum: &EffectiveSpectrum, n_levels: usize) -> String {
    let k = n_levels.min(spectrum.len());
    let dim = spectrum.nodes.first().map_or(0, |n| n.position.len());
    let mut s = String::from("node");
    for d in 0..dim {
        s.push_str(&format!(",x{d}"));
    }
    s.push_str(",measure");
    for level in 0..k {
        s.push_str(&format!(",psi_{level}"));
    }
    s.push('\n');
    for (i, node) in spectrum.nodes.iter().enumerate() {
        s.push_str(&i.to_string());
        for c in &node.position {
            s.push_str(&format!(",{c:.16e}"));
        }
        s.push_str(&format!(",{:.16e}", node.cell_measure));
        for level in 0..k {
            s.push_str(&format!(",{:.16e}", spectrum.wavefunctions[level][i]));
        }
        s.push('\n');
    }
    s
}

pub fn thermo_csv(points: &[ThermoPoint]) -> String {
    let mut s = String::from(
        "beta,partition_shifted,shift,internal_energy,specific_heat,free_energy,top_level_weight\n",
    );
    for p in points {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p.beta,
            p.partition,
            p.shift,
            p.internal_energy,
            p.specific_heat,
            p.free_energy,
            p.top_level_weight
        ));
    }
    s
}

pub fn oracle_csv(levels: &[f64]) -> String {
    let mut s = String::from("level,energy\n");
    for (n, e) in levels.iter().enumerate() {
        s.push_str(&format!("{n},{e:.16e}\n"));
    }
    s
}

/// Deterministic run summary. Holds everything a reader needs to judge the
/// run's health; wall-clock timings stay on stdout only.
pub fn diagnostics_text(matrix: &TransitionMatrix, spectrum: &EffectiveSpectrum) -> String {
    let mut s = String::new();
    s.push_str(&format!("basis_id: {}\n", matrix.basis_id));
    s.push_str(&format!("matrix_size: {}\n", matrix.n));
    s.push_str(&format!("seed: {}\n", matrix.seed));
    s.push_str(&format!("t_total: {}\n", matrix.t_total));
    s.push_str(&format!("min_acceptance: {}\n", matrix.min_acceptance));
    s.push_str(&format!("high_error_entries: {}\n", matrix.n_high_error));
    s.push_str(&format!("relative_error_level: {:.16e}\n", matrix.relative_error_level()));
    s.push_str(&format!("max_asymmetry: {:.16e}\n", spectrum.max_asymmetry));
    s.push_str(&format!("lambda_floor: {:.16e}\n", spectrum.lambda_floor));
    s.push_str(&format!("levels_kept: {}\n", spectrum.len()));
    s.push_str(&format!("levels_discarded: {}\n", spectrum.n_discarded));
    let groups = degenerate_groups(&spectrum.energies, 1e-8);
    let rendered: Vec<String> = groups
        .iter()
        .map(|g| {
            let ids: Vec<String> = g.iter().map(usize::to_string).collect();
            format!("[{}]", ids.join(" "))
        })
        .collect();
    s.push_str(&format!("degenerate_groups: {}\n", rendered.join(" ")));
    s
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub level: usize,
    pub energy: f64,
    pub reference: f64,
    pub rel_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub max_rel_deviation: f64,
    /// Level counts of the two inputs (rows cover the common prefix).
    pub n_left: usize,
    pub n_right: usize,
}

impl CompareReport {
    pub fn to_text(&self) -> String {
        let mut s =
            String::from("level  energy                  reference               rel_deviation\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:<5}  {:<22.15e}  {:<22.15e}  {:+.3e}\n",
                r.level, r.energy, r.reference, r.rel_deviation
            ));
        }
        s.push_str(&format!(
            "max |rel deviation| over {} levels: {:.3e}\n",
            self.rows.len(),
            self.max_rel_deviation
        ));
        if self.n_left != self.n_right {
            s.push_str(&format!(
                "note: inputs hold {} and {} levels; compared the common prefix\n",
                self.n_left, self.n_right
            ));
        }
        s
    }
}

/// Pull the `energy` column out of a headed CSV table.
fn energy_column(text: &str, what: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| McError::Input(format!("{what}: empty table")))?;
    let col = header
        .split(',')
        .position(|h| h.trim() == "energy")
        .ok_or_else(|| McError::Input(format!("{what}: no `energy` column in `{header}`")))?;
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let field = line
            .split(',')
            .nth(col)
            .ok_or_else(|| McError::Input(format!("{what}: row {} lacks column {col}", idx + 2)))?;
        let value: f64 = field.trim().parse().map_err(|_| {
            McError::Input(format!("{what}: row {}: `{field}` is not a number", idx + 2))
        })?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(McError::Input(format!("{what}: no data rows")));
    }
    Ok(out)
}

/// Level-by-level comparison of two spectrum tables (ours vs reference),
/// matching on row order over the common prefix.
pub fn compare_spectra(left_csv: &str, right_csv: &str) -> Result<CompareReport> {
    let left = energy_column(left_csv, "spectrum")?;
    let right = energy_column(right_csv, "reference")?;
    let rows: Vec<CompareRow> = left
        .iter()
        .zip(&right)
        .enumerate()
        .map(|(level, (&e, &r))| CompareRow {
            level,
            energy: e,
            reference: r,
            rel_deviation: (e - r) / r.abs().max(f64::MIN_POSITIVE),
        })
        .collect();
    let max_rel_deviation = rows.iter().fold(0.0f64, |m, r| m.max(r.rel_deviation.abs()));
    Ok(CompareReport { rows, max_rel_deviation, n_left: left.len(), n_right: right.len() })
}
