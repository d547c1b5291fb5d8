//! Physical system definitions: point particles in catalog potentials and
//! the periodic chain of coupled harmonic oscillators.

use crate::error::{McError, Result};

/// Global physical constants of a run. The usual convention is m = ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0) || !(hbar > 0.0) {
            return Err(McError::Input(format!(
                "mass and hbar must be positive, got mass={mass}, hbar={hbar}"
            )));
        }
        Ok(Self { mass, hbar })
    }

    pub fn unit() -> Self {
        Self { mass: 1.0, hbar: 1.0 }
    }
}

/// Imaginary-time window T = t_f − t_i and its discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_total: f64,
    pub n_slices: usize,
}

impl TimeWindow {
    pub fn new(t_total: f64, n_slices: usize) -> Result<Self> {
        if !(t_total > 0.0) {
            return Err(McError::Input(format!("t_total must be positive, got {t_total}")));
        }
        if n_slices < 2 {
            return Err(McError::Input(format!("n_slices must be >= 2, got {n_slices}")));
        }
        Ok(Self { t_total, n_slices })
    }

    /// Slice width Δt.
    pub fn dt(&self) -> f64 {
        self.t_total / self.n_slices as f64
    }
}

/// Potential catalog. Dimension is implied by the variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// V = 0 (free particle), 1-D.
    Zero,
    /// V = ½ m ω² x², 1-D.
    Harmonic1D { omega: f64 },
    /// V = −V₀ sech²(x), 1-D attractive well.
    SechWell { v0: f64 },
    /// V = ½ x² + ¼ x⁴, 1-D.
    Anharmonic,
    /// V = ½ |x|, 1-D.
    AbsLinear,
    /// V = F x for x ≥ 0, forbidden for x < 0.
    WallLinear { force: f64 },
    /// V = ½ m ω² (x² + y²), 2-D.
    Harmonic2D { omega: f64 },
    /// V = ½ m ω² (x² + y²) + λ x y, 2-D. Bounded below iff |λ| < m ω².
    CoupledHarmonic2D { omega: f64, lambda: f64 },
    /// V = ½ m ω² (x² + y² + z²), 3-D.
    Harmonic3D { omega: f64 },
}

impl PotentialSpec {
    pub fn dimension(&self) -> usize {
        match self {
            PotentialSpec::Zero
            | PotentialSpec::Harmonic1D { .. }
            | PotentialSpec::SechWell { .. }
            | PotentialSpec::Anharmonic
            | PotentialSpec::AbsLinear
            | PotentialSpec::WallLinear { .. } => 1,
            PotentialSpec::Harmonic2D { .. } | PotentialSpec::CoupledHarmonic2D { .. } => 2,
            PotentialSpec::Harmonic3D { .. } => 3,
        }
    }
}

/// Periodic chain of N_osc coupled oscillators,
/// V(q) = ½ Σ_j [Ω²(q_j − q_{j+1})² + Ω₀² q_j²] with q_{N+1} ≡ q_1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_osc: usize,
    pub omega_coupling: f64,
    pub omega_onsite: f64,
}

impl ChainSpec {
    pub fn new(n_osc: usize, omega_coupling: f64, omega_onsite: f64) -> Result<Self> {
        if n_osc < 1 {
            return Err(McError::Input("n_osc must be >= 1".into()));
        }
        if !(omega_coupling >= 0.0) {
            return Err(McError::Input(format!(
                "omega_coupling must be >= 0, got {omega_coupling}"
            )));
        }
        if !(omega_onsite > 0.0) {
            return Err(McError::Input(format!(
                "omega_onsite must be > 0 (mass gap), got {omega_onsite}"
            )));
        }
        Ok(Self { n_osc, omega_coupling, omega_onsite })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    PointParticle { dimension: usize, potential: PotentialSpec },
    OscillatorChain(ChainSpec),
}

/// Complete system definition shared by every other module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub geometry: Geometry,
    pub params: PhysicalParams,
    pub time: TimeWindow,
}

/// Result of a potential evaluation; Forbidden marks the hard-wall region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialValue {
    Finite(f64),
    Forbidden,
}

impl PotentialValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::Forbidden => None,
        }
    }
}

impl ModelSpec {
    pub fn point(potential: PotentialSpec, params: PhysicalParams, time: TimeWindow) -> Self {
        Self {
            geometry: Geometry::PointParticle { dimension: potential.dimension(), potential },
            params,
            time,
        }
    }

    pub fn chain(spec: ChainSpec, params: PhysicalParams, time: TimeWindow) -> Self {
        Self { geometry: Geometry::OscillatorChain(spec), params, time }
    }

    /// Configuration-space dimension D.
    pub fn dimension(&self) -> usize {
        match &self.geometry {
            Geometry::PointParticle { dimension, .. } => *dimension,
            Geometry::OscillatorChain(c) => c.n_osc,
        }
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(McError::Input(format!(
                "configuration has length {}, model dimension is {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

/// V(x) for the model's potential; `Forbidden` only for WallLinear at x < 0.
pub fn evaluate_potential(model: &ModelSpec, x: &[f64]) -> Result<PotentialValue> {
    model.check_dim(x)?;
    let m = model.params.mass;
    let v = match &model.geometry {
        Geometry::PointParticle { potential, .. } => match potential {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Harmonic1D { omega } => 0.5 * m * omega * omega * x[0] * x[0],
            PotentialSpec::SechWell { v0 } => {
                let s = 1.0 / x[0].cosh();
                -v0 * s * s
            }
            PotentialSpec::Anharmonic => {
                let x2 = x[0] * x[0];
                0.5 * x2 + 0.25 * x2 * x2
            }
            PotentialSpec::AbsLinear => 0.5 * x[0].abs(),
            PotentialSpec::WallLinear { force } => {
                if x[0] < 0.0 {
                    return Ok(PotentialValue::Forbidden);
                }
                force * x[0]
            }
            PotentialSpec::Harmonic2D { omega } => {
                0.5 * m * omega * omega * (x[0] * x[0] + x[1] * x[1])
            }
            PotentialSpec::CoupledHarmonic2D { omega, lambda } => {
                0.5 * m * omega * omega * (x[0] * x[0] + x[1] * x[1]) + lambda * x[0] * x[1]
            }
            PotentialSpec::Harmonic3D { omega } => {
                0.5 * m * omega * omega * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
            }
        },
        Geometry::OscillatorChain(c) => {
            let n = c.n_osc;
            let om2 = c.omega_coupling * c.omega_coupling;
            let om02 = c.omega_onsite * c.omega_onsite;
            let mut sum = 0.0;
            for j in 0..n {
                let dq = x[j] - x[(j + 1) % n];
                sum += om2 * dq * dq + om02 * x[j] * x[j];
            }
            0.5 * sum
        }
    };
    Ok(PotentialValue::Finite(v))
}

/// Discrete kinetic action S₀ = Σ_k (m/2)·|x_{k+1} − x_k|²/Δt over the path.
pub fn kinetic_action(model: &ModelSpec, path: &[Vec<f64>]) -> Result<f64> {
    let n_slices = model.time.n_slices;
    if path.len() != n_slices + 1 {
        return Err(McError::Input(format!(
            "path has {} points, expected n_slices+1 = {}",
            path.len(),
            n_slices + 1
        )));
    }
    for p in path {
        model.check_dim(p)?;
    }
    let dt = model.time.dt();
    let half_m = 0.5 * model.params.mass;
    let mut action = 0.0;
    for k in 0..n_slices {
        let mut d2 = 0.0;
        for (next, prev) in path[k + 1].iter().zip(&path[k]) {
            let dx = next - prev;
            d2 += dx * dx;
        }
        action += half_m * d2 / dt;
    }
    Ok(action)
}
