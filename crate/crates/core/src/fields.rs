//! Velocity and force fields.
//!
//! The quantum velocity is `ẋ = -i (ħ/m) ψ'/ψ`, i.e. `∇S/m` for
//! `ψ = exp(iS/ħ)`, taken straight from the log-derivative so no branch
//! of `ln ψ` is ever chosen.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::states::{ModelParams, StateError, Wavefunction};

/// `|sin 2x|` below this is treated as sitting on a Pöschl–Teller wall.
pub const PT_SINGULAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("velocity pole: |psi| = {psi_abs:e} at x = {x}")]
    PoleProximity { psi_abs: f64, x: Complex64 },
    #[error("force singularity at x = {x} (|sin 2x| = {sin_abs:e})")]
    Singularity { x: Complex64, sin_abs: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// One field evaluation. `psi_abs` is reported by wavefunction-backed
/// fields so integrators can apply a relative pole floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub velocity: Complex64,
    pub psi_abs: Option<f64>,
}

impl FieldSample {
    pub fn plain(velocity: Complex64) -> Self {
        Self {
            velocity,
            psi_abs: None,
        }
    }
}

/// A first-order complex ODE `ẋ = v(x, t)`.
pub trait VelocityField: Sync {
    fn sample(&self, x: Complex64, t: f64) -> Result<FieldSample, FieldError>;

    /// Open interval of admissible `Re(x)`, if any.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Adapter turning a closure into a [`VelocityField`].
pub struct FnField<F>(pub F);

impl<F> VelocityField for FnField<F>
where
    F: Fn(Complex64, f64) -> Complex64 + Sync,
{
    fn sample(&self, x: Complex64, t: f64) -> Result<FieldSample, FieldError> {
        Ok(FieldSample::plain((self.0)(x, t)))
    }
}

/// Velocity `-i (ħ/m) ψ'/ψ` of any prepared state.
pub fn quantum_velocity(wf: &Wavefunction, x: Complex64, t: f64) -> Result<Complex64, FieldError> {
    let pair = wf.eval(x, t)?;
    velocity_from_pair(wf.params(), pair.psi, pair.dpsi_dx, x)
}

fn velocity_from_pair(
    params: &ModelParams,
    psi: Complex64,
    dpsi: Complex64,
    x: Complex64,
) -> Result<Complex64, FieldError> {
    let psi_abs = psi.norm();
    let v = Complex64::new(0.0, -params.hbar / params.mass) * (dpsi / psi);
    if psi_abs == 0.0 || !v.re.is_finite() || !v.im.is_finite() {
        return Err(FieldError::PoleProximity { psi_abs, x });
    }
    Ok(v)
}

/// Quantum velocity field of a wavefunction, for the integrator.
///
/// Evaluation outside the confinement interval is allowed here; escapes are
/// detected by the integrator against [`VelocityField::domain`].
pub struct QuantumField<'a> {
    wf: &'a Wavefunction,
}

impl<'a> QuantumField<'a> {
    pub fn new(wf: &'a Wavefunction) -> Self {
        Self { wf }
    }
}

impl VelocityField for QuantumField<'_> {
    fn sample(&self, x: Complex64, t: f64) -> Result<FieldSample, FieldError> {
        let pair = self.wf.eval_unchecked(x, t);
        let velocity = velocity_from_pair(self.wf.params(), pair.psi, pair.dpsi_dx, x)?;
        Ok(FieldSample {
            velocity,
            psi_abs: Some(pair.psi.norm()),
        })
    }

    fn domain(&self) -> Option<(f64, f64)> {
        self.wf.domain()
    }
}

/// `Ẋ = iω(X - 2η)` with `η = (λ/√2) e^{-i(ωt-κ)}`, in the dimensionless
/// coordinate `X = αx`.
pub fn ho_coherent_velocity(params: &ModelParams, lambda: f64, kappa: f64, big_x: Complex64, t: f64) -> Complex64 {
    let eta = Complex64::from_polar(lambda * FRAC_1_SQRT_2, -(params.omega * t - kappa));
    Complex64::new(0.0, params.omega) * (big_x - 2.0 * eta)
}

/// Closed-form coherent field expressed in physical `x` (`ẋ = Ẋ/α`).
pub struct HoCoherentField {
    pub params: ModelParams,
    pub lambda: f64,
    pub kappa: f64,
}

impl VelocityField for HoCoherentField {
    fn sample(&self, x: Complex64, t: f64) -> Result<FieldSample, FieldError> {
        let a = self.params.alpha;
        Ok(FieldSample::plain(
            ho_coherent_velocity(&self.params, self.lambda, self.kappa, a * x, t) / a,
        ))
    }
}

/// Real de Broglie–Bohm velocity `Ẋ = -ω√2 λ sin(ωt - κ)` of the oscillator
/// coherent state. Position independent.
pub fn dbb_velocity(lambda: f64, kappa: f64, omega: f64, t: f64) -> f64 {
    -omega * SQRT_2 * lambda * (omega * t - kappa).sin()
}

/// [`dbb_velocity`] as a field in physical `x`.
pub struct DbbField {
    pub params: ModelParams,
    pub lambda: f64,
    pub kappa: f64,
}

impl VelocityField for DbbField {
    fn sample(&self, _x: Complex64, t: f64) -> Result<FieldSample, FieldError> {
        let v = dbb_velocity(self.lambda, self.kappa, self.params.omega, t) / self.params.alpha;
        Ok(FieldSample::plain(Complex64::new(v, 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassicalKind {
    /// Spring constant `k`; [`ClassicalSystem::harmonic`] uses `k = mω²`.
    Harmonic { k: f64 },
    Free,
    /// `V(x) = l(l-1)/sin²(2x)`.
    PoschlTeller { l: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSystem {
    pub kind: ClassicalKind,
    pub params: ModelParams,
}

impl ClassicalSystem {
    pub fn harmonic(params: ModelParams) -> Self {
        Self {
            kind: ClassicalKind::Harmonic {
                k: params.mass * params.omega * params.omega,
            },
            params,
        }
    }

    pub fn free(params: ModelParams) -> Self {
        Self {
            kind: ClassicalKind::Free,
            params,
        }
    }

    pub fn poschl_teller(l: f64, params: ModelParams) -> Self {
        Self {
            kind: ClassicalKind::PoschlTeller { l },
            params,
        }
    }

    pub fn potential(&self, x: Complex64) -> Complex64 {
        match self.kind {
            ClassicalKind::Harmonic { k } => 0.5 * k * x * x,
            ClassicalKind::Free => Complex64::new(0.0, 0.0),
            ClassicalKind::PoschlTeller { l } => {
                let s = (2.0 * x).sin();
                l * (l - 1.0) / (s * s)
            }
        }
    }

    /// Complex Hamiltonian `p²/2m + V(x)`.
    pub fn hamiltonian(&self, x: Complex64, p: Complex64) -> Complex64 {
        p * p / (2.0 * self.params.mass) + self.potential(x)
    }
}

/// `-dV/dx` at complex `x`.
pub fn classical_force(system: &ClassicalSystem, x: Complex64) -> Result<Complex64, FieldError> {
    match system.kind {
        ClassicalKind::Harmonic { k } => Ok(-k * x),
        ClassicalKind::Free => Ok(Complex64::new(0.0, 0.0)),
        ClassicalKind::PoschlTeller { l } => {
            let s = (2.0 * x).sin();
            if s.norm() < PT_SINGULAR_FLOOR {
                return Err(FieldError::Singularity { x, sin_abs: s.norm() });
            }
            Ok(4.0 * l * (l - 1.0) * (2.0 * x).cos() / (s * s * s))
        }
    }
}

/// Energy of a classical launch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    pub energy: f64,
}

/// Complex classical oscillator `A cos ωt + i B sin ωt` with
/// `B = √(A² - 2E/(mω²))`.
pub fn classical_ho_solution(
    amplitude: f64,
    energy: EnergySpec,
    params: &ModelParams,
    t: f64,
) -> Result<Complex64, FieldError> {
    let b = ho_minor_axis(amplitude, energy, params)?;
    let phase = params.omega * t;
    Ok(Complex64::new(amplitude * phase.cos(), b * phase.sin()))
}

/// `B` of [`classical_ho_solution`], after checking `0 < E ≤ mω²A²/2`.
pub fn ho_minor_axis(amplitude: f64, energy: EnergySpec, params: &ModelParams) -> Result<f64, FieldError> {
    let m_w2 = params.mass * params.omega * params.omega;
    let e = energy.energy;
    if !(amplitude > 0.0) || !(e > 0.0) || e > 0.5 * m_w2 * amplitude * amplitude {
        return Err(FieldError::Argument(format!(
            "need A > 0 and 0 < E <= m w^2 A^2 / 2, got A = {amplitude}, E = {e}"
        )));
    }
    Ok((amplitude * amplitude - 2.0 * e / m_w2).max(0.0).sqrt())
}

/// Free particle `(±√(2E/m) t + c_r) + i c_i`.
pub fn free_particle_solution(
    energy: EnergySpec,
    c_r: f64,
    c_i: f64,
    sign: f64,
    params: &ModelParams,
    t: f64,
) -> Result<Complex64, FieldError> {
    if !(energy.energy > 0.0) {
        return Err(FieldError::Argument(format!(
            "free particle needs E > 0, got {}",
            energy.energy
        )));
    }
    let speed = (2.0 * energy.energy / params.mass).sqrt();
    Ok(Complex64::new(sign.signum() * speed * t + c_r, c_i))
}

/// `p₀ = √(2m(E - V(x₀)))` on the principal branch.
pub fn initial_momentum(system: &ClassicalSystem, x0: Complex64, energy: EnergySpec) -> Complex64 {
    (2.0 * system.params.mass * (energy.energy - system.potential(x0))).sqrt()
}
