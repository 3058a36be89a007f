//! Cold-damped capacitive accelerometer.
//!
//! The proof mass feels the external force `F_ext` plus a Langevin force of
//! spectrum `2 H_m k_B Θ_m`. Its motion is read by a capacitive bridge
//! polarized at `ω_t` and an op-amp detection stage with capacitive feedback;
//! demodulation is treated as an ideal frequency translation from the
//! measurement band `Ω` to sidebands of `ω_t`.
//!
//! The bridge electromechanics are not modeled. The coupling between the
//! detection fields and the force is an explicit *transduction gain*
//! `κ` (N/√Hz per normalized field unit): a detection source with weight
//! `μ` in the detection estimator enters the force estimator as `κ μ`.
//!
//! With the servo loop closed and an infinite loop gain the force estimator
//! is unchanged; with a finite loop gain `g` the noise of the actuation
//! amplifier appears divided by `g`, which is the cascade composition.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::amplifier::{Feedback, OpAmpStage, SourceLabels};
use crate::cascade::compose;
use crate::estimator::{budget_with, BudgetEntry, EstimatorCoefficients, NoiseBudget};
use crate::spectra::{hz_to_angular, occupation_from_effective, temperature_from_effective, thermal_occupation, HBAR, K_B};
use crate::{Error, Result};

pub const FORCE_SIGNAL: &str = "F_ext";
pub const LANGEVIN_SOURCE: &str = "langevin";

/// Feedback capacitance of the default detection stage (F). Not a published
/// value; it puts `|Z_f|` near `R_a` at 100 kHz.
pub const DEFAULT_FEEDBACK_CAPACITANCE: f64 = 10e-12;

/// Default transduction gain, N/√Hz per normalized detection-field unit. A
/// placeholder keeping detection noise far below the Langevin term; the real
/// value depends on the bridge design.
pub const DEFAULT_TRANSDUCTION_GAIN: f64 = 1e-18;

pub const PRESETS: &[&str] = &["microscope"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceleroParams {
    /// Proof mass, kg.
    pub mass: f64,
    /// Mechanical damping `H_m`, kg/s.
    pub mechanical_damping: f64,
    /// Measured motion angular frequency `Ω`, rad/s.
    pub signal_omega: f64,
    /// Detection carrier angular frequency `ω_t`, rad/s.
    pub carrier_omega: f64,
    /// Amplifier noise impedance `R_a`, Ω.
    pub noise_impedance: f64,
    /// Amplifier noise effective temperature `Θ_a`, K.
    pub amplifier_theta: f64,
    /// Mechanical bath effective temperature `Θ_m`, K.
    pub mechanical_theta: f64,
}

impl AcceleroParams {
    /// Electrostatic accelerometer of the µSCOPE equivalence-principle
    /// mission. `Θ_m = 300 K` is not published; it is the room-temperature
    /// value consistent with the quoted `Σ_FF` and `H_m`.
    pub fn microscope() -> Self {
        AcceleroParams {
            mass: 0.27,
            mechanical_damping: 1.3e-5,
            signal_omega: hz_to_angular(5e-4),
            carrier_omega: hz_to_angular(1e5),
            noise_impedance: 0.15e6,
            amplifier_theta: 1.5,
            mechanical_theta: 300.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "microscope" => Some(Self::microscope()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let strictly = [
            ("mass", self.mass),
            ("signal frequency", self.signal_omega),
            ("carrier frequency", self.carrier_omega),
            ("noise impedance", self.noise_impedance),
            ("amplifier effective temperature", self.amplifier_theta),
        ];
        for (name, value) in strictly {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        for (name, value) in [("mechanical damping", self.mechanical_damping), ("mechanical effective temperature", self.mechanical_theta)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        if !(self.signal_omega < self.carrier_omega) {
            return Err(Error::InvalidParameter { name: "signal frequency (must be below the carrier)", value: self.signal_omega });
        }
        Ok(())
    }
}

/// `Σ_FF = 2 H_m k_B Θ_m`, in N²/Hz.
pub fn langevin_force_psd(params: &AcceleroParams) -> f64 {
    2.0 * params.mechanical_damping * K_B * params.mechanical_theta
}

/// `sqrt(Σ_FF) / M` with the Langevin spectrum, in m s⁻²/√Hz.
pub fn acceleration_sensitivity(params: &AcceleroParams) -> f64 {
    acceleration_sensitivity_for(langevin_force_psd(params), params.mass)
}

pub fn acceleration_sensitivity_for(force_psd: f64, mass: f64) -> f64 {
    libm::sqrt(force_psd) / mass
}

/// Detection stage used by the presets: matched lines (`R_l = R_r = R_a`),
/// capacitive feedback, and all three noise inputs at the bath temperature
/// that gives `Θ_a` at the carrier.
pub fn default_detection_stage(params: &AcceleroParams) -> Result<OpAmpStage> {
    let r = params.noise_impedance;
    let t = temperature_from_effective(params.carrier_omega, params.amplifier_theta)?;
    OpAmpStage::new(r, r, r, Feedback::Capacitor(DEFAULT_FEEDBACK_CAPACITANCE))?
        .with_temperatures(t, t, t)?
        .with_labels(SourceLabels::new("x", "det.r", "det.a", "det.a'"))
}

/// Force estimator: `F̂ = F_ext + Σ_α μ_α α^in`, normalized so the force
/// coefficient is exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceEstimator(EstimatorCoefficients);

impl ForceEstimator {
    pub fn new(coefficients: EstimatorCoefficients) -> Self {
        ForceEstimator(coefficients)
    }

    pub fn coefficients(&self) -> &EstimatorCoefficients {
        &self.0
    }

    pub fn mu(&self, source: &str) -> Option<Complex64> {
        self.0.mu(source)
    }

    /// Adds zero weights for sources that do not reach this estimator.
    pub fn extended_with_zeros<'a>(self, names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        Ok(ForceEstimator(self.0.extended_with_zeros(names)?))
    }

    pub fn perturbed(&self, source: &str, delta: Complex64) -> Self {
        let weights = self
            .0
            .weights()
            .iter()
            .map(|(n, mu)| (n.clone(), if n == source { mu + delta } else { *mu }))
            .collect();
        ForceEstimator(
            EstimatorCoefficients::new(self.0.signal(), self.0.gain(), weights).expect("same names as before"),
        )
    }
}

fn langevin_weight(params: &AcceleroParams) -> Complex64 {
    Complex64::new(libm::sqrt(2.0 * params.mechanical_damping * HBAR * params.signal_omega.abs()), 0.0)
}

/// Force estimator without feedback.
pub fn free_force_estimator(
    params: &AcceleroParams,
    detection: &OpAmpStage,
    transduction_gain: Option<f64>,
) -> Result<ForceEstimator> {
    params.validate()?;
    let kappa = transduction_gain.ok_or(Error::MissingTransductionGain)?;
    let det = detection.estimator(params.carrier_omega)?;
    let mut weights: Vec<(String, Complex64)> = vec![(LANGEVIN_SOURCE.into(), langevin_weight(params))];
    weights.extend(det.weights().iter().map(|(n, mu)| (n.clone(), mu * kappa)));
    Ok(ForceEstimator(EstimatorCoefficients::new(FORCE_SIGNAL, Complex64::new(1.0, 0.0), weights)?))
}

/// Force estimator read on the correction signal of a servo loop of gain
/// `loop_gain`, whose actuation amplifier contributes its own noise. Built by
/// composing the free estimator (as the upstream stage of gain `loop_gain`)
/// with the actuator stage estimator.
pub fn servo_force_estimator(
    params: &AcceleroParams,
    detection: &OpAmpStage,
    actuator: &OpAmpStage,
    transduction_gain: Option<f64>,
    loop_gain: Complex64,
) -> Result<ForceEstimator> {
    let free = free_force_estimator(params, detection, transduction_gain)?;
    let kappa = transduction_gain.ok_or(Error::MissingTransductionGain)?;
    let upstream = free.0.with_gain(loop_gain);
    let act = actuator.estimator(params.carrier_omega)?.scale_noise(Complex64::new(kappa, 0.0));
    let composed = compose(&upstream, &act)?;
    Ok(ForceEstimator(composed.with_gain(Complex64::new(1.0, 0.0))))
}

/// True iff both μ tables agree pointwise within `tolerance`.
pub fn servo_invariance_check(free: &ForceEstimator, servo: &ForceEstimator, tolerance: f64) -> Result<bool> {
    Ok(free.0.max_weight_difference(&servo.0)? <= tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limitation {
    Mechanical,
    Detection,
}

/// Force noise budget (N²/Hz) of the accelerometer.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelBudget {
    pub budget: NoiseBudget,
    pub langevin: f64,
    pub detection: f64,
    pub limitation: Limitation,
}

impl AccelBudget {
    pub fn total(&self) -> f64 {
        self.budget.total
    }

    pub fn is_detection_limited(&self) -> bool {
        self.limitation == Limitation::Detection
    }
}

/// Budget combining the Langevin force with the detection-stage noise
/// referred to force units. Detection occupations are evaluated at the
/// carrier; the Langevin occupation is `k_B Θ_m / ħΩ`.
pub fn accelerometer_budget(
    params: &AcceleroParams,
    detection: &OpAmpStage,
    transduction_gain: Option<f64>,
) -> Result<AccelBudget> {
    let estimator = free_force_estimator(params, detection, transduction_gain)?;
    let temps = detection.temperatures();
    let wt = params.carrier_omega;
    let mut budget = budget_with(&estimator.0, wt, |name| {
        if name == LANGEVIN_SOURCE {
            if params.mechanical_damping == 0.0 || params.mechanical_theta == 0.0 {
                return Ok(0.0);
            }
            occupation_from_effective(params.signal_omega, params.mechanical_theta)
        } else {
            let t = temps.get(name).ok_or_else(|| Error::MissingTemperature(name.into()))?;
            thermal_occupation(wt, t)
        }
    })?;
    budget.omega = params.signal_omega;
    let langevin = budget.partial(|s| s == LANGEVIN_SOURCE);
    let detection = budget.partial(|s| s != LANGEVIN_SOURCE);
    let limitation = if detection > langevin { Limitation::Detection } else { Limitation::Mechanical };
    Ok(AccelBudget { budget, langevin, detection, limitation })
}

/// Replaces the detection rows of a budget by zero (used to isolate the
/// Langevin term).
pub fn without_detection(budget: &AccelBudget) -> AccelBudget {
    let entries: Vec<BudgetEntry> = budget
        .budget
        .entries
        .iter()
        .map(|e| {
            if e.source == LANGEVIN_SOURCE {
                e.clone()
            } else {
                BudgetEntry { contribution: 0.0, mu_abs2: 0.0, ..e.clone() }
            }
        })
        .collect();
    let b = NoiseBudget::from_entries(budget.budget.omega, entries);
    AccelBudget { langevin: budget.langevin, detection: 0.0, limitation: Limitation::Mechanical, budget: b }
}

/// Effective temperature of the cold-damped motion: the total force noise
/// shared by the passive damping `H_m` and the servo damping `H_fb`,
/// `Θ_eff = Σ_total / (2 k_B (H_m + H_fb))`.
pub fn cold_damping_temperature(total_force_psd: f64, mechanical_damping: f64, servo_damping: f64) -> Result<f64> {
    let h = mechanical_damping + servo_damping;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter { name: "total damping", value: h });
    }
    Ok(total_force_psd / (2.0 * K_B * h))
}
