//! Ideal operational-amplifier measurement stage.
//!
//! Lines `l` (signal, impedance `R_l`) and `r` (readout, `R_r`) are attached
//! to the inverting input and to the output; a reactive impedance `Z_f` closes
//! the loop. The limits of infinite gain, infinite input impedance and null
//! output impedance are built into the characteristic equations
//!
//! ```text
//! U = U_l = U_r + Z_f I_f
//! I = I_l + I_f
//! ```
//!
//! where `U`, `I` are the amplifier noise generators, written on two noise
//! channels `a` and the conjugated `a'`:
//!
//! ```text
//! U[ω] = sqrt(ħ|ω| R_a / 2) (a[ω] - a'[-ω])
//! I[ω] = sqrt(ħ|ω| / 2R_a) (a[ω] + a'[-ω])
//! ```
//!
//! These prefactors give `[U[ω], I[ω']] = 2π ħω δ(ω+ω')` and reproduce the
//! textbook estimator; some printed versions carry `sqrt(2ħ|ω| R_a)` instead,
//! which changes only the overall normalization. `R_a` is the amplifier noise
//! impedance `sqrt(σ_UU/σ_II)`, also written `R_0`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::estimator::{added_noise, EstimatorCoefficients, NoiseBudget, Temperatures};
use crate::network::{complete_quasi_unitary, Element, Network, PortSpec, ScatteringMap, GROUND};
use crate::spectra::HBAR;
use crate::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Feedback element. Impedances follow the quantum sign convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feedback {
    Resistor(f64),
    Capacitor(f64),
    Inductor(f64),
    Impedance(Complex64),
}

impl Feedback {
    pub fn impedance(&self, omega: f64) -> Complex64 {
        match *self {
            Feedback::Resistor(r) => Complex64::new(r, 0.0),
            Feedback::Capacitor(c) => ONE / (-I * omega * c),
            Feedback::Inductor(l) => -I * omega * l,
            Feedback::Impedance(z) => z,
        }
    }

    pub fn is_reactive(&self) -> bool {
        match *self {
            Feedback::Resistor(_) => false,
            Feedback::Capacitor(_) | Feedback::Inductor(_) => true,
            Feedback::Impedance(z) => z.re == 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, value) = match *self {
            Feedback::Resistor(r) => ("feedback resistance", r),
            Feedback::Capacitor(c) => ("feedback capacitance", c),
            Feedback::Inductor(l) => ("feedback inductance", l),
            Feedback::Impedance(z) => ("feedback impedance", z.norm()),
        };
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name, value })
        }
    }

    fn element(&self) -> Element {
        match *self {
            Feedback::Resistor(r) => Element::Impedance(Complex64::new(r, 0.0)),
            Feedback::Capacitor(c) => Element::Capacitor(c),
            Feedback::Inductor(l) => Element::Inductor(l),
            Feedback::Impedance(z) => Element::Impedance(z),
        }
    }
}

/// Channel names used by a stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLabels {
    pub signal: String,
    pub readout: String,
    pub noise: String,
    pub conj: String,
}

impl SourceLabels {
    pub fn new(signal: &str, readout: &str, noise: &str, conj: &str) -> Self {
        SourceLabels { signal: signal.into(), readout: readout.into(), noise: noise.into(), conj: conj.into() }
    }

    fn channels(&self) -> Vec<String> {
        vec![self.signal.clone(), self.readout.clone(), self.noise.clone(), self.conj.clone()]
    }

    fn all_distinct(&self) -> bool {
        let c = self.channels();
        (0..4).all(|i| (i + 1..4).all(|j| c[i] != c[j]))
    }
}

impl Default for SourceLabels {
    fn default() -> Self {
        SourceLabels::new("l", "r", "a", "a'")
    }
}

#[derive(Debug, Clone)]
pub struct OpAmpStage {
    left_impedance: f64,
    right_impedance: f64,
    noise_impedance: f64,
    noise_impedance_fn: Option<fn(f64) -> f64>,
    feedback: Feedback,
    noise_temperature: f64,
    conj_temperature: f64,
    readout_temperature: f64,
    labels: SourceLabels,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

fn temperature(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeTemperature(value))
    }
}

impl OpAmpStage {
    /// Stage with reactive feedback; all temperatures start at 0 K.
    pub fn new(left_impedance: f64, right_impedance: f64, noise_impedance: f64, feedback: Feedback) -> Result<Self> {
        if !feedback.is_reactive() {
            return Err(Error::DissipativeFeedback(feedback.impedance(1.0).re));
        }
        Self::new_allowing_dissipation(left_impedance, right_impedance, noise_impedance, feedback)
    }

    /// Like [`OpAmpStage::new`] but accepts lossy feedback. Such a stage is
    /// not quantum-consistent; useful only to exercise the checks.
    pub fn new_allowing_dissipation(
        left_impedance: f64,
        right_impedance: f64,
        noise_impedance: f64,
        feedback: Feedback,
    ) -> Result<Self> {
        feedback.validate()?;
        Ok(OpAmpStage {
            left_impedance: positive("left line impedance", left_impedance)?,
            right_impedance: positive("right line impedance", right_impedance)?,
            noise_impedance: positive("noise impedance", noise_impedance)?,
            noise_impedance_fn: None,
            feedback,
            noise_temperature: 0.0,
            conj_temperature: 0.0,
            readout_temperature: 0.0,
            labels: SourceLabels::default(),
        })
    }

    /// Temperatures of the noise channel `a`, of the conjugated channel `a'`
    /// and of the readout line.
    pub fn with_temperatures(mut self, noise: f64, conj: f64, readout: f64) -> Result<Self> {
        self.noise_temperature = temperature(noise)?;
        self.conj_temperature = temperature(conj)?;
        self.readout_temperature = temperature(readout)?;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: SourceLabels) -> Result<Self> {
        if !labels.all_distinct() {
            return Err(Error::DuplicateName(labels.signal));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Frequency-dependent noise impedance; by default `R_a` is constant.
    pub fn with_noise_impedance_fn(mut self, r_a: fn(f64) -> f64) -> Self {
        self.noise_impedance_fn = Some(r_a);
        self
    }

    pub fn with_feedback(mut self, feedback: Feedback) -> Result<Self> {
        if !feedback.is_reactive() {
            return Err(Error::DissipativeFeedback(feedback.impedance(1.0).re));
        }
        feedback.validate()?;
        self.feedback = feedback;
        Ok(self)
    }

    pub fn with_noise_impedance(mut self, r_a: f64) -> Result<Self> {
        self.noise_impedance = positive("noise impedance", r_a)?;
        self.noise_impedance_fn = None;
        Ok(self)
    }

    pub fn left_impedance(&self) -> f64 {
        self.left_impedance
    }

    pub fn right_impedance(&self) -> f64 {
        self.right_impedance
    }

    pub fn feedback(&self) -> Feedback {
        self.feedback
    }

    pub fn labels(&self) -> &SourceLabels {
        &self.labels
    }

    pub fn noise_impedance(&self, omega: f64) -> f64 {
        match self.noise_impedance_fn {
            Some(f) => f(omega),
            None => self.noise_impedance,
        }
    }

    pub fn feedback_impedance(&self, omega: f64) -> Complex64 {
        self.feedback.impedance(omega)
    }

    /// Temperatures keyed by this stage's readout, noise and conjugate labels.
    pub fn temperatures(&self) -> Temperatures {
        Temperatures::new()
            .with(self.labels.readout.clone(), self.readout_temperature)
            .with(self.labels.noise.clone(), self.noise_temperature)
            .with(self.labels.conj.clone(), self.conj_temperature)
    }

    pub fn gain(&self, omega: f64) -> Complex64 {
        gain(self, omega)
    }

    pub fn scattering(&self, omega: f64) -> Result<ScatteringMap> {
        stage_scattering(self, omega)
    }

    pub fn estimator(&self, omega: f64) -> Result<EstimatorCoefficients> {
        stage_estimator(self, omega)
    }

    /// Added noise of this stage with its own temperatures.
    pub fn added_noise(&self, omega: f64) -> Result<NoiseBudget> {
        added_noise(&self.estimator(omega)?, omega, &self.temperatures())
    }

    pub fn noise_generators(&self, omega: f64) -> NoiseGeneratorPair {
        NoiseGeneratorPair::new(omega, self.noise_impedance(omega))
    }

    /// The same stage as a generic [`Network`]: lines on nodes 1 and 2, the
    /// op-amp between them and the feedback element across. Channel order
    /// is `(l, r, <name>.a, <name>.a')`.
    pub fn to_network(&self, name: &str, omega: f64) -> Result<Network> {
        let mut net = Network::new();
        let l = &self.labels;
        net.add_line(PortSpec::new(l.signal.clone(), self.left_impedance, 0.0)?, 1, GROUND)?;
        net.add_line(PortSpec::new(l.readout.clone(), self.right_impedance, self.readout_temperature)?, 2, GROUND)?;
        net.add_opamp(name, 1, 2, self.noise_impedance(omega), self.noise_temperature, self.conj_temperature)?;
        net.add_element(alloc::format!("{name}.zf"), 1, 2, self.feedback.element())?;
        Ok(net)
    }
}

/// Voltage and current noise generators as coefficients on `(a, a')`, in
/// physical units (V and A per normalized field amplitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseGeneratorPair {
    pub omega: f64,
    pub voltage: [f64; 2],
    pub current: [f64; 2],
}

impl NoiseGeneratorPair {
    pub fn new(omega: f64, noise_impedance: f64) -> Self {
        let half = HBAR * omega.abs() / 2.0;
        let cu = libm::sqrt(half * noise_impedance);
        let ci = libm::sqrt(half / noise_impedance);
        NoiseGeneratorPair { omega, voltage: [cu, -cu], current: [ci, ci] }
    }

    // [X[ω], Y[-ω]] / 2πδ = ε(ω) Σ_k x_k y_k J_k, with J = (+1, -1)
    fn commutator(&self, x: [f64; 2], y: [f64; 2]) -> f64 {
        self.omega.signum() * (x[0] * y[0] - x[1] * y[1])
    }

    /// `[U[ω], I[-ω]]` in units of `2π δ(0)`; equals `ħω`.
    pub fn commutator_ui(&self) -> f64 {
        self.commutator(self.voltage, self.current)
    }

    pub fn commutator_uu(&self) -> f64 {
        self.commutator(self.voltage, self.voltage)
    }

    pub fn commutator_ii(&self) -> f64 {
        self.commutator(self.current, self.current)
    }

    /// `(σ_UU, σ_II)` for channel occupations `σ_a`, `σ_a'`.
    pub fn spectra(&self, sigma_a: f64, sigma_conj: f64) -> (f64, f64) {
        let v = self.voltage[0] * self.voltage[0] * sigma_a + self.voltage[1] * self.voltage[1] * sigma_conj;
        let i = self.current[0] * self.current[0] * sigma_a + self.current[1] * self.current[1] * sigma_conj;
        (v, i)
    }
}

/// Gain for the normalized fields, `G = -2 Z_f / sqrt(R_r R_l)`.
pub fn gain(stage: &OpAmpStage, omega: f64) -> Complex64 {
    -2.0 * stage.feedback_impedance(omega) / libm::sqrt(stage.right_impedance * stage.left_impedance)
}

/// Four-channel map on `(l, r, a, a')`.
///
/// ```text
/// l^out = -l^in + sqrt(2/ħ|ω|R_l) U
/// r^out = -r^in + G l^in + sqrt(2/ħ|ω|R_r) ((R_l + Z_f)/R_l U - Z_f I)
/// ```
///
/// The `a`, `a'` output rows are not fixed by the op-amp equations and are
/// completed so that `S J S† = J` holds whenever `Z_f` is reactive.
pub fn stage_scattering(stage: &OpAmpStage, omega: f64) -> Result<ScatteringMap> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let rl = stage.left_impedance;
    let rr = stage.right_impedance;
    let ra = stage.noise_impedance(omega);
    let z = stage.feedback_impedance(omega);
    let c = |x: f64| Complex64::new(x, 0.0);

    let k = libm::sqrt(ra / rl);
    let l_row = vec![-ONE, c(0.0), c(k), c(-k)];

    // U, I coefficients on (a, a') divided by sqrt(ħ|ω|/2)
    let (u_a, u_c) = (libm::sqrt(ra), -libm::sqrt(ra));
    let (i_a, i_c) = (1.0 / libm::sqrt(ra), 1.0 / libm::sqrt(ra));
    let v = (rl + z) / rl;
    let inv_srr = 1.0 / libm::sqrt(rr);
    let p = (v * u_a - z * i_a) * inv_srr;
    let q = (v * u_c - z * i_c) * inv_srr;
    let r_row = vec![gain(stage, omega), -ONE, p, q];

    let matrix = complete_quasi_unitary(&[Some(l_row), Some(r_row), None, None], &[1.0, 1.0, 1.0, -1.0])?;
    ScatteringMap::new(omega, stage.labels.channels(), vec![false, false, false, true], matrix)
}

/// Closed-form estimator of the signal from the readout:
///
/// ```text
/// l̂ = l + sqrt(R_l R_r)/(2 Z_f) r
///       - (1/Z_f + 1/R_l - 1/R_a) sqrt(R_l R_a)/2 a
///       + (1/Z_f + 1/R_l + 1/R_a) sqrt(R_l R_a)/2 a'
/// ```
pub fn stage_estimator(stage: &OpAmpStage, omega: f64) -> Result<EstimatorCoefficients> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let z = stage.feedback_impedance(omega);
    if z.norm() == 0.0 {
        return Err(Error::NoFeedback);
    }
    let rl = stage.left_impedance;
    let rr = stage.right_impedance;
    let ra = stage.noise_impedance(omega);
    let inv_z = ONE / z;
    let half = libm::sqrt(rl * ra) / 2.0;
    let mu_r = libm::sqrt(rl * rr) / 2.0 * inv_z;
    let mu_a = -(inv_z + 1.0 / rl - 1.0 / ra) * half;
    let mu_c = (inv_z + 1.0 / rl + 1.0 / ra) * half;
    let l = &stage.labels;
    EstimatorCoefficients::new(
        l.signal.clone(),
        gain(stage, omega),
        vec![(l.readout.clone(), mu_r), (l.noise.clone(), mu_a), (l.conj.clone(), mu_c)],
    )
}

/// Added noise as a function of the noise impedance.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingScan {
    /// `(R_a, Σ)` for every grid point.
    pub points: Vec<(f64, f64)>,
    pub argmin: usize,
    /// The minimum sits on the first or last grid point, so the grid does
    /// not bracket it.
    pub at_boundary: bool,
}

impl MatchingScan {
    pub fn best_noise_impedance(&self) -> f64 {
        self.points[self.argmin].0
    }

    pub fn min_added_noise(&self) -> f64 {
        self.points[self.argmin].1
    }
}

/// Scans the noise impedance of `stage` over `grid` and locates the minimum
/// of the added noise.
pub fn matching_scan(stage: &OpAmpStage, noise_impedances: &[f64], omega: f64) -> Result<MatchingScan> {
    if noise_impedances.is_empty() {
        return Err(Error::InvalidGrid("empty noise impedance grid"));
    }
    let points = noise_impedances
        .iter()
        .map(|&ra| {
            let s = stage.clone().with_noise_impedance(ra)?;
            Ok((ra, s.added_noise(omega)?.total))
        })
        .collect::<Result<Vec<_>>>()?;
    let argmin = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let at_boundary = argmin == 0 || argmin == points.len() - 1;
    Ok(MatchingScan { points, argmin, at_boundary })
}
