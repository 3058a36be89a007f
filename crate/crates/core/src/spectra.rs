//! Physical constants, frequency grids and the thermal/quantum noise laws.
//!
//! All spectra use the symmetric (two-sided) convention: the correlation of
//! a normalized field is `<a[ω]·a[ω']> = 2π δ(ω+ω') σ[ω]`. The electronics
//! convention, which folds negative frequencies onto positive ones, is larger
//! by a factor 2; see [`NoiseSpectrum::one_sided`].

use alloc::vec::Vec;

use crate::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants { hbar: HBAR, k_b: K_B };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Logarithmic,
}

/// Ordered set of positive angular frequencies (rad/s). `ω = 0` is never a
/// member.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    scale: GridScale,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>, scale: GridScale) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("no points"));
        }
        if points.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidGrid("frequencies must be finite and positive"));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing"));
        }
        Ok(FrequencyGrid { points, scale })
    }

    pub fn single(omega: f64) -> Result<Self> {
        Self::new(alloc::vec![omega], GridScale::Linear)
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::spaced(lo, hi, n, GridScale::Linear)
    }

    pub fn logarithmic(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::spaced(lo, hi, n, GridScale::Logarithmic)
    }

    /// Builds a grid from bounds in rad/s.
    pub fn spaced(lo: f64, hi: f64, n: usize, scale: GridScale) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("no points"));
        }
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidGrid("bounds must satisfy 0 < lo <= hi"));
        }
        if n == 1 {
            return Self::new(alloc::vec![lo], scale);
        }
        if hi == lo {
            return Err(Error::InvalidGrid("several points need lo < hi"));
        }
        let last = (n - 1) as f64;
        let mut points: Vec<f64> = match scale {
            GridScale::Linear => (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect(),
            GridScale::Logarithmic => {
                let (a, b) = (libm::log(lo), libm::log(hi));
                (0..n).map(|i| libm::exp(a + (b - a) * i as f64 / last)).collect()
            }
        };
        points[0] = lo;
        points[n - 1] = hi;
        Self::new(points, scale)
    }

    /// Same as [`FrequencyGrid::spaced`] with bounds in Hz.
    pub fn from_hz(lo_hz: f64, hi_hz: f64, n: usize, scale: GridScale) -> Result<Self> {
        Self::spaced(hz_to_angular(lo_hz), hz_to_angular(hi_hz), n, scale)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn scale(&self) -> GridScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn hz_to_angular(f_hz: f64) -> f64 {
    2.0 * core::f64::consts::PI * f_hz
}

pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * core::f64::consts::PI)
}

/// Symmetrized noise spectrum sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    values: Vec<f64>,
}

impl NoiseSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidParameter { name: "spectrum value", value: *v });
        }
        Ok(NoiseSpectrum { values })
    }

    /// Thermal spectrum of a bath at temperature `t` on every grid point.
    pub fn thermal(grid: &FrequencyGrid, t: f64) -> Result<Self> {
        let values = grid
            .points()
            .iter()
            .map(|&w| thermal_occupation(w, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(NoiseSpectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values in the electronics (one-sided, positive frequency) convention.
    pub fn one_sided(&self) -> Vec<f64> {
        self.values.iter().map(|v| 2.0 * v).collect()
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega == 0.0 {
        Err(Error::ZeroFrequency)
    } else if !omega.is_finite() {
        Err(Error::InvalidParameter { name: "angular frequency", value: omega })
    } else {
        Ok(())
    }
}

/// Symmetrized spectrum of a thermal bath, `½ coth(ħ|ω| / 2 k_B T)`.
///
/// This is the Bose occupation plus the vacuum term ½. At `T = 0` the result
/// is exactly ½.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    check_omega(omega)?;
    if temperature < 0.0 || temperature.is_nan() {
        return Err(Error::NegativeTemperature(temperature));
    }
    if temperature == 0.0 {
        return Ok(0.5);
    }
    let half_x = HBAR * omega.abs() / (2.0 * K_B * temperature);
    Ok(0.5 / libm::tanh(half_x))
}

/// Energy per mode expressed as a temperature: `Θ = ħ|ω| σ / k_B`.
pub fn effective_temperature(omega: f64, sigma: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(sigma >= 0.5) {
        return Err(Error::BelowVacuum(sigma));
    }
    Ok(HBAR * omega.abs() * sigma / K_B)
}

/// Occupation `σ = k_B Θ / ħ|ω|` corresponding to an effective temperature.
pub fn occupation_from_effective(omega: f64, theta: f64) -> Result<f64> {
    check_omega(omega)?;
    let sigma = K_B * theta / (HBAR * omega.abs());
    if !(sigma >= 0.5) {
        return Err(Error::BelowVacuum(sigma));
    }
    Ok(sigma)
}

/// Bath temperature whose thermal occupation at `omega` equals `sigma`; the
/// inverse of [`thermal_occupation`] in its temperature argument.
pub fn temperature_from_occupation(omega: f64, sigma: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(sigma >= 0.5) {
        return Err(Error::BelowVacuum(sigma));
    }
    if sigma == 0.5 {
        return Ok(0.0);
    }
    // 2 atanh(1/2σ) = ln((2σ+1)/(2σ-1))
    let log_ratio = libm::log1p(2.0 / (2.0 * sigma - 1.0));
    Ok(HBAR * omega.abs() / (K_B * log_ratio))
}

/// Bath temperature whose effective temperature at `omega` is `theta`.
pub fn temperature_from_effective(omega: f64, theta: f64) -> Result<f64> {
    temperature_from_occupation(omega, occupation_from_effective(omega, theta)?)
}

/// Johnson–Nyquist voltage spectrum of a resistance, `2 R ħ|ω| σ = 2 R k_B Θ`
/// in V²/Hz (symmetric convention).
pub fn johnson_voltage_psd(resistance: f64, omega: f64, temperature: f64) -> Result<f64> {
    if resistance < 0.0 || resistance.is_nan() {
        return Err(Error::InvalidParameter { name: "resistance", value: resistance });
    }
    let sigma = thermal_occupation(omega, temperature)?;
    Ok(2.0 * resistance * HBAR * omega.abs() * sigma)
}
