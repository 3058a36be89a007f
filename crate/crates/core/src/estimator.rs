//! Estimators and added-noise budgets.
//!
//! An estimator is a readout rescaled so that the coefficient of the signal
//! is one: `ŝ = s + Σ_α μ_α α^in`. With uncorrelated sources the added noise
//! is `Σ = Σ_α |μ_α|² σ_α`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::spectra::thermal_occupation;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorCoefficients {
    signal: String,
    gain: Complex64,
    weights: Vec<(String, Complex64)>,
}

impl EstimatorCoefficients {
    /// `gain` is the coefficient of the signal in the raw readout, i.e. the
    /// factor the readout is divided by.
    pub fn new(signal: impl Into<String>, gain: Complex64, weights: Vec<(String, Complex64)>) -> Result<Self> {
        let signal = signal.into();
        let mut seen = BTreeMap::new();
        for (name, mu) in &weights {
            if *name == signal || seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
            if !(mu.re.is_finite() && mu.im.is_finite()) {
                return Err(Error::InvalidParameter { name: "estimator weight", value: mu.norm() });
            }
        }
        Ok(EstimatorCoefficients { signal, gain, weights })
    }

    /// Normalizes a readout row: every coefficient is divided by the one of
    /// the signal channel, which becomes exactly 1.
    pub fn from_readout_row(
        channels: &[String],
        row: &[Complex64],
        signal: usize,
    ) -> Result<Self> {
        if channels.len() != row.len() {
            return Err(Error::DimensionMismatch { expected: channels.len(), found: row.len() });
        }
        let beta = *row.get(signal).ok_or(Error::DimensionMismatch { expected: signal + 1, found: row.len() })?;
        if beta.norm() == 0.0 {
            return Err(Error::NoTransduction);
        }
        let weights = channels
            .iter()
            .zip(row)
            .enumerate()
            .filter(|(k, _)| *k != signal)
            .map(|(_, (name, c))| (name.clone(), c / beta))
            .collect();
        Self::new(channels[signal].clone(), beta, weights)
    }

    pub fn signal(&self) -> &str {
        &self.signal
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    /// Noise weights, excluding the signal.
    pub fn weights(&self) -> &[(String, Complex64)] {
        &self.weights
    }

    /// Coefficient of a channel; the signal coefficient is exactly 1.
    pub fn mu(&self, name: &str) -> Option<Complex64> {
        if name == self.signal {
            return Some(Complex64::new(1.0, 0.0));
        }
        self.weights.iter().find(|(n, _)| n == name).map(|(_, m)| *m)
    }

    pub fn source_names(&self) -> impl Iterator<Item = &str> {
        self.weights.iter().map(|(n, _)| n.as_str())
    }

    pub fn with_gain(mut self, gain: Complex64) -> Self {
        self.gain = gain;
        self
    }

    pub fn with_signal(mut self, signal: impl Into<String>) -> Result<Self> {
        let signal = signal.into();
        if self.weights.iter().any(|(n, _)| *n == signal) {
            return Err(Error::DuplicateName(signal));
        }
        self.signal = signal;
        Ok(self)
    }

    /// Multiplies every noise weight by `factor` (the signal stays at 1).
    pub fn scale_noise(mut self, factor: Complex64) -> Self {
        for (_, mu) in &mut self.weights {
            *mu *= factor;
        }
        self
    }

    /// Adds zero-weight entries for sources this estimator does not see.
    pub fn extended_with_zeros<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        for name in names {
            if name == self.signal {
                return Err(Error::DuplicateName(name.to_string()));
            }
            if self.mu(name).is_none() {
                self.weights.push((name.to_string(), Complex64::new(0.0, 0.0)));
            }
        }
        Ok(self)
    }

    /// Largest pointwise difference of the μ tables; errors when the source
    /// sets differ.
    pub fn max_weight_difference(&self, other: &EstimatorCoefficients) -> Result<f64> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::MismatchedSources);
        }
        let mut worst: f64 = 0.0;
        for (name, mu) in &self.weights {
            let theirs = other.weights.iter().find(|(n, _)| n == name).ok_or(Error::MismatchedSources)?;
            worst = worst.max((mu - theirs.1).norm());
        }
        Ok(worst)
    }
}

/// Bath temperature (K) per source name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Temperatures(BTreeMap<String, f64>);

impl Temperatures {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: impl Into<String>, kelvin: f64) -> &mut Self {
        self.0.insert(source.into(), kelvin);
        self
    }

    pub fn with(mut self, source: impl Into<String>, kelvin: f64) -> Self {
        self.insert(source, kelvin);
        self
    }

    pub fn get(&self, source: &str) -> Option<f64> {
        self.0.get(source).copied()
    }

    pub fn extend(&mut self, other: &Temperatures) {
        self.0.extend(other.0.iter().map(|(k, v)| (k.clone(), *v)));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Temperatures {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Temperatures(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetEntry {
    pub source: String,
    pub mu_abs2: f64,
    pub sigma: f64,
    pub contribution: f64,
}

/// Per-source added noise at one frequency. `total` is the sum of the
/// contributions in entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    pub omega: f64,
    pub entries: Vec<BudgetEntry>,
    pub total: f64,
}

impl NoiseBudget {
    pub fn from_entries(omega: f64, entries: Vec<BudgetEntry>) -> Self {
        let total = entries.iter().map(|e| e.contribution).sum();
        NoiseBudget { omega, entries, total }
    }

    pub fn entry(&self, source: &str) -> Option<&BudgetEntry> {
        self.entries.iter().find(|e| e.source == source)
    }

    /// Sum of the contributions of the named sources.
    pub fn partial(&self, mut sources: impl FnMut(&str) -> bool) -> f64 {
        self.entries.iter().filter(|e| sources(&e.source)).map(|e| e.contribution).sum()
    }
}

/// Budget from per-source spectra supplied by `sigma_of`.
pub fn budget_with<F>(estimator: &EstimatorCoefficients, omega: f64, mut sigma_of: F) -> Result<NoiseBudget>
where
    F: FnMut(&str) -> Result<f64>,
{
    let entries = estimator
        .weights()
        .iter()
        .map(|(name, mu)| {
            let sigma = sigma_of(name)?;
            let mu_abs2 = mu.norm_sqr();
            Ok(BudgetEntry { source: name.clone(), mu_abs2, sigma, contribution: mu_abs2 * sigma })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseBudget::from_entries(omega, entries))
}

/// Added noise `Σ(ω) = Σ_α |μ_α|² σ_α(ω)` with thermal sources.
pub fn added_noise(estimator: &EstimatorCoefficients, omega: f64, temperatures: &Temperatures) -> Result<NoiseBudget> {
    budget_with(estimator, omega, |name| {
        let t = temperatures.get(name).ok_or_else(|| Error::MissingTemperature(name.to_string()))?;
        thermal_occupation(omega, t)
    })
}
