//! Budget tables, JSON and CSV.
//!
//! Numbers are written with Rust's shortest round-trip exponent format, so
//! every emitter carries the full `f64` value and none depends on locale.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qunet_core::accelerometer::{AccelBudget, AcceleroParams, Limitation};
use qunet_core::cascade::{chain_estimator, StageChain};
use qunet_core::estimator::{added_noise, NoiseBudget};
use qunet_core::spectra::{angular_to_hz, hz_to_angular, FrequencyGrid};

pub const QUANTA: &str = "quanta (units of hbar*|omega|)";
pub const FORCE_PSD: &str = "N^2/Hz";
pub const SYMMETRIC: &str = "symmetric PSD, two-sided";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub name: String,
    pub mu_abs2: f64,
    pub sigma: f64,
    pub contribution: f64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub freq_hz: f64,
    pub total: f64,
    pub units: String,
    pub convention: String,
    /// Sorted by decreasing contribution.
    pub sources: Vec<SourceRow>,
}

impl BudgetReport {
    /// Percents are of `total`; all zero when the total vanishes.
    pub fn from_budget(budget: &NoiseBudget, freq_hz: f64, units: &str) -> Self {
        let total = budget.total;
        let mut sources: Vec<SourceRow> = budget
            .entries
            .iter()
            .map(|e| SourceRow {
                name: e.source.clone(),
                mu_abs2: e.mu_abs2,
                sigma: e.sigma,
                contribution: e.contribution,
                percent: if total > 0.0 { 100.0 * e.contribution / total } else { 0.0 },
            })
            .collect();
        // stable: ties keep estimator order
        sources.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
        BudgetReport { freq_hz, total, units: units.into(), convention: SYMMETRIC.into(), sources }
    }

    pub fn source(&self, name: &str) -> Option<&SourceRow> {
        self.sources.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn to_table(&self) -> String {
        let width = self.sources.iter().map(|r| r.name.len()).max().unwrap_or(0).max("source".len());
        let mut s = String::new();
        let _ = writeln!(s, "frequency: {:e} Hz", self.freq_hz);
        let _ = writeln!(s, "units: {}; {}", self.units, self.convention);
        let _ = writeln!(s, "{:<width$}  {:<24}  {:<24}  {:<24}  percent", "source", "mu_abs2", "sigma", "contribution");
        for r in &self.sources {
            let _ = writeln!(
                s,
                "{:<width$}  {:<24}  {:<24}  {:<24}  {:e}",
                r.name,
                format!("{:e}", r.mu_abs2),
                format!("{:e}", r.sigma),
                format!("{:e}", r.contribution),
                r.percent,
            );
        }
        let _ = writeln!(s, "total: {:e}", self.total);
        s
    }
}

pub fn chain_budget(chain: &StageChain, omega: f64) -> qunet_core::Result<NoiseBudget> {
    added_noise(&chain_estimator(chain, omega)?, omega, &chain.temperatures())
}

pub fn chain_report(chain: &StageChain, freq_hz: f64) -> qunet_core::Result<BudgetReport> {
    let budget = chain_budget(chain, hz_to_angular(freq_hz))?;
    Ok(BudgetReport::from_budget(&budget, freq_hz, QUANTA))
}

/// CSV with header `freq_hz,total,<sources...>` and one row per point of
/// `grid_hz` (in Hz), sources in estimator order. Rows are evaluated in
/// parallel and written in grid order.
pub fn sweep_csv(chain: &StageChain, grid_hz: &FrequencyGrid) -> qunet_core::Result<String> {
    let budgets = grid_hz
        .points()
        .par_iter()
        .map(|&f| chain_budget(chain, hz_to_angular(f)))
        .collect::<qunet_core::Result<Vec<_>>>()?;
    let mut out = String::from("freq_hz,total");
    for e in &budgets[0].entries {
        out.push(',');
        out.push_str(&csv_field(&e.source));
    }
    out.push('\n');
    for (f, b) in grid_hz.points().iter().zip(&budgets) {
        let _ = write!(out, "{f:e},{:e}", b.total);
        for e in &b.entries {
            let _ = write!(out, ",{:e}", e.contribution);
        }
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelReport {
    pub preset: String,
    pub mass_kg: f64,
    pub mechanical_damping: f64,
    pub mechanical_theta_k: f64,
    pub carrier_hz: f64,
    pub transduction_gain: f64,
    /// Langevin force spectrum `2 H_m k_B Θ_m`, N²/Hz.
    pub langevin_force_psd: f64,
    /// `sqrt(total force PSD) / M`, m s⁻²/√Hz.
    pub acceleration_sensitivity: f64,
    pub limited_by: String,
    pub budget: BudgetReport,
}

impl AccelReport {
    pub fn new(preset: &str, params: &AcceleroParams, kappa: f64, budget: &AccelBudget) -> Self {
        AccelReport {
            preset: preset.into(),
            mass_kg: params.mass,
            mechanical_damping: params.mechanical_damping,
            mechanical_theta_k: params.mechanical_theta,
            carrier_hz: angular_to_hz(params.carrier_omega),
            transduction_gain: kappa,
            langevin_force_psd: qunet_core::accelerometer::langevin_force_psd(params),
            acceleration_sensitivity: qunet_core::accelerometer::acceleration_sensitivity_for(budget.total(), params.mass),
            limited_by: match budget.limitation {
                Limitation::Mechanical => "mechanical".into(),
                Limitation::Detection => "detection".into(),
            },
            budget: BudgetReport::from_budget(&budget.budget, angular_to_hz(params.signal_omega), FORCE_PSD),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preset: {}", self.preset);
        let _ = writeln!(s, "M: {:e} kg", self.mass_kg);
        let _ = writeln!(s, "H_m: {:e} kg/s", self.mechanical_damping);
        let _ = writeln!(s, "Theta_m: {:e} K", self.mechanical_theta_k);
        let _ = writeln!(s, "carrier: {:e} Hz", self.carrier_hz);
        let _ = writeln!(s, "transduction gain: {:e} N/sqrt(Hz)", self.transduction_gain);
        let _ = writeln!(s, "Sigma_FF (Langevin): {:e} N^2/Hz", self.langevin_force_psd);
        let _ = writeln!(s, "acceleration sensitivity: {:e} m s^-2/sqrt(Hz)", self.acceleration_sensitivity);
        let _ = writeln!(s, "limited by: {}", self.limited_by);
        s.push('\n');
        s.push_str(&self.budget.to_table());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qunet_core::estimator::BudgetEntry;

    fn entry(name: &str, c: f64) -> BudgetEntry {
        BudgetEntry { source: name.into(), mu_abs2: c, sigma: 1.0, contribution: c }
    }

    #[test]
    fn rows_sorted_and_percents_sum() {
        let b = NoiseBudget::from_entries(1.0, vec![entry("x", 1.0), entry("y", 3.0), entry("z", 0.5)]);
        let r = BudgetReport::from_budget(&b, 1.0, QUANTA);
        let names: Vec<_> = r.sources.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["y", "x", "z"]);
        let sum: f64 = r.sources.iter().map(|s| s.percent).sum();
        assert!((sum - 100.0).abs() < 0.01);
    }

    #[test]
    fn zero_total() {
        let b = NoiseBudget::from_entries(1.0, vec![entry("x", 0.0)]);
        assert_eq!(BudgetReport::from_budget(&b, 1.0, QUANTA).sources[0].percent, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let b = NoiseBudget::from_entries(1.0, vec![entry("a'", 0.1 + 0.2), entry("r", 1.0 / 3.0)]);
        let r = BudgetReport::from_budget(&b, 123.456, QUANTA);
        let back: BudgetReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a'"), "a'");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }
}
