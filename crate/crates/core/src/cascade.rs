//! Stages in series. The readout field of stage `k` is the signal field of
//! stage `k+1` (`l'^in = r^out`), so the estimator of a chain is
//!
//! ```text
//! l̂ = l + N_1 + N_2 / G_1 + N_3 / (G_1 G_2) + ...
//! ```
//!
//! where `N_k` is the noise part of stage `k`'s own estimator. Deeper sources
//! are suppressed by the product of all upstream gains; with a large first
//! gain only the first stage matters and its readout can be treated as a
//! classical quantity downstream.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::amplifier::{OpAmpStage, SourceLabels};
use crate::estimator::{added_noise, EstimatorCoefficients, Temperatures};
use crate::linalg::CMatrix;
use crate::network::ScatteringMap;
use crate::{Error, Result};

const IMPEDANCE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct StageChain {
    stages: Vec<OpAmpStage>,
}

impl StageChain {
    /// Chains `stages` in order. Each stage's signal label is set to the
    /// readout label of its predecessor; the readout impedance of a stage
    /// must equal the input impedance of the next.
    pub fn new(stages: Vec<OpAmpStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::EmptyChain);
        }
        let mut linked: Vec<OpAmpStage> = Vec::with_capacity(stages.len());
        let mut names: BTreeSet<String> = BTreeSet::new();
        for (k, stage) in stages.into_iter().enumerate() {
            let stage = match linked.last() {
                None => stage,
                Some(prev) => {
                    let (expected, found) = (prev.right_impedance(), stage.left_impedance());
                    if ((expected - found) / expected).abs() > IMPEDANCE_RTOL {
                        return Err(Error::ImpedanceMismatch { stage: k, expected, found });
                    }
                    let l = stage.labels().clone();
                    let signal = prev.labels().readout.clone();
                    stage.with_labels(SourceLabels { signal, ..l })?
                }
            };
            let l = stage.labels();
            if k == 0 && !names.insert(l.signal.clone()) {
                return Err(Error::DuplicateName(l.signal.clone()));
            }
            for n in [&l.readout, &l.noise, &l.conj] {
                if !names.insert(n.clone()) {
                    return Err(Error::DuplicateName(n.clone()));
                }
            }
            linked.push(stage);
        }
        Ok(StageChain { stages: linked })
    }

    pub fn stages(&self) -> &[OpAmpStage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn signal(&self) -> &str {
        &self.stages[0].labels().signal
    }

    pub fn readout(&self) -> &str {
        &self.stages[self.stages.len() - 1].labels().readout
    }

    pub fn temperatures(&self) -> Temperatures {
        let mut t = Temperatures::new();
        for s in &self.stages {
            t.extend(&s.temperatures());
        }
        t
    }

    /// Stages `2..`, or `None` for a single stage.
    pub fn downstream(&self) -> Option<StageChain> {
        (self.stages.len() > 1).then(|| StageChain { stages: self.stages[1..].to_vec() })
    }

    /// Names of the noise sources introduced by stages `2..`.
    pub fn downstream_sources(&self) -> Vec<String> {
        self.stages[1..]
            .iter()
            .flat_map(|s| {
                let l = s.labels();
                [l.readout.clone(), l.noise.clone(), l.conj.clone()]
            })
            .collect()
    }
}

/// Series composition of two estimators: `upstream`'s readout feeds
/// `downstream`'s signal. Gains multiply and the downstream noise is divided
/// by the upstream gain. Associative up to rounding.
pub fn compose(upstream: &EstimatorCoefficients, downstream: &EstimatorCoefficients) -> Result<EstimatorCoefficients> {
    let g = upstream.gain();
    if g.norm() == 0.0 {
        return Err(Error::NoTransduction);
    }
    let mut weights: Vec<(String, Complex64)> = upstream.weights().to_vec();
    weights.extend(downstream.weights().iter().map(|(n, mu)| (n.clone(), mu / g)));
    EstimatorCoefficients::new(upstream.signal(), g * downstream.gain(), weights)
}

pub fn chain_estimator(chain: &StageChain, omega: f64) -> Result<EstimatorCoefficients> {
    let mut stages = chain.stages.iter();
    let first = stages.next().ok_or(Error::EmptyChain)?.estimator(omega)?;
    stages.try_fold(first, |acc, s| compose(&acc, &s.estimator(omega)?))
}

/// Scattering map of the whole chain on channels
/// `(l, r_1, a_1, a'_1, r_2, a_2, a'_2, ...)`.
///
/// The inner readout channel `r_k` carries the readout-line noise into
/// stage `k` and receives the back-action field of stage `k+1`; its
/// outgoing field is consumed by the next stage. The last `r_n` is the
/// readout.
pub fn chain_scattering(chain: &StageChain, omega: f64) -> Result<ScatteringMap> {
    let first = chain.stages[0].scattering(omega)?;
    let mut channels = first.channels.clone();
    let mut conjugated = first.conjugated.clone();
    let mut matrix = first.matrix;
    for stage in &chain.stages[1..] {
        let link = channels.len() - 3; // readout channel of the previous stage
        let t = stage.scattering(omega)?;
        let n = channels.len() + 3;
        let mut prev = CMatrix::identity(n);
        for i in 0..matrix.rows() {
            for j in 0..matrix.cols() {
                prev[(i, j)] = matrix[(i, j)];
            }
        }
        let mut next = CMatrix::identity(n);
        let map = [link, n - 3, n - 2, n - 1];
        for (ti, &gi) in map.iter().enumerate() {
            next[(gi, gi)] = Complex64::new(0.0, 0.0);
            for (tj, &gj) in map.iter().enumerate() {
                next[(gi, gj)] = t.matrix[(ti, tj)];
            }
        }
        matrix = &next * &prev;
        channels.extend(t.channels[1..].iter().cloned());
        conjugated.extend(t.conjugated[1..].iter().copied());
    }
    ScatteringMap::new(omega, channels, conjugated, matrix)
}

/// Share of the chain's added noise coming from stages `2..`, using the
/// temperatures carried by the stages. Zero for a single stage.
pub fn downstream_noise_fraction(chain: &StageChain, omega: f64) -> Result<f64> {
    downstream_noise_fraction_with(chain, omega, &chain.temperatures())
}

pub fn downstream_noise_fraction_with(chain: &StageChain, omega: f64, temperatures: &Temperatures) -> Result<f64> {
    if chain.len() < 2 {
        return Ok(0.0);
    }
    let budget = added_noise(&chain_estimator(chain, omega)?, omega, temperatures)?;
    let downstream: BTreeSet<String> = chain.downstream_sources().into_iter().collect();
    let part = budget.partial(|s| downstream.contains(s));
    Ok(if budget.total > 0.0 { part / budget.total } else { 0.0 })
}

/// Smallest first-stage gain modulus `G₀` such that, for `|G_1| > G₀`, the
/// chain's added noise differs from the first stage's alone by less than
/// `epsilon`. The difference is exactly `D / |G_1|²` with `D` the added noise
/// of the downstream chain on its own.
pub fn classical_threshold_gain(chain: &StageChain, omega: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    let Some(rest) = chain.downstream() else {
        return Ok(0.0);
    };
    let d = added_noise(&chain_estimator(&rest, omega)?, omega, &rest.temperatures())?.total;
    Ok(libm::sqrt(d / epsilon))
}
