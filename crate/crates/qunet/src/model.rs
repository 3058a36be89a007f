//! From a parsed document to something that can be evaluated.

use std::collections::HashSet;

use qunet_core::accelerometer::AcceleroParams;
use qunet_core::amplifier::{OpAmpStage, SourceLabels};
use qunet_core::cascade::StageChain;
use qunet_core::spectra::FrequencyGrid;

use crate::netlist::{FeedbackKind, NetlistDocument, OpAmpDecl, Warning};

#[derive(Debug, Clone)]
pub enum Model {
    Chain(StageChain),
    Accelerometer(AcceleroParams),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("document has {0}")]
    Incomplete(Warning),
    #[error("signal and readout are the same port `{0}`")]
    SamePort(String),
    #[error("no op-amp has `{0}` as its left port; cannot reach the readout")]
    NoPath(String),
    #[error("port `{0}` feeds several op-amps")]
    Branching(String),
    #[error("op-amp chain loops back to port `{0}`")]
    Loop(String),
    #[error("stage `{stage}`: {source}")]
    Stage { stage: String, source: qunet_core::Error },
    #[error(transparent)]
    Core(#[from] qunet_core::Error),
}

/// Signal and noise labels of a declared op-amp: ports keep their names, the
/// amplifier noise channels are `<name>.a` and `<name>.a'`.
pub fn labels(op: &OpAmpDecl) -> SourceLabels {
    SourceLabels::new(&op.left, &op.right, &format!("{}.a", op.name), &format!("{}.a'", op.name))
}

fn stage(doc: &NetlistDocument, op: &OpAmpDecl) -> Result<OpAmpStage, qunet_core::Error> {
    let left = doc.line(&op.left).expect("checked by the parser");
    let right = doc.line(&op.right).expect("checked by the parser");
    let feedback = op.feedback.to_feedback();
    let stage = if op.feedback.kind == FeedbackKind::R {
        OpAmpStage::new_allowing_dissipation(left.impedance, right.impedance, op.noise_impedance, feedback)?
    } else {
        OpAmpStage::new(left.impedance, right.impedance, op.noise_impedance, feedback)?
    };
    stage.with_temperatures(op.noise_temp, op.conj_temp, right.temperature)?.with_labels(labels(op))
}

/// Follows op-amps from the signal port until the readout port.
pub fn build_chain(doc: &NetlistDocument) -> Result<StageChain, ModelError> {
    let signal = doc.signal().ok_or(ModelError::Incomplete(Warning::NoSignal))?;
    let readout = doc.readout().ok_or(ModelError::Incomplete(Warning::NoReadout))?;
    if signal == readout {
        return Err(ModelError::SamePort(signal.into()));
    }
    let mut stages = Vec::new();
    let mut visited = HashSet::from([signal]);
    let mut port = signal;
    while port != readout {
        let mut next = doc.opamps().filter(|o| o.left == port);
        let op = next.next().ok_or_else(|| ModelError::NoPath(port.into()))?;
        if next.next().is_some() {
            return Err(ModelError::Branching(port.into()));
        }
        stages.push(stage(doc, op).map_err(|source| ModelError::Stage { stage: op.name.clone(), source })?);
        port = &op.right;
        if !visited.insert(port) {
            return Err(ModelError::Loop(port.into()));
        }
    }
    Ok(StageChain::new(stages)?)
}

pub fn build(doc: &NetlistDocument) -> Result<Model, ModelError> {
    match doc.preset() {
        Some(name) => Ok(Model::Accelerometer(AcceleroParams::preset(name).expect("checked by the parser"))),
        None => build_chain(doc).map(Model::Chain),
    }
}

/// The document's sweep grid, in Hz, if any.
pub fn sweep_grid_hz(doc: &NetlistDocument) -> Result<Option<FrequencyGrid>, qunet_core::Error> {
    doc.sweep().map(|s| FrequencyGrid::spaced(s.lo_hz, s.hi_hz, s.points, s.scale)).transpose()
}
