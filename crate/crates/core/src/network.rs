//! Quantum networks: lines feeding a reactive multipole, solved for the
//! scattering map `a^out = S a^in` at a given frequency.
//!
//! Every line `n` of impedance `R_n` carries normalized fields. At the end
//! of the line the voltage and the current flowing from the network into the
//! line are
//!
//! ```text
//! U = sqrt(ħ|ω| R / 2) (a^out + a^in)
//! I = sqrt(ħ|ω| / 2R) (a^out - a^in)
//! ```
//!
//! so a purely outgoing wave sees `U/I = R` and the open-circuit voltage
//! spectrum of a thermal line is `2 R k_B Θ`. (The printed form found in the
//! literature places `R` the other way round in the two radicals; that form is
//! not dimensionally consistent with the Johnson–Nyquist law and is not used.)
//! The common factor `sqrt(ħ|ω|/2)` drops out of the scattering matrix.
//!
//! Ideal op-amps add two noise channels `a` and `a'`. The second one enters
//! as `a'[-ω] = a'[ω]†` and carries `-1` in the signature `J`; consistency is
//! then `S J S† = J`. The op-amp equations only fix the rows of the physical
//! lines, so the rows of the noise channels are completed to a matrix with
//! that property (see [`complete_quasi_unitary`]).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::estimator::EstimatorCoefficients;
use crate::linalg::{hermitian_eigen, solve, CMatrix};
use crate::spectra::FrequencyGrid;
use crate::{Error, Result};

pub type Node = usize;
pub const GROUND: Node = 0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A semi-infinite line (or noise channel) entering the network.
#[derive(Debug, Clone, PartialEq)]
pub struct PortSpec {
    pub name: String,
    pub impedance: f64,
    pub temperature: f64,
    pub conjugated: bool,
}

impl PortSpec {
    pub fn new(name: impl Into<String>, impedance: f64, temperature: f64) -> Result<Self> {
        let spec = PortSpec { name: name.into(), impedance, temperature, conjugated: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn conjugate(name: impl Into<String>, impedance: f64, temperature: f64) -> Result<Self> {
        let mut spec = Self::new(name, impedance, temperature)?;
        spec.conjugated = true;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.impedance > 0.0 && self.impedance.is_finite()) {
            return Err(Error::InvalidParameter { name: "line impedance", value: self.impedance });
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::NegativeTemperature(self.temperature));
        }
        Ok(())
    }

    pub fn signature(&self) -> f64 {
        if self.conjugated {
            -1.0
        } else {
            1.0
        }
    }
}

/// Reactive (or, for diagnostics, arbitrary) two-terminal element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Capacitor(f64),
    Inductor(f64),
    Impedance(Complex64),
}

impl Element {
    /// Impedance in the quantum sign convention: `1/(-iωC)`, `-iωL`.
    pub fn impedance(&self, omega: f64) -> Complex64 {
        match *self {
            Element::Capacitor(c) => ONE / (-I * omega * c),
            Element::Inductor(l) => -I * omega * l,
            Element::Impedance(z) => z,
        }
    }

    fn admittance(&self, omega: f64) -> Complex64 {
        match *self {
            Element::Capacitor(c) => -I * omega * c,
            Element::Inductor(l) => ONE / (-I * omega * l),
            Element::Impedance(z) => ONE / z,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Element::Capacitor(c) if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidParameter { name: "capacitance", value: c })
            }
            Element::Inductor(l) if !(l > 0.0 && l.is_finite()) => {
                Err(Error::InvalidParameter { name: "inductance", value: l })
            }
            Element::Impedance(z) if !(z.norm() > 0.0 && z.norm().is_finite()) => {
                Err(Error::InvalidParameter { name: "impedance", value: z.norm() })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Attachment {
    Line { plus: Node, minus: Node },
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
struct Branch {
    name: String,
    a: Node,
    b: Node,
    element: Element,
}

#[derive(Debug, Clone, PartialEq)]
struct OpAmpCell {
    name: String,
    inverting: Node,
    output: Node,
    noise: usize,
    conj: usize,
}

/// A linear time-invariant network description. Immutable once built; the
/// scattering map is evaluated independently per frequency.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Network {
    ports: Vec<PortSpec>,
    attachments: Vec<Attachment>,
    branches: Vec<Branch>,
    opamps: Vec<OpAmpCell>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    fn claim(&self, name: &str) -> Result<()> {
        let taken = self.ports.iter().any(|p| p.name == name)
            || self.branches.iter().any(|b| b.name == name)
            || self.opamps.iter().any(|o| o.name == name);
        if taken {
            Err(Error::DuplicateName(name.into()))
        } else {
            Ok(())
        }
    }

    /// Attaches a line across `plus`/`minus`; returns its channel index.
    pub fn add_line(&mut self, port: PortSpec, plus: Node, minus: Node) -> Result<usize> {
        port.validate()?;
        if port.conjugated {
            return Err(Error::InvalidParameter { name: "conjugated line (only op-amp noise channels may be conjugated)", value: -1.0 });
        }
        self.claim(&port.name)?;
        self.ports.push(port);
        self.attachments.push(Attachment::Line { plus, minus });
        Ok(self.ports.len() - 1)
    }

    pub fn add_element(&mut self, name: impl Into<String>, a: Node, b: Node, element: Element) -> Result<()> {
        let name = name.into();
        element.validate()?;
        self.claim(&name)?;
        self.branches.push(Branch { name, a, b, element });
        Ok(())
    }

    /// Ideal op-amp (infinite gain, infinite input impedance, null output
    /// impedance) with its non-inverting input grounded. Its voltage and
    /// current noise generators are built from two channels named
    /// `<name>.a` and `<name>.a'`; their indices are returned.
    pub fn add_opamp(
        &mut self,
        name: impl Into<String>,
        inverting: Node,
        output: Node,
        noise_impedance: f64,
        noise_temperature: f64,
        conj_temperature: f64,
    ) -> Result<(usize, usize)> {
        let name = name.into();
        if inverting == GROUND || output == GROUND || inverting == output {
            return Err(Error::InvalidParameter { name: "op-amp node", value: 0.0 });
        }
        self.claim(&name)?;
        let a = PortSpec::new(format!("{name}.a"), noise_impedance, noise_temperature)?;
        let ac = PortSpec::conjugate(format!("{name}.a'"), noise_impedance, conj_temperature)?;
        self.claim(&a.name)?;
        self.claim(&ac.name)?;
        self.ports.push(a);
        self.attachments.push(Attachment::Generator);
        self.ports.push(ac);
        self.attachments.push(Attachment::Generator);
        let (noise, conj) = (self.ports.len() - 2, self.ports.len() - 1);
        self.opamps.push(OpAmpCell { name, inverting, output, noise, conj });
        Ok((noise, conj))
    }

    pub fn ports(&self) -> &[PortSpec] {
        &self.ports
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.ports.iter().map(|p| p.name.clone()).collect()
    }

    pub fn signature(&self) -> Vec<f64> {
        self.ports.iter().map(PortSpec::signature).collect()
    }

    /// Every non-ground node must be shared by at least two terminals.
    pub fn check_wiring(&self) -> Result<()> {
        let mut uses: BTreeMap<Node, (usize, &str)> = BTreeMap::new();
        let mut terminals: Vec<(Node, &str)> = Vec::new();
        for (port, att) in self.ports.iter().zip(&self.attachments) {
            if let Attachment::Line { plus, minus } = att {
                terminals.push((*plus, &port.name));
                terminals.push((*minus, &port.name));
            }
        }
        for b in &self.branches {
            terminals.push((b.a, &b.name));
            terminals.push((b.b, &b.name));
        }
        for o in &self.opamps {
            terminals.push((o.inverting, &o.name));
            terminals.push((o.output, &o.name));
        }
        for (node, owner) in terminals {
            if node != GROUND {
                uses.entry(node).or_insert((0, owner)).0 += 1;
            }
        }
        match uses.into_iter().find(|(_, (count, _))| *count < 2) {
            Some((node, (_, owner))) => Err(Error::UnwiredTerminal { element: owner.into(), node }),
            None => Ok(()),
        }
    }

    /// Scattering map at angular frequency `omega`.
    pub fn scattering(&self, omega: f64) -> Result<ScatteringMap> {
        if omega == 0.0 {
            return Err(Error::ZeroFrequency);
        }
        self.check_wiring()?;

        // compact node numbering, ground excluded
        let mut index: BTreeMap<Node, usize> = BTreeMap::new();
        let mut visit = |n: Node| {
            if n != GROUND {
                let next = index.len();
                index.entry(n).or_insert(next);
            }
        };
        for att in &self.attachments {
            if let Attachment::Line { plus, minus } = att {
                visit(*plus);
                visit(*minus);
            }
        }
        for b in &self.branches {
            visit(b.a);
            visit(b.b);
        }
        for o in &self.opamps {
            visit(o.inverting);
            visit(o.output);
        }
        let node = |n: Node| index.get(&n).copied();

        let lines: Vec<(usize, Node, Node)> = self
            .attachments
            .iter()
            .enumerate()
            .filter_map(|(ch, a)| match a {
                Attachment::Line { plus, minus } => Some((ch, *plus, *minus)),
                Attachment::Generator => None,
            })
            .collect();
        let n_nodes = index.len();
        let n_lines = lines.len();
        let dim = n_nodes + n_lines + self.opamps.len();
        let n_ch = self.ports.len();
        let mut m = CMatrix::zeros(dim, dim);
        let mut rhs = CMatrix::zeros(dim, n_ch);

        for b in &self.branches {
            let y = b.element.admittance(omega);
            let (na, nb) = (node(b.a), node(b.b));
            if let Some(i) = na {
                m[(i, i)] += y;
            }
            if let Some(j) = nb {
                m[(j, j)] += y;
            }
            if let (Some(i), Some(j)) = (na, nb) {
                m[(i, j)] -= y;
                m[(j, i)] -= y;
            }
        }
        // KCL rows sum the currents leaving each node.
        for (li, &(ch, plus, minus)) in lines.iter().enumerate() {
            let sr = libm::sqrt(self.ports[ch].impedance);
            let col = n_nodes + li;
            for (terminal, sign) in [(plus, 1.0), (minus, -1.0)] {
                if let Some(k) = node(terminal) {
                    m[(k, col)] += Complex64::new(sign / sr, 0.0);
                    rhs[(k, ch)] += Complex64::new(sign / sr, 0.0);
                    m[(col, k)] += Complex64::new(sign, 0.0);
                }
            }
            m[(col, col)] = Complex64::new(-sr, 0.0);
            rhs[(col, ch)] = Complex64::new(sr, 0.0);
        }
        for (j, o) in self.opamps.iter().enumerate() {
            let row = n_nodes + n_lines + j;
            let v = node(o.inverting).expect("inverting node indexed");
            let out = node(o.output).expect("output node indexed");
            let sra = libm::sqrt(self.ports[o.noise].impedance);
            // injected current I = (a + a') / sqrt(R_a)
            rhs[(v, o.noise)] += Complex64::new(1.0 / sra, 0.0);
            rhs[(v, o.conj)] += Complex64::new(1.0 / sra, 0.0);
            m[(out, row)] -= ONE;
            // V_inv = U = sqrt(R_a) (a - a')
            m[(row, v)] = ONE;
            rhs[(row, o.noise)] = Complex64::new(sra, 0.0);
            rhs[(row, o.conj)] = Complex64::new(-sra, 0.0);
        }

        let x = solve(&m, &rhs).map_err(|s| Error::Singular { omega, deficiency: s.deficiency })?;
        let mut known: Vec<Option<Vec<Complex64>>> = vec![None; n_ch];
        for (li, &(ch, _, _)) in lines.iter().enumerate() {
            known[ch] = Some(x.row(n_nodes + li).to_vec());
        }
        let signature = self.signature();
        let matrix = complete_quasi_unitary(&known, &signature)?;
        Ok(ScatteringMap {
            omega,
            channels: self.channel_names(),
            conjugated: self.ports.iter().map(|p| p.conjugated).collect(),
            matrix,
        })
    }
}

/// Scattering maps of `network` on every point of `grid`.
pub fn assemble_network(network: &Network, grid: &FrequencyGrid) -> Result<Vec<ScatteringMap>> {
    grid.points().iter().map(|&w| network.scattering(w)).collect()
}

/// Complex matrix mapping input channel amplitudes to output amplitudes at
/// one frequency, with the conjugation flag of every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMap {
    pub omega: f64,
    pub channels: Vec<String>,
    pub conjugated: Vec<bool>,
    pub matrix: CMatrix,
}

impl ScatteringMap {
    pub fn new(omega: f64, channels: Vec<String>, conjugated: Vec<bool>, matrix: CMatrix) -> Result<Self> {
        let n = channels.len();
        if conjugated.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: conjugated.len() });
        }
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.rows().max(matrix.cols()) });
        }
        Ok(ScatteringMap { omega, channels, conjugated, matrix })
    }

    pub fn signature(&self) -> Vec<f64> {
        self.conjugated.iter().map(|&c| if c { -1.0 } else { 1.0 }).collect()
    }

    pub fn channel(&self, name: &str) -> Result<usize> {
        self.channels.iter().position(|c| c == name).ok_or_else(|| Error::UnknownChannel(name.into()))
    }

    pub fn commutator_residual(&self) -> f64 {
        commutator_residual(&self.matrix, &self.signature()).expect("shape checked at construction")
    }

    /// Estimator of `signal` built from the output of `readout`.
    pub fn estimator(&self, signal: &str, readout: &str) -> Result<EstimatorCoefficients> {
        let s = self.channel(signal)?;
        let r = self.channel(readout)?;
        EstimatorCoefficients::from_readout_row(&self.channels, self.matrix.row(r), s)
    }
}

/// `‖S J S† − J‖` in max-abs norm.
pub fn commutator_residual(matrix: &CMatrix, signature: &[f64]) -> Result<f64> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch { expected: matrix.rows(), found: matrix.cols() });
    }
    if signature.len() != matrix.rows() {
        return Err(Error::DimensionMismatch { expected: matrix.rows(), found: signature.len() });
    }
    let j: Vec<Complex64> = signature.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let jm = CMatrix::from_diagonal(&j);
    let sjs = &(matrix * &jm) * &matrix.adjoint();
    Ok(sjs.max_abs_diff(&jm))
}

pub fn check_commutators(map: &ScatteringMap) -> f64 {
    map.commutator_residual()
}

/// Normalized readout plus the back-action row of a two-channel device.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortEstimate {
    pub estimator: EstimatorCoefficients,
    /// Row of the other output: coefficients on (readout channel input,
    /// signal channel input).
    pub back_action: [Complex64; 2],
}

pub fn two_port_estimator(map: &ScatteringMap, signal: &str, readout: &str) -> Result<TwoPortEstimate> {
    if map.channels.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: map.channels.len() });
    }
    let s = map.channel(signal)?;
    let r = map.channel(readout)?;
    if s == r {
        return Err(Error::DuplicateName(signal.into()));
    }
    let estimator = map.estimator(signal, readout)?;
    let back = map.matrix.row(s);
    Ok(TwoPortEstimate { estimator, back_action: [back[r], back[s]] })
}

fn j_inner(x: &[Complex64], y: &[Complex64], signature: &[f64]) -> Complex64 {
    x.iter().zip(y).zip(signature).map(|((a, b), s)| a * b.conj() * *s).sum()
}

/// Fills the missing rows of a scattering matrix so that `S J S† = J`.
///
/// The known rows must already be `J`-orthonormal. The missing rows span
/// the `J`-orthogonal complement of the known ones: an orthonormal basis `W`
/// of that complement is built (Euclidean Gram–Schmidt, which is stable),
/// then the Hermitian form `W J W†` is diagonalized and its eigenvectors
/// rescaled to `J`-norm ±1. The form must have as many positive
/// eigenvalues as there are missing `+1` slots.
pub fn complete_quasi_unitary(known: &[Option<Vec<Complex64>>], signature: &[f64]) -> Result<CMatrix> {
    let n = signature.len();
    if known.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: known.len() });
    }
    let mut ortho: Vec<Vec<Complex64>> = Vec::new();
    for row in known.iter().flatten() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        // ⟨x, b⟩_J = 0  <=>  x ⊥ J b in the Euclidean sense
        let jb: Vec<Complex64> = row.iter().zip(signature).map(|(z, s)| z * *s).collect();
        let v = orthogonalize(jb, &ortho);
        let norm = euclid(&v);
        if norm <= 1e-12 * euclid(row) {
            return Err(Error::Completion);
        }
        ortho.push(v.iter().map(|z| z / norm).collect());
    }

    let missing = n - ortho.len();
    let mut complement: Vec<Vec<Complex64>> = Vec::with_capacity(missing);
    for _ in 0..missing {
        // the unit vector with the largest remaining component
        let (v, norm) = (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = ONE;
                let v = orthogonalize(e, &ortho);
                let norm = euclid(&v);
                (v, norm)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 0");
        let u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        ortho.push(u.clone());
        complement.push(u);
    }

    let mut form = CMatrix::zeros(missing, missing);
    for i in 0..missing {
        for j in 0..missing {
            form[(i, j)] = j_inner(&complement[i], &complement[j], signature);
        }
    }
    let (values, vectors) = hermitian_eigen(&form);
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (p, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= 1e-13 * scale || scale == 0.0 {
            return Err(Error::Completion);
        }
        let k = 1.0 / libm::sqrt(lambda.abs());
        let mut u = vec![ZERO; n];
        for (i, w) in complement.iter().enumerate() {
            let c = vectors[(i, p)].conj() * k;
            for (uk, wk) in u.iter_mut().zip(w) {
                *uk += c * wk;
            }
        }
        if lambda > 0.0 {
            positives.push(u);
        } else {
            negatives.push(u);
        }
    }

    let slots_pos = known.iter().zip(signature).filter(|(r, s)| r.is_none() && **s > 0.0).count();
    if positives.len() != slots_pos {
        return Err(Error::Completion);
    }
    let mut positives = positives.into_iter();
    let mut negatives = negatives.into_iter();
    let rows: Vec<Vec<Complex64>> = known
        .iter()
        .zip(signature)
        .map(|(row, s)| match row {
            Some(r) => r.clone(),
            None if *s > 0.0 => positives.next().expect("counted"),
            None => negatives.next().expect("counted"),
        })
        .collect();
    Ok(CMatrix::from_rows(&rows).expect("rows have length n"))
}

fn euclid(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Removes the components along the orthonormal `basis`, twice.
fn orthogonalize(mut v: Vec<Complex64>, basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    for _ in 0..2 {
        for b in basis {
            let c: Complex64 = v.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= c * bk;
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matched_resistor_reflects_losslessly() {
        let mut net = Network::new();
        net.add_line(PortSpec::new("R", 75.0, 300.0).unwrap(), 1, GROUND).unwrap();
        net.add_element("open", 1, GROUND, Element::Capacitor(1e-30)).unwrap();
        let s = net.scattering(1.0).unwrap();
        assert_eq!(s.matrix.rows(), 1);
        assert!((s.matrix[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(s.commutator_residual() < 1e-12);
    }

    #[test]
    fn identity_has_zero_residual() {
        for sig in [[1.0, 1.0, -1.0], [-1.0, 1.0, 1.0]] {
            assert_eq!(commutator_residual(&CMatrix::identity(3), &sig).unwrap(), 0.0);
        }
    }

    #[test]
    fn noiseless_gain_violates_consistency() {
        let s = CMatrix::from_diagonal(&[c(core::f64::consts::SQRT_2, 0.0)]);
        let r = commutator_residual(&s, &[1.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_dimension_mismatch() {
        assert!(commutator_residual(&CMatrix::identity(2), &[1.0]).is_err());
        assert!(commutator_residual(&CMatrix::zeros(2, 3), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn unwired_terminal_is_reported() {
        let mut net = Network::new();
        net.add_line(PortSpec::new("l", 50.0, 0.0).unwrap(), 1, GROUND).unwrap();
        net.add_element("c", 1, 2, Element::Capacitor(1e-9)).unwrap();
        assert_eq!(net.scattering(1e3), Err(Error::UnwiredTerminal { element: "c".to_string(), node: 2 }));
    }

    #[test]
    fn singular_system_reports_frequency() {
        // op-amp whose output only drives a line: output current undetermined
        let mut net = Network::new();
        net.add_line(PortSpec::new("l", 50.0, 0.0).unwrap(), 1, GROUND).unwrap();
        net.add_line(PortSpec::new("r", 50.0, 0.0).unwrap(), 2, GROUND).unwrap();
        net.add_opamp("u", 1, 2, 50.0, 0.0, 0.0).unwrap();
        match net.scattering(10.0) {
            Err(Error::Singular { omega, deficiency }) => {
                assert_eq!(omega, 10.0);
                assert!(deficiency >= 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_invalid_ports() {
        let mut net = Network::new();
        net.add_line(PortSpec::new("l", 50.0, 0.0).unwrap(), 1, GROUND).unwrap();
        assert_eq!(
            net.add_line(PortSpec::new("l", 50.0, 0.0).unwrap(), 1, GROUND),
            Err(Error::DuplicateName("l".into()))
        );
        assert!(PortSpec::new("z", 0.0, 1.0).is_err());
        assert!(PortSpec::new("z", f64::INFINITY, 1.0).is_err());
        assert!(PortSpec::new("z", 1.0, -1.0).is_err());
    }

    #[test]
    fn two_port_swap_is_a_pure_transducer() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let map = ScatteringMap::new(1.0, vec!["I".into(), "E".into()], vec![false, false], m).unwrap();
        let est = two_port_estimator(&map, "E", "I").unwrap();
        assert_eq!(est.estimator.mu("E"), Some(c(1.0, 0.0)));
        assert_eq!(est.estimator.mu("I"), Some(c(0.0, 0.0)));
        assert_eq!(est.back_action, [c(-1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn two_port_generic_and_equal_weights() {
        let (alpha, beta, gamma, delta) = (c(0.3, 0.4), c(0.8, -0.1), c(-0.2, 0.5), c(0.1, 0.1));
        let m = CMatrix::from_rows(&[vec![alpha, beta], vec![gamma, delta]]).unwrap();
        let map = ScatteringMap::new(1.0, vec!["I".into(), "E".into()], vec![false, false], m).unwrap();
        let est = two_port_estimator(&map, "E", "I").unwrap();
        assert!((est.estimator.mu("I").unwrap() - alpha / beta).norm() < 1e-15);
        assert_eq!(est.back_action, [gamma, delta]);

        let m = CMatrix::from_rows(&[vec![alpha, alpha], vec![gamma, delta]]).unwrap();
        let map = ScatteringMap::new(1.0, vec!["I".into(), "E".into()], vec![false, false], m).unwrap();
        let est = two_port_estimator(&map, "E", "I").unwrap();
        assert_eq!(est.estimator.mu("I").unwrap(), c(1.0, 0.0));

        let m = CMatrix::from_rows(&[vec![alpha, c(0.0, 0.0)], vec![gamma, delta]]).unwrap();
        let map = ScatteringMap::new(1.0, vec!["I".into(), "E".into()], vec![false, false], m).unwrap();
        assert_eq!(two_port_estimator(&map, "E", "I"), Err(Error::NoTransduction));
    }

    #[test]
    fn completion_of_a_single_known_row() {
        // row of a phase-insensitive amplifier of gain g: (g, sqrt(g²-1)) on (+, -)
        let g = 3.0_f64;
        let row = vec![c(g, 0.0), c(libm::sqrt(g * g - 1.0), 0.0)];
        let s = complete_quasi_unitary(&[Some(row), None], &[1.0, -1.0]).unwrap();
        assert!(commutator_residual(&s, &[1.0, -1.0]).unwrap() < 1e-12);
    }
}
