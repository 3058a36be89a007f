//! Random netlist documents and a renderer that writes them in
//! non-canonical but equivalent text.
#![allow(dead_code)]

use proptest::prelude::*;
use qunet::netlist::{FeedbackKind, FeedbackSpec, LineDecl, NetlistDocument, OpAmpDecl, Statement, StatementKind, Sweep};
use qunet_core::spectra::GridScale;

pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Unique by construction: the `_<i>` suffix identifies the declaration.
fn name(i: usize) -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,5}".prop_map(move |p| format!("{p}_{i}"))
}

fn temperature() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), log_uniform(1e-3, 1e3), 0.0..1e3f64]
}

fn comment() -> impl Strategy<Value = String> {
    "[^\r\n]{0,16}"
}

fn trailing() -> impl Strategy<Value = Option<String>> {
    prop::option::weighted(0.3, comment())
}

fn feedback() -> impl Strategy<Value = FeedbackSpec> {
    (prop_oneof![4 => Just(FeedbackKind::C), 4 => Just(FeedbackKind::L), 1 => Just(FeedbackKind::R)], log_uniform(1e-15, 1e6))
        .prop_map(|(kind, value)| FeedbackSpec { kind, value })
}

fn sweep() -> impl Strategy<Value = Sweep> {
    (log_uniform(1e-3, 1e12), 1usize..600, log_uniform(1e-3, 1e3), any::<bool>()).prop_map(|(lo, points, r, log)| Sweep {
        lo_hz: lo,
        hi_hz: if points == 1 && r < 0.01 { lo } else { lo * (1.0 + r) },
        points,
        scale: if log { GridScale::Logarithmic } else { GridScale::Linear },
    })
}

#[derive(Debug, Clone)]
enum Designation {
    None,
    Ports(Option<usize>, Option<usize>),
    Preset,
}

/// Documents valid under lenient parsing (resistive feedback may appear).
pub fn document() -> impl Strategy<Value = NetlistDocument> {
    (any::<bool>(), 0usize..5, 0usize..4).prop_flat_map(|(header, n_lines, n_ops)| {
        let lines: Vec<_> = (0..n_lines).map(|i| (name(i), log_uniform(1e-2, 1e7), temperature(), trailing())).collect();
        let n_ops = if n_lines == 0 { 0 } else { n_ops };
        let ops: Vec<_> = (0..n_ops)
            .map(|i| {
                (
                    name(n_lines + i),
                    0..n_lines.max(1),
                    0..n_lines.max(1),
                    log_uniform(1e-2, 1e7),
                    temperature(),
                    temperature(),
                    feedback(),
                    trailing(),
                )
            })
            .collect();
        let designation = if n_lines == 0 {
            prop_oneof![Just(Designation::None), Just(Designation::Preset)].boxed()
        } else {
            prop_oneof![
                Just(Designation::None),
                Just(Designation::Preset),
                (prop::option::of(0..n_lines), prop::option::of(0..n_lines)).prop_map(|(s, r)| Designation::Ports(s, r)),
            ]
            .boxed()
        };
        (
            Just(header),
            lines,
            ops,
            designation,
            prop::option::of(sweep()),
            (trailing(), trailing(), trailing()),
            prop::collection::vec((any::<prop::sample::Index>(), comment()), 0..4),
        )
            .prop_map(|(header, lines, ops, designation, sweep, extra, comments)| {
                let mut st = Vec::new();
                if header {
                    st.push(with(StatementKind::Header(1), extra.0.clone()));
                }
                let names: Vec<String> = lines.iter().map(|l| l.0.clone()).collect();
                for (name, impedance, temperature, c) in lines {
                    st.push(with(StatementKind::Line(LineDecl { name, impedance, temperature }), c));
                }
                for (name, l, r, ra, ta, tc, fb, c) in ops {
                    let decl = OpAmpDecl {
                        name,
                        left: names[l].clone(),
                        right: names[r].clone(),
                        noise_impedance: ra,
                        noise_temp: ta,
                        conj_temp: tc,
                        feedback: fb,
                    };
                    st.push(with(StatementKind::OpAmp(decl), c));
                }
                match designation {
                    Designation::None => {}
                    Designation::Preset => st.push(with(StatementKind::Preset("microscope".into()), extra.1.clone())),
                    Designation::Ports(s, r) => {
                        if let Some(s) = s {
                            st.push(with(StatementKind::Signal(names[s].clone()), extra.1.clone()));
                        }
                        if let Some(r) = r {
                            st.push(with(StatementKind::Readout(names[r].clone()), None));
                        }
                    }
                }
                if let Some(s) = sweep {
                    st.push(with(StatementKind::Sweep(s), extra.2));
                }
                // full-line comments anywhere after the header
                let first = usize::from(header);
                for (at, text) in comments {
                    let k = first + at.index(st.len() - first + 1);
                    st.insert(k, Statement::new(StatementKind::Comment(text)));
                }
                NetlistDocument { statements: st }
            })
    })
}

fn with(kind: StatementKind, comment: Option<String>) -> Statement {
    match comment {
        Some(c) => Statement::new(kind).with_comment(c),
        None => Statement::new(kind),
    }
}

/// Deterministic choices drawn from a byte string.
pub struct Noise<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Noise<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Noise { bytes, at: 0 }
    }

    fn pick<'b, T>(&mut self, options: &'b [T]) -> &'b T {
        let b = if self.bytes.is_empty() { 0 } else { self.bytes[self.at % self.bytes.len()] };
        self.at += 1;
        &options[b as usize % options.len()]
    }

    fn ws(&mut self) -> &'static str {
        self.pick(&[" ", "\t", "   ", " \t ", "\u{3000}"])
    }

    fn number(&mut self, v: f64) -> String {
        match self.pick(&[0, 1, 2, 3, 4]) {
            0 => format!("{v:e}"),
            1 => format!("{v}"),
            2 => format!("{v:E}"),
            3 => format!("+{v:e}"),
            _ => format!("{v}e0"),
        }
    }
}

/// Same document, different text: whitespace, number spelling, key order,
/// line endings and blank lines all vary with `noise`.
pub fn render(doc: &NetlistDocument, noise: &mut Noise) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        if *noise.pick(&[false, false, false, true]) {
            out.push_str(noise.pick(&["", " ", "\t \t"]));
            out.push('\n');
        }
        out.push_str(noise.pick(&["", "", " ", "\t"]));
        let mut tokens: Vec<String> = Vec::new();
        match &s.kind {
            StatementKind::Header(v) => tokens.extend(["qnet".into(), v.to_string()]),
            StatementKind::Comment(c) => {
                out.push('#');
                out.push_str(c);
            }
            StatementKind::Line(l) => {
                tokens.extend(["line".into(), l.name.clone()]);
                let mut kv = vec![
                    format!("impedance={}", noise.number(l.impedance)),
                    format!("temperature={}", noise.number(l.temperature)),
                ];
                shuffle(&mut kv, noise);
                tokens.extend(kv);
            }
            StatementKind::OpAmp(o) => {
                tokens.extend(["opamp".into(), o.name.clone()]);
                let k = match o.feedback.kind {
                    FeedbackKind::R => "R",
                    FeedbackKind::C => "C",
                    FeedbackKind::L => "L",
                };
                let mut kv = vec![
                    format!("left={}", o.left),
                    format!("right={}", o.right),
                    format!("noise_impedance={}", noise.number(o.noise_impedance)),
                    format!("noise_temp={}", noise.number(o.noise_temp)),
                    format!("conj_temp={}", noise.number(o.conj_temp)),
                    format!("feedback={k}:{}", noise.number(o.feedback.value)),
                ];
                shuffle(&mut kv, noise);
                tokens.extend(kv);
            }
            StatementKind::Signal(p) => tokens.extend(["signal".into(), p.clone()]),
            StatementKind::Readout(p) => tokens.extend(["readout".into(), p.clone()]),
            StatementKind::Sweep(w) => {
                let scale = if w.scale == GridScale::Logarithmic { "log" } else { "lin" };
                let pts = format!("{}{}", noise.pick(&["", "0", "00"]), w.points);
                tokens.extend(["sweep".into(), noise.number(w.lo_hz), noise.number(w.hi_hz), pts, scale.into()]);
            }
            StatementKind::Preset(p) => tokens.extend(["preset".into(), p.clone()]),
        }
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                out.push_str(noise.ws());
            }
            out.push_str(t);
        }
        if let Some(c) = &s.comment {
            out.push_str(noise.pick(&["", " ", "\t"]));
            out.push('#');
            out.push_str(c);
        } else if !matches!(s.kind, StatementKind::Comment(_)) {
            out.push_str(noise.pick(&["", "", " "]));
        }
        out.push_str(noise.pick(&["\n", "\r\n"]));
    }
    out
}

fn shuffle<T>(v: &mut [T], noise: &mut Noise) {
    for i in (1..v.len()).rev() {
        let j = *noise.pick(&[0usize, 1, 2, 3, 4, 5, 6, 7]) % (i + 1);
        v.swap(i, j);
    }
}
