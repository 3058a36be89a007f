//! `.qnet` text format.
//!
//! ```text
//! qnet 1
//! # two-port op-amp stage
//! line l impedance=50 temperature=0
//! line r impedance=50 temperature=0
//! opamp amp left=l right=r noise_impedance=50 noise_temp=0 conj_temp=0 feedback=C:1e-12
//! signal l
//! readout r
//! sweep 1e8 1e9 200 log   # Hz
//! ```
//!
//! One statement per line; `#` starts a comment. Comments are kept and
//! written back verbatim. Frequencies are in Hz, impedances in Ω and
//! temperatures in K.

use std::collections::HashSet;
use std::fmt;

use qunet_core::accelerometer::PRESETS;
use qunet_core::amplifier::Feedback;
use qunet_core::spectra::GridScale;

/// 1-based position of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    R,
    C,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSpec {
    pub kind: FeedbackKind,
    pub value: f64,
}

impl FeedbackSpec {
    pub fn to_feedback(self) -> Feedback {
        match self.kind {
            FeedbackKind::R => Feedback::Resistor(self.value),
            FeedbackKind::C => Feedback::Capacitor(self.value),
            FeedbackKind::L => Feedback::Inductor(self.value),
        }
    }
}

impl fmt::Display for FeedbackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            FeedbackKind::R => 'R',
            FeedbackKind::C => 'C',
            FeedbackKind::L => 'L',
        };
        write!(f, "{k}:{:e}", self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineDecl {
    pub name: String,
    pub impedance: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpAmpDecl {
    pub name: String,
    pub left: String,
    pub right: String,
    pub noise_impedance: f64,
    pub noise_temp: f64,
    pub conj_temp: f64,
    pub feedback: FeedbackSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub points: usize,
    pub scale: GridScale,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Header(u32),
    /// Full-line comment; the text after `#`, verbatim.
    Comment(String),
    Line(LineDecl),
    OpAmp(OpAmpDecl),
    Signal(String),
    Readout(String),
    Sweep(Sweep),
    Preset(String),
}

#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StatementKind,
    /// Trailing comment, text after `#`.
    pub comment: Option<String>,
    pub position: Position,
}

impl Statement {
    pub fn new(kind: StatementKind) -> Self {
        Statement { kind, comment: None, position: Position::default() }
    }

    pub fn with_comment(mut self, text: impl Into<String>) -> Self {
        self.comment = Some(text.into());
        self
    }
}

// positions are bookkeeping, not content
impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.comment == other.comment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    NoSignal,
    NoReadout,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NoSignal => f.write_str("no signal"),
            Warning::NoReadout => f.write_str("no readout"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetlistDocument {
    pub statements: Vec<Statement>,
}

impl NetlistDocument {
    pub fn lines(&self) -> impl Iterator<Item = &LineDecl> {
        self.statements.iter().filter_map(|s| match &s.kind {
            StatementKind::Line(l) => Some(l),
            _ => None,
        })
    }

    pub fn opamps(&self) -> impl Iterator<Item = &OpAmpDecl> {
        self.statements.iter().filter_map(|s| match &s.kind {
            StatementKind::OpAmp(o) => Some(o),
            _ => None,
        })
    }

    pub fn line(&self, name: &str) -> Option<&LineDecl> {
        self.lines().find(|l| l.name == name)
    }

    fn find<'a, T>(&'a self, f: impl Fn(&'a StatementKind) -> Option<T>) -> Option<T> {
        self.statements.iter().find_map(|s| f(&s.kind))
    }

    pub fn signal(&self) -> Option<&str> {
        self.find(|k| match k {
            StatementKind::Signal(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn readout(&self) -> Option<&str> {
        self.find(|k| match k {
            StatementKind::Readout(s) => Some(s.as_str()),
            _ => None,
        })
    }

    pub fn sweep(&self) -> Option<Sweep> {
        self.find(|k| match k {
            StatementKind::Sweep(s) => Some(*s),
            _ => None,
        })
    }

    pub fn preset(&self) -> Option<&str> {
        self.find(|k| match k {
            StatementKind::Preset(s) => Some(s.as_str()),
            _ => None,
        })
    }

    /// Missing designations. A preset document needs neither.
    pub fn warnings(&self) -> Vec<Warning> {
        if self.preset().is_some() {
            return Vec::new();
        }
        let mut w = Vec::new();
        if self.signal().is_none() {
            w.push(Warning::NoSignal);
        }
        if self.readout().is_none() {
            w.push(Warning::NoReadout);
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("unknown key `{key}` for `{keyword}`")]
    UnknownKey { keyword: &'static str, key: String },
    #[error("`{keyword}` needs `{field}`")]
    MissingField { keyword: &'static str, field: &'static str },
    #[error("`{0}` given twice")]
    DuplicateField(String),
    #[error("expected key=value, found `{0}`")]
    ExpectedKeyValue(String),
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("undeclared port `{0}`")]
    UndeclaredPort(String),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("nonpositive {what} {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("negative temperature {0}")]
    NegativeTemperature(f64),
    #[error("malformed feedback `{0}` (expected R:<Ω>, C:<F> or L:<H>)")]
    MalformedFeedback(String),
    #[error("dissipative feedback R:{0:e} (reactive feedback required; allow with the resistive-feedback toggle)")]
    DissipativeFeedback(f64),
    #[error("`{0}` given twice")]
    DuplicateDirective(&'static str),
    #[error("`preset` cannot be combined with `{0}`")]
    PresetConflict(&'static str),
    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(String),
    #[error("the `qnet` header must come first")]
    MisplacedHeader,
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

/// Every error found in a document, in source order.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject resistive feedback.
    pub strict: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict: true }
    }
}

pub fn parse(text: &str) -> Result<NetlistDocument, ParseErrors> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<NetlistDocument, ParseErrors> {
    let mut p = Parser { options, errors: Vec::new(), names: HashSet::new(), ports: HashSet::new(), seen: Seen::default() };
    let mut statements = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if let Some(s) = p.line(i + 1, raw, statements.is_empty()) {
            statements.push(s);
        }
    }
    if p.errors.is_empty() {
        Ok(NetlistDocument { statements })
    } else {
        Err(ParseErrors(p.errors))
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(code: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (byte, column)
    let mut column = 0;
    for (byte, ch) in code.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                out.push(Token { text: &code[b..byte], column: c });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        out.push(Token { text: &code[b..], column: c });
    }
    out
}

#[derive(Default)]
struct Seen {
    signal: bool,
    readout: bool,
    sweep: bool,
    preset: bool,
}

struct Parser {
    options: ParseOptions,
    errors: Vec<ParseError>,
    names: HashSet<String>,
    ports: HashSet<String>,
    seen: Seen,
}

/// Marker for a statement that failed; the error itself is already recorded.
#[derive(Debug)]
struct Fail;

impl Parser {
    fn fail(&mut self, line: usize, column: usize, kind: ParseErrorKind) -> Fail {
        self.errors.push(ParseError { position: Position { line, column }, kind });
        Fail
    }

    fn line(&mut self, n: usize, raw: &str, first: bool) -> Option<Statement> {
        let (code, comment) = match raw.find('#') {
            Some(i) => (&raw[..i], Some(raw[i + 1..].to_string())),
            None => (raw, None),
        };
        let tokens = tokenize(code);
        let position = Position { line: n, column: tokens.first().map_or(1, |t| t.column) };
        let kind = if tokens.is_empty() {
            StatementKind::Comment(comment.clone()?)
        } else {
            self.statement(n, &tokens, first).ok()?
        };
        let comment = if matches!(kind, StatementKind::Comment(_)) { None } else { comment };
        Some(Statement { kind, comment, position })
    }

    fn statement(&mut self, n: usize, tokens: &[Token], first: bool) -> Result<StatementKind, Fail> {
        let kw = tokens[0];
        let args = &tokens[1..];
        match kw.text {
            "qnet" => {
                let v = self.positional::<1>(n, kw, args, "qnet", ["version"])?[0];
                if !first {
                    return Err(self.fail(n, kw.column, ParseErrorKind::MisplacedHeader));
                }
                if v.text != "1" {
                    return Err(self.fail(n, v.column, ParseErrorKind::UnsupportedVersion(v.text.into())));
                }
                Ok(StatementKind::Header(1))
            }
            "line" => self.line_decl(n, kw, args),
            "opamp" => self.opamp_decl(n, kw, args),
            "signal" | "readout" => {
                let which = if kw.text == "signal" { "signal" } else { "readout" };
                let port = self.positional::<1>(n, kw, args, which, ["port"])?[0];
                self.designation(n, kw, which)?;
                let name = self.port_ref(n, port)?;
                Ok(if which == "signal" { StatementKind::Signal(name) } else { StatementKind::Readout(name) })
            }
            "sweep" => self.sweep(n, kw, args),
            "preset" => {
                let name = self.positional::<1>(n, kw, args, "preset", ["name"])?[0];
                self.designation(n, kw, "preset")?;
                if !PRESETS.contains(&name.text) {
                    return Err(self.fail(
                        n,
                        name.column,
                        ParseErrorKind::UnknownPreset { name: name.text.into(), available: PRESETS.join(", ") },
                    ));
                }
                Ok(StatementKind::Preset(name.text.into()))
            }
            other => Err(self.fail(n, kw.column, ParseErrorKind::UnknownKeyword(other.into()))),
        }
    }

    fn positional<'a, const N: usize>(
        &mut self,
        n: usize,
        kw: Token<'a>,
        args: &[Token<'a>],
        keyword: &'static str,
        fields: [&'static str; N],
    ) -> Result<[Token<'a>; N], Fail> {
        if args.len() < N {
            return Err(self.fail(n, kw.column, ParseErrorKind::MissingField { keyword, field: fields[args.len()] }));
        }
        if let Some(extra) = args.get(N) {
            return Err(self.fail(n, extra.column, ParseErrorKind::UnexpectedToken(extra.text.into())));
        }
        Ok(core::array::from_fn(|i| args[i]))
    }

    fn designation(&mut self, n: usize, kw: Token, which: &'static str) -> Result<(), Fail> {
        let seen = &mut self.seen;
        let (flag, conflict) = match which {
            "signal" => (&mut seen.signal, seen.preset.then_some("preset")),
            "readout" => (&mut seen.readout, seen.preset.then_some("preset")),
            _ => {
                let c = if seen.signal {
                    Some("signal")
                } else if seen.readout {
                    Some("readout")
                } else {
                    None
                };
                (&mut seen.preset, c)
            }
        };
        let dup = std::mem::replace(flag, true);
        if dup {
            return Err(self.fail(n, kw.column, ParseErrorKind::DuplicateDirective(which)));
        }
        if let Some(c) = conflict {
            let other = if which == "preset" { c } else { which };
            return Err(self.fail(n, kw.column, ParseErrorKind::PresetConflict(other)));
        }
        Ok(())
    }

    fn name(&mut self, n: usize, tok: Token) -> Result<String, Fail> {
        let mut chars = tok.text.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(self.fail(n, tok.column, ParseErrorKind::InvalidName(tok.text.into())));
        }
        if !self.names.insert(tok.text.into()) {
            return Err(self.fail(n, tok.column, ParseErrorKind::DuplicateName(tok.text.into())));
        }
        Ok(tok.text.into())
    }

    fn port_ref(&mut self, n: usize, tok: Token) -> Result<String, Fail> {
        if !self.ports.contains(tok.text) {
            return Err(self.fail(n, tok.column, ParseErrorKind::UndeclaredPort(tok.text.into())));
        }
        Ok(tok.text.into())
    }

    fn number(&mut self, n: usize, text: &str, column: usize) -> Result<f64, Fail> {
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.fail(n, column, ParseErrorKind::MalformedNumber(text.into()))),
        }
    }

    fn positive(&mut self, n: usize, text: &str, column: usize, what: &'static str) -> Result<f64, Fail> {
        let v = self.number(n, text, column)?;
        if v <= 0.0 {
            return Err(self.fail(n, column, ParseErrorKind::NonPositive { what, value: v }));
        }
        Ok(v)
    }

    fn temperature(&mut self, n: usize, text: &str, column: usize) -> Result<f64, Fail> {
        let v = self.number(n, text, column)?;
        if v < 0.0 {
            return Err(self.fail(n, column, ParseErrorKind::NegativeTemperature(v)));
        }
        Ok(v)
    }

    /// Splits `key=value` arguments, checking keys against `allowed`.
    /// Values are returned with their column.
    fn key_values<'a>(
        &mut self,
        n: usize,
        keyword: &'static str,
        args: &[Token<'a>],
        allowed: &[&'static str],
    ) -> Result<Vec<Option<(&'a str, usize)>>, Fail> {
        let mut values = vec![None; allowed.len()];
        let mut ok = true;
        for tok in args {
            let Some((key, value)) = tok.text.split_once('=') else {
                self.fail(n, tok.column, ParseErrorKind::ExpectedKeyValue(tok.text.into()));
                ok = false;
                continue;
            };
            let Some(slot) = allowed.iter().position(|k| *k == key) else {
                self.fail(n, tok.column, ParseErrorKind::UnknownKey { keyword, key: key.into() });
                ok = false;
                continue;
            };
            if values[slot].is_some() {
                self.fail(n, tok.column, ParseErrorKind::DuplicateField(key.into()));
                ok = false;
                continue;
            }
            values[slot] = Some((value, tok.column + key.chars().count() + 1));
        }
        if !ok {
            return Err(Fail);
        }
        Ok(values)
    }

    fn required<'a>(
        &mut self,
        n: usize,
        kw: Token,
        keyword: &'static str,
        fields: &[&'static str],
        values: &[Option<(&'a str, usize)>],
    ) -> Result<Vec<(&'a str, usize)>, Fail> {
        let mut out = Vec::with_capacity(values.len());
        for (field, v) in fields.iter().zip(values) {
            match v {
                Some(v) => out.push(*v),
                None => return Err(self.fail(n, kw.column, ParseErrorKind::MissingField { keyword, field })),
            }
        }
        Ok(out)
    }

    fn line_decl(&mut self, n: usize, kw: Token, args: &[Token]) -> Result<StatementKind, Fail> {
        const FIELDS: [&str; 2] = ["impedance", "temperature"];
        let Some((name_tok, rest)) = args.split_first() else {
            return Err(self.fail(n, kw.column, ParseErrorKind::MissingField { keyword: "line", field: "name" }));
        };
        let name = self.name(n, *name_tok);
        let kv = self.key_values(n, "line", rest, &FIELDS)?;
        let v = self.required(n, kw, "line", &FIELDS, &kv)?;
        let impedance = self.positive(n, v[0].0, v[0].1, "impedance");
        let temperature = self.temperature(n, v[1].0, v[1].1);
        let name = name?;
        let decl = LineDecl { name, impedance: impedance?, temperature: temperature? };
        self.ports.insert(decl.name.clone());
        Ok(StatementKind::Line(decl))
    }

    fn opamp_decl(&mut self, n: usize, kw: Token, args: &[Token]) -> Result<StatementKind, Fail> {
        const FIELDS: [&str; 6] = ["left", "right", "noise_impedance", "noise_temp", "conj_temp", "feedback"];
        let fields = &FIELDS;
        let Some((name_tok, rest)) = args.split_first() else {
            return Err(self.fail(n, kw.column, ParseErrorKind::MissingField { keyword: "opamp", field: "name" }));
        };
        let name = self.name(n, *name_tok);
        let kv = self.key_values(n, "opamp", rest, fields)?;
        let v = self.required(n, kw, "opamp", fields, &kv)?;
        let left = self.port_ref(n, Token { text: v[0].0, column: v[0].1 });
        let right = self.port_ref(n, Token { text: v[1].0, column: v[1].1 });
        let ra = self.positive(n, v[2].0, v[2].1, "noise impedance");
        let ta = self.temperature(n, v[3].0, v[3].1);
        let tc = self.temperature(n, v[4].0, v[4].1);
        let fb = self.feedback(n, v[5].0, v[5].1);
        Ok(StatementKind::OpAmp(OpAmpDecl {
            name: name?,
            left: left?,
            right: right?,
            noise_impedance: ra?,
            noise_temp: ta?,
            conj_temp: tc?,
            feedback: fb?,
        }))
    }

    fn feedback(&mut self, n: usize, text: &str, column: usize) -> Result<FeedbackSpec, Fail> {
        let Some((k, v)) = text.split_once(':') else {
            return Err(self.fail(n, column, ParseErrorKind::MalformedFeedback(text.into())));
        };
        let kind = match k {
            "R" => FeedbackKind::R,
            "C" => FeedbackKind::C,
            "L" => FeedbackKind::L,
            _ => return Err(self.fail(n, column, ParseErrorKind::MalformedFeedback(text.into()))),
        };
        let value = self.positive(n, v, column + k.chars().count() + 1, "feedback value")?;
        if kind == FeedbackKind::R && self.options.strict {
            return Err(self.fail(n, column, ParseErrorKind::DissipativeFeedback(value)));
        }
        Ok(FeedbackSpec { kind, value })
    }

    fn sweep(&mut self, n: usize, kw: Token, args: &[Token]) -> Result<StatementKind, Fail> {
        let [lo, hi, pts, scale] = self.positional::<4>(n, kw, args, "sweep", ["f_lo", "f_hi", "npoints", "scale"])?;
        if std::mem::replace(&mut self.seen.sweep, true) {
            return Err(self.fail(n, kw.column, ParseErrorKind::DuplicateDirective("sweep")));
        }
        let lo_hz = self.positive(n, lo.text, lo.column, "frequency");
        let hi_hz = self.positive(n, hi.text, hi.column, "frequency");
        let points = match pts.text.parse::<usize>() {
            Ok(0) => Err(self.fail(n, pts.column, ParseErrorKind::InvalidSweep("needs at least one point"))),
            Ok(p) => Ok(p),
            Err(_) => Err(self.fail(n, pts.column, ParseErrorKind::MalformedNumber(pts.text.into()))),
        };
        let scale = match scale.text {
            "lin" => Ok(GridScale::Linear),
            "log" => Ok(GridScale::Logarithmic),
            _ => Err(self.fail(n, scale.column, ParseErrorKind::UnexpectedToken(scale.text.into()))),
        };
        let (lo_hz, hi_hz, points, scale) = (lo_hz?, hi_hz?, points?, scale?);
        if hi_hz < lo_hz {
            return Err(self.fail(n, hi.column, ParseErrorKind::InvalidSweep("upper bound below lower bound")));
        }
        if hi_hz == lo_hz && points > 1 {
            return Err(self.fail(n, pts.column, ParseErrorKind::InvalidSweep("several points need distinct bounds")));
        }
        Ok(StatementKind::Sweep(Sweep { lo_hz, hi_hz, points, scale }))
    }
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementKind::Header(v) => write!(f, "qnet {v}"),
            StatementKind::Comment(c) => write!(f, "#{c}"),
            StatementKind::Line(l) => {
                write!(f, "line {} impedance={:e} temperature={:e}", l.name, l.impedance, l.temperature)
            }
            StatementKind::OpAmp(o) => write!(
                f,
                "opamp {} left={} right={} noise_impedance={:e} noise_temp={:e} conj_temp={:e} feedback={}",
                o.name, o.left, o.right, o.noise_impedance, o.noise_temp, o.conj_temp, o.feedback
            ),
            StatementKind::Signal(p) => write!(f, "signal {p}"),
            StatementKind::Readout(p) => write!(f, "readout {p}"),
            StatementKind::Sweep(s) => {
                let scale = match s.scale {
                    GridScale::Linear => "lin",
                    GridScale::Logarithmic => "log",
                };
                write!(f, "sweep {:e} {:e} {} {scale}", s.lo_hz, s.hi_hz, s.points)
            }
            StatementKind::Preset(p) => write!(f, "preset {p}"),
        }
    }
}

/// Canonical text: one statement per line, numbers in shortest round-trip
/// exponent form (`0.15e6` becomes `1.5e5`).
pub fn serialize(doc: &NetlistDocument) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        out.push_str(&s.kind.to_string());
        if let Some(c) = &s.comment {
            out.push_str(" #");
            out.push_str(c);
        }
        out.push('\n');
    }
    out
}

impl fmt::Display for NetlistDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}
