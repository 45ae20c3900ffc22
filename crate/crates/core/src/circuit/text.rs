//! Line-oriented circuit text format.
//!
//! ```text
//! width=3 name=walk4_t1 measure=0,1
//! H 1
//! CP 0 1 1.5707963267948966
//! U 2 0.7071067811865476 0 0.7071067811865476 0 0.7071067811865476 0 -0.7071067811865476 0
//! RZ 0 0.5 @t=12
//! ```
//!
//! One gate per line: kind, qubits, then parameters. `U` carries the 2x2
//! payload as eight reals (row-major, re/im interleaved). An optional
//! `@t=<start>` suffix records a scheduled start time. Blank lines and `#`
//! comments are skipped. Floats use Rust's shortest round-trip formatting.

use std::fmt::{self, Write};

use crate::error::CircuitError;
use crate::linalg::C64;

use super::{Circuit, Gate, GateKind};

pub(crate) fn write_gate(f: &mut impl Write, g: &Gate) -> fmt::Result {
    write!(f, "{}", g.kind().name())?;
    for q in g.qubits() {
        write!(f, " {q}")?;
    }
    match g.kind() {
        GateKind::RZ(t) | GateKind::Phase(t) | GateKind::ControlledPhase(t) => write!(f, " {t}")?,
        GateKind::U3 { theta, phi, lambda } => write!(f, " {theta} {phi} {lambda}")?,
        GateKind::Unitary2x2(m) => {
            for z in m.iter().flatten() {
                write!(f, " {} {}", z.re, z.im)?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// Serializes a circuit, with optional per-gate start times.
pub fn to_text(c: &Circuit, start_times: Option<&[f64]>) -> String {
    let mut s = String::new();
    let name: String = c.name().chars().map(|ch| if ch.is_whitespace() { '_' } else { ch }).collect();
    let measure: Vec<String> = c.measured().iter().map(usize::to_string).collect();
    writeln!(s, "width={} name={} measure={}", c.width(), name, measure.join(",")).unwrap();
    for (i, g) in c.gates().iter().enumerate() {
        write_gate(&mut s, g).unwrap();
        if let Some(t) = start_times.and_then(|ts| ts.get(i)) {
            write!(s, " @t={t}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, CircuitError> {
    tok.parse::<f64>().map_err(|_| err(line, format!("bad number '{tok}'")))
}

fn parse_header(text: &str, line: usize) -> Result<Circuit, CircuitError> {
    let mut width = None;
    let mut name = String::new();
    let mut measure = Vec::new();
    for tok in text.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| err(line, format!("bad header field '{tok}'")))?;
        match k {
            "width" => width = Some(v.parse::<usize>().map_err(|_| err(line, "bad width"))?),
            "name" => name = v.to_string(),
            "measure" => {
                measure = v
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| err(line, "bad measure list")))
                    .collect::<Result<_, _>>()?
            }
            _ => return Err(err(line, format!("unknown header field '{k}'"))),
        }
    }
    let width = width.ok_or_else(|| err(line, "missing width"))?;
    let mut c = Circuit::new(width, name);
    c.set_measured(measure).map_err(|e| err(line, e.to_string()))?;
    Ok(c)
}

/// Parses the text format; start times are returned only when every gate has
/// one.
pub fn from_text(text: &str) -> Result<(Circuit, Option<Vec<f64>>), CircuitError> {
    let mut circuit: Option<Circuit> = None;
    let mut times = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some(c) = circuit.as_mut() else {
            circuit = Some(parse_header(body, line)?);
            continue;
        };
        let mut toks: Vec<&str> = body.split_whitespace().collect();
        if let Some(t) = toks.last().and_then(|s| s.strip_prefix("@t=")) {
            times.push(parse_f64(t, line)?);
            toks.pop();
        }
        let (kind_tok, rest) = toks.split_first().ok_or_else(|| err(line, "empty gate"))?;
        let n_params = match *kind_tok {
            "H" | "X" | "SX" | "ID" | "ECR" | "BARRIER" => 0,
            "RZ" | "P" | "CP" => 1,
            "U3" => 3,
            "U" => 8,
            other => return Err(err(line, format!("unknown gate '{other}'"))),
        };
        if rest.len() < n_params {
            return Err(err(line, "missing parameters"));
        }
        let (qtoks, ptoks) = rest.split_at(rest.len() - n_params);
        let qubits: Vec<usize> = qtoks
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| err(line, format!("bad qubit '{s}'"))))
            .collect::<Result<_, _>>()?;
        let p: Vec<f64> = ptoks.iter().map(|s| parse_f64(s, line)).collect::<Result<_, _>>()?;
        let kind = match *kind_tok {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "SX" => GateKind::SX,
            "ID" => GateKind::ID,
            "ECR" => GateKind::ECR,
            "BARRIER" => GateKind::Barrier,
            "RZ" => GateKind::RZ(p[0]),
            "P" => GateKind::Phase(p[0]),
            "CP" => GateKind::ControlledPhase(p[0]),
            "U3" => GateKind::U3 { theta: p[0], phi: p[1], lambda: p[2] },
            _ => GateKind::Unitary2x2([
                [C64::new(p[0], p[1]), C64::new(p[2], p[3])],
                [C64::new(p[4], p[5]), C64::new(p[6], p[7])],
            ]),
        };
        let gate = Gate::new(kind, qubits).map_err(|e| err(line, e.to_string()))?;
        c.push(gate).map_err(|e| err(line, e.to_string()))?;
    }
    let circuit = circuit.ok_or_else(|| err(0, "missing header"))?;
    let times = (!times.is_empty() && times.len() == circuit.len()).then_some(times);
    Ok((circuit, times))
}
