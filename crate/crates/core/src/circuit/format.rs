//! Line-oriented circuit text format.
//!
//! ```text
//! # comment to end of line
//! REGISTER <d> <n>              # required before any other statement
//! <GATE> <wire> [<wire>]        # H HDG X XDG Y Z ZDG S SDG CX CNOT CXDG CZ
//! P <wire> <theta>              # theta in radians: 0.39, pi/8, -3*pi/4
//! MEASURE <wire> [<wire> ...]
//! ```
//!
//! Two-wire gates list the control wire first. Keywords are
//! case-insensitive.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Circuit, Step};
use crate::error::{Error, Result};
use crate::gates::Gate;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses an angle: a float, or `[-][k*]pi[/m]`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let (numer, denom) = match body.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().ok().filter(|v| *v != 0.0)?),
        None => (body, 1.0),
    };
    let coeff = match numer.split_once('*') {
        Some((k, "pi")) => k.parse::<f64>().ok()?,
        None if numer == "pi" => 1.0,
        _ => return None,
    };
    Some(sign * coeff * PI / denom)
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected {what}, found `{tok}`")))
}

/// Parses the text format into a [`Circuit`].
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let keyword = tokens[0].to_ascii_uppercase();
        let args = &tokens[1..];

        if keyword == "REGISTER" {
            if circuit.is_some() {
                return Err(parse_err(line, "duplicate REGISTER"));
            }
            let [d, n] = args else {
                return Err(parse_err(line, "REGISTER takes <d> <n>"));
            };
            let d = parse_usize(d, line, "dimension")?;
            let n = parse_usize(n, line, "wire count")?;
            circuit = Some(Circuit::new(d, n).map_err(|e| parse_err(line, e.to_string()))?);
            continue;
        }

        let c = circuit
            .as_mut()
            .ok_or_else(|| parse_err(line, "REGISTER must come first"))?;
        let attach = |e: Error| parse_err(line, e.to_string());

        if keyword == "MEASURE" {
            let wires = args
                .iter()
                .map(|t| parse_usize(t, line, "wire"))
                .collect::<Result<Vec<_>>>()?;
            c.measure(&wires).map_err(attach)?;
            continue;
        }

        let (gate, wire_args) = if keyword == "P" {
            let [wire, theta] = args else {
                return Err(parse_err(line, "P takes <wire> <theta>"));
            };
            let theta = parse_angle(theta)
                .ok_or_else(|| parse_err(line, format!("bad angle `{theta}`")))?;
            (Gate::Phase(theta), std::slice::from_ref(wire))
        } else {
            let gate: Gate = keyword.parse().map_err(attach)?;
            (gate, args)
        };
        let wires = wire_args
            .iter()
            .map(|t| parse_usize(t, line, "wire"))
            .collect::<Result<Vec<_>>>()?;
        c.add(gate, &wires).map_err(attach)?;
    }
    circuit.ok_or_else(|| parse_err(0, "missing REGISTER"))
}

impl Circuit {
    /// Serializes to the text format. Fails on explicit-matrix gates, which
    /// have no mnemonic.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "REGISTER {} {}", self.d, self.n).expect("string write");
        for step in &self.steps {
            let wires = |ws: &[usize]| {
                ws.iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            match step {
                Step::Gate {
                    gate, wires: ws, ..
                } => {
                    let name = gate
                        .mnemonic()
                        .ok_or_else(|| Error::UnknownGate(gate.to_string()))?;
                    match gate {
                        Gate::Phase(theta) => writeln!(out, "{name} {} {theta:?}", wires(ws)),
                        _ => writeln!(out, "{name} {}", wires(ws)),
                    }
                    .expect("string write");
                }
                Step::Measure { wires: ws } => {
                    writeln!(out, "MEASURE {}", wires(ws)).expect("string write")
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_bell_with_phase_error() {
        let text = "\
# Bell pair with a pi/8 phase on |11>
REGISTER 2 2
H 0
cnot 0 1   # control first
P 1 pi/8
MEASURE 0 1
";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.steps().len(), 4);
        match &c.steps()[2] {
            Step::Gate {
                gate: Gate::Phase(t),
                wires,
                ..
            } => {
                assert!((t - PI / 8.0).abs() < 1e-15);
                assert_eq!(wires, &vec![1]);
            }
            other => panic!("unexpected step {other:?}"),
        }
    }

    #[test]
    fn angle_forms() {
        assert_eq!(parse_angle("0.5"), Some(0.5));
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("-pi/4"), Some(-PI / 4.0));
        assert_eq!(parse_angle("3*pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_circuit("REGISTER 2 2\nH 0\nFOO 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_circuit("H 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_circuit("REGISTER 2 2\nCX 0 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_circuit("# nothing\n").is_err());
        assert!(parse_circuit("REGISTER 3 2\nS 0\n").is_err());
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        let one = prop_oneof![
            Just(Gate::H),
            Just(Gate::Hdg),
            Just(Gate::X),
            Just(Gate::Xdg),
            Just(Gate::Z),
            Just(Gate::Zdg),
        ];
        let two = prop_oneof![Just(Gate::Cx), Just(Gate::Cxdg), Just(Gate::Cz)];
        (2usize..5, 2usize..5).prop_flat_map(move |(d, n)| {
            let step = prop_oneof![
                (one.clone(), 0..n).prop_map(|(g, w)| Some((g, vec![w]))),
                (two.clone(), 0..n, 1..n)
                    .prop_map(move |(g, a, off)| Some((g, vec![a, (a + off) % n]))),
                (-10.0f64..10.0, 0..n).prop_map(|(t, w)| Some((Gate::Phase(t), vec![w]))),
                Just(None),
            ];
            proptest::collection::vec(step, 0..12).prop_map(move |steps| {
                let mut c = Circuit::new(d, n).unwrap();
                for (i, step) in steps.into_iter().enumerate() {
                    match step {
                        None => {
                            c.measure(&[i % n]).unwrap();
                        }
                        Some((Gate::Phase(_), _)) if d != 2 => {}
                        Some((g, w)) => {
                            c.add(g, &w).unwrap();
                        }
                    }
                }
                c
            })
        })
    }

    proptest! {
        #[test]
        fn text_roundtrip(c in arb_circuit()) {
            let text = c.to_text().unwrap();
            prop_assert_eq!(parse_circuit(&text).unwrap(), c);
        }
    }
}
