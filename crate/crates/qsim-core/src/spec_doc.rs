//! Machine-spec documents: the JSON interchange format for ε-machines.
//!
//! A document lists the alphabet, the causal states, and the transitions
//! `{from, symbol, to, prob}`. Probabilities are written as decimal strings
//! so that emit → parse round-trips reproduce the machine exactly; plain
//! JSON numbers are accepted on input for convenience.
//!
//! ```json
//! {
//!   "name": "upset-gambler(p=0.7, q=0.8)",
//!   "alphabet": ["0", "1"],
//!   "states": ["s_A", "s_B"],
//!   "transitions": [
//!     { "from": "s_A", "symbol": "0", "to": "s_B", "prob": "0.7" },
//!     { "from": "s_A", "symbol": "1", "to": "s_A", "prob": "0.3" },
//!     { "from": "s_B", "symbol": "0", "to": "s_A", "prob": "0.8" },
//!     { "from": "s_B", "symbol": "1", "to": "s_A", "prob": "0.2" }
//!   ]
//! }
//! ```

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QsimError, Result};
use crate::machine::EpsilonMachine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpecDocument {
    pub name: String,
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub symbol: String,
    pub to: String,
    #[serde(
        serialize_with = "serialize_prob",
        deserialize_with = "deserialize_prob"
    )]
    pub prob: f64,
}

/// Emit the probability as a decimal string with the shortest representation
/// that parses back to the identical `f64`.
fn serialize_prob<S: Serializer>(p: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&format!("{p}"))
}

fn deserialize_prob<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(f64),
    }
    match Raw::deserialize(de)? {
        Raw::Text(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| serde::de::Error::custom(format!("invalid probability `{s}`"))),
        Raw::Number(v) => Ok(v),
    }
}

/// Parse a machine-spec document into a validated-shape [`EpsilonMachine`].
///
/// Errors on schema violations, duplicate labels, transitions referencing
/// unknown states or symbols, probabilities outside `(0, 1]`, and duplicate
/// `(from, symbol)` pairs (unifilarity violations).
pub fn parse_machine(text: &str) -> Result<EpsilonMachine> {
    let doc: MachineSpecDocument =
        serde_json::from_str(text).map_err(|e| QsimError::Parse(e.to_string()))?;
    machine_from_document(&doc)
}

pub fn machine_from_document(doc: &MachineSpecDocument) -> Result<EpsilonMachine> {
    let mut transitions = Vec::with_capacity(doc.transitions.len());
    let find = |list: &[String], label: &str, kind: &str, t: &TransitionRecord| {
        list.iter().position(|s| s == label).ok_or_else(|| {
            QsimError::Parse(format!(
                "transition ({} --{}--> {}) references unknown {kind} `{label}`",
                t.from, t.symbol, t.to
            ))
        })
    };
    for t in &doc.transitions {
        let from = find(&doc.states, &t.from, "state", t)?;
        let to = find(&doc.states, &t.to, "state", t)?;
        let symbol = find(&doc.alphabet, &t.symbol, "symbol", t)?;
        if !(t.prob > 0.0 && t.prob <= 1.0) || !t.prob.is_finite() {
            return Err(QsimError::Parse(format!(
                "transition ({} --{}--> {}) has probability {} outside (0, 1]",
                t.from, t.symbol, t.to, t.prob
            )));
        }
        transitions.push((from, symbol, to, t.prob));
    }
    EpsilonMachine::new(
        doc.name.clone(),
        doc.alphabet.clone(),
        doc.states.clone(),
        &transitions,
    )
}

/// Emit a machine back into document form. Transitions are listed in
/// (state, symbol) order over the declared label orders.
pub fn emit_machine(machine: &EpsilonMachine) -> MachineSpecDocument {
    let mut transitions = Vec::new();
    for i in 0..machine.n_states() {
        for x in 0..machine.n_symbols() {
            if let Some(j) = machine.successor(i, x) {
                transitions.push(TransitionRecord {
                    from: machine.states()[i].clone(),
                    symbol: machine.alphabet()[x].clone(),
                    to: machine.states()[j].clone(),
                    prob: machine.emit_prob(i, x),
                });
            }
        }
    }
    MachineSpecDocument {
        name: machine.name().to_string(),
        alphabet: machine.alphabet().to_vec(),
        states: machine.states().to_vec(),
        transitions,
    }
}

/// Serialize a document as pretty-printed JSON.
pub fn document_to_json(doc: &MachineSpecDocument) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const UG_JSON: &str = r#"{
        "name": "upset-gambler",
        "alphabet": ["0", "1"],
        "states": ["s_A", "s_B"],
        "transitions": [
            { "from": "s_A", "symbol": "0", "to": "s_B", "prob": "0.7" },
            { "from": "s_A", "symbol": "1", "to": "s_A", "prob": "0.3" },
            { "from": "s_B", "symbol": "0", "to": "s_A", "prob": "0.8" },
            { "from": "s_B", "symbol": "1", "to": "s_A", "prob": "0.2" }
        ]
    }"#;

    #[test]
    fn parses_upset_gambler_document() {
        let m = parse_machine(UG_JSON).unwrap();
        assert_eq!(m.n_states(), 2);
        assert_eq!(m.n_symbols(), 2);
        assert_eq!(m.successor(0, 0), Some(1));
        assert!((m.emit_prob(1, 0) - 0.8).abs() < 1e-15);
        assert!(m.validate(6).passed());
    }

    #[test]
    fn parses_degenerate_single_state_machine() {
        let m = parse_machine(
            r#"{
                "name": "unit",
                "alphabet": ["0"],
                "states": ["s"],
                "transitions": [{ "from": "s", "symbol": "0", "to": "s", "prob": "1" }]
            }"#,
        )
        .unwrap();
        assert_eq!(m.n_states(), 1);
        assert!(m.validate(2).passed());
    }

    #[test]
    fn rejects_unifilarity_violation() {
        let err = parse_machine(
            r#"{
                "name": "bad",
                "alphabet": ["0", "1"],
                "states": ["s_A", "s_B"],
                "transitions": [
                    { "from": "s_A", "symbol": "0", "to": "s_A", "prob": "0.5" },
                    { "from": "s_A", "symbol": "0", "to": "s_B", "prob": "0.5" }
                ]
            }"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unifilarity violation"));
    }

    #[test]
    fn rejects_unknown_references_and_bad_probabilities() {
        let err = parse_machine(
            r#"{"name":"x","alphabet":["0"],"states":["s"],
                "transitions":[{"from":"s","symbol":"0","to":"t","prob":"1"}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown state `t`"));

        let err = parse_machine(
            r#"{"name":"x","alphabet":["0"],"states":["s"],
                "transitions":[{"from":"s","symbol":"0","to":"s","prob":"1.5"}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("outside (0, 1]"));

        assert!(parse_machine("not json").is_err());
    }

    #[test]
    fn accepts_numeric_probabilities() {
        let m = parse_machine(
            r#"{"name":"x","alphabet":["0","1"],"states":["s"],
                "transitions":[
                    {"from":"s","symbol":"0","to":"s","prob":0.25},
                    {"from":"s","symbol":"1","to":"s","prob":0.75}
                ]}"#,
        )
        .unwrap();
        assert!((m.emit_prob(0, 0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = EpsilonMachine::upset_gambler(0.7, 0.8).unwrap();
        let doc = emit_machine(&m);
        let text = document_to_json(&doc);
        let back = parse_machine(&text).unwrap();
        assert_eq!(m, back);

        // Probabilities with no short decimal representation survive too.
        let odd = EpsilonMachine::upset_gambler(1.0 / 3.0, 2.0 / 7.0).unwrap();
        let back = parse_machine(&document_to_json(&emit_machine(&odd))).unwrap();
        assert_eq!(odd, back);
    }
}
