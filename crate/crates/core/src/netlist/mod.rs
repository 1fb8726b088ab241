// SPDX-License-Identifier: Apache-2.0

//! Gate-level netlist model.
//!
//! A [`Netlist`] holds primary inputs and outputs, constant nets, combinational
//! gates and D flip-flops. Every net has exactly one driver. The textual form
//! is handled by [`parse`] / [`Netlist::to_text`], evaluation by [`sim`].

mod index;
mod parse;
pub mod sim;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

pub use index::{Driver, NetId, NetlistIndex};
pub use parse::parse;
pub use sim::{eval_comb, step, BitState, Simulator};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("net `{net}` has multiple drivers")]
    MultipleDrivers { net: String },
    #[error("net `{net}` is used but never driven")]
    Undriven { net: String },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String },
    #[error("duplicate output `{net}`")]
    DuplicateOutput { net: String },
    #[error("gate `{gate}` of kind {kind} has {got} inputs")]
    Arity {
        gate: String,
        kind: GateKind,
        got: usize,
    },
    #[error("invalid identifier `{0}`")]
    BadIdentifier(String),
    #[error("combinational cycle through gates {gates:?}")]
    CombinationalCycle { gates: Vec<String> },
    #[error("no value assigned to net `{net}`")]
    MissingAssignment { net: String },
    #[error("unknown flip-flop `{0}`")]
    UnknownFf(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
}

/// Combinational cell alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    Not,
    Buf,
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    /// Inputs are `(select, a, b)`; output is `a` when select is 0, `b` otherwise.
    Mux,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::Not,
        GateKind::Buf,
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Mux,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Mux => "MUX",
        }
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => n == 1,
            GateKind::Mux => n == 3,
            _ => n >= 2,
        }
    }

    pub fn eval(self, ins: &[bool]) -> bool {
        match self {
            GateKind::Not => !ins[0],
            GateKind::Buf => ins[0],
            GateKind::And => ins.iter().all(|&b| b),
            GateKind::Or => ins.iter().any(|&b| b),
            GateKind::Nand => !ins.iter().all(|&b| b),
            GateKind::Nor => !ins.iter().any(|&b| b),
            GateKind::Xor => ins.iter().fold(false, |acc, &b| acc ^ b),
            GateKind::Xnor => !ins.iter().fold(false, |acc, &b| acc ^ b),
            GateKind::Mux => {
                if ins[0] {
                    ins[2]
                } else {
                    ins[1]
                }
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown gate kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub out: String,
    pub ins: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlipFlop {
    pub name: String,
    pub q: String,
    pub d: String,
    pub clk: String,
    pub rst: Option<String>,
    pub rst_val: bool,
    pub en: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Netlist {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub constants: BTreeMap<String, bool>,
    pub gates: Vec<Gate>,
    pub ffs: Vec<FlipFlop>,
}

/// Identifier grammar shared by nets and instance names.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

impl Netlist {
    pub fn new(name: impl Into<String>) -> Self {
        Netlist {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Checks the single-driver, driven-use, arity and uniqueness invariants.
    pub fn validate(&self) -> Result<(), NetlistError> {
        if !is_identifier(&self.name) {
            return Err(NetlistError::BadIdentifier(self.name.clone()));
        }
        let mut drivers: HashSet<&str> = HashSet::new();
        let mut driven: Vec<&str> = Vec::new();
        driven.extend(self.inputs.iter().map(String::as_str));
        driven.extend(self.constants.keys().map(String::as_str));
        driven.extend(self.gates.iter().map(|g| g.out.as_str()));
        driven.extend(self.ffs.iter().map(|f| f.q.as_str()));
        for net in driven {
            if !is_identifier(net) {
                return Err(NetlistError::BadIdentifier(net.to_string()));
            }
            if !drivers.insert(net) {
                return Err(NetlistError::MultipleDrivers {
                    net: net.to_string(),
                });
            }
        }

        let mut names: HashSet<&str> = HashSet::new();
        for name in self
            .gates
            .iter()
            .map(|g| g.name.as_str())
            .chain(self.ffs.iter().map(|f| f.name.as_str()))
        {
            if !is_identifier(name) {
                return Err(NetlistError::BadIdentifier(name.to_string()));
            }
            if !names.insert(name) {
                return Err(NetlistError::DuplicateName {
                    name: name.to_string(),
                });
            }
        }

        let check_driven = |net: &str| -> Result<(), NetlistError> {
            if drivers.contains(net) {
                Ok(())
            } else {
                Err(NetlistError::Undriven {
                    net: net.to_string(),
                })
            }
        };
        for g in &self.gates {
            if !g.kind.arity_ok(g.ins.len()) {
                return Err(NetlistError::Arity {
                    gate: g.name.clone(),
                    kind: g.kind,
                    got: g.ins.len(),
                });
            }
            for i in &g.ins {
                check_driven(i)?;
            }
        }
        for f in &self.ffs {
            check_driven(&f.d)?;
            check_driven(&f.clk)?;
            if let Some(r) = &f.rst {
                check_driven(r)?;
            }
            if let Some(e) = &f.en {
                check_driven(e)?;
            }
        }
        let mut outs: HashSet<&str> = HashSet::new();
        for o in &self.outputs {
            check_driven(o)?;
            if !outs.insert(o) {
                return Err(NetlistError::DuplicateOutput { net: o.clone() });
            }
        }
        Ok(())
    }

    /// Returns the netlist with every block sorted into canonical order.
    pub fn canonical(&self) -> Netlist {
        let mut nl = self.clone();
        nl.inputs.sort();
        nl.outputs.sort();
        nl.gates.sort_by(|a, b| a.name.cmp(&b.name));
        nl.ffs.sort_by(|a, b| a.name.cmp(&b.name));
        nl
    }

    pub fn ff(&self, name: &str) -> Option<&FlipFlop> {
        self.ffs.iter().find(|f| f.name == name)
    }

    pub fn ff_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.ffs.iter().map(|f| f.name.clone()).collect();
        v.sort();
        v
    }

    /// All nets with a driver.
    pub fn driven_nets(&self) -> HashSet<&str> {
        let mut s: HashSet<&str> = HashSet::new();
        s.extend(self.inputs.iter().map(String::as_str));
        s.extend(self.constants.keys().map(String::as_str));
        s.extend(self.gates.iter().map(|g| g.out.as_str()));
        s.extend(self.ffs.iter().map(|f| f.q.as_str()));
        s
    }

    /// Every gate and FF instance name.
    pub fn instance_names(&self) -> HashSet<&str> {
        self.gates
            .iter()
            .map(|g| g.name.as_str())
            .chain(self.ffs.iter().map(|f| f.name.as_str()))
            .collect()
    }

    /// Number of gates per kind, for reports.
    pub fn gate_histogram(&self) -> BTreeMap<GateKind, usize> {
        let mut h = BTreeMap::new();
        for g in &self.gates {
            *h.entry(g.kind).or_insert(0) += 1;
        }
        h
    }

    /// Removes gates whose outputs are unused, restricted to `candidates`.
    /// Iterates until no candidate gate becomes newly dead.
    pub(crate) fn sweep_dead_gates(&mut self, candidates: &HashSet<String>) {
        loop {
            let mut used: HashMap<&str, usize> = HashMap::new();
            for g in &self.gates {
                for i in &g.ins {
                    *used.entry(i.as_str()).or_insert(0) += 1;
                }
            }
            for f in &self.ffs {
                for n in [Some(&f.d), Some(&f.clk), f.rst.as_ref(), f.en.as_ref()]
                    .into_iter()
                    .flatten()
                {
                    *used.entry(n.as_str()).or_insert(0) += 1;
                }
            }
            for o in &self.outputs {
                *used.entry(o.as_str()).or_insert(0) += 1;
            }
            let dead: HashSet<String> = self
                .gates
                .iter()
                .filter(|g| candidates.contains(&g.name) && !used.contains_key(g.out.as_str()))
                .map(|g| g.name.clone())
                .collect();
            if dead.is_empty() {
                return;
            }
            self.gates.retain(|g| !dead.contains(&g.name));
        }
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_truth_tables() {
        assert!(GateKind::And.eval(&[true, true]));
        assert!(!GateKind::And.eval(&[true, false]));
        assert!(!GateKind::Xor.eval(&[true, true]));
        assert!(GateKind::Xnor.eval(&[true, true]));
        assert!(GateKind::Nor.eval(&[false, false]));
        assert!(!GateKind::Nand.eval(&[true, true, true]));
        assert!(GateKind::Mux.eval(&[true, false, true]));
        assert!(!GateKind::Mux.eval(&[false, false, true]));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("c[3]"));
        assert!(is_identifier("_a.b"));
        assert!(!is_identifier("3a"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }

    #[test]
    fn undriven_gate_input_rejected() {
        let mut nl = Netlist::new("t");
        nl.inputs.push("a".into());
        nl.gates.push(Gate {
            name: "g".into(),
            kind: GateKind::And,
            out: "y".into(),
            ins: vec!["a".into(), "b".into()],
        });
        assert_eq!(
            nl.validate(),
            Err(NetlistError::Undriven { net: "b".into() })
        );
    }

    #[test]
    fn arity_rejected() {
        let mut nl = Netlist::new("t");
        nl.inputs.push("a".into());
        nl.gates.push(Gate {
            name: "g".into(),
            kind: GateKind::And,
            out: "y".into(),
            ins: vec!["a".into()],
        });
        assert!(matches!(nl.validate(), Err(NetlistError::Arity { .. })));
    }
}
