// SPDX-License-Identifier: Apache-2.0

//! Gate emission with per-scope structural hashing.

use std::collections::HashMap;

use crate::netlist::{Gate, GateKind, Netlist};

use super::cube::Cube;

#[derive(Default)]
struct Scope {
    next: usize,
    memo: HashMap<(GateKind, Vec<String>), String>,
}

/// Emits gates into a netlist. Each scope hashes its own gates; with
/// `shared` every request lands in one global scope instead.
pub(crate) struct Builder {
    pub nl: Netlist,
    shared: bool,
    prefix: String,
    scopes: HashMap<String, Scope>,
}

impl Builder {
    pub fn new(nl: Netlist, shared: bool, prefix: &str) -> Self {
        Builder {
            nl,
            shared,
            prefix: prefix.to_string(),
            scopes: HashMap::new(),
        }
    }

    pub fn gate(&mut self, scope: &str, kind: GateKind, mut ins: Vec<String>) -> String {
        match kind {
            GateKind::And | GateKind::Or => {
                ins.sort();
                ins.dedup();
                if ins.len() == 1 {
                    return ins.pop().unwrap();
                }
            }
            GateKind::Nand | GateKind::Nor | GateKind::Xor | GateKind::Xnor => ins.sort(),
            GateKind::Not | GateKind::Buf | GateKind::Mux => {}
        }
        let key = if self.shared {
            format!("{}g", self.prefix)
        } else {
            scope.to_string()
        };
        let s = self.scopes.entry(key.clone()).or_default();
        if let Some(n) = s.memo.get(&(kind, ins.clone())) {
            return n.clone();
        }
        s.next += 1;
        let name = format!("{key}_n{:04}", s.next);
        s.memo.insert((kind, ins.clone()), name.clone());
        self.nl.gates.push(Gate {
            name: name.clone(),
            kind,
            out: name.clone(),
            ins,
        });
        name
    }

    /// A gate with a fixed output net name, outside any hashing scope.
    pub fn named(&mut self, name: &str, kind: GateKind, ins: Vec<String>, out: &str) {
        self.nl.gates.push(Gate {
            name: name.to_string(),
            kind,
            out: out.to_string(),
            ins,
        });
    }

    pub fn konst(&mut self, v: bool) -> String {
        let n = format!("{}const{}", self.prefix, u8::from(v));
        self.nl.constants.insert(n.clone(), v);
        n
    }

    pub fn not(&mut self, scope: &str, n: &str) -> String {
        self.gate(scope, GateKind::Not, vec![n.to_string()])
    }

    pub fn lit(&mut self, scope: &str, n: &str, pol: bool) -> String {
        if pol {
            n.to_string()
        } else {
            self.not(scope, n)
        }
    }

    pub fn and(&mut self, scope: &str, nets: Vec<String>) -> String {
        match nets.len() {
            0 => self.konst(true),
            1 => nets.into_iter().next().unwrap(),
            _ => self.gate(scope, GateKind::And, nets),
        }
    }

    pub fn or(&mut self, scope: &str, nets: Vec<String>) -> String {
        match nets.len() {
            0 => self.konst(false),
            1 => nets.into_iter().next().unwrap(),
            _ => self.gate(scope, GateKind::Or, nets),
        }
    }

    pub fn xor(&mut self, scope: &str, nets: Vec<String>) -> String {
        self.gate(scope, GateKind::Xor, nets)
    }

    pub fn mux(&mut self, scope: &str, sel: &str, a: &str, b: &str) -> String {
        self.gate(
            scope,
            GateKind::Mux,
            vec![sel.to_string(), a.to_string(), b.to_string()],
        )
    }

    /// Sum of products over literal cubes keyed by net name.
    pub fn sop(&mut self, scope: &str, terms: &[Cube]) -> String {
        if terms.iter().any(|t| t.is_empty()) {
            return self.konst(true);
        }
        let mut ors = Vec::with_capacity(terms.len());
        for t in terms {
            let lits: Vec<String> = t.iter().map(|(n, &p)| self.lit(scope, n, p)).collect();
            ors.push(self.and(scope, lits));
        }
        self.or(scope, ors)
    }
}
