// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::{GateKind, Netlist};

pub type NetId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input,
    Const(bool),
    Gate(usize),
    Ff(usize),
}

/// Integer-indexed view of a validated netlist.
///
/// Gate and FF indices refer to positions in the borrowed [`Netlist`].
#[derive(Debug)]
pub struct NetlistIndex<'a> {
    pub nl: &'a Netlist,
    pub nets: Vec<&'a str>,
    ids: HashMap<&'a str, NetId>,
    pub driver: Vec<Driver>,
    pub gate_ins: Vec<Vec<NetId>>,
    pub gate_out: Vec<NetId>,
    pub ff_q: Vec<NetId>,
    pub ff_d: Vec<NetId>,
    pub ff_en: Vec<Option<NetId>>,
    ff_ids: HashMap<&'a str, usize>,
}

impl<'a> NetlistIndex<'a> {
    /// Builds the index. The netlist is assumed to satisfy [`Netlist::validate`].
    pub fn new(nl: &'a Netlist) -> Self {
        let mut nets: Vec<&'a str> = Vec::new();
        let mut ids: HashMap<&'a str, NetId> = HashMap::new();
        let mut driver: Vec<Driver> = Vec::new();
        let mut add = |net: &'a str, d: Driver, nets: &mut Vec<&'a str>| {
            let id = nets.len();
            nets.push(net);
            ids.insert(net, id);
            driver.push(d);
        };
        for i in &nl.inputs {
            add(i, Driver::Input, &mut nets);
        }
        for (c, v) in &nl.constants {
            add(c, Driver::Const(*v), &mut nets);
        }
        for (gi, g) in nl.gates.iter().enumerate() {
            add(&g.out, Driver::Gate(gi), &mut nets);
        }
        for (fi, f) in nl.ffs.iter().enumerate() {
            add(&f.q, Driver::Ff(fi), &mut nets);
        }
        let id = |n: &str| ids[n];
        let gate_ins = nl
            .gates
            .iter()
            .map(|g| g.ins.iter().map(|n| id(n)).collect())
            .collect();
        let gate_out = nl.gates.iter().map(|g| id(&g.out)).collect();
        let ff_q = nl.ffs.iter().map(|f| id(&f.q)).collect();
        let ff_d = nl.ffs.iter().map(|f| id(&f.d)).collect();
        let ff_en = nl.ffs.iter().map(|f| f.en.as_deref().map(id)).collect();
        let ff_ids = nl
            .ffs
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.as_str(), i))
            .collect();
        NetlistIndex {
            nl,
            nets,
            ids,
            driver,
            gate_ins,
            gate_out,
            ff_q,
            ff_d,
            ff_en,
            ff_ids,
        }
    }

    pub fn net_count(&self) -> usize {
        self.nets.len()
    }

    pub fn id(&self, net: &str) -> Option<NetId> {
        self.ids.get(net).copied()
    }

    pub fn name(&self, id: NetId) -> &'a str {
        self.nets[id]
    }

    pub fn ff_index(&self, name: &str) -> Option<usize> {
        self.ff_ids.get(name).copied()
    }

    pub fn gate_kind(&self, gi: usize) -> GateKind {
        self.nl.gates[gi].kind
    }

    /// Follows BUF chains back to the first non-BUF driver.
    pub fn skip_bufs(&self, mut net: NetId) -> NetId {
        while let Driver::Gate(gi) = self.driver[net] {
            if self.nl.gates[gi].kind != GateKind::Buf {
                break;
            }
            net = self.gate_ins[gi][0];
        }
        net
    }

    /// FF indices whose Q reaches `root` through gates only. `root` itself
    /// counts when it is an FF output.
    pub fn comb_fanin_ffs(&self, root: NetId) -> Vec<usize> {
        let mut seen = vec![false; self.nets.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        seen[root] = true;
        while let Some(n) = stack.pop() {
            match self.driver[n] {
                Driver::Ff(fi) => out.push(fi),
                Driver::Gate(gi) => {
                    for &i in &self.gate_ins[gi] {
                        if !seen[i] {
                            seen[i] = true;
                            stack.push(i);
                        }
                    }
                }
                Driver::Input | Driver::Const(_) => {}
            }
        }
        out.sort_unstable();
        out
    }

    /// Gate indices in the combinational cone of `root` (stopping at FFs).
    pub fn comb_cone_gates(&self, root: NetId) -> Vec<usize> {
        let mut seen = vec![false; self.nets.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        seen[root] = true;
        while let Some(n) = stack.pop() {
            if let Driver::Gate(gi) = self.driver[n] {
                out.push(gi);
                for &i in &self.gate_ins[gi] {
                    if !seen[i] {
                        seen[i] = true;
                        stack.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Leaves (primary inputs, FF outputs, constants) of the cone of `root`.
    pub fn comb_cone_leaves(&self, root: NetId) -> Vec<NetId> {
        let mut seen = vec![false; self.nets.len()];
        let mut stack = vec![root];
        let mut out = Vec::new();
        seen[root] = true;
        while let Some(n) = stack.pop() {
            match self.driver[n] {
                Driver::Gate(gi) => {
                    for &i in &self.gate_ins[gi] {
                        if !seen[i] {
                            seen[i] = true;
                            stack.push(i);
                        }
                    }
                }
                _ => out.push(n),
            }
        }
        out.sort_unstable();
        out
    }
}
