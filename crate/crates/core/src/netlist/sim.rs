// SPDX-License-Identifier: Apache-2.0

//! Deterministic two-valued simulation.

use std::collections::{BTreeMap, VecDeque};

use super::{Driver, Netlist, NetlistError, NetlistIndex};

/// Assignment of a bit to every flip-flop of one netlist, keyed by FF name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BitState(pub BTreeMap<String, bool>);

impl BitState {
    pub fn zeros(nl: &Netlist) -> Self {
        BitState(nl.ffs.iter().map(|f| (f.name.clone(), false)).collect())
    }

    /// Reset values for resettable FFs, zero for the rest.
    pub fn reset(nl: &Netlist) -> Self {
        BitState(
            nl.ffs
                .iter()
                .map(|f| (f.name.clone(), f.rst.is_some() && f.rst_val))
                .collect(),
        )
    }

    pub fn get(&self, ff: &str) -> Option<bool> {
        self.0.get(ff).copied()
    }

    pub fn set(&mut self, ff: &str, v: bool) {
        self.0.insert(ff.to_string(), v);
    }

    /// Values in `nl.ffs` order.
    pub fn to_vec(&self, nl: &Netlist) -> Result<Vec<bool>, NetlistError> {
        if let Some(extra) = self.0.keys().find(|k| nl.ff(k).is_none()) {
            return Err(NetlistError::UnknownFf(extra.clone()));
        }
        nl.ffs
            .iter()
            .map(|f| {
                self.get(&f.name)
                    .ok_or_else(|| NetlistError::MissingAssignment {
                        net: f.name.clone(),
                    })
            })
            .collect()
    }

    pub fn from_vec(nl: &Netlist, v: &[bool]) -> Self {
        BitState(
            nl.ffs
                .iter()
                .zip(v)
                .map(|(f, &b)| (f.name.clone(), b))
                .collect(),
        )
    }
}

/// A netlist compiled for repeated evaluation: gates in topological order.
#[derive(Debug)]
pub struct Simulator<'a> {
    idx: NetlistIndex<'a>,
    order: Vec<usize>,
    scratch_ins: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(nl: &'a Netlist) -> Result<Self, NetlistError> {
        let idx = NetlistIndex::new(nl);
        let ng = nl.gates.len();
        let mut indeg = vec![0usize; ng];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); ng];
        for (gi, ins) in idx.gate_ins.iter().enumerate() {
            for &i in ins {
                if let Driver::Gate(src) = idx.driver[i] {
                    indeg[gi] += 1;
                    users[src].push(gi);
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..ng).filter(|&g| indeg[g] == 0).collect();
        let mut order = Vec::with_capacity(ng);
        while let Some(g) = queue.pop_front() {
            order.push(g);
            for &u in &users[g] {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    queue.push_back(u);
                }
            }
        }
        if order.len() != ng {
            return Err(NetlistError::CombinationalCycle {
                gates: find_cycle(&idx, &indeg),
            });
        }
        let scratch_ins = nl.gates.iter().map(|g| g.ins.len()).max().unwrap_or(0);
        Ok(Simulator {
            idx,
            order,
            scratch_ins,
        })
    }

    pub fn index(&self) -> &NetlistIndex<'a> {
        &self.idx
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.idx.nl
    }

    /// A value vector with constants filled in and everything else at 0.
    pub fn blank(&self) -> Vec<bool> {
        self.idx
            .driver
            .iter()
            .map(|d| matches!(d, Driver::Const(true)))
            .collect()
    }

    /// Loads FF outputs from `ffs` (in `nl.ffs` order).
    pub fn load_state(&self, values: &mut [bool], ffs: &[bool]) {
        for (fi, &q) in self.idx.ff_q.iter().enumerate() {
            values[q] = ffs[fi];
        }
    }

    /// Evaluates every gate; inputs, FF outputs and constants must be set.
    pub fn eval(&self, values: &mut [bool]) {
        let mut buf = Vec::with_capacity(self.scratch_ins);
        for &gi in &self.order {
            buf.clear();
            buf.extend(self.idx.gate_ins[gi].iter().map(|&i| values[i]));
            values[self.idx.gate_out[gi]] = self.idx.gate_kind(gi).eval(&buf);
        }
    }

    /// Next FF values from evaluated `values` and current FF values.
    pub fn next_state(&self, values: &[bool], cur: &[bool], reset: bool) -> Vec<bool> {
        let nl = self.idx.nl;
        (0..nl.ffs.len())
            .map(|fi| {
                if reset && nl.ffs[fi].rst.is_some() {
                    nl.ffs[fi].rst_val
                } else if self.idx.ff_en[fi].is_some_and(|en| !values[en]) {
                    cur[fi]
                } else {
                    values[self.idx.ff_d[fi]]
                }
            })
            .collect()
    }

    /// One clock edge: inputs by PI position, FF values by FF position.
    pub fn step_vec(&self, pis: &[bool], cur: &[bool], reset: bool) -> Vec<bool> {
        let mut values = self.blank();
        for (k, &v) in pis.iter().enumerate() {
            values[k] = v;
        }
        self.load_state(&mut values, cur);
        self.eval(&mut values);
        self.next_state(&values, cur, reset)
    }
}

fn find_cycle(idx: &NetlistIndex<'_>, indeg: &[usize]) -> Vec<String> {
    let pending = |g: usize| indeg[g] > 0;
    let Some(start) = (0..indeg.len()).find(|&g| pending(g)) else {
        return Vec::new();
    };
    // Every pending gate has a pending predecessor; walk back until a repeat.
    let mut pos = vec![usize::MAX; indeg.len()];
    let mut path = Vec::new();
    let mut g = start;
    loop {
        if pos[g] != usize::MAX {
            let mut cyc: Vec<String> = path[pos[g]..]
                .iter()
                .map(|&x: &usize| idx.nl.gates[x].name.clone())
                .collect();
            cyc.sort();
            return cyc;
        }
        pos[g] = path.len();
        path.push(g);
        g = idx.gate_ins[g]
            .iter()
            .find_map(|&i| match idx.driver[i] {
                Driver::Gate(p) if pending(p) => Some(p),
                _ => None,
            })
            .expect("pending gate has a pending predecessor");
    }
}

/// Evaluates every net given values for all primary inputs and FF outputs.
pub fn eval_comb(
    nl: &Netlist,
    assignment: &BTreeMap<String, bool>,
) -> Result<BTreeMap<String, bool>, NetlistError> {
    let sim = Simulator::new(nl)?;
    let idx = sim.index();
    for k in assignment.keys() {
        match idx.id(k).map(|i| idx.driver[i]) {
            Some(Driver::Input) | Some(Driver::Ff(_)) => {}
            _ => return Err(NetlistError::UnknownNet(k.clone())),
        }
    }
    let mut values = sim.blank();
    for (id, d) in idx.driver.iter().enumerate() {
        if matches!(d, Driver::Input | Driver::Ff(_)) {
            values[id] =
                *assignment
                    .get(idx.name(id))
                    .ok_or_else(|| NetlistError::MissingAssignment {
                        net: idx.name(id).to_string(),
                    })?;
        }
    }
    sim.eval(&mut values);
    Ok(idx
        .nets
        .iter()
        .zip(values)
        .map(|(n, v)| (n.to_string(), v))
        .collect())
}

/// One synchronous clock edge.
///
/// With `reset_asserted`, FFs that have a reset take their reset value; FFs
/// whose enable evaluates to 0 hold; all others load D.
pub fn step(
    nl: &Netlist,
    state: &BitState,
    inputs: &BTreeMap<String, bool>,
    reset_asserted: bool,
) -> Result<BitState, NetlistError> {
    let sim = Simulator::new(nl)?;
    let cur = state.to_vec(nl)?;
    if let Some(extra) = inputs.keys().find(|k| !nl.inputs.contains(k)) {
        return Err(NetlistError::UnknownNet(extra.clone()));
    }
    let pis = nl
        .inputs
        .iter()
        .map(|i| {
            inputs
                .get(i)
                .copied()
                .ok_or_else(|| NetlistError::MissingAssignment { net: i.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let next = sim.step_vec(&pis, &cur, reset_asserted);
    Ok(BitState::from_vec(nl, &next))
}
