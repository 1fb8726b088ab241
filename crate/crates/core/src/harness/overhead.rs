// SPDX-License-Identifier: Apache-2.0

//! Gate-equivalent area and logic-depth proxies.

use std::collections::HashMap;

use crate::netlist::{GateKind, Netlist, Simulator};

/// NOT/BUF 1, MUX 3, other gates 2 plus 1 per input beyond two.
pub fn gate_area(kind: GateKind, inputs: usize) -> u64 {
    match kind {
        GateKind::Not | GateKind::Buf => 1,
        GateKind::Mux => 3,
        _ => 2 + inputs.saturating_sub(2) as u64,
    }
}

pub const FF_AREA: u64 = 4;

pub fn area(nl: &Netlist) -> u64 {
    nl.gates
        .iter()
        .map(|g| gate_area(g.kind, g.ins.len()))
        .sum::<u64>()
        + FF_AREA * nl.ffs.len() as u64
}

/// Longest gate chain between sources (inputs, constants, FF outputs) and
/// any net. Netlists with a combinational cycle report 0.
pub fn depth(nl: &Netlist) -> u64 {
    if Simulator::new(nl).is_err() {
        return 0;
    }
    let order = topo_order(nl);
    let mut level: HashMap<&str, u64> = HashMap::new();
    let mut best = 0;
    for gi in order {
        let g = &nl.gates[gi];
        let l = 1 + g
            .ins
            .iter()
            .map(|i| level.get(i.as_str()).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        level.insert(&g.out, l);
        best = best.max(l);
    }
    best
}

fn topo_order(nl: &Netlist) -> Vec<usize> {
    let by_out: HashMap<&str, usize> = nl
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| (g.out.as_str(), i))
        .collect();
    let mut state = vec![0u8; nl.gates.len()];
    let mut order = Vec::with_capacity(nl.gates.len());
    for root in 0..nl.gates.len() {
        let mut stack = vec![(root, 0usize)];
        while let Some((g, k)) = stack.pop() {
            if k == 0 {
                if state[g] != 0 {
                    continue;
                }
                state[g] = 1;
            }
            match nl.gates[g].ins.get(k).and_then(|i| by_out.get(i.as_str())) {
                Some(&p) => {
                    stack.push((g, k + 1));
                    if state[p] == 0 {
                        stack.push((p, 0));
                    }
                }
                None if k < nl.gates[g].ins.len() => stack.push((g, k + 1)),
                None => {
                    state[g] = 2;
                    order.push(g);
                }
            }
        }
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverheadReport {
    pub area_before: u64,
    pub area_after: u64,
    pub depth_before: u64,
    pub depth_after: u64,
}

fn pct(before: u64, after: u64) -> f64 {
    if before == 0 {
        0.0
    } else {
        (after as f64 - before as f64) / before as f64 * 100.0
    }
}

impl OverheadReport {
    pub fn area_pct(&self) -> f64 {
        pct(self.area_before, self.area_after)
    }

    pub fn depth_pct(&self) -> f64 {
        pct(self.depth_before, self.depth_after)
    }

    pub fn to_csv(&self) -> String {
        format!(
            "area_before,area_after,area_pct,depth_before,depth_after,depth_pct\n{},{},{:.4},{},{},{:.4}\n",
            self.area_before,
            self.area_after,
            self.area_pct(),
            self.depth_before,
            self.depth_after,
            self.depth_pct()
        )
    }
}

pub fn overhead(before: &Netlist, after: &Netlist) -> OverheadReport {
    OverheadReport {
        area_before: area(before),
        area_after: area(after),
        depth_before: depth(before),
        depth_after: depth(after),
    }
}
