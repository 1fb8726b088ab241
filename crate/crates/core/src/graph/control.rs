// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap};

use crate::netlist::{Driver, GateKind, NetId, Netlist, NetlistIndex};

use super::GraphError;

/// Largest number of free cone inputs the exhaustive influence check enumerates.
pub const FUNCTIONAL_INPUT_LIMIT: usize = 10;

/// MUX select nets and FF enable nets.
pub fn control_signals(nl: &Netlist) -> BTreeSet<String> {
    nl.gates
        .iter()
        .filter(|g| g.kind == GateKind::Mux)
        .map(|g| g.ins[0].clone())
        .chain(nl.ffs.iter().filter_map(|f| f.en.clone()))
        .collect()
}

/// True iff Q of `src` lies in the combinational fan-in of `dst`.
pub fn influences(nl: &Netlist, src: &str, dst: &str) -> Result<bool, GraphError> {
    let idx = NetlistIndex::new(nl);
    let (fi, d) = resolve(&idx, src, dst)?;
    Ok(idx.comb_fanin_ffs(d).contains(&fi))
}

/// Whether toggling Q of `src` changes `dst` under some assignment of the
/// other cone inputs. `None` when the cone has more than
/// [`FUNCTIONAL_INPUT_LIMIT`] free inputs.
pub fn influences_functional(
    nl: &Netlist,
    src: &str,
    dst: &str,
) -> Result<Option<bool>, GraphError> {
    let idx = NetlistIndex::new(nl);
    let (fi, d) = resolve(&idx, src, dst)?;
    Ok(sensitive(&idx, fi, d, FUNCTIONAL_INPUT_LIMIT))
}

fn resolve(idx: &NetlistIndex<'_>, src: &str, dst: &str) -> Result<(usize, NetId), GraphError> {
    let fi = idx
        .ff_index(src)
        .ok_or_else(|| GraphError::UnknownFf(src.to_string()))?;
    let d = idx
        .id(dst)
        .ok_or_else(|| GraphError::UnknownNet(dst.to_string()))?;
    Ok((fi, d))
}

pub(crate) fn sensitive(
    idx: &NetlistIndex<'_>,
    fi: usize,
    dst: NetId,
    limit: usize,
) -> Option<bool> {
    let q = idx.ff_q[fi];
    let leaves = idx.comb_cone_leaves(dst);
    if !leaves.contains(&q) {
        return Some(false);
    }
    let free: Vec<NetId> = leaves
        .into_iter()
        .filter(|&l| l != q && !matches!(idx.driver[l], Driver::Const(_)))
        .collect();
    if free.len() > limit {
        return None;
    }
    let mut assign: HashMap<NetId, bool> = HashMap::new();
    let mut memo = HashMap::new();
    for m in 0u32..1 << free.len() {
        for (k, &l) in free.iter().enumerate() {
            assign.insert(l, m >> k & 1 == 1);
        }
        let mut out = [false; 2];
        for (v, o) in out.iter_mut().enumerate() {
            assign.insert(q, v == 1);
            memo.clear();
            *o = eval_net(idx, dst, &assign, &mut memo);
        }
        if out[0] != out[1] {
            return Some(true);
        }
    }
    Some(false)
}

fn eval_net(
    idx: &NetlistIndex<'_>,
    net: NetId,
    assign: &HashMap<NetId, bool>,
    memo: &mut HashMap<NetId, bool>,
) -> bool {
    if let Some(&v) = memo.get(&net) {
        return v;
    }
    let v = match idx.driver[net] {
        Driver::Const(c) => c,
        Driver::Input | Driver::Ff(_) => assign[&net],
        Driver::Gate(gi) => {
            let ins: Vec<bool> = idx.gate_ins[gi]
                .iter()
                .map(|&i| eval_net(idx, i, assign, memo))
                .collect();
            idx.gate_kind(gi).eval(&ins)
        }
    };
    memo.insert(net, v);
    v
}

/// Control signals with the FFs in their combinational fan-in.
#[derive(Debug, Clone)]
pub struct ControlInfo {
    pub signals: Vec<String>,
    ids: Vec<NetId>,
    /// FF indices (netlist order) structurally reaching each signal.
    pub fanin: Vec<BTreeSet<usize>>,
}

impl ControlInfo {
    pub fn new(idx: &NetlistIndex<'_>) -> Self {
        let signals: Vec<String> = control_signals(idx.nl).into_iter().collect();
        let ids: Vec<NetId> = signals
            .iter()
            .map(|s| idx.id(s).expect("control signal is a driven net"))
            .collect();
        let fanin = ids
            .iter()
            .map(|&i| idx.comb_fanin_ffs(i).into_iter().collect())
            .collect();
        ControlInfo {
            signals,
            ids,
            fanin,
        }
    }

    /// Number of control signals whose fan-in contains FF `fi`.
    pub fn influenced_by(&self, fi: usize) -> usize {
        self.fanin.iter().filter(|s| s.contains(&fi)).count()
    }

    /// Functional variant; `None` entries fell back to the structural answer.
    pub fn influences_any_functional(&self, idx: &NetlistIndex<'_>, fi: usize) -> (bool, bool) {
        let mut fell_back = false;
        for (k, &id) in self.ids.iter().enumerate() {
            if !self.fanin[k].contains(&fi) {
                continue;
            }
            match sensitive(idx, fi, id, FUNCTIONAL_INPUT_LIMIT) {
                Some(true) => return (true, fell_back),
                Some(false) => {}
                None => {
                    fell_back = true;
                    return (true, fell_back);
                }
            }
        }
        (false, fell_back)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    const MUX_DESIGN: &str = "input clk\ninput a\ninput b\n\
        gate MUX m y q a b\ngate NOT n d q\n\
        dff f q=q d=d clk=clk\ndff g q=r d=y clk=clk en=a\n";

    #[test]
    fn selects_and_enables() {
        let nl = parse(MUX_DESIGN).unwrap();
        let c: Vec<String> = control_signals(&nl).into_iter().collect();
        assert_eq!(c, ["a", "q"]);
        let plain = parse("input clk\ninput a\ndff f q=q d=a clk=clk\n").unwrap();
        assert!(control_signals(&plain).is_empty());
    }

    #[test]
    fn structural_and_functional_influence() {
        let nl = parse(MUX_DESIGN).unwrap();
        assert_eq!(influences(&nl, "f", "q"), Ok(true));
        assert_eq!(influences(&nl, "f", "y"), Ok(true));
        assert_eq!(influences(&nl, "g", "y"), Ok(false));
        assert_eq!(influences_functional(&nl, "f", "y"), Ok(Some(true)));
        let masked = parse(
            "input clk\ninput a\ngate NOT n nq q\ngate AND x y q nq\ndff f q=q d=a clk=clk\n",
        )
        .unwrap();
        assert_eq!(influences(&masked, "f", "y"), Ok(true));
        assert_eq!(influences_functional(&masked, "f", "y"), Ok(Some(false)));
    }
}
