// SPDX-License-Identifier: Apache-2.0

//! FF-level dependency graphs, strongly connected components, feedback-path
//! strength, input cones and control-signal influence.

mod cone;
mod control;
mod scc;

use std::collections::{BTreeSet, HashMap};

use crate::netlist::{Netlist, NetlistIndex};

pub use cone::{cone_in, input_cone, ConeTree, NodeKind};
pub use control::{
    control_signals, influences, influences_functional, ControlInfo, FUNCTIONAL_INPUT_LIMIT,
};
pub use scc::{label_sccs, tarjan, tarjan_scc, EdgeFilter, SccLabel, SccReport};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown flip-flop `{0}`")]
    UnknownFf(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("flip-flop `{0}` has no high feedback path; a candidate set is needed to grade it")]
    MissingCandidates(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Combinational,
    ThroughFf,
}

/// Dependency graph over flip-flops.
///
/// `comb[a]` lists every `b` whose D input reaches Q of `a` through gates
/// only. `through[a]` lists every `b` reachable from `a` by a path of at
/// least two combinational edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfGraph {
    pub nodes: Vec<String>,
    ids: HashMap<String, usize>,
    pub comb: Vec<Vec<usize>>,
    pub through: Vec<Vec<usize>>,
}

impl FfGraph {
    pub fn build(nl: &Netlist) -> Self {
        Self::build_indexed(&NetlistIndex::new(nl))
    }

    pub fn build_indexed(idx: &NetlistIndex<'_>) -> Self {
        let nl = idx.nl;
        let mut order: Vec<usize> = (0..nl.ffs.len()).collect();
        order.sort_by(|&a, &b| nl.ffs[a].name.cmp(&nl.ffs[b].name));
        let mut pos = vec![0; nl.ffs.len()];
        for (p, &fi) in order.iter().enumerate() {
            pos[fi] = p;
        }
        let n = order.len();
        let mut comb = vec![Vec::new(); n];
        for (b, &fi) in order.iter().enumerate() {
            for src in idx.comb_fanin_ffs(idx.ff_d[fi]) {
                comb[pos[src]].push(b);
            }
        }
        for s in &mut comb {
            s.sort_unstable();
            s.dedup();
        }
        let nodes: Vec<String> = order.iter().map(|&fi| nl.ffs[fi].name.clone()).collect();
        Self::from_adjacency(nodes, comb)
    }

    /// Builds a graph from explicit combinational adjacency (node names must
    /// be sorted and unique).
    pub fn from_adjacency(nodes: Vec<String>, comb: Vec<Vec<usize>>) -> Self {
        let n = nodes.len();
        // reach[c]: nodes reachable from c in one or more steps.
        let reach: Vec<Vec<bool>> = (0..n)
            .map(|c| {
                let mut seen = vec![false; n];
                let mut stack: Vec<usize> = comb[c].clone();
                while let Some(x) = stack.pop() {
                    if !seen[x] {
                        seen[x] = true;
                        stack.extend(comb[x].iter().copied());
                    }
                }
                seen
            })
            .collect();
        let through = (0..n)
            .map(|a| {
                (0..n)
                    .filter(|&b| comb[a].iter().any(|&c| reach[c][b]))
                    .collect()
            })
            .collect();
        let ids = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        FfGraph {
            nodes,
            ids,
            comb,
            through,
        }
    }

    pub fn id(&self, ff: &str) -> Option<usize> {
        self.ids.get(ff).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize, kind: EdgeKind) -> bool {
        let list = match kind {
            EdgeKind::Combinational => &self.comb[a],
            EdgeKind::ThroughFf => &self.through[a],
        };
        list.binary_search(&b).is_ok()
    }

    pub fn edges(&self, kind: EdgeKind) -> Vec<(String, String)> {
        let list = match kind {
            EdgeKind::Combinational => &self.comb,
            EdgeKind::ThroughFf => &self.through,
        };
        list.iter()
            .enumerate()
            .flat_map(|(a, succ)| {
                succ.iter()
                    .map(move |&b| (self.nodes[a].clone(), self.nodes[b].clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeedbackClass {
    HighFP,
    MediumFP,
    LowFP,
    NoFP,
}

/// Strength of the strongest feedback path of `ff`.
pub fn classify_feedback(
    nl: &Netlist,
    ff: &str,
    candidates: Option<&BTreeSet<String>>,
) -> Result<FeedbackClass, GraphError> {
    classify_in(&FfGraph::build(nl), ff, candidates)
}

/// [`classify_feedback`] on a prebuilt graph.
pub fn classify_in(
    g: &FfGraph,
    ff: &str,
    candidates: Option<&BTreeSet<String>>,
) -> Result<FeedbackClass, GraphError> {
    let a = g
        .id(ff)
        .ok_or_else(|| GraphError::UnknownFf(ff.to_string()))?;
    if g.has_edge(a, a, EdgeKind::Combinational) {
        return Ok(FeedbackClass::HighFP);
    }
    let cands = candidates.ok_or_else(|| GraphError::MissingCandidates(ff.to_string()))?;
    let returns = |allowed: &dyn Fn(usize) -> bool| {
        let mut seen = vec![false; g.nodes.len()];
        let mut stack: Vec<usize> = g.comb[a].iter().copied().filter(|&x| allowed(x)).collect();
        while let Some(x) = stack.pop() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            for &y in &g.comb[x] {
                if y == a {
                    return true;
                }
                if allowed(y) {
                    stack.push(y);
                }
            }
        }
        false
    };
    if returns(&|x| x != a && cands.contains(&g.nodes[x])) {
        Ok(FeedbackClass::MediumFP)
    } else if returns(&|x| x != a) {
        Ok(FeedbackClass::LowFP)
    } else {
        Ok(FeedbackClass::NoFP)
    }
}

/// True when `ff` lies on any feedback path.
pub fn on_feedback_path(g: &FfGraph, a: usize) -> bool {
    g.has_edge(a, a, EdgeKind::Combinational) || g.has_edge(a, a, EdgeKind::ThroughFf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    #[test]
    fn self_edge_on_inverter_loop() {
        let nl = parse("input clk\ngate NOT g d q\ndff f q=q d=d clk=clk\n").unwrap();
        let g = FfGraph::build(&nl);
        assert_eq!(
            g.edges(EdgeKind::Combinational),
            vec![("f".into(), "f".into())]
        );
        assert_eq!(classify_feedback(&nl, "f", None), Ok(FeedbackClass::HighFP));
    }

    #[test]
    fn ring_of_three() {
        let nl = parse(
            "input clk\ngate BUF g1 d1 q3\ngate NOT g2 d2 q1\ngate BUF g3 d3 q2\n\
             dff f1 q=q1 d=d1 clk=clk\ndff f2 q=q2 d=d2 clk=clk\ndff f3 q=q3 d=d3 clk=clk\n",
        )
        .unwrap();
        let g = FfGraph::build(&nl);
        assert_eq!(g.comb, vec![vec![1], vec![2], vec![0]]);
        assert!(g.has_edge(0, 0, EdgeKind::ThroughFf));
        assert_eq!(
            classify_feedback(&nl, "f1", None),
            Err(GraphError::MissingCandidates("f1".into()))
        );
        let some: BTreeSet<String> = ["f2".to_string()].into();
        let all: BTreeSet<String> = ["f2".to_string(), "f3".to_string()].into();
        assert_eq!(
            classify_feedback(&nl, "f1", Some(&some)),
            Ok(FeedbackClass::LowFP)
        );
        assert_eq!(
            classify_feedback(&nl, "f1", Some(&all)),
            Ok(FeedbackClass::MediumFP)
        );
    }

    #[test]
    fn no_feedback() {
        let nl = parse("input clk\ninput a\ndff f q=q d=a clk=clk\n").unwrap();
        assert_eq!(
            classify_feedback(&nl, "f", Some(&BTreeSet::new())),
            Ok(FeedbackClass::NoFP)
        );
    }
}
