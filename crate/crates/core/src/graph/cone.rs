// SPDX-License-Identifier: Apache-2.0

use crate::netlist::{Driver, GateKind, NetId, Netlist, NetlistIndex};

use super::GraphError;

/// Node kinds of a cone tree. BUF gates never appear; cones look through them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Gate(GateKind),
    Pi,
    Ff,
    Const,
}

impl NodeKind {
    pub fn of(idx: &NetlistIndex<'_>, net: NetId) -> NodeKind {
        match idx.driver[net] {
            Driver::Input => NodeKind::Pi,
            Driver::Const(_) => NodeKind::Const,
            Driver::Ff(_) => NodeKind::Ff,
            Driver::Gate(gi) => NodeKind::Gate(idx.gate_kind(gi)),
        }
    }
}

/// Depth-limited fan-in tree of a net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeTree {
    pub kind: NodeKind,
    pub net: String,
    /// Ordered by `(kind, net)`.
    pub children: Vec<ConeTree>,
}

impl ConeTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ConeTree::size).sum::<usize>()
    }

    /// Equality ignoring net names.
    pub fn same_shape(&self, other: &ConeTree) -> bool {
        self.kind == other.kind
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }

    pub fn leaf(kind: NodeKind, net: &str) -> ConeTree {
        ConeTree {
            kind,
            net: net.to_string(),
            children: Vec::new(),
        }
    }

    pub fn node(kind: GateKind, net: &str, mut children: Vec<ConeTree>) -> ConeTree {
        children.sort_by(|a, b| (a.kind, &a.net).cmp(&(b.kind, &b.net)));
        ConeTree {
            kind: NodeKind::Gate(kind),
            net: net.to_string(),
            children,
        }
    }
}

pub fn input_cone(nl: &Netlist, root: &str, depth_limit: usize) -> Result<ConeTree, GraphError> {
    let idx = NetlistIndex::new(nl);
    let id = idx
        .id(root)
        .ok_or_else(|| GraphError::UnknownNet(root.to_string()))?;
    Ok(cone_in(&idx, id, depth_limit))
}

pub fn cone_in(idx: &NetlistIndex<'_>, root: NetId, depth_limit: usize) -> ConeTree {
    build(idx, idx.skip_bufs(root), 0, depth_limit)
}

fn build(idx: &NetlistIndex<'_>, net: NetId, depth: usize, limit: usize) -> ConeTree {
    let kind = NodeKind::of(idx, net);
    let mut children = Vec::new();
    if let Driver::Gate(gi) = idx.driver[net] {
        if depth < limit {
            children = idx.gate_ins[gi]
                .iter()
                .map(|&i| build(idx, idx.skip_bufs(i), depth + 1, limit))
                .collect();
            children.sort_by(|a: &ConeTree, b: &ConeTree| (a.kind, &a.net).cmp(&(b.kind, &b.net)));
        }
    }
    ConeTree {
        kind,
        net: idx.name(net).to_string(),
        children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    #[test]
    fn pi_root_is_leaf() {
        let nl = parse("input a\n").unwrap();
        let t = input_cone(&nl, "a", 6).unwrap();
        assert_eq!(t, ConeTree::leaf(NodeKind::Pi, "a"));
    }

    #[test]
    fn depth_one_and() {
        let nl = parse("input a\ninput b\ngate AND g y a b\ngate BUF h z y\n").unwrap();
        let t = input_cone(&nl, "z", 1).unwrap();
        assert_eq!(t.kind, NodeKind::Gate(GateKind::And));
        assert_eq!(t.children.len(), 2);
        assert!(t.children.iter().all(|c| c.kind == NodeKind::Pi));
        let t0 = input_cone(&nl, "y", 0).unwrap();
        assert!(t0.children.is_empty());
    }
}
