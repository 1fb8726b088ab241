// SPDX-License-Identifier: Apache-2.0

//! Topological state-register identification.
//!
//! FFs are grouped by cell type and clock/reset/enable nets, groups are split
//! along SCCs, members without a combinational self-loop or with too little
//! influence on their co-members are dropped, and finally members that reach
//! no control signal are dropped one by one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::graph::{
    classify_in, tarjan_scc, ControlInfo, EdgeFilter, EdgeKind, FeedbackClass, FfGraph,
};
use crate::metrics::AttackResult;
use crate::netlist::{Netlist, NetlistIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlStep {
    Off,
    Structural,
    Functional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupKeys {
    pub ff_kind: bool,
    pub clk: bool,
    pub rst: bool,
    pub en: bool,
}

impl Default for GroupKeys {
    fn default() -> Self {
        GroupKeys {
            ff_kind: true,
            clk: true,
            rst: true,
            en: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoParams {
    pub require_high_fp: bool,
    /// Fraction of co-members each member must reach combinationally.
    pub theta: f64,
    pub control_step: ControlStep,
    pub group_keys: GroupKeys,
    /// Count single-member groups as identified.
    pub include_singletons: bool,
}

impl Default for TopoParams {
    fn default() -> Self {
        TopoParams {
            require_high_fp: true,
            theta: 0.5,
            control_step: ControlStep::Structural,
            group_keys: GroupKeys::default(),
            include_singletons: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub id: String,
    pub members: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub group: String,
    pub step: String,
    pub ff: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateGroups {
    pub groups: Vec<Group>,
    pub removals: Vec<Removal>,
    pub notes: Vec<String>,
}

impl CandidateGroups {
    pub fn members(&self) -> BTreeSet<String> {
        self.groups
            .iter()
            .flat_map(|g| g.members.iter().cloned())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.removals {
            let _ = writeln!(
                s,
                "group {} step={} removed={} reason={}",
                r.group, r.step, r.ff, r.reason
            );
        }
        for g in &self.groups {
            let members: Vec<&str> = g.members.iter().map(String::as_str).collect();
            let _ = writeln!(s, "group {} members={}", g.id, members.join(","));
        }
        for n in &self.notes {
            let _ = writeln!(s, "note {n}");
        }
        s
    }
}

fn ff_kind(rst: bool, en: bool) -> &'static str {
    match (rst, en) {
        (false, false) => "dff",
        (true, false) => "dffr",
        (false, true) => "dffe",
        (true, true) => "dffre",
    }
}

/// Partition of all FFs by the selected grouping keys.
pub fn topo_group(nl: &Netlist, params: &TopoParams) -> CandidateGroups {
    let k = params.group_keys;
    let mut by_key: BTreeMap<[String; 4], BTreeSet<String>> = BTreeMap::new();
    for f in &nl.ffs {
        let opt = |on: bool, v: &Option<String>| match (on, v) {
            (false, _) => String::new(),
            (true, Some(n)) => n.clone(),
            (true, None) => "-".to_string(),
        };
        let key = [
            if k.ff_kind {
                ff_kind(f.rst.is_some(), f.en.is_some()).to_string()
            } else {
                String::new()
            },
            if k.clk { f.clk.clone() } else { String::new() },
            opt(k.rst, &f.rst),
            opt(k.en, &f.en),
        ];
        by_key.entry(key).or_default().insert(f.name.clone());
    }
    CandidateGroups {
        groups: by_key
            .into_values()
            .enumerate()
            .map(|(i, members)| Group {
                id: format!("g{i}"),
                members,
            })
            .collect(),
        ..Default::default()
    }
}

/// Splits each group into its intersections with multi-element SCCs plus a
/// remainder of FFs in no such SCC.
pub fn topo_scc_split(groups: &CandidateGroups, g: &FfGraph) -> CandidateGroups {
    let sccs = tarjan_scc(g, EdgeFilter::Combinational, false);
    let mut out = CandidateGroups {
        groups: Vec::new(),
        removals: groups.removals.clone(),
        notes: groups.notes.clone(),
    };
    for grp in &groups.groups {
        let mut rest = grp.members.clone();
        for (k, scc) in sccs.sccs.iter().enumerate() {
            let part: BTreeSet<String> = scc
                .iter()
                .filter(|m| grp.members.contains(*m))
                .cloned()
                .collect();
            if !part.is_empty() {
                rest.retain(|m| !part.contains(m));
                out.groups.push(Group {
                    id: format!("{}.s{k}", grp.id),
                    members: part,
                });
            }
        }
        if !rest.is_empty() {
            out.groups.push(Group {
                id: format!("{}.r", grp.id),
                members: rest,
            });
        }
    }
    out
}

fn apply(
    groups: &CandidateGroups,
    step: &str,
    mut verdict: impl FnMut(&Group, &str) -> Option<String>,
) -> CandidateGroups {
    let mut out = CandidateGroups {
        groups: Vec::new(),
        removals: groups.removals.clone(),
        notes: groups.notes.clone(),
    };
    for grp in &groups.groups {
        let mut keep = BTreeSet::new();
        for m in &grp.members {
            match verdict(grp, m) {
                Some(reason) => out.removals.push(Removal {
                    group: grp.id.clone(),
                    step: step.to_string(),
                    ff: m.clone(),
                    reason,
                }),
                None => {
                    keep.insert(m.clone());
                }
            }
        }
        if !keep.is_empty() {
            out.groups.push(Group {
                id: grp.id.clone(),
                members: keep,
            });
        }
    }
    out
}

/// Drops members lacking a combinational self-loop (when required) or
/// reaching fewer than `theta * (|group| - 1)` co-members. All members of a
/// group are judged against the group as it entered the step.
pub fn topo_filter_fp_influence(
    groups: &CandidateGroups,
    nl: &Netlist,
    params: &TopoParams,
) -> CandidateGroups {
    filter_fp_influence_in(groups, &FfGraph::build(nl), params)
}

fn filter_fp_influence_in(
    groups: &CandidateGroups,
    g: &FfGraph,
    params: &TopoParams,
) -> CandidateGroups {
    apply(groups, "fp_influence", |grp, m| {
        let a = g.id(m).expect("group member is an FF");
        if params.require_high_fp
            && classify_in(g, m, Some(&BTreeSet::new())) != Ok(FeedbackClass::HighFP)
        {
            return Some("no_high_fp".to_string());
        }
        let others = grp.members.len() - 1;
        let reached = grp
            .members
            .iter()
            .filter(|o| *o != m)
            .filter(|o| g.has_edge(a, g.id(o).expect("FF"), EdgeKind::Combinational))
            .count();
        if (reached as f64) < params.theta * others as f64 {
            Some(format!("influence_{reached}_of_{others}"))
        } else {
            None
        }
    })
}

/// Drops members that reach no control signal. Never drops a group as a whole.
pub fn topo_control_filter(
    groups: &CandidateGroups,
    nl: &Netlist,
    params: &TopoParams,
) -> CandidateGroups {
    if params.control_step == ControlStep::Off {
        return groups.clone();
    }
    let idx = NetlistIndex::new(nl);
    let control = ControlInfo::new(&idx);
    let mut fallbacks = Vec::new();
    let mut out = apply(groups, "control", |_, m| {
        let fi = idx.ff_index(m).expect("group member is an FF");
        let hit = match params.control_step {
            ControlStep::Functional => {
                let (hit, fell_back) = control.influences_any_functional(&idx, fi);
                if fell_back {
                    fallbacks.push(m.to_string());
                }
                hit
            }
            _ => control.influenced_by(fi) > 0,
        };
        (!hit).then(|| "no_control".to_string())
    });
    for f in fallbacks {
        out.notes.push(format!(
            "{f}: cone too wide for exhaustive check, used structural answer"
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct TopoOutcome {
    pub groups: CandidateGroups,
    pub result: AttackResult,
}

pub fn topo_attack(nl: &Netlist, params: &TopoParams) -> TopoOutcome {
    let g = FfGraph::build(nl);
    let grouped = topo_group(nl, params);
    let split = topo_scc_split(&grouped, &g);
    let filtered = filter_fp_influence_in(&split, &g, params);
    let groups = topo_control_filter(&filtered, nl, params);
    let identified = groups
        .groups
        .iter()
        .filter(|grp| params.include_singletons || grp.members.len() >= 2)
        .flat_map(|grp| grp.members.iter().cloned())
        .collect();
    TopoOutcome {
        groups,
        result: AttackResult {
            identified,
            selected_scc: None,
            metrics: None,
        },
    }
}
