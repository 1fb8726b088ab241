// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::FfGraph;
use crate::synth::GroundTruth;

/// Strongly connected components of `adj` (Tarjan, iterative). Each
/// component is sorted; components are ordered by their smallest member.
pub fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    // (node, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*i) {
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("component on stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out.sort_by_key(|c| c[0]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeFilter {
    Combinational,
    ThroughFf,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SccLabel {
    Fsm,
    FsmHp,
    Data,
    Unknown,
}

impl SccLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SccLabel::Fsm => "fsm",
            SccLabel::FsmHp => "fsm_hp",
            SccLabel::Data => "data",
            SccLabel::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SccReport {
    /// Members sorted by name; components ordered by smallest member.
    pub sccs: Vec<Vec<String>>,
    /// Parallel to `sccs`; empty until [`label_sccs`] runs.
    pub labels: Vec<SccLabel>,
    pub notes: Vec<String>,
}

impl SccReport {
    /// Index of the component containing `ff`.
    pub fn scc_of(&self, ff: &str) -> Option<usize> {
        self.sccs.iter().position(|c| c.iter().any(|m| m == ff))
    }

    pub fn with_label(&self, label: SccLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn multi_element(&self) -> impl Iterator<Item = (usize, &Vec<String>)> {
        self.sccs.iter().enumerate().filter(|(_, c)| c.len() > 1)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.sccs.iter().enumerate() {
            let _ = write!(s, "scc {i}");
            if let Some(l) = self.labels.get(i) {
                let _ = write!(s, " {}", l.as_str());
            }
            for m in c {
                let _ = write!(s, " {m}");
            }
            s.push('\n');
        }
        s
    }
}

/// Components of the FF graph. Singleton components are reported only when
/// `include_singletons` is set.
pub fn tarjan_scc(g: &FfGraph, filter: EdgeFilter, include_singletons: bool) -> SccReport {
    let adj: Vec<Vec<usize>> = match filter {
        EdgeFilter::Combinational => g.comb.clone(),
        EdgeFilter::ThroughFf => g.through.clone(),
        EdgeFilter::Any => g
            .comb
            .iter()
            .zip(&g.through)
            .map(|(a, b)| {
                let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect(),
    };
    let sccs = tarjan(&adj)
        .into_iter()
        .filter(|c| include_singletons || c.len() > 1)
        .map(|c| c.into_iter().map(|i| g.nodes[i].clone()).collect())
        .collect();
    SccReport {
        sccs,
        labels: Vec::new(),
        notes: Vec::new(),
    }
}

/// Labels the component with the most state bits `fsm`, the one with the most
/// honeypot state bits `fsm_hp`, other multi-element components `data`.
/// Count ties go to the component listed first and are noted.
pub fn label_sccs(report: &mut SccReport, truth: &GroundTruth) {
    let sff = truth.sff_set();
    let hp = truth.hp_set();
    let mut labels: Vec<SccLabel> = report
        .sccs
        .iter()
        .map(|c| {
            if c.len() > 1 {
                SccLabel::Data
            } else {
                SccLabel::Unknown
            }
        })
        .collect();
    let mut pick =
        |set: &std::collections::BTreeSet<String>, label: SccLabel, labels: &mut Vec<SccLabel>| {
            let counts: Vec<usize> = report
                .sccs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if matches!(labels[i], SccLabel::Fsm | SccLabel::FsmHp) {
                        0
                    } else {
                        c.iter().filter(|m| set.contains(*m)).count()
                    }
                })
                .collect();
            let best = counts.iter().copied().max().unwrap_or(0);
            if best == 0 {
                return;
            }
            let tied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == best).collect();
            if tied.len() > 1 {
                report.notes.push(format!(
                    "{} label tie between components {:?}; chose {}",
                    label.as_str(),
                    tied,
                    tied[0]
                ));
            }
            labels[tied[0]] = label;
        };
    pick(&sff, SccLabel::Fsm, &mut labels);
    pick(&hp, SccLabel::FsmHp, &mut labels);
    report.labels = labels;
}
