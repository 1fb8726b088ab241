// SPDX-License-Identifier: Apache-2.0

//! Removal of a state bit's combinational self-loop.
//!
//! `rewrite_ra` works on a one-hot netlist: inside the target's next-state
//! cone, its own output is replaced by "all other state bits are zero".
//! `rewrite_rb` works on a binary FSM description: every used code gets a
//! partner code differing in the target bit, reached only under the added
//! input `o`, with the same outgoing behavior, so the target's next value no
//! longer depends on its current value.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write;

use super::{fp_str, ObfError};
use crate::graph::{classify_feedback, FeedbackClass};
use crate::netlist::{Driver, FlipFlop, Gate, GateKind, Netlist, NetlistIndex};
use crate::synth::cube::sharp_all;
use crate::synth::{
    encode, sff_name, synthesize, Cube, DatapathSpec, Encoding, FsmSpec, SynthOptions, Transition,
};

/// Name of the obfuscation input added by [`rewrite_rb`].
pub const OBF_INPUT: &str = "o";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteReport {
    pub treated_ff: String,
    /// Use sites of the target's output that were disconnected, as `gate:pin`.
    pub removed_edges: Vec<String>,
    /// Replacement net, or a summary of added transitions.
    pub replacement: String,
    pub fp_before: FeedbackClass,
    pub fp_after: FeedbackClass,
    /// Nothing had to change.
    pub noop: bool,
}

impl RewriteReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "treated {}", self.treated_ff);
        let _ = writeln!(s, "fp_before {}", fp_str(self.fp_before));
        let _ = writeln!(s, "fp_after {}", fp_str(self.fp_after));
        let _ = writeln!(s, "replacement {}", self.replacement);
        let _ = writeln!(s, "noop {}", self.noop);
        for e in &self.removed_edges {
            let _ = writeln!(s, "removed {e}");
        }
        s
    }
}

/// Replaces uses of `target`'s output inside its own D cone by
/// `AND(NOT q_m)` over the other state bits. Gates shared with logic outside
/// that cone are duplicated so outside uses keep the original signal.
pub fn rewrite_ra(
    nl: &Netlist,
    sffs: &[String],
    target: &str,
) -> Result<(Netlist, RewriteReport), ObfError> {
    if !sffs.iter().any(|s| s == target) {
        return Err(ObfError::NotAnSff(target.to_string()));
    }
    let cands: BTreeSet<String> = sffs.iter().cloned().collect();
    let fp_before = classify_feedback(nl, target, Some(&cands))?;
    if fp_before != FeedbackClass::HighFP {
        return Err(ObfError::NoHighFp(target.to_string()));
    }
    let idx = NetlistIndex::new(nl);
    let fi = idx.ff_index(target).expect("validated SFF");
    let q = idx.ff_q[fi];
    let d = idx.ff_d[fi];
    let cone = idx.comb_cone_gates(d);
    // Gates of the cone whose fan-in reaches q.
    let mut tainted: HashSet<usize> = HashSet::new();
    loop {
        let before = tainted.len();
        for &g in &cone {
            if !tainted.contains(&g)
                && idx.gate_ins[g].iter().any(|&i| {
                    i == q || matches!(idx.driver[i], Driver::Gate(p) if tainted.contains(&p))
                })
            {
                tainted.insert(g);
            }
        }
        if tainted.len() == before {
            break;
        }
    }

    let mut out = nl.clone();
    let taken: HashSet<String> = nl
        .driven_nets()
        .into_iter()
        .chain(nl.instance_names())
        .map(str::to_string)
        .collect();
    let fresh = |s: String| -> Result<String, ObfError> {
        if taken.contains(&s) {
            Err(ObfError::NameCollision(s))
        } else {
            Ok(s)
        }
    };
    let others: Vec<&FlipFlop> = sffs
        .iter()
        .filter(|s| *s != target)
        .map(|s| nl.ff(s).ok_or_else(|| ObfError::NotAnSff(s.clone())))
        .collect::<Result<_, _>>()?;
    let f_net = fresh(format!("ra_{target}_f"))?;
    let mut nots = Vec::new();
    for (k, m) in others.iter().enumerate() {
        let net = if others.len() == 1 {
            f_net.clone()
        } else {
            fresh(format!("ra_{target}_n{k}"))?
        };
        out.gates.push(Gate {
            name: net.clone(),
            kind: GateKind::Not,
            out: net.clone(),
            ins: vec![m.q.clone()],
        });
        nots.push(net);
    }
    match nots.len() {
        0 => {
            // A lone state bit: "no other bit is set" is constant 1.
            let zero = konst(&mut out, false);
            out.gates.push(Gate {
                name: f_net.clone(),
                kind: GateKind::Not,
                out: f_net.clone(),
                ins: vec![zero],
            });
        }
        1 => {}
        _ => out.gates.push(Gate {
            name: f_net.clone(),
            kind: GateKind::And,
            out: f_net.clone(),
            ins: nots,
        }),
    }

    let copy_net = |n: &str| format!("ra_{target}_{n}");
    let mut removed = Vec::new();
    let mut order: Vec<usize> = tainted.iter().copied().collect();
    order.sort();
    for &g in &order {
        let orig = &nl.gates[g];
        let ins = orig
            .ins
            .iter()
            .enumerate()
            .map(|(pin, n)| {
                let id = idx.id(n).expect("known net");
                if id == q {
                    removed.push(format!("{}:{pin}", orig.name));
                    f_net.clone()
                } else if matches!(idx.driver[id], Driver::Gate(p) if tainted.contains(&p)) {
                    copy_net(n)
                } else {
                    n.clone()
                }
            })
            .collect();
        out.gates.push(Gate {
            name: fresh(copy_net(&orig.name))?,
            kind: orig.kind,
            out: fresh(copy_net(&orig.out))?,
            ins,
        });
    }
    if d == q {
        removed.push(format!("{target}:d"));
        out.ffs[fi].d = f_net.clone();
    } else if let Driver::Gate(g) = idx.driver[d] {
        if tainted.contains(&g) {
            out.ffs[fi].d = copy_net(&nl.gates[g].out);
        }
    }
    let candidates: HashSet<String> = order.iter().map(|&g| nl.gates[g].name.clone()).collect();
    out.sweep_dead_gates(&candidates);
    out.validate()?;
    let fp_after = classify_feedback(&out, target, Some(&cands))?;
    removed.sort();
    Ok((
        out,
        RewriteReport {
            treated_ff: target.to_string(),
            removed_edges: removed,
            replacement: f_net,
            fp_before,
            fp_after,
            noop: false,
        },
    ))
}

fn konst(nl: &mut Netlist, v: bool) -> String {
    if let Some((n, _)) = nl.constants.iter().find(|(_, &c)| c == v) {
        return n.clone();
    }
    let n = format!("ra_const{}", u8::from(v));
    nl.constants.insert(n.clone(), v);
    n
}

fn target_class(fsm: &FsmSpec, bit: usize) -> Result<FeedbackClass, ObfError> {
    let syn = synthesize(fsm, &DatapathSpec::default(), &SynthOptions::default())?;
    let cands = syn.truth.sff_set();
    Ok(classify_feedback(
        &syn.netlist,
        &sff_name("", bit),
        Some(&cands),
    )?)
}

/// Adds dummy transitions under input `o` so that state bit `target_bit`
/// is computed without its own previous value.
///
/// Every state `s` gets a partner `s_p` whose code differs from `s` only in
/// the target bit. Under `o = 1` both go to `s_p`; under `o = 0` both follow
/// `s`'s original transitions, with unmatched input combinations made
/// explicit self-loops into `s`. When two used codes already differ only in
/// the target bit, one fresh code bit separates them first.
pub fn rewrite_rb(fsm: &FsmSpec, target_bit: usize) -> Result<(FsmSpec, RewriteReport), ObfError> {
    if fsm.encoding == Encoding::OneHot {
        return Err(ObfError::NeedsBinary);
    }
    fsm.validate()?;
    let mut codes = encode(fsm)?;
    let width = codes[0].len();
    if target_bit >= width {
        return Err(ObfError::BadBit {
            bit: target_bit,
            width,
        });
    }
    let treated = sff_name("", target_bit);
    let fp_before = target_class(fsm, target_bit)?;
    if fp_before != FeedbackClass::HighFP {
        return Ok((
            fsm.clone(),
            RewriteReport {
                treated_ff: treated,
                removed_edges: Vec::new(),
                replacement: "none".into(),
                fp_before,
                fp_after: fp_before,
                noop: true,
            },
        ));
    }
    if fsm.inputs.iter().any(|i| i == OBF_INPUT) {
        return Err(ObfError::InputTaken(OBF_INPUT.into()));
    }
    let flip = |c: &Vec<bool>| {
        let mut p = c.clone();
        p[target_bit] = !p[target_bit];
        p
    };
    let used: HashSet<Vec<bool>> = codes.iter().cloned().collect();
    let conflicted: Vec<bool> = codes.iter().map(|c| used.contains(&flip(c))).collect();
    if conflicted.iter().any(|&x| x) {
        for (c, &conf) in codes.iter_mut().zip(&conflicted) {
            c.push(conf && c[target_bit]);
        }
        let used: HashSet<Vec<bool>> = codes.iter().cloned().collect();
        if codes.iter().any(|c| used.contains(&flip(c))) {
            return Err(ObfError::Unsatisfiable);
        }
    }

    let mut names: HashSet<String> = fsm.states.iter().cloned().collect();
    let mut partner: BTreeMap<&str, String> = BTreeMap::new();
    for s in &fsm.states {
        let mut p = format!("{s}_p");
        while names.contains(&p) {
            p.push_str("_p");
        }
        names.insert(p.clone());
        partner.insert(s, p);
    }
    let o0 = |g: &Cube| {
        let mut g = g.clone();
        g.insert(OBF_INPUT.into(), false);
        g
    };
    let mut out = fsm.clone();
    out.inputs.push(OBF_INPUT.into());
    out.transitions.clear();
    let mut code_map = BTreeMap::new();
    let mut added = 0;
    for (si, s) in fsm.states.iter().enumerate() {
        let p = &partner[s.as_str()];
        let mut row: Vec<Transition> = fsm
            .outgoing(s)
            .map(|t| Transition {
                from: s.clone(),
                guard: o0(&t.guard),
                to: t.to.clone(),
            })
            .collect();
        let guards: Vec<Cube> = fsm.outgoing(s).map(|t| t.guard.clone()).collect();
        for u in sharp_all(&Cube::new(), guards.iter()) {
            row.push(Transition {
                from: s.clone(),
                guard: o0(&u),
                to: s.clone(),
            });
        }
        row.push(Transition {
            from: s.clone(),
            guard: [(OBF_INPUT.to_string(), true)].into(),
            to: p.clone(),
        });
        let mirrored: Vec<Transition> = row
            .iter()
            .map(|t| Transition {
                from: p.clone(),
                ..t.clone()
            })
            .collect();
        added += mirrored.len() + 1;
        out.transitions.extend(row);
        out.transitions.extend(mirrored);
        out.states.push(p.clone());
        code_map.insert(s.clone(), codes[si].clone());
        code_map.insert(p.clone(), flip(&codes[si]));
        out.moore.insert(p.clone(), fsm.moore_of(s));
    }
    out.encoding = Encoding::Explicit(code_map);
    out.validate()?;
    let fp_after = target_class(&out, target_bit)?;
    Ok((
        out,
        RewriteReport {
            treated_ff: treated.clone(),
            removed_edges: vec![format!("{treated}:q->{treated}:d")],
            replacement: format!("{added} dummy transitions on {OBF_INPUT}"),
            fp_before,
            fp_after,
            noop: false,
        },
    ))
}
