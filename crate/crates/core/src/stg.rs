// SPDX-License-Identifier: Apache-2.0

//! State transition graph extraction by exhaustive simulation, and
//! equivalence checking between two extracted graphs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::netlist::{BitState, Netlist, NetlistError, Simulator};
use crate::synth::code_str;

pub const DEFAULT_MAX_INPUTS: usize = 12;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StgError {
    #[error("{n} free inputs exceed the budget of {max}")]
    InputBudget { n: usize, max: usize },
    #[error("reset value of `{ff}` disagrees with its reset pin")]
    InconsistentReset { ff: String },
    #[error("unknown flip-flop `{0}`")]
    UnknownFf(String),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("no bit of `b` maps to `{0}`")]
    BitMapIncomplete(String),
    #[error("unknown state bit `{0}`")]
    UnknownBit(String),
    #[error("replicas of `{bit}` disagree in state {state}")]
    ReplicaDisagreement { bit: String, state: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Reachable states and total transition table. State 0 is the reset state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stg {
    /// Tracked FFs; bit k of every state vector belongs to `bits[k]`.
    pub bits: Vec<String>,
    pub input_names: Vec<String>,
    /// In BFS order from reset.
    pub states: Vec<Vec<bool>>,
    /// `next[s][v]`: successor of state `s` under input vector `v`, where
    /// bit k of `v` is the value of `input_names[k]`.
    pub next: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Input vector label, `input_names[0]` first.
pub fn vector_label(v: usize, n: usize) -> String {
    if n == 0 {
        return "-".to_string();
    }
    (0..n)
        .map(|k| if v >> k & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl Stg {
    pub fn reset(&self) -> &[bool] {
        &self.states[0]
    }

    pub fn state_index(&self, code: &[bool]) -> Option<usize> {
        self.states.iter().position(|s| s == code)
    }

    pub fn code(&self, s: usize) -> String {
        code_str(&self.states[s])
    }

    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (s, row) in self.next.iter().enumerate() {
            for (v, &d) in row.iter().enumerate() {
                out.push((s, v, d));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let n = self.input_names.len();
        let mut s = String::new();
        let _ = writeln!(s, "bits {}", self.bits.join(" "));
        let _ = writeln!(s, "inputs {}", self.input_names.join(" "));
        let _ = writeln!(s, "reset {}", self.code(0));
        for i in 0..self.states.len() {
            let _ = writeln!(s, "state {}", self.code(i));
        }
        for (src, v, dst) in self.edges() {
            let _ = writeln!(
                s,
                "edge {} {} {}",
                self.code(src),
                vector_label(v, n),
                self.code(dst)
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning {w}");
        }
        s
    }

    /// Graphviz export; parallel edges are merged into one labeled edge.
    pub fn to_dot(&self) -> String {
        let n = self.input_names.len();
        let mut s = String::from("digraph stg {\n");
        let _ = writeln!(s, "  \"{}\" [shape=doublecircle];", self.code(0));
        for (src, row) in self.next.iter().enumerate() {
            let mut by_dst: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for (v, &d) in row.iter().enumerate() {
                by_dst.entry(d).or_default().push(vector_label(v, n));
            }
            for (d, labels) in by_dst {
                let _ = writeln!(
                    s,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    self.code(src),
                    self.code(d),
                    labels.join(",")
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Options for [`extract_stg`] beyond the required arguments.
#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    /// Values for inputs that are not free. Unlisted ones are held at 0.
    pub held: BTreeMap<String, bool>,
    pub max_inputs: Option<usize>,
}

/// Breadth-first extraction of the graph reachable from `reset`.
///
/// FFs outside `sffs` are simulated alongside but projected away. Every
/// projected state keeps up to two full-state representatives; when they
/// disagree on a projected successor, the FFs on which the representatives
/// differ join the tracked set and extraction restarts.
pub fn extract_stg(
    nl: &Netlist,
    sffs: &[String],
    reset: &BitState,
    free_inputs: &[String],
    opts: &ExtractOptions,
) -> Result<Stg, StgError> {
    let max = opts.max_inputs.unwrap_or(DEFAULT_MAX_INPUTS);
    if free_inputs.len() > max {
        return Err(StgError::InputBudget {
            n: free_inputs.len(),
            max,
        });
    }
    let sim = Simulator::new(nl)?;
    let ff_pos: HashMap<&str, usize> = nl
        .ffs
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    let pi_pos: HashMap<&str, usize> = nl
        .inputs
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut tracked = Vec::new();
    for s in sffs {
        tracked.push(
            *ff_pos
                .get(s.as_str())
                .ok_or_else(|| StgError::UnknownFf(s.clone()))?,
        );
    }
    let free: Vec<usize> = free_inputs
        .iter()
        .map(|i| {
            pi_pos
                .get(i.as_str())
                .copied()
                .ok_or_else(|| StgError::UnknownInput(i.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut base_pis = vec![false; nl.inputs.len()];
    for (name, &v) in &opts.held {
        let p = *pi_pos
            .get(name.as_str())
            .ok_or_else(|| StgError::UnknownInput(name.clone()))?;
        base_pis[p] = v;
    }
    if let Some(extra) = reset.0.keys().find(|k| !ff_pos.contains_key(k.as_str())) {
        return Err(StgError::UnknownFf(extra.clone()));
    }
    let mut start = Vec::with_capacity(nl.ffs.len());
    for f in &nl.ffs {
        let v = reset.get(&f.name).unwrap_or(f.rst.is_some() && f.rst_val);
        if f.rst.is_some() && v != f.rst_val {
            return Err(StgError::InconsistentReset { ff: f.name.clone() });
        }
        start.push(v);
    }
    let vectors: Vec<Vec<bool>> = (0..1usize << free.len())
        .map(|v| {
            let mut pis = base_pis.clone();
            for (k, &p) in free.iter().enumerate() {
                pis[p] = v >> k & 1 == 1;
            }
            pis
        })
        .collect();

    let mut warnings = Vec::new();
    loop {
        match bfs(&sim, &tracked, &start, &vectors) {
            Ok((states, next)) => {
                return Ok(Stg {
                    bits: tracked.iter().map(|&i| nl.ffs[i].name.clone()).collect(),
                    input_names: free_inputs.to_vec(),
                    states,
                    next,
                    warnings,
                })
            }
            Err(extra) => {
                let names: Vec<&str> = extra.iter().map(|&i| nl.ffs[i].name.as_str()).collect();
                warnings.push(format!(
                    "next state depends on untracked {}",
                    names.join(",")
                ));
                tracked.extend(extra);
            }
        }
    }
}

type Table = (Vec<Vec<bool>>, Vec<Vec<usize>>);

/// On nondeterminism returns the untracked FFs to add.
fn bfs(
    sim: &Simulator<'_>,
    tracked: &[usize],
    start: &[bool],
    vectors: &[Vec<bool>],
) -> Result<Table, Vec<usize>> {
    let project = |full: &[bool]| -> Vec<bool> { tracked.iter().map(|&i| full[i]).collect() };
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut states = vec![project(start)];
    let mut reps: Vec<Vec<Vec<bool>>> = vec![vec![start.to_vec()]];
    let mut next: Vec<Option<Vec<usize>>> = vec![None];
    index.insert(states[0].clone(), 0);
    let mut queue = VecDeque::from([(0usize, start.to_vec())]);
    while let Some((s, full)) = queue.pop_front() {
        let mut row = Vec::with_capacity(vectors.len());
        for pis in vectors {
            let succ = sim.step_vec(pis, &full, false);
            let p = project(&succ);
            let d = match index.get(&p) {
                Some(&d) => {
                    if reps[d].len() < 2 && !reps[d].contains(&succ) {
                        reps[d].push(succ.clone());
                        queue.push_back((d, succ));
                    }
                    d
                }
                None => {
                    let d = states.len();
                    index.insert(p.clone(), d);
                    states.push(p);
                    reps.push(vec![succ.clone()]);
                    next.push(None);
                    queue.push_back((d, succ));
                    d
                }
            };
            row.push(d);
        }
        match &next[s] {
            None => next[s] = Some(row),
            Some(prev) if *prev == row => {}
            Some(_) => {
                let other = &reps[s][0];
                let tracked: BTreeSet<usize> = tracked.iter().copied().collect();
                return Err((0..full.len())
                    .filter(|i| !tracked.contains(i) && full[*i] != other[*i])
                    .collect());
            }
        }
    }
    Ok((
        states,
        next.into_iter()
            .map(|r| r.expect("every state expanded"))
            .collect(),
    ))
}

/// Checks that `b` behaves like `a` when its state is projected through
/// `bit_map` (b bit name to a bit name) and `frozen` inputs are held.
///
/// Several `b` bits may map to one `a` bit; they must then agree in every
/// reachable state of `b`. Unmapped `b` bits are ignored.
pub fn stg_equivalent(
    a: &Stg,
    b: &Stg,
    bit_map: &BTreeMap<String, String>,
    frozen: &BTreeMap<String, bool>,
) -> Result<bool, StgError> {
    let a_pos: HashMap<&str, usize> = a
        .bits
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); a.bits.len()];
    for (bb, ab) in bit_map {
        let j = b
            .bits
            .iter()
            .position(|n| n == bb)
            .ok_or_else(|| StgError::UnknownBit(bb.clone()))?;
        let i = *a_pos
            .get(ab.as_str())
            .ok_or_else(|| StgError::UnknownBit(ab.clone()))?;
        groups[i].push(j);
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StgError::BitMapIncomplete(a.bits[i].clone()));
    }
    let mut shared: Vec<&String> = Vec::new();
    for n in a.input_names.iter().chain(&b.input_names) {
        if !frozen.contains_key(n) && !shared.contains(&n) {
            shared.push(n);
        }
    }
    if let Some(f) = frozen
        .keys()
        .find(|f| !a.input_names.contains(f) && !b.input_names.contains(f))
    {
        return Err(StgError::UnknownInput(f.clone()));
    }
    let vec_of = |names: &[String], assign: &dyn Fn(&str) -> bool| -> usize {
        names
            .iter()
            .enumerate()
            .map(|(k, n)| (assign(n) as usize) << k)
            .sum()
    };
    let mut pairs: Vec<(usize, Vec<usize>)> = Vec::with_capacity(1 << shared.len());
    for v in 0..1usize << shared.len() {
        let assign = |n: &str| match frozen.get(n) {
            Some(&f) => f,
            None => {
                let k = shared.iter().position(|s| *s == n).expect("shared input");
                v >> k & 1 == 1
            }
        };
        pairs.push((
            vec_of(&a.input_names, &assign),
            vec![vec_of(&b.input_names, &assign)],
        ));
    }
    let mut seen = BTreeSet::from([(0usize, 0usize)]);
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((sa, sb)) = queue.pop_front() {
        let code_b = &b.states[sb];
        let mut proj = Vec::with_capacity(groups.len());
        for (i, g) in groups.iter().enumerate() {
            let v = code_b[g[0]];
            if g.iter().any(|&j| code_b[j] != v) {
                return Err(StgError::ReplicaDisagreement {
                    bit: a.bits[i].clone(),
                    state: code_str(code_b),
                });
            }
            proj.push(v);
        }
        if proj != a.states[sa] {
            return Ok(false);
        }
        for (va, vb) in &pairs {
            let nxt = (a.next[sa][*va], b.next[sb][vb[0]]);
            if seen.insert(nxt) {
                queue.push_back(nxt);
            }
        }
    }
    Ok(true)
}

/// Identity map over the bits two graphs share by name.
pub fn identity_map(a: &Stg) -> BTreeMap<String, String> {
    a.bits.iter().map(|b| (b.clone(), b.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    fn toggle() -> Netlist {
        parse(
            "input clk\ninput rst\ninput t\ngate XOR x d q t\n\
             dff s q=q d=d clk=clk rst=rst rstval=0\n",
        )
        .unwrap()
    }

    #[test]
    fn toggle_has_two_states() {
        let nl = toggle();
        let g = extract_stg(
            &nl,
            &["s".into()],
            &BitState::reset(&nl),
            &["t".into()],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(g.states, vec![vec![false], vec![true]]);
        assert_eq!(g.next, vec![vec![0, 1], vec![1, 0]]);
        assert!(g.to_text().contains("edge 0 1 1\n"));
        assert!(stg_equivalent(&g, &g, &identity_map(&g), &BTreeMap::new()).unwrap());
    }

    #[test]
    fn budget_and_reset_checks() {
        let nl = toggle();
        let opts = ExtractOptions {
            max_inputs: Some(0),
            ..Default::default()
        };
        assert!(matches!(
            extract_stg(
                &nl,
                &["s".into()],
                &BitState::reset(&nl),
                &["t".into()],
                &opts
            ),
            Err(StgError::InputBudget { n: 1, max: 0 })
        ));
        let mut bad = BitState::reset(&nl);
        bad.set("s", true);
        assert!(matches!(
            extract_stg(&nl, &["s".into()], &bad, &[], &Default::default()),
            Err(StgError::InconsistentReset { .. })
        ));
    }

    #[test]
    fn leaking_dependency_enlarges_tracked_set() {
        // s loads the value of a free-running toggler; projected on s alone
        // the successor is not a function of s.
        let nl = parse(
            "input clk\ninput rst\ngate NOT n dt qt\n\
             dff t q=qt d=dt clk=clk rst=rst rstval=0\n\
             dff s q=q d=qt clk=clk rst=rst rstval=0\n",
        )
        .unwrap();
        let g = extract_stg(
            &nl,
            &["s".into()],
            &BitState::reset(&nl),
            &[],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(g.bits, vec!["s".to_string(), "t".to_string()]);
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn replicas_must_agree() {
        let a = Stg {
            bits: vec!["x".into()],
            input_names: vec![],
            states: vec![vec![false], vec![true]],
            next: vec![vec![1], vec![0]],
            warnings: vec![],
        };
        let b = Stg {
            bits: vec!["x0".into(), "x1".into()],
            input_names: vec![],
            states: vec![vec![false, false], vec![true, false]],
            next: vec![vec![1], vec![0]],
            warnings: vec![],
        };
        let map: BTreeMap<String, String> = [
            ("x0".to_string(), "x".to_string()),
            ("x1".to_string(), "x".to_string()),
        ]
        .into();
        assert!(matches!(
            stg_equivalent(&a, &b, &map, &BTreeMap::new()),
            Err(StgError::ReplicaDisagreement { .. })
        ));
        let only_first: BTreeMap<String, String> = [("x0".to_string(), "x".to_string())].into();
        assert!(stg_equivalent(&a, &b, &only_first, &BTreeMap::new()).unwrap());
    }
}
