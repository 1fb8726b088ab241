// SPDX-License-Identifier: Apache-2.0

//! Random instance generators and brute-force reference implementations.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use fsm_honeypot::netlist::{FlipFlop, Gate, GateKind, Netlist};
use fsm_honeypot::synth::{
    binary_width, encode, simulate_spec, Cube, Encoding, FsmSpec, Transition,
};
use rand::seq::SliceRandom;
use rand::Rng;

// ---- graphs ----

pub fn random_digraph<R: Rng>(rng: &mut R, max_nodes: usize) -> Vec<Vec<usize>> {
    let n = rng.gen_range(1..=max_nodes);
    let p: f64 = rng.gen_range(0.05..0.5);
    (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(p)).collect())
        .collect()
}

/// Components by mutual reachability in the transitive closure, each
/// sorted, ordered by smallest member.
#[allow(clippy::needless_range_loop)]
pub fn closure_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut r = vec![vec![false; n]; n];
    for (a, out) in adj.iter().enumerate() {
        r[a][a] = true;
        for &b in out {
            r[a][b] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| r[i][j] && r[j][i]).collect();
        for &j in &comp {
            seen[j] = true;
        }
        out.push(comp);
    }
    out
}

// ---- netlists ----

/// Acyclic random netlist with FFs whose D nets are random gate outputs.
pub fn random_netlist<R: Rng>(rng: &mut R) -> Netlist {
    let mut nl = Netlist::new("rand");
    let n_in = rng.gen_range(1..=5);
    nl.inputs = (0..n_in).map(|i| format!("i{i}")).collect();
    let n_ff = rng.gen_range(0..=3);
    let mut pool: Vec<String> = nl.inputs.clone();
    pool.extend((0..n_ff).map(|i| format!("q{i}")));
    if rng.gen_bool(0.3) {
        nl.constants.insert("k1".into(), true);
        pool.push("k1".into());
    }
    let n_g = rng.gen_range(1..=25);
    for g in 0..n_g {
        let kind = *GateKind::ALL.choose(rng).unwrap();
        let arity = match kind {
            GateKind::Not | GateKind::Buf => 1,
            GateKind::Mux => 3,
            _ => rng.gen_range(2..=4),
        };
        let ins = (0..arity)
            .map(|_| pool.choose(rng).unwrap().clone())
            .collect();
        let out = format!("n{g}");
        nl.gates.push(Gate {
            name: format!("g{g}"),
            kind,
            out: out.clone(),
            ins,
        });
        pool.push(out);
    }
    for f in 0..n_ff {
        nl.ffs.push(FlipFlop {
            name: format!("f{f}"),
            q: format!("q{f}"),
            d: format!("n{}", rng.gen_range(0..n_g)),
            clk: nl.inputs[0].clone(),
            rst: None,
            rst_val: false,
            en: None,
        });
    }
    let n_out = rng.gen_range(1..=3.min(n_g));
    nl.outputs = (n_g - n_out..n_g).map(|g| format!("n{g}")).collect();
    nl
}

/// Evaluates `net` by recursion over gate drivers.
pub fn eval_recursive(nl: &Netlist, assignment: &BTreeMap<String, bool>, net: &str) -> bool {
    fn go(
        by_out: &HashMap<&str, &Gate>,
        nl: &Netlist,
        a: &BTreeMap<String, bool>,
        memo: &mut HashMap<String, bool>,
        net: &str,
    ) -> bool {
        if let Some(&v) = a.get(net).or_else(|| nl.constants.get(net)) {
            return v;
        }
        if let Some(&v) = memo.get(net) {
            return v;
        }
        let g = by_out[net];
        let ins: Vec<bool> = g.ins.iter().map(|i| go(by_out, nl, a, memo, i)).collect();
        let v = match g.kind {
            GateKind::Not => !ins[0],
            GateKind::Buf => ins[0],
            GateKind::And => !ins.contains(&false),
            GateKind::Or => ins.contains(&true),
            GateKind::Nand => ins.contains(&false),
            GateKind::Nor => !ins.contains(&true),
            GateKind::Xor => ins.iter().filter(|&&b| b).count() % 2 == 1,
            GateKind::Xnor => ins.iter().filter(|&&b| b).count() % 2 == 0,
            GateKind::Mux => ins[1 + usize::from(ins[0])],
        };
        memo.insert(net.to_string(), v);
        v
    }
    let by_out: HashMap<&str, &Gate> = nl.gates.iter().map(|g| (g.out.as_str(), g)).collect();
    go(&by_out, nl, assignment, &mut HashMap::new(), net)
}

// ---- FSMs ----

fn minterm(inputs: &[String], m: usize) -> Cube {
    inputs
        .iter()
        .enumerate()
        .map(|(b, n)| (n.clone(), m >> b & 1 == 1))
        .collect()
}

/// Random deterministic FSM: each state gets a random destination (or a
/// hold) per input minterm; `encoding` picks binary, one-hot or explicit.
pub fn random_fsm<R: Rng>(
    rng: &mut R,
    max_states: usize,
    max_inputs: usize,
    encoding: Option<u8>,
) -> FsmSpec {
    let k = rng.gen_range(2..=max_states);
    let n_in = rng.gen_range(0..=max_inputs);
    let states: Vec<String> = (0..k).map(|i| format!("S{i}")).collect();
    let inputs: Vec<String> = (0..n_in).map(|i| format!("x{i}")).collect();
    let mut transitions = Vec::new();
    for s in &states {
        for m in 0..1usize << n_in {
            if rng.gen_bool(0.7) {
                transitions.push(Transition {
                    from: s.clone(),
                    guard: minterm(&inputs, m),
                    to: states.choose(rng).unwrap().clone(),
                });
            }
        }
    }
    let n_out = rng.gen_range(0..=2);
    let outputs: Vec<String> = (0..n_out).map(|i| format!("y{i}")).collect();
    let moore = states
        .iter()
        .map(|s| (s.clone(), (0..n_out).map(|_| rng.gen()).collect()))
        .collect();
    let encoding = match encoding.unwrap_or_else(|| rng.gen_range(0..3)) {
        0 => Encoding::Binary,
        1 => Encoding::OneHot,
        _ => {
            let w = binary_width(k) + 1;
            let mut codes: Vec<usize> = (0..1usize << w).collect();
            codes.shuffle(rng);
            Encoding::Explicit(
                states
                    .iter()
                    .zip(codes)
                    .map(|(s, c)| (s.clone(), (0..w).map(|b| c >> b & 1 == 1).collect()))
                    .collect(),
            )
        }
    };
    FsmSpec {
        name: "rnd".into(),
        states,
        encoding,
        inputs,
        reset: "S0".into(),
        transitions,
        outputs,
        moore,
    }
}

/// Input assignment for vector `v`; bit k belongs to `inputs[k]`.
pub fn vector(inputs: &[String], v: usize) -> BTreeMap<String, bool> {
    inputs
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), v >> k & 1 == 1))
        .collect()
}

/// Reference STG of a spec: for every reachable state and input vector, the
/// successor code, found by replaying a shortest input trace through the
/// behavioral simulator.
pub fn reference_stg(fsm: &FsmSpec) -> BTreeMap<(Vec<bool>, usize), Vec<bool>> {
    let codes = encode(fsm).unwrap();
    let code = |s: &str| codes[fsm.state_index(s).unwrap()].clone();
    let nv = 1usize << fsm.inputs.len();
    let mut trace_to: BTreeMap<String, Vec<BTreeMap<String, bool>>> = BTreeMap::new();
    trace_to.insert(fsm.reset.clone(), Vec::new());
    let mut q = VecDeque::from([fsm.reset.clone()]);
    let mut out = BTreeMap::new();
    while let Some(s) = q.pop_front() {
        for v in 0..nv {
            let mut t = trace_to[&s].clone();
            t.push(vector(&fsm.inputs, v));
            let visited = simulate_spec(fsm, &t);
            let dst = visited.last().unwrap().clone();
            out.insert((code(&s), v), code(&dst));
            if !trace_to.contains_key(&dst) {
                trace_to.insert(dst.clone(), t);
                q.push_back(dst);
            }
        }
    }
    out
}

// ---- matching ----

/// Best total over all injective row-to-column assignments.
pub fn brute_force_match(m: &[Vec<f64>]) -> f64 {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    fn go(m: &[Vec<f64>], r: usize, used: &mut Vec<bool>) -> f64 {
        if r == m.len() {
            return 0.0;
        }
        // Row r may stay unmatched only when rows outnumber columns.
        let mut best = if m.len() > used.len() {
            go(m, r + 1, used)
        } else {
            f64::NEG_INFINITY
        };
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(m[r][c] + go(m, r + 1, used));
                used[c] = false;
            }
        }
        best
    }
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    go(m, 0, &mut vec![false; cols])
}

pub fn set(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}
