// SPDX-License-Identifier: Apache-2.0

//! FSM and datapath synthesis into two-level gate netlists.
//!
//! Next-state logic is a sum of products per state bit: one product per
//! (source state, effective guard cube) and a hold product for every input
//! region a state leaves unmatched. Earlier transitions win, which is
//! compiled away by subtracting earlier guards from later ones.

mod build;
pub mod cube;
mod doc;
mod spec;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use crate::netlist::{FlipFlop, GateKind, Netlist, NetlistError};

use build::Builder;
pub use cube::Cube;
pub use doc::{parse_design, write_design};
pub use spec::{
    binary_width, code_str, encode, parse_code, simulate_spec, Code, Counter, DataReg,
    DatapathSpec, Direction, Encoding, FsmSpec, Load, Transition, WordExpr, WordInput,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid FSM description: {0}")]
    Invalid(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("duplicate state code {0}")]
    DuplicateCode(String),
    #[error("state `{state}` has overlapping guards toward `{first}` and `{second}`")]
    Ambiguous {
        state: String,
        first: String,
        second: String,
    },
    #[error("word expression: {0}")]
    Expr(String),
    #[error("design document: {0}")]
    Doc(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOptions {
    /// Replace the declared encoding by one-hot.
    pub allow_reencode: bool,
    /// Share identical gates across FF input cones.
    pub allow_cse: bool,
    pub name_prefix: String,
    pub clk: String,
    pub rst: String,
    /// Merge adjacent transition products (never hold products).
    pub merge_terms: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            allow_reencode: false,
            allow_cse: false,
            name_prefix: String::new(),
            clk: "clk".into(),
            rst: "rst".into(),
            merge_terms: true,
        }
    }
}

/// Which FFs hold what, as known to the designer.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    /// State bits, least significant first.
    pub sffs: Vec<String>,
    pub counters: BTreeMap<String, Vec<String>>,
    pub data: BTreeMap<String, Vec<String>>,
    /// State bits of an inserted honeypot FSM.
    pub hp_sffs: Vec<String>,
    /// State bits whose next-state logic contains a hold product.
    pub hold_sffs: BTreeSet<String>,
}

impl GroundTruth {
    pub fn sff_set(&self) -> BTreeSet<String> {
        self.sffs.iter().cloned().collect()
    }

    pub fn hp_set(&self) -> BTreeSet<String> {
        self.hp_sffs.iter().cloned().collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.sffs {
            let _ = writeln!(s, "sff {f}");
        }
        for (g, fs) in &self.counters {
            for f in fs {
                let _ = writeln!(s, "counter {g} {f}");
            }
        }
        for (g, fs) in &self.data {
            for f in fs {
                let _ = writeln!(s, "data {g} {f}");
            }
        }
        for f in &self.hp_sffs {
            let _ = writeln!(s, "hpsff {f}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SynthError> {
        let mut t = GroundTruth::default();
        for (i, line) in text.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["sff", f] => t.sffs.push(f.to_string()),
                ["hpsff", f] => t.hp_sffs.push(f.to_string()),
                ["counter", g, f] => t
                    .counters
                    .entry(g.to_string())
                    .or_default()
                    .push(f.to_string()),
                ["data", g, f] => t.data.entry(g.to_string()).or_default().push(f.to_string()),
                _ => {
                    return Err(SynthError::Doc(format!(
                        "ground truth line {}: `{line}`",
                        i + 1
                    )))
                }
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub netlist: Netlist,
    pub truth: GroundTruth,
    /// Encoding actually used, after optional re-encoding.
    pub encoding: Encoding,
    /// Codes in state order.
    pub codes: Vec<Code>,
    /// FSM output name to its net.
    pub output_nets: BTreeMap<String, String>,
}

impl Synthesized {
    /// Decodes SFF values (in `truth.sffs` order) to a state name.
    pub fn decode(&self, fsm: &FsmSpec, bits: &[bool]) -> Option<String> {
        self.codes
            .iter()
            .position(|c| c.as_slice() == bits)
            .map(|i| fsm.states[i].clone())
    }
}

pub fn sff_name(prefix: &str, bit: usize) -> String {
    format!("{prefix}state[{bit}]")
}

pub fn reg_bit_name(prefix: &str, reg: &str, bit: usize) -> String {
    format!("{prefix}{reg}[{bit}]")
}

struct Ctx<'a> {
    fsm: &'a FsmSpec,
    dp: &'a DatapathSpec,
    opts: &'a SynthOptions,
    /// Per state, the set bits no other code has; `None` unless every
    /// state has at least one.
    private: Option<Vec<Vec<usize>>>,
    codes: Vec<Code>,
    b: Builder,
    output_nets: BTreeMap<String, String>,
}

impl Ctx<'_> {
    fn p(&self) -> &str {
        &self.opts.name_prefix
    }

    fn decode(&self, s: usize) -> Cube {
        let code = &self.codes[s];
        if let Some(private) = &self.private {
            private[s]
                .iter()
                .map(|&b| (sff_name(self.p(), b), true))
                .collect()
        } else {
            code.iter()
                .enumerate()
                .map(|(b, &v)| (sff_name(self.p(), b), v))
                .collect()
        }
    }

    /// SOP terms for an FSM output, one decode product per asserting state.
    fn output_terms(&self, j: usize) -> Vec<Cube> {
        self.fsm
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| self.fsm.moore_of(s)[j])
            .map(|(i, _)| self.decode(i))
            .collect()
    }

    /// Net for an enable or select reference, built inside `scope`.
    fn signal_in(&mut self, scope: &str, name: &str) -> String {
        match self.fsm.outputs.iter().position(|o| o == name) {
            Some(j) => {
                let terms = self.output_terms(j);
                self.b.sop(scope, &terms)
            }
            None => name.to_string(),
        }
    }

    fn signal_global(&self, name: &str) -> String {
        self.output_nets
            .get(name)
            .cloned()
            .unwrap_or_else(|| name.to_string())
    }

    fn reg_width(&self, name: &str) -> Option<(usize, usize)> {
        if let Some(c) = self.dp.counters.iter().find(|c| c.name == name) {
            return Some((c.width, 1 + c.replicas));
        }
        self.dp
            .regs
            .iter()
            .find(|r| r.name == name)
            .map(|r| (r.width, 1))
    }
}

/// Bits set in exactly one code, grouped by that code. Only reachable codes
/// ever appear in the registers, so ANDing a state's private bits decodes it.
/// One-hot codes yield the single hot bit.
fn private_bits(codes: &[Code]) -> Option<Vec<Vec<usize>>> {
    let width = codes.first().map_or(0, Vec::len);
    let owners: Vec<usize> = (0..width)
        .map(|b| codes.iter().filter(|c| c[b]).count())
        .collect();
    let private: Vec<Vec<usize>> = codes
        .iter()
        .map(|c| (0..width).filter(|&b| c[b] && owners[b] == 1).collect())
        .collect();
    private.iter().all(|p| !p.is_empty()).then_some(private)
}

/// Synthesizes an FSM plus datapath into a netlist and its ground truth.
pub fn synthesize(
    fsm: &FsmSpec,
    dp: &DatapathSpec,
    opts: &SynthOptions,
) -> Result<Synthesized, SynthError> {
    fsm.validate()?;
    dp.validate(fsm)?;
    let encoding = if opts.allow_reencode {
        Encoding::OneHot
    } else {
        fsm.encoding.clone()
    };
    let used = FsmSpec {
        encoding: encoding.clone(),
        ..fsm.clone()
    };
    let codes = encode(&used)?;
    let p = opts.name_prefix.clone();

    let mut nl = Netlist::new(if p.is_empty() {
        fsm.name.clone()
    } else {
        format!("{p}{}", fsm.name)
    });
    nl.inputs.push(opts.clk.clone());
    nl.inputs.push(opts.rst.clone());
    nl.inputs.extend(fsm.inputs.iter().cloned());
    for w in &dp.word_inputs {
        nl.inputs
            .extend((0..w.width).map(|i| format!("{}[{i}]", w.name)));
    }

    let mut cx = Ctx {
        fsm,
        dp,
        opts,
        private: private_bits(&codes),
        codes,
        b: Builder::new(nl, opts.allow_cse, &p),
        output_nets: BTreeMap::new(),
    };
    let mut truth = GroundTruth::default();
    synth_fsm(&mut cx, &mut truth)?;
    synth_outputs(&mut cx);
    for c in &dp.counters {
        synth_counter(&mut cx, c, &mut truth);
    }
    for r in &dp.regs {
        synth_reg(&mut cx, r, &mut truth);
    }
    for (port, src) in &dp.wiring {
        let bits: Vec<String> = if src == "state" {
            truth.sffs.clone()
        } else {
            let (w, c) = cx.reg_width(src).expect("validated wiring");
            (0..w).map(|i| reg_bit_name(&p, src, i * c)).collect()
        };
        for (i, q) in bits.iter().enumerate() {
            let out = format!("{p}{port}[{i}]");
            cx.b.named(&format!("{out}_drv"), GateKind::Buf, vec![q.clone()], &out);
            cx.b.nl.outputs.push(out);
        }
    }

    let netlist = cx.b.nl;
    netlist.validate()?;
    Ok(Synthesized {
        netlist,
        truth,
        encoding,
        codes: cx.codes,
        output_nets: cx.output_nets,
    })
}

fn synth_fsm(cx: &mut Ctx<'_>, truth: &mut GroundTruth) -> Result<(), SynthError> {
    let fsm = cx.fsm;
    let width = cx.codes[0].len();
    let universe = Cube::new();
    // Per bit: transition products and hold products.
    let mut trans: Vec<Vec<Cube>> = vec![Vec::new(); width];
    let mut hold: Vec<Vec<Cube>> = vec![Vec::new(); width];
    for (si, s) in fsm.states.iter().enumerate() {
        let dec = cx.decode(si);
        let out: Vec<&Transition> = fsm.outgoing(s).collect();
        for (k, t) in out.iter().enumerate() {
            let earlier = out[..k].iter().map(|e| &e.guard);
            let dst = &cx.codes[fsm.state_index(&t.to).expect("validated")];
            for eff in cube::sharp_all(&t.guard, earlier) {
                let term = cube::intersect(&dec, &eff).expect("disjoint variable sets");
                for (b, &v) in dst.iter().enumerate() {
                    if v {
                        trans[b].push(term.clone());
                    }
                }
            }
        }
        let unmatched = cube::sharp_all(&universe, out.iter().map(|t| &t.guard));
        for u in unmatched {
            for (b, &v) in cx.codes[si].iter().enumerate() {
                if v {
                    let mut term = cube::intersect(&dec, &u).expect("disjoint variable sets");
                    term.insert(sff_name(cx.p(), b), true);
                    hold[b].push(term);
                }
            }
        }
    }
    let reset = &cx.codes[fsm.state_index(&fsm.reset).expect("validated")].clone();
    for b in 0..width {
        let name = sff_name(cx.p(), b);
        let mut terms = if cx.opts.merge_terms {
            cube::merge_adjacent(&trans[b])
        } else {
            dedup(&trans[b])
        };
        if !hold[b].is_empty() {
            truth.hold_sffs.insert(name.clone());
        }
        terms.extend(dedup(&hold[b]));
        let d = cx.b.sop(&name, &terms);
        cx.b.nl.ffs.push(FlipFlop {
            name: name.clone(),
            q: name.clone(),
            d,
            clk: cx.opts.clk.clone(),
            rst: Some(cx.opts.rst.clone()),
            rst_val: reset[b],
            en: None,
        });
        truth.sffs.push(name);
    }
    Ok(())
}

fn dedup(terms: &[Cube]) -> Vec<Cube> {
    let mut seen = BTreeSet::new();
    terms.iter().filter(|t| seen.insert(*t)).cloned().collect()
}

fn synth_outputs(cx: &mut Ctx<'_>) {
    let scope = format!("{}out", cx.p());
    for (j, o) in cx.fsm.outputs.iter().enumerate() {
        let terms = cx.output_terms(j);
        let n = cx.b.sop(&scope, &terms);
        let out = format!("{}{o}", cx.p());
        cx.b.named(&format!("{out}_drv"), GateKind::Buf, vec![n], &out);
        cx.b.nl.outputs.push(out.clone());
        cx.output_nets.insert(o.clone(), out);
    }
}

fn synth_counter(cx: &mut Ctx<'_>, c: &Counter, truth: &mut GroundTruth) {
    let p = cx.p().to_string();
    let copies = 1 + c.replicas;
    let total = c.width * copies;
    let q: Vec<String> = (0..total).map(|i| reg_bit_name(&p, &c.name, i)).collect();
    let up = c.direction == Direction::Up;
    let en = c.enable.as_deref().map(|e| cx.signal_global(e));
    for m in 0..total {
        let scope = q[m].clone();
        let b = &mut cx.b;
        let group = m / copies;
        // t = q +/- 1 over the widened register, up to the end of this group.
        let last = (group + 1) * copies;
        let mut t = Vec::with_capacity(last);
        let mut chain = String::new();
        for x in 0..last {
            if x == 0 {
                t.push(b.not(&scope, &q[0]));
                chain = if up { q[0].clone() } else { t[0].clone() };
            } else {
                t.push(b.xor(&scope, vec![q[x].clone(), chain.clone()]));
                if x + 1 < last {
                    let lit = b.lit(&scope, &q[x], up);
                    chain = b.and(&scope, vec![chain.clone(), lit]);
                }
            }
        }
        let mut next = t[m].clone();
        if copies > 1 {
            // Up: a group reading 0..01 becomes all ones. Down: 1..10 becomes all zeros.
            let lo = group * copies;
            let lits: Vec<String> = (lo..last)
                .map(|x| {
                    let want_one = if up { x == lo } else { x != lo };
                    b.lit(&scope, &t[x], want_one)
                })
                .collect();
            let hit = b.and(&scope, lits);
            next = if up {
                b.or(&scope, vec![next, hit])
            } else {
                let miss = b.not(&scope, &hit);
                b.and(&scope, vec![next, miss])
            };
        }
        if c.saturate {
            let lits: Vec<String> = q.iter().map(|n| b.lit(&scope, n, up)).collect();
            let at_end = b.and(&scope, lits);
            next = b.mux(&scope, &at_end, &next, &q[m]);
        }
        b.nl.ffs.push(FlipFlop {
            name: q[m].clone(),
            q: q[m].clone(),
            d: next,
            clk: cx.opts.clk.clone(),
            rst: Some(cx.opts.rst.clone()),
            rst_val: false,
            en: en.clone(),
        });
    }
    truth.counters.insert(c.name.clone(), q);
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Part {
    Value,
    Carry,
    Half,
}

struct WordEval<'c, 'a> {
    cx: &'c mut Ctx<'a>,
    scope: String,
    width: usize,
    memo: HashMap<(usize, usize, Part), String>,
}

impl WordEval<'_, '_> {
    fn bit(&mut self, e: &WordExpr, j: usize) -> String {
        let key = (e as *const WordExpr as usize, j, Part::Value);
        if let Some(n) = self.memo.get(&key) {
            return n.clone();
        }
        let scope = self.scope.clone();
        let n = match e {
            WordExpr::Ref(name) => {
                if let Some(w) = self.cx.dp.word_inputs.iter().find(|w| &w.name == name) {
                    if j < w.width {
                        format!("{name}[{j}]")
                    } else {
                        self.cx.b.konst(false)
                    }
                } else {
                    let (w, c) = self.cx.reg_width(name).expect("validated reference");
                    if j < w {
                        reg_bit_name(&self.cx.opts.name_prefix, name, j * c)
                    } else {
                        self.cx.b.konst(false)
                    }
                }
            }
            WordExpr::Const(v) => self.cx.b.konst(j < 64 && v >> j & 1 == 1),
            WordExpr::Xor(a, b) => {
                let (x, y) = (self.bit(a, j), self.bit(b, j));
                self.cx.b.xor(&scope, vec![x, y])
            }
            WordExpr::And(a, b) => {
                let (x, y) = (self.bit(a, j), self.bit(b, j));
                self.cx.b.gate(&scope, GateKind::And, vec![x, y])
            }
            WordExpr::Add(a, b) => {
                let half = self.half(e, a, b, j);
                if j == 0 {
                    half
                } else {
                    let c = self.carry(e, a, b, j);
                    self.cx.b.xor(&scope, vec![half, c])
                }
            }
            WordExpr::Shl(a, k) => {
                if j >= *k {
                    self.bit(a, j - k)
                } else {
                    self.cx.b.konst(false)
                }
            }
            WordExpr::Rotl(a, k) => {
                let w = self.width;
                self.bit(a, (j + w - k % w) % w)
            }
        };
        self.memo.insert(key, n.clone());
        n
    }

    fn half(&mut self, e: &WordExpr, a: &WordExpr, b: &WordExpr, j: usize) -> String {
        let key = (e as *const WordExpr as usize, j, Part::Half);
        if let Some(n) = self.memo.get(&key) {
            return n.clone();
        }
        let (x, y) = (self.bit(a, j), self.bit(b, j));
        let n = self.cx.b.xor(&self.scope.clone(), vec![x, y]);
        self.memo.insert(key, n.clone());
        n
    }

    /// Carry into bit `j >= 1` of a ripple adder.
    fn carry(&mut self, e: &WordExpr, a: &WordExpr, b: &WordExpr, j: usize) -> String {
        let key = (e as *const WordExpr as usize, j, Part::Carry);
        if let Some(n) = self.memo.get(&key) {
            return n.clone();
        }
        let scope = self.scope.clone();
        let (x, y) = (self.bit(a, j - 1), self.bit(b, j - 1));
        let gen = self.cx.b.gate(&scope, GateKind::And, vec![x, y]);
        let n = if j == 1 {
            gen
        } else {
            let c = self.carry(e, a, b, j - 1);
            let h = self.half(e, a, b, j - 1);
            let prop = self.cx.b.gate(&scope, GateKind::And, vec![c, h]);
            self.cx.b.or(&scope, vec![gen, prop])
        };
        self.memo.insert(key, n.clone());
        n
    }
}

fn synth_reg(cx: &mut Ctx<'_>, r: &DataReg, truth: &mut GroundTruth) {
    let p = cx.p().to_string();
    let en = r.enable.as_deref().map(|e| cx.signal_global(e));
    let mut names = Vec::with_capacity(r.width);
    for j in 0..r.width {
        let name = reg_bit_name(&p, &r.name, j);
        let mut ev = WordEval {
            cx: &mut *cx,
            scope: name.clone(),
            width: r.width,
            memo: HashMap::new(),
        };
        let mut d = ev.bit(&r.update, j);
        if let Some(l) = &r.load {
            let src = ev.bit(&l.source, j);
            let sel = ev.cx.signal_in(&name, &l.select);
            d = ev.cx.b.mux(&name, &sel, &d, &src);
        }
        cx.b.nl.ffs.push(FlipFlop {
            name: name.clone(),
            q: name.clone(),
            d,
            clk: cx.opts.clk.clone(),
            rst: r.reset.then(|| cx.opts.rst.clone()),
            rst_val: false,
            en: en.clone(),
        });
        names.push(name);
    }
    truth.data.insert(r.name.clone(), names);
}

#[cfg(test)]
mod tests;
