// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::cube::{overlaps, satisfies, Cube};
use super::SynthError;

/// A state code, least significant bit first.
pub type Code = Vec<bool>;

/// Formats a code most significant bit first, e.g. `[true, false, false]` as `001`.
pub fn code_str(code: &[bool]) -> String {
    code.iter()
        .rev()
        .map(|&b| if b { '1' } else { '0' })
        .collect()
}

/// Inverse of [`code_str`].
pub fn parse_code(s: &str) -> Option<Code> {
    s.chars()
        .rev()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn binary_width(k: usize) -> usize {
    let mut w = 1;
    while (1usize << w) < k {
        w += 1;
    }
    w
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encoding {
    Binary,
    OneHot,
    Explicit(BTreeMap<String, Code>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: String,
    pub guard: Cube,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsmSpec {
    pub name: String,
    pub states: Vec<String>,
    pub encoding: Encoding,
    pub inputs: Vec<String>,
    pub reset: String,
    pub transitions: Vec<Transition>,
    /// Moore output names.
    pub outputs: Vec<String>,
    /// Per-state output values aligned with `outputs`; missing states output 0.
    pub moore: BTreeMap<String, Vec<bool>>,
}

impl FsmSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.states.is_empty() {
            return Err(SynthError::Invalid("FSM has no states".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                return Err(SynthError::Invalid(format!("duplicate state `{s}`")));
            }
        }
        let known = |s: &String| -> Result<(), SynthError> {
            if seen.contains(s) {
                Ok(())
            } else {
                Err(SynthError::UnknownState(s.clone()))
            }
        };
        known(&self.reset)?;
        let inputs: HashSet<&String> = self.inputs.iter().collect();
        if inputs.len() != self.inputs.len() {
            return Err(SynthError::Invalid("duplicate FSM input".into()));
        }
        for t in &self.transitions {
            known(&t.from)?;
            known(&t.to)?;
            if let Some(i) = t.guard.keys().find(|i| !inputs.contains(i)) {
                return Err(SynthError::UnknownSignal(i.clone()));
            }
        }
        for (s, v) in &self.moore {
            known(s)?;
            if v.len() != self.outputs.len() {
                return Err(SynthError::Invalid(format!(
                    "state `{s}` has {} output bits, expected {}",
                    v.len(),
                    self.outputs.len()
                )));
            }
        }
        if let Encoding::Explicit(codes) = &self.encoding {
            let mut width = None;
            let mut distinct = BTreeSet::new();
            for s in &self.states {
                let c = codes
                    .get(s)
                    .ok_or_else(|| SynthError::Invalid(format!("state `{s}` has no code")))?;
                if c.is_empty() || width.is_some_and(|w| w != c.len()) {
                    return Err(SynthError::Invalid(
                        "explicit codes must share a nonzero width".into(),
                    ));
                }
                width = Some(c.len());
                if !distinct.insert(c) {
                    return Err(SynthError::DuplicateCode(code_str(c)));
                }
            }
            if let Some(s) = codes.keys().find(|s| !seen.contains(s)) {
                return Err(SynthError::UnknownState(s.clone()));
            }
        }
        self.check_guards()
    }

    /// Rejects overlapping guards that leave the same state toward different states.
    pub fn check_guards(&self) -> Result<(), SynthError> {
        for (i, a) in self.transitions.iter().enumerate() {
            for b in &self.transitions[i + 1..] {
                if a.from == b.from && a.to != b.to && overlaps(&a.guard, &b.guard) {
                    return Err(SynthError::Ambiguous {
                        state: a.from.clone(),
                        first: a.to.clone(),
                        second: b.to.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    /// Outgoing transitions of `s` in declaration order.
    pub fn outgoing<'a>(&'a self, s: &'a str) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| t.from == s)
    }

    pub fn moore_of(&self, s: &str) -> Vec<bool> {
        self.moore
            .get(s)
            .cloned()
            .unwrap_or_else(|| vec![false; self.outputs.len()])
    }

    /// First-match successor of `s` under `inputs`; unmatched inputs stay.
    pub fn next_state<'a>(&'a self, s: &'a str, inputs: &BTreeMap<String, bool>) -> &'a str {
        self.outgoing(s)
            .find(|t| satisfies(&t.guard, inputs))
            .map_or(s, |t| t.to.as_str())
    }

    /// States reachable from reset, in discovery order.
    pub fn reachable(&self) -> Vec<String> {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut order = vec![self.reset.clone()];
        seen.insert(self.reset.clone());
        let mut i = 0;
        while i < order.len() {
            let s = order[i].clone();
            for t in self.outgoing(&s) {
                if seen.insert(t.to.clone()) {
                    order.push(t.to.clone());
                }
            }
            i += 1;
        }
        order
    }
}

/// Codes per state, in state order.
pub fn encode(fsm: &FsmSpec) -> Result<Vec<Code>, SynthError> {
    let k = fsm.states.len();
    match &fsm.encoding {
        Encoding::Binary => {
            let w = binary_width(k);
            Ok((0..k)
                .map(|i| (0..w).map(|b| i >> b & 1 == 1).collect())
                .collect())
        }
        // State i sets the i-th bit counted from the most significant end.
        Encoding::OneHot => Ok((0..k)
            .map(|i| (0..k).map(|b| b == k - 1 - i).collect())
            .collect()),
        Encoding::Explicit(codes) => {
            let mut seen = BTreeSet::new();
            fsm.states
                .iter()
                .map(|s| {
                    let c = codes
                        .get(s)
                        .cloned()
                        .ok_or_else(|| SynthError::Invalid(format!("state `{s}` has no code")))?;
                    if !seen.insert(c.clone()) {
                        return Err(SynthError::DuplicateCode(code_str(&c)));
                    }
                    Ok(c)
                })
                .collect()
        }
    }
}

/// Behavioral reference: the state sequence visited under `trace`, starting
/// with the reset state.
pub fn simulate_spec(fsm: &FsmSpec, trace: &[BTreeMap<String, bool>]) -> Vec<String> {
    let mut cur = fsm.reset.as_str();
    let mut out = vec![cur.to_string()];
    for v in trace {
        cur = fsm.next_state(cur, v);
        out.push(cur.to_string());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counter {
    pub name: String,
    pub width: usize,
    /// An FSM output or primary input name.
    pub enable: Option<String>,
    pub direction: Direction,
    /// Added copies per value bit; the register holds `width * (1 + replicas)` FFs.
    pub replicas: usize,
    /// Hold at the terminal value instead of wrapping.
    pub saturate: bool,
}

/// Word-level update expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordExpr {
    Ref(String),
    Const(u64),
    Xor(Box<WordExpr>, Box<WordExpr>),
    And(Box<WordExpr>, Box<WordExpr>),
    Add(Box<WordExpr>, Box<WordExpr>),
    Shl(Box<WordExpr>, usize),
    Rotl(Box<WordExpr>, usize),
}

impl WordExpr {
    pub fn refs(&self, out: &mut Vec<String>) {
        match self {
            WordExpr::Ref(n) => out.push(n.clone()),
            WordExpr::Const(_) => {}
            WordExpr::Xor(a, b) | WordExpr::And(a, b) | WordExpr::Add(a, b) => {
                a.refs(out);
                b.refs(out);
            }
            WordExpr::Shl(a, _) | WordExpr::Rotl(a, _) => a.refs(out),
        }
    }

    /// Parses `add(rotl(acc,1),din)`-style text.
    pub fn parse(text: &str) -> Result<WordExpr, SynthError> {
        let toks = tokenize(text)?;
        let mut pos = 0;
        let e = parse_expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(SynthError::Expr(format!("trailing input in `{text}`")));
        }
        Ok(e)
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Ref(n) => write!(f, "{n}"),
            WordExpr::Const(v) => write!(f, "{v}"),
            WordExpr::Xor(a, b) => write!(f, "xor({a},{b})"),
            WordExpr::And(a, b) => write!(f, "and({a},{b})"),
            WordExpr::Add(a, b) => write!(f, "add({a},{b})"),
            WordExpr::Shl(a, k) => write!(f, "shl({a},{k})"),
            WordExpr::Rotl(a, k) => write!(f, "rotl({a},{k})"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>, SynthError> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' | ',' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => cur.push(c),
            _ => return Err(SynthError::Expr(format!("unexpected `{c}` in `{text}`"))),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    Ok(toks)
}

fn parse_expr(toks: &[String], pos: &mut usize) -> Result<WordExpr, SynthError> {
    let tok = toks
        .get(*pos)
        .ok_or_else(|| SynthError::Expr("unexpected end of expression".into()))?
        .clone();
    *pos += 1;
    if let Some(v) = parse_number(&tok) {
        return Ok(WordExpr::Const(v));
    }
    if toks.get(*pos).map(String::as_str) != Some("(") {
        return Ok(WordExpr::Ref(tok));
    }
    *pos += 1;
    let a = parse_expr(toks, pos)?;
    expect(toks, pos, ",")?;
    let e = match tok.as_str() {
        "xor" | "and" | "add" => {
            let b = Box::new(parse_expr(toks, pos)?);
            let a = Box::new(a);
            match tok.as_str() {
                "xor" => WordExpr::Xor(a, b),
                "and" => WordExpr::And(a, b),
                _ => WordExpr::Add(a, b),
            }
        }
        "shl" | "rotl" => {
            let k = toks
                .get(*pos)
                .and_then(|t| parse_number(t))
                .ok_or_else(|| SynthError::Expr(format!("`{tok}` needs a constant amount")))?
                as usize;
            *pos += 1;
            if tok == "shl" {
                WordExpr::Shl(Box::new(a), k)
            } else {
                WordExpr::Rotl(Box::new(a), k)
            }
        }
        _ => return Err(SynthError::Expr(format!("unknown operator `{tok}`"))),
    };
    expect(toks, pos, ")")?;
    Ok(e)
}

fn expect(toks: &[String], pos: &mut usize, want: &str) -> Result<(), SynthError> {
    if toks.get(*pos).map(String::as_str) == Some(want) {
        *pos += 1;
        Ok(())
    } else {
        Err(SynthError::Expr(format!("expected `{want}`")))
    }
}

fn parse_number(tok: &str) -> Option<u64> {
    if let Some(hex) = tok.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else if tok.chars().next()?.is_ascii_digit() {
        tok.parse().ok()
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Load {
    pub select: String,
    pub source: WordExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataReg {
    pub name: String,
    pub width: usize,
    pub update: WordExpr,
    pub enable: Option<String>,
    /// When present, bit i loads `source` while `select` is 1.
    pub load: Option<Load>,
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordInput {
    pub name: String,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatapathSpec {
    pub counters: Vec<Counter>,
    pub regs: Vec<DataReg>,
    pub word_inputs: Vec<WordInput>,
    /// Output port name to register name (`state` for the FSM state).
    pub wiring: BTreeMap<String, String>,
}

impl DatapathSpec {
    pub fn validate(&self, fsm: &FsmSpec) -> Result<(), SynthError> {
        let mut words: HashSet<&str> = HashSet::new();
        for w in &self.word_inputs {
            if w.width == 0 || !words.insert(&w.name) {
                return Err(SynthError::Invalid(format!("bad word input `{}`", w.name)));
            }
        }
        let mut regs: HashSet<&str> = HashSet::new();
        for c in &self.counters {
            if c.width == 0 || !regs.insert(&c.name) {
                return Err(SynthError::Invalid(format!("bad counter `{}`", c.name)));
            }
        }
        for r in &self.regs {
            if r.width == 0 || !regs.insert(&r.name) {
                return Err(SynthError::Invalid(format!("bad register `{}`", r.name)));
            }
        }
        if regs.contains("state") {
            return Err(SynthError::Invalid("`state` is reserved".into()));
        }
        let signal_ok =
            |s: &str| fsm.outputs.iter().any(|o| o == s) || fsm.inputs.iter().any(|i| i == s);
        for sig in self
            .counters
            .iter()
            .filter_map(|c| c.enable.as_deref())
            .chain(self.regs.iter().filter_map(|r| r.enable.as_deref()))
            .chain(
                self.regs
                    .iter()
                    .filter_map(|r| r.load.as_ref().map(|l| l.select.as_str())),
            )
        {
            if !signal_ok(sig) {
                return Err(SynthError::UnknownSignal(sig.to_string()));
            }
        }
        for r in &self.regs {
            let mut refs = Vec::new();
            r.update.refs(&mut refs);
            if let Some(l) = &r.load {
                l.source.refs(&mut refs);
            }
            if let Some(bad) = refs
                .iter()
                .find(|n| !regs.contains(n.as_str()) && !words.contains(n.as_str()))
            {
                return Err(SynthError::UnknownSignal(bad.clone()));
            }
        }
        for (port, src) in &self.wiring {
            if src != "state" && !regs.contains(src.as_str()) {
                return Err(SynthError::Invalid(format!(
                    "port `{port}` wired to unknown `{src}`"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_states() -> FsmSpec {
        FsmSpec {
            name: "m".into(),
            states: (1..=6).map(|i| format!("S_{i}")).collect(),
            encoding: Encoding::Binary,
            inputs: vec![],
            reset: "S_1".into(),
            transitions: vec![],
            outputs: vec![],
            moore: BTreeMap::new(),
        }
    }

    #[test]
    fn binary_codes_in_list_order() {
        let codes = encode(&six_states()).unwrap();
        let s: Vec<String> = codes.iter().map(|c| code_str(c)).collect();
        assert_eq!(s, ["000", "001", "010", "011", "100", "101"]);
    }

    #[test]
    fn one_hot_codes() {
        let mut f = six_states();
        f.states.truncate(3);
        f.encoding = Encoding::OneHot;
        let s: Vec<String> = encode(&f).unwrap().iter().map(|c| code_str(c)).collect();
        assert_eq!(s, ["100", "010", "001"]);
    }

    #[test]
    fn explicit_duplicate_rejected() {
        let mut f = six_states();
        f.states.truncate(2);
        f.encoding = Encoding::Explicit(
            [("S_1", "01"), ("S_2", "01")]
                .iter()
                .map(|(s, c)| (s.to_string(), parse_code(c).unwrap()))
                .collect(),
        );
        assert!(matches!(f.validate(), Err(SynthError::DuplicateCode(_))));
    }

    #[test]
    fn expression_round_trip() {
        let e = WordExpr::parse("add(rotl(acc, 1), xor(din, 0x3))").unwrap();
        assert_eq!(e.to_string(), "add(rotl(acc,1),xor(din,3))");
        assert_eq!(WordExpr::parse(&e.to_string()).unwrap(), e);
        assert!(WordExpr::parse("mul(a,b)").is_err());
    }

    #[test]
    fn toggle_trace() {
        let mut f = six_states();
        f.states = vec!["A".into(), "B".into()];
        f.reset = "A".into();
        f.inputs = vec!["t".into()];
        let g: Cube = [("t".to_string(), true)].into_iter().collect();
        f.transitions = vec![
            Transition {
                from: "A".into(),
                guard: g.clone(),
                to: "B".into(),
            },
            Transition {
                from: "B".into(),
                guard: g,
                to: "A".into(),
            },
        ];
        let one: BTreeMap<String, bool> = [("t".to_string(), true)].into_iter().collect();
        assert_eq!(simulate_spec(&f, &[]), ["A"]);
        assert_eq!(simulate_spec(&f, &vec![one; 3]), ["A", "B", "A", "B"]);
    }
}
