// SPDX-License-Identifier: Apache-2.0

//! TOML design documents.
//!
//! ```toml
//! [fsm]
//! name = "ctrl"
//! states = ["IDLE", "RUN"]
//! encoding = "binary"        # binary | one_hot | explicit
//! inputs = ["go"]
//! reset = "IDLE"
//! outputs = ["busy"]
//! [fsm.moore]
//! RUN = "1"                  # one character per output, in `outputs` order
//! [[fsm.transitions]]
//! from = "IDLE"
//! to = "RUN"
//! guard = { go = 1 }
//!
//! [datapath]
//! word_inputs = [{ name = "din", width = 8 }]
//! [[datapath.counters]]
//! name = "cnt"
//! width = 4
//! enable = "busy"
//! [[datapath.regs]]
//! name = "acc"
//! width = 8
//! update = "add(rotl(acc,1),din)"
//! ```
//!
//! Explicit codes go in `[fsm.codes]` as most-significant-first strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spec::{
    code_str, parse_code, Counter, DataReg, DatapathSpec, Direction, Encoding, FsmSpec, Load,
    Transition, WordExpr, WordInput,
};
use super::SynthError;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignDoc {
    fsm: FsmDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datapath: Option<DpDoc>,
}

#[derive(Serialize, Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum EncDoc {
    #[default]
    Binary,
    OneHot,
    Explicit,
}

fn default_name() -> String {
    "top".into()
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FsmDoc {
    #[serde(default = "default_name")]
    name: String,
    states: Vec<String>,
    #[serde(default)]
    encoding: EncDoc,
    #[serde(default)]
    inputs: Vec<String>,
    reset: String,
    #[serde(default)]
    outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    codes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    moore: BTreeMap<String, String>,
    #[serde(default)]
    transitions: Vec<TransDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransDoc {
    from: String,
    to: String,
    #[serde(default)]
    guard: BTreeMap<String, u8>,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DpDoc {
    #[serde(default)]
    word_inputs: Vec<WordDoc>,
    #[serde(default)]
    counters: Vec<CounterDoc>,
    #[serde(default)]
    regs: Vec<RegDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    wiring: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordDoc {
    name: String,
    width: usize,
}

#[derive(Serialize, Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum DirDoc {
    #[default]
    Up,
    Down,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterDoc {
    name: String,
    width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    enable: Option<String>,
    #[serde(default)]
    direction: DirDoc,
    #[serde(default)]
    replicas: usize,
    #[serde(default)]
    saturate: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadDoc {
    select: String,
    source: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegDoc {
    name: String,
    width: usize,
    update: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    enable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    load: Option<LoadDoc>,
    #[serde(default = "yes")]
    reset: bool,
}

fn bits_of(s: &str, what: &str) -> Result<Vec<bool>, SynthError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(SynthError::Doc(format!(
                "{what}: expected 0/1 string, got `{s}`"
            ))),
        })
        .collect()
}

/// Parses a TOML design document.
pub fn parse_design(text: &str) -> Result<(FsmSpec, DatapathSpec), SynthError> {
    let doc: DesignDoc = toml::from_str(text).map_err(|e| SynthError::Doc(e.to_string()))?;
    let f = doc.fsm;
    let encoding = match f.encoding {
        EncDoc::Binary => Encoding::Binary,
        EncDoc::OneHot => Encoding::OneHot,
        EncDoc::Explicit => Encoding::Explicit(
            f.codes
                .iter()
                .map(|(s, c)| {
                    parse_code(c)
                        .map(|code| (s.clone(), code))
                        .ok_or_else(|| SynthError::Doc(format!("bad code `{c}` for `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        ),
    };
    if f.encoding != EncDoc::Explicit && !f.codes.is_empty() {
        return Err(SynthError::Doc(
            "`codes` requires encoding = \"explicit\"".into(),
        ));
    }
    let mut transitions = Vec::with_capacity(f.transitions.len());
    for t in f.transitions {
        let guard = t
            .guard
            .into_iter()
            .map(|(k, v)| match v {
                0 | 1 => Ok((k, v == 1)),
                _ => Err(SynthError::Doc(format!(
                    "guard literal `{k}` must be 0 or 1"
                ))),
            })
            .collect::<Result<_, _>>()?;
        transitions.push(Transition {
            from: t.from,
            guard,
            to: t.to,
        });
    }
    let moore = f
        .moore
        .iter()
        .map(|(s, v)| Ok((s.clone(), bits_of(v, s)?)))
        .collect::<Result<_, SynthError>>()?;
    let fsm = FsmSpec {
        name: f.name,
        states: f.states,
        encoding,
        inputs: f.inputs,
        reset: f.reset,
        transitions,
        outputs: f.outputs,
        moore,
    };
    let d = doc.datapath.unwrap_or_default();
    let dp = DatapathSpec {
        counters: d
            .counters
            .into_iter()
            .map(|c| Counter {
                name: c.name,
                width: c.width,
                enable: c.enable,
                direction: match c.direction {
                    DirDoc::Up => Direction::Up,
                    DirDoc::Down => Direction::Down,
                },
                replicas: c.replicas,
                saturate: c.saturate,
            })
            .collect(),
        regs: d
            .regs
            .into_iter()
            .map(|r| {
                Ok(DataReg {
                    name: r.name,
                    width: r.width,
                    update: WordExpr::parse(&r.update)?,
                    enable: r.enable,
                    load: r
                        .load
                        .map(|l| {
                            Ok::<_, SynthError>(Load {
                                select: l.select,
                                source: WordExpr::parse(&l.source)?,
                            })
                        })
                        .transpose()?,
                    reset: r.reset,
                })
            })
            .collect::<Result<_, SynthError>>()?,
        word_inputs: d
            .word_inputs
            .into_iter()
            .map(|w| WordInput {
                name: w.name,
                width: w.width,
            })
            .collect(),
        wiring: d.wiring,
    };
    fsm.validate()?;
    dp.validate(&fsm)?;
    Ok((fsm, dp))
}

/// Writes a design document that [`parse_design`] reads back unchanged.
pub fn write_design(fsm: &FsmSpec, dp: &DatapathSpec) -> String {
    let (encoding, codes) = match &fsm.encoding {
        Encoding::Binary => (EncDoc::Binary, BTreeMap::new()),
        Encoding::OneHot => (EncDoc::OneHot, BTreeMap::new()),
        Encoding::Explicit(c) => (
            EncDoc::Explicit,
            c.iter().map(|(s, v)| (s.clone(), code_str(v))).collect(),
        ),
    };
    let bits = |v: &[bool]| {
        v.iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect::<String>()
    };
    let doc = DesignDoc {
        fsm: FsmDoc {
            name: fsm.name.clone(),
            states: fsm.states.clone(),
            encoding,
            inputs: fsm.inputs.clone(),
            reset: fsm.reset.clone(),
            outputs: fsm.outputs.clone(),
            codes,
            moore: fsm
                .moore
                .iter()
                .map(|(s, v)| (s.clone(), bits(v)))
                .collect(),
            transitions: fsm
                .transitions
                .iter()
                .map(|t| TransDoc {
                    from: t.from.clone(),
                    to: t.to.clone(),
                    guard: t
                        .guard
                        .iter()
                        .map(|(k, &v)| (k.clone(), u8::from(v)))
                        .collect(),
                })
                .collect(),
        },
        datapath: (dp != &DatapathSpec::default()).then(|| DpDoc {
            word_inputs: dp
                .word_inputs
                .iter()
                .map(|w| WordDoc {
                    name: w.name.clone(),
                    width: w.width,
                })
                .collect(),
            counters: dp
                .counters
                .iter()
                .map(|c| CounterDoc {
                    name: c.name.clone(),
                    width: c.width,
                    enable: c.enable.clone(),
                    direction: match c.direction {
                        Direction::Up => DirDoc::Up,
                        Direction::Down => DirDoc::Down,
                    },
                    replicas: c.replicas,
                    saturate: c.saturate,
                })
                .collect(),
            regs: dp
                .regs
                .iter()
                .map(|r| RegDoc {
                    name: r.name.clone(),
                    width: r.width,
                    update: r.update.to_string(),
                    enable: r.enable.clone(),
                    load: r.load.as_ref().map(|l| LoadDoc {
                        select: l.select.clone(),
                        source: l.source.to_string(),
                    }),
                    reset: r.reset,
                })
                .collect(),
            wiring: dp.wiring.clone(),
        }),
    };
    toml::to_string(&doc).expect("design documents always serialize")
}
