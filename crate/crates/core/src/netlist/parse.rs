// SPDX-License-Identifier: Apache-2.0

//! Line-oriented netlist text format.
//!
//! ```text
//! module <name>
//! input <net>
//! output <net>
//! const <net> <0|1>
//! gate <KIND> <name> <out> <in1> [in2 ...]
//! dff <name> q=<net> d=<net> clk=<net> [rst=<net> rstval=<0|1>] [en=<net>]
//! ```
//!
//! `#` starts a comment. Statement order is free; [`Netlist::to_text`] emits
//! the canonical order (module, inputs, constants, gates, FFs, outputs, each
//! block sorted by name).

use std::fmt::Write;

use super::{is_identifier, FlipFlop, Gate, GateKind, Netlist, NetlistError};

fn syntax(line: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn ident(line: usize, tok: &str) -> Result<String, NetlistError> {
    if is_identifier(tok) {
        Ok(tok.to_string())
    } else {
        Err(syntax(line, format!("invalid identifier `{tok}`")))
    }
}

fn bit(line: usize, tok: &str) -> Result<bool, NetlistError> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(syntax(line, format!("expected 0 or 1, found `{tok}`"))),
    }
}

/// Parses netlist text and validates the result.
pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
    let mut nl = Netlist::new("top");
    let mut named = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = toks.split_first() else {
            continue;
        };
        match head {
            "module" => {
                if named || rest.len() != 1 {
                    return Err(syntax(line, "expected a single `module <name>`"));
                }
                nl.name = ident(line, rest[0])?;
                named = true;
            }
            "input" | "output" => {
                if rest.len() != 1 {
                    return Err(syntax(line, format!("expected `{head} <net>`")));
                }
                let net = ident(line, rest[0])?;
                if head == "input" {
                    nl.inputs.push(net);
                } else {
                    nl.outputs.push(net);
                }
            }
            "const" => {
                if rest.len() != 2 {
                    return Err(syntax(line, "expected `const <net> <0|1>`"));
                }
                let net = ident(line, rest[0])?;
                let v = bit(line, rest[1])?;
                if nl.constants.insert(net.clone(), v).is_some() {
                    return Err(NetlistError::MultipleDrivers { net });
                }
            }
            "gate" => {
                if rest.len() < 4 {
                    return Err(syntax(line, "expected `gate <KIND> <name> <out> <in>...`"));
                }
                let kind: GateKind = rest[0].parse().map_err(|e: String| syntax(line, e))?;
                let ins = rest[3..]
                    .iter()
                    .map(|t| ident(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if !kind.arity_ok(ins.len()) {
                    return Err(syntax(
                        line,
                        format!("{kind} gate cannot take {} inputs", ins.len()),
                    ));
                }
                nl.gates.push(Gate {
                    name: ident(line, rest[1])?,
                    kind,
                    out: ident(line, rest[2])?,
                    ins,
                });
            }
            "dff" => {
                if rest.is_empty() {
                    return Err(syntax(line, "expected `dff <name> q=... d=... clk=...`"));
                }
                let name = ident(line, rest[0])?;
                let (mut q, mut d, mut clk, mut rst, mut rstval, mut en) =
                    (None, None, None, None, None, None);
                for kv in &rest[1..] {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| syntax(line, format!("expected key=value, found `{kv}`")))?;
                    let slot = match k {
                        "q" => &mut q,
                        "d" => &mut d,
                        "clk" => &mut clk,
                        "rst" => &mut rst,
                        "en" => &mut en,
                        "rstval" => {
                            if rstval.replace(bit(line, v)?).is_some() {
                                return Err(syntax(line, "duplicate key `rstval`"));
                            }
                            continue;
                        }
                        _ => return Err(syntax(line, format!("unknown dff key `{k}`"))),
                    };
                    if slot.replace(ident(line, v)?).is_some() {
                        return Err(syntax(line, format!("duplicate key `{k}`")));
                    }
                }
                let missing = |k: &str| syntax(line, format!("dff `{name}` is missing `{k}=`"));
                if rst.is_some() != rstval.is_some() {
                    return Err(syntax(line, "`rst=` and `rstval=` must appear together"));
                }
                nl.ffs.push(FlipFlop {
                    q: q.ok_or_else(|| missing("q"))?,
                    d: d.ok_or_else(|| missing("d"))?,
                    clk: clk.ok_or_else(|| missing("clk"))?,
                    rst,
                    rst_val: rstval.unwrap_or(false),
                    en,
                    name,
                });
            }
            other => return Err(syntax(line, format!("unknown statement `{other}`"))),
        }
    }
    nl.validate()?;
    Ok(nl)
}

impl Netlist {
    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let nl = self.canonical();
        let mut s = String::new();
        let _ = writeln!(s, "module {}", nl.name);
        for i in &nl.inputs {
            let _ = writeln!(s, "input {i}");
        }
        for (c, v) in &nl.constants {
            let _ = writeln!(s, "const {c} {}", u8::from(*v));
        }
        for g in &nl.gates {
            let _ = writeln!(
                s,
                "gate {} {} {} {}",
                g.kind,
                g.name,
                g.out,
                g.ins.join(" ")
            );
        }
        for f in &nl.ffs {
            let _ = write!(s, "dff {} q={} d={} clk={}", f.name, f.q, f.d, f.clk);
            if let Some(r) = &f.rst {
                let _ = write!(s, " rst={r} rstval={}", u8::from(f.rst_val));
            }
            if let Some(e) = &f.en {
                let _ = write!(s, " en={e}");
            }
            s.push('\n');
        }
        for o in &nl.outputs {
            let _ = writeln!(s, "output {o}");
        }
        s
    }
}
