// SPDX-License-Identifier: Apache-2.0

//! Decoy FSM generation, insertion and tuning.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ObfError;
use crate::graph::{control_signals, label_sccs, tarjan_scc, EdgeFilter, FfGraph, SccLabel};
use crate::netlist::{FlipFlop, Gate, GateKind, Netlist};
use crate::relic::{zscores, RelicParams};
use crate::synth::{synthesize, DatapathSpec, FsmSpec, GroundTruth, SynthOptions};

const MAX_ATTEMPTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttachMode {
    /// `t' = OR(t, AND(h, zero))` on design control nets, `zero` being a
    /// gate chain that always evaluates to 0.
    #[default]
    NeverActivatedOr,
    /// Honeypot outputs only drive unconnected marker buffers.
    StandaloneMarker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoneypotParams {
    pub mutation_seed: u64,
    pub n_transition_mutations: usize,
    pub n_output_mutations: usize,
    /// Honeypot input name to design input name.
    pub input_map: BTreeMap<String, String>,
    pub attach_mode: AttachMode,
    /// Prepended to every honeypot net and instance name.
    pub prefix: String,
    /// Control nets to attach to; `None` attaches to every MUX select and
    /// FF enable of the design.
    pub targets: Option<Vec<String>>,
}

impl Default for HoneypotParams {
    fn default() -> Self {
        HoneypotParams {
            mutation_seed: 0,
            n_transition_mutations: 2,
            n_output_mutations: 1,
            input_map: BTreeMap::new(),
            attach_mode: AttachMode::NeverActivatedOr,
            prefix: "hp_".into(),
            targets: None,
        }
    }
}

impl HoneypotParams {
    /// Maps every honeypot input to the design input of the same name.
    pub fn with_identity_inputs(mut self, names: impl IntoIterator<Item = String>) -> Self {
        self.input_map = names.into_iter().map(|n| (n.clone(), n)).collect();
        self
    }
}

/// Copy of `fsm` with seeded redirected transitions and flipped Moore bits.
/// Mutants with ambiguous guards or unreachable states are redrawn.
pub fn derive_honeypot(fsm: &FsmSpec, p: &HoneypotParams) -> Result<FsmSpec, ObfError> {
    let nt = fsm.transitions.len();
    if p.n_transition_mutations > nt {
        return Err(ObfError::MutationBudget {
            requested: p.n_transition_mutations,
            available: nt,
        });
    }
    let nbits = fsm.states.len() * fsm.outputs.len();
    if p.n_output_mutations > nbits {
        return Err(ObfError::OutputBudget {
            requested: p.n_output_mutations,
            available: nbits,
        });
    }
    let base = FsmSpec {
        name: format!("{}_hp", fsm.name),
        ..fsm.clone()
    };
    if p.n_transition_mutations == 0 && p.n_output_mutations == 0 {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.mutation_seed);
    let k = fsm.states.len();
    for _ in 0..MAX_ATTEMPTS {
        let mut hp = base.clone();
        for i in sample(&mut rng, nt, p.n_transition_mutations) {
            let cur = fsm.state_index(&hp.transitions[i].to).expect("valid FSM");
            if k > 1 {
                let pick = (cur + rng.gen_range(1..k)) % k;
                hp.transitions[i].to = fsm.states[pick].clone();
            }
        }
        let nout = fsm.outputs.len();
        for b in sample(&mut rng, nbits, p.n_output_mutations) {
            let s = &fsm.states[b / nout];
            let mut v = hp.moore_of(s);
            v[b % nout] = !v[b % nout];
            hp.moore.insert(s.clone(), v);
        }
        // A state that asserted an output keeps asserting one.
        let silenced = fsm
            .states
            .iter()
            .any(|st| fsm.moore_of(st).contains(&true) && !hp.moore_of(st).contains(&true));
        if hp.validate().is_ok() && hp.reachable().len() == k && !silenced {
            return Ok(hp);
        }
    }
    Err(ObfError::NoValidMutant(MAX_ATTEMPTS))
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub netlist: Netlist,
    pub truth: GroundTruth,
    /// Gates added beyond the honeypot's own logic.
    pub added_gates: Vec<String>,
    /// (design control net, honeypot net attached to it).
    pub attachments: Vec<(String, String)>,
}

impl Integration {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (t, h) in &self.attachments {
            let _ = writeln!(s, "attach {t} {h}");
        }
        for g in &self.added_gates {
            let _ = writeln!(s, "added {g}");
        }
        s
    }
}

/// Instantiates `hp` inside `nl` with prefixed names and attaches its
/// outputs according to `p.attach_mode`. `hp_sffs` are the honeypot's state
/// bits before prefixing.
pub fn integrate_honeypot(
    nl: &Netlist,
    truth: &GroundTruth,
    hp: &Netlist,
    hp_sffs: &[String],
    p: &HoneypotParams,
) -> Result<Integration, ObfError> {
    if hp.ffs.is_empty() {
        return Err(ObfError::EmptyHoneypot);
    }
    let mut rename: HashMap<&str, String> = HashMap::new();
    for i in &hp.inputs {
        let d = p
            .input_map
            .get(i)
            .ok_or_else(|| ObfError::InputMapIncomplete(i.clone()))?;
        if !nl.inputs.contains(d) {
            return Err(ObfError::UnknownTarget(d.clone()));
        }
        rename.insert(i, d.clone());
    }
    // Nets and instances live in separate namespaces.
    let mut nets: HashSet<String> = nl.driven_nets().into_iter().map(str::to_string).collect();
    let mut insts: HashSet<String> = nl
        .instance_names()
        .into_iter()
        .map(str::to_string)
        .collect();
    let claim = |set: &mut HashSet<String>, s: String| -> Result<String, ObfError> {
        if set.insert(s.clone()) {
            Ok(s)
        } else {
            Err(ObfError::NameCollision(s))
        }
    };
    let pre = &p.prefix;
    for n in hp
        .constants
        .keys()
        .chain(hp.gates.iter().map(|g| &g.out))
        .chain(hp.ffs.iter().map(|f| &f.q))
    {
        rename.insert(n, claim(&mut nets, format!("{pre}{n}"))?);
    }
    let net = |n: &str| rename[n].clone();
    let mut out = nl.clone();
    for (n, &v) in &hp.constants {
        out.constants.insert(net(n), v);
    }
    for g in &hp.gates {
        out.gates.push(Gate {
            name: claim(&mut insts, format!("{pre}{}", g.name))?,
            kind: g.kind,
            out: net(&g.out),
            ins: g.ins.iter().map(|i| net(i)).collect(),
        });
    }
    for f in &hp.ffs {
        out.ffs.push(FlipFlop {
            name: claim(&mut insts, format!("{pre}{}", f.name))?,
            q: net(&f.q),
            d: net(&f.d),
            clk: net(&f.clk),
            rst: f.rst.as_deref().map(net),
            rst_val: f.rst_val,
            en: f.en.as_deref().map(net),
        });
    }
    let sources: Vec<String> = if hp.outputs.is_empty() {
        hp.ffs.iter().map(|f| net(&f.q)).collect()
    } else {
        hp.outputs.iter().map(|o| net(o)).collect()
    };

    let mut added = Vec::new();
    let mut attachments = Vec::new();
    match p.attach_mode {
        AttachMode::StandaloneMarker => {
            for (j, h) in sources.iter().enumerate() {
                let m = claim(&mut nets, format!("{pre}marker{j}"))?;
                claim(&mut insts, m.clone())?;
                out.gates.push(Gate {
                    name: m.clone(),
                    kind: GateKind::Buf,
                    out: m.clone(),
                    ins: vec![h.clone()],
                });
                added.push(m);
                attachments.push((String::new(), h.clone()));
            }
        }
        AttachMode::NeverActivatedOr => {
            let targets: Vec<String> = match &p.targets {
                Some(t) => t.clone(),
                None => control_signals(nl).into_iter().collect(),
            };
            let known: HashSet<&str> = nl.driven_nets();
            let mut zero: HashMap<usize, String> = HashMap::new();
            let mut new_of: BTreeMap<String, String> = BTreeMap::new();
            if let Some(t) = targets.iter().find(|t| !known.contains(t.as_str())) {
                return Err(ObfError::UnknownTarget(t.clone()));
            }
            // Every target gets a source and every source a target.
            let count = if targets.is_empty() {
                0
            } else {
                targets.len().max(sources.len())
            };
            for k in 0..count {
                let t = &targets[k % targets.len()];
                let j = k % sources.len();
                let h = &sources[j];
                if k == j {
                    let n = claim(&mut nets, format!("{pre}z{j}_n"))?;
                    let a = claim(&mut nets, format!("{pre}z{j}_a"))?;
                    claim(&mut insts, n.clone())?;
                    claim(&mut insts, a.clone())?;
                    out.gates.push(Gate {
                        name: n.clone(),
                        kind: GateKind::Not,
                        out: n.clone(),
                        ins: vec![h.clone()],
                    });
                    out.gates.push(Gate {
                        name: a.clone(),
                        kind: GateKind::And,
                        out: a.clone(),
                        ins: vec![h.clone(), n.clone()],
                    });
                    added.extend([n, a.clone()]);
                    zero.insert(j, a);
                }
                let and = claim(&mut nets, format!("{pre}att{k}_and"))?;
                let or = claim(&mut nets, format!("{pre}att{k}_or"))?;
                claim(&mut insts, and.clone())?;
                claim(&mut insts, or.clone())?;
                out.gates.push(Gate {
                    name: and.clone(),
                    kind: GateKind::And,
                    out: and.clone(),
                    ins: vec![h.clone(), zero[&j].clone()],
                });
                out.gates.push(Gate {
                    name: or.clone(),
                    kind: GateKind::Or,
                    out: or.clone(),
                    ins: vec![new_of.get(t).unwrap_or(t).clone(), and.clone()],
                });
                added.extend([and, or.clone()]);
                new_of.insert(t.clone(), or);
                attachments.push((t.clone(), h.clone()));
            }
            for g in out.gates.iter_mut().take(nl.gates.len()) {
                if g.kind == GateKind::Mux {
                    if let Some(n) = new_of.get(&g.ins[0]) {
                        g.ins[0] = n.clone();
                    }
                }
            }
            for f in out.ffs.iter_mut().take(nl.ffs.len()) {
                if let Some(n) = f.en.as_ref().and_then(|e| new_of.get(e)) {
                    f.en = Some(n.clone());
                }
            }
        }
    }
    out.validate()?;
    let mut truth = truth.clone();
    truth.hp_sffs = hp_sffs.iter().map(|s| net(s)).collect();
    Ok(Integration {
        netlist: out,
        truth,
        added_gates: added,
        attachments,
    })
}

/// Highest score inside the honeypot SCC and inside the FSM SCC. When a
/// labeled SCC is missing, the corresponding ground-truth FFs are used.
pub fn hp_margin(
    nl: &Netlist,
    truth: &GroundTruth,
    relic: &RelicParams,
) -> Result<(f64, f64), ObfError> {
    let table = zscores(nl, relic)?;
    let mut rep = tarjan_scc(&FfGraph::build(nl), EdgeFilter::Combinational, false);
    label_sccs(&mut rep, truth);
    let over = |label: SccLabel, fallback: &[String]| {
        let members: Vec<String> = match rep.with_label(label) {
            Some(i) => rep.sccs[i].clone(),
            None => fallback.to_vec(),
        };
        table.max_over(&members).unwrap_or(f64::NEG_INFINITY)
    };
    Ok((
        over(SccLabel::FsmHp, &truth.hp_sffs),
        over(SccLabel::Fsm, &truth.sffs),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneStep {
    pub seed: u64,
    pub hp_max_z: f64,
    pub fsm_max_z: f64,
}

impl TuneStep {
    pub fn margin(&self) -> f64 {
        self.hp_max_z - self.fsm_max_z
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub params: HoneypotParams,
    pub success: bool,
    pub steps: Vec<TuneStep>,
    pub hp_fsm: FsmSpec,
    pub integration: Integration,
}

impl TuneOutcome {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, st) in self.steps.iter().enumerate() {
            let _ = writeln!(
                s,
                "iter {i} seed {} hp_max_z {:.6} fsm_max_z {:.6} margin {:.6}",
                st.seed,
                st.hp_max_z,
                st.fsm_max_z,
                st.margin()
            );
        }
        let _ = writeln!(s, "success {}", self.success);
        let _ = writeln!(s, "seed {}", self.params.mutation_seed);
        s
    }
}

/// Tries seeds `base.mutation_seed ..` in order and returns the first whose
/// integrated honeypot outscores the FSM SCC, or else the best candidate
/// with `success == false`.
pub fn tune_honeypot(
    nl: &Netlist,
    truth: &GroundTruth,
    base_hp: &FsmSpec,
    hp_opts: &SynthOptions,
    base: &HoneypotParams,
    relic: &RelicParams,
    max_iters: usize,
) -> Result<TuneOutcome, ObfError> {
    if max_iters == 0 {
        return Err(ObfError::NoIterations);
    }
    let mut steps = Vec::new();
    let mut best: Option<(f64, HoneypotParams, FsmSpec, Integration)> = None;
    for i in 0..max_iters as u64 {
        let params = HoneypotParams {
            mutation_seed: base.mutation_seed + i,
            ..base.clone()
        };
        let hp_fsm = match derive_honeypot(base_hp, &params) {
            Ok(f) => f,
            Err(ObfError::NoValidMutant(_)) => continue,
            Err(e) => return Err(e),
        };
        let syn = synthesize(&hp_fsm, &DatapathSpec::default(), hp_opts)?;
        let integ = integrate_honeypot(nl, truth, &syn.netlist, &syn.truth.sffs, &params)?;
        let (hp_max_z, fsm_max_z) = hp_margin(&integ.netlist, &integ.truth, relic)?;
        let step = TuneStep {
            seed: params.mutation_seed,
            hp_max_z,
            fsm_max_z,
        };
        let margin = step.margin();
        steps.push(step);
        if margin > 0.0 {
            return Ok(TuneOutcome {
                params,
                success: true,
                steps,
                hp_fsm,
                integration: integ,
            });
        }
        if best.as_ref().is_none_or(|b| margin > b.0) {
            best = Some((margin, params, hp_fsm, integ));
        }
    }
    let (_, params, hp_fsm, integration) = best.ok_or(ObfError::NoValidMutant(max_iters))?;
    Ok(TuneOutcome {
        params,
        success: false,
        steps,
        hp_fsm,
        integration,
    })
}
