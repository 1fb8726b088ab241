// SPDX-License-Identifier: Apache-2.0

//! Baseline attack, defense, behavior checks, re-attack and reporting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bench::Benchmark;
use super::overhead::{overhead, OverheadReport};
use super::plan::{FpMethod, Plan};
use super::HarnessError;
use crate::graph::{label_sccs, tarjan_scc, EdgeFilter, FeedbackClass, FfGraph, SccReport};
use crate::metrics::{evaluate, Metrics};
use crate::netlist::{eval_comb, BitState, Netlist};
use crate::obfuscate::{
    derive_honeypot, integrate_honeypot, replica_bit_map, replicate, rewrite_ra, rewrite_rb,
    tune_honeypot, HoneypotParams, ReplicationPlan, RewriteReport, TuneOutcome, OBF_INPUT,
};
use crate::relic::{relic_tarjan, RelicOutcome};
use crate::stg::{extract_stg, stg_equivalent, ExtractOptions, Stg};
use crate::synth::{synthesize, Encoding, GroundTruth, SynthOptions};
use crate::topo::{topo_attack, TopoOutcome};

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub attack: &'static str,
    /// `sff` or `hp`.
    pub target: &'static str,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub netlist: Netlist,
    pub truth: GroundTruth,
    pub sccs: SccReport,
    pub relic: Option<RelicOutcome>,
    pub topo: Option<TopoOutcome>,
    pub scores: Vec<Score>,
}

impl StageReport {
    pub fn score(&self, attack: &str, target: &str) -> Option<&Metrics> {
        self.scores
            .iter()
            .find(|s| s.attack == attack && s.target == target)
            .map(|s| &s.metrics)
    }

    /// Label of the SCC chosen by the similarity attack.
    pub fn relic_label(&self) -> Option<&'static str> {
        let i = self.relic.as_ref()?.selection.scc?;
        Some(self.sccs.labels.get(i)?.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub plan: Plan,
    pub baseline: StageReport,
    pub defended: Option<StageReport>,
    pub checks: Vec<Check>,
    pub rewrite: Option<RewriteReport>,
    pub tune: Option<TuneOutcome>,
    pub overhead: Option<OverheadReport>,
    pub stg_baseline: Stg,
    pub stg_defended: Option<Stg>,
}

impl PipelineReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn attack_stage(nl: Netlist, truth: GroundTruth, plan: &Plan) -> Result<StageReport, HarnessError> {
    let mut sccs = tarjan_scc(&FfGraph::build(&nl), EdgeFilter::Combinational, false);
    label_sccs(&mut sccs, &truth);
    let relic = if plan.attack.relic {
        Some(relic_tarjan(&nl, &plan.attack.relic_params())?)
    } else {
        None
    };
    let topo = plan
        .attack
        .topo
        .then(|| topo_attack(&nl, &plan.attack.topo_params()));
    let mut scores = Vec::new();
    let targets = [("sff", truth.sff_set()), ("hp", truth.hp_set())];
    for (attack, ident) in [
        ("relic", relic.as_ref().map(|r| &r.result.identified)),
        ("topo", topo.as_ref().map(|t| &t.result.identified)),
    ] {
        let Some(ident) = ident else { continue };
        for (target, set) in &targets {
            if !set.is_empty() {
                scores.push(Score {
                    attack,
                    target,
                    metrics: evaluate(ident, set)?,
                });
            }
        }
    }
    Ok(StageReport {
        netlist: nl,
        truth,
        sccs,
        relic,
        topo,
        scores,
    })
}

fn stg_of(
    nl: &Netlist,
    sffs: &[String],
    free: &[String],
    plan: &Plan,
) -> Result<Stg, HarnessError> {
    let opts = ExtractOptions {
        held: BTreeMap::new(),
        max_inputs: Some(plan.checks.max_inputs),
    };
    Ok(extract_stg(nl, sffs, &BitState::reset(nl), free, &opts)?)
}

/// First output of `before` that differs in `after` on `n` random input and
/// FF-state vectors, if any. Nets only present in `after` get random values.
pub fn first_output_mismatch(
    before: &Netlist,
    after: &Netlist,
    n: usize,
    seed: u64,
) -> Result<Option<String>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<&String> = after
        .inputs
        .iter()
        .chain(after.ffs.iter().map(|f| &f.q))
        .collect();
    let keep: Vec<&String> = before
        .inputs
        .iter()
        .chain(before.ffs.iter().map(|f| &f.q))
        .collect();
    for _ in 0..n {
        let a: BTreeMap<String, bool> =
            sources.iter().map(|s| (s.to_string(), rng.gen())).collect();
        let b: BTreeMap<String, bool> = keep
            .iter()
            .map(|k| (k.to_string(), a.get(*k).copied().unwrap_or(false)))
            .collect();
        let va = eval_comb(after, &a)?;
        let vb = eval_comb(before, &b)?;
        if let Some(o) = before.outputs.iter().find(|o| va.get(*o) != vb.get(*o)) {
            return Ok(Some(o.clone()));
        }
        for f in &before.ffs {
            let after_d = after.ff(&f.name).map(|g| va[&g.d]);
            if after_d != Some(vb[&f.d]) {
                return Ok(Some(format!("{}.d", f.name)));
            }
        }
    }
    Ok(None)
}

/// Runs the whole flow on `bench`. A failed behavior-preservation check
/// aborts with [`HarnessError::Preservation`].
pub fn run_pipeline(bench: &Benchmark, plan: &Plan) -> Result<PipelineReport, HarnessError> {
    let base_nl = bench.design.netlist.clone();
    let base_truth = bench.design.truth.clone();
    let free: Vec<String> = bench.fsm.inputs.clone();
    let stg_baseline = stg_of(&base_nl, &base_truth.sffs, &free, plan)?;
    let baseline = attack_stage(base_nl.clone(), base_truth.clone(), plan)?;
    let d = &plan.defense;
    if d.is_empty() {
        return Ok(PipelineReport {
            plan: plan.clone(),
            baseline,
            defended: None,
            checks: Vec::new(),
            rewrite: None,
            tune: None,
            overhead: None,
            stg_baseline,
            stg_defended: None,
        });
    }

    let one_hot = bench.fsm.encoding == Encoding::OneHot;
    let fp = match d.fp {
        FpMethod::Auto if one_hot => FpMethod::Ra,
        FpMethod::Auto => FpMethod::Rb,
        m => m,
    };
    if fp == FpMethod::Ra && !one_hot {
        return Err(HarnessError::Plan(
            "fp = \"ra\" needs a one-hot design".into(),
        ));
    }
    let mut fsm = bench.fsm.clone();
    let mut dp = bench.dp.clone();
    if d.replicas > 0 {
        let rp = ReplicationPlan {
            replicas: d.replicas,
            counters: if d.replicate_counters {
                dp.counters.iter().map(|c| c.name.clone()).collect()
            } else {
                Vec::new()
            },
            allow_one_hot: true,
        };
        (fsm, dp) = replicate(&fsm, &dp, &rp)?;
    }
    let mut rewrite = None;
    if fp == FpMethod::Rb {
        let (f, rep) = rewrite_rb(&fsm, d.fp_bit)?;
        fsm = f;
        rewrite = Some(rep);
    }
    let syn = synthesize(&fsm, &dp, &SynthOptions::default())?;
    let mut nl = syn.netlist;
    let truth = syn.truth;
    if fp == FpMethod::Ra {
        let target = truth
            .sffs
            .get(d.fp_bit)
            .ok_or_else(|| HarnessError::Plan(format!("no state bit {}", d.fp_bit)))?
            .clone();
        // Replicas of the target are set together with it, so they cannot
        // witness "no other state is hot".
        let twins: BTreeSet<String> = if d.replicas > 0 {
            let map = replica_bit_map(&base_truth.sffs, &truth.sffs, d.replicas);
            map.iter()
                .filter(|(new, orig)| **new != target && map.get(&target) == Some(*orig))
                .map(|(new, _)| new.clone())
                .collect()
        } else {
            BTreeSet::new()
        };
        let peers: Vec<String> = truth
            .sffs
            .iter()
            .filter(|s| !twins.contains(*s))
            .cloned()
            .collect();
        let (n, rep) = rewrite_ra(&nl, &peers, &target)?;
        nl = n;
        rewrite = Some(rep);
    }

    let mut checks = Vec::new();
    if let Some(rep) = &rewrite {
        checks.push(Check {
            name: "fp_removed",
            passed: rep.noop || rep.fp_after != FeedbackClass::HighFP,
            detail: rep.treated_ff.clone(),
        });
    }
    let mut def_free = free.clone();
    let mut frozen = BTreeMap::new();
    if fsm.inputs.iter().any(|i| i == OBF_INPUT) && !free.iter().any(|i| i == OBF_INPUT) {
        def_free.push(OBF_INPUT.to_string());
        frozen.insert(OBF_INPUT.to_string(), false);
    }
    let stg_defended = stg_of(&nl, &truth.sffs, &def_free, plan)?;
    let bit_map = if d.replicas > 0 {
        replica_bit_map(&base_truth.sffs, &truth.sffs, d.replicas)
    } else {
        base_truth
            .sffs
            .iter()
            .map(|s| (s.clone(), s.clone()))
            .collect()
    };
    let equivalent = stg_equivalent(&stg_baseline, &stg_defended, &bit_map, &frozen)
        .map_err(|e| HarnessError::Preservation(format!("stg: {e}")))?;
    if !equivalent {
        return Err(HarnessError::Preservation(
            "defended STG differs from baseline".into(),
        ));
    }
    checks.push(Check {
        name: "stg_equivalent",
        passed: true,
        detail: format!("{} states", stg_defended.states.len()),
    });

    let mut tune = None;
    let mut truth = truth;
    if d.honeypot {
        let base = HoneypotParams {
            mutation_seed: d.hp_seed,
            n_transition_mutations: d.hp_transition_mutations,
            n_output_mutations: d.hp_output_mutations,
            attach_mode: d.attach_mode(),
            targets: (!d.hp_targets.is_empty()).then(|| d.hp_targets.clone()),
            ..HoneypotParams::default()
        };
        let hp_opts = SynthOptions::default();
        let mut inputs = vec![hp_opts.clk.clone(), hp_opts.rst.clone()];
        inputs.extend(bench.fsm.inputs.iter().cloned());
        let base = base.with_identity_inputs(inputs);
        let integ = if d.tune_iters > 0 {
            let t = tune_honeypot(
                &nl,
                &truth,
                &bench.fsm,
                &hp_opts,
                &base,
                &plan.attack.relic_params(),
                d.tune_iters,
            )?;
            let i = t.integration.clone();
            tune = Some(t);
            i
        } else {
            let hp_fsm = derive_honeypot(&bench.fsm, &base)?;
            let hp = synthesize(&hp_fsm, &Default::default(), &hp_opts)?;
            integrate_honeypot(&nl, &truth, &hp.netlist, &hp.truth.sffs, &base)?
        };
        if let Some(o) =
            first_output_mismatch(&nl, &integ.netlist, plan.checks.vectors, plan.checks.seed)?
        {
            return Err(HarnessError::Preservation(format!("honeypot changes {o}")));
        }
        checks.push(Check {
            name: "hp_outputs_equal",
            passed: true,
            detail: format!("{} vectors", plan.checks.vectors),
        });
        nl = integ.netlist;
        truth = integ.truth;
    }
    let overhead = overhead(&base_nl, &nl);
    let defended = attack_stage(nl, truth, plan)?;
    Ok(PipelineReport {
        plan: plan.clone(),
        baseline,
        defended: Some(defended),
        checks,
        rewrite,
        tune,
        overhead: Some(overhead),
        stg_baseline,
        stg_defended: Some(stg_defended),
    })
}

fn csv_string(rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn sccs_csv(r: &SccReport) -> String {
    let mut rows = vec![vec!["scc".to_string(), "label".into(), "ff".into()]];
    for (i, members) in r.sccs.iter().enumerate() {
        let label = r.labels.get(i).map_or("unknown", |l| l.as_str());
        for m in members {
            rows.push(vec![i.to_string(), label.into(), m.clone()]);
        }
    }
    csv_string(&rows)
}

fn topo_csv(t: &TopoOutcome) -> String {
    let mut rows = vec![vec![
        "group".to_string(),
        "step".into(),
        "ff".into(),
        "outcome".into(),
    ]];
    for r in &t.groups.removals {
        rows.push(vec![
            r.group.clone(),
            r.step.clone(),
            r.ff.clone(),
            r.reason.clone(),
        ]);
    }
    for g in &t.groups.groups {
        for m in &g.members {
            rows.push(vec![g.id.clone(), "final".into(), m.clone(), "kept".into()]);
        }
    }
    csv_string(&rows)
}

impl PipelineReport {
    fn stages(&self) -> Vec<(&'static str, &StageReport)> {
        let mut v = vec![("baseline", &self.baseline)];
        if let Some(d) = &self.defended {
            v.push(("defended", d));
        }
        v
    }

    pub fn attacks_csv(&self) -> String {
        let mut rows = vec![[
            "stage",
            "attack",
            "target",
            "sensitivity",
            "precision",
            "hits",
            "truth",
            "identified",
        ]
        .map(String::from)
        .to_vec()];
        for (stage, st) in self.stages() {
            for s in &st.scores {
                let ident = match s.attack {
                    "relic" => st.relic.as_ref().map(|r| r.result.identified.len()),
                    _ => st.topo.as_ref().map(|t| t.result.identified.len()),
                };
                rows.push(vec![
                    stage.into(),
                    s.attack.into(),
                    s.target.into(),
                    format!("{:.6}", s.metrics.sensitivity),
                    format!("{:.6}", s.metrics.precision),
                    s.metrics.hits.to_string(),
                    s.metrics.truth.to_string(),
                    ident.unwrap_or(0).to_string(),
                ]);
            }
        }
        csv_string(&rows)
    }

    pub fn checks_csv(&self) -> String {
        let mut rows = vec![vec!["check".to_string(), "passed".into(), "detail".into()]];
        for c in &self.checks {
            rows.push(vec![c.name.into(), c.passed.to_string(), c.detail.clone()]);
        }
        csv_string(&rows)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let b = &self.plan.benchmark;
        let _ = writeln!(s, "seed {}", b.seed);
        let _ = writeln!(s, "states {}", b.states);
        let _ = writeln!(
            s,
            "encoding {}",
            if b.one_hot { "one_hot" } else { "binary" }
        );
        for (stage, st) in self.stages() {
            let _ = writeln!(s, "{stage}.ffs {}", st.netlist.ffs.len());
            let _ = writeln!(s, "{stage}.multi_sccs {}", st.sccs.multi_element().count());
            if let Some(r) = &st.relic {
                let _ = writeln!(s, "{stage}.relic.argmax {}", r.selection.argmax);
                let _ = writeln!(
                    s,
                    "{stage}.relic.selected {}",
                    st.relic_label().unwrap_or("none")
                );
            }
            for sc in &st.scores {
                let _ = writeln!(
                    s,
                    "{stage}.{}.{}.sensitivity {:.6}",
                    sc.attack, sc.target, sc.metrics.sensitivity
                );
            }
        }
        if let Some(r) = &self.rewrite {
            let _ = writeln!(s, "rewrite.treated {}", r.treated_ff);
            let _ = writeln!(
                s,
                "rewrite.fp_after {}",
                crate::obfuscate::fp_str(r.fp_after)
            );
        }
        if let Some(t) = &self.tune {
            let _ = writeln!(s, "tune.success {}", t.success);
            let _ = writeln!(s, "tune.seed {}", t.params.mutation_seed);
            let _ = writeln!(s, "tune.iterations {}", t.steps.len());
        }
        if let Some(o) = &self.overhead {
            let _ = writeln!(s, "overhead.area_pct {:.4}", o.area_pct());
            let _ = writeln!(s, "overhead.depth_pct {:.4}", o.depth_pct());
        }
        let _ = writeln!(
            s,
            "checks {}",
            if self.all_checks_pass() {
                "pass"
            } else {
                "fail"
            }
        );
        s
    }

    /// Writes `netlists/`, `reports/*.csv`, `stg/*.txt` and `summary.txt`.
    pub fn write_run_dir(&self, dir: &Path) -> Result<(), HarnessError> {
        for sub in ["netlists", "reports", "stg"] {
            fs::create_dir_all(dir.join(sub))?;
        }
        fs::write(dir.join("plan.toml"), self.plan.to_toml())?;
        for (stage, st) in self.stages() {
            fs::write(
                dir.join(format!("netlists/{stage}.net")),
                st.netlist.to_text(),
            )?;
            fs::write(
                dir.join(format!("netlists/{stage}.truth")),
                st.truth.to_text(),
            )?;
            fs::write(
                dir.join(format!("reports/sccs_{stage}.csv")),
                sccs_csv(&st.sccs),
            )?;
            if let Some(r) = &st.relic {
                fs::write(
                    dir.join(format!("reports/zscores_{stage}.csv")),
                    r.table.to_csv(),
                )?;
            }
            if let Some(t) = &st.topo {
                fs::write(dir.join(format!("reports/topo_{stage}.csv")), topo_csv(t))?;
            }
        }
        fs::write(dir.join("reports/attacks.csv"), self.attacks_csv())?;
        fs::write(dir.join("reports/checks.csv"), self.checks_csv())?;
        if let Some(o) = &self.overhead {
            fs::write(dir.join("reports/overhead.csv"), o.to_csv())?;
        }
        for (stage, g) in std::iter::once(("baseline", &self.stg_baseline))
            .chain(self.stg_defended.as_ref().map(|g| ("defended", g)))
        {
            fs::write(dir.join(format!("stg/{stage}.txt")), g.to_text())?;
            fs::write(dir.join(format!("stg/{stage}.dot")), g.to_dot())?;
        }
        if let Some(r) = &self.rewrite {
            fs::write(dir.join("reports/rewrite.txt"), r.to_text())?;
        }
        if let Some(t) = &self.tune {
            fs::write(dir.join("reports/tune.txt"), t.to_text())?;
        }
        fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}
