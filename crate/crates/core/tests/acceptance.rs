// SPDX-License-Identifier: Apache-2.0

//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on
//! any failure. Time limits and tolerances are fixed below.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fsm_honeypot::graph::{
    classify_feedback, tarjan, tarjan_scc, EdgeFilter, FeedbackClass, FfGraph, SccReport,
};
use fsm_honeypot::harness::{
    area, gate_area, gen_benchmark, overhead, run_pipeline, Benchmark, BenchmarkSpec, FpMethod,
    PipelineReport, Plan,
};
use fsm_honeypot::netlist::{eval_comb, BitState, Simulator};
use fsm_honeypot::obfuscate::{
    derive_honeypot, integrate_honeypot, replica_bit_map, replicate, replicate_state_bits,
    HoneypotParams, ReplicationPlan,
};
use fsm_honeypot::relic::select_by_zscore;
use fsm_honeypot::stg::{extract_stg, ExtractOptions};
use fsm_honeypot::synth::{
    code_str, synthesize, Counter, DatapathSpec, Direction, Encoding, FsmSpec, SynthOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: std::ops::Range<u64> = 0..10;
/// Seeds in which the honeypot must win against the similarity attack.
const AC5_MIN_WINS: usize = 8;
const AC5_REPLICAS: [usize; 2] = [2, 4];
const AC5_TUNE_ITERS: usize = 20;
const RANDOM_VECTORS: usize = 1000;
const MAX_FREE_INPUTS: usize = 12;
/// Exact equality for sensitivities computed as ratios of small integers.
const EPS: f64 = 1e-12;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn benchmarks() -> Vec<Benchmark> {
    SEEDS
        .map(|s| gen_benchmark(&BenchmarkSpec::for_seed(s)).expect("standard profile is feasible"))
        .collect()
}

fn plan_for(b: &Benchmark) -> Plan {
    let mut p = Plan {
        benchmark: b.spec.clone(),
        ..Plan::default()
    };
    p.checks.vectors = RANDOM_VECTORS;
    p.checks.max_inputs = MAX_FREE_INPUTS;
    p
}

fn run(b: &Benchmark, plan: &Plan) -> Result<PipelineReport, String> {
    run_pipeline(b, plan).map_err(|e| format!("seed {}: {e}", b.spec.seed))
}

fn six_state_binary() -> FsmSpec {
    FsmSpec {
        name: "six".into(),
        states: (1..=6).map(|i| format!("S{i}")).collect(),
        encoding: Encoding::Binary,
        inputs: vec![],
        reset: "S1".into(),
        transitions: vec![],
        outputs: vec![],
        moore: BTreeMap::new(),
    }
}

fn ac1() -> Outcome {
    let plan = ReplicationPlan {
        replicas: 2,
        ..ReplicationPlan::default()
    };
    let r = replicate_state_bits(&six_state_binary(), &plan).map_err(|e| e.to_string())?;
    let Encoding::Explicit(codes) = &r.encoding else {
        return Err("replicated FSM is not explicitly encoded".into());
    };
    let want = [
        ("S1", "000000000"),
        ("S2", "000000111"),
        ("S3", "000111000"),
        ("S4", "000111111"),
        ("S5", "111000000"),
        ("S6", "111000111"),
    ];
    for (s, w) in want {
        let got = code_str(&codes[s]);
        ensure!(got == w, "{s}: got {got}, want {w}");
    }
    Ok("six nine-bit labels match".into())
}

fn ac2() -> Outcome {
    let fsm = FsmSpec {
        name: "idle".into(),
        states: vec!["A".into()],
        encoding: Encoding::Binary,
        inputs: vec![],
        reset: "A".into(),
        transitions: vec![],
        outputs: vec![],
        moore: BTreeMap::new(),
    };
    let dp = DatapathSpec {
        counters: vec![Counter {
            name: "c".into(),
            width: 3,
            enable: None,
            direction: Direction::Up,
            replicas: 2,
            saturate: false,
        }],
        ..DatapathSpec::default()
    };
    let s = synthesize(&fsm, &dp, &SynthOptions::default()).map_err(|e| e.to_string())?;
    let nl = &s.netlist;
    let sim = Simulator::new(nl).map_err(|e| e.to_string())?;
    let bits = &s.truth.counters["c"];
    ensure!(bits.len() == 9, "{} counter FFs", bits.len());
    let pos: Vec<usize> = bits
        .iter()
        .map(|n| nl.ffs.iter().position(|f| &f.name == n).unwrap())
        .collect();
    let pis = vec![false; nl.inputs.len()];
    let mut checked = 0;
    for start in 0..8usize {
        let mut st = vec![false; nl.ffs.len()];
        for (i, &p) in pos.iter().enumerate() {
            st[p] = start >> (i / 3) & 1 == 1;
        }
        for step in 1..=(7 - start) {
            st = sim.step_vec(&pis, &st, false);
            let mut value = 0;
            for g in 0..3 {
                let group: Vec<bool> = (0..3).map(|j| st[pos[g * 3 + j]]).collect();
                ensure!(
                    group.iter().all(|&b| b == group[0]),
                    "start {start} step {step}: group {g} not uniform"
                );
                value |= usize::from(group[0]) << g;
            }
            ensure!(
                value == start + step,
                "start {start} step {step}: value {value}"
            );
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} steps from 8 start values, 0 -> 6 after 6 steps"
    ))
}

fn ac3() -> Outcome {
    let names = ["F1", "F2", "F3", "Fs1", "Fs2"];
    let sccs = SccReport {
        sccs: vec![names.iter().map(|s| s.to_string()).collect()],
        ..SccReport::default()
    };
    let table = |z: [f64; 5]| -> BTreeMap<String, f64> {
        ["Fs1", "Fs2", "F1", "F2", "F3"]
            .iter()
            .map(|s| s.to_string())
            .zip(z)
            .collect()
    };
    for (z, argmax) in [
        ([512.0, 622.0, 84.0, 389.0, 110.0], "Fs2"),
        ([178.0, 209.0, 84.0, 389.0, 110.0], "F2"),
    ] {
        let sel = select_by_zscore(&table(z), &sccs).ok_or("no selection")?;
        ensure!(sel.argmax == argmax, "argmax {} for {z:?}", sel.argmax);
        ensure!(sel.scc == Some(0), "selected {:?}", sel.scc);
        ensure!(sel.identified.len() == 5, "identified {:?}", sel.identified);
    }
    Ok("argmax Fs2 (622) then F2 (389), same SCC both times".into())
}

fn ac4(benches: &[Benchmark]) -> Outcome {
    for b in benches {
        ensure!(
            (6..=16).contains(&b.spec.states),
            "seed {} has {} states",
            b.spec.seed,
            b.spec.states
        );
        let r = run(b, &plan_for(b))?;
        let multi = r.baseline.sccs.multi_element().count();
        ensure!(
            multi >= 2,
            "seed {}: {multi} multi-element SCCs",
            b.spec.seed
        );
        for attack in ["relic", "topo"] {
            let m = r.baseline.score(attack, "sff").ok_or("missing score")?;
            ensure!(
                (m.sensitivity - 1.0).abs() < EPS,
                "seed {}: {attack} sensitivity {}",
                b.spec.seed,
                m.sensitivity
            );
        }
    }
    Ok(format!(
        "{} benchmarks, both attacks at sensitivity 1.0",
        benches.len()
    ))
}

fn ac5(benches: &[Benchmark]) -> Outcome {
    let mut summary = Vec::new();
    for r in AC5_REPLICAS {
        let mut wins = 0;
        for b in benches {
            let mut plan = plan_for(b);
            plan.defense.replicas = r;
            plan.defense.honeypot = true;
            plan.defense.tune_iters = AC5_TUNE_ITERS;
            let rep = run(b, &plan)?;
            let base = &rep
                .baseline
                .relic
                .as_ref()
                .ok_or("no baseline scores")?
                .table;
            let def = rep.defended.as_ref().ok_or("no defended stage")?;
            let table = &def.relic.as_ref().ok_or("no defended scores")?.table;
            let hp = table
                .max_over(&def.truth.hp_sffs)
                .ok_or("no honeypot FFs")?;
            let fsm = table.max_over(&def.truth.sffs).ok_or("no state FFs")?;
            if hp > fsm && def.relic_label() == Some("fsm_hp") {
                wins += 1;
            }
            let map = replica_bit_map(&rep.baseline.truth.sffs, &def.truth.sffs, r);
            for (new, orig) in &map {
                ensure!(
                    table.scores[new] < base.scores[orig],
                    "r={r} seed {}: Z({new}) = {} not below baseline Z({orig}) = {}",
                    b.spec.seed,
                    table.scores[new],
                    base.scores[orig]
                );
            }
        }
        ensure!(
            wins >= AC5_MIN_WINS,
            "r={r}: honeypot selected in {wins}/{}",
            benches.len()
        );
        summary.push(format!("r={r}: {wins}/{}", benches.len()));
    }
    Ok(format!(
        "honeypot selected, {}; replica Z below baseline everywhere",
        summary.join(", ")
    ))
}

fn fp_plan(b: &Benchmark) -> Plan {
    let mut plan = plan_for(b);
    plan.defense.fp = FpMethod::Auto;
    plan.defense.honeypot = true;
    plan
}

fn ac6(benches: &[Benchmark]) -> Outcome {
    let mut worst: f64 = 0.0;
    for b in benches {
        let rep = run(b, &fp_plan(b))?;
        let def = rep.defended.as_ref().ok_or("no defended stage")?;
        let orig = def.score("topo", "sff").ok_or("missing sff score")?;
        let hp = def.score("topo", "hp").ok_or("missing hp score")?;
        ensure!(
            orig.sensitivity < 1.0,
            "seed {}: original sensitivity 1.0",
            b.spec.seed
        );
        ensure!(
            (hp.sensitivity - 1.0).abs() < EPS,
            "seed {}: honeypot sensitivity {}",
            b.spec.seed,
            hp.sensitivity
        );
        worst = worst.max(orig.sensitivity);
    }
    Ok(format!(
        "original sensitivity at most {worst:.4}, honeypot 1.0 in every seed"
    ))
}

fn ac7(benches: &[Benchmark]) -> Outcome {
    let mut runs = 0;
    for b in benches {
        let mut plans = Vec::new();
        let mut p = plan_for(b);
        p.defense.replicas = 2;
        plans.push(("replication", p));
        let mut p = plan_for(b);
        p.defense.fp = FpMethod::Auto;
        plans.push(("feedback", p));
        let mut p = plan_for(b);
        p.defense.honeypot = true;
        plans.push(("honeypot", p));
        for (what, plan) in plans {
            let rep = run(b, &plan)?;
            ensure!(
                rep.all_checks_pass(),
                "seed {} {what}: {:?}",
                b.spec.seed,
                rep.checks
            );
            let names: BTreeSet<&str> = rep.checks.iter().map(|c| c.name).collect();
            ensure!(
                names.contains("stg_equivalent"),
                "seed {} {what}: no STG check",
                b.spec.seed
            );
            if what == "honeypot" {
                ensure!(
                    names.contains("hp_outputs_equal"),
                    "seed {}: no output check",
                    b.spec.seed
                );
            }
            // Gate-level rewrite keeps the STG bit for bit.
            if what == "feedback" && b.spec.one_hot {
                ensure!(
                    rep.stg_defended.as_ref() == Some(&rep.stg_baseline),
                    "seed {}: R_A changed the STG",
                    b.spec.seed
                );
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} defended designs preserved"))
}

fn ac8(benches: &[Benchmark]) -> Outcome {
    let mut untreated = 0;
    for b in benches {
        let t = &b.design.truth;
        let cands = t.sff_set();
        for f in &t.hold_sffs {
            let c =
                classify_feedback(&b.design.netlist, f, Some(&cands)).map_err(|e| e.to_string())?;
            ensure!(
                c == FeedbackClass::HighFP,
                "seed {}: {f} is {c:?}",
                b.spec.seed
            );
            untreated += 1;
        }
        let mut plan = plan_for(b);
        plan.defense.fp = FpMethod::Auto;
        let rep = run(b, &plan)?;
        let def = rep.defended.as_ref().ok_or("no defended stage")?;
        let rw = rep.rewrite.as_ref().ok_or("no rewrite report")?;
        let c = classify_feedback(&def.netlist, &rw.treated_ff, Some(&def.truth.sff_set()))
            .map_err(|e| e.to_string())?;
        ensure!(
            c != FeedbackClass::HighFP,
            "seed {}: {} still high",
            b.spec.seed,
            rw.treated_ff
        );
    }
    Ok(format!(
        "{untreated} untreated hold SFFs high, {} treated SFFs not high",
        benches.len()
    ))
}

fn ac9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..200 {
        let g = common::random_digraph(&mut rng, 12);
        let want = common::closure_sccs(&g);
        ensure!(tarjan(&g) == want, "digraph {i} differs");
        let names: Vec<String> = (0..g.len()).map(|k| format!("n{k:02}")).collect();
        let rep = tarjan_scc(
            &FfGraph::from_adjacency(names.clone(), g.clone()),
            EdgeFilter::Any,
            true,
        );
        let named: Vec<Vec<String>> = want
            .iter()
            .map(|c| c.iter().map(|&k| names[k].clone()).collect())
            .collect();
        ensure!(rep.sccs == named, "digraph {i}: named components differ");
    }
    for i in 0..100 {
        let nl = common::random_netlist(&mut rng);
        let mut a: BTreeMap<String, bool> =
            nl.inputs.iter().map(|n| (n.clone(), rng.gen())).collect();
        for f in &nl.ffs {
            a.insert(f.q.clone(), rng.gen());
        }
        let got = eval_comb(&nl, &a).map_err(|e| e.to_string())?;
        for g in &nl.gates {
            ensure!(
                got[&g.out] == common::eval_recursive(&nl, &a, &g.out),
                "netlist {i} net {}",
                g.out
            );
        }
    }
    for i in 0..20 {
        let fsm = common::random_fsm(&mut rng, 6, 3, None);
        let s = synthesize(&fsm, &DatapathSpec::default(), &SynthOptions::default())
            .map_err(|e| e.to_string())?;
        let stg = extract_stg(
            &s.netlist,
            &s.truth.sffs,
            &BitState::reset(&s.netlist),
            &fsm.inputs,
            &ExtractOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let got: BTreeMap<_, _> = stg
            .edges()
            .into_iter()
            .map(|(a, v, d)| ((stg.states[a].clone(), v), stg.states[d].clone()))
            .collect();
        ensure!(got == common::reference_stg(&fsm), "FSM {i}: STG differs");
    }
    Ok("200 digraphs, 100 netlists, 20 FSMs agree".into())
}

fn ac10(benches: &[Benchmark]) -> Outcome {
    for b in benches {
        let nl = &b.design.netlist;
        let mut inputs = vec!["clk".to_string(), "rst".to_string()];
        inputs.extend(b.fsm.inputs.iter().cloned());
        let p = HoneypotParams::default().with_identity_inputs(inputs);
        let hp_fsm = derive_honeypot(&b.fsm, &p).map_err(|e| e.to_string())?;
        let hp = synthesize(&hp_fsm, &DatapathSpec::default(), &SynthOptions::default())
            .map_err(|e| e.to_string())?;
        let integ = integrate_honeypot(nl, &b.design.truth, &hp.netlist, &hp.truth.sffs, &p)
            .map_err(|e| e.to_string())?;
        let attach: u64 = integ
            .added_gates
            .iter()
            .map(|n| {
                let g = integ
                    .netlist
                    .gates
                    .iter()
                    .find(|g| &g.name == n)
                    .expect("added gate exists");
                gate_area(g.kind, g.ins.len())
            })
            .sum();
        let o = overhead(nl, &integ.netlist);
        ensure!(
            o.area_after - o.area_before == area(&hp.netlist) + attach,
            "seed {}: delta {} != {} + {attach}",
            b.spec.seed,
            o.area_after - o.area_before,
            area(&hp.netlist)
        );
        let rp = ReplicationPlan {
            replicas: 2,
            allow_one_hot: true,
            ..ReplicationPlan::default()
        };
        let (f, d) = replicate(&b.fsm, &b.dp, &rp).map_err(|e| e.to_string())?;
        let rs = synthesize(&f, &d, &SynthOptions::default()).map_err(|e| e.to_string())?;
        let o = overhead(nl, &rs.netlist);
        ensure!(
            o.area_after > o.area_before,
            "seed {}: replication area {:.2}%",
            b.spec.seed,
            o.area_pct()
        );
    }
    Ok("honeypot delta exact, replication grows area in every seed".into())
}

fn main() -> ExitCode {
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let benches = benchmarks();
    let b = &benches;
    let criteria: Vec<(&str, u64, Check)> = vec![
        ("AC1", 1, Box::new(ac1)),
        ("AC2", 1, Box::new(ac2)),
        ("AC3", 1, Box::new(ac3)),
        ("AC4", 60, Box::new(|| ac4(b))),
        ("AC5", 300, Box::new(|| ac5(b))),
        ("AC6", 300, Box::new(|| ac6(b))),
        ("AC7", 300, Box::new(|| ac7(b))),
        ("AC8", 300, Box::new(|| ac8(b))),
        ("AC9", 60, Box::new(ac9)),
        ("AC10", 30, Box::new(|| ac10(b))),
    ];
    let mut failed = 0;
    for (id, limit, check) in criteria {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(&check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let out = match out {
            Ok(_) if took > Duration::from_secs(limit) => {
                Err(format!("took {took:.2?}, limit {limit} s"))
            }
            o => o,
        };
        match out {
            Ok(msg) => println!("{id} PASS [{took:.2?} / {limit} s] {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{id} FAIL [{took:.2?} / {limit} s] {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
