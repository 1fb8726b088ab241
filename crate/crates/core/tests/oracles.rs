// SPDX-License-Identifier: Apache-2.0

//! Library results against brute-force references on random instances.

mod common;

use std::collections::BTreeMap;

use fsm_honeypot::graph::{tarjan, tarjan_scc, EdgeFilter, FfGraph};
use fsm_honeypot::netlist::{eval_comb, BitState};
use fsm_honeypot::relic::{greedy_match, optimal_match};
use fsm_honeypot::stg::{extract_stg, ExtractOptions};
use fsm_honeypot::synth::{synthesize, DatapathSpec, SynthOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tarjan_matches_transitive_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let g = common::random_digraph(&mut rng, 12);
        let want = common::closure_sccs(&g);
        assert_eq!(tarjan(&g), want, "graph {g:?}");
        let names: Vec<String> = (0..g.len()).map(|i| format!("n{i:02}")).collect();
        let rep = tarjan_scc(
            &FfGraph::from_adjacency(names.clone(), g.clone()),
            EdgeFilter::Combinational,
            true,
        );
        let named: Vec<Vec<String>> = want
            .iter()
            .map(|c| c.iter().map(|&i| names[i].clone()).collect())
            .collect();
        assert_eq!(rep.sccs, named);
    }
}

#[test]
fn eval_comb_matches_recursive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let nl = common::random_netlist(&mut rng);
        nl.validate().unwrap();
        let mut a: BTreeMap<String, bool> =
            nl.inputs.iter().map(|i| (i.clone(), rng.gen())).collect();
        for f in &nl.ffs {
            a.insert(f.q.clone(), rng.gen());
        }
        let got = eval_comb(&nl, &a).unwrap();
        for g in &nl.gates {
            assert_eq!(
                got[&g.out],
                common::eval_recursive(&nl, &a, &g.out),
                "net {}",
                g.out
            );
        }
    }
}

#[test]
fn extract_stg_matches_behavioral_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..20 {
        let fsm = common::random_fsm(&mut rng, 6, 3, None);
        let s = synthesize(&fsm, &DatapathSpec::default(), &SynthOptions::default()).unwrap();
        let nl = &s.netlist;
        let stg = extract_stg(
            nl,
            &s.truth.sffs,
            &BitState::reset(nl),
            &fsm.inputs,
            &ExtractOptions::default(),
        )
        .unwrap();
        let reference = common::reference_stg(&fsm);
        let mut got = BTreeMap::new();
        for (src, v, dst) in stg.edges() {
            got.insert((stg.states[src].clone(), v), stg.states[dst].clone());
        }
        assert_eq!(got, reference, "case {case}: {fsm:?}");
    }
}

#[test]
fn optimal_matching_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let r = rng.gen_range(0..=6);
        let c = rng.gen_range(1..=6);
        let m: Vec<Vec<f64>> = (0..r)
            .map(|_| (0..c).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let want = common::brute_force_match(&m);
        assert!((optimal_match(&m) - want).abs() < 1e-9, "{m:?}");
        assert!(greedy_match(&m) <= want + 1e-9);
    }
}
