// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::netlist::{NetlistIndex, Simulator};

fn cube(pairs: &[(&str, bool)]) -> Cube {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn toggle() -> FsmSpec {
    FsmSpec {
        name: "tog".into(),
        states: vec!["A".into(), "B".into()],
        encoding: Encoding::Binary,
        inputs: vec!["t".into()],
        reset: "A".into(),
        transitions: vec![
            Transition {
                from: "A".into(),
                guard: cube(&[("t", true)]),
                to: "B".into(),
            },
            Transition {
                from: "B".into(),
                guard: cube(&[("t", true)]),
                to: "A".into(),
            },
        ],
        outputs: vec!["busy".into()],
        moore: [("B".to_string(), vec![true])].into_iter().collect(),
    }
}

#[test]
fn toggle_has_one_self_dependent_sff() {
    let s = synthesize(
        &toggle(),
        &DatapathSpec::default(),
        &SynthOptions::default(),
    )
    .unwrap();
    assert_eq!(s.truth.sffs, vec!["state[0]".to_string()]);
    let idx = NetlistIndex::new(&s.netlist);
    let d = idx.id(&s.netlist.ffs[0].d).unwrap();
    assert_eq!(idx.comb_fanin_ffs(d), vec![0]);
    assert!(s.truth.hold_sffs.contains("state[0]"));
}

#[test]
fn synthesis_is_deterministic() {
    let opts = SynthOptions::default();
    let a = synthesize(&toggle(), &DatapathSpec::default(), &opts).unwrap();
    let b = synthesize(&toggle(), &DatapathSpec::default(), &opts).unwrap();
    assert_eq!(a.netlist.to_text(), b.netlist.to_text());
}

#[test]
fn overlapping_guards_to_different_states_rejected() {
    let mut f = toggle();
    f.inputs.push("u".into());
    f.transitions.push(Transition {
        from: "A".into(),
        guard: cube(&[("u", true)]),
        to: "A".into(),
    });
    let err = synthesize(&f, &DatapathSpec::default(), &SynthOptions::default()).unwrap_err();
    assert!(matches!(err, SynthError::Ambiguous { .. }), "{err:?}");
}

#[test]
fn toggle_netlist_tracks_spec() {
    for reencode in [false, true] {
        let f = toggle();
        let opts = SynthOptions {
            allow_reencode: reencode,
            ..Default::default()
        };
        let s = synthesize(&f, &DatapathSpec::default(), &opts).unwrap();
        let sim = Simulator::new(&s.netlist).unwrap();
        let mut st: Vec<bool> = s.netlist.ffs.iter().map(|f| f.rst_val).collect();
        let trace = [true, false, true, true, false];
        let want = simulate_spec(
            &f,
            &trace
                .iter()
                .map(|&v| [("t".to_string(), v)].into_iter().collect())
                .collect::<Vec<_>>(),
        );
        for (k, &v) in trace.iter().enumerate() {
            st = sim.step_vec(&[false, false, v], &st, false);
            assert_eq!(s.decode(&f, &st).as_deref(), Some(want[k + 1].as_str()));
        }
    }
}

#[test]
fn private_cones_do_not_share_gates() {
    let mut f = toggle();
    f.states.push("C".into());
    f.transitions.push(Transition {
        from: "B".into(),
        guard: cube(&[("t", false)]),
        to: "C".into(),
    });
    let s = synthesize(&f, &DatapathSpec::default(), &SynthOptions::default()).unwrap();
    let idx = NetlistIndex::new(&s.netlist);
    let cones: Vec<Vec<usize>> = idx.ff_d.iter().map(|&d| idx.comb_cone_gates(d)).collect();
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            assert!(cones[i].iter().all(|g| !cones[j].contains(g)));
        }
    }
}

#[test]
fn counter_counts() {
    let dp = DatapathSpec {
        counters: vec![Counter {
            name: "c".into(),
            width: 3,
            enable: None,
            direction: Direction::Up,
            replicas: 0,
            saturate: false,
        }],
        ..Default::default()
    };
    let s = synthesize(&toggle(), &dp, &SynthOptions::default()).unwrap();
    let sim = Simulator::new(&s.netlist).unwrap();
    let mut st = vec![false; s.netlist.ffs.len()];
    for _ in 0..5 {
        st = sim.step_vec(&[false, false, false], &st, false);
    }
    let names = &s.truth.counters["c"];
    let val: usize = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            usize::from(st[s.netlist.ffs.iter().position(|f| &f.name == n).unwrap()]) << i
        })
        .sum();
    assert_eq!(val, 5);
}

#[test]
fn design_document_round_trip() {
    let f = toggle();
    let dp = DatapathSpec {
        counters: vec![Counter {
            name: "c".into(),
            width: 2,
            enable: Some("busy".into()),
            direction: Direction::Down,
            replicas: 1,
            saturate: true,
        }],
        regs: vec![DataReg {
            name: "acc".into(),
            width: 4,
            update: WordExpr::parse("add(rotl(acc,1),din)").unwrap(),
            enable: Some("busy".into()),
            load: Some(Load {
                select: "t".into(),
                source: WordExpr::Ref("din".into()),
            }),
            reset: false,
        }],
        word_inputs: vec![WordInput {
            name: "din".into(),
            width: 4,
        }],
        wiring: [("dout".to_string(), "acc".to_string())]
            .into_iter()
            .collect(),
    };
    let text = write_design(&f, &dp);
    let (f2, dp2) = parse_design(&text).unwrap();
    assert_eq!(f2, f);
    assert_eq!(dp2, dp);
}

#[test]
fn ground_truth_text_round_trip() {
    let s = synthesize(
        &toggle(),
        &DatapathSpec::default(),
        &SynthOptions::default(),
    )
    .unwrap();
    let mut t = s.truth.clone();
    t.hp_sffs.push("hp_state[0]".into());
    let back = GroundTruth::from_text(&t.to_text()).unwrap();
    assert_eq!(back.sffs, t.sffs);
    assert_eq!(back.hp_sffs, t.hp_sffs);
}

#[test]
fn private_bits_decode() {
    let c = |s: &str| s.chars().map(|ch| ch == '1').collect::<Code>();
    assert_eq!(
        private_bits(&[c("100"), c("010"), c("001")]),
        Some(vec![vec![0], vec![1], vec![2]])
    );
    assert_eq!(
        private_bits(&[c("1100"), c("0011")]),
        Some(vec![vec![0, 1], vec![2, 3]])
    );
    assert_eq!(private_bits(&[c("00"), c("01"), c("10")]), None);
    assert_eq!(
        private_bits(&[c("110"), c("011")]),
        Some(vec![vec![0], vec![2]])
    );
}
