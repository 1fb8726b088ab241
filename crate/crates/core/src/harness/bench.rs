// SPDX-License-Identifier: Apache-2.0

//! Seeded generator of FSM-plus-datapath designs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::graph::{tarjan_scc, EdgeFilter, FfGraph};
use crate::synth::{
    synthesize, Counter, Cube, DataReg, DatapathSpec, Direction, Encoding, FsmSpec, Load,
    SynthOptions, Synthesized, Transition, WordExpr, WordInput,
};

/// Output roles: counter enable, accumulator enable, accumulator load select.
pub const OUTPUTS: [&str; 3] = ["cnt_en", "acc_en", "acc_ld"];

/// How the accumulator folds its input into the rotated old value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccOp {
    #[default]
    Xor,
    Add,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "SpecFile")]
pub struct BenchmarkSpec {
    pub seed: u64,
    pub states: usize,
    /// FSM inputs; 0 picks the smallest count that fits the transitions.
    pub inputs: usize,
    /// 0 omits the counter.
    pub counter_width: usize,
    /// 0 omits the accumulator.
    pub data_width: usize,
    pub acc_op: AccOp,
    pub one_hot: bool,
    /// Minimum number of multi-element SCCs in the synthesized design.
    pub min_sccs: usize,
}

/// File form: omitted fields follow the seed's standard profile.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SpecFile {
    seed: u64,
    states: Option<usize>,
    inputs: Option<usize>,
    counter_width: Option<usize>,
    data_width: Option<usize>,
    acc_op: Option<AccOp>,
    one_hot: Option<bool>,
    min_sccs: Option<usize>,
}

impl From<SpecFile> for BenchmarkSpec {
    fn from(f: SpecFile) -> Self {
        let d = BenchmarkSpec::for_seed(f.seed);
        BenchmarkSpec {
            seed: f.seed,
            states: f.states.unwrap_or(d.states),
            inputs: f.inputs.unwrap_or(d.inputs),
            counter_width: f.counter_width.unwrap_or(d.counter_width),
            data_width: f.data_width.unwrap_or(d.data_width),
            acc_op: f.acc_op.unwrap_or(d.acc_op),
            one_hot: f.one_hot.unwrap_or(d.one_hot),
            min_sccs: f.min_sccs.unwrap_or(d.min_sccs),
        }
    }
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec::for_seed(0)
    }
}

impl BenchmarkSpec {
    /// The standard profile for a seed: 6 to 16 states, an 8-bit XOR
    /// accumulator, no counter, one-hot on odd seeds.
    pub fn for_seed(seed: u64) -> Self {
        BenchmarkSpec {
            seed,
            states: 6 + (seed * 7 % 11) as usize,
            inputs: 0,
            counter_width: 0,
            data_width: 8,
            acc_op: AccOp::Xor,
            one_hot: seed % 2 == 1,
            min_sccs: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub spec: BenchmarkSpec,
    pub fsm: FsmSpec,
    pub dp: DatapathSpec,
    /// Synthesized with default options.
    pub design: Synthesized,
}

/// Two more than half the other states, capped at all of them.
fn out_degree(states: usize) -> usize {
    ((states - 1).div_ceil(2) + 2).min(states - 1)
}

/// Builds and synthesizes a design. State `i` moves to `i + s` for every
/// offset `s` in a seeded set that contains 1, so each state has the same
/// number of distinct successors and predecessors. Every transition sits on
/// its own input minterm and at least one minterm holds the state.
pub fn gen_benchmark(spec: &BenchmarkSpec) -> Result<Benchmark, HarnessError> {
    let k = spec.states;
    if k < 2 {
        return Err(HarnessError::Infeasible(
            "at least two states are needed".into(),
        ));
    }
    let deg = out_degree(k);
    let mut n_in = spec.inputs.max(1);
    if spec.inputs == 0 {
        while (1usize << n_in) <= deg {
            n_in += 1;
        }
    } else if (1usize << n_in) <= deg {
        return Err(HarnessError::Infeasible(format!(
            "{n_in} inputs cannot separate {deg} transitions and a hold"
        )));
    }
    if spec.min_sccs >= 2 && spec.data_width == 0 {
        return Err(HarnessError::Infeasible(
            "two multi-element SCCs need a feedback datapath".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let states: Vec<String> = (0..k).map(|i| format!("S{i}")).collect();
    let inputs: Vec<String> = (0..n_in).map(|i| format!("in{i}")).collect();
    let mut transitions = Vec::new();
    let mut offsets: Vec<usize> = (2..k).collect();
    offsets.shuffle(&mut rng);
    offsets.truncate(deg - 1);
    offsets.insert(0, 1);
    for i in 0..k {
        let dsts: Vec<usize> = offsets.iter().map(|o| (i + o) % k).collect();
        let mut minterms: Vec<usize> = (0..1usize << n_in).collect();
        minterms.shuffle(&mut rng);
        for (d, m) in dsts.into_iter().zip(minterms) {
            let guard: Cube = inputs
                .iter()
                .enumerate()
                .map(|(b, n)| (n.clone(), m >> b & 1 == 1))
                .collect();
            transitions.push(Transition {
                from: states[i].clone(),
                guard,
                to: states[d].clone(),
            });
        }
    }
    let outputs: Vec<String> = OUTPUTS.iter().map(|s| s.to_string()).collect();
    // Outputs that drive a datapath control; every state asserts one of them.
    let live: Vec<usize> = [
        spec.counter_width > 0,
        spec.data_width > 0,
        spec.data_width > 0,
    ]
    .iter()
    .enumerate()
    .filter(|(_, &on)| on)
    .map(|(j, _)| j)
    .collect();
    let mut moore: Vec<Vec<bool>> = (0..k)
        .map(|_| (0..outputs.len()).map(|_| rng.gen()).collect())
        .collect();
    loop {
        let mut changed = false;
        for row in moore.iter_mut() {
            if !live.is_empty() && !live.iter().any(|&j| row[j]) {
                row[live[rng.gen_range(0..live.len())]] = true;
                changed = true;
            }
        }
        for j in 0..outputs.len() {
            let ones = moore.iter().filter(|r| r[j]).count();
            let forced = live.len() == 1 && live[0] == j;
            if ones == 0 || (ones == k && !forced) {
                let s = rng.gen_range(0..k);
                moore[s][j] = !moore[s][j];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let fsm = FsmSpec {
        name: format!("bench{}", spec.seed),
        encoding: if spec.one_hot {
            Encoding::OneHot
        } else {
            Encoding::Binary
        },
        inputs,
        reset: states[0].clone(),
        transitions,
        moore: states.iter().cloned().zip(moore).collect(),
        states,
        outputs,
    };

    let mut dp = DatapathSpec::default();
    if spec.counter_width > 0 {
        dp.counters.push(Counter {
            name: "cnt".into(),
            width: spec.counter_width,
            enable: Some(OUTPUTS[0].into()),
            direction: Direction::Up,
            replicas: 0,
            saturate: true,
        });
        dp.wiring.insert("cnt_out".into(), "cnt".into());
    }
    if spec.data_width > 0 {
        let w = spec.data_width;
        let mask = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        let c = rng.gen::<u64>() & mask;
        let r = |n: &str| Box::new(WordExpr::Ref(n.into()));
        dp.word_inputs.push(WordInput {
            name: "din".into(),
            width: w,
        });
        dp.regs.push(DataReg {
            name: "acc".into(),
            width: w,
            update: {
                let rot = Box::new(WordExpr::Rotl(r("acc"), 1));
                let mixed = Box::new(WordExpr::Xor(r("din"), Box::new(WordExpr::Const(c))));
                match spec.acc_op {
                    AccOp::Xor => WordExpr::Xor(rot, mixed),
                    AccOp::Add => WordExpr::Add(rot, mixed),
                }
            },
            enable: Some(OUTPUTS[1].into()),
            load: Some(Load {
                select: OUTPUTS[2].into(),
                source: WordExpr::Ref("din".into()),
            }),
            reset: true,
        });
        dp.wiring.insert("acc_out".into(), "acc".into());
    }
    let design = synthesize(&fsm, &dp, &SynthOptions::default())?;
    let sccs = tarjan_scc(
        &FfGraph::build(&design.netlist),
        EdgeFilter::Combinational,
        false,
    );
    let multi = sccs.multi_element().count();
    if multi < spec.min_sccs {
        return Err(HarnessError::Infeasible(format!(
            "{multi} multi-element SCCs, {} requested",
            spec.min_sccs
        )));
    }
    Ok(Benchmark {
        spec: spec.clone(),
        fsm,
        dp,
        design,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let s = BenchmarkSpec::for_seed(4);
        let a = gen_benchmark(&s).unwrap();
        let b = gen_benchmark(&s).unwrap();
        assert_eq!(a.fsm, b.fsm);
        assert_eq!(a.design.netlist, b.design.netlist);
    }

    #[test]
    fn two_multi_element_sccs() {
        let s = BenchmarkSpec {
            states: 6,
            ..BenchmarkSpec::for_seed(2)
        };
        let b = gen_benchmark(&s).unwrap();
        let r = tarjan_scc(
            &FfGraph::build(&b.design.netlist),
            EdgeFilter::Combinational,
            false,
        );
        assert!(r.multi_element().count() >= 2);
    }

    #[test]
    fn no_datapath_rejected_when_two_sccs_requested() {
        let s = BenchmarkSpec {
            data_width: 0,
            ..BenchmarkSpec::for_seed(2)
        };
        assert!(matches!(
            gen_benchmark(&s),
            Err(HarnessError::Infeasible(_))
        ));
        let one = BenchmarkSpec {
            data_width: 0,
            min_sccs: 1,
            ..BenchmarkSpec::for_seed(2)
        };
        assert!(gen_benchmark(&one).is_ok());
    }
}
