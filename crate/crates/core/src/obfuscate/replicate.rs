// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::ObfError;
use crate::synth::{encode, DatapathSpec, Encoding, FsmSpec};

/// `replicas` is the number of added copies; each bit becomes `1 + replicas` FFs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplicationPlan {
    pub replicas: usize,
    pub counters: Vec<String>,
    pub allow_one_hot: bool,
}

/// Repeats every code bit `1 + r` times in place (bit i lands on positions
/// `i(1+r) .. (i+1)(1+r)`), producing an explicit encoding.
pub fn replicate_state_bits(fsm: &FsmSpec, plan: &ReplicationPlan) -> Result<FsmSpec, ObfError> {
    if plan.replicas == 0 {
        return Err(ObfError::NoReplicas);
    }
    if fsm.encoding == Encoding::OneHot && !plan.allow_one_hot {
        return Err(ObfError::OneHotReplication);
    }
    fsm.validate()?;
    let copies = 1 + plan.replicas;
    let codes = encode(fsm)?;
    let map = fsm
        .states
        .iter()
        .zip(codes)
        .map(|(s, c)| {
            let wide = c
                .iter()
                .flat_map(|&b| std::iter::repeat_n(b, copies))
                .collect();
            (s.clone(), wide)
        })
        .collect();
    Ok(FsmSpec {
        encoding: Encoding::Explicit(map),
        ..fsm.clone()
    })
}

pub fn replicate_counter(
    dp: &DatapathSpec,
    counter: &str,
    plan: &ReplicationPlan,
) -> Result<DatapathSpec, ObfError> {
    if plan.replicas == 0 {
        return Err(ObfError::NoReplicas);
    }
    let mut out = dp.clone();
    let c = out
        .counters
        .iter_mut()
        .find(|c| c.name == counter)
        .ok_or_else(|| ObfError::UnknownCounter(counter.to_string()))?;
    c.replicas = plan.replicas;
    Ok(out)
}

/// State bits plus every counter named in the plan.
pub fn replicate(
    fsm: &FsmSpec,
    dp: &DatapathSpec,
    plan: &ReplicationPlan,
) -> Result<(FsmSpec, DatapathSpec), ObfError> {
    let fsm = replicate_state_bits(fsm, plan)?;
    let mut dp = dp.clone();
    for c in &plan.counters {
        dp = replicate_counter(&dp, c, plan)?;
    }
    Ok((fsm, dp))
}

/// Projection from replicated bit names onto the original ones.
pub fn replica_bit_map(
    orig: &[String],
    replicated: &[String],
    replicas: usize,
) -> BTreeMap<String, String> {
    replicated
        .iter()
        .enumerate()
        .filter_map(|(k, n)| orig.get(k / (1 + replicas)).map(|o| (n.clone(), o.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{code_str, Counter, Direction};

    fn six_state() -> FsmSpec {
        FsmSpec {
            name: "m".into(),
            states: (0..6).map(|i| format!("S{i}")).collect(),
            encoding: Encoding::Binary,
            inputs: vec![],
            reset: "S0".into(),
            transitions: vec![],
            outputs: vec![],
            moore: BTreeMap::new(),
        }
    }

    #[test]
    fn nine_bit_labels() {
        let plan = ReplicationPlan {
            replicas: 2,
            ..Default::default()
        };
        let r = replicate_state_bits(&six_state(), &plan).unwrap();
        let codes = encode(&r).unwrap();
        assert_eq!(code_str(&codes[1]), "000000111");
        assert_eq!(code_str(&codes[4]), "111000000");
    }

    #[test]
    fn one_hot_needs_opt_in() {
        let mut f = six_state();
        f.encoding = Encoding::OneHot;
        let plan = ReplicationPlan {
            replicas: 1,
            ..Default::default()
        };
        assert!(matches!(
            replicate_state_bits(&f, &plan),
            Err(ObfError::OneHotReplication)
        ));
        let ok = ReplicationPlan {
            allow_one_hot: true,
            ..plan
        };
        assert_eq!(
            encode(&replicate_state_bits(&f, &ok).unwrap()).unwrap()[0].len(),
            12
        );
    }

    #[test]
    fn counter_replicas_and_errors() {
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
        let plan = ReplicationPlan {
            replicas: 2,
            ..Default::default()
        };
        assert_eq!(
            replicate_counter(&dp, "c", &plan).unwrap().counters[0].replicas,
            2
        );
        assert!(matches!(
            replicate_counter(&dp, "x", &plan),
            Err(ObfError::UnknownCounter(_))
        ));
        let zero = ReplicationPlan::default();
        assert!(matches!(
            replicate_counter(&dp, "c", &zero),
            Err(ObfError::NoReplicas)
        ));
    }

    #[test]
    fn bit_map_groups() {
        let orig: Vec<String> = vec!["a".into(), "b".into()];
        let rep: Vec<String> = (0..4).map(|i| format!("r{i}")).collect();
        let m = replica_bit_map(&orig, &rep, 1);
        assert_eq!(m["r1"], "a");
        assert_eq!(m["r2"], "b");
    }
}
