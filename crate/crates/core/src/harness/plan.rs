// SPDX-License-Identifier: Apache-2.0

//! Pipeline plan, loadable from TOML.

use serde::{Deserialize, Serialize};

use super::bench::BenchmarkSpec;
use super::HarnessError;
use crate::obfuscate::AttachMode;
use crate::relic::{Matching, RelicParams};
use crate::topo::{ControlStep, TopoParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpMethod {
    #[default]
    None,
    Ra,
    Rb,
    /// `ra` on one-hot designs, `rb` otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attach {
    #[default]
    Or,
    Marker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefensePlan {
    /// Added copies per state bit; 0 disables replication.
    pub replicas: usize,
    pub replicate_counters: bool,
    pub fp: FpMethod,
    /// State bit treated by the feedback-path rewrite.
    pub fp_bit: usize,
    pub honeypot: bool,
    pub hp_seed: u64,
    pub hp_transition_mutations: usize,
    pub hp_output_mutations: usize,
    /// Seeds tried by the tuner; 0 uses `hp_seed` as is.
    pub tune_iters: usize,
    pub attach: Attach,
    /// Control nets the honeypot attaches to; empty means all.
    pub hp_targets: Vec<String>,
}

impl Default for DefensePlan {
    fn default() -> Self {
        DefensePlan {
            replicas: 0,
            replicate_counters: false,
            fp: FpMethod::None,
            fp_bit: 0,
            honeypot: false,
            hp_seed: 0,
            hp_transition_mutations: 2,
            hp_output_mutations: 1,
            tune_iters: 0,
            attach: Attach::Or,
            hp_targets: Vec::new(),
        }
    }
}

impl DefensePlan {
    pub fn is_empty(&self) -> bool {
        self.replicas == 0 && self.fp == FpMethod::None && !self.honeypot
    }

    pub fn attach_mode(&self) -> AttachMode {
        match self.attach {
            Attach::Or => AttachMode::NeverActivatedOr,
            Attach::Marker => AttachMode::StandaloneMarker,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    Off,
    #[default]
    Structural,
    Functional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackPlan {
    pub relic: bool,
    pub topo: bool,
    pub depth_limit: usize,
    pub top_k: usize,
    pub weights: [f64; 4],
    pub optimal_matching: bool,
    pub theta: f64,
    pub require_high_fp: bool,
    pub control: ControlMode,
}

impl Default for AttackPlan {
    fn default() -> Self {
        let r = RelicParams::default();
        let t = TopoParams::default();
        AttackPlan {
            relic: true,
            topo: true,
            depth_limit: r.depth_limit,
            top_k: r.top_k,
            weights: r.weights,
            optimal_matching: false,
            theta: t.theta,
            require_high_fp: t.require_high_fp,
            control: ControlMode::Structural,
        }
    }
}

impl AttackPlan {
    pub fn relic_params(&self) -> RelicParams {
        RelicParams {
            depth_limit: self.depth_limit,
            top_k: self.top_k,
            weights: self.weights,
            matching: if self.optimal_matching {
                Matching::Optimal
            } else {
                Matching::Greedy
            },
        }
    }

    pub fn topo_params(&self) -> TopoParams {
        TopoParams {
            require_high_fp: self.require_high_fp,
            theta: self.theta,
            control_step: match self.control {
                ControlMode::Off => ControlStep::Off,
                ControlMode::Structural => ControlStep::Structural,
                ControlMode::Functional => ControlStep::Functional,
            },
            ..TopoParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckPlan {
    /// Random vectors for the honeypot output comparison.
    pub vectors: usize,
    pub max_inputs: usize,
    pub seed: u64,
}

impl Default for CheckPlan {
    fn default() -> Self {
        CheckPlan {
            vectors: 1000,
            max_inputs: crate::stg::DEFAULT_MAX_INPUTS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Plan {
    pub benchmark: BenchmarkSpec,
    pub defense: DefensePlan,
    pub attack: AttackPlan,
    pub checks: CheckPlan,
}

impl Plan {
    pub fn from_toml(text: &str) -> Result<Plan, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Plan(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_defaults() {
        let p = Plan::from_toml("[benchmark]\nseed = 3\n[defense]\nreplicas = 2\nfp = \"auto\"\n")
            .unwrap();
        assert_eq!(p.benchmark, BenchmarkSpec::for_seed(3));
        assert_eq!(p.defense.fp, FpMethod::Auto);
        assert!(p.attack.relic);
        assert_eq!(Plan::from_toml(&p.to_toml()).unwrap(), p);
        assert!(Plan::from_toml("[defense]\nbogus = 1\n").is_err());
    }
}
