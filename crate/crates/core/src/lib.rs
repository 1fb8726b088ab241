// SPDX-License-Identifier: Apache-2.0

//! Synthesis, state-register identification attacks, and FSM obfuscation on
//! small gate-level netlists.

pub mod graph;
pub mod harness;
pub mod metrics;
pub mod netlist;
pub mod obfuscate;
pub mod relic;
pub mod stg;
pub mod synth;
pub mod topo;
