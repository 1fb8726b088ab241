// SPDX-License-Identifier: Apache-2.0

//! Defenses against state-register identification: replication of state and
//! counter bits, removal of a state bit's combinational self-loop, and
//! insertion of a decoy FSM.

mod honeypot;
mod replicate;
mod rewrite;

use crate::graph::{FeedbackClass, GraphError};
use crate::netlist::NetlistError;
use crate::relic::RelicError;
use crate::synth::SynthError;

pub use honeypot::{
    derive_honeypot, hp_margin, integrate_honeypot, tune_honeypot, AttachMode, HoneypotParams,
    Integration, TuneOutcome, TuneStep,
};
pub use replicate::{
    replica_bit_map, replicate, replicate_counter, replicate_state_bits, ReplicationPlan,
};
pub use rewrite::{rewrite_ra, rewrite_rb, RewriteReport, OBF_INPUT};

#[derive(Debug, thiserror::Error)]
pub enum ObfError {
    #[error("replicas per bit must be at least 1")]
    NoReplicas,
    #[error("one-hot state replication needs an explicit opt-in")]
    OneHotReplication,
    #[error("unknown counter `{0}`")]
    UnknownCounter(String),
    #[error("`{0}` is not a state flip-flop")]
    NotAnSff(String),
    #[error("`{0}` has no high feedback path")]
    NoHighFp(String),
    #[error("state bit {bit} out of range for width {width}")]
    BadBit { bit: usize, width: usize },
    #[error("this rewrite needs a binary or explicit encoding")]
    NeedsBinary,
    #[error("input `{0}` already exists")]
    InputTaken(String),
    #[error("partner codes still collide after widening the encoding")]
    Unsatisfiable,
    #[error("{requested} transition mutations requested, only {available} transitions")]
    MutationBudget { requested: usize, available: usize },
    #[error("{requested} output mutations requested, only {available} output bits")]
    OutputBudget { requested: usize, available: usize },
    #[error("no valid mutant after {0} attempts")]
    NoValidMutant(usize),
    #[error("honeypot has no flip-flops")]
    EmptyHoneypot,
    #[error("honeypot input `{0}` is not mapped to a design input")]
    InputMapIncomplete(String),
    #[error("name `{0}` collides after prefixing")]
    NameCollision(String),
    #[error("unknown attachment target `{0}`")]
    UnknownTarget(String),
    #[error("at least one tuning iteration is required")]
    NoIterations,
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Relic(#[from] RelicError),
}

/// Shorthand for reports.
pub fn fp_str(c: FeedbackClass) -> &'static str {
    match c {
        FeedbackClass::HighFP => "high",
        FeedbackClass::MediumFP => "medium",
        FeedbackClass::LowFP => "low",
        FeedbackClass::NoFP => "none",
    }
}
