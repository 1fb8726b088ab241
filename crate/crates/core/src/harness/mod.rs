// SPDX-License-Identifier: Apache-2.0

//! Benchmarks, end-to-end runs and reports.

mod bench;
mod overhead;
mod pipeline;
mod plan;

use crate::metrics::EvalError;
use crate::obfuscate::ObfError;
use crate::relic::RelicError;
use crate::stg::StgError;
use crate::synth::SynthError;

pub use bench::{gen_benchmark, AccOp, Benchmark, BenchmarkSpec, OUTPUTS};
pub use overhead::{area, depth, gate_area, overhead, OverheadReport, FF_AREA};
pub use pipeline::{
    first_output_mismatch, run_pipeline, Check, PipelineReport, Score, StageReport,
};
pub use plan::{Attach, AttackPlan, CheckPlan, ControlMode, DefensePlan, FpMethod, Plan};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("infeasible benchmark: {0}")]
    Infeasible(String),
    #[error("plan: {0}")]
    Plan(String),
    #[error("behavior preservation failed: {0}")]
    Preservation(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Obf(#[from] ObfError),
    #[error(transparent)]
    Stg(#[from] StgError),
    #[error(transparent)]
    Relic(#[from] RelicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Netlist(#[from] crate::netlist::NetlistError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
