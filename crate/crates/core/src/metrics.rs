// SPDX-License-Identifier: Apache-2.0

//! Identification results and their scoring against ground truth.

use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyTruth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// |identified ∩ truth| / |truth|
    pub sensitivity: f64,
    /// |identified ∩ truth| / |identified|; 0 when nothing was identified.
    pub precision: f64,
    pub hits: usize,
    pub truth: usize,
}

impl Metrics {
    /// An attack succeeds when every true state FF was identified.
    pub fn success(&self) -> bool {
        self.hits == self.truth
    }
}

pub fn evaluate(
    identified: &BTreeSet<String>,
    truth: &BTreeSet<String>,
) -> Result<Metrics, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    let hits = identified.intersection(truth).count();
    Ok(Metrics {
        sensitivity: hits as f64 / truth.len() as f64,
        precision: if identified.is_empty() {
            0.0
        } else {
            hits as f64 / identified.len() as f64
        },
        hits,
        truth: truth.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub identified: BTreeSet<String>,
    /// Index into the attack's SCC report, when one was selected.
    pub selected_scc: Option<usize>,
    pub metrics: Option<Metrics>,
}

impl AttackResult {
    pub fn score(&mut self, truth: &BTreeSet<String>) -> Result<Metrics, EvalError> {
        let m = evaluate(&self.identified, truth)?;
        self.metrics = Some(m);
        Ok(m)
    }
}
