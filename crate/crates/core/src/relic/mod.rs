// SPDX-License-Identifier: Apache-2.0

//! Cone-similarity scoring of flip-flops and SCC-based state register
//! selection.
//!
//! Each FF gets four raw features:
//!
//! * `f1 = 1 - max_j s(i, j)`, its dissimilarity to the closest other FF;
//! * `f2 = 1 - mean of the top-k s(i, j)`;
//! * `f3`, the fraction of control signals its Q reaches combinationally;
//! * `f4 = 1` when it lies on a feedback path.
//!
//! Features are standardized over all FFs (population standard deviation,
//! zero when constant) and combined linearly. The FF with the largest score
//! picks its SCC; every member of that SCC is reported as a state FF.

mod similarity;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use crate::graph::{on_feedback_path, tarjan_scc, ControlInfo, EdgeFilter, FfGraph, SccReport};
use crate::metrics::AttackResult;
use crate::netlist::{Netlist, NetlistIndex};

pub use similarity::{
    greedy_match, optimal_match, pair_similarity, pair_similarity_with, Matching, ShapeArena,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RelicError {
    #[error("scoring needs at least two flip-flops, found {0}")]
    TooFewFfs(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelicParams {
    pub depth_limit: usize,
    pub top_k: usize,
    pub weights: [f64; 4],
    pub matching: Matching,
}

impl Default for RelicParams {
    fn default() -> Self {
        RelicParams {
            depth_limit: 6,
            top_k: 5,
            weights: [1.0, 1.0, 0.5, 0.5],
            matching: Matching::Greedy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    /// FF names, sorted.
    pub ffs: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub depth_limit: usize,
}

/// Pairwise D-cone similarity of all FFs.
pub fn similarity_matrix(nl: &Netlist, params: &RelicParams) -> SimilarityMatrix {
    let idx = NetlistIndex::new(nl);
    let mut order: Vec<usize> = (0..nl.ffs.len()).collect();
    order.sort_by(|&a, &b| nl.ffs[a].name.cmp(&nl.ffs[b].name));
    let mut arena = ShapeArena::new(params.matching);
    let mut memo = HashMap::new();
    let shapes: Vec<u32> = order
        .iter()
        .map(|&fi| arena.cone(&idx, idx.ff_d[fi], params.depth_limit, &mut memo))
        .collect();
    let n = order.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = arena.similarity(shapes[i], shapes[j]);
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    SimilarityMatrix {
        ffs: order.iter().map(|&fi| nl.ffs[fi].name.clone()).collect(),
        values,
        depth_limit: params.depth_limit,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZScoreTable {
    pub scores: BTreeMap<String, f64>,
    /// Raw `[f1, f2, f3, f4]` per FF.
    pub features: BTreeMap<String, [f64; 4]>,
}

impl ZScoreTable {
    pub fn max_over<'a>(&self, ffs: impl IntoIterator<Item = &'a String>) -> Option<f64> {
        ffs.into_iter()
            .filter_map(|f| self.scores.get(f).copied())
            .max_by(f64::total_cmp)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["ff", "z", "f1", "f2", "f3", "f4"])
            .expect("in-memory write");
        for (ff, z) in &self.scores {
            let f = self.features[ff];
            let mut rec = vec![ff.clone(), format!("{z:.6}")];
            rec.extend(f.iter().map(|v| format!("{v:.6}")));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Per-FF composite scores.
pub fn zscores(nl: &Netlist, params: &RelicParams) -> Result<ZScoreTable, RelicError> {
    if nl.ffs.len() < 2 {
        return Err(RelicError::TooFewFfs(nl.ffs.len()));
    }
    let sim = similarity_matrix(nl, params);
    let idx = NetlistIndex::new(nl);
    let graph = FfGraph::build_indexed(&idx);
    let control = ControlInfo::new(&idx);
    let n = sim.ffs.len();
    let raw: Vec<[f64; 4]> = sim
        .ffs
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut others: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| sim.values[i][j])
                .collect();
            others.sort_by(|a, b| b.total_cmp(a));
            let k = params.top_k.clamp(1, others.len());
            let f1 = 1.0 - others[0];
            let f2 = 1.0 - others[..k].iter().sum::<f64>() / k as f64;
            let fi = idx.ff_index(name).expect("known FF");
            let f3 = if control.signals.is_empty() {
                0.0
            } else {
                control.influenced_by(fi) as f64 / control.signals.len() as f64
            };
            let g = graph.id(name).expect("known FF");
            let f4 = if on_feedback_path(&graph, g) {
                1.0
            } else {
                0.0
            };
            [f1, f2, f3, f4]
        })
        .collect();
    let mut std_feats = vec![[0.0; 4]; n];
    for k in 0..4 {
        let col: Vec<f64> = raw.iter().map(|r| r[k]).collect();
        for (i, z) in standardize(&col).into_iter().enumerate() {
            std_feats[i][k] = z;
        }
    }
    let mut scores = BTreeMap::new();
    let mut features = BTreeMap::new();
    for (i, name) in sim.ffs.iter().enumerate() {
        let z: f64 = (0..4).map(|k| params.weights[k] * std_feats[i][k]).sum();
        scores.insert(name.clone(), z);
        features.insert(name.clone(), raw[i]);
    }
    Ok(ZScoreTable { scores, features })
}

/// Population standardization; all zeros when the column is constant.
pub fn standardize(col: &[f64]) -> Vec<f64> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd < 1e-12 {
        vec![0.0; col.len()]
    } else {
        col.iter().map(|x| (x - mean) / sd).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub argmax: String,
    /// Every FF sharing the maximum score, when more than one.
    pub ties: Vec<String>,
    pub scc: Option<usize>,
    pub identified: BTreeSet<String>,
}

/// Picks the highest-scoring FF (smallest name on ties) and returns its SCC.
pub fn select_by_zscore(scores: &BTreeMap<String, f64>, sccs: &SccReport) -> Option<Selection> {
    let best = scores.values().copied().max_by(f64::total_cmp)?;
    let tied: Vec<String> = scores
        .iter()
        .filter(|(_, &z)| z == best)
        .map(|(f, _)| f.clone())
        .collect();
    let argmax = tied[0].clone();
    let scc = sccs.scc_of(&argmax).filter(|&i| sccs.sccs[i].len() > 1);
    let identified = match scc {
        Some(i) => sccs.sccs[i].iter().cloned().collect(),
        None => [argmax.clone()].into(),
    };
    Some(Selection {
        argmax,
        ties: if tied.len() > 1 { tied } else { Vec::new() },
        scc,
        identified,
    })
}

#[derive(Debug, Clone)]
pub struct RelicOutcome {
    pub table: ZScoreTable,
    pub sccs: SccReport,
    pub selection: Selection,
    pub result: AttackResult,
}

impl RelicOutcome {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "argmax {}", self.selection.argmax);
        if !self.selection.ties.is_empty() {
            let _ = writeln!(s, "ties {}", self.selection.ties.join(" "));
        }
        match self.selection.scc {
            Some(i) => {
                let _ = writeln!(s, "selected_scc {i}");
            }
            None => s.push_str("selected_scc none\n"),
        }
        s
    }
}

pub fn relic_tarjan(nl: &Netlist, params: &RelicParams) -> Result<RelicOutcome, RelicError> {
    let table = zscores(nl, params)?;
    let sccs = tarjan_scc(&FfGraph::build(nl), EdgeFilter::Combinational, false);
    let selection = select_by_zscore(&table.scores, &sccs).expect("at least two FFs");
    let result = AttackResult {
        identified: selection.identified.clone(),
        selected_scc: selection.scc,
        metrics: None,
    };
    Ok(RelicOutcome {
        table,
        sccs,
        selection,
        result,
    })
}
