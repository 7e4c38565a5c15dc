use serde::Serialize;

use super::metrics::{required_sample_size, SampleSizeQuery};
use super::{Mode, Problem, VerifyOptions};
use crate::distribution::CompoundGroup;
use crate::ssat::SolverStats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PpvRecord {
    pub group: CompoundGroup,
    pub ppv: f64,
    /// Rows the probabilities were estimated from.
    pub conditioning: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stats {
    pub solves: u64,
    pub decisions: u64,
    pub cache_hits: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl Stats {
    pub fn from_solver(solves: u64, s: &SolverStats) -> Stats {
        Stats {
            solves,
            decisions: s.decisions,
            cache_hits: s.cache_hits,
            wall_ms: None,
        }
    }

    pub fn add(&mut self, other: &Stats) {
        self.solves += other.solves;
        self.decisions += other.decisions;
        self.cache_hits += other.cache_hits;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualizedOdds {
    pub tpr_gap: f64,
    pub fpr_gap: f64,
    pub eo: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricValues {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub di: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eo: Option<EqualizedOdds>,
}

/// How many rows would make the estimated metrics reliable, against how
/// many were given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guideline {
    pub epsilon0: f64,
    pub delta: f64,
    pub protected_vars: u64,
    pub random_vars: u64,
    pub recommended_rows: u64,
    pub rows: usize,
}

impl Guideline {
    /// `None` with fewer than two non-protected variables or invalid
    /// parameters.
    pub fn new(problem: &Problem, options: &VerifyOptions) -> Option<Guideline> {
        let q = SampleSizeQuery {
            n: problem.map.protected_vars().len() as u64,
            m: problem.map.random_vars().len() as u64,
            epsilon0: options.epsilon0,
            delta: options.delta,
        };
        let k = required_sample_size(q).ok()?;
        Some(Guideline {
            epsilon0: q.epsilon0,
            delta: q.delta,
            protected_vars: q.n,
            random_vars: q.m,
            recommended_rows: k,
            rows: problem.data.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub probabilities: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<PpvRecord>,
    pub favored: PpvRecord,
    pub unfavored: PpvRecord,
    pub metrics: MetricValues,
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guideline: Option<Guideline>,
    pub stats: Stats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    pub tolerance: f64,
    pub enum_max: f64,
    pub enum_min: f64,
    pub learn_max: f64,
    pub learn_min: f64,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    pub mode: Mode,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub single: Option<PipelineReport>,
    #[serde(rename = "enum", skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<PipelineReport>,
    #[serde(rename = "learn", skip_serializing_if = "Option::is_none")]
    pub learning: Option<PipelineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

impl FairnessReport {
    /// The report of the selected pipeline, or enumeration in `both` mode.
    pub fn primary(&self) -> &PipelineReport {
        self.single
            .as_ref()
            .or(self.enumeration.as_ref())
            .expect("a report always holds a pipeline")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
