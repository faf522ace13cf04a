//! Run reports for the `build` and `stats` commands.

use serde::Serialize;

use crate::graph::{components, node_metrics, DimSet, ExposomeGraph, HubElement};
use crate::ingest::ParseOutcome;
use crate::model::PathologyLevel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub records_accepted: usize,
    pub records_rejected: usize,
    pub warnings: usize,
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    pub isolated: usize,
}

/// Five-number-ish summary of a non-negative integer sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Distribution {
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub p50: u64,
    pub p90: u64,
}

impl Distribution {
    /// Nearest-rank percentiles; an empty sample is all zeros.
    pub fn of(mut sample: Vec<u64>) -> Self {
        if sample.is_empty() {
            return Self::default();
        }
        sample.sort_unstable();
        let n = sample.len();
        let rank = |p: usize| sample[(p * n).div_ceil(100).max(1) - 1];
        Distribution {
            min: sample[0],
            max: sample[n - 1],
            mean: sample.iter().map(|&v| v as f64).sum::<f64>() / n as f64,
            p50: rank(50),
            p90: rank(90),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Distributions {
    pub weight: Distribution,
    pub degree: Distribution,
    pub multi_exposure: Distribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub level: PathologyLevel,
    pub dims: DimSet,
    pub counts: Counts,
    pub distributions: Distributions,
    pub hub_elements: Vec<HubElement>,
}

impl StatsReport {
    pub fn new(graph: &ExposomeGraph, outcome: Option<&ParseOutcome>) -> Self {
        let comps = components(graph);
        let metrics = node_metrics(graph);
        let config = graph.config();
        let (accepted, rejected, warnings) = outcome
            .map(|o| (o.records.len(), o.rejects.len(), o.warnings.len()))
            .unwrap_or((0, 0, 0));
        StatsReport {
            level: config.level,
            dims: config.dims,
            counts: Counts {
                records_accepted: accepted,
                records_rejected: rejected,
                warnings,
                nodes: graph.node_count(),
                edges: graph.edge_count(),
                components: comps.len(),
                isolated: comps.isolated_count(),
            },
            distributions: Distributions {
                weight: Distribution::of(graph.nodes().iter().map(|n| n.weight).collect()),
                degree: Distribution::of(metrics.iter().map(|m| m.degree as u64).collect()),
                multi_exposure: Distribution::of(
                    metrics.iter().map(|m| m.multi_exposure as u64).collect(),
                ),
            },
            hub_elements: graph.hub_elements().to_vec(),
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        let c = &self.counts;
        if c.isolated > c.nodes {
            return Err(format!("isolated {} > nodes {}", c.isolated, c.nodes));
        }
        if c.edges == 0 && c.isolated != c.nodes {
            return Err(format!(
                "no edges but isolated {} != nodes {}",
                c.isolated, c.nodes
            ));
        }
        if c.components > c.nodes {
            return Err(format!("components {} > nodes {}", c.components, c.nodes));
        }
        Ok(())
    }

    /// One-paragraph human summary.
    pub fn summary(&self) -> String {
        let c = &self.counts;
        let mut s = format!(
            "{} records accepted, {} rejected; {} nodes ({} isolated), {} edges, {} components at {} level over {}",
            c.records_accepted,
            c.records_rejected,
            c.nodes,
            c.isolated,
            c.edges,
            c.components,
            self.level,
            self.dims
        );
        if !self.hub_elements.is_empty() {
            s.push_str(&format!("; {} hub elements", self.hub_elements.len()));
        }
        s
    }
}
