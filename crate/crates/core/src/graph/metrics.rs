use serde::Serialize;

use super::ExposomeGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeMetrics {
    pub degree: usize,
    /// Distinct exposure elements over the configured dims.
    pub multi_exposure: usize,
    /// Distinct neighbouring nodes.
    pub diversity: usize,
}

/// Per-node metrics, aligned with `graph.nodes()`.
pub fn node_metrics(graph: &ExposomeGraph) -> Vec<NodeMetrics> {
    let dims = graph.config().dims;
    graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| NodeMetrics {
            degree: graph.degree(i),
            multi_exposure: node.exposure.count(dims),
            // the graph is simple, so neighbours and incident edges coincide
            diversity: graph.degree(i),
        })
        .collect()
}
