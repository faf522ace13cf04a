use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    DimSet, Element, ExposomeGraph, ExposomeNode, ExposureSet, GraphConfig, GraphError, HubElement,
    NodeKey,
};
use crate::ingest::IdentityLedger;
use crate::model::{pathology_at, Hierarchy, PathologyLevel};

/// Elements shared by more nodes than this are reported as hubs.
pub const DEFAULT_HUB_THRESHOLD: usize = 5_000;

// Nodes processed per parallel batch when emitting edges.
const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildAlgorithm {
    /// Inverted index from element to nodes; work scales with co-exposure.
    #[default]
    Indexed,
    /// Every pair of nodes is intersected directly. Debug/oracle use only.
    Quadratic,
}

/// Configurable graph construction.
#[derive(Debug, Clone)]
pub struct GraphBuilder<'h> {
    config: GraphConfig,
    hierarchy: Option<&'h Hierarchy>,
    hub_threshold: usize,
    algorithm: BuildAlgorithm,
    parallel: bool,
}

impl<'h> GraphBuilder<'h> {
    pub fn new(config: GraphConfig) -> Self {
        Self {
            config,
            hierarchy: None,
            hub_threshold: DEFAULT_HUB_THRESHOLD,
            algorithm: BuildAlgorithm::Indexed,
            parallel: true,
        }
    }

    pub fn hierarchy(mut self, hierarchy: Option<&'h Hierarchy>) -> Self {
        self.hierarchy = hierarchy;
        self
    }

    pub fn hub_threshold(mut self, threshold: usize) -> Self {
        self.hub_threshold = threshold;
        self
    }

    pub fn algorithm(mut self, algorithm: BuildAlgorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn build(&self, ledger: &IdentityLedger) -> Result<ExposomeGraph, GraphError> {
        let level = self.config.level;
        let mut groups: BTreeMap<NodeKey, (u64, ExposureSet)> = BTreeMap::new();
        for (identity, entry) in ledger.iter() {
            let code = pathology_at(&identity.pathology, level, self.hierarchy)?;
            let key = match level {
                PathologyLevel::Disease => NodeKey::Ohp(identity.clone()),
                _ => NodeKey::Pathology(code),
            };
            let slot = groups.entry(key).or_default();
            slot.0 += entry.weight;
            slot.1.union_with(&ExposureSet::of_identity(identity));
        }
        Ok(self.assemble(groups))
    }

    fn assemble(&self, groups: BTreeMap<NodeKey, (u64, ExposureSet)>) -> ExposomeGraph {
        let nodes: Vec<ExposomeNode> = groups
            .into_iter()
            .map(|(key, (weight, exposure))| ExposomeNode {
                key,
                weight,
                exposure,
            })
            .collect();
        connect(
            self.config,
            nodes,
            self.hub_threshold,
            self.algorithm,
            self.parallel,
        )
    }
}

/// Builds the graph with the indexed algorithm and no hierarchy table.
pub fn build_graph(ledger: &IdentityLedger, config: GraphConfig) -> ExposomeGraph {
    GraphBuilder::new(config)
        .build(ledger)
        .expect("the prefix rule cannot fail")
}

/// Re-groups an already built graph at a coarser pathology level.
///
/// The result equals a direct build of the same ledger at `level`.
pub fn aggregate(
    graph: &ExposomeGraph,
    level: PathologyLevel,
    hierarchy: Option<&Hierarchy>,
) -> Result<ExposomeGraph, GraphError> {
    let source_level = graph.config.level;
    if !level.is_coarser_than(source_level) {
        return Err(GraphError::LevelNotCoarser {
            source_level,
            target: level,
        });
    }
    let mut groups: BTreeMap<NodeKey, (u64, ExposureSet)> = BTreeMap::new();
    for node in &graph.nodes {
        let code = pathology_at(node.key.pathology(), level, hierarchy)?;
        let slot = groups.entry(NodeKey::Pathology(code)).or_default();
        slot.0 += node.weight;
        slot.1.union_with(&node.exposure);
    }
    let config = GraphConfig::new(graph.config.dims, level);
    Ok(GraphBuilder::new(config)
        .hub_threshold(graph.hub_threshold)
        .assemble(groups))
}

struct Interned {
    elements: Vec<Element>,
    postings: Vec<Vec<u32>>,
    node_elements: Vec<Vec<u32>>,
}

fn intern(nodes: &[ExposomeNode], dims: DimSet) -> Interned {
    let mut index: BTreeMap<(super::Dimension, &str), Vec<u32>> = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        for dim in dims.iter() {
            for token in node.exposure.get(dim) {
                index
                    .entry((dim, token.as_str()))
                    .or_default()
                    .push(i as u32);
            }
        }
    }
    let mut elements = Vec::with_capacity(index.len());
    let mut postings = Vec::with_capacity(index.len());
    let mut node_elements = vec![Vec::new(); nodes.len()];
    for (id, ((dim, token), members)) in index.into_iter().enumerate() {
        for &n in &members {
            node_elements[n as usize].push(id as u32);
        }
        elements.push(Element::new(dim, token));
        postings.push(members);
    }
    Interned {
        elements,
        postings,
        node_elements,
    }
}

/// Forward adjacency of one node: targets and, per target, the shared element ids.
#[derive(Default)]
struct Row {
    targets: Vec<u32>,
    shared_len: Vec<u32>,
    shared: Vec<u32>,
}

fn indexed_row(u: usize, interned: &Interned) -> Row {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for &e in &interned.node_elements[u] {
        let posting = &interned.postings[e as usize];
        let start = posting.partition_point(|&v| v as usize <= u);
        pairs.extend(posting[start..].iter().map(|&v| (v, e)));
    }
    pairs.sort_unstable();
    let mut row = Row::default();
    for (v, e) in pairs {
        if row.targets.last() != Some(&v) {
            row.targets.push(v);
            row.shared_len.push(0);
        }
        *row.shared_len.last_mut().unwrap() += 1;
        row.shared.push(e);
    }
    row
}

fn quadratic_row(u: usize, interned: &Interned) -> Row {
    let mut row = Row::default();
    let mine = &interned.node_elements[u];
    for v in u + 1..interned.node_elements.len() {
        let theirs = &interned.node_elements[v];
        let before = row.shared.len();
        let (mut i, mut j) = (0, 0);
        while i < mine.len() && j < theirs.len() {
            match mine[i].cmp(&theirs[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    row.shared.push(mine[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        if row.shared.len() > before {
            row.targets.push(v as u32);
            row.shared_len.push((row.shared.len() - before) as u32);
        }
    }
    row
}

fn connect(
    config: GraphConfig,
    nodes: Vec<ExposomeNode>,
    hub_threshold: usize,
    algorithm: BuildAlgorithm,
    parallel: bool,
) -> ExposomeGraph {
    assert!(nodes.len() <= u32::MAX as usize, "too many nodes");
    let interned = intern(&nodes, config.dims);
    let row_fn = match algorithm {
        BuildAlgorithm::Indexed => indexed_row,
        BuildAlgorithm::Quadratic => quadratic_row,
    };

    let n = nodes.len();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::new();
    let mut shared_offsets = vec![0usize];
    let mut shared = Vec::new();
    let mut degrees = vec![0u32; n];
    offsets.push(0);

    let mut start = 0;
    while start < n {
        let end = (start + BATCH).min(n);
        let rows: Vec<Row> = if parallel {
            (start..end)
                .into_par_iter()
                .map(|u| row_fn(u, &interned))
                .collect()
        } else {
            (start..end).map(|u| row_fn(u, &interned)).collect()
        };
        for (u, row) in (start..end).zip(rows) {
            degrees[u] += row.targets.len() as u32;
            for &v in &row.targets {
                degrees[v as usize] += 1;
            }
            targets.extend_from_slice(&row.targets);
            for len in row.shared_len {
                let last = *shared_offsets.last().unwrap();
                shared_offsets.push(last + len as usize);
            }
            shared.extend_from_slice(&row.shared);
            offsets.push(targets.len());
        }
        start = end;
    }
    let hubs = interned
        .postings
        .iter()
        .zip(&interned.elements)
        .filter(|(p, _)| p.len() > hub_threshold)
        .map(|(p, e)| HubElement {
            element: e.clone(),
            nodes: p.len(),
        })
        .collect();

    targets.shrink_to_fit();
    shared.shrink_to_fit();
    shared_offsets.shrink_to_fit();

    ExposomeGraph {
        config,
        hub_threshold,
        nodes,
        elements: interned.elements,
        offsets,
        targets,
        shared_offsets,
        shared,
        degrees,
        hubs,
    }
}
