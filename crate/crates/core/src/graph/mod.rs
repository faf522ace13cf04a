//! The exposome network.
//!
//! Vertices are OHPs (or pathology groups, at coarser levels) weighted by
//! the number of identical reports they stand for. Two vertices are joined
//! when they share at least one exposure element (agent, occupation or
//! sector, restricted to the configured dimensions). Each edge remembers
//! exactly which elements are shared.
//!
//! Edges are stored once, from the lower-indexed to the higher-indexed
//! node, in a compressed sparse row layout. Node indices follow the
//! lexicographic order of node keys, so two graphs built from the same
//! input compare equal regardless of record order or thread count.

mod build;
mod components;
mod metrics;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HierarchyError, OhpIdentity, PathologyLevel};

pub use build::{aggregate, build_graph, BuildAlgorithm, GraphBuilder, DEFAULT_HUB_THRESHOLD};
pub use components::{components, Components, UnionFind};
pub use metrics::{node_metrics, NodeMetrics};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("target level {target} is not coarser than the graph's level {source_level}")]
    LevelNotCoarser {
        source_level: PathologyLevel,
        target: PathologyLevel,
    },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// One axis of occupational exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Agent,
    Occupation,
    Sector,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Agent, Dimension::Occupation, Dimension::Sector];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Agent => "agent",
            Self::Occupation => "occupation",
            Self::Sector => "sector",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "agent" | "agents" => Ok(Self::Agent),
            "occupation" | "occupations" | "job" => Ok(Self::Occupation),
            "sector" | "sectors" => Ok(Self::Sector),
            other => Err(format!("unknown dimension `{other}`")),
        }
    }
}

/// Non-empty set of exposure dimensions.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimSet(u8);

impl DimSet {
    pub fn all() -> Self {
        DimSet(0b111)
    }

    pub fn agent_only() -> Self {
        DimSet(Dimension::Agent.bit())
    }

    /// Returns `None` for the empty set.
    pub fn from_dims(dims: impl IntoIterator<Item = Dimension>) -> Option<Self> {
        let bits = dims.into_iter().fold(0u8, |acc, d| acc | d.bit());
        (bits != 0).then_some(DimSet(bits))
    }

    /// All seven non-empty subsets, in bitmask order.
    pub fn non_empty_subsets() -> impl Iterator<Item = DimSet> {
        (1u8..8).map(DimSet)
    }

    pub fn contains(self, dim: Dimension) -> bool {
        self.0 & dim.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(move |d| self.contains(*d))
    }
}

impl Default for DimSet {
    fn default() -> Self {
        Self::all()
    }
}

impl fmt::Debug for DimSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for DimSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(Dimension::as_str).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for DimSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let dims = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Dimension>, _>>()?;
        DimSet::from_dims(dims).ok_or_else(|| "dims must not be empty".to_string())
    }
}

impl Serialize for DimSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for DimSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let dims = Vec::<Dimension>::deserialize(d)?;
        DimSet::from_dims(dims).ok_or_else(|| serde::de::Error::custom("dims must not be empty"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphConfig {
    pub dims: DimSet,
    pub level: PathologyLevel,
}

impl GraphConfig {
    pub fn new(dims: DimSet, level: PathologyLevel) -> Self {
        Self { dims, level }
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            dims: DimSet::all(),
            level: PathologyLevel::Disease,
        }
    }
}

/// An exposure token tagged with its dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Element {
    pub dim: Dimension,
    pub token: String,
}

impl Element {
    pub fn new(dim: Dimension, token: impl Into<String>) -> Self {
        Self {
            dim,
            token: token.into(),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dim, self.token)
    }
}

/// Per-dimension element sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExposureSet {
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub agent: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub occupation: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub sector: BTreeSet<String>,
}

impl ExposureSet {
    pub fn of_identity(identity: &OhpIdentity) -> Self {
        ExposureSet {
            agent: identity.agent_set.clone(),
            occupation: BTreeSet::from([identity.occupation.clone()]),
            sector: BTreeSet::from([identity.sector.clone()]),
        }
    }

    pub fn get(&self, dim: Dimension) -> &BTreeSet<String> {
        match dim {
            Dimension::Agent => &self.agent,
            Dimension::Occupation => &self.occupation,
            Dimension::Sector => &self.sector,
        }
    }

    pub fn get_mut(&mut self, dim: Dimension) -> &mut BTreeSet<String> {
        match dim {
            Dimension::Agent => &mut self.agent,
            Dimension::Occupation => &mut self.occupation,
            Dimension::Sector => &mut self.sector,
        }
    }

    pub fn union_with(&mut self, other: &ExposureSet) {
        for dim in Dimension::ALL {
            self.get_mut(dim).extend(other.get(dim).iter().cloned());
        }
    }

    /// Element-wise intersection, keeping only `dims`.
    pub fn intersection(&self, other: &ExposureSet, dims: DimSet) -> ExposureSet {
        let mut out = ExposureSet::default();
        for dim in dims.iter() {
            *out.get_mut(dim) = self
                .get(dim)
                .intersection(other.get(dim))
                .cloned()
                .collect();
        }
        out
    }

    /// Number of distinct elements across `dims`.
    pub fn count(&self, dims: DimSet) -> usize {
        dims.iter().map(|d| self.get(d).len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        Dimension::ALL.iter().all(|d| self.get(*d).is_empty())
    }

    pub fn elements(&self, dims: DimSet) -> impl Iterator<Item = Element> + '_ {
        dims.iter()
            .flat_map(move |d| self.get(d).iter().map(move |t| Element::new(d, t.clone())))
    }
}

/// Identity of a network vertex.
///
/// At disease level every distinct OHP is its own vertex; at coarser levels
/// vertices are pathology groups and the key is the group code alone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKey {
    Ohp(OhpIdentity),
    Pathology(String),
}

impl NodeKey {
    pub fn pathology(&self) -> &str {
        match self {
            NodeKey::Ohp(id) => &id.pathology,
            NodeKey::Pathology(code) => code,
        }
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Ohp(id) => id.fmt(f),
            NodeKey::Pathology(code) => f.write_str(code),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposomeNode {
    pub key: NodeKey,
    pub weight: u64,
    /// Union of the members' exposures over all three dimensions.
    pub exposure: ExposureSet,
}

/// An element shared by more nodes than the configured hub threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HubElement {
    pub element: Element,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposomeGraph {
    config: GraphConfig,
    hub_threshold: usize,
    nodes: Vec<ExposomeNode>,
    /// Interned elements over the configured dims, sorted.
    elements: Vec<Element>,
    /// `offsets[u]..offsets[u + 1]` indexes the forward edges of node `u`.
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// `shared_offsets[e]..shared_offsets[e + 1]` indexes `shared` for edge `e`.
    shared_offsets: Vec<usize>,
    shared: Vec<u32>,
    degrees: Vec<u32>,
    hubs: Vec<HubElement>,
}

impl ExposomeGraph {
    pub fn config(&self) -> GraphConfig {
        self.config
    }

    pub fn hub_threshold(&self) -> usize {
        self.hub_threshold
    }

    pub fn nodes(&self) -> &[ExposomeNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn node_index(&self, key: &NodeKey) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.key.cmp(key)).ok()
    }

    pub fn node(&self, key: &NodeKey) -> Option<&ExposomeNode> {
        self.node_index(key).map(|i| &self.nodes[i])
    }

    pub fn degree(&self, index: usize) -> usize {
        self.degrees[index] as usize
    }

    pub fn hub_elements(&self) -> &[HubElement] {
        &self.hubs
    }

    pub fn total_weight(&self) -> u64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Edges in lexicographic order of (source key, target key), source < target.
    pub fn edges(&self) -> impl Iterator<Item = ExposomeEdge<'_>> + '_ {
        (0..self.nodes.len()).flat_map(move |u| {
            (self.offsets[u]..self.offsets[u + 1]).map(move |e| self.edge_at(u, e))
        })
    }

    /// Edges incident to `index` whose other endpoint has a larger index.
    pub fn forward_edges(&self, index: usize) -> impl Iterator<Item = ExposomeEdge<'_>> + '_ {
        (self.offsets[index]..self.offsets[index + 1]).map(move |e| self.edge_at(index, e))
    }

    /// Finds the edge between two keys, if any.
    pub fn edge_between(&self, a: &NodeKey, b: &NodeKey) -> Option<ExposomeEdge<'_>> {
        let (ia, ib) = (self.node_index(a)?, self.node_index(b)?);
        let (u, v) = if ia < ib { (ia, ib) } else { (ib, ia) };
        let range = self.offsets[u]..self.offsets[u + 1];
        let pos = self.targets[range.clone()]
            .binary_search(&(v as u32))
            .ok()?;
        Some(self.edge_at(u, range.start + pos))
    }

    fn edge_at(&self, source: usize, e: usize) -> ExposomeEdge<'_> {
        ExposomeEdge {
            graph: self,
            source,
            target: self.targets[e] as usize,
            shared: &self.shared[self.shared_offsets[e]..self.shared_offsets[e + 1]],
        }
    }
}

/// Borrowed view of one undirected edge.
#[derive(Clone, Copy)]
pub struct ExposomeEdge<'g> {
    graph: &'g ExposomeGraph,
    source: usize,
    target: usize,
    shared: &'g [u32],
}

impl<'g> ExposomeEdge<'g> {
    pub fn source_index(&self) -> usize {
        self.source
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn source(&self) -> &'g ExposomeNode {
        &self.graph.nodes[self.source]
    }

    pub fn target(&self) -> &'g ExposomeNode {
        &self.graph.nodes[self.target]
    }

    pub fn shared(&self) -> impl Iterator<Item = &'g Element> + 'g {
        let elements = &self.graph.elements;
        self.shared.iter().map(move |&i| &elements[i as usize])
    }

    pub fn shared_count(&self) -> usize {
        self.shared.len()
    }

    pub fn shared_set(&self) -> ExposureSet {
        let mut set = ExposureSet::default();
        for el in self.shared() {
            set.get_mut(el.dim).insert(el.token.clone());
        }
        set
    }
}

impl fmt::Debug for ExposomeEdge<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExposomeEdge")
            .field("source", &self.source().key.to_string())
            .field("target", &self.target().key.to_string())
            .field("shared", &self.shared().collect::<Vec<_>>())
            .finish()
    }
}
