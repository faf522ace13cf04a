//! Prospective surveillance: replay dated records against a baseline and
//! report what emerges in each window.
//!
//! Three kinds of finding are produced per window:
//!
//! * `NEW_NODE` for a node key never seen before,
//! * `NEW_CONNECTION` for two previously known but unconnected nodes that
//!   now share an exposure element,
//! * `WEIGHT_GROWTH` for a node that gained at least `growth_threshold`
//!   records inside the window.
//!
//! Edges that appear because a brand-new node joins the network are part of
//! that node's emergence and are not reported again as connections.
//!
//! The replay keeps only node exposures and an element index; it never
//! materialises the edge set. A pair of known nodes was connected before the
//! window exactly when their pre-window exposures intersect, which is what
//! [`replay`] checks. Results equal diffing full rebuilds at every window
//! boundary (see [`diff_graphs`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Days, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Element, ExposomeGraph, ExposureSet, GraphConfig, NodeKey};
use crate::model::{
    identity_of, pathology_at, Hierarchy, HierarchyError, OhpRecord, PathologyLevel,
};

/// Default `WEIGHT_GROWTH` threshold in records per window.
pub const DEFAULT_GROWTH_THRESHOLD: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurveillanceError {
    #[error("invalid surveillance config: {0}")]
    InvalidConfig(String),
    #[error("graphs were built with different configs ({before:?} vs {after:?})")]
    ConfigMismatch {
        before: GraphConfig,
        after: GraphConfig,
    },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurveillanceConfig {
    pub graph: GraphConfig,
    pub baseline_end: NaiveDate,
    pub window_days: u32,
    pub growth_threshold: u64,
}

impl SurveillanceConfig {
    pub fn new(graph: GraphConfig, baseline_end: NaiveDate, window_days: u32) -> Self {
        Self {
            graph,
            baseline_end,
            window_days,
            growth_threshold: DEFAULT_GROWTH_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<(), SurveillanceError> {
        if self.window_days == 0 {
            return Err(SurveillanceError::InvalidConfig(
                "window length must be at least one day".into(),
            ));
        }
        if self.growth_threshold == 0 {
            return Err(SurveillanceError::InvalidConfig(
                "growth threshold must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Inclusive bounds of window `index` (0 is the day after the baseline).
    pub fn window(&self, index: u64) -> (NaiveDate, NaiveDate) {
        let len = u64::from(self.window_days);
        let start = self.baseline_end + Days::new(1 + index * len);
        (start, start + Days::new(len - 1))
    }

    fn window_index(&self, date: NaiveDate) -> u64 {
        let offset = (date - self.baseline_end).num_days() - 1;
        offset as u64 / u64::from(self.window_days)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    NewNode,
    NewConnection,
    WeightGrowth,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Node(NodeKey),
    /// Ordered so that the first key is the smaller one.
    Pair(NodeKey, NodeKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmergenceEvent {
    pub kind: EventKind,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub subject: Subject,
    /// Shared elements, for `NEW_CONNECTION` only.
    pub shared: Option<ExposureSet>,
    pub evidence: Vec<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SubjectJson {
    Node(String),
    Pair([String; 2]),
}

#[derive(Serialize)]
struct EventJson<'a> {
    kind: EventKind,
    window_start: NaiveDate,
    window_end: NaiveDate,
    subject: SubjectJson,
    shared: Option<&'a ExposureSet>,
    evidence: &'a [String],
}

impl Serialize for EmergenceEvent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let subject = match &self.subject {
            Subject::Node(k) => SubjectJson::Node(k.to_string()),
            Subject::Pair(a, b) => SubjectJson::Pair([a.to_string(), b.to_string()]),
        };
        EventJson {
            kind: self.kind,
            window_start: self.window_start,
            window_end: self.window_end,
            subject,
            shared: self.shared.as_ref(),
            evidence: &self.evidence,
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReplayStatus {
    Completed,
    /// No records at all; nothing to do.
    EmptyStream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub status: ReplayStatus,
    pub events: Vec<EmergenceEvent>,
    pub baseline_records: usize,
    pub replayed_records: usize,
    /// Windows that contained at least one record.
    pub active_windows: usize,
}

/// Maps a record to its node key at `level`.
pub fn node_key_of(
    record: &OhpRecord,
    level: PathologyLevel,
    hierarchy: Option<&Hierarchy>,
) -> Result<NodeKey, HierarchyError> {
    let code = pathology_at(&record.pathology, level, hierarchy)?;
    Ok(match level {
        PathologyLevel::Disease => NodeKey::Ohp(identity_of(record)),
        _ => NodeKey::Pathology(code),
    })
}

fn record_exposure(record: &OhpRecord) -> ExposureSet {
    ExposureSet::of_identity(&identity_of(record))
}

#[derive(Default)]
struct History {
    ids: HashMap<NodeKey, u32>,
    keys: Vec<NodeKey>,
    exposures: Vec<ExposureSet>,
    index: HashMap<Element, Vec<u32>>,
}

impl History {
    fn id_or_insert(&mut self, key: &NodeKey) -> (u32, bool) {
        if let Some(&id) = self.ids.get(key) {
            return (id, false);
        }
        let id = self.exposures.len() as u32;
        self.ids.insert(key.clone(), id);
        self.keys.push(key.clone());
        self.exposures.push(ExposureSet::default());
        (id, true)
    }

    /// Adds the record's elements to node `id`; returns the newly added elements.
    fn absorb(&mut self, id: u32, exposure: &ExposureSet, config: &GraphConfig) -> Vec<Element> {
        let mut added = Vec::new();
        let node = &mut self.exposures[id as usize];
        for dim in crate::graph::Dimension::ALL {
            for token in exposure.get(dim) {
                if node.get_mut(dim).insert(token.clone()) && config.dims.contains(dim) {
                    added.push(Element::new(dim, token.clone()));
                }
            }
        }
        for el in &added {
            self.index.entry(el.clone()).or_default().push(id);
        }
        added
    }
}

/// Replays `records` against the baseline and returns the emerging events.
pub fn replay(
    records: &[OhpRecord],
    config: &SurveillanceConfig,
    hierarchy: Option<&Hierarchy>,
) -> Result<Replay, SurveillanceError> {
    config.validate()?;
    if records.is_empty() {
        return Ok(Replay {
            status: ReplayStatus::EmptyStream,
            events: Vec::new(),
            baseline_records: 0,
            replayed_records: 0,
            active_windows: 0,
        });
    }

    let mut sorted: Vec<&OhpRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (a.reported_on, &a.record_id).cmp(&(b.reported_on, &b.record_id)));
    let level = config.graph.level;
    let keyed: Vec<(NodeKey, &OhpRecord)> = sorted
        .into_iter()
        .map(|r| Ok((node_key_of(r, level, hierarchy)?, r)))
        .collect::<Result<_, HierarchyError>>()?;

    let split = keyed.partition_point(|(_, r)| r.reported_on <= config.baseline_end);
    let mut history = History::default();
    for (key, rec) in &keyed[..split] {
        let (id, _) = history.id_or_insert(key);
        history.absorb(id, &record_exposure(rec), &config.graph);
    }

    let mut events = Vec::new();
    let mut active_windows = 0;
    let mut rest = &keyed[split..];
    while let Some((_, first)) = rest.first() {
        let window = config.window_index(first.reported_on);
        let (start, end) = config.window(window);
        let len = rest.partition_point(|(_, r)| r.reported_on <= end);
        let (batch, tail) = rest.split_at(len);
        rest = tail;
        active_windows += 1;
        events.extend(scan_window(&mut history, batch, config, start, end));
    }

    Ok(Replay {
        status: ReplayStatus::Completed,
        events,
        baseline_records: split,
        replayed_records: keyed.len() - split,
        active_windows,
    })
}

fn scan_window(
    history: &mut History,
    batch: &[(NodeKey, &OhpRecord)],
    config: &SurveillanceConfig,
    start: NaiveDate,
    end: NaiveDate,
) -> Vec<EmergenceEvent> {
    let dims = config.graph.dims;
    let mut by_key: BTreeMap<&NodeKey, Vec<&OhpRecord>> = BTreeMap::new();
    for (key, rec) in batch {
        by_key.entry(key).or_default().push(rec);
    }

    let mut new_nodes: BTreeSet<u32> = BTreeSet::new();
    // pre-window exposure of known nodes that gained elements
    let mut before: HashMap<u32, ExposureSet> = HashMap::new();
    let mut added_by: Vec<(u32, Element)> = Vec::new();
    let mut ids: BTreeMap<&NodeKey, u32> = BTreeMap::new();

    for (&key, recs) in &by_key {
        let (id, fresh) = history.id_or_insert(key);
        ids.insert(key, id);
        if fresh {
            new_nodes.insert(id);
        }
        let snapshot = (!fresh).then(|| history.exposures[id as usize].clone());
        let mut gained = false;
        for rec in recs {
            let added = history.absorb(id, &record_exposure(rec), &config.graph);
            gained |= !added.is_empty();
            if !fresh {
                added_by.extend(added.into_iter().map(|e| (id, e)));
            }
        }
        if let (true, Some(snapshot)) = (gained, snapshot) {
            before.insert(id, snapshot);
        }
    }

    let prior = |id: u32, history: &History| -> ExposureSet {
        before
            .get(&id)
            .cloned()
            .unwrap_or_else(|| history.exposures[id as usize].clone())
    };

    let mut new_pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    for (u, element) in &added_by {
        for &v in history.index.get(element).map(Vec::as_slice).unwrap_or(&[]) {
            if v == *u || new_nodes.contains(&v) {
                continue;
            }
            let pair = if *u < v { (*u, v) } else { (v, *u) };
            if new_pairs.contains(&pair) {
                continue;
            }
            let (pu, pv) = (prior(pair.0, history), prior(pair.1, history));
            if pu.intersection(&pv, dims).is_empty() {
                new_pairs.insert(pair);
            }
        }
    }

    let mut events = Vec::new();
    for (&key, recs) in &by_key {
        if new_nodes.contains(&ids[key]) {
            events.push(EmergenceEvent {
                kind: EventKind::NewNode,
                window_start: start,
                window_end: end,
                subject: Subject::Node(key.clone()),
                shared: None,
                evidence: recs.iter().map(|r| r.record_id.clone()).collect(),
            });
        }
    }

    let mut connections = Vec::new();
    for (u, v) in new_pairs {
        let (ku, kv) = (
            history.keys[u as usize].clone(),
            history.keys[v as usize].clone(),
        );
        let shared =
            history.exposures[u as usize].intersection(&history.exposures[v as usize], dims);
        let shared_elements: BTreeSet<Element> = shared.elements(dims).collect();
        let mut evidence = Vec::new();
        for key in [&ku, &kv] {
            if let Some(recs) = by_key.get(key) {
                for rec in recs {
                    if record_exposure(rec)
                        .elements(dims)
                        .any(|e| shared_elements.contains(&e))
                    {
                        evidence.push(rec.record_id.clone());
                    }
                }
            }
        }
        evidence.sort();
        evidence.dedup();
        let subject = if ku < kv {
            Subject::Pair(ku, kv)
        } else {
            Subject::Pair(kv, ku)
        };
        connections.push(EmergenceEvent {
            kind: EventKind::NewConnection,
            window_start: start,
            window_end: end,
            subject,
            shared: Some(shared),
            evidence,
        });
    }
    connections.sort_by(|a, b| a.subject.cmp(&b.subject));
    events.extend(connections);

    for (&key, recs) in &by_key {
        if recs.len() as u64 >= config.growth_threshold {
            events.push(EmergenceEvent {
                kind: EventKind::WeightGrowth,
                window_start: start,
                window_end: end,
                subject: Subject::Node(key.clone()),
                shared: None,
                evidence: recs.iter().map(|r| r.record_id.clone()).collect(),
            });
        }
    }
    events
}

/// Structural difference between two graphs built with the same config.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDiff {
    pub added_nodes: Vec<NodeKey>,
    /// Edges present in `after` only, with their shared elements in `after`.
    pub added_edges: Vec<(NodeKey, NodeKey, ExposureSet)>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        self.added_nodes.is_empty() && self.added_edges.is_empty()
    }
}

pub fn diff_graphs(
    before: &ExposomeGraph,
    after: &ExposomeGraph,
) -> Result<GraphDiff, SurveillanceError> {
    if before.config() != after.config() {
        return Err(SurveillanceError::ConfigMismatch {
            before: before.config(),
            after: after.config(),
        });
    }
    let added_nodes = after
        .nodes()
        .iter()
        .filter(|n| before.node_index(&n.key).is_none())
        .map(|n| n.key.clone())
        .collect();
    let added_edges = after
        .edges()
        .filter(|e| {
            before
                .edge_between(&e.source().key, &e.target().key)
                .is_none()
        })
        .map(|e| {
            (
                e.source().key.clone(),
                e.target().key.clone(),
                e.shared_set(),
            )
        })
        .collect();
    Ok(GraphDiff {
        added_nodes,
        added_edges,
    })
}
