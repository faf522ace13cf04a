//! Shared generators and brute-force oracles for the integration tests.
//!
//! The oracles work from raw records and plain strings. They do not touch
//! the library's ledger, builder, or hierarchy code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Days, NaiveDate};
use exposome::graph::{Dimension, ExposomeGraph, ExposureSet};
use exposome::model::{AgentExposure, OhpRecord, PathologyLevel, Responsibility};
use exposome::surveillance::{EmergenceEvent, EventKind, Subject};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

/// Vocabulary sizes for random corpora. Small pools give dense graphs.
#[derive(Debug, Clone, Copy)]
pub struct Vocab {
    pub pathologies: usize,
    pub agents: usize,
    pub occupations: usize,
    pub sectors: usize,
    pub max_agents: usize,
    pub days: u64,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab {
            pathologies: 40,
            agents: 30,
            occupations: 12,
            sectors: 8,
            max_agents: 3,
            days: 720,
        }
    }
}

/// Codes like `C34.1`, `J45`, `D6.2`: a few letters, shared two-digit
/// stems and optional suffixes, so every level has real groupings.
pub fn pathology_pool(n: usize) -> Vec<String> {
    let letters = ['C', 'D', 'J', 'L'];
    (0..n)
        .map(|i| {
            let letter = letters[i % letters.len()];
            let stem = 10 + (i / letters.len()) % 5;
            match i / (letters.len() * 5) {
                0 => format!("{letter}{stem}"),
                k => format!("{letter}{stem}.{}", k - 1),
            }
        })
        .collect()
}

pub fn random_records(rng: &mut StdRng, n: usize, vocab: Vocab) -> Vec<OhpRecord> {
    let pathologies = pathology_pool(vocab.pathologies);
    let start = date("2010-01-01");
    (0..n)
        .map(|i| {
            let k = rng.random_range(1..=vocab.max_agents);
            let agents = (0..k)
                .map(|_| {
                    let level = rng.random_range(0..=3);
                    AgentExposure::new(
                        format!("ag{}", rng.random_range(0..vocab.agents)),
                        Responsibility::from_level(level).unwrap(),
                    )
                })
                .collect();
            OhpRecord {
                record_id: format!("r{i:05}"),
                reported_on: start + Days::new(rng.random_range(0..vocab.days)),
                center: format!("c{}", rng.random_range(0..4)),
                pathology: pathologies[rng.random_range(0..pathologies.len())].clone(),
                occupation: format!("occ{}", rng.random_range(0..vocab.occupations)),
                sector: format!("sec{}", rng.random_range(0..vocab.sectors)),
                agents,
            }
        })
        .collect()
}

pub type Exposure = [BTreeSet<String>; 3];

fn dim_index(dim: Dimension) -> usize {
    match dim {
        Dimension::Agent => 0,
        Dimension::Occupation => 1,
        Dimension::Sector => 2,
    }
}

pub fn from_exposure_set(set: &ExposureSet) -> Exposure {
    [
        set.agent.clone(),
        set.occupation.clone(),
        set.sector.clone(),
    ]
}

/// Prefix grouping written out independently: subgroup is the part before
/// the first dot (the whole code if that part is empty), category is the
/// first letter of the subgroup (the subgroup itself if it has none).
pub fn oracle_group(code: &str, level: PathologyLevel) -> String {
    let subgroup = match code.split_once('.') {
        Some((head, _)) if !head.is_empty() => head,
        _ => code,
    };
    match level {
        PathologyLevel::Disease => code.to_string(),
        PathologyLevel::Subgroup => subgroup.to_string(),
        PathologyLevel::Category => subgroup
            .chars()
            .find(|c| c.is_alphabetic())
            .map(|c| c.to_string())
            .unwrap_or_else(|| subgroup.to_string()),
    }
}

/// Node key string, matching the library's `Display` for node keys.
pub fn oracle_key(record: &OhpRecord, level: PathologyLevel) -> String {
    if level != PathologyLevel::Disease {
        return oracle_group(&record.pathology, level);
    }
    let agents: BTreeSet<&str> = record.agents.iter().map(|a| a.code.as_str()).collect();
    format!(
        "{}|{}|{}|{}",
        record.pathology,
        agents.into_iter().collect::<Vec<_>>().join("+"),
        record.occupation,
        record.sector
    )
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleGraph {
    /// key → (weight, exposure over all dims)
    pub nodes: BTreeMap<String, (u64, Exposure)>,
    /// (smaller key, larger key) → shared elements over the selected dims
    pub edges: BTreeMap<(String, String), Exposure>,
}

/// Definitional build: group records by key, then test every pair.
pub fn oracle_graph(
    records: &[OhpRecord],
    dims: &[Dimension],
    level: PathologyLevel,
    key_of: &dyn Fn(&OhpRecord, PathologyLevel) -> String,
) -> OracleGraph {
    let mut nodes: BTreeMap<String, (u64, Exposure)> = BTreeMap::new();
    for r in records {
        let entry = nodes.entry(key_of(r, level)).or_default();
        entry.0 += 1;
        entry.1[0].extend(r.agents.iter().map(|a| a.code.clone()));
        entry.1[1].insert(r.occupation.clone());
        entry.1[2].insert(r.sector.clone());
    }

    // intern elements so the pair loop compares integers
    let mut ids: HashMap<(usize, &str), u32> = HashMap::new();
    let keys: Vec<&String> = nodes.keys().collect();
    let interned: Vec<Vec<u32>> = nodes
        .values()
        .map(|(_, exp)| {
            let mut v: Vec<u32> = dims
                .iter()
                .flat_map(|&d| {
                    let i = dim_index(d);
                    exp[i].iter().map(move |t| (i, t.as_str()))
                })
                .map(|el| {
                    let next = ids.len() as u32;
                    *ids.entry(el).or_insert(next)
                })
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let values: Vec<&Exposure> = nodes.values().map(|(_, e)| e).collect();

    let mut edges = BTreeMap::new();
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            if !sorted_intersect(&interned[i], &interned[j]) {
                continue;
            }
            let mut shared: Exposure = Default::default();
            for &d in dims {
                let k = dim_index(d);
                shared[k] = values[i][k].intersection(&values[j][k]).cloned().collect();
            }
            edges.insert((keys[i].clone(), keys[j].clone()), shared);
        }
    }
    OracleGraph { nodes, edges }
}

fn sorted_intersect(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

pub fn oracle_default(
    records: &[OhpRecord],
    dims: &[Dimension],
    level: PathologyLevel,
) -> OracleGraph {
    oracle_graph(records, dims, level, &oracle_key)
}

/// The library graph in oracle shape.
pub fn observed(graph: &ExposomeGraph) -> OracleGraph {
    let nodes = graph
        .nodes()
        .iter()
        .map(|n| {
            (
                n.key.to_string(),
                (n.weight, from_exposure_set(&n.exposure)),
            )
        })
        .collect();
    let names: Vec<String> = graph.nodes().iter().map(|n| n.key.to_string()).collect();
    let edges = graph
        .edges()
        .map(|e| {
            let (a, b) = (
                names[e.source_index()].clone(),
                names[e.target_index()].clone(),
            );
            let pair = if a < b { (a, b) } else { (b, a) };
            (pair, from_exposure_set(&e.shared_set()))
        })
        .collect();
    OracleGraph { nodes, edges }
}

/// Every non-empty subset of the three dimensions.
pub fn dim_subsets() -> Vec<Vec<Dimension>> {
    (1u8..8)
        .map(|mask| {
            Dimension::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, d)| *d)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleEvent {
    pub window_start: NaiveDate,
    pub kind: u8,
    pub subject: Vec<String>,
    pub shared: Option<Exposure>,
    pub evidence_count: usize,
}

pub fn event_shape(e: &EmergenceEvent) -> OracleEvent {
    let kind = match e.kind {
        EventKind::NewNode => 0,
        EventKind::NewConnection => 1,
        EventKind::WeightGrowth => 2,
    };
    let mut subject = match &e.subject {
        Subject::Node(k) => vec![k.to_string()],
        Subject::Pair(a, b) => vec![a.to_string(), b.to_string()],
    };
    subject.sort();
    OracleEvent {
        window_start: e.window_start,
        kind,
        subject,
        shared: e.shared.as_ref().map(from_exposure_set),
        evidence_count: if kind == 1 { 0 } else { e.evidence.len() },
    }
}

/// Full-rebuild surveillance: for every window holding records, rebuild
/// the graph before and after it and diff the two.
pub fn oracle_replay(
    records: &[OhpRecord],
    dims: &[Dimension],
    level: PathologyLevel,
    baseline_end: NaiveDate,
    window_days: u64,
    growth_threshold: usize,
) -> Vec<OracleEvent> {
    let mut windows: BTreeMap<u64, Vec<&OhpRecord>> = BTreeMap::new();
    let mut history: Vec<OhpRecord> = Vec::new();
    for r in records {
        if r.reported_on <= baseline_end {
            history.push(r.clone());
        } else {
            let offset = (r.reported_on - baseline_end).num_days() as u64 - 1;
            windows.entry(offset / window_days).or_default().push(r);
        }
    }

    let mut events = Vec::new();
    let mut before = oracle_default(&history, dims, level);
    for (w, batch) in windows {
        let start = baseline_end + Days::new(1 + w * window_days);
        history.extend(batch.iter().map(|r| (*r).clone()));
        let after = oracle_default(&history, dims, level);

        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for r in &batch {
            *counts.entry(oracle_key(r, level)).or_default() += 1;
        }
        for key in after
            .nodes
            .keys()
            .filter(|k| !before.nodes.contains_key(*k))
        {
            events.push(OracleEvent {
                window_start: start,
                kind: 0,
                subject: vec![key.clone()],
                shared: None,
                evidence_count: counts[key],
            });
        }
        for (pair, shared) in &after.edges {
            let existed = before.nodes.contains_key(&pair.0) && before.nodes.contains_key(&pair.1);
            if existed && !before.edges.contains_key(pair) {
                events.push(OracleEvent {
                    window_start: start,
                    kind: 1,
                    subject: vec![pair.0.clone(), pair.1.clone()],
                    shared: Some(shared.clone()),
                    evidence_count: 0,
                });
            }
        }
        for (key, &n) in &counts {
            if n >= growth_threshold {
                events.push(OracleEvent {
                    window_start: start,
                    kind: 2,
                    subject: vec![key.clone()],
                    shared: None,
                    evidence_count: n,
                });
            }
        }
        before = after;
    }
    events.sort();
    events
}

/// Σ agent–pathology support computed straight from records.
pub fn oracle_tripartite_support(records: &[OhpRecord], prefix: Option<&str>) -> u64 {
    records
        .iter()
        .filter(|r| prefix.is_none_or(|p| r.pathology.starts_with(p)))
        .map(|r| {
            r.agents
                .iter()
                .map(|a| a.code.as_str())
                .collect::<BTreeSet<_>>()
                .len() as u64
        })
        .sum()
}
