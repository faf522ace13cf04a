//! Pathology / agent / occupation projection.
//!
//! Every edge is anchored on an agent: agent–occupation edges record which
//! agents were met in which jobs, agent–pathology edges record which agents
//! were implicated in which diseases. There are never pathology–occupation
//! edges. Edge support is the number of OHP records behind it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::IdentityLedger;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    Pathology,
    Agent,
    Occupation,
}

impl VertexClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pathology => "pathology",
            Self::Agent => "agent",
            Self::Occupation => "occupation",
        }
    }
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripartiteGraph {
    pub pathologies: BTreeSet<String>,
    pub agents: BTreeSet<String>,
    pub occupations: BTreeSet<String>,
    /// (agent, occupation) → support
    pub agent_occupation: BTreeMap<(String, String), u64>,
    /// (agent, pathology) → support
    pub agent_pathology: BTreeMap<(String, String), u64>,
}

impl TripartiteGraph {
    pub fn vertex_count(&self) -> usize {
        self.pathologies.len() + self.agents.len() + self.occupations.len()
    }

    pub fn edge_count(&self) -> usize {
        self.agent_occupation.len() + self.agent_pathology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count() == 0
    }

    /// Checks the class structure: endpoints exist in their own class and
    /// no token is used by two classes.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (a, o) in self.agent_occupation.keys() {
            if !self.agents.contains(a) || !self.occupations.contains(o) {
                return Err(format!("dangling agent–occupation edge ({a}, {o})"));
            }
        }
        for (a, p) in self.agent_pathology.keys() {
            if !self.agents.contains(a) || !self.pathologies.contains(p) {
                return Err(format!("dangling agent–pathology edge ({a}, {p})"));
            }
        }
        Ok(())
    }
}

/// Projects the ledger, keeping identities whose pathology starts with `prefix`.
pub fn project_tripartite(ledger: &IdentityLedger, prefix: Option<&str>) -> TripartiteGraph {
    let mut g = TripartiteGraph::default();
    for (identity, entry) in ledger.iter() {
        if let Some(prefix) = prefix {
            if !identity.pathology.starts_with(prefix) {
                continue;
            }
        }
        let w = entry.weight;
        g.pathologies.insert(identity.pathology.clone());
        g.occupations.insert(identity.occupation.clone());
        for agent in &identity.agent_set {
            g.agents.insert(agent.clone());
            *g.agent_occupation
                .entry((agent.clone(), identity.occupation.clone()))
                .or_insert(0) += w;
            *g.agent_pathology
                .entry((agent.clone(), identity.pathology.clone()))
                .or_insert(0) += w;
        }
    }
    g
}
