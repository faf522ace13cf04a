//! GraphML, DOT and JSON writers.
//!
//! Both graph kinds are first lowered to a [`GraphDocument`], which is also
//! the JSON format. Writers emit vertices and edges in key order, so equal
//! graphs always produce byte-identical files.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{DimSet, Dimension, ExposomeGraph, ExposureSet};
use crate::model::PathologyLevel;
use crate::tripartite::{TripartiteGraph, VertexClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    GraphMl,
    Dot,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::GraphMl => "graphml",
            Format::Dot => "dot",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "graphml" => Ok(Format::GraphMl),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (graphml, dot, json)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Exposome,
    Tripartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    AgentOccupation,
    AgentPathology,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::AgentOccupation => "agent_occupation",
            EdgeKind::AgentPathology => "agent_pathology",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocNode {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<VertexClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<ExposureSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEdge {
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<EdgeKind>,
    /// Number of OHP records behind a tripartite edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared: Option<ExposureSet>,
}

/// Format-neutral graph, and the schema of the JSON export.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub kind: DocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<PathologyLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimSet>,
    pub nodes: Vec<DocNode>,
    pub edges: Vec<DocEdge>,
}

impl GraphDocument {
    pub fn from_exposome(graph: &ExposomeGraph) -> Self {
        let config = graph.config();
        let nodes = graph
            .nodes()
            .iter()
            .map(|n| DocNode {
                id: n.key.to_string(),
                class: None,
                weight: Some(n.weight),
                exposure: Some(n.exposure.clone()),
            })
            .collect();
        let edges = graph
            .edges()
            .map(|e| DocEdge {
                source: e.source().key.to_string(),
                target: e.target().key.to_string(),
                kind: None,
                support: None,
                shared: Some(e.shared_set()),
            })
            .collect();
        GraphDocument {
            kind: DocumentKind::Exposome,
            level: Some(config.level),
            dims: Some(config.dims),
            nodes,
            edges,
        }
    }

    pub fn from_tripartite(graph: &TripartiteGraph) -> Self {
        let vid = |class: VertexClass, token: &str| format!("{class}:{token}");
        let mut nodes = Vec::with_capacity(graph.vertex_count());
        for (class, set) in [
            (VertexClass::Pathology, &graph.pathologies),
            (VertexClass::Agent, &graph.agents),
            (VertexClass::Occupation, &graph.occupations),
        ] {
            nodes.extend(set.iter().map(|t| DocNode {
                id: vid(class, t),
                class: Some(class),
                weight: None,
                exposure: None,
            }));
        }
        let mut edges = Vec::with_capacity(graph.edge_count());
        for ((agent, occupation), support) in &graph.agent_occupation {
            edges.push(DocEdge {
                source: vid(VertexClass::Agent, agent),
                target: vid(VertexClass::Occupation, occupation),
                kind: Some(EdgeKind::AgentOccupation),
                support: Some(*support),
                shared: None,
            });
        }
        for ((agent, pathology), support) in &graph.agent_pathology {
            edges.push(DocEdge {
                source: vid(VertexClass::Agent, agent),
                target: vid(VertexClass::Pathology, pathology),
                kind: Some(EdgeKind::AgentPathology),
                support: Some(*support),
                shared: None,
            });
        }
        GraphDocument {
            kind: DocumentKind::Tripartite,
            level: None,
            dims: None,
            nodes,
            edges,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::GraphMl => to_graphml(self),
            Format::Dot => to_dot(self),
            Format::Json => to_json(self),
        }
    }
}

pub fn export_graphml(graph: &ExposomeGraph) -> String {
    to_graphml(&GraphDocument::from_exposome(graph))
}

pub fn export_dot(graph: &ExposomeGraph) -> String {
    to_dot(&GraphDocument::from_exposome(graph))
}

pub fn export_json(graph: &ExposomeGraph) -> String {
    to_json(&GraphDocument::from_exposome(graph))
}

fn join(set: &std::collections::BTreeSet<String>) -> String {
    set.iter().cloned().collect::<Vec<_>>().join(";")
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

pub fn to_graphml(doc: &GraphDocument) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    let key = |out: &mut String, id: &str, target: &str, ty: &str| {
        let _ = writeln!(
            out,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    };
    key(&mut out, "label", "node", "string");
    match doc.kind {
        DocumentKind::Exposome => {
            key(&mut out, "weight", "node", "long");
            key(&mut out, "level", "node", "string");
            for dim in Dimension::ALL {
                key(&mut out, &format!("{dim}_count"), "node", "int");
            }
            for dim in Dimension::ALL {
                key(&mut out, &format!("shared_{dim}"), "edge", "string");
            }
        }
        DocumentKind::Tripartite => {
            key(&mut out, "class", "node", "string");
            key(&mut out, "kind", "edge", "string");
            out.push_str(
                "  <key id=\"support\" for=\"edge\" attr.name=\"support\" attr.type=\"long\">\
                 <desc>number of OHP records supporting the edge (derived count)</desc></key>\n",
            );
        }
    }
    let _ = writeln!(
        out,
        "  <graph id=\"{}\" edgedefault=\"undirected\">",
        match doc.kind {
            DocumentKind::Exposome => "exposome",
            DocumentKind::Tripartite => "tripartite",
        }
    );

    let mut index = std::collections::HashMap::with_capacity(doc.nodes.len());
    for (i, node) in doc.nodes.iter().enumerate() {
        index.insert(node.id.as_str(), i);
        let _ = write!(out, "    <node id=\"n{i}\">");
        let _ = write!(out, "<data key=\"label\">{}</data>", xml_escape(&node.id));
        if let Some(class) = node.class {
            let _ = write!(out, "<data key=\"class\">{class}</data>");
        }
        if let Some(w) = node.weight {
            let _ = write!(out, "<data key=\"weight\">{w}</data>");
        }
        if let Some(level) = doc.level {
            if doc.kind == DocumentKind::Exposome {
                let _ = write!(out, "<data key=\"level\">{level}</data>");
            }
        }
        if let Some(exposure) = &node.exposure {
            for dim in Dimension::ALL {
                let _ = write!(
                    out,
                    "<data key=\"{dim}_count\">{}</data>",
                    exposure.get(dim).len()
                );
            }
        }
        out.push_str("</node>\n");
    }
    for (i, edge) in doc.edges.iter().enumerate() {
        let (s, t) = (
            index
                .get(edge.source.as_str())
                .copied()
                .unwrap_or(usize::MAX),
            index
                .get(edge.target.as_str())
                .copied()
                .unwrap_or(usize::MAX),
        );
        let _ = write!(
            out,
            "    <edge id=\"e{i}\" source=\"n{s}\" target=\"n{t}\">"
        );
        if let Some(kind) = edge.kind {
            let _ = write!(out, "<data key=\"kind\">{}</data>", kind.as_str());
        }
        if let Some(support) = edge.support {
            let _ = write!(out, "<data key=\"support\">{support}</data>");
        }
        if let Some(shared) = &edge.shared {
            for dim in Dimension::ALL {
                let set = shared.get(dim);
                if !set.is_empty() {
                    let _ = write!(
                        out,
                        "<data key=\"shared_{dim}\">{}</data>",
                        xml_escape(&join(set))
                    );
                }
            }
        }
        out.push_str("</edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

fn class_shape(class: VertexClass) -> &'static str {
    match class {
        VertexClass::Pathology => "circle",
        VertexClass::Agent => "box",
        VertexClass::Occupation => "triangle",
    }
}

pub fn to_dot(doc: &GraphDocument) -> String {
    let mut out = String::new();
    let name = match doc.kind {
        DocumentKind::Exposome => "exposome",
        DocumentKind::Tripartite => "tripartite",
    };
    let _ = writeln!(out, "graph {name} {{");
    for node in &doc.nodes {
        let mut attrs: Vec<String> = Vec::new();
        if let Some(class) = node.class {
            attrs.push(format!("class=\"{class}\""));
            attrs.push(format!("shape=\"{}\"", class_shape(class)));
        }
        if let Some(w) = node.weight {
            attrs.push(format!("weight=\"{w}\""));
        }
        if let (Some(level), DocumentKind::Exposome) = (doc.level, doc.kind) {
            attrs.push(format!("level=\"{level}\""));
        }
        if let Some(exposure) = &node.exposure {
            for dim in Dimension::ALL {
                attrs.push(format!("{dim}_count=\"{}\"", exposure.get(dim).len()));
            }
        }
        let _ = writeln!(
            out,
            "  \"{}\" [{}];",
            dot_escape(&node.id),
            attrs.join(", ")
        );
    }
    for edge in &doc.edges {
        let mut attrs: Vec<String> = Vec::new();
        if let Some(kind) = edge.kind {
            attrs.push(format!("kind=\"{}\"", kind.as_str()));
        }
        if let Some(support) = edge.support {
            attrs.push(format!("support=\"{support}\""));
        }
        if let Some(shared) = &edge.shared {
            for dim in Dimension::ALL {
                let set = shared.get(dim);
                if !set.is_empty() {
                    attrs.push(format!("shared_{dim}=\"{}\"", dot_escape(&join(set))));
                }
            }
        }
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [{}];",
            dot_escape(&edge.source),
            dot_escape(&edge.target),
            attrs.join(", ")
        );
    }
    out.push_str("}\n");
    out
}

pub fn to_json(doc: &GraphDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphConfig};
    use crate::ingest::IdentityLedger;
    use crate::model::{AgentExposure, OhpRecord, Responsibility};
    use chrono::NaiveDate;

    fn rec(pathology: &str, agents: &[&str]) -> OhpRecord {
        OhpRecord {
            record_id: "r".into(),
            reported_on: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            center: "c".into(),
            pathology: pathology.into(),
            occupation: "O&1".into(),
            sector: "S\"1".into(),
            agents: agents
                .iter()
                .map(|a| AgentExposure::new(*a, Responsibility::Low))
                .collect(),
        }
    }

    #[test]
    fn empty_documents_are_well_formed() {
        let g = build_graph(&IdentityLedger::new(), GraphConfig::default());
        let ml = export_graphml(&g);
        assert!(ml.starts_with("<?xml"));
        assert!(ml.contains("<graph id=\"exposome\" edgedefault=\"undirected\">"));
        assert!(ml.trim_end().ends_with("</graphml>"));
        assert_eq!(export_dot(&g), "graph exposome {\n}\n");
        let doc: GraphDocument = serde_json::from_str(&export_json(&g)).unwrap();
        assert!(doc.nodes.is_empty() && doc.edges.is_empty());
    }

    #[test]
    fn weight_attribute() {
        let r = rec("C34.1", &["X"]);
        let ledger: IdentityLedger = [r.clone(), r.clone(), r].iter().collect();
        let g = build_graph(&ledger, GraphConfig::default());
        let ml = export_graphml(&g);
        assert_eq!(ml.matches("<node ").count(), 1);
        assert!(ml.contains("<data key=\"weight\">3</data>"));
        assert!(ml.contains("O&amp;1"));
        let dot = export_dot(&g);
        assert!(dot.contains("weight=\"3\""));
        assert!(dot.contains("S\\\"1"));
        assert!(export_json(&g).contains("\"weight\": 3"));
    }

    #[test]
    fn json_round_trip() {
        let recs = [rec("C34.1", &["X", "Y"]), rec("C45.0", &["Y"])];
        let ledger: IdentityLedger = recs.iter().collect();
        let g = build_graph(&ledger, GraphConfig::default());
        let doc = GraphDocument::from_exposome(&g);
        assert_eq!(GraphDocument::from_json(&to_json(&doc)).unwrap(), doc);
        assert_eq!(doc.edges.len(), 1);
        assert_eq!(
            doc.edges[0]
                .shared
                .as_ref()
                .unwrap()
                .agent
                .iter()
                .collect::<Vec<_>>(),
            vec!["Y"]
        );
    }

    #[test]
    fn format_parse() {
        assert_eq!("GraphML".parse::<Format>().unwrap(), Format::GraphMl);
        assert!("png".parse::<Format>().is_err());
    }
}
