//! Plain-data exports of the catalog: JSON records and a DOT relation graph.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CatalogEntry, Parent, CATALOG};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub id: String,
    pub parent: Parent,
    pub variation: String,
    pub params: Vec<String>,
    pub table: Option<String>,
    pub label: String,
    pub has_closed_form: bool,
    pub asymptotic_size: String,
}

impl From<&CatalogEntry> for CatalogRecord {
    fn from(e: &CatalogEntry) -> Self {
        CatalogRecord {
            id: e.id.to_string(),
            parent: e.id.parent,
            variation: e.id.variation.name().to_string(),
            params: e.params.iter().map(|p| p.name().to_string()).collect(),
            table: e.table.map(|t| t.to_string()),
            label: e.label.to_string(),
            has_closed_form: e.has_closed_form,
            asymptotic_size: e.limit.to_string(),
        }
    }
}

/// One JSON record per catalog row, as a pretty-printed array.
pub fn catalog_json() -> String {
    let records: Vec<CatalogRecord> = CATALOG.iter().map(CatalogRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("catalog records serialize")
}

/// Directed graph with an edge from each parent to every model derived from it.
pub fn catalog_dot() -> String {
    let mut out = String::from("digraph catalog {\n  rankdir=LR;\n");
    for parent in Parent::ALL {
        let _ = writeln!(out, "  \"{}\" [shape=box, label=\"{}\"];", parent, parent.label());
    }
    for e in CATALOG.iter().filter(|e| e.table.is_some()) {
        let _ = writeln!(out, "  \"{}\" [label=\"{}\"];", e.id, e.label);
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", e.id.parent, e.id);
    }
    for e in CATALOG.iter().filter(|e| e.table.is_none() && e.id.variation.name() != "constant_params") {
        let _ = writeln!(out, "  \"{}\" [label=\"{}\"];", e.id, e.label);
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", e.id.parent, e.id);
    }
    out.push_str("}\n");
    out
}
