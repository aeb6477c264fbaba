//! Built-in example graphs, embedded as graph documents in the same format
//! accepted for user files.

use crate::error::GraphError;
use crate::graph::{parse_graph, FundamentalGraph};

pub const GRAPHENE_DOCUMENT: &str = include_str!("../fixtures/graphene.graph");
pub const STANENE_DOCUMENT: &str = include_str!("../fixtures/stanene.graph");
pub const KAGOME_DOCUMENT: &str = include_str!("../fixtures/kagome.graph");

/// Document for the d-dimensional integer lattice: one vertex carrying d
/// loops indexed by the standard basis vectors.
pub fn lattice_document(dimension: usize) -> String {
    let mut edges = Vec::with_capacity(dimension);
    for j in 0..dimension {
        let index: Vec<String> = (0..dimension)
            .map(|k| if k == j { "1".into() } else { "0".into() })
            .collect();
        edges.push(format!("[\"v\", \"v\", [{}]]", index.join(", ")));
    }
    format!(
        "{{\n  \"dimension\": {},\n  \"vertices\": [\"v\"],\n  \"edges\": [{}]\n}}\n",
        dimension,
        edges.join(", ")
    )
}

/// Resolve a fixture name: `graphene`, `stanene`, `kagome` or `lattice:d`.
pub fn load(name: &str) -> Result<FundamentalGraph, GraphError> {
    match name {
        "graphene" => parse_graph(GRAPHENE_DOCUMENT),
        "stanene" => parse_graph(STANENE_DOCUMENT),
        "kagome" => parse_graph(KAGOME_DOCUMENT),
        _ => {
            if let Some(dim) = name.strip_prefix("lattice:") {
                let dimension: usize = dim
                    .parse()
                    .map_err(|_| GraphError::UnknownFixture(name.to_string()))?;
                if dimension == 0 {
                    return Err(GraphError::UnknownFixture(name.to_string()));
                }
                parse_graph(&lattice_document(dimension))
            } else {
                Err(GraphError::UnknownFixture(name.to_string()))
            }
        }
    }
}

pub fn is_fixture_name(name: &str) -> bool {
    matches!(name, "graphene" | "stanene" | "kagome") || name.starts_with("lattice:")
}

pub fn graphene() -> FundamentalGraph {
    parse_graph(GRAPHENE_DOCUMENT).expect("embedded graphene document is valid")
}

pub fn stanene() -> FundamentalGraph {
    parse_graph(STANENE_DOCUMENT).expect("embedded stanene document is valid")
}

pub fn kagome() -> FundamentalGraph {
    parse_graph(KAGOME_DOCUMENT).expect("embedded kagome document is valid")
}

pub fn lattice(dimension: usize) -> FundamentalGraph {
    parse_graph(&lattice_document(dimension)).expect("lattice document is valid")
}

/// The four standard fixtures used across tests and reports, with names.
pub fn standard_set() -> Vec<(&'static str, FundamentalGraph)> {
    vec![
        ("lattice:2", lattice(2)),
        ("graphene", graphene()),
        ("stanene", stanene()),
        ("kagome", kagome()),
    ]
}
