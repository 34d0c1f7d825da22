//! Parsing of graph, multidegree, twist-data and polarization arguments.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;
use serde_json::Value;

use jacstab_core::stability::Basepoint;
use jacstab_core::{DualGraph, Multidegree, Polarization, Q, Subcurve, TauData};

use crate::error::CliError;

/// Reads `-` from stdin, inline JSON when the text starts with `{` or `[`,
/// and a file path otherwise.
pub fn read_source(arg: &str) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::new("IO_ERROR", format!("reading stdin: {e}")))?;
        Ok(s)
    } else if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::new("IO_ERROR", format!("reading {arg}: {e}")))
    }
}

pub fn graph(arg: &str) -> Result<DualGraph, CliError> {
    Ok(DualGraph::from_json(&read_source(arg)?)?)
}

fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::new("MALFORMED_JSON", e.to_string()))
}

pub fn int_list(arg: &str, what: &str) -> Result<Vec<i64>, CliError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| CliError::new("MALFORMED_JSON", format!("{what}: {e}")));
    }
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| CliError::new("BAD_ARGUMENT", format!("{what}: {p:?} is not an integer"))))
        .collect()
}

/// Comma-separated list in vertex order, a JSON array, or a JSON object keyed by vertex id.
pub fn multidegree(graph: &DualGraph, arg: &str) -> Result<Multidegree, CliError> {
    let trimmed = arg.trim();
    if trimmed.starts_with('{') {
        let map: BTreeMap<String, i64> =
            serde_json::from_str(trimmed).map_err(|e| CliError::new("MALFORMED_JSON", format!("multidegree: {e}")))?;
        return Ok(Multidegree::from_map(graph, &map)?);
    }
    Ok(Multidegree::checked(graph, int_list(trimmed, "multidegree")?)?)
}

pub fn subcurve(graph: &DualGraph, arg: &str) -> Result<Subcurve, CliError> {
    let ids: Vec<&str> = arg.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(graph.subcurve(&ids)?)
}

/// Twist data from `--twist` (JSON or file with `{"tau": [...], "k": int}`)
/// or from `--tau` and `--k`.
pub fn tau_data(twist: Option<&str>, tau: Option<&str>, k: Option<i64>) -> Result<TauData, CliError> {
    match (twist, tau) {
        (Some(_), Some(_)) => Err(CliError::new("BAD_ARGUMENT", "give either --twist or --tau, not both")),
        (Some(src), None) => {
            #[derive(Deserialize)]
            struct Wire {
                tau: Vec<i64>,
                #[serde(default)]
                k: i64,
            }
            let w: Wire = serde_json::from_value(parse_json(&read_source(src)?)?)
                .map_err(|e| CliError::new("MALFORMED_JSON", format!("twist data: {e}")))?;
            if k.is_some() {
                return Err(CliError::new("BAD_ARGUMENT", "--k cannot be combined with --twist"));
            }
            Ok(TauData::new(w.tau, w.k))
        }
        (None, Some(t)) => Ok(TauData::new(int_list(t, "tau")?, k.unwrap_or(0))),
        (None, None) => Err(CliError::new("BAD_ARGUMENT", "twist data required: --tau (with --k) or --twist")),
    }
}

/// A preset name, or JSON `{"q": {"v1": "1/2", ...}, "degree": d}` inline or in a file.
pub fn polarization(arg: &str) -> Result<Polarization, CliError> {
    if let Some(p) = Polarization::preset(arg) {
        return Ok(p);
    }
    #[derive(Deserialize)]
    struct Wire {
        q: BTreeMap<String, Q>,
        degree: i64,
    }
    let text = read_source(arg).map_err(|_| {
        CliError::new("INVALID_POLARIZATION", format!("{arg:?} is neither a preset (canonical0, trivial-gm1) nor polarization JSON"))
    })?;
    let w: Wire = serde_json::from_value(parse_json(&text)?)
        .map_err(|e| CliError::new("INVALID_POLARIZATION", format!("polarization JSON: {e}")))?;
    Ok(Polarization::Custom { per_vertex_q: w.q, target_degree: w.degree })
}

pub fn basepoint(graph: &DualGraph, arg: Option<&str>) -> Result<Basepoint, CliError> {
    match arg {
        None => Ok(Basepoint::Marking1),
        Some(id) => Ok(Basepoint::Vertex(graph.index_of(id)?)),
    }
}
