//! Map document IO.

use std::fs;
use std::path::Path;

use docent_core::worldmap::{MapDocument, ValidationError};
use docent_core::AnnotatedMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot read map file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed map document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid map: {0}")]
    Invalid(#[from] ValidationError),
}

pub fn load_map(bytes: &[u8]) -> Result<AnnotatedMap, MapError> {
    let doc: MapDocument = serde_json::from_slice(bytes)?;
    Ok(AnnotatedMap::from_document(doc)?)
}

pub fn read_map(path: impl AsRef<Path>) -> Result<AnnotatedMap, MapError> {
    load_map(&fs::read(path)?)
}

/// Pretty-printed map document.
pub fn serialize_map(map: &AnnotatedMap) -> String {
    let mut s = serde_json::to_string_pretty(&map.to_document()).expect("map documents always serialize");
    s.push('\n');
    s
}
