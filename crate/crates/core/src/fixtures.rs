//! Locating and loading the JSON fixtures shipped with the repository.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::orbsurf::Triangulation;

pub const FIXTURE_ENV: &str = "ORBICLUSTER_FIXTURES";

/// Fixture root: `$ORBICLUSTER_FIXTURES` if set, else the repository copy.
pub fn fixture_root() -> PathBuf {
    match std::env::var_os(FIXTURE_ENV) {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(rel: &str) -> Result<T> {
    let path = fixture_root().join(rel);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// The five digon triangulations κ_0..κ_4 along the flip path (1,3,2,3).
pub fn digon(j: usize) -> Result<Triangulation> {
    read_json(&format!("digon/kappa{j}.json"))
}

pub const DIGON_PATH: [usize; 4] = [1, 3, 2, 3];
