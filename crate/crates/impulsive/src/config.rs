//! Resolving `--system` arguments to specs, systems and summary records.

use std::fs;
use std::path::Path;

use impulsive_core::sysconfig::{gallery_spec, SystemSpec, FIGURE2_H, GALLERY_H2_SAMPLES};
use impulsive_core::ImpulsiveSystem;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A system argument: a gallery name or a path to a JSON spec.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: SystemSpec,
    pub source: String,
}

pub fn resolve(arg: &str) -> Result<Resolved, CliError> {
    if let Some(spec) = gallery_spec(arg) {
        return Ok(Resolved {
            spec,
            source: format!("gallery:{arg}"),
        });
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "`{arg}` is neither a gallery system nor an existing file"
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let spec: SystemSpec =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(Resolved {
        spec,
        source: path.display().to_string(),
    })
}

/// SHA-256 of the spec's canonical JSON serialization.
pub fn spec_hash(spec: &SystemSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("spec serializes");
    hex::encode(Sha256::digest(bytes))
}

impl Resolved {
    pub fn load(&self) -> Result<ImpulsiveSystem, CliError> {
        Ok(self.spec.build()?)
    }

    /// Loaded and put through the sampled H2 check.
    pub fn load_checked(&self, seed: u64) -> Result<ImpulsiveSystem, CliError> {
        Ok(self.load()?.into_checked(GALLERY_H2_SAMPLES, seed)?)
    }

    pub fn summary(&self, role: &str, sys: &ImpulsiveSystem) -> Value {
        json!({
            "role": role,
            "name": self.spec.name,
            "source": self.source,
            "sha256": spec_hash(&self.spec),
            "min_dwell": sys.min_dwell(),
            "tolerances": sys.tolerances(),
            "attestation": sys.attestation(),
        })
    }
}

/// A closed-form map stored as JSON, one expression per output coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub dimension: usize,
    pub closed_form: Vec<String>,
}

pub fn figure2_map_spec() -> MapSpec {
    MapSpec {
        dimension: 2,
        closed_form: FIGURE2_H.iter().map(|s| s.to_string()).collect(),
    }
}
