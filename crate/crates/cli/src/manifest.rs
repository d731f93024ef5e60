use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use anderson_core::SingleSitePotential;

/// Everything needed to rerun a command bit-exactly. Worker count is left
/// out on purpose: outputs do not depend on it.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub master_seed: Option<u64>,
    pub version: String,
    /// SHA-256 of the canonical potential JSON.
    pub potential_sha256: Option<String>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        params: Value,
        master_seed: Option<u64>,
        potential: Option<&SingleSitePotential>,
    ) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params,
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            potential_sha256: potential.map(potential_hash),
        }
    }

    pub fn csv_comment(&self) -> String {
        format!(
            "# manifest {}",
            serde_json::to_string(self).expect("serializable")
        )
    }
}

pub fn potential_hash(p: &SingleSitePotential) -> String {
    hex::encode(Sha256::digest(p.to_json().as_bytes()))
}
