use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SynthError;
use crate::series::barcsv::write_bars;
use crate::series::BarSeries;

/// Identifier of the random generator recorded in fixture manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the fixture root, `/`-separated.
    pub path: String,
    pub symbol: String,
    pub granularity: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub rng_algorithm: String,
    pub seed: Option<u64>,
    pub files: Vec<ManifestEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::IoFailure {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `<root>/data_<granularity>_fixed/<symbol>.csv` per series and
/// merges the entries into `<root>/manifest.json`.
pub fn write_fixture(bars: &[BarSeries], root: &Path, seed: Option<u64>) -> Result<Manifest, SynthError> {
    let manifest_path = root.join(MANIFEST_FILE);
    let mut manifest = match fs::read_to_string(&manifest_path) {
        Ok(text) => serde_json::from_str(&text).unwrap_or(Manifest {
            rng_algorithm: RNG_ALGORITHM.into(),
            seed,
            files: Vec::new(),
        }),
        Err(_) => Manifest {
            rng_algorithm: RNG_ALGORITHM.into(),
            seed,
            files: Vec::new(),
        },
    };
    if seed.is_some() {
        manifest.seed = seed;
    }
    for series in bars {
        let dir_name = series.granularity().dir_name();
        let dir = root.join(&dir_name);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let file = dir.join(format!("{}.csv", series.symbol()));
        let mut buf = Vec::new();
        write_bars(series, &mut buf).map_err(io_err(&file))?;
        fs::write(&file, &buf).map_err(io_err(&file))?;
        let rel = format!("{dir_name}/{}.csv", series.symbol());
        manifest.files.retain(|e| e.path != rel);
        manifest.files.push(ManifestEntry {
            path: rel,
            symbol: series.symbol().to_string(),
            granularity: series.granularity().label().to_string(),
            rows: series.len(),
            sha256: hex::encode(Sha256::digest(&buf)),
        });
    }
    manifest.files.sort_by(|a, b| a.path.cmp(&b.path));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}
