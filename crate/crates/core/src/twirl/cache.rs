//! On-disk cache of extracted tables keyed by variant, decay rate and the
//! pulses used.

use std::fs;
use std::path::{Path, PathBuf};

use super::extract::{extract_pauli_channel, ExtractOptions};
use super::table::PauliChannelTable;
use super::variant::ReadoutVariant;
use super::TwirlError;

#[derive(Debug, Clone)]
pub struct ChannelCache {
    dir: PathBuf,
}

impl ChannelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, TwirlError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, variant: &ReadoutVariant, gamma: f64) -> PathBuf {
        let short: String = variant
            .pulse_hash
            .split('+')
            .map(|h| &h[..h.len().min(12)])
            .collect::<Vec<_>>()
            .join("-");
        self.dir
            .join(format!("{}_g{:.6e}_{}.json", variant.id, gamma, short))
    }

    /// Loads the table if present, extracting and storing it otherwise.
    pub fn get_or_extract(
        &self,
        variant: &ReadoutVariant,
        gamma: f64,
        opts: &ExtractOptions,
    ) -> Result<PauliChannelTable, TwirlError> {
        let path = self.path_for(variant, gamma);
        if path.exists() {
            let t = PauliChannelTable::load(&path)?;
            if t.pulse_hash == variant.pulse_hash && t.gamma == gamma {
                return Ok(t);
            }
            log::warn!("stale channel cache entry {}", path.display());
        }
        log::info!("extracting {} at gamma = {gamma:e}", variant.id);
        let t = extract_pauli_channel(variant, gamma, opts)?;
        let tmp = path.with_extension("json.tmp");
        t.save(&tmp)?;
        fs::rename(&tmp, &path)?;
        Ok(t)
    }
}
