//! Content-addressed result cache.  Each entry is a JSON file named by the
//! digest of its canonical key; the file embeds a digest of its payload so
//! corruption is detected at load time, and loaded eigenpolynomials are
//! additionally re-verified against their defining invariants.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use opdam_core::cherednik::{verify_epoly, EPoly};
use opdam_core::jsonform::{epoly_from_json, epoly_json};
use opdam_core::rootsys::{Multiplicity, RootSystem, Weight};

pub struct DiskCache {
    dir: PathBuf,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{:02x}", b)).collect()
}

fn digest_str(s: &str) -> String {
    hex(&Sha256::digest(s.as_bytes()))
}

pub fn epoly_key(rs: &RootSystem, k: &Multiplicity, lambda: &Weight, seed: u64) -> String {
    let ks: Vec<String> = k.values().iter().map(opdam_core::rat::format_q).collect();
    format!(
        "epoly|{}|k={}|lambda={}|seed={}",
        rs.code(),
        ks.join(","),
        lambda,
        seed
    )
}

impl DiskCache {
    pub fn open(dir: &str) -> Result<DiskCache, String> {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir)
            .map_err(|e| format!("cannot create cache dir {}: {}", dir.display(), e))?;
        Ok(DiskCache { dir })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", digest_str(key)))
    }

    /// Store a finished eigenpolynomial under its canonical key.
    pub fn store_epoly(
        &self,
        rs: &RootSystem,
        ep: &EPoly,
        key: &str,
    ) -> Result<(), String> {
        let payload = epoly_json(rs, ep);
        let payload_text = serde_json::to_string(&payload).expect("serializable");
        let record = json!({
            "key": key,
            "digest": digest_str(&payload_text),
            "payload": payload,
        });
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string(&record).expect("serializable"))
            .map_err(|e| format!("cannot write cache entry: {}", e))?;
        std::fs::rename(&tmp, &path).map_err(|e| format!("cannot commit cache entry: {}", e))?;
        Ok(())
    }

    /// Load an eigenpolynomial if present.  A present-but-corrupt entry is an
    /// integrity error, never a silent miss.
    pub fn load_epoly(
        &self,
        rs: &RootSystem,
        k: &Multiplicity,
        key: &str,
    ) -> Result<Option<EPoly>, String> {
        let path = self.path_for(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("cannot read cache entry {}: {}", path.display(), e)),
        };
        let payload = check_record(&path, &text)?;
        let ep = epoly_from_json(&payload)
            .map_err(|e| format!("cache integrity: {}: {}", path.display(), e))?;
        verify_epoly(rs, k, &ep)
            .map_err(|e| format!("cache integrity: {}: {}", path.display(), e))?;
        Ok(Some(ep))
    }

    /// Digest-check every entry in the cache directory.  Returns the number
    /// of verified entries.
    pub fn verify_all(&self) -> Result<usize, String> {
        let mut count = 0;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&self.dir)
            .map_err(|e| format!("cannot list cache dir: {}", e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read cache entry {}: {}", path.display(), e))?;
            check_record(&path, &text)?;
            count += 1;
        }
        Ok(count)
    }
}

/// Parse a cache record and confirm its payload digest; returns the payload.
fn check_record(path: &Path, text: &str) -> Result<Value, String> {
    let record: Value = serde_json::from_str(text)
        .map_err(|_| format!("cache integrity: {} is not valid JSON", path.display()))?;
    let digest = record["digest"]
        .as_str()
        .ok_or_else(|| format!("cache integrity: {} has no digest", path.display()))?;
    let payload = &record["payload"];
    let payload_text = serde_json::to_string(payload).expect("serializable");
    if digest_str(&payload_text) != digest {
        return Err(format!(
            "cache integrity: digest mismatch in {}",
            path.display()
        ));
    }
    Ok(payload.clone())
}
