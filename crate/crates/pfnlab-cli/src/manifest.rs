//! Run manifests: config hash, tool version, and per-artifact checksums
//! so reruns can be verified byte for byte.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub duration_ms: u128,
    /// (artifact file name, sha256) sorted by name.
    pub files: Vec<(String, String)>,
    /// Set when the run aborted mid-way; artifacts may be partial.
    pub partial: bool,
}

impl RunManifest {
    pub fn new(config_bytes: &[u8]) -> Self {
        RunManifest {
            config_hash: sha256_hex(config_bytes),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_ms: 0,
            files: Vec::new(),
            partial: false,
        }
    }

    /// Records a written artifact by hashing it from disk.
    pub fn record(&mut self, dir: &Path, name: &str) -> io::Result<()> {
        let bytes = std::fs::read(dir.join(name))?;
        self.files.push((name.to_string(), sha256_hex(&bytes)));
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "config_hash = {}", self.config_hash);
        let _ = writeln!(out, "tool_version = {}", self.tool_version);
        let _ = writeln!(out, "duration_ms = {}", self.duration_ms);
        let _ = writeln!(out, "partial = {}", self.partial);
        let mut files = self.files.clone();
        files.sort();
        for (name, hash) in files {
            let _ = writeln!(out, "file.{name} = {hash}");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.render())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parses the `file.* = hash` entries of a rendered manifest.
    fn parse_file_hashes(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| {
                let (k, v) = l.split_once('=')?;
                let name = k.trim().strip_prefix("file.")?;
                Some((name.to_string(), v.trim().to_string()))
            })
            .collect()
    }

    #[test]
    fn sha256_known_vector() {
        // sha256 of the empty string
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x.csv"), "a,b\n1,2\n").unwrap();
        let mut m = RunManifest::new(b"config");
        m.record(dir.path(), "x.csv").unwrap();
        let text = m.render();
        let hashes = parse_file_hashes(&text);
        assert_eq!(hashes.len(), 1);
        assert_eq!(hashes[0].0, "x.csv");
        assert_eq!(hashes[0].1, sha256_hex(b"a,b\n1,2\n"));
    }
}
