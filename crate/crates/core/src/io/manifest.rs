//! Run directories and their manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::fem::FeSpace;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStats {
    pub target_h: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub min_angle_deg: f64,
    pub max_edge: f64,
}

impl MeshStats {
    pub fn of(space: &FeSpace, target_h: f64) -> Self {
        let m = space.mesh();
        MeshStats {
            target_h,
            vertices: m.num_vertices(),
            triangles: m.num_triangles(),
            velocity_dofs: space.n_velocity(),
            pressure_dofs: space.n_pressure(),
            min_angle_deg: m.min_angle_overall(),
            max_edge: m.max_edge_length(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub status: String,
    pub mesh: Vec<MeshStats>,
    pub solver: serde_json::Value,
    pub diagnostics: serde_json::Value,
    pub timings_s: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(command: &str, config_text: &str) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            status: "ok".to_string(),
            mesh: Vec::new(),
            solver: serde_json::Value::Null,
            diagnostics: serde_json::Value::Null,
            timings_s: BTreeMap::new(),
            files: Vec::new(),
        }
    }
}

/// Write `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Output directory that records every file written to it.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(RunDir { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Write the manifest last, listing every file written before.
    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.files = self.files;
        let path = self.root.join(MANIFEST_NAME);
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        write_atomic(&path, &text)?;
        Ok(path)
    }
}
