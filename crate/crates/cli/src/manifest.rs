//! Output staging and run manifests.
//!
//! Every output is first written as `<name>.partial`. Only when a command has
//! produced all of its outputs are they renamed into place, manifest last, so
//! a failed run leaves its partial files behind and never a half-written
//! final file.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub const PARTIAL_SUFFIX: &str = ".partial";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path, label: String) -> Result<Self, CliError> {
        let (sha256, bytes) = sha256_file(path)?;
        Ok(Self {
            path: label,
            sha256,
            bytes,
        })
    }
}

pub fn sha256_file(path: &Path) -> Result<(String, u64), CliError> {
    let mut f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(h.finalize()), total))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub network_format_version: u32,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_network: Option<FileDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_firms: Option<FileDigest>,
    pub stages: Vec<StageTiming>,
    /// Per-stage summaries (row counts, calibration, build statistics, ...).
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &PipelineConfig) -> Result<Self, CliError> {
        Ok(Self {
            tool: "scdd".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            network_format_version: scdd_core::netgen::FORMAT_VERSION,
            command: command.into(),
            seed: cfg.run.seed,
            config_hash: cfg.hash()?,
            config: cfg.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            source_network: None,
            source_firms: None,
            stages: Vec::new(),
            details: serde_json::Map::new(),
        })
    }

    pub fn detail<T: Serialize>(&mut self, key: &str, value: &T) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Internal(format!("manifest {key}: {e}")))?;
        self.details.insert(key.to_string(), v);
        Ok(())
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        log::info!("stage {stage} started");
        let out = f()?;
        let seconds = t.elapsed().as_secs_f64();
        log::info!("stage {stage} finished in {seconds:.2}s");
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            seconds,
        });
        Ok(out)
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileDigest::of(path, path.display().to_string())?);
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))
    }
}

/// Outputs of one command, staged under `.partial` names until commit.
pub struct OutputSet {
    dir: PathBuf,
    staged: Vec<String>,
    digests: Vec<FileDigest>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
            digests: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn final_path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn partial_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}{PARTIAL_SUFFIX}"))
    }

    /// Writes `name.partial` through `f` and records its checksum.
    pub fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.partial_path(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)
            .and_then(|_| w.flush())
            .and_then(|_| w.get_ref().sync_all())
            .map_err(|e| CliError::io(&path, e))?;
        drop(w);
        let (sha256, bytes) = sha256_file(&path)?;
        self.digests.push(FileDigest {
            path: name.to_string(),
            sha256,
            bytes,
        });
        self.staged.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
            w.write_all(b"\n")
        })
    }

    /// Writes the manifest and moves every staged file into place.
    pub fn commit(self, manifest_name: &str, mut manifest: Manifest) -> Result<Manifest, CliError> {
        manifest.outputs = self.digests.clone();
        let mp = self.partial_path(manifest_name);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(&mp, text + "\n").map_err(|e| CliError::io(&mp, e))?;
        for name in self.staged.iter().map(String::as_str).chain([manifest_name]) {
            let from = self.partial_path(name);
            let to = self.final_path(name);
            fs::rename(&from, &to).map_err(|e| CliError::io(&from, e))?;
        }
        Ok(manifest)
    }
}
