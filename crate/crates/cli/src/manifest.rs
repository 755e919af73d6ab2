use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::fail::Fail;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    /// Path as given, or `inline`.
    pub source: String,
    pub sha256: String,
}

/// Everything needed to rerun a command. No timestamps or host data, so
/// identical inputs give byte-identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub parameters: Value,
    pub inputs: Vec<InputDigest>,
    /// Digest over the input digests and the parameters.
    pub inputs_sha256: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: Option<u64>, parameters: Value, inputs: Vec<InputDigest>) -> Self {
        let mut h = Sha256::new();
        for d in &inputs {
            h.update(d.role.as_bytes());
            h.update([0]);
            h.update(d.sha256.as_bytes());
            h.update([0]);
        }
        h.update(parameters.to_string().as_bytes());
        Manifest {
            tool: "matchq",
            version: env!("CARGO_PKG_VERSION"),
            core_version: matchq::VERSION,
            command,
            seed,
            parameters,
            inputs,
            inputs_sha256: hex::encode(h.finalize()),
            outputs: Vec::new(),
        }
    }
}

/// Where results go: stdout alone, or files in `--out` plus a summary on
/// stdout.
pub struct Sink {
    dir: Option<PathBuf>,
    manifest: Manifest,
}

impl Sink {
    pub fn new(dir: Option<&Path>, manifest: Manifest) -> Result<Self, Fail> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir: dir.map(Path::to_path_buf), manifest })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes an auxiliary file; a no-op without `--out`.
    pub fn file(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Fail> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut f = std::io::BufWriter::new(fs::File::create(dir.join(name))?);
        write(&mut f)?;
        f.flush()?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Emits the main report: to stdout with the manifest folded in, and to
    /// `<out>/<name>` with `manifest.json` beside it.
    pub fn finish(mut self, name: &str, report: Value) -> Result<(), Fail> {
        let text = serde_json::to_string_pretty(&report)?;
        if self.dir.is_some() {
            self.file(name, |w| writeln!(w, "{text}"))?;
            let m = serde_json::to_string_pretty(&self.manifest)?;
            self.file("manifest.json", |w| writeln!(w, "{m}"))?;
        }
        let mut out = report;
        if let Value::Object(map) = &mut out {
            map.insert("manifest".into(), json!(self.manifest));
        }
        stdout(&format!("{}\n", serde_json::to_string_pretty(&out)?))
    }

    /// Table output on stdout; the manifest goes to `--out`, or to stderr.
    pub fn finish_table(mut self, name: &str, table: String) -> Result<(), Fail> {
        if self.dir.is_some() {
            self.file(name, |w| w.write_all(table.as_bytes()))?;
            let m = serde_json::to_string_pretty(&self.manifest)?;
            self.file("manifest.json", |w| writeln!(w, "{m}"))?;
        } else {
            eprintln!("{}", serde_json::to_string(&self.manifest)?);
        }
        stdout(&table)
    }
}

// A closed pipe (`matchq ... | head`) is not an error.
fn stdout(text: &str) -> Result<(), Fail> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
