use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{ConfigFile, Global};

/// Everything a subcommand produces, held in memory until the run is done.
pub struct Run {
    pub subcommand: &'static str,
    pub config: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
    /// Extra JSON files, by name.
    pub dumps: Vec<(&'static str, Value)>,
    /// Input files other than the config, for digesting.
    pub inputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    seed: u64,
    timestamp: String,
    config: &'a Value,
    summary: &'a Value,
    input_digests: Vec<(String, String)>,
    output_digests: Vec<(String, String)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))
}

/// Writes each file beside its final name, then renames, so a failed run
/// leaves no partial outputs behind.
fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::new();
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dst) in staged {
        fs::rename(&tmp, &dst).with_context(|| format!("writing {}", dst.display()))?;
    }
    Ok(())
}

pub fn emit(global: &Global, file: &ConfigFile, run: Run) -> anyhow::Result<()> {
    let mut files: Vec<(String, Vec<u8>)> = vec![("results.csv".into(), csv_bytes(&run.header, &run.rows)?)];
    for (name, value) in &run.dumps {
        files.push((name.to_string(), serde_json::to_vec_pretty(value)?));
    }
    let mut input_digests = Vec::new();
    if let Some(p) = &file.path {
        input_digests.push((p.display().to_string(), sha256_hex(&file.bytes)));
    }
    for p in &run.inputs {
        let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        input_digests.push((p.display().to_string(), sha256_hex(&bytes)));
    }
    let output_digests = files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect();
    let manifest = Manifest {
        subcommand: run.subcommand,
        version: env!("CARGO_PKG_VERSION"),
        seed: global.seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        config: &run.config,
        summary: &run.summary,
        input_digests,
        output_digests,
    };
    files.push(("manifest.json".into(), serde_json::to_vec_pretty(&manifest)?));
    write_all(&global.out, &files)?;
    println!("{}", serde_json::to_string(&run.summary)?);
    Ok(())
}
