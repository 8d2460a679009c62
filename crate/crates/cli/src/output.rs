use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bloch_siegert::ModelParams;
use serde::Serialize;
use serde_json::Value;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Comma-separated table with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Serialize)]
pub struct ParamsRecord {
    pub delta_e: f64,
    pub omega0: f64,
    pub coupling_u: f64,
    pub g: f64,
    pub spin: f64,
    pub n0: usize,
    pub n_max: usize,
}

impl From<&ModelParams> for ParamsRecord {
    fn from(p: &ModelParams) -> Self {
        ParamsRecord {
            delta_e: p.delta_e,
            omega0: p.omega0,
            coupling_u: p.coupling_u,
            g: p.g(),
            spin: p.spin.value(),
            n0: p.n0,
            n_max: p.n_max,
        }
    }
}

#[derive(Serialize)]
pub struct Failure {
    pub n0: usize,
    pub error: String,
}

/// Reproducibility record written next to every set of outputs.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub params: Option<ParamsRecord>,
    pub settings: Value,
    pub outputs: Vec<PathBuf>,
    pub wall_seconds: f64,
    pub tolerances: Value,
    pub diagnostics: Value,
    pub failures: Vec<Failure>,
    pub versions: Value,
}

impl Manifest {
    pub fn new(command: &str, config_path: Option<PathBuf>, seed: u64) -> Self {
        Manifest {
            command: command.to_string(),
            config_path,
            seed,
            threads: rayon::current_num_threads(),
            params: None,
            settings: Value::Null,
            outputs: Vec::new(),
            wall_seconds: 0.0,
            tolerances: Value::Null,
            diagnostics: Value::Null,
            failures: Vec::new(),
            versions: serde_json::json!({
                "bloch-siegert": bloch_siegert::VERSION,
                "bloch-siegert-cli": env!("CARGO_PKG_VERSION"),
            }),
        }
    }

    pub fn finish(&mut self, took: Duration) {
        self.wall_seconds = took.as_secs_f64();
    }
}

/// Writes files into the output directory and records them.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn write(&self, manifest: &mut Manifest, name: &str, contents: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        manifest.outputs.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, manifest: &mut Manifest, name: &str, value: &T) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)? + "\n";
        self.write(manifest, name, &text)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)? + "\n";
        fs::write(self.dir.join("manifest.json"), text)
    }
}
