//! Reproducible experiment runs: a versioned JSON config in, a CSV table and
//! a JSON sidecar out.

mod runners;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flows::geometric_checkpoints;
use crate::moebius::MoebiusTable;

/// Version of the config and sidecar layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the sieve cache directory.
pub const CACHE_ENV: &str = "NCFLOW_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sieve,
    Decay,
    MatrixFlow,
    Prop31,
    Quantize,
    CarDemo,
    Counterexample,
    PurePoint,
    FreeClt,
    BszCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Sieve,
        ExperimentKind::Decay,
        ExperimentKind::MatrixFlow,
        ExperimentKind::Prop31,
        ExperimentKind::Quantize,
        ExperimentKind::CarDemo,
        ExperimentKind::Counterexample,
        ExperimentKind::PurePoint,
        ExperimentKind::FreeClt,
        ExperimentKind::BszCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sieve => "sieve",
            ExperimentKind::Decay => "decay",
            ExperimentKind::MatrixFlow => "matrix-flow",
            ExperimentKind::Prop31 => "prop31",
            ExperimentKind::Quantize => "quantize",
            ExperimentKind::CarDemo => "car-demo",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::PurePoint => "pure-point",
            ExperimentKind::FreeClt => "free-clt",
            ExperimentKind::BszCheck => "bsz-check",
        }
    }

    /// Experiments that draw random instances and therefore need a seed.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            ExperimentKind::MatrixFlow
                | ExperimentKind::Prop31
                | ExperimentKind::Quantize
                | ExperimentKind::CarDemo
                | ExperimentKind::PurePoint
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mertens" {
            return Ok(ExperimentKind::Sieve);
        }
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            Error::Usage(format!(
                "unknown experiment `{s}`; expected one of {}",
                names.join(", ")
            ))
        })
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Experiment-specific knobs; each experiment reads the ones it knows and
/// falls back to its defaults for the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Matrix or one-particle dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Coefficients of the polynomial phase, constant term first.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// Counterexample window `L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Correlation length of the bilinear check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Horizon `N` for quantization and trace products.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Number of factors in a trace product.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<usize>,
    /// Number of random instances.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    /// Monomial degree of the CAR observable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Flow for the bilinear check: `golden` or `constant`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub params: Params,
    /// Output directory; not part of the echoed config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: kind.name().to_string(),
            seed: None,
            n_max: None,
            checkpoints: None,
            params: Params::default(),
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.experiment.parse()
    }

    pub fn validate(&self) -> Result<ExperimentKind> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Usage(format!(
                "config schema version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let kind = self.kind()?;
        if kind.randomized() && self.seed.is_none() {
            return Err(Error::Usage(format!(
                "experiment `{kind}` draws random instances and needs a seed"
            )));
        }
        Ok(kind)
    }
}

/// Named CSV tables and a JSON summary, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// `(file name, contents)`.
    pub tables: Vec<(String, String)>,
    pub summary: Value,
}

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: Vec<PathBuf>,
    pub sidecar: PathBuf,
    pub outcome: Outcome,
}

/// Sieve table of length `n_max`, read from or written to the cache
/// directory named by `NCFLOW_CACHE_DIR` when it is set.
pub fn load_table(n_max: u64) -> Result<MoebiusTable> {
    let Some(dir) = std::env::var_os(CACHE_ENV) else {
        return MoebiusTable::build(n_max);
    };
    let path = PathBuf::from(dir).join(format!("moebius_{n_max}.ncf"));
    if path.exists() {
        let table = MoebiusTable::read_cache(std::io::BufReader::new(fs::File::open(&path)?))?;
        if table.n_max() != n_max {
            return Err(crate::error::invalid(format!(
                "cache {} holds n_max = {}, expected {n_max}",
                path.display(),
                table.n_max()
            )));
        }
        return Ok(table);
    }
    let table = MoebiusTable::build(n_max)?;
    fs::create_dir_all(path.parent().expect("cache path has a parent"))?;
    // write then rename so a concurrent reader never sees a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    table.write_cache(std::io::BufWriter::new(fs::File::create(&tmp)?))?;
    fs::rename(&tmp, &path)?;
    Ok(table)
}

/// Checkpoints from the config, or `10, 10^1.5, …` up to `n_top` with
/// `n_top` itself always included.
pub(crate) fn checkpoints_for(config: &ExperimentConfig, lo_exp: f64, n_top: u64) -> Result<Vec<u64>> {
    if let Some(c) = &config.checkpoints {
        if let Some(&top) = c.iter().max() {
            if top > n_top {
                return Err(crate::error::range(format!("checkpoint {top} exceeds n_max = {n_top}")));
            }
        }
        return Ok(c.clone());
    }
    let mut c: Vec<u64> = geometric_checkpoints(lo_exp, (n_top as f64).log10(), 0.5)
        .into_iter()
        .filter(|&n| n < n_top)
        .collect();
    c.push(n_top);
    Ok(c)
}

/// Computes the experiment without writing anything.
pub fn execute(config: &ExperimentConfig, workers: usize) -> Result<Outcome> {
    let kind = config.validate()?;
    runners::dispatch(kind, config, workers.max(1))
}

/// Runs the experiment and writes `<name>*.csv` plus `<name>.json` into
/// `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunOutput> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let kind = config.validate()?;
    let outcome = execute(config, workers)?;
    let wall = clock.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir)?;
    let mut csv = Vec::new();
    for (name, text) in &outcome.tables {
        let path = out_dir.join(name);
        fs::write(&path, text)?;
        csv.push(path);
    }
    let mut echoed = config.clone();
    echoed.out = None;
    let sidecar = json!({
        "schema_version": SCHEMA_VERSION,
        "library_version": env!("CARGO_PKG_VERSION"),
        "experiment": kind.name(),
        "config": echoed,
        "outputs": outcome.tables.iter().map(|t| t.0.clone()).collect::<Vec<_>>(),
        "summary": outcome.summary,
        "runtime": {
            "started_unix_seconds": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            "wall_time_seconds": wall,
            "workers": workers.max(1),
        },
    });
    let sidecar_path = out_dir.join(format!("{}.json", kind.name()));
    fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(RunOutput {
        csv,
        sidecar: sidecar_path,
        outcome,
    })
}
