//! Run configuration: a TOML file merged with command-line overrides.
//! Flags win over file values; the merged result is echoed into every
//! output header.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use krein_core::{CMatrix, ExtensionSpec, Model, ModelSpec};
use num_complex::Complex64;

/// Exit codes: 0 success, 1 invariant failure, 2 config error,
/// 3 spectral-guard violation.
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

/// Maps a core error to the exit-code contract. Guard violations name
/// the offending point through the error's own display text.
pub fn from_core(err: krein_core::Error) -> CliError {
    use krein_core::Error::*;
    let code = match &err {
        SpectrumCollision { .. }
        | IntervalTouchesBaseSpectrum { .. }
        | SingularBoundaryOperator { .. }
        | SingularResolvent { .. } => EXIT_GUARD,
        RankDeficientTrace { .. }
        | IdentityViolation { .. }
        | NotHermitian { .. }
        | NonPositiveDensity { .. }
        | ConvergenceFailure => EXIT_INVARIANT,
        _ => EXIT_CONFIG,
    };
    CliError {
        code,
        message: err.to_string(),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_site: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSection {
    /// "operator" (default when theta is given) or "distinguished".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Row-major real symmetric k x k entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Real parts of the endpoints of a complex grid segment (weyl-grid),
    /// or a single value (resolvent).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zre: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zim: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// Flags shared by every subcommand; each mirrors a config-file key and
/// overrides it when present.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Path to a TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model kind: scalar-zero | diag-pair | random-hermitian | lattice | file.
    #[arg(long)]
    pub model: Option<String>,
    /// Dimension for random-hermitian / lattice models.
    #[arg(long)]
    pub n: Option<usize>,
    /// Auxiliary dimension for random-hermitian models.
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed of the random-hermitian model.
    #[arg(long)]
    pub model_seed: Option<u64>,
    /// Half width L of the lattice interval [-L, L].
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Interaction site of the lattice model (interior grid index).
    #[arg(long)]
    pub delta_site: Option<usize>,
    /// Model file for kind = file.
    #[arg(long)]
    pub model_path: Option<PathBuf>,
    /// Row-major real symmetric boundary parameter entries.
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,
    /// Use the distinguished relation (the unperturbed operator).
    #[arg(long)]
    pub distinguished: bool,
    /// Seed of the task's random draws.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest dimension at which dense oracle cross-checks run.
    #[arg(long)]
    pub oracle_cap: Option<usize>,
    /// Output file path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    pub fn ext(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

/// The fully merged configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub merged: FileConfig,
}

impl RunConfig {
    /// Loads the optional file and applies flag overrides.
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::config(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::config(format!("bad config file: {e}")))?
            }
            None => FileConfig::default(),
        };

        let model = cfg.model.get_or_insert_with(Default::default);
        if let Some(v) = &args.model {
            model.kind = Some(v.clone());
        }
        if let Some(v) = args.n {
            model.n = Some(v);
        }
        if let Some(v) = args.k {
            model.k = Some(v);
        }
        if let Some(v) = args.model_seed {
            model.seed = Some(v);
        }
        if let Some(v) = args.half_width {
            model.half_width = Some(v);
        }
        if let Some(v) = args.delta_site {
            model.delta_site = Some(v);
        }
        if let Some(v) = &args.model_path {
            model.path = Some(v.display().to_string());
        }

        let ext = cfg.extension.get_or_insert_with(Default::default);
        if args.distinguished {
            ext.kind = Some("distinguished".into());
            ext.theta = None;
        } else if let Some(v) = &args.theta {
            ext.kind = Some("operator".into());
            ext.theta = Some(v.clone());
        }

        let task = cfg.task.get_or_insert_with(Default::default);
        if let Some(v) = args.seed {
            task.seed = Some(v);
        }
        if let Some(v) = args.oracle_cap {
            task.oracle_cap = Some(v);
        }
        task.seed.get_or_insert(42);
        task.oracle_cap.get_or_insert(4096);

        let out = cfg.output.get_or_insert_with(Default::default);
        if let Some(v) = &args.out {
            out.path = Some(v.display().to_string());
        }
        if let Some(v) = &args.format {
            out.format = Some(v.clone());
        }
        out.format.get_or_insert_with(|| "csv".into());

        Ok(RunConfig { merged: cfg })
    }

    pub fn task(&self) -> &TaskSection {
        self.merged.task.as_ref().expect("task defaults present")
    }

    pub fn task_mut(&mut self) -> &mut TaskSection {
        self.merged.task.as_mut().expect("task defaults present")
    }

    pub fn seed(&self) -> u64 {
        self.task().seed.unwrap_or(42)
    }

    pub fn oracle_cap(&self) -> usize {
        self.task().oracle_cap.unwrap_or(4096)
    }

    pub fn format(&self) -> Result<OutFormat, CliError> {
        let f = self
            .merged
            .output
            .as_ref()
            .and_then(|o| o.format.as_deref())
            .unwrap_or("csv");
        match f {
            "csv" => Ok(OutFormat::Csv),
            "json" => Ok(OutFormat::Json),
            other => Err(CliError::config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }

    /// The output path, defaulting next to the working directory.
    pub fn out_path(&self, stem: &str) -> Result<PathBuf, CliError> {
        if let Some(p) = self.merged.output.as_ref().and_then(|o| o.path.as_ref()) {
            return Ok(PathBuf::from(p));
        }
        Ok(PathBuf::from(format!("krein-{stem}.{}", self.format()?.ext())))
    }

    /// Serializes the effective configuration for provenance headers.
    pub fn effective_toml(&self) -> String {
        toml::to_string(&self.merged).unwrap_or_default()
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = self
            .merged
            .model
            .as_ref()
            .filter(|m| m.kind.is_some())
            .ok_or_else(|| CliError::config("no model specified (--model or [model] section)"))?;
        let kind = m.kind.as_deref().unwrap();
        let need = |v: Option<usize>, what: &str| {
            v.ok_or_else(|| CliError::config(format!("model '{kind}' needs {what}")))
        };
        match kind {
            "scalar-zero" => Ok(ModelSpec::ScalarZero),
            "diag-pair" => Ok(ModelSpec::DiagPair),
            "random-hermitian" => Ok(ModelSpec::RandomHermitian {
                n: need(m.n, "--n")?,
                k: need(m.k, "--k")?,
                seed: m.seed.unwrap_or(0),
            }),
            "lattice" => Ok(ModelSpec::LatticeLaplacianDelta {
                n: need(m.n, "--n")?,
                half_width: m
                    .half_width
                    .ok_or_else(|| CliError::config("model 'lattice' needs --half-width"))?,
                delta_site: need(m.delta_site, "--delta-site")?,
            }),
            "file" => Ok(ModelSpec::FromFile {
                path: m
                    .path
                    .clone()
                    .ok_or_else(|| CliError::config("model 'file' needs --model-path"))?,
            }),
            other => Err(CliError::config(format!("unknown model kind '{other}'"))),
        }
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        krein_core::build_model(&self.model_spec()?).map_err(from_core)
    }

    /// Resolves the extension parameter; a Theta carried by a model file
    /// is used when the config names none.
    pub fn extension(&self, model: &Model) -> Result<ExtensionSpec, CliError> {
        let ext = self.merged.extension.as_ref();
        match ext.and_then(|e| e.kind.as_deref()) {
            Some("distinguished") => return Ok(ExtensionSpec::DistinguishedRelation),
            Some("operator") | None => {}
            Some(other) => {
                return Err(CliError::config(format!(
                    "unknown extension kind '{other}'"
                )))
            }
        }
        if let Some(values) = ext.and_then(|e| e.theta.as_ref()) {
            let k = (values.len() as f64).sqrt().round() as usize;
            if k * k != values.len() || k == 0 {
                return Err(CliError::config(format!(
                    "theta needs a square number of entries, got {}",
                    values.len()
                )));
            }
            let theta = CMatrix::from_fn(k, k, |i, j| Complex64::new(values[i * k + j], 0.0));
            return ExtensionSpec::operator(theta)
                .map_err(|e| CliError::config(format!("bad theta: {e}")));
        }
        if let Some(theta) = &model.theta {
            return ExtensionSpec::operator(theta.clone())
                .map_err(|e| CliError::config(format!("bad theta in model file: {e}")));
        }
        Err(CliError::config(
            "no extension parameter (--theta, --distinguished, or theta in the model file)",
        ))
    }
}
