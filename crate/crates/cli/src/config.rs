//! Run configuration: a TOML file with one table per module, overridden by
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use dmsoliton::dispersion::{pushforward_measure, DispersionProfile, QuadMeasure, Segment};
use dmsoliton::field::{Grid, Lattice};
use dmsoliton::io::read_measure;
use dmsoliton::solver::{Method, SolverOptions};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    #[default]
    Continuous,
    Discrete,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub case: Option<Case>,
    pub lambda: Option<f64>,
    pub d_av: Option<f64>,
    /// `[n, L]`.
    pub grid: Option<(usize, f64)>,
    pub lattice: Option<usize>,
    /// `uniform01` or a path to a measure file.
    pub measure: Option<String>,
    /// Path to a profile file.
    pub profile: Option<PathBuf>,
    pub nodes: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub step: Option<f64>,
    pub recenter: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub mode: Option<String>,
    pub field: Option<PathBuf>,
    pub eps: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    /// Breather study: time steps per unit of `eps`.
    pub steps_per_eps: Option<usize>,
    pub snapshots: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub output: OutputSection,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config: cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config: {}", e.to_string().trim_end())))
    }

    pub fn case(&self) -> Case {
        self.problem.case.unwrap_or_default()
    }

    pub fn lambda(&self) -> Result<f64, CliError> {
        let l = self.problem.lambda.unwrap_or(1.0);
        if l > 0.0 && l.is_finite() {
            Ok(l)
        } else {
            Err(CliError::Usage(format!("lambda: must be positive, got {l}")))
        }
    }

    pub fn d_av(&self) -> Result<f64, CliError> {
        let d = self.problem.d_av.unwrap_or(0.0);
        if d >= 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(CliError::Usage(format!("d_av: must be >= 0, got {d}")))
        }
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let (n, l) = self.problem.grid.unwrap_or((512, 40.0));
        Grid::new(n, l).map_err(|e| CliError::Usage(format!("grid: {e}")))
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        Lattice::new(self.problem.lattice.unwrap_or(64)).map_err(|e| CliError::Usage(format!("lattice: {e}")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let d = SolverOptions::default();
        let method = match &self.solver.method {
            Some(m) => m
                .parse::<Method>()
                .map_err(|_| CliError::Usage(format!("method: unknown method `{m}` (use sr or ascent)")))?,
            None => d.method,
        };
        let opts = SolverOptions {
            method,
            tol: self.solver.tol.unwrap_or(d.tol),
            max_iter: self.solver.max_iter.unwrap_or(d.max_iter),
            damping: self.solver.damping.unwrap_or(d.damping),
            step: self.solver.step.unwrap_or(d.step),
            recenter: self.solver.recenter.unwrap_or(d.recenter),
            seed: self.seed,
        };
        opts.validate().map_err(|e| CliError::Usage(format!("solver: {e}")))?;
        Ok(opts)
    }

    pub fn profile(&self) -> Result<Option<DispersionProfile>, CliError> {
        self.problem.profile.as_deref().map(load_profile).transpose()
    }

    /// The measure named by `measure`, or the pushforward of `profile`.
    /// Exactly one of the two must be set.
    pub fn measure(&self) -> Result<QuadMeasure, CliError> {
        match (&self.problem.measure, &self.problem.profile) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "measure: give either a measure or a profile, not both".into(),
            )),
            (None, None) => Err(CliError::Usage("measure: a measure or a profile is required".into())),
            (Some(name), None) => match QuadMeasure::named(name) {
                Some(m) => Ok(m),
                None => {
                    let path = Path::new(name);
                    if !path.exists() {
                        return Err(CliError::Usage(format!(
                            "measure: `{name}` is neither a known name nor an existing file"
                        )));
                    }
                    read_measure(path).map_err(|e| CliError::Usage(format!("measure: {e}")))
                }
            },
            (None, Some(path)) => {
                let profile = load_profile(path)?;
                pushforward_measure(&profile, self.problem.nodes.unwrap_or(64))
                    .map_err(|e| CliError::Usage(format!("nodes: {e}")))
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    /// `[start, end, value]` triples covering `[-1, 1]`.
    segments: Vec<(f64, f64, f64)>,
    #[serde(default)]
    d_av: f64,
    #[serde(default = "default_eps")]
    eps: f64,
}

fn default_eps() -> f64 {
    0.1
}

/// Profile files are TOML:
/// `segments = [[-1, 0, 1], [0, 1, -1]]`, plus optional `d_av` and `eps`.
pub fn load_profile(path: &Path) -> Result<DispersionProfile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("profile: cannot read {}: {e}", path.display())))?;
    let raw: ProfileFile =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("profile: {}", e.to_string().trim_end())))?;
    let segments = raw
        .segments
        .into_iter()
        .map(|(start, end, value)| Segment { start, end, value })
        .collect();
    DispersionProfile::new(segments, raw.d_av, raw.eps).map_err(|e| CliError::Usage(format!("profile: {e}")))
}
