//! Config file schema and flag merging.
//!
//! ```toml
//! format = "csv"            # csv | json
//! output = "rates.csv"      # omitted: stdout
//!
//! [channel]
//! loss = "0:0.9:0.05"       # grid "start:stop:step", list "0.1,0.2", or a number
//! # eta = 0.5               # exactly one of eta / loss
//! delta = 0.0
//! eps = 0.0
//! r = 0.5                   # rate only
//!
//! [quadrature]
//! n_radial = 128
//! n_angular = 128
//! truncation_sigmas = 8.0
//! tolerance = 1e-9
//!
//! [optimizer]
//! cap = "both"              # both | eve_only
//! correction_symbols = "first_two"
//! posterior_phase = "eve"
//! r_points = 64             # optimize-r trace length
//!
//! [verify]
//! samples = 10000
//! seed = 42
//! properties = ["g_bounded", "entropy_concave"]
//! theta_max = 1.5707963267948966
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tpsk_core::{CorrectionSymbols, PhaseCap, PosteriorPhase, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LossSpec {
    Value(f64),
    Grid(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub eta: Option<f64>,
    pub loss: Option<LossSpec>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub n_radial: Option<usize>,
    pub n_angular: Option<usize>,
    pub truncation_sigmas: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub cap: Option<PhaseCap>,
    pub correction_symbols: Option<CorrectionSymbols>,
    pub posterior_phase: Option<PosteriorPhase>,
    pub r_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub properties: Option<Vec<String>>,
    pub theta_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn quadrature(&self, flags: &QuadratureSection) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        let q = &self.quadrature;
        QuadratureSpec::new(
            flags.n_radial.or(q.n_radial).unwrap_or(d.n_radial),
            flags.n_angular.or(q.n_angular).unwrap_or(d.n_angular),
            flags.truncation_sigmas.or(q.truncation_sigmas).unwrap_or(d.truncation_sigmas),
            flags.tolerance.or(q.tolerance).unwrap_or(d.tolerance),
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// The channel axis after merging: either fixed transmissivities or losses.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Eta(f64),
    Loss(Vec<f64>),
}

impl Axis {
    pub fn resolve(flag_eta: Option<f64>, flag_loss: Option<&str>, file: &ChannelSection) -> Result<Self, CliError> {
        let from_flags = match (flag_eta, flag_loss) {
            (Some(_), Some(_)) => return Err(CliError::Usage("give either --eta or --loss, not both".into())),
            (Some(eta), None) => Some(Axis::Eta(eta)),
            (None, Some(loss)) => Some(Axis::Loss(parse_loss(loss)?)),
            (None, None) => None,
        };
        if let Some(axis) = from_flags {
            return Ok(axis);
        }
        match (file.eta, &file.loss) {
            (Some(_), Some(_)) => Err(CliError::Usage("config sets both channel.eta and channel.loss".into())),
            (Some(eta), None) => Ok(Axis::Eta(eta)),
            (None, Some(LossSpec::Value(v))) => Ok(Axis::Loss(vec![*v])),
            (None, Some(LossSpec::Grid(s))) => Ok(Axis::Loss(parse_loss(s)?)),
            (None, None) => Err(CliError::Usage("one of --eta or --loss is required".into())),
        }
    }

    /// A single transmissivity, for commands that work at one channel point.
    pub fn single_eta(&self) -> Result<f64, CliError> {
        match self {
            Axis::Eta(eta) => Ok(*eta),
            Axis::Loss(v) if v.len() == 1 => Ok(1.0 - v[0]),
            Axis::Loss(v) => Err(CliError::Usage(format!("expected one loss value, got {}", v.len()))),
        }
    }

    pub fn losses(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Axis::Loss(v) => Ok(v.clone()),
            Axis::Eta(_) => Err(CliError::Usage("curve needs a loss grid (--loss start:stop:step)".into())),
        }
    }
}

/// `start:stop:step` (inclusive), a comma list, or a single number.
pub fn parse_loss(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("bad loss spec `{s}`: {what}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(bad("need start <= stop and step > 0"));
            }
            let n = ((b - a) / h).round();
            if (a + n * h - b).abs() > 1e-9 * h.max(b.abs()) {
                return Err(bad("step does not divide the range"));
            }
            Ok((0..=n as usize).map(|k| a + k as f64 * h).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad("expected start:stop:step")),
    }
}
