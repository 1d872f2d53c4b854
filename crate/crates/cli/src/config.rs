//! Run settings: a flat TOML file merged with command-line flags.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tpm_core::montecarlo::{DEFAULT_REPLICATIONS, DEFAULT_SHOTS};
use tpm_core::{BlochVector, EnergySpec, InitialState, ProtocolConfig, PulseSpec, ShotPlan, Spam};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Table2,
    Table4,
    Fig2,
    Custom,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Table2 => "table2",
            Suite::Table4 => "table4",
            Suite::Fig2 => "fig2",
            Suite::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Montecarlo,
    Both,
}

impl Mode {
    pub fn exact(self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn montecarlo(self) -> bool {
        matches!(self, Mode::Montecarlo | Mode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Text,
}

/// Where and how rows are written. `path = None` means stdout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutputSpec {
    pub format: Format,
    pub path: Option<PathBuf>,
}

/// Either `"p_prep,p_detect"` or a two-element array.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SpamSetting {
    Pair([f64; 2]),
    Text(String),
}

impl SpamSetting {
    fn resolve(&self) -> Result<Spam, CliError> {
        match self {
            SpamSetting::Pair([p, d]) => checked_spam(*p, *d),
            SpamSetting::Text(s) => parse_spam(s),
        }
    }
}

/// Unresolved settings; every field is optional so that file and flags can
/// be layered.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct Settings {
    pub suite: Option<Suite>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub reps: Option<u32>,
    pub spam: Option<SpamSetting>,
    pub phi0: Option<f64>,
    pub phi1: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub check: Option<bool>,
    // custom suite only
    pub alpha: Option<f64>,
    pub beta_e: Option<f64>,
    pub p_axis: Option<String>,
    pub q_axis: Option<String>,
    pub theta: Option<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "suite", "mode", "seed", "shots", "reps", "spam", "phi0", "phi1", "out", "format", "check", "alpha", "beta_e",
    "p_axis", "q_axis", "theta",
];

impl Settings {
    /// Parses a flat TOML document, rejecting every unknown key at once.
    pub fn from_toml(text: &str) -> Result<Settings, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let unknown: BTreeSet<&str> = table
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            let list: Vec<&str> = unknown.into_iter().collect();
            return Err(CliError::Config(format!("unknown keys: {}", list.join(", "))));
        }
        Settings::deserialize(table).map_err(|e| CliError::Config(format!("{e}")))
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Settings::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            suite: self.suite.or(base.suite),
            mode: self.mode.or(base.mode),
            seed: self.seed.or(base.seed),
            shots: self.shots.or(base.shots),
            reps: self.reps.or(base.reps),
            spam: self.spam.or(base.spam),
            phi0: self.phi0.or(base.phi0),
            phi1: self.phi1.or(base.phi1),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            check: self.check.or(base.check),
            alpha: self.alpha.or(base.alpha),
            beta_e: self.beta_e.or(base.beta_e),
            p_axis: self.p_axis.or(base.p_axis),
            q_axis: self.q_axis.or(base.q_axis),
            theta: self.theta.or(base.theta),
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    pub suite: Suite,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub shots: u64,
    pub replications: u32,
    pub spam: Option<Spam>,
    /// Preparation pulse phase.
    pub phi0: f64,
    /// Evolution pulse phase for the pure-state suites.
    pub phi1: f64,
    /// Present exactly when `suite` is [`Suite::Custom`].
    pub custom: Option<ProtocolConfig>,
    pub output: OutputSpec,
    pub check: bool,
}

impl SuiteSpec {
    /// Defaults for a built-in suite: exact mode, stdout CSV.
    pub fn new(suite: Suite) -> SuiteSpec {
        SuiteSpec {
            suite,
            mode: Mode::Exact,
            seed: None,
            shots: DEFAULT_SHOTS,
            replications: DEFAULT_REPLICATIONS,
            spam: None,
            phi0: 0.0,
            phi1: 0.0,
            custom: None,
            output: OutputSpec::default(),
            check: false,
        }
    }

    /// Monte-Carlo plan for grid cell `cell`; `None` in exact mode.
    pub fn shot_plan(&self, cell: usize) -> Option<ShotPlan> {
        let seed = self.seed.filter(|_| self.mode.montecarlo())?;
        Some(ShotPlan {
            shots_per_setting: self.shots,
            replications: self.replications,
            seed,
            spam: self.spam,
            substream: cell as u32,
        })
    }
}

/// Resolves the merged settings, applying defaults and validating.
pub fn load_config(file: Option<&Path>, flags: Settings) -> Result<SuiteSpec, CliError> {
    let base = match file {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    resolve(flags.over(base))
}

pub fn resolve(s: Settings) -> Result<SuiteSpec, CliError> {
    let suite = s
        .suite
        .ok_or_else(|| CliError::Usage("no suite given (table2, table4, fig2 or custom)".into()))?;
    let mut spec = SuiteSpec::new(suite);
    spec.mode = s.mode.unwrap_or_default();
    spec.seed = s.seed;
    spec.shots = s.shots.unwrap_or(DEFAULT_SHOTS);
    spec.replications = s.reps.unwrap_or(DEFAULT_REPLICATIONS);
    spec.spam = s.spam.as_ref().map(SpamSetting::resolve).transpose()?;
    spec.phi0 = s.phi0.unwrap_or(0.0);
    spec.phi1 = s.phi1.unwrap_or(0.0);
    spec.output = OutputSpec {
        format: s.format.unwrap_or_default(),
        path: s.out.clone(),
    };
    spec.check = s.check.unwrap_or(false);

    for (name, v) in [("phi0", spec.phi0), ("phi1", spec.phi1)] {
        if !v.is_finite() {
            return Err(CliError::Config(format!("{name} must be finite")));
        }
    }
    if spec.mode.montecarlo() {
        let seed = spec
            .seed
            .ok_or_else(|| CliError::Config("montecarlo mode requires an explicit seed".into()))?;
        ShotPlan {
            shots_per_setting: spec.shots,
            replications: spec.replications,
            seed,
            spam: spec.spam,
            substream: 0,
        }
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let custom_keys = [
        ("alpha", s.alpha.is_some()),
        ("beta_e", s.beta_e.is_some()),
        ("p_axis", s.p_axis.is_some()),
        ("q_axis", s.q_axis.is_some()),
        ("theta", s.theta.is_some()),
    ];
    if suite == Suite::Custom {
        spec.custom = Some(custom_config(&s, spec.phi0, spec.phi1)?);
    } else {
        let stray: Vec<&str> = custom_keys.iter().filter(|(_, set)| *set).map(|(k, _)| *k).collect();
        if !stray.is_empty() {
            return Err(CliError::Config(format!(
                "{} only apply to the custom suite",
                stray.join(", ")
            )));
        }
    }
    Ok(spec)
}

fn custom_config(s: &Settings, phi0: f64, phi1: f64) -> Result<ProtocolConfig, CliError> {
    let missing = |k: &str| CliError::Config(format!("custom suite requires {k}"));
    let initial = match (s.alpha, s.beta_e) {
        (Some(alpha), None) => InitialState::Pure { alpha },
        (None, Some(beta_e)) => InitialState::Gibbs { beta_e },
        (Some(_), Some(_)) => return Err(CliError::Config("give either alpha or beta_e, not both".into())),
        (None, None) => return Err(missing("alpha or beta_e")),
    };
    let p_axis = parse_axis(s.p_axis.as_deref().ok_or_else(|| missing("p_axis"))?)?;
    let q_axis = parse_axis(s.q_axis.as_deref().ok_or_else(|| missing("q_axis"))?)?;
    let theta = s.theta.ok_or_else(|| missing("theta"))?;
    let cfg = ProtocolConfig {
        initial,
        prep_phase: phi0,
        p_axis,
        q_axis,
        evolution: PulseSpec::new(theta, phi1),
        energy: match initial {
            InitialState::Gibbs { beta_e } => Some(EnergySpec::new(beta_e)),
            InitialState::Pure { .. } => None,
        },
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// `x`, `y`, `z`, `o` (the in-plane axis at 60°, optionally prefixed with `-`)
/// or three comma-separated components of a unit vector.
pub fn parse_axis(text: &str) -> Result<BlochVector, CliError> {
    let t = text.trim();
    let (sign, name) = match t.strip_prefix('-') {
        Some(rest) if !rest.contains(',') => (-1.0, rest),
        _ => (1.0, t),
    };
    let named = match name.to_ascii_lowercase().as_str() {
        "x" => Some(BlochVector::X),
        "y" => Some(BlochVector::Y),
        "z" => Some(BlochVector::Z),
        "o" => Some(BlochVector::oblique()),
        _ => None,
    };
    if let Some(v) = named {
        return Ok(v.scaled(sign));
    }
    let parts = t
        .split(',')
        .map(|p| f64::from_str(p.trim()))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| CliError::Config(format!("cannot parse axis {text:?}")))?;
    match parts[..] {
        [x, y, z] => {
            let v = BlochVector::new(x, y, z);
            if !v.is_unit() {
                return Err(CliError::Config(format!("axis {text:?} is not a unit vector")));
            }
            Ok(v)
        }
        _ => Err(CliError::Config(format!("axis {text:?} needs three components"))),
    }
}

pub fn parse_spam(text: &str) -> Result<Spam, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Config(format!("spam must be \"p_prep,p_detect\", got {text:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let p = parts[0].parse().map_err(|_| bad())?;
    let d = parts[1].parse().map_err(|_| bad())?;
    checked_spam(p, d)
}

fn checked_spam(p: f64, d: f64) -> Result<Spam, CliError> {
    for v in [p, d] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config(format!("spam probability {v} is outside [0, 1]")));
        }
    }
    Ok(Spam {
        p_prep_error: p,
        p_detect_error: d,
    })
}

/// The pure-state time grid `t = kτ`, `τ = π/5Ω`, as carrier angles.
pub fn time_grid() -> [f64; 4] {
    [1.0, 2.0, 3.0, 4.0].map(|k| k * PI / 5.0)
}
