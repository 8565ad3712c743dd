//! Command-line surface. Every parameter is optional at parse time so that a JSON
//! config can supply it; the same structs (with defaults filled in) are what a run
//! manifest records under `params`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pnrq_core::{ClickModel, DetectorConfig, DistributionSet, PhotonDistribution, TruncationPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "pnrq", version, about = "Quality of multiplexed photon-number-resolving detectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Q_n for n = 0..=N of one detector.
    Quality(QualityArgs),
    /// Q_n over a grid of efficiencies.
    Curve(CurveArgs),
    /// Smallest efficiency reaching Q_n >= q.
    Threshold(ThresholdArgs),
    /// Smallest spatial array reaching Q_n >= q, per n.
    Scaling(ScalingArgs),
    /// Q_n over a grid of dark-count probabilities.
    DarkSweep(DarkSweepArgs),
    /// Q_n of a loop detector over a grid of exit probabilities.
    Loop(LoopArgs),
    /// Compare analytic response columns with Monte Carlo histograms.
    Validate(ValidateArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Spatial,
    Temporal,
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Full,
    Poisson,
    Hull,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorArgs {
    #[arg(long, value_enum)]
    pub detector: Option<DetectorKind>,
    /// Array elements (spatial) or time bins (temporal, a power of two).
    #[arg(long)]
    pub elements: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dark-count probability per detection window.
    #[arg(long)]
    pub dark: Option<f64>,
    /// Transmission of one fiber coupler (temporal).
    #[arg(long)]
    pub coupler_eff: Option<f64>,
    /// Probability T of leaving the loop per pass.
    #[arg(long)]
    pub exit_prob: Option<f64>,
    /// Probability of surviving one round trip in the loop.
    #[arg(long)]
    pub loop_survival: Option<f64>,
    /// Maximum number of loop passes.
    #[arg(long)]
    pub loops: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SetArgs {
    #[arg(long, value_enum)]
    pub set: Option<SetKind>,
    /// Largest Poisson mean; defaults to n.
    #[arg(long)]
    pub mu_max: Option<f64>,
    /// Hull generators, e.g. `fock:3,poisson:2.5`.
    #[arg(long)]
    pub bases: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TruncationArgs {
    /// Tabulate input photon numbers up to this value.
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub probe_len: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output file; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for a `.json` output, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Manifest path; defaults to `<out stem>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// JSON file supplying any of the flags (or a previous manifest); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

macro_rules! command_args {
    ($(#[$doc:meta])* $name:ident { $($(#[$fattr:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
        #[serde(default)]
        pub struct $name {
            #[command(flatten)]
            #[serde(flatten)]
            pub detector: DetectorArgs,
            #[command(flatten)]
            #[serde(flatten)]
            pub set: SetArgs,
            #[command(flatten)]
            #[serde(flatten)]
            pub truncation: TruncationArgs,
            $($(#[$fattr])* #[arg(long)] pub $field: $ty,)*
            #[command(flatten)]
            #[serde(skip)]
            pub output: OutputArgs,
        }
    };
}

command_args!(QualityArgs {
    /// Largest output class N.
    n: Option<usize>,
});

command_args!(CurveArgs {
    /// Output classes, e.g. `1..5`.
    n: Option<String>,
    /// Efficiency grid, e.g. `0.5..1:0.01`.
    etas: Option<String>,
});

command_args!(ThresholdArgs {
    n: Option<usize>,
    /// Target quality.
    q: Option<f64>,
    /// Width of the final efficiency bracket.
    tol: Option<f64>,
});

command_args!(ScalingArgs {
    n: Option<String>,
    q: Option<f64>,
    /// Add the leading-order estimate n^2 / (2 (n ln eta - ln q)).
    #[arg(num_args = 0..=1, default_missing_value = "true")]
    with_approx: Option<bool>,
});

command_args!(DarkSweepArgs {
    n: Option<String>,
    /// Dark-count grid, e.g. `0..0.1:0.01`.
    darks: Option<String>,
});

command_args!(LoopArgs {
    n: Option<String>,
    /// Exit-probability grid, e.g. `0.05..0.95:0.05`.
    exit_probs: Option<String>,
});

command_args!(ValidateArgs {
    /// Collapse class of the histograms.
    n: Option<usize>,
    /// Input photon numbers, e.g. `0..12`.
    photons: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    z_threshold: Option<f64>,
});

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    pub manifest_in: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Access shared by every command's argument struct.
pub trait CommandArgs: Serialize + for<'de> Deserialize<'de> + Default + Clone {
    const NAME: &'static str;
    fn output(&self) -> &OutputArgs;
    fn output_mut(&mut self) -> &mut OutputArgs;
}

macro_rules! impl_command_args {
    ($($ty:ident => $name:literal),*) => {$(
        impl CommandArgs for $ty {
            const NAME: &'static str = $name;
            fn output(&self) -> &OutputArgs { &self.output }
            fn output_mut(&mut self) -> &mut OutputArgs { &mut self.output }
        }
    )*};
}

impl_command_args!(
    QualityArgs => "quality",
    CurveArgs => "curve",
    ThresholdArgs => "threshold",
    ScalingArgs => "scaling",
    DarkSweepArgs => "dark-sweep",
    LoopArgs => "loop",
    ValidateArgs => "validate"
);

pub fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::usage(format!("--{flag} is required")))
}

pub fn forbid<T>(value: &Option<T>, flag: &str, why: &str) -> Result<()> {
    match value {
        Some(_) => Err(CliError::usage(format!("--{flag} cannot be set here: {why}"))),
        None => Ok(()),
    }
}

fn other_flag<T>(value: &Option<T>, flag: &str, kind: DetectorKind) -> Result<()> {
    forbid(value, flag, &format!("it does not apply to a {kind:?} detector").to_lowercase())
}

impl DetectorArgs {
    /// Fills defaults and builds the detector. `free` names a parameter the caller
    /// will sweep or solve for; it gets `placeholder` instead of a default.
    pub fn resolve(&mut self, free: Option<(&str, f64)>) -> Result<DetectorConfig> {
        let kind = required(self.detector, "detector")?;
        let placeholder = |name: &str| free.filter(|(f, _)| *f == name).map(|(_, v)| v);
        let pick = |slot: &mut Option<f64>, name: &str, default: Option<f64>| -> Result<f64> {
            if let Some(v) = placeholder(name) {
                forbid(slot, name, "it is the swept or solved parameter")?;
                return Ok(v);
            }
            if slot.is_none() {
                *slot = default;
            }
            required(*slot, name)
        };
        let eta = pick(&mut self.eta, "eta", Some(1.0))?;
        let dark = pick(&mut self.dark, "dark", Some(0.0))?;
        let click = ClickModel::new(eta, dark)?;
        let config = match kind {
            DetectorKind::Spatial | DetectorKind::Temporal => {
                other_flag(&self.exit_prob, "exit-prob", kind)?;
                other_flag(&self.loop_survival, "loop-survival", kind)?;
                other_flag(&self.loops, "loops", kind)?;
                let elements = required(self.elements, "elements")?;
                if kind == DetectorKind::Spatial {
                    other_flag(&self.coupler_eff, "coupler-eff", kind)?;
                    DetectorConfig::spatial(elements, click)?
                } else {
                    let eta_c = pick(&mut self.coupler_eff, "coupler-eff", Some(1.0))?;
                    DetectorConfig::temporal(elements, eta_c, click)?
                }
            }
            DetectorKind::Loop => {
                other_flag(&self.elements, "elements", kind)?;
                other_flag(&self.coupler_eff, "coupler-eff", kind)?;
                let t = pick(&mut self.exit_prob, "exit-prob", None)?;
                let survival = pick(&mut self.loop_survival, "loop-survival", Some(1.0))?;
                let loops = required(self.loops, "loops")?;
                DetectorConfig::looped(t, survival, loops, click)?
            }
        };
        Ok(config)
    }
}

impl SetArgs {
    pub fn resolve(&mut self) -> Result<DistributionSet> {
        let kind = *self.set.get_or_insert(SetKind::Full);
        match kind {
            SetKind::Full => {
                forbid(&self.mu_max, "mu-max", "it applies to --set poisson")?;
                forbid(&self.bases, "bases", "it applies to --set hull")?;
                Ok(DistributionSet::All)
            }
            SetKind::Poisson => {
                forbid(&self.bases, "bases", "it applies to --set hull")?;
                match self.mu_max {
                    Some(mu) => Ok(DistributionSet::poisson(mu)?),
                    None => Ok(DistributionSet::poisson_up_to_n()),
                }
            }
            SetKind::Hull => {
                forbid(&self.mu_max, "mu-max", "it applies to --set poisson")?;
                let text = self.bases.as_deref().ok_or_else(|| CliError::usage("--set hull needs --bases"))?;
                Ok(DistributionSet::hull(parse_bases(text)?)?)
            }
        }
    }
}

fn parse_bases(text: &str) -> Result<Vec<PhotonDistribution>> {
    text.split(',')
        .map(|item| {
            let bad = || CliError::usage(format!("base `{item}` is not `fock:<m>` or `poisson:<mu>`"));
            let (kind, value) = item.trim().split_once(':').ok_or_else(bad)?;
            match kind {
                "fock" => Ok(PhotonDistribution::fock(value.parse().map_err(|_| bad())?)),
                "poisson" => Ok(PhotonDistribution::poisson(value.parse().map_err(|_| bad())?)?),
                _ => Err(bad()),
            }
        })
        .collect()
}

impl TruncationArgs {
    pub fn resolve(&mut self) -> Result<TruncationPolicy> {
        let d = TruncationPolicy::default();
        let tail_tol = *self.tail_tol.get_or_insert(d.tail_tol);
        let probe = *self.probe_len.get_or_insert(d.monotone_probe_len);
        Ok(TruncationPolicy::new(self.m_max, tail_tol, probe)?)
    }
}

impl OutputArgs {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.out.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        })
    }

    /// Later values win; `config` is never inherited.
    pub fn overlay(&mut self, other: &OutputArgs) {
        if other.out.is_some() {
            self.out.clone_from(&other.out);
        }
        if other.format.is_some() {
            self.format = other.format;
        }
        if other.manifest.is_some() {
            self.manifest.clone_from(&other.manifest);
        }
    }
}
