use std::path::PathBuf;

use clap::{Args, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Nonclassicality of photon-added coherent states in a photon-loss channel.
#[derive(Debug, Parser)]
#[command(name = "pacs", version)]
pub struct Cli {
    /// JSON run configuration, used in place of a subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Wigner function on a square phase-space grid.
    Wigner(WignerArgs),
    /// Wigner function along q at fixed p.
    Cut(CutArgs),
    /// Total negative Wigner probability at one or more decay times.
    Pnw(PnwArgs),
    /// Entanglement potential at one or more decay times.
    Ep(EpArgs),
    /// Decay time at which the negative Wigner probability drops below epsilon.
    Threshold(ThresholdArgs),
    /// Data files for one figure panel plus a manifest.
    Figure(FigureArgs),
}

/// Defaults shared by command-line parsing and JSON configs.
fn clap_defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults").no_binary_name(true));
    let matches = cmd.get_matches_from(std::iter::empty::<String>());
    T::from_arg_matches(&matches).expect("every argument has a default")
}

macro_rules! defaults_from_clap {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                clap_defaults()
            }
        }
    )*};
}

defaults_from_clap!(
    StateArgs,
    OutputArgs,
    TimeArgs,
    GridArgs,
    WignerArgs,
    CutArgs,
    PnwArgs,
    EpArgs,
    ThresholdArgs
);

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct StateArgs {
    /// Real part of the coherent amplitude.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Imaginary part of the coherent amplitude.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_im: f64,
    /// Number of added photons.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Fock truncation; chosen from the tail bound when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    GnuplotMatrix,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputArgs {
    /// Output file; stdout when omitted. A `<file>.manifest.json` is written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeArgs {
    /// Decay times gamma*t, comma separated.
    #[arg(
        long = "gamma-t",
        value_delimiter = ',',
        default_value = "0",
        allow_negative_numbers = true
    )]
    pub gamma_t: Vec<f64>,
    /// Evenly spaced decay times `start:stop:step`, overriding --gamma-t.
    #[arg(long, value_name = "START:STOP:STEP")]
    pub gamma_range: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GridArgs {
    /// Grid spans the damped amplitude plus or minus this half width.
    #[arg(long, default_value_t = pacs_core::wigner::DEFAULT_HALF_WIDTH)]
    pub half_width: f64,
    /// Samples per axis.
    #[arg(long, default_value_t = pacs_core::wigner::DEFAULT_POINTS)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Displaced-parity formula on the loss-evolved density matrix.
    Parity,
    /// Green's-function propagation of the closed-form initial Wigner function.
    Propagated,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct WignerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[arg(long = "gamma-t", default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma_t: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Method::Parity)]
    pub method: Method,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CutArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[arg(long = "gamma-t", default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma_t: f64,
    /// Fixed momentum quadrature.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PnwArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub times: TimeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub state: StateArgs,
    /// Negative probability below which the negativity counts as vanished.
    #[arg(long, default_value_t = pacs_core::negativity::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Right end of the bisection bracket.
    #[arg(long, default_value_t = pacs_core::negativity::DEFAULT_BRACKET.1)]
    pub upper: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum FigureId {
    #[value(name = "1")]
    #[serde(rename = "1")]
    F1,
    #[value(name = "2")]
    #[serde(rename = "2")]
    F2,
    #[value(name = "3")]
    #[serde(rename = "3")]
    F3,
    #[value(name = "4")]
    #[serde(rename = "4")]
    F4,
    #[value(name = "5a")]
    #[serde(rename = "5a")]
    F5a,
    #[value(name = "5b")]
    #[serde(rename = "5b")]
    F5b,
    #[value(name = "5c")]
    #[serde(rename = "5c")]
    F5c,
    #[value(name = "5d")]
    #[serde(rename = "5d")]
    F5d,
}

impl FigureId {
    pub fn label(self) -> &'static str {
        match self {
            FigureId::F1 => "1",
            FigureId::F2 => "2",
            FigureId::F3 => "3",
            FigureId::F4 => "4",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
            FigureId::F5c => "5c",
            FigureId::F5d => "5d",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Directory receiving the data files and `fig<id>_manifest.json`.
    #[arg(long, default_value = "figures")]
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// File format of the data files; gnuplot-matrix applies to the surface figures only.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("figures")
}

fn default_format() -> Format {
    Format::Csv
}
