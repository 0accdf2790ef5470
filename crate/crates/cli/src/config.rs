//! Command-line flags, the JSON run configuration and their merge.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cwlab_core::{ClusterPolicy, FleaParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::sweep::parse_sweep;

#[derive(Debug, Parser)]
#[command(
    name = "cwlab",
    version,
    about = "Finite-N quantum Curie-Weiss model: spectra, ground states, tunnelling and flea localization",
    after_help = "Outputs are CSV files with a '#'-prefixed metadata header, optionally with SVG plots.\n\
                  Exit codes: 0 success, 2 parameter error, 3 numerical failure, 4 I/O error.\n\
                  CWLAB_THREADS caps the number of worker threads used for N sweeps."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Lowest eigenvalues of J_{N+1}/N (eps_n) against the uniform Schrodinger
    /// discretisation H~_N (lambda_n). Reproduces Table 1 and the bound-state spectrum.
    Spectrum(Flags),
    /// Eigenvectors of J_{N+1} (plus flea) as state_<k>.csv, with the shifted
    /// potential overlaid in the SVG. Reproduces the ground-state, excited-state and localization figures.
    Groundstate(Flags),
    /// Splitting of the two lowest eigenvalues of J_{N+1} over an N sweep.
    /// Reproduces the degeneracy figure.
    Splitting(Flags),
    /// Width at half height of the localized ground state over an N sweep,
    /// with a log-log slope fit. Reproduces the width figure.
    Width(Flags),
    /// Shifted harmonic levels (table2.csv) and N*eps_0 (table3.csv).
    /// Reproduces Tables 2 and 3.
    Tables(Flags),
    /// Dense 2^N construction checked against the tridiagonal reduction and
    /// the Perron-Frobenius conclusions; writes oracle_report.json.
    OracleCheck(Flags),
}

impl CommandArgs {
    pub fn split(self) -> (Command, Flags) {
        match self {
            CommandArgs::Spectrum(f) => (Command::Spectrum, f),
            CommandArgs::Groundstate(f) => (Command::Groundstate, f),
            CommandArgs::Splitting(f) => (Command::Splitting, f),
            CommandArgs::Width(f) => (Command::Width, f),
            CommandArgs::Tables(f) => (Command::Tables, f),
            CommandArgs::OracleCheck(f) => (Command::OracleCheck, f),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Number of sites: a single value, a comma list or start:step:stop.
    #[arg(long = "N", value_name = "N")]
    pub n: Option<String>,
    /// Transverse field (default 0.5).
    #[arg(long = "B", value_name = "B", allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Coupling constant (default 1).
    #[arg(long = "J", value_name = "J", allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Flea centre in [0, 1].
    #[arg(long = "flea-b", value_name = "b", allow_negative_numbers = true)]
    pub flea_b: Option<f64>,
    /// Flea half-width.
    #[arg(long = "flea-c", value_name = "c")]
    pub flea_c: Option<f64>,
    /// Flea height.
    #[arg(long = "flea-d", value_name = "d", allow_negative_numbers = true)]
    pub flea_d: Option<f64>,
    /// Number of eigenvalues or states.
    #[arg(long, value_name = "K")]
    pub levels: Option<usize>,
    /// Basis returned for numerically degenerate clusters.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Output directory (created if missing; default ".").
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats.
    #[arg(long, value_enum, value_delimiter = ',', value_name = "csv,svg")]
    pub format: Option<Vec<Format>>,
    /// N used for Table 2 by the `tables` command (default 1000).
    #[arg(long = "table2-N", value_name = "N")]
    pub table2_n: Option<usize>,
    /// oracle-check: a check that is expected to fail; exit 0 if exactly the
    /// named checks fail.
    #[arg(long, value_name = "CHECK")]
    pub expect_fail: Vec<String>,
    /// JSON file mirroring the run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Raw,
    Symmetrized,
}

impl From<PolicyArg> for ClusterPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Raw => ClusterPolicy::Raw,
            PolicyArg::Symmetrized => ClusterPolicy::Symmetrized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Groundstate,
    Splitting,
    Width,
    Tables,
    OracleCheck,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Spectrum => "spectrum",
            Command::Groundstate => "groundstate",
            Command::Splitting => "splitting",
            Command::Width => "width",
            Command::Tables => "tables",
            Command::OracleCheck => "oracle-check",
        };
        f.write_str(s)
    }
}

impl Command {
    fn default_sweep(self) -> &'static str {
        match self {
            Command::Spectrum => "1000",
            Command::Groundstate => "60",
            Command::Splitting => "10:10:150",
            Command::Width => "100:50:1500",
            Command::Tables => "100,1000,2500,5000",
            Command::OracleCheck => "10",
        }
    }

    fn default_levels(self) -> usize {
        match self {
            Command::Spectrum | Command::Tables => 10,
            Command::Groundstate | Command::Splitting | Command::Width | Command::OracleCheck => 2,
        }
    }
}

/// `N` as written in a config file: a list or the sweep syntax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepSpec {
    List(Vec<usize>),
    Text(String),
    One(usize),
}

/// Config file contents. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    #[serde(rename = "N")]
    pub n: Option<SweepSpec>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub flea: Option<FleaParams>,
    pub levels: Option<usize>,
    pub policy: Option<ClusterPolicy>,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub table2_n: Option<usize>,
    pub expect_fail: Option<Vec<String>>,
}

/// A validated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub flea: Option<FleaParams>,
    pub levels: usize,
    pub policy: ClusterPolicy,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub table2_n: usize,
    pub expect_fail: Vec<String>,
}

fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| param(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => load_config_file(p)?,
            None => ConfigFile::default(),
        };
        if let Some(c) = file.command {
            if c != command {
                return Err(param(format!("config is for `{c}` but `{command}` was requested")));
            }
        }
        let n = match (&flags.n, &file.n) {
            (Some(s), _) => parse_sweep(s)?,
            (None, Some(SweepSpec::Text(s))) => parse_sweep(s)?,
            (None, Some(SweepSpec::List(v))) => v.clone(),
            (None, Some(SweepSpec::One(v))) => vec![*v],
            (None, None) => parse_sweep(command.default_sweep())?,
        };
        let flea = match (flags.flea_b, flags.flea_c, flags.flea_d) {
            (None, None, None) => file.flea,
            (Some(b), Some(c), Some(d)) => Some(FleaParams { b, c, d }),
            _ => return Err(param("a flea needs all of --flea-b, --flea-c and --flea-d")),
        };
        let cfg = RunConfig {
            command,
            n,
            b: flags.b.or(file.b).unwrap_or(0.5),
            j: flags.j.or(file.j).unwrap_or(1.0),
            flea,
            levels: flags.levels.or(file.levels).unwrap_or(command.default_levels()),
            policy: flags.policy.map(Into::into).or(file.policy).unwrap_or_default(),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            formats: flags.format.or(file.formats).unwrap_or_else(|| vec![Format::Csv]),
            table2_n: flags.table2_n.or(file.table2_n).unwrap_or(1000),
            expect_fail: if flags.expect_fail.is_empty() { file.expect_fail.unwrap_or_default() } else { flags.expect_fail },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(param("N must be a non-empty list of positive integers"));
        }
        if !self.b.is_finite() {
            return Err(param(format!("B must be finite, got {}", self.b)));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(param(format!("J must be positive and finite, got {}", self.j)));
        }
        if self.levels == 0 {
            return Err(param("--levels must be at least 1"));
        }
        if self.formats.is_empty() {
            return Err(param("--format needs at least one of csv, svg"));
        }
        if let Some(f) = &self.flea {
            f.validate()?;
        }
        let single = matches!(self.command, Command::Spectrum | Command::Groundstate | Command::OracleCheck);
        if single && self.n.len() != 1 {
            return Err(param(format!("`{}` takes a single N", self.command)));
        }
        let n = self.n[0];
        match self.command {
            Command::Spectrum => {
                if n < 2 {
                    return Err(param("spectrum needs N >= 2"));
                }
                if self.flea.is_some() {
                    return Err(param("spectrum compares against the unperturbed Schrodinger operator; drop the flea"));
                }
            }
            Command::OracleCheck if n > 12 => {
                return Err(param(format!("oracle-check builds 2^N x 2^N matrices and accepts N <= 12, got {n}")));
            }
            Command::Width | Command::Tables if self.flea.is_some() => {
                return Err(param(format!("`{}` works on the unperturbed model; drop the flea", self.command)));
            }
            Command::Tables if self.table2_n < 2 => return Err(param("--table2-N must be at least 2")),
            _ => {}
        }
        if matches!(self.command, Command::Spectrum | Command::Groundstate) && self.levels > n + 1 {
            return Err(param(format!("--levels {} exceeds the {} eigenvalues of J_{{N+1}}", self.levels, n + 1)));
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Flags that reproduce this run, for output metadata. The output
    /// directory and formats are left out so equal runs give equal files.
    pub fn command_line(&self) -> String {
        let n = self.n.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("cwlab {} --N {n} --B {} --J {} --levels {}", self.command, self.b, self.j, self.levels);
        if let Some(f) = &self.flea {
            s += &format!(" --flea-b {} --flea-c {} --flea-d {}", f.b, f.c, f.d);
        }
        s += match self.policy {
            ClusterPolicy::Raw => " --policy raw",
            ClusterPolicy::Symmetrized => " --policy symmetrized",
        };
        if self.command == Command::Tables {
            s += &format!(" --table2-N {}", self.table2_n);
        }
        s
    }
}
