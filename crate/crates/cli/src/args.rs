use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use shiftbound::adapt::weight;
use shiftbound::{LossKind, ObjectiveWeights, ScenarioConfig, SettingKind};

#[derive(Parser, Debug)]
#[command(
    name = "shiftbound",
    version,
    about = "Verify domain-shift generalization bounds and train adaptation hypotheses on seeded scenarios",
    after_help = "Set SHIFTBOUND_WORKERS to choose the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate every bound of a setting on N scenarios at trained, ERM and random candidates
    Verify(VerifyArgs),
    /// Train the bound-motivated objective and report the chosen hypothesis's bounds
    Train(TrainArgs),
    /// Estimate the loss triangle constant and per-member Lipschitz constants
    Constants(ConstantsArgs),
    /// Run the discrepancy property suite on seeded random instances
    Axioms(AxiomsArgs),
    /// Write a scenario (config plus full setting) as JSON
    Generate(GenerateArgs),
    /// Regenerate a scenario file from its embedded config and report drift
    CheckScenario(CheckScenarioArgs),
    /// Re-run the command recorded in a manifest and compare its output byte for byte
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Train(_) => "train",
            Command::Constants(_) => "constants",
            Command::Axioms(_) => "axioms",
            Command::Generate(_) => "generate",
            Command::CheckScenario(_) => "check-scenario",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file; a manifest is written next to it as <out>.manifest.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_kind(s: &str) -> Result<SettingKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<_> = SettingKind::ALL.iter().map(|k| k.cli_name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    s.parse().map_err(|_| "expected one of abs, sq, 01".to_string())
}

fn parse_weight(s: &str) -> Result<f64, String> {
    let v = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if v.is_nan() || v < 0.0 {
        return Err("weights must be non-negative (or inf)".into());
    }
    Ok(v)
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// Setting kind: da, binary-da, oda, analogy, two-sided or dt
    #[arg(long, value_parser = parse_kind)]
    pub setting: SettingKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Support points per domain (default 64, at most 512)
    #[arg(long)]
    pub support_size: Option<usize>,
    /// Size of every hypothesis class
    #[arg(long)]
    pub class_size: Option<usize>,
    /// Loss: abs, sq or 01 (01 only for binary-da)
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossKind>,
    /// Translation between the two domains' supports (default 0.5)
    #[arg(long)]
    pub shift: Option<f64>,
    /// Perturb the targets so no class member fits them exactly
    #[arg(long)]
    pub non_realizable: bool,
}

impl ScenarioArgs {
    pub fn config(&self) -> shiftbound::Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::new(self.setting, self.seed);
        if let Some(n) = self.support_size {
            cfg.support_size = n;
        }
        if let Some(n) = self.class_size {
            cfg = cfg.with_class_size(n);
        }
        if let Some(l) = self.loss {
            cfg.loss_kind = l;
        }
        if let Some(s) = self.shift {
            cfg.shift_magnitude = s;
        }
        cfg.realizable = !self.non_realizable;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightArgs {
    /// Weight of the discrepancy term ("inf" makes it a filter)
    #[arg(long = "w-disc", default_value = "1", value_parser = parse_weight)]
    #[serde(with = "weight")]
    pub w_disc: f64,
    /// Weight of the transfer (target identity) term
    #[arg(long = "w-tid", default_value = "1", value_parser = parse_weight)]
    #[serde(with = "weight")]
    pub w_tid: f64,
    /// Weight of the constancy term
    #[arg(long = "w-const", default_value = "1", value_parser = parse_weight)]
    #[serde(with = "weight")]
    pub w_const: f64,
    /// Weight of the invertibility term
    #[arg(long = "w-inv", default_value = "1", value_parser = parse_weight)]
    #[serde(with = "weight")]
    pub w_inv: f64,
}

impl WeightArgs {
    pub fn weights(&self) -> ObjectiveWeights {
        ObjectiveWeights {
            w_disc: self.w_disc,
            w_inv: self.w_inv,
            w_tid: self.w_tid,
            w_const: self.w_const,
        }
    }
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of scenarios; scenario i uses seed + i
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Include every candidate's objective in the result
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsArgs {
    #[arg(long, value_parser = parse_loss, default_value = "abs")]
    pub loss: LossKind,
    /// Probe triples for the triangle constant
    #[arg(long, default_value_t = 100_000)]
    pub probes: usize,
    /// Probe pairs per class member
    #[arg(long, default_value_t = 1_000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomsArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random instances
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckScenarioArgs {
    /// Scenario file written by `generate`
    #[arg(long)]
    pub file: PathBuf,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written next to an output file
    #[arg(long)]
    pub manifest: PathBuf,
}
