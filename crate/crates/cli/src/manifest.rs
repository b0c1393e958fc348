use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shiftbound::{ObjectiveWeights, ScenarioConfig};

use crate::args::Command;

/// Everything needed to reproduce a run's output file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub invocation: Command,
    pub config: Option<ScenarioConfig>,
    pub weights: Option<ObjectiveWeights>,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn seed_of(cmd: &Command) -> Option<u64> {
    match cmd {
        Command::Verify(a) => Some(a.scenario.seed),
        Command::Train(a) => Some(a.scenario.seed),
        Command::Generate(a) => Some(a.scenario.seed),
        Command::Constants(a) => Some(a.seed),
        Command::Axioms(a) => Some(a.seed),
        Command::CheckScenario(_) | Command::Replay(_) => None,
    }
}
