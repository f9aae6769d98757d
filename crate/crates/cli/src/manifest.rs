use serde::{Deserialize, Serialize};

/// Record of one invocation, written next to its output. Replaying `argv`
/// with the same binary version reproduces the output exactly; wall time is
/// the only field that varies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    /// Parsed subcommand arguments, defaults filled in.
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub wall_time_seconds: f64,
}
