//! Command-line flags.

use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Map, Value};

use crate::config::{CommandName, Params};
use crate::error::{CliError, Result};

/// Entropy invariants, uniqueness criteria and sofic approximations for
/// shift-invariant Gibbs structures over free groups.
///
/// Every option may also come from a JSON file given with `--config`; flags
/// take precedence over the file.
#[derive(Debug, Parser)]
#[command(name = "gibbsent", version)]
pub struct Cli {
    /// Command to run; may instead be named by the config file.
    #[arg(value_enum)]
    pub command: Option<CommandName>,

    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master seed; mandatory for stochastic commands.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file: `.csv` for a table (with a `.config.json` sidecar), anything else for JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Worker threads (results do not depend on this).
    #[arg(long, env = "GIBBSENT_THREADS")]
    pub threads: Option<usize>,

    /// Report entropies in bits instead of nats.
    #[arg(long)]
    pub bits: bool,

    /// Ising model, e.g. `--ising beta=0.3 m=2`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub ising: Option<Vec<String>>,

    /// Shift-invariant potential file.
    #[arg(long, value_name = "FILE")]
    pub potential: Option<PathBuf>,

    /// Tree Markov specification file.
    #[arg(long, value_name = "FILE")]
    pub markov: Option<PathBuf>,

    /// Finite Gibbs structure file.
    #[arg(long, value_name = "FILE")]
    pub structure: Option<PathBuf>,

    /// Sofic map file (sofic-entropy).
    #[arg(long, value_name = "FILE")]
    pub sofic: Option<PathBuf>,

    /// Restrict a shift model to the ball of this radius.
    #[arg(long)]
    pub ball: Option<usize>,

    /// Skip the slow self-checks.
    #[arg(long)]
    pub quick: bool,

    #[command(flatten)]
    pub params: Params,
}

fn parse_ising(items: &[String]) -> Result<Value> {
    let mut obj = Map::new();
    for item in items.iter().flat_map(|s| s.split_whitespace()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--ising expects key=value, got `{item}`")))?;
        let bad = || CliError::Usage(format!("--ising: bad value for `{key}`"));
        let v = match key {
            "beta" => json!(value.parse::<f64>().map_err(|_| bad())?),
            "m" => json!(value.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(CliError::Usage(format!("--ising accepts beta and m, not `{key}`"))),
        };
        obj.insert(key.to_string(), v);
    }
    Ok(Value::Object(obj))
}

impl Cli {
    /// The flag layer of the configuration, with unset options omitted.
    pub fn to_flags(&self) -> Result<Value> {
        let mut model = Map::new();
        if let Some(items) = &self.ising {
            model.insert("ising".into(), parse_ising(items)?);
        }
        let paths = [
            ("potential", &self.potential),
            ("markov", &self.markov),
            ("structure", &self.structure),
            ("sofic", &self.sofic),
        ];
        for (key, path) in paths {
            if let Some(p) = path {
                model.insert(key.into(), json!(p));
            }
        }
        if let Some(r) = self.ball {
            model.insert("ball".into(), json!(r));
        }
        let mut params = serde_json::to_value(&self.params).expect("params serialize");
        if self.quick {
            params["quick"] = json!(true);
        }
        let mut flags = json!({
            "command": self.command,
            "seed": self.seed,
            "out": self.out,
            "threads": self.threads,
            "model": model,
            "params": params,
        });
        if self.bits {
            flags["bits"] = json!(true);
        }
        Ok(flags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_flag_accepts_split_and_joined_forms() {
        let a = Cli::try_parse_from(["gibbsent", "f-invariant", "--ising", "beta=0.1", "m=3"]).unwrap();
        let b = Cli::try_parse_from(["gibbsent", "f-invariant", "--ising", "beta=0.1 m=3"]).unwrap();
        assert_eq!(a.to_flags().unwrap(), b.to_flags().unwrap());
        assert_eq!(a.to_flags().unwrap()["model"]["ising"], json!({"beta": 0.1, "m": 3}));
    }

    #[test]
    fn unset_flags_are_omitted() {
        let cli = Cli::try_parse_from(["gibbsent", "uniqueness", "--ising", "beta=0.2", "--tol", "1e-8"]).unwrap();
        let flags = cli.to_flags().unwrap();
        assert_eq!(flags["params"], json!({"tol": 1e-8}));
        assert!(flags.get("bits").is_none());
    }

    #[test]
    fn bad_ising_keys_are_usage_errors() {
        let cli = Cli::try_parse_from(["gibbsent", "uniqueness", "--ising", "temp=1"]).unwrap();
        assert!(matches!(cli.to_flags(), Err(CliError::Usage(_))));
    }
}
