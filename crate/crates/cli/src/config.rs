//! Experiment configuration files.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use ucp_lab::anderson::{ModelSpec, WegnerSpec};
use ucp_lab::constants::{CarlemanConfig, ConstantsInput};
use ucp_lab::geometry::{BoundaryCondition, DeloneParams};
use ucp_lab::operator::{EigOptions, PotentialSpec};
use ucp_lab::ucp::UcpRunSpec;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ucp,
    Wegner,
    Lift,
    Uncertainty,
    Ssf,
    Constants,
    GenDelone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("ucp-lab-out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir() }
    }
}

/// Top level of a config file. `params` is checked against the schema of
/// the selected experiment once the kind is known.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerParams {
    pub model: ModelSpec,
    /// The run's `seed` comes from the top level.
    pub wegner: WegnerSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftParams {
    pub d: usize,
    pub l: usize,
    pub bc: BoundaryCondition,
    pub nodes_per_unit: usize,
    pub model: ModelSpec,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    /// Relative slack on the lifting and compression bounds.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Window fraction for the compression check.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub eig: EigOptions,
}

fn default_t_grid() -> Vec<f64> {
    (0..11).map(|i| i as f64 / 10.0).collect()
}

fn default_tol() -> f64 {
    0.05
}

fn default_q() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SsfSource {
    /// Random symmetric `H₁` with entries in `[−½, ½)` and a random
    /// positive semi-definite `u` of the given rank.
    RandomDense { n: usize, rank: usize, n_pairs: usize },
    /// Grid operator `−Δ + V₀` and `u` a single bump of height `c` on `B(center, radius)`.
    Grid {
        d: usize,
        l: usize,
        bc: BoundaryCondition,
        nodes_per_unit: usize,
        v0: PotentialSpec,
        center: Vec<f64>,
        radius: f64,
        c: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsfParams {
    pub source: SsfSource,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    /// Centers of the shifted switch functions in the trace identity.
    #[serde(default = "default_centers")]
    pub centers: Vec<f64>,
}

fn default_eps() -> f64 {
    0.1
}

fn default_centers() -> Vec<f64> {
    (-4..=4).map(|k| k as f64 * 0.5).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsParams {
    #[serde(default)]
    pub input: ConstantsInput,
    #[serde(default)]
    pub config: CarlemanConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDeloneParams {
    pub delone: DeloneParams,
    pub side: f64,
    pub bc: BoundaryCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Ucp(UcpRunSpec),
    Wegner(WegnerParams),
    Lift(LiftParams),
    Ssf(SsfParams),
    Constants(ConstantsParams),
    GenDelone(GenDeloneParams),
}

/// Fully resolved configuration, written next to every run.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: OutputConfig,
    pub params: Params,
}

fn typed<T: DeserializeOwned>(v: Value, what: &str) -> Result<T, Failure> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = match e.path().to_string() {
            p if p == "." => "params".to_string(),
            p => format!("params.{p}"),
        };
        Failure::Config(format!("{path} ({what}): {}", e.inner()))
    })
}

impl ExperimentConfig {
    /// Parses `text`, applies `key=value` overrides and validates the params
    /// block of the chosen experiment.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, Failure> {
        // Parsed once up front so that syntax errors carry line and column.
        let mut doc: Value = serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let raw: RawConfig = serde_json::from_value(doc).map_err(|e| Failure::Config(format!("config: {e}")))?;
        if raw.params.get("seed").is_some() || raw.params.pointer("/wegner/seed").is_some() {
            return Err(Failure::Config("params: `seed` belongs at the top level of the config".into()));
        }
        let params = match raw.experiment {
            ExperimentKind::Ucp => {
                let mut spec: UcpRunSpec = typed(raw.params, "ucp")?;
                spec.seed = raw.seed;
                Params::Ucp(spec)
            }
            ExperimentKind::Wegner => {
                let mut p = raw.params;
                if let Some(w) = p.get_mut("wegner").and_then(Value::as_object_mut) {
                    w.insert("seed".into(), Value::from(raw.seed));
                }
                Params::Wegner(typed(p, "wegner")?)
            }
            ExperimentKind::Lift | ExperimentKind::Uncertainty => Params::Lift(typed(raw.params, "lift")?),
            ExperimentKind::Ssf => Params::Ssf(typed(raw.params, "ssf")?),
            ExperimentKind::Constants => Params::Constants(typed(raw.params, "constants")?),
            ExperimentKind::GenDelone => Params::GenDelone(typed(raw.params, "gen-delone")?),
        };
        Ok(ExperimentConfig {
            experiment: raw.experiment,
            seed: raw.seed,
            output: raw.output,
            params,
        })
    }
}

/// `a.b.c=value`; the value is read as JSON and falls back to a string.
fn apply_override(doc: &mut Value, spec: &str) -> Result<(), Failure> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Config(format!("override `{spec}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Failure::Config(format!("override `{path}`: `{key}` is not inside an object")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const UCP: &str = r#"{
        "experiment": "ucp",
        "seed": 3,
        "params": {
            "d": 1, "l_list": [5], "bc": "periodic", "nodes_per_unit": 20, "n_eigs": 2,
            "delta": 0.3, "v0": {"kind": "zero"}, "arrangement": {"kind": "lattice"}
        }
    }"#;

    #[test]
    fn parses_and_injects_seed() {
        let c = ExperimentConfig::parse(UCP, &[]).unwrap();
        match c.params {
            Params::Ucp(s) => assert_eq!(s.seed, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_nested_fields() {
        let c = ExperimentConfig::parse(UCP, &["params.l_list=[3,7]".into(), "seed=9".into()]).unwrap();
        assert_eq!(c.seed, 9);
        match c.params {
            Params::Ucp(s) => assert_eq!(s.l_list, vec![3, 7]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_seed_is_named() {
        let text = UCP.replace("\"seed\": 3,", "");
        let Err(Failure::Config(msg)) = ExperimentConfig::parse(&text, &[]) else { panic!() };
        assert!(msg.contains("seed"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = UCP.replace("\"n_eigs\": 2", "\"n_eigs\": 2, \"bogus\": 1");
        let Err(Failure::Config(msg)) = ExperimentConfig::parse(&text, &[]) else { panic!() };
        assert!(msg.contains("bogus"), "{msg}");
        assert!(ExperimentConfig::parse(UCP, &["colour=1".into()]).is_err());
    }

    #[test]
    fn bad_override_syntax() {
        assert!(matches!(ExperimentConfig::parse(UCP, &["seed".into()]), Err(Failure::Config(_))));
    }
}
