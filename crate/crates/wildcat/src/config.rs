//! Run configuration: a flat-sectioned TOML document.
//!
//! ```text
//! [model]                      [simulation]
//! alpha  = 0.5                 x0          = 1.0
//! r      = 0.02                r0          = 3.5     # optional
//! a      = 0.5                 n_paths     = 1000
//! lambda = 10.0                horizon     = 100.0
//! k      = 1.0                 base_seed   = 42
//!                              time_points = 200     # optional
//! [grid]
//! x_max  = 1.0                 [output]
//! x_step = 0.01   # optional   dir     = "out"       # optional
//! r_step = 0.01   # optional   formats = ["csv"]     # optional
//! r_max  = 4.5    # optional
//! ```
//!
//! Unknown keys are rejected; missing required keys are reported all at
//! once. Optional grid values default to the solver's parameter-aware
//! choices; the optional `r0` defaults to the midpoint of the consumption
//! region at `x0`. Configurations round-trip losslessly through
//! [`RunConfig::to_toml`] / [`parse_config`].

use serde::Serialize;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub x_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub x0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    pub n_paths: usize,
    pub horizon: f64,
    pub base_seed: u64,
    pub time_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<String>,
}

/// Parsed and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }

    /// Serializes back to the TOML schema accepted by [`parse_config`].
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }
}

struct SectionReader<'a> {
    name: &'static str,
    table: Option<&'a toml::Table>,
    known: Vec<&'static str>,
    problems: Problems,
}

#[derive(Default, Clone)]
struct Problems {
    missing: Vec<String>,
    bad: Vec<String>,
}

impl<'a> SectionReader<'a> {
    fn new(root: &'a toml::Table, name: &'static str, problems: Problems) -> Self {
        let table = match root.get(name) {
            Some(toml::Value::Table(t)) => Some(t),
            Some(_) => None,
            None => None,
        };
        SectionReader {
            name,
            table,
            known: Vec::new(),
            problems,
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a toml::Value> {
        self.known.push(key);
        self.table.and_then(|t| t.get(key))
    }

    fn f64_req(&mut self, key: &'static str) -> f64 {
        match self.raw(key).map(value_as_f64) {
            Some(Some(v)) => v,
            Some(None) => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected a number", self.name));
                f64::NAN
            }
            None => {
                self.problems.missing.push(format!("{}.{key}", self.name));
                f64::NAN
            }
        }
    }

    fn f64_opt(&mut self, key: &'static str) -> Option<f64> {
        match self.raw(key).map(value_as_f64) {
            Some(Some(v)) => Some(v),
            Some(None) => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected a number", self.name));
                None
            }
            None => None,
        }
    }

    fn u64_req(&mut self, key: &'static str) -> u64 {
        match self.raw(key).map(|v| v.as_integer()) {
            Some(Some(v)) if v >= 0 => v as u64,
            Some(_) => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected a nonnegative integer", self.name));
                0
            }
            None => {
                self.problems.missing.push(format!("{}.{key}", self.name));
                0
            }
        }
    }

    fn u64_opt(&mut self, key: &'static str) -> Option<u64> {
        match self.raw(key).map(|v| v.as_integer()) {
            Some(Some(v)) if v >= 0 => Some(v as u64),
            Some(_) => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected a nonnegative integer", self.name));
                None
            }
            None => None,
        }
    }

    fn string_opt(&mut self, key: &'static str) -> Option<String> {
        match self.raw(key).map(|v| v.as_str()) {
            Some(Some(v)) => Some(v.to_string()),
            Some(None) => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected a string", self.name));
                None
            }
            None => None,
        }
    }

    fn string_array_opt(&mut self, key: &'static str) -> Option<Vec<String>> {
        let raw = self.raw(key)?;
        match raw.as_array() {
            Some(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item.as_str() {
                        Some(s) => out.push(s.to_string()),
                        None => {
                            self.problems
                                .bad
                                .push(format!("{}.{key}: expected an array of strings", self.name));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            None => {
                self.problems
                    .bad
                    .push(format!("{}.{key}: expected an array of strings", self.name));
                None
            }
        }
    }

    fn finish(mut self) -> Problems {
        if let Some(t) = self.table {
            for key in t.keys() {
                if !self.known.contains(&key.as_str()) {
                    self.problems
                        .bad
                        .push(format!("{}.{key}: unknown key", self.name));
                }
            }
        }
        self.problems
    }
}

fn value_as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Parses and validates a configuration document.
///
/// Reports every missing required key and every unknown key in a single
/// error; model parameters are run through domain and admissibility
/// validation.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: toml::Table = text
        .parse()
        .map_err(|e| Error::Parse(format!("TOML syntax: {e}")))?;

    for key in root.keys() {
        if !["model", "grid", "simulation", "output"].contains(&key.as_str()) {
            return Err(Error::Parse(format!("unknown section [{key}]")));
        }
    }

    let mut problems = Problems::default();

    let mut sec = SectionReader::new(&root, "model", problems);
    let model = ModelParams {
        alpha: sec.f64_req("alpha"),
        r: sec.f64_req("r"),
        a: sec.f64_req("a"),
        lambda: sec.f64_req("lambda"),
        k: sec.f64_req("k"),
    };
    problems = sec.finish();

    let mut sec = SectionReader::new(&root, "grid", problems);
    let grid = GridConfig {
        x_max: sec.f64_req("x_max"),
        x_step: sec.f64_opt("x_step"),
        r_step: sec.f64_opt("r_step"),
        r_max: sec.f64_opt("r_max"),
    };
    problems = sec.finish();

    let mut sec = SectionReader::new(&root, "simulation", problems);
    let simulation = SimulationConfig {
        x0: sec.f64_req("x0"),
        r0: sec.f64_opt("r0"),
        n_paths: sec.u64_req("n_paths") as usize,
        horizon: sec.f64_req("horizon"),
        base_seed: sec.u64_req("base_seed"),
        time_points: sec.u64_opt("time_points").unwrap_or(200) as usize,
    };
    problems = sec.finish();

    let mut sec = SectionReader::new(&root, "output", problems);
    let output = OutputConfig {
        dir: sec.string_opt("dir").unwrap_or_else(|| "out".to_string()),
        formats: sec
            .string_array_opt("formats")
            .unwrap_or_else(|| vec!["csv".to_string()]),
    };
    problems = sec.finish();

    if !problems.missing.is_empty() || !problems.bad.is_empty() {
        let mut msgs = Vec::new();
        if !problems.missing.is_empty() {
            msgs.push(format!("missing required keys: {}", problems.missing.join(", ")));
        }
        msgs.extend(problems.bad);
        return Err(Error::Parse(msgs.join("; ")));
    }

    // semantic validation
    model.validate()?;
    let check = |ok: bool, msg: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Parse(msg.to_string()))
        }
    };
    check(grid.x_max > 0.0, "grid.x_max must be > 0")?;
    check(grid.x_step.is_none_or(|v| v > 0.0), "grid.x_step must be > 0")?;
    check(grid.r_step.is_none_or(|v| v > 0.0), "grid.r_step must be > 0")?;
    check(grid.r_max.is_none_or(|v| v > 0.0), "grid.r_max must be > 0")?;
    check(
        simulation.x0 >= 0.0 && simulation.x0 <= grid.x_max,
        "simulation.x0 must lie in [0, grid.x_max]",
    )?;
    check(
        simulation.r0.is_none_or(|v| v >= 0.0),
        "simulation.r0 must be >= 0",
    )?;
    check(simulation.horizon > 0.0, "simulation.horizon must be > 0")?;
    check(
        simulation.time_points >= 2,
        "simulation.time_points must be >= 2",
    )?;
    for fmt in &output.formats {
        check(fmt == "csv", "output.formats supports only \"csv\"")?;
    }

    Ok(RunConfig {
        model,
        grid,
        simulation,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SET_B: &str = r#"
[model]
alpha = 0.5
r = 0.02
a = 0.5
lambda = 10.0
k = 1.0

[grid]
x_max = 1.0

[simulation]
x0 = 1.0
n_paths = 1000
horizon = 100.0
base_seed = 42
"#;

    #[test]
    fn parses_a_minimal_document() {
        let cfg = parse_config(SET_B).unwrap();
        assert_eq!(cfg.model.lambda, 10.0);
        assert_eq!(cfg.simulation.time_points, 200);
        assert_eq!(cfg.output.dir, "out");
        assert_eq!(cfg.output.formats, vec!["csv".to_string()]);
        assert!(cfg.grid.x_step.is_none());
    }

    #[test]
    fn empty_file_lists_all_missing_keys() {
        let err = parse_config("").unwrap_err();
        let msg = err.to_string();
        for key in [
            "model.alpha",
            "model.r",
            "model.a",
            "model.lambda",
            "model.k",
            "grid.x_max",
            "simulation.x0",
            "simulation.n_paths",
            "simulation.horizon",
            "simulation.base_seed",
        ] {
            assert!(msg.contains(key), "missing {key} in: {msg}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let doc = format!("{SET_B}\n[model2]\nz = 1\n");
        assert!(parse_config(&doc).is_err());
        let doc = SET_B.replace("k = 1.0", "k = 1.0\nkk = 2.0");
        let msg = parse_config(&doc).unwrap_err().to_string();
        assert!(msg.contains("model.kk"), "{msg}");
    }

    #[test]
    fn admissibility_violations_surface() {
        let doc = SET_B.replace("k = 1.0", "k = 1e9");
        assert!(matches!(
            parse_config(&doc),
            Err(Error::Admissibility { .. })
        ));
    }

    #[test]
    fn x0_outside_grid_is_rejected() {
        let doc = SET_B.replace("x0 = 1.0", "x0 = 2.0");
        assert!(matches!(parse_config(&doc), Err(Error::Parse(_))));
    }

    #[test]
    fn round_trips_losslessly() {
        let cfg = parse_config(SET_B).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    proptest! {
        #[test]
        fn round_trip_preserves_floats(
            alpha in 0.01f64..0.99,
            horizon in 0.1f64..1e6,
            x_step in prop::option::of(1e-6f64..0.1),
        ) {
            let mut cfg = parse_config(SET_B).unwrap();
            cfg.model.alpha = alpha;
            cfg.simulation.horizon = horizon;
            cfg.grid.x_step = x_step;
            let again = parse_config(&cfg.to_toml()).unwrap();
            prop_assert_eq!(cfg, again);
        }
    }
}
