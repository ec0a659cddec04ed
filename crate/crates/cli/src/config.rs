//! Run configuration: defaults, then a flat `key = value` file, then flags.
//!
//! Recognised keys:
//!
//! | key          | value                                   | default       |
//! |--------------|-----------------------------------------|---------------|
//! | `gamma`      | comma-separated load magnitudes, ≥ 0     | `0.2`         |
//! | `levels`     | comma-separated ascending levels         | `3`           |
//! | `mu`         | shear modulus                            | `1`           |
//! | `lambda`     | Lamé parameter or `inf`                  | `inf`         |
//! | `load_steps` | Newton load increments                   | `4`           |
//! | `mode`       | `naive` or `compatible`                  | `compatible`  |
//! | `variant`    | `deformed` or `reference` test spaces    | `deformed`    |
//! | `out`        | output directory                         | `out`         |
//! | `strict`     | `true` or `false`                        | `false`       |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::path::PathBuf;

use hyperequil::equilibration::TestSpaceVariant;
use hyperequil::{Material, ProjectionMode};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub gamma: Vec<f64>,
    pub levels: Vec<usize>,
    pub mu: f64,
    pub lambda: Option<f64>,
    pub load_steps: usize,
    pub mode: ProjectionMode,
    pub variant: TestSpaceVariant,
    pub out: PathBuf,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gamma: vec![0.2],
            levels: vec![3],
            mu: 1.0,
            lambda: None,
            load_steps: 4,
            mode: ProjectionMode::Compatible,
            variant: TestSpaceVariant::Deformed,
            out: PathBuf::from("out"),
            strict: false,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| usage(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "gamma" => self.gamma = parse_list(key, value)?,
            "levels" => self.levels = parse_list(key, value)?,
            "mu" => self.mu = parse_num(key, value)?,
            "lambda" => self.lambda = if value == "inf" { None } else { Some(parse_num(key, value)?) },
            "load_steps" => self.load_steps = parse_num(key, value)?,
            "mode" => self.mode = value.parse().map_err(|_| usage(format!("mode: expected naive or compatible, got {value:?}")))?,
            "variant" => {
                self.variant = match value {
                    "deformed" => TestSpaceVariant::Deformed,
                    "reference" => TestSpaceVariant::Reference,
                    _ => return Err(usage(format!("variant: expected deformed or reference, got {value:?}"))),
                }
            }
            "out" => self.out = PathBuf::from(value),
            "strict" => self.strict = parse_num(key, value)?,
            other => return Err(usage(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.gamma.is_empty() {
            return Err(usage("gamma: at least one value is required"));
        }
        if let Some(g) = self.gamma.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(usage(format!("gamma must be finite and non-negative, got {g}")));
        }
        if self.levels.is_empty() {
            return Err(usage("levels: at least one level is required"));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("levels must be strictly ascending"));
        }
        if self.load_steps == 0 {
            return Err(usage("load_steps must be positive"));
        }
        self.material()?;
        Ok(())
    }

    pub fn material(&self) -> Result<Material, CliError> {
        Material::new(self.mu, self.lambda).map_err(|e| usage(e.to_string()))
    }
}

/// File stem shared by all artifacts of one run.
pub fn run_tag(level: usize, gamma: f64) -> String {
    format!("T{level}_g{gamma}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_file("# comment\ngamma = 0.05, 0.2,0.5\nlevels=3,5\nlambda = 100\n\nstrict = true\n").unwrap();
        assert_eq!(c.gamma, vec![0.05, 0.2, 0.5]);
        assert_eq!(c.levels, vec![3, 5]);
        assert_eq!(c.lambda, Some(100.0));
        assert!(c.strict);
        c.set("lambda", "inf").unwrap();
        assert_eq!(c.lambda, None);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(c.set("levels", "3,x"), Err(CliError::Usage(_))));
        assert!(matches!(c.set("colour", "blue"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_file("gamma 0.2"), Err(CliError::Usage(_))));
        c.set("levels", "").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        c.set("levels", "4,3").unwrap();
        assert!(c.validate().is_err());
        c.set("levels", "3").unwrap();
        c.set("gamma", "-0.1").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn tags_round_trip_gamma() {
        assert_eq!(run_tag(3, 0.2), "T3_g0.2");
        assert_eq!(run_tag(5, 0.05), "T5_g0.05");
    }
}
