//! Solver configuration files (TOML) and dataset files (headed CSV).
//!
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default. Datasets come inline or from a comma-separated file with header
//! `x1..xs,y1..yt`, '.' decimal, no locale dependence.

use crate::error::ConfigError;
use crate::kernel::{DecayWeight, KernelContext};
use crate::network::{Activation, Architecture};
use crate::pipeline::PipelineOptions;
use crate::regularizer::RegConfig;
use crate::signs::SignOptions;
use crate::solver::Dataset;
use crate::supnorm::SearchConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Top-level solver configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub architecture: ArchitectureSection,
    /// Defaults to depth + 1, the smallest certifiable exponent.
    pub decay_exponent: Option<f64>,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub regularization: RegSection,
    pub dataset: DatasetSection,
    /// Report destination; defaults to `report.json` next to the config.
    pub output: Option<PathBuf>,
    /// Rescaled-witness convention for admissibility (see signs module).
    #[serde(default = "default_true")]
    pub scaled_witnesses: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSection {
    pub layers: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub output_activation_applied: bool,
}

fn default_activation() -> Activation {
    Activation::Relu
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_tail_margin")]
    pub tail_margin: f64,
}

fn default_starts() -> usize {
    256
}
fn default_iters() -> usize {
    400
}
fn default_tol() -> f64 {
    1e-9
}
fn default_tail_margin() -> f64 {
    1e-6
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: default_starts(),
            iters: default_iters(),
            tol: default_tol(),
            tail_margin: default_tail_margin(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegSection {
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default)]
    pub include_uncertified_signs: bool,
}

fn default_lambda0() -> f64 {
    0.1
}

impl Default for RegSection {
    fn default() -> Self {
        Self {
            lambda0: default_lambda0(),
            include_uncertified_signs: false,
        }
    }
}

/// Either a path to a CSV file or inline rows of s + t numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
    pub inline: Option<Vec<Vec<f64>>>,
}

impl SolveConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: SolveConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_str_validated(text: &str) -> Result<Self, ConfigError> {
        let config: SolveConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.architecture.layers.len() < 2 {
            return Err(ConfigError::Invalid {
                field: "architecture.layers",
                reason: "need at least input and output widths".into(),
            });
        }
        if self.architecture.layers.contains(&0) {
            return Err(ConfigError::Invalid {
                field: "architecture.layers",
                reason: "widths must be positive".into(),
            });
        }
        if let Some(p) = self.decay_exponent {
            if p <= 0.0 {
                return Err(ConfigError::Invalid {
                    field: "decay_exponent",
                    reason: format!("must be positive, got {p}"),
                });
            }
        }
        if self.search.starts == 0 || self.search.iters == 0 {
            return Err(ConfigError::Invalid {
                field: "search",
                reason: "starts and iters must be positive".into(),
            });
        }
        if self.search.tol <= 0.0 || self.search.tail_margin <= 0.0 {
            return Err(ConfigError::Invalid {
                field: "search",
                reason: "tol and tail_margin must be positive".into(),
            });
        }
        if self.regularization.lambda0 <= 0.0 {
            return Err(ConfigError::Invalid {
                field: "regularization.lambda0",
                reason: format!("must be positive, got {}", self.regularization.lambda0),
            });
        }
        match (&self.dataset.path, &self.dataset.inline) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(ConfigError::DatasetSource),
        }
    }

    /// Input and output dimensions implied by the architecture.
    pub fn dims(&self) -> (usize, usize) {
        (
            self.architecture.layers[0],
            *self.architecture.layers.last().unwrap(),
        )
    }

    pub fn kernel_context(&self) -> Result<KernelContext, ConfigError> {
        let arch = Architecture::new(
            self.architecture.layers.clone(),
            self.architecture.activation,
        )?
        .with_output_activation(self.architecture.output_activation_applied);
        let decay = match self.decay_exponent {
            Some(p) => DecayWeight::new(p)?,
            None => DecayWeight::for_depth(arch.depth()),
        };
        Ok(KernelContext::new(arch, decay))
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            seed: self.search.seed,
            starts: self.search.starts,
            iters: self.search.iters,
            tail_margin: self.search.tail_margin,
            tolerance: self.search.tol,
        }
    }

    pub fn pipeline_options(&self) -> Result<PipelineOptions, ConfigError> {
        Ok(PipelineOptions {
            search: self.search_config(),
            signs: SignOptions {
                scaled_witnesses: self.scaled_witnesses,
                ..SignOptions::default()
            },
            reg: RegConfig::new(self.regularization.lambda0).map_err(|e| {
                ConfigError::Invalid {
                    field: "regularization.lambda0",
                    reason: e.to_string(),
                }
            })?,
            include_uncertified_signs: self.regularization.include_uncertified_signs,
        })
    }

    /// Load the dataset, from file or inline rows, validating dimensions
    /// against the architecture.
    pub fn dataset(&self, config_dir: &Path) -> Result<Dataset, ConfigError> {
        let (s, t) = self.dims();
        let rows: Vec<Vec<f64>> = if let Some(rel) = &self.dataset.path {
            let path = if rel.is_absolute() {
                rel.clone()
            } else {
                config_dir.join(rel)
            };
            read_dataset_csv(&path, s, t)?
        } else {
            let inline = self.dataset.inline.as_ref().ok_or(ConfigError::DatasetSource)?;
            for (i, row) in inline.iter().enumerate() {
                if row.len() != s + t {
                    return Err(ConfigError::RaggedRow {
                        row: i + 1,
                        expected: s + t,
                        got: row.len(),
                    });
                }
            }
            inline.clone()
        };
        let points = rows
            .into_iter()
            .map(|row| {
                let (x, y) = row.split_at(s);
                (x.to_vec(), y.to_vec())
            })
            .collect();
        Ok(Dataset::new(points)?)
    }
}

/// Read a dataset CSV with the exact header `x1..xs,y1..yt`.
pub fn read_dataset_csv(path: &Path, s: usize, t: usize) -> Result<Vec<Vec<f64>>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let expected_header: Vec<String> = (1..=s)
        .map(|i| format!("x{i}"))
        .chain((1..=t).map(|i| format!("y{i}")))
        .collect();
    let header = reader.headers()?.clone();
    let got: Vec<String> = header.iter().map(str::to_string).collect();
    if got != expected_header {
        return Err(ConfigError::Header {
            expected: expected_header.join(","),
            got: got.join(","),
        });
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        if record.len() != s + t {
            return Err(ConfigError::RaggedRow {
                row: row_no,
                expected: s + t,
                got: record.len(),
            });
        }
        let mut row = Vec::with_capacity(s + t);
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| ConfigError::BadNumber {
                row: row_no,
                column: col + 1,
                text: field.to_string(),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[architecture]
layers = [2, 2, 1]

[dataset]
inline = [[1.0, -1.0, 2.0], [-1.0, 0.0, -3.0], [0.0, 1.0, 0.5]]
"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = SolveConfig::from_str_validated(MINIMAL).unwrap();
        assert_eq!(cfg.search.starts, 256);
        assert_eq!(cfg.regularization.lambda0, 0.1);
        assert!(cfg.scaled_witnesses);
        let ctx = cfg.kernel_context().unwrap();
        assert_eq!(ctx.decay().exponent(), 3.0);
        let ds = cfg.dataset(Path::new(".")).unwrap();
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(SolveConfig::from_str_validated(&text).is_err());
    }

    #[test]
    fn dataset_needs_exactly_one_source() {
        let text = r#"
[architecture]
layers = [2, 2, 1]

[dataset]
"#;
        assert!(matches!(
            SolveConfig::from_str_validated(text),
            Err(ConfigError::DatasetSource)
        ));
    }

    #[test]
    fn ragged_inline_row_is_named() {
        let text = r#"
[architecture]
layers = [2, 2, 1]

[dataset]
inline = [[1.0, -1.0, 2.0], [0.5, 1.0]]
"#;
        let cfg = SolveConfig::from_str_validated(text).unwrap();
        match cfg.dataset(Path::new(".")) {
            Err(ConfigError::RaggedRow { row: 2, .. }) => {}
            other => panic!("expected ragged row 2, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("d.csv");
        std::fs::write(&good, "x1,x2,y1\n1.0,-1.0,2.0\n-1.0,0.0,-3.0\n").unwrap();
        let rows = read_dataset_csv(&good, 2, 1).unwrap();
        assert_eq!(rows, vec![vec![1.0, -1.0, 2.0], vec![-1.0, 0.0, -3.0]]);

        let bad_header = dir.path().join("h.csv");
        std::fs::write(&bad_header, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(
            read_dataset_csv(&bad_header, 2, 1),
            Err(ConfigError::Header { .. })
        ));

        let ragged = dir.path().join("r.csv");
        std::fs::write(&ragged, "x1,x2,y1\n1.0,-1.0,2.0\n0.5,1.0\n").unwrap();
        assert!(matches!(
            read_dataset_csv(&ragged, 2, 1),
            Err(ConfigError::RaggedRow { row: 2, .. })
        ));

        let alpha = dir.path().join("n.csv");
        std::fs::write(&alpha, "x1,x2,y1\n1.0,oops,2.0\n").unwrap();
        assert!(matches!(
            read_dataset_csv(&alpha, 2, 1),
            Err(ConfigError::BadNumber { row: 1, column: 2, .. })
        ));
    }
}
