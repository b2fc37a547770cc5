//! Command implementations behind the `banachfit` binary: configuration
//! loading with flag overrides, report persistence, plain-text tables, and
//! the built-in reference-example checker.

use banachfit::config::SolveConfig;
use banachfit::error::{ConfigError, SolverError};
use banachfit::network;
use banachfit::pipeline;
use banachfit::reference::{self, ReferenceOutcome};
use banachfit::report::{self, SolutionReport};
use banachfit::signs::AdmissibilityVerdict;
use banachfit::supnorm::{self, Combination};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit codes: 0 success, 1 reference mismatch, 2 validation error,
/// 3 solver failure, 4 ill-conditioned Gram.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CONDITIONING: i32 = 4;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub iters: Option<usize>,
    pub tol: Option<f64>,
    pub lambda0: Option<f64>,
    pub include_uncertified_signs: bool,
}

impl Overrides {
    fn apply(&self, config: &mut SolveConfig) {
        if let Some(seed) = self.seed {
            config.search.seed = seed;
        }
        if let Some(starts) = self.starts {
            config.search.starts = starts;
        }
        if let Some(iters) = self.iters {
            config.search.iters = iters;
        }
        if let Some(tol) = self.tol {
            config.search.tol = tol;
        }
        if let Some(lambda0) = self.lambda0 {
            config.regularization.lambda0 = lambda0;
        }
        if self.include_uncertified_signs {
            config.regularization.include_uncertified_signs = true;
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
    }
}

/// All command failures, tagged with the exit code they map to.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Solver(String),
    Conditioning(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Conditioning(_) => EXIT_CONDITIONING,
            CliError::Io(_) => EXIT_VALIDATION,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m)
            | CliError::Solver(m)
            | CliError::Conditioning(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Solver(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::IllConditioned { .. } | SolverError::SingularGram { .. } => {
                CliError::Conditioning(e.to_string())
            }
            SolverError::Signs(inner) => CliError::Validation(inner.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

fn load(config_path: &Path, overrides: &Overrides) -> Result<(SolveConfig, PathBuf), CliError> {
    let mut config = SolveConfig::load(config_path)?;
    overrides.apply(&mut config);
    let dir = config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    Ok((config, dir))
}

fn resolve_out(config: &SolveConfig, dir: &Path, default_name: &str) -> PathBuf {
    match &config.output {
        Some(path) if path.is_absolute() => path.clone(),
        Some(path) => dir.join(path),
        None => dir.join(default_name),
    }
}

/// `solve`: run the full pipeline and persist the report.
pub fn run_solve(
    config_path: &Path,
    overrides: &Overrides,
) -> Result<(SolutionReport, PathBuf), CliError> {
    let (config, dir) = load(config_path, overrides)?;
    let ctx = config.kernel_context()?;
    let dataset = config.dataset(&dir)?;
    let opts = config.pipeline_options()?;

    let started = Instant::now();
    let run = pipeline::run(&ctx, &dataset, &opts)?;
    let wall_ms = started.elapsed().as_millis() as u64;

    let solution = SolutionReport::build(report::config_echo(&ctx, &opts), &run, wall_ms);
    let out = resolve_out(&config, &dir, "report.json");
    std::fs::write(&out, solution.to_json())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
    Ok((solution, out))
}

/// One row of the `admissible` table.
pub struct AdmissibleRow {
    pub sign: String,
    pub verdict: String,
    pub detail: String,
}

/// Persisted form of one admissible-table entry.
#[derive(serde::Serialize)]
struct AdmissibleEntry {
    sign: Vec<i8>,
    verdict: String,
    certificate: Option<String>,
    witness: Option<Vec<f64>>,
    value: Option<f64>,
    bracket: Option<[f64; 2]>,
}

/// `admissible`: enumerate sign vectors over the whole dataset and persist
/// the verdict table.
pub fn run_admissible(
    config_path: &Path,
    overrides: &Overrides,
) -> Result<(Vec<AdmissibleRow>, PathBuf), CliError> {
    let (config, dir) = load(config_path, overrides)?;
    let ctx = config.kernel_context()?;
    let dataset = config.dataset(&dir)?;
    let opts = config.pipeline_options()?;

    let table = banachfit::signs::enumerate_admissible(
        &ctx,
        dataset.inputs(),
        0,
        &opts.signs,
        &opts.search,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let mut rows = Vec::with_capacity(table.len());
    let mut entries = Vec::with_capacity(table.len());
    for (sign, verdict) in &table {
        let mut entry = AdmissibleEntry {
            sign: sign.entries().to_vec(),
            verdict: verdict.kind().to_string(),
            certificate: None,
            witness: None,
            value: None,
            bracket: None,
        };
        let detail = match verdict {
            AdmissibilityVerdict::CertifiedAdmissible(cert) => {
                entry.certificate = Some(cert.name().to_string());
                cert.name().to_string()
            }
            AdmissibilityVerdict::CertifiedInadmissible { witness, value } => {
                entry.witness = Some(network::pack(witness));
                entry.value = Some(*value);
                format!("|g| = {value:.12}")
            }
            AdmissibilityVerdict::Uncertified(est) => {
                entry.bracket = Some([est.lower, est.upper]);
                format!("bracket [{:.12}, {:.12}]", est.lower, est.upper)
            }
        };
        rows.push(AdmissibleRow {
            sign: sign.to_string(),
            verdict: verdict.kind().to_string(),
            detail,
        });
        entries.push(entry);
    }

    let out = resolve_out(&config, &dir, "admissible.json");
    let mut json = serde_json::to_string_pretty(&entries)
        .map_err(|e| CliError::Io(format!("cannot serialize table: {e}")))?;
    json.push('\n');
    std::fs::write(&out, json)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
    Ok((rows, out))
}

/// Parsed `coef:index` combination specification (1-based dataset indices).
pub fn parse_combination_spec(spec: &str, dataset_len: usize) -> Result<Vec<(f64, usize)>, CliError> {
    let mut pairs = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (coef, index) = part.split_once(':').ok_or_else(|| {
            CliError::Validation(format!(
                "bad combination term `{part}`: expected coef:index (e.g. 1:1,-1:2)"
            ))
        })?;
        let coef: f64 = coef.trim().parse().map_err(|_| {
            CliError::Validation(format!("bad coefficient `{coef}` in combination spec"))
        })?;
        let index: usize = index.trim().parse().map_err(|_| {
            CliError::Validation(format!("bad index `{index}` in combination spec"))
        })?;
        if index == 0 || index > dataset_len {
            return Err(CliError::Validation(format!(
                "combination index {index} out of range 1..={dataset_len}"
            )));
        }
        pairs.push((coef, index - 1));
    }
    Ok(pairs)
}

/// Result of the `supnorm` command.
pub struct SupnormOutcome {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
    pub certified: bool,
}

/// `supnorm`: bracket one combination of kernel sections over the dataset.
pub fn run_supnorm(
    config_path: &Path,
    spec: &str,
    overrides: &Overrides,
) -> Result<SupnormOutcome, CliError> {
    let (config, dir) = load(config_path, overrides)?;
    let ctx = config.kernel_context()?;
    let dataset = config.dataset(&dir)?;
    let pairs = parse_combination_spec(spec, dataset.len())?;
    let comb = Combination::new(
        pairs
            .into_iter()
            .map(|(coef, i)| (coef, dataset.inputs()[i].clone()))
            .collect(),
        0,
    );
    let est = supnorm::estimate_sup(&ctx, &comb, &config.search_config());
    Ok(SupnormOutcome {
        lower: est.lower,
        upper: est.upper,
        witness: network::pack(&est.witness),
        certified: est.is_certified(),
    })
}

/// `reproduce-paper-example`: run the embedded reference scenarios.
pub fn run_reproduce(overrides: &Overrides) -> ReferenceOutcome {
    let mut search = banachfit::supnorm::SearchConfig::default();
    if let Some(seed) = overrides.seed {
        search.seed = seed;
    }
    if let Some(starts) = overrides.starts {
        search.starts = starts;
    }
    if let Some(iters) = overrides.iters {
        search.iters = iters;
    }
    if let Some(tol) = overrides.tol {
        search.tolerance = tol;
    }
    reference::run_reference_checks(&search)
}

/// True when table output may use ANSI colors.
pub fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none()
}

/// Wrap `text` in an ANSI color unless NO_COLOR is set.
pub fn paint(text: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use banachfit::error::{SignsError, SolverError};

    #[test]
    fn exit_codes_cover_the_contract() {
        let validation: CliError = ConfigError::DatasetSource.into();
        assert_eq!(validation.exit_code(), EXIT_VALIDATION);
        let cap: CliError = SolverError::Signs(SignsError::CapExceeded {
            m: 13,
            cost: 1_594_323,
            cap: 12,
        })
        .into();
        assert_eq!(cap.exit_code(), EXIT_VALIDATION);
        let no_anchors: CliError = SolverError::NoAnchors {
            details: "point 0: leak".into(),
        }
        .into();
        assert_eq!(no_anchors.exit_code(), EXIT_SOLVER);
        let conditioning: CliError = SolverError::IllConditioned {
            cond: 1e14,
            limit: 1e12,
        }
        .into();
        assert_eq!(conditioning.exit_code(), EXIT_CONDITIONING);
        let singular: CliError = SolverError::SingularGram { row: 1 }.into();
        assert_eq!(singular.exit_code(), EXIT_CONDITIONING);
    }

    #[test]
    fn combination_spec_parses_pairs() {
        let pairs = parse_combination_spec("1:1, -1:2,0.5:3", 3).unwrap();
        assert_eq!(pairs, vec![(1.0, 0), (-1.0, 1), (0.5, 2)]);
        assert!(parse_combination_spec("1:4", 3).is_err());
        assert!(parse_combination_spec("1@2", 3).is_err());
        assert!(parse_combination_spec("x:1", 3).is_err());
    }
}
