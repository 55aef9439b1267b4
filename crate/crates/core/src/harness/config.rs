use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::asymptotics::Side;
use crate::montecarlo::{EnsembleKind, EnsembleSpec};
use crate::spectra::{SpectralFamily, SpectralMeasure};

/// Version written to and required from every config file.
pub const SCHEMA_VERSION: u32 = 1;

/// Named experiments, one per CLI subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LossCurve,
    LossConvergence,
    DeviationSweep,
    ProductAdditivity,
    Monotonicity,
    Transforms,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::LossCurve => "loss-curve",
            Self::LossConvergence => "loss-convergence",
            Self::DeviationSweep => "deviation-sweep",
            Self::ProductAdditivity => "product-additivity",
            Self::Monotonicity => "monotonicity",
            Self::Transforms => "transforms",
            Self::Verify => "verify",
        }
    }

    /// Output columns, fixed per experiment. `verify` writes a report instead.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::LossCurve => &[
                "gamma_db",
                "mi_ref_bits",
                "mr_ref_bits",
                "mi_proj_bits",
                "mr_proj_bits",
                "loss_total_bits",
                "stderr_bits",
            ],
            Self::LossConvergence => &[
                "n",
                "phi",
                "beta",
                "gamma_db",
                "mc_loss_bits",
                "stderr_bits",
                "asymptotic_bits",
                "discrepancy_bits",
            ],
            Self::DeviationSweep => &[
                "beta",
                "n",
                "gamma_db",
                "mc_deviation_bits",
                "stderr_bits",
                "asymptotic_bits",
                "discrepancy_bits",
            ],
            Self::ProductAdditivity => &[
                "m",
                "n",
                "beta",
                "mc_product_bits",
                "stderr_product_bits",
                "mc_factor_sum_bits",
                "stderr_factor_sum_bits",
                "closed_form_bits",
                "discrepancy_bits",
                "additivity_gap_bits",
            ],
            Self::Monotonicity => &["gamma_db", "mc_loss_bits", "stderr_bits", "asymptotic_bits", "nondecreasing"],
            Self::Transforms => &["t", "gamma", "psi", "eta", "s_transform", "harmonic_mean", "mutual_info_bits"],
            Self::Verify => &[],
        }
    }
}

/// Entry distribution selectable from the CLI. Products take their factor
/// count from the `m` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Ensemble {
    IidComplexGaussian,
    IidRealGaussian,
    HaarUnitary,
    ProductIid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `json` for a `.json` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: Format,
}

/// Experiment parameters. Absent fields take per-experiment defaults in
/// [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Ensemble>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<SpectralFamily>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
}

/// A complete, re-runnable experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Parameters after defaults are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub n: Vec<usize>,
    pub phi: f64,
    pub beta: Vec<f64>,
    pub gamma_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub ensemble: Ensemble,
    pub variance: Option<f64>,
    pub m: Vec<usize>,
    pub side: Side,
    pub family: SpectralFamily,
    pub t: Vec<f64>,
}

pub const DEFAULT_SEED: u64 = 20_110_301;

/// `a:b:c` (start, step, stop; inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, h, b) = (num(start)?, num(step)?, num(stop)?);
            if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(format!("`{text}` needs start <= stop and a positive step"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize;
            if count > 1_000_000 {
                return Err(format!("`{text}` has too many points"));
            }
            Ok((0..=count).map(|k| a + k as f64 * h).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(format!("`{text}` is neither a:b:c nor a list")),
    }
}

fn range(a: f64, h: f64, b: f64) -> Vec<f64> {
    parse_grid(&format!("{a}:{h}:{b}")).expect("static grid")
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Receive => "receive-side",
        Side::Transmit => "transmit-side",
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            parameters: Parameters::default(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(vec![e.to_string()]))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(vec![format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                config.schema_version
            )]));
        }
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fills defaults and checks every field, reporting all problems at once.
    pub fn resolve(&self) -> Result<Resolved, HarnessError> {
        use Experiment::*;
        let e = self.experiment;
        let p = &self.parameters;
        let small = matches!(e, LossCurve | Monotonicity);
        let r = Resolved {
            n: p.n.clone().unwrap_or_else(|| match e {
                LossCurve | Monotonicity => vec![4],
                LossConvergence => vec![64, 128, 256, 512],
                _ => vec![256],
            }),
            phi: p.phi.unwrap_or(0.5),
            beta: p.beta.clone().unwrap_or_else(|| match e {
                LossConvergence => vec![0.75],
                DeviationSweep => vec![0.25, 0.5, 0.75],
                _ => vec![0.5],
            }),
            gamma_db: p.gamma_db.clone().unwrap_or_else(|| match e {
                LossCurve => range(0.0, 2.0, 40.0),
                Monotonicity => range(0.0, 5.0, 40.0),
                LossConvergence => vec![40.0],
                _ => vec![60.0],
            }),
            trials: p.trials.unwrap_or(if small { 20_000 } else { 200 }),
            master_seed: p.master_seed.unwrap_or(DEFAULT_SEED),
            ensemble: p.ensemble.unwrap_or(match e {
                ProductAdditivity => Ensemble::ProductIid,
                _ => Ensemble::IidComplexGaussian,
            }),
            variance: p.variance,
            m: p.m.clone().unwrap_or_else(|| match e {
                ProductAdditivity => vec![1, 2, 3],
                _ => vec![2],
            }),
            side: p.side.unwrap_or(Side::Receive),
            family: p.family.clone().unwrap_or(SpectralFamily::SquareIidGram { variance: 1.0 }),
            t: p.t.clone().unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect()),
        };
        let issues = r.issues(e);
        if issues.is_empty() {
            Ok(r)
        } else {
            Err(HarnessError::Config(issues))
        }
    }
}

impl Resolved {
    /// Ensemble for an `rows x cols` draw. Without an explicit variance, the
    /// small-system curves use unit-variance entries and everything else
    /// uses `variance = 1`.
    pub fn ensemble_spec(&self, experiment: Experiment, rows: usize, cols: usize, m: usize) -> crate::Result<EnsembleSpec> {
        let kind = match self.ensemble {
            Ensemble::IidComplexGaussian => EnsembleKind::IidComplexGaussian,
            Ensemble::IidRealGaussian => EnsembleKind::IidRealGaussian,
            Ensemble::HaarUnitary => EnsembleKind::HaarUnitary,
            Ensemble::ProductIid => EnsembleKind::ProductIid { m },
        };
        let unit_entries = matches!(experiment, Experiment::LossCurve | Experiment::Monotonicity)
            && matches!(self.ensemble, Ensemble::IidComplexGaussian | Ensemble::IidRealGaussian);
        let variance = self
            .variance
            .unwrap_or(if unit_entries { rows as f64 } else { 1.0 });
        EnsembleSpec::new(kind, rows, cols, variance)
    }

    /// The same values as explicit parameters, for echoing into output metadata.
    pub fn to_parameters(&self) -> Parameters {
        Parameters {
            n: Some(self.n.clone()),
            phi: Some(self.phi),
            beta: Some(self.beta.clone()),
            gamma_db: Some(self.gamma_db.clone()),
            trials: Some(self.trials),
            master_seed: Some(self.master_seed),
            ensemble: Some(self.ensemble),
            variance: self.variance,
            m: Some(self.m.clone()),
            side: Some(self.side),
            family: Some(self.family.clone()),
            t: Some(self.t.clone()),
        }
    }

    /// Transmit antenna count for `n` receive antennas at ratio `phi`.
    pub fn cols_for(&self, n: usize) -> usize {
        ((self.phi * n as f64 + 0.5).floor() as usize).max(1)
    }

    fn issues(&self, e: Experiment) -> Vec<String> {
        use Experiment::*;
        let mut out = Vec::new();
        let mut bad = |field: &str, msg: String| out.push(format!("{field}: {msg}"));
        if self.n.is_empty() || self.n.iter().any(|&n| n == 0) {
            bad("n", "needs one or more positive sizes".into());
        }
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            bad("phi", format!("{} is not positive", self.phi));
        }
        if self.beta.is_empty() || self.beta.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            bad("beta", "every value must lie in (0, 1]".into());
        }
        if self.gamma_db.is_empty() || self.gamma_db.iter().any(|g| !g.is_finite()) {
            bad("gamma_db", "needs one or more finite values".into());
        } else if self.gamma_db.windows(2).any(|w| w[1] <= w[0]) {
            bad("gamma_db", "grid must be strictly increasing".into());
        }
        if self.trials < 2 {
            bad("trials", format!("{} < 2", self.trials));
        }
        if let Some(v) = self.variance {
            if !(v >= 0.0 && v.is_finite()) {
                bad("variance", format!("{v} is negative or not finite"));
            }
        }
        if self.m.is_empty() || self.m.iter().any(|&m| m == 0) {
            bad("m", "needs one or more positive factor counts".into());
        }
        let square_only = matches!(e, DeviationSweep | ProductAdditivity);
        if square_only && matches!(self.ensemble, Ensemble::IidRealGaussian) {
            bad("ensemble", "deviation experiments use complex or unitary ensembles".into());
        }
        if matches!(e, LossCurve | LossConvergence | Monotonicity) {
            if matches!(self.ensemble, Ensemble::HaarUnitary | Ensemble::ProductIid) && self.phi != 1.0 {
                bad("ensemble", "square ensembles need phi = 1".into());
            }
            for &n in &self.n {
                let cols = self.cols_for(n);
                let phi = cols as f64 / n as f64;
                for &b in &self.beta {
                    let ok = match self.side {
                        Side::Receive => phi <= 1.0 && b >= phi,
                        Side::Transmit => phi >= 1.0 && b * phi >= 1.0,
                    };
                    if !ok {
                        bad(
                            "beta",
                            format!("{b} with {n}x{cols} is outside the {} loss regime", side_name(self.side)),
                        );
                    }
                }
            }
            if e == LossCurve && (self.n.len() != 1 || self.beta.len() != 1) {
                bad("n", "loss-curve takes a single size and a single beta".into());
            }
        }
        if e == Monotonicity && (self.n.len() != 1 || self.beta.len() != 1) {
            bad("n", "monotonicity takes a single size and a single beta".into());
        }
        if e == ProductAdditivity && self.gamma_db.len() != 1 {
            bad("gamma_db", "product-additivity takes a single SNR".into());
        }
        if e == ProductAdditivity && self.ensemble != Ensemble::ProductIid {
            bad("ensemble", "product-additivity samples product_iid".into());
        }
        if e == Transforms {
            if let Err(err) = self.family.validate() {
                bad("family", err.to_string());
            } else {
                let alpha = self.family.rank_measure();
                if self.t.is_empty() || self.t.iter().any(|&t| !(t > 0.0 && t < alpha)) {
                    bad("t", format!("every value must lie in (0, {alpha})"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_grid("0:5:40").unwrap().len(), 9);
        assert_eq!(parse_grid("1, 3,7").unwrap(), vec![1.0, 3.0, 7.0]);
        assert_eq!(parse_grid("30").unwrap(), vec![30.0]);
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
        assert_eq!(db_to_linear(30.0), 1000.0);
    }

    #[test]
    fn defaults_resolve() {
        for e in [
            Experiment::LossCurve,
            Experiment::LossConvergence,
            Experiment::DeviationSweep,
            Experiment::ProductAdditivity,
            Experiment::Monotonicity,
            Experiment::Transforms,
            Experiment::Verify,
        ] {
            ExperimentConfig::new(e).resolve().unwrap();
        }
    }

    #[test]
    fn every_issue_is_listed() {
        let mut c = ExperimentConfig::new(Experiment::LossConvergence);
        c.parameters.trials = Some(1);
        c.parameters.gamma_db = Some(vec![10.0, 5.0]);
        c.parameters.beta = Some(vec![0.25]);
        match c.resolve() {
            Err(HarnessError::Config(issues)) => {
                assert!(issues.iter().any(|s| s.starts_with("trials")));
                assert!(issues.iter().any(|s| s.starts_with("gamma_db")));
                assert!(issues.iter().any(|s| s.starts_with("beta")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_schema() {
        let text = r#"{"schema_version": 1, "experiment": "loss-curve",
            "parameters": {"gamma_db": [0, 10], "trials": 50},
            "output": {"path": "x.csv", "format": "csv"}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.parameters.trials, Some(50));
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        assert!(ExperimentConfig::from_json(&text.replace("\"schema_version\": 1", "\"schema_version\": 9")).is_err());
        assert!(ExperimentConfig::from_json(&text.replace("trials", "trails")).is_err());
    }
}
