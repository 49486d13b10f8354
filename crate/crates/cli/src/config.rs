//! Run configuration documents (TOML) and their validation.
//!
//! Every tolerance a contract uses is a key under `[tolerances]`; the
//! defaults are the thresholds the pipelines are specified against.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use beltrami_core::jets::MetricJet;
use beltrami_core::nt_map::{NTSymbol, NtMode};
use beltrami_core::{Rational, Scalar};
use beltrami_numerics::slab::{Profile, SlabConfig};

use crate::error::CliError;

/// Pipeline selected by a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// DN factorization and normal-to-tangential symbol of metric jets.
    Symbols,
    /// Boundary jet recovery from a stored normal-to-tangential symbol.
    Recover,
    /// Forward pipeline followed by recovery, compared with the input jet.
    Roundtrip,
    /// Mode-by-mode slab solver checked against the symbol expansion.
    Slab,
    /// Current-loop b-field evaluation, field equations and singularity fit.
    Bfield,
    /// Embedding probe of the loop-to-field map over a sphere-bundle grid.
    Embed,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Symbols => "symbols",
            Command::Recover => "recover",
            Command::Roundtrip => "roundtrip",
            Command::Slab => "slab",
            Command::Bfield => "bfield",
            Command::Embed => "embed",
        }
    }

    fn symbolic(self) -> bool {
        matches!(
            self,
            Command::Symbols | Command::Recover | Command::Roundtrip
        )
    }
}

/// Scalar arithmetic of the symbolic pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    /// Exact rationals; residual contracts demand zero.
    Exact,
    /// `f64`; residual contracts use the configured tolerances.
    Float,
}

/// Input files; relative paths are taken from the configuration's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    /// Metric jet documents. Without any, the bundled Euclidean jet is used.
    #[serde(default)]
    pub metrics: Vec<PathBuf>,
    /// Normal-to-tangential symbol document (for `recover`).
    #[serde(default)]
    pub symbol: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative agreement of recovered and reference jets in float mode.
    pub relative: f64,
    /// Symbol residuals in float mode, relative to the largest coefficient.
    pub residual: f64,
    /// `|curl u − λu|`, relative.
    pub curl: f64,
    /// `|d*u|`, relative.
    pub divergence: f64,
    /// `|Δ_d u − λ²u|`, relative.
    pub hodge: f64,
    /// Half-width of the accepted slope window for the principal decay fit.
    pub principal_slope: f64,
    /// Half-width of the accepted slope window for subprincipal decay fits.
    pub decay_slope: f64,
    /// Half-width of the accepted window around the singularity exponent −1.
    pub singularity_slope: f64,
    /// Trapezoid closure `|Σ wₖ γ′(tₖ)|`.
    pub closure: f64,
    /// Agreement of successive quadrature doublings.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            residual: 1e-10,
            curl: 1e-5,
            divergence: 1e-6,
            hodge: 1e-5,
            principal_slope: 0.1,
            decay_slope: 0.2,
            singularity_slope: 0.05,
            closure: 1e-12,
            quadrature: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolsSection {
    /// λ as a rational or decimal literal.
    pub lambda: String,
    /// Jet order of the bundled Euclidean metric.
    pub order: usize,
    /// Lowest degree of σ.
    pub bottom: i32,
}

impl Default for SymbolsSection {
    fn default() -> Self {
        Self {
            lambda: "1".into(),
            order: 6,
            bottom: -3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverSection {
    pub kmax: usize,
    /// Tangential depth; `kmax + 1` when absent.
    pub tangential_order: Option<usize>,
}

impl Default for RecoverSection {
    fn default() -> Self {
        Self {
            kmax: 3,
            tangential_order: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundtripSection {
    pub lambda: String,
    /// Jet order of generated and bundled metrics.
    pub order: usize,
    pub kmax: usize,
    /// Number of random jets generated from the run seed.
    pub random: usize,
    /// Also run the closed-form first/second-order recovery and compare.
    pub explicit: bool,
}

impl Default for RoundtripSection {
    fn default() -> Self {
        Self {
            lambda: "1".into(),
            order: 6,
            kmax: 3,
            random: 0,
            explicit: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlabSection {
    pub profile: Profile,
    pub thickness: f64,
    pub lambda: f64,
    pub ode_steps: usize,
    /// Direction of the mode ray.
    pub direction: [f64; 2],
    /// Modes are `2π·n·direction/|direction|` for each `n`.
    pub multiples: Vec<f64>,
    /// Numbers `M` of subprincipal terms to subtract in decay fits.
    pub terms: Vec<usize>,
    /// Jet order of the profile handed to the symbol pipeline.
    pub order: usize,
    /// Number of the smallest modes whose reconstructed fields are checked.
    pub field_checks: usize,
}

impl Default for SlabSection {
    fn default() -> Self {
        Self {
            profile: Profile::Euclidean,
            thickness: 1.0,
            lambda: 1.0,
            ode_steps: 2000,
            direction: [1.0, 0.0],
            multiples: vec![4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0],
            terms: vec![0, 1],
            order: 5,
            field_checks: 2,
        }
    }
}

impl SlabSection {
    /// The solver configuration over [`SlabSection::modes`].
    pub fn solver_config(&self) -> SlabConfig {
        SlabConfig {
            profile: self.profile.clone(),
            thickness: self.thickness,
            lambda: self.lambda,
            modes: self.modes(),
            ode_steps: self.ode_steps,
            mode: NtMode::for_lambda(&self.lambda),
        }
    }

    pub fn modes(&self) -> Vec<[f64; 2]> {
        let n = self.direction[0].hypot(self.direction[1]);
        self.multiples
            .iter()
            .map(|k| {
                [
                    TAU * k * self.direction[0] / n,
                    TAU * k * self.direction[1] / n,
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfieldSection {
    pub center: [f64; 3],
    pub omega: [f64; 3],
    pub delta: f64,
    pub lambda: f64,
    pub nodes: usize,
    /// Evaluation points; each also gets a finite-difference field check.
    pub points: Vec<[f64; 3]>,
    /// Step of the finite-difference field checks.
    pub fd_step: f64,
    /// Approach directions towards the first loop node.
    pub approach: Vec<[f64; 3]>,
}

impl Default for BfieldSection {
    fn default() -> Self {
        Self {
            center: [0.0; 3],
            omega: [0.0, 0.0, 1.0],
            delta: 0.1,
            lambda: 1.0,
            nodes: 64,
            points: vec![[0.0, 0.0, 0.05], [0.15, 0.05, 0.02], [-0.05, 0.2, -0.1]],
            fd_step: 1e-3,
            approach: vec![[0.0, 0.0, 1.0], [1.0, 0.0, 1.0]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedSection {
    pub delta: f64,
    pub lambda: f64,
    pub nodes: usize,
    /// Central-difference step in the bundle coordinates.
    pub step: f64,
    /// Polar angles `θₖ = π(k + 1)/(thetas + 1)`.
    pub thetas: usize,
    /// Azimuths `φₖ = 2πk/phis`.
    pub phis: usize,
    pub centers: Vec<[f64; 3]>,
    /// Probe points; 20 points on a helix when empty.
    pub patch: Vec<[f64; 3]>,
}

impl Default for EmbedSection {
    fn default() -> Self {
        Self {
            delta: 0.1,
            lambda: 1.0,
            nodes: 64,
            step: 1e-4,
            thetas: 5,
            phis: 5,
            centers: vec![[0.0; 3], [0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [0.0, 0.0, 0.1]],
            patch: Vec::new(),
        }
    }
}

impl EmbedSection {
    pub fn patch_points(&self) -> Vec<[f64; 3]> {
        if !self.patch.is_empty() {
            return self.patch.clone();
        }
        (0..20)
            .map(|k| {
                let t = 0.9 * k as f64;
                [1.0 + 0.2 * t.cos(), 0.2 * t.sin(), 0.3 + 0.02 * k as f64]
            })
            .collect()
    }
}

/// A run configuration document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Report directory; relative to the configuration's directory.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// `exact` (default) or `float` for the symbolic commands; the numeric
    /// commands are float only.
    #[serde(default)]
    pub mode: Option<NumericMode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub symbols: SymbolsSection,
    #[serde(default)]
    pub recover: RecoverSection,
    #[serde(default)]
    pub roundtrip: RoundtripSection,
    #[serde(default)]
    pub slab: SlabSection,
    #[serde(default)]
    pub bfield: BfieldSection,
    #[serde(default)]
    pub embed: EmbedSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A metric input, parsed in the run's arithmetic.
#[derive(Clone, Debug)]
pub enum MetricInput {
    Exact(MetricJet<Rational>),
    Float(MetricJet<f64>),
}

/// A symbol input, parsed in the run's arithmetic.
#[derive(Clone, Debug)]
pub enum SymbolInput {
    Exact(NTSymbol<Rational>),
    Float(NTSymbol<f64>),
}

/// A validated configuration with its inputs parsed.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub mode: NumericMode,
    /// Absolute or config-relative output directory.
    pub output_dir: PathBuf,
    /// `(display name, metric)` per metric input.
    pub metrics: Vec<(String, MetricInput)>,
    pub symbol: Option<(String, SymbolInput)>,
}

fn parse_error(what: impl std::fmt::Display) -> CliError {
    CliError::Parse(what.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| parse_error(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(parse_error(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_lambda(name: &str, text: &str, mode: NumericMode) -> Result<(), CliError> {
    let ok = match mode {
        NumericMode::Exact => Rational::parse_text(text).is_some(),
        NumericMode::Float => f64::parse_text(text).is_some(),
    };
    if ok {
        Ok(())
    } else {
        Err(parse_error(format!("{name} = '{text}' is not a number")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(parse_error)
    }

    /// Reads, validates and parses every referenced input. Nothing is
    /// computed and nothing is written.
    pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
        let config = Self::from_toml(&read(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve(&base)
    }

    /// Validation and input parsing with paths taken relative to `base`.
    pub fn resolve(self, base: &Path) -> Result<LoadedConfig, CliError> {
        let mode = match (self.mode, self.command.symbolic()) {
            (Some(NumericMode::Exact), false) => {
                return Err(parse_error(format!(
                    "command '{}' runs in float mode only",
                    self.command.as_str()
                )))
            }
            (Some(m), _) => m,
            (None, true) => NumericMode::Exact,
            (None, false) => NumericMode::Float,
        };
        self.validate(mode)?;
        let at = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        let mut metrics = Vec::with_capacity(self.inputs.metrics.len());
        for p in &self.inputs.metrics {
            let full = at(p);
            let text = read(&full)?;
            let m = match mode {
                NumericMode::Exact => {
                    MetricJet::<Rational>::from_json(&text).map(MetricInput::Exact)
                }
                NumericMode::Float => MetricJet::<f64>::from_json(&text).map(MetricInput::Float),
            }
            .map_err(|e| parse_error(format!("{}: {e}", full.display())))?;
            metrics.push((stem(p), m));
        }
        let symbol = match &self.inputs.symbol {
            None => None,
            Some(p) => {
                let full = at(p);
                let text = read(&full)?;
                let s = match mode {
                    NumericMode::Exact => {
                        NTSymbol::<Rational>::from_json(&text).map(SymbolInput::Exact)
                    }
                    NumericMode::Float => NTSymbol::<f64>::from_json(&text).map(SymbolInput::Float),
                }
                .map_err(|e| parse_error(format!("{}: {e}", full.display())))?;
                Some((stem(p), s))
            }
        };
        if self.command == Command::Recover && symbol.is_none() {
            return Err(parse_error("'recover' needs inputs.symbol"));
        }
        Ok(LoadedConfig {
            output_dir: at(&self.output_dir),
            config: self,
            mode,
            metrics,
            symbol,
        })
    }

    fn validate(&self, mode: NumericMode) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.relative", t.relative),
            ("tolerances.residual", t.residual),
            ("tolerances.curl", t.curl),
            ("tolerances.divergence", t.divergence),
            ("tolerances.hodge", t.hodge),
            ("tolerances.principal_slope", t.principal_slope),
            ("tolerances.decay_slope", t.decay_slope),
            ("tolerances.singularity_slope", t.singularity_slope),
            ("tolerances.closure", t.closure),
            ("tolerances.quadrature", t.quadrature),
        ] {
            check_positive(name, v)?;
        }
        match self.command {
            Command::Symbols => {
                check_lambda("symbols.lambda", &self.symbols.lambda, mode)?;
                if self.symbols.bottom > 0 {
                    return Err(parse_error("symbols.bottom must be ≤ 0"));
                }
            }
            Command::Recover => {
                if self.recover.kmax == 0 {
                    return Err(parse_error("recover.kmax must be at least 1"));
                }
            }
            Command::Roundtrip => {
                check_lambda("roundtrip.lambda", &self.roundtrip.lambda, mode)?;
                if self.roundtrip.kmax == 0 {
                    return Err(parse_error("roundtrip.kmax must be at least 1"));
                }
            }
            Command::Slab => {
                let s = &self.slab;
                check_positive("slab.thickness", s.thickness)?;
                if s.direction[0] == 0.0 && s.direction[1] == 0.0 {
                    return Err(parse_error("slab.direction must be nonzero"));
                }
                if s.multiples.iter().any(|k| !(*k > 0.0)) {
                    return Err(parse_error("slab.multiples must be positive"));
                }
                if s.order < 2 || s.terms.iter().any(|m| *m > s.order) {
                    return Err(parse_error("slab.terms exceed what slab.order supports"));
                }
                s.solver_config()
                    .validate()
                    .map_err(|e| parse_error(format!("slab: {e}")))?;
            }
            Command::Bfield => {
                let b = &self.bfield;
                check_positive("bfield.delta", b.delta)?;
                check_positive("bfield.fd_step", b.fd_step)?;
                if !b.lambda.is_finite() {
                    return Err(parse_error("bfield.lambda must be finite"));
                }
            }
            Command::Embed => {
                let e = &self.embed;
                check_positive("embed.delta", e.delta)?;
                check_positive("embed.step", e.step)?;
                if e.thetas < 3 || e.phis < 3 || e.centers.is_empty() {
                    return Err(parse_error(
                        "embed needs at least 3 polar angles, 3 azimuths and one center",
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<LoadedConfig, CliError> {
        RunConfig::from_toml(text)?.resolve(Path::new("/base"))
    }

    #[test]
    fn modes_default_by_command() {
        assert_eq!(
            resolve("command = \"roundtrip\"").unwrap().mode,
            NumericMode::Exact
        );
        assert_eq!(
            resolve("command = \"slab\"").unwrap().mode,
            NumericMode::Float
        );
        let l = resolve("command = \"symbols\"\nmode = \"float\"").unwrap();
        assert_eq!(l.mode, NumericMode::Float);
        assert!(matches!(
            resolve("command = \"embed\"\nmode = \"exact\""),
            Err(CliError::Parse(_))
        ));
    }

    #[test]
    fn output_directory_is_relative_to_the_configuration() {
        let l = resolve("command = \"bfield\"\noutput_dir = \"runs/a\"").unwrap();
        assert_eq!(l.output_dir, Path::new("/base/runs/a"));
        let l = resolve("command = \"bfield\"\noutput_dir = \"/tmp/x\"").unwrap();
        assert_eq!(l.output_dir, Path::new("/tmp/x"));
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        for text in [
            "command = \"slab\"\nspeed = 1",
            "command = \"slab\"\n[slab]\nlambdaa = 1.0",
            "command = \"slab\"\n[tolerances]\ncurll = 1.0",
            "command = \"slab\"\n[inputs]\nmetric = []",
            "command = \"teleport\"",
        ] {
            assert!(
                matches!(RunConfig::from_toml(text), Err(CliError::Parse(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn lambda_literals_follow_the_mode() {
        assert!(resolve("command = \"symbols\"\n[symbols]\nlambda = \"-3/4\"").is_ok());
        assert!(resolve("command = \"symbols\"\n[symbols]\nlambda = \"0.25\"").is_ok());
        assert!(
            resolve("command = \"symbols\"\nmode = \"float\"\n[symbols]\nlambda = \"2.5e-1\"")
                .is_ok()
        );
        assert!(resolve("command = \"symbols\"\n[symbols]\nlambda = \"1/0\"").is_err());
    }

    #[test]
    fn slab_modes_lie_on_the_requested_ray() {
        let s = SlabSection {
            direction: [3.0, 4.0],
            multiples: vec![1.0, 2.0],
            ..SlabSection::default()
        };
        let m = s.modes();
        let t = std::f64::consts::TAU;
        assert!((m[0][0] - 0.6 * t).abs() < 1e-14 && (m[0][1] - 0.8 * t).abs() < 1e-14);
        assert!((m[1][0] - 1.2 * t).abs() < 1e-14);
        assert!(resolve("command = \"slab\"\n[slab]\nmultiples = [1.0, -2.0]").is_err());
        assert!(resolve("command = \"slab\"\n[slab]\nterms = [9]").is_err());
    }

    #[test]
    fn default_patch_has_twenty_points_off_the_loops() {
        let e = EmbedSection::default();
        let p = e.patch_points();
        assert_eq!(p.len(), 20);
        assert!(p.iter().all(|y| y[0] > 0.5));
        let custom = EmbedSection {
            patch: vec![[1.0, 1.0, 1.0]],
            ..e
        };
        assert_eq!(custom.patch_points().len(), 1);
    }
}
