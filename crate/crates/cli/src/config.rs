//! Run configuration: a TOML or JSON file with global keys and one block per
//! subcommand, plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use dnls_core::sampling::{BetaScaling, McmcConfig};
use dnls_core::sde::SdeParams;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Global {
    pub seed: u64,
    /// Worker threads; `None` lets the pool pick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for Global {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            out: PathBuf::from("dnls-out"),
            format: Format::Csv,
        }
    }
}

/// Parsed config file before the subcommand block is resolved.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    simulate: Option<Table>,
    sample: Option<Table>,
    soliton: Option<Table>,
    #[serde(rename = "soliton-discrete")]
    soliton_discrete: Option<Table>,
    ldtest: Option<Table>,
    concentrate: Option<Table>,
    gncheck: Option<Table>,
    rankcheck: Option<Table>,
    distance: Option<Table>,
    headline: Option<Table>,
}

impl ConfigFile {
    fn take_block(&mut self, command: &str) -> Option<Table> {
        match command {
            "simulate" => self.simulate.take(),
            "sample" => self.sample.take(),
            "soliton" => self.soliton.take(),
            "soliton-discrete" => self.soliton_discrete.take(),
            "ldtest" => self.ldtest.take(),
            "concentrate" => self.concentrate.take(),
            "gncheck" => self.gncheck.take(),
            "rankcheck" => self.rankcheck.take(),
            "distance" => self.distance.take(),
            "headline" => self.headline.take(),
            _ => None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// `key=value` assignments into the subcommand block; dotted keys reach
    /// nested tables.
    pub set: Vec<String>,
}

fn parse_file(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Parse the right-hand side of `--set`: any TOML value, else a bare string.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

fn apply_set(block: &mut Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {assignment:?}")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("--set has an empty key segment in {key:?}")));
    }
    let mut table = block;
    for seg in &path[..path.len() - 1] {
        let entry = table
            .entry(seg.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: `{seg}` is not a table")))?;
    }
    table.insert(path[path.len() - 1].to_owned(), parse_value(raw.trim()));
    Ok(())
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved<T> {
    pub global: Global,
    pub params: T,
}

/// Read the file (if any), apply overrides and deserialize the block of
/// `command` into `T`. Unknown keys are rejected with the accepted names.
pub fn resolve<T: DeserializeOwned + Validate>(command: &str, ov: &Overrides) -> CliResult<Resolved<T>> {
    let mut file = match &ov.config {
        Some(p) => parse_file(p)?,
        None => ConfigFile::default(),
    };
    let defaults = Global::default();
    let global = Global {
        seed: ov.seed.or(file.seed).unwrap_or(defaults.seed),
        threads: ov.threads.or(file.threads),
        out: ov.out.clone().or(file.out.take()).unwrap_or(defaults.out),
        format: ov.format.or(file.format).unwrap_or(defaults.format),
    };
    if global.threads == Some(0) {
        return Err(CliError::Config("threads must be >= 1".into()));
    }
    let mut block = file.take_block(command).unwrap_or_default();
    for s in &ov.set {
        apply_set(&mut block, s)?;
    }
    let params: T = Value::Table(block)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("[{command}] {}", e.message())))?;
    params.validate()?;
    Ok(Resolved { global, params })
}

/// Cross-field checks that serde cannot express.
pub trait Validate {
    fn validate(&self) -> CliResult<()> {
        Ok(())
    }
}

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

// ---- subcommand blocks ----------------------------------------------------

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    pub m: f64,
    #[serde(default = "one")]
    pub length: f64,
    /// Points of the sampled profile.
    #[serde(default = "SolitonConfig::default_grid")]
    pub grid: usize,
}

impl SolitonConfig {
    fn default_grid() -> usize {
        1024
    }
}

impl Validate for SolitonConfig {
    fn validate(&self) -> CliResult<()> {
        if self.grid < 2 {
            return config_err("soliton.grid must be >= 2");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonDiscreteConfig {
    pub n: usize,
    pub m: f64,
    #[serde(default = "SolitonDiscreteConfig::default_restarts")]
    pub restarts: usize,
    #[serde(default = "SolitonDiscreteConfig::default_tol")]
    pub tol: f64,
    #[serde(default = "SolitonDiscreteConfig::default_max_iter")]
    pub max_iter: usize,
}

impl SolitonDiscreteConfig {
    fn default_restarts() -> usize {
        8
    }
    fn default_tol() -> f64 {
        1e-10
    }
    fn default_max_iter() -> usize {
        100_000
    }
}

impl Validate for SolitonDiscreteConfig {}

/// Initial condition of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitSource {
    /// Uniform sample of the mass sphere.
    RandomSphere,
    /// The discrete soliton.
    Soliton,
    /// The discrete soliton plus complex Gaussian noise of this relative size.
    SolitonPlusNoise(f64),
    /// A stored field file (binary, or JSON by extension).
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub sde: SdeParams,
    pub t_final: f64,
    #[serde(default = "SimulateConfig::default_init")]
    pub init: InitSource,
    /// Number of evenly spaced state snapshots (the final state is always kept).
    #[serde(default)]
    pub snapshots: usize,
    /// Record the H̃¹ distance to `Q_m` with every observable row.
    #[serde(default)]
    pub distance: bool,
    /// Track the largest one-step energy increase (meaningful at `beta = inf`).
    #[serde(default)]
    pub monotonicity: bool,
}

impl SimulateConfig {
    fn default_init() -> InitSource {
        InitSource::RandomSphere
    }
}

impl Validate for SimulateConfig {
    fn validate(&self) -> CliResult<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return config_err(format!("simulate.t_final must be positive, got {}", self.t_final));
        }
        if let InitSource::SolitonPlusNoise(a) = self.init {
            if !(a >= 0.0 && a.is_finite()) {
                return config_err(format!("simulate.init.soliton-plus-noise must be >= 0, got {a}"));
            }
        }
        self.sde.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

fn default_p() -> f64 {
    3.0
}

fn default_kappa() -> f64 {
    -1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub n: usize,
    pub m: f64,
    pub beta: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "one_usize")]
    pub chains: usize,
    /// Sampler settings; its `seed` is replaced by the global seed.
    #[serde(default)]
    pub mcmc: McmcConfig,
    /// Store the last sample of every chain as a field file.
    #[serde(default)]
    pub save_last: bool,
}

fn one_usize() -> usize {
    1
}

impl Validate for SampleConfig {
    fn validate(&self) -> CliResult<()> {
        if self.chains == 0 {
            return config_err("sample.chains must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdtestConfig {
    #[serde(default = "LdtestConfig::default_n")]
    pub n: usize,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "LdtestConfig::default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "LdtestConfig::default_samples")]
    pub samples: u64,
}

impl LdtestConfig {
    fn default_n() -> usize {
        8
    }
    fn default_thresholds() -> Vec<f64> {
        vec![16.0, 24.0, 32.0]
    }
    fn default_samples() -> u64 {
        10_000_000
    }
}

impl Validate for LdtestConfig {
    fn validate(&self) -> CliResult<()> {
        if self.thresholds.is_empty() {
            return config_err("ldtest.thresholds must not be empty");
        }
        Ok(())
    }
}

/// Growth of the inverse temperature with `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    /// Base inverse temperature `β` in `β_n = β ϑ(n)`.
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub kind: ScheduleKind,
    /// Exponent for `kind = "power"`.
    #[serde(default = "Schedule::default_a")]
    pub a: f64,
}

impl Schedule {
    fn default_a() -> f64 {
        1.5
    }

    pub fn scaling(&self) -> BetaScaling {
        match self.kind {
            ScheduleKind::Power => BetaScaling::Power(self.a),
            ScheduleKind::NLogSquared => BetaScaling::NLogSquared,
        }
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            beta: 1.0,
            kind: ScheduleKind::Power,
            a: 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    #[default]
    Power,
    NLogSquared,
}

/// Either a fixed `beta` or a `schedule`, never both.
fn resolve_beta(section: &str, beta: Option<f64>, schedule: &Option<Schedule>) -> CliResult<(f64, BetaScaling)> {
    match (beta, schedule) {
        (Some(_), Some(_)) => config_err(format!(
            "{section}: `beta` (fixed inverse temperature) and `schedule` (growing with n) are mutually exclusive"
        )),
        (Some(b), None) => Ok((b, BetaScaling::Power(0.0))),
        (None, Some(s)) => Ok((s.beta, s.scaling())),
        (None, None) => {
            let s = Schedule::default();
            Ok((s.beta, s.scaling()))
        }
    }
}

fn default_n_list() -> Vec<usize> {
    vec![8, 16, 32]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrateConfig {
    #[serde(default = "ConcentrateConfig::default_m")]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "ConcentrateConfig::default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

impl ConcentrateConfig {
    fn default_m() -> f64 {
        25.0
    }
    fn default_chains() -> usize {
        4
    }

    pub fn beta_scaling(&self) -> CliResult<(f64, BetaScaling)> {
        resolve_beta("concentrate", self.beta, &self.schedule)
    }
}

impl Validate for ConcentrateConfig {
    fn validate(&self) -> CliResult<()> {
        self.beta_scaling()?;
        if self.n_list.is_empty() {
            return config_err("concentrate.n_list must not be empty");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GncheckConfig {
    #[serde(default = "GncheckConfig::default_samples")]
    pub samples: usize,
    #[serde(default = "GncheckConfig::default_n_min")]
    pub n_min: usize,
    #[serde(default = "GncheckConfig::default_n_max")]
    pub n_max: usize,
    /// Seed of the scan; defaults to the one behind the stored constant so a
    /// plain run reproduces it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_seed: Option<u64>,
    /// Constant to test for violations; defaults to the stored one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl GncheckConfig {
    fn default_samples() -> usize {
        100_000
    }
    fn default_n_min() -> usize {
        4
    }
    fn default_n_max() -> usize {
        256
    }
}

impl Validate for GncheckConfig {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankcheckConfig {
    #[serde(default = "RankcheckConfig::default_n_min")]
    pub n_min: usize,
    #[serde(default = "RankcheckConfig::default_n_max")]
    pub n_max: usize,
    #[serde(default = "RankcheckConfig::default_points")]
    pub points: usize,
}

impl RankcheckConfig {
    fn default_n_min() -> usize {
        2
    }
    fn default_n_max() -> usize {
        8
    }
    fn default_points() -> usize {
        1000
    }
}

impl Validate for RankcheckConfig {
    fn validate(&self) -> CliResult<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return config_err(format!(
                "rankcheck needs 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            ));
        }
        Ok(())
    }
}

/// One side of a `distance` comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// Stored field, compared through its linear interpolant.
    File(PathBuf),
    /// Continuous soliton of this mass on the unit torus.
    Soliton(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub a: Source,
    pub b: Source,
}

impl Validate for DistanceConfig {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Mcmc,
    Sde,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    #[default]
    Soliton,
    RandomSphere,
}

/// SDE sampling settings of the headline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadlineSde {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Time discarded before sampling.
    #[serde(default = "HeadlineSde::default_burn")]
    pub t_burn: f64,
    /// Sampling window after burn-in.
    #[serde(default = "HeadlineSde::default_window")]
    pub t_sample: f64,
    /// Time between stored samples.
    #[serde(default = "HeadlineSde::default_every")]
    pub sample_every: f64,
}

impl HeadlineSde {
    fn default_burn() -> f64 {
        10.0
    }
    fn default_window() -> f64 {
        100.0
    }
    fn default_every() -> f64 {
        0.1
    }
}

impl Default for HeadlineSde {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            dt: None,
            t_burn: Self::default_burn(),
            t_sample: Self::default_window(),
            sample_every: Self::default_every(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadlineConfig {
    #[serde(default = "ConcentrateConfig::default_m")]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "HeadlineConfig::default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub start: StartKind,
    #[serde(default = "ConcentrateConfig::default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub sde: HeadlineSde,
    /// Width of the energy window `H_n <= E0n + energy_eps`, reported next
    /// to the distance probability.
    #[serde(default = "one")]
    pub energy_eps: f64,
}

impl HeadlineConfig {
    fn default_eps() -> f64 {
        0.5
    }

    pub fn beta_scaling(&self) -> CliResult<(f64, BetaScaling)> {
        let (beta, scaling) = resolve_beta("headline", self.beta, &self.schedule)?;
        if let BetaScaling::Power(a) = scaling {
            if a <= 1.0 {
                return config_err(format!(
                    "headline needs beta_n to grow faster than n: schedule exponent a = {a} must exceed 1 \
                     (a fixed `beta` is not allowed here; use `concentrate` for fixed-beta contrasts)"
                ));
            }
        }
        Ok((beta, scaling))
    }
}

impl Validate for HeadlineConfig {
    fn validate(&self) -> CliResult<()> {
        self.beta_scaling()?;
        if self.n_list.is_empty() {
            return config_err("headline.n_list must not be empty");
        }
        if !(self.eps > 0.0 && self.energy_eps > 0.0) {
            return config_err("headline.eps and headline.energy_eps must be positive");
        }
        if self.chains == 0 {
            return config_err("headline.chains must be >= 1");
        }
        let s = &self.sde;
        if !(s.t_burn >= 0.0 && s.t_sample > 0.0 && s.sample_every > 0.0 && s.sample_every <= s.t_sample) {
            return config_err("headline.sde needs t_burn >= 0 and 0 < sample_every <= t_sample");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn empty_soliton_block_names_the_missing_mass() {
        let err = resolve::<SolitonConfig>("soliton", &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`m`"), "{err}");
    }

    #[test]
    fn unknown_key_lists_accepted_names() {
        let ov = Overrides {
            set: vec!["m=1".into(), "mass=2".into()],
            ..Overrides::default()
        };
        let err = resolve::<SolitonConfig>("soliton", &ov).unwrap_err().to_string();
        assert!(err.contains("mass") && err.contains("length"), "{err}");
    }

    #[test]
    fn unknown_top_level_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", "sed = 3\n");
        let ov = Overrides {
            config: Some(p),
            ..Overrides::default()
        };
        let err = resolve::<RankcheckConfig>("rankcheck", &ov).unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn fixed_beta_and_schedule_conflict() {
        let ov = Overrides {
            set: vec!["beta=2".into(), "schedule.a=1.5".into()],
            ..Overrides::default()
        };
        let err = resolve::<ConcentrateConfig>("concentrate", &ov).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("mutually exclusive"));
    }

    #[test]
    fn headline_rejects_slow_schedules() {
        let ov = Overrides {
            set: vec!["schedule.a=1.0".into()],
            ..Overrides::default()
        };
        assert!(resolve::<HeadlineConfig>("headline", &ov).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.toml",
            "seed = 3\nformat = \"json\"\n[soliton]\nm = 4.0\ngrid = 16\n",
        );
        let ov = Overrides {
            config: Some(p),
            seed: Some(9),
            set: vec!["grid=32".into()],
            ..Overrides::default()
        };
        let r = resolve::<SolitonConfig>("soliton", &ov).unwrap();
        assert_eq!(r.global.seed, 9);
        assert_eq!(r.global.format, Format::Json);
        assert_eq!(r.params.m, 4.0);
        assert_eq!(r.params.grid, 32);
    }

    #[test]
    fn json_config_is_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.json",
            r#"{"seed": 5, "simulate": {"t_final": 1.0, "init": {"soliton-plus-noise": 0.1},
                "sde": {"n": 16, "m": 2.0, "beta": "inf"}}}"#,
        );
        let ov = Overrides {
            config: Some(p),
            ..Overrides::default()
        };
        let r = resolve::<SimulateConfig>("simulate", &ov).unwrap();
        assert_eq!(r.params.init, InitSource::SolitonPlusNoise(0.1));
        assert!(r.params.sde.beta.is_infinite());
    }

    #[test]
    fn resolved_config_round_trips() {
        let ov = Overrides {
            set: vec![
                "t_final=2.5".into(),
                "sde.n=8".into(),
                "sde.m=3.0".into(),
                "sde.beta=\"inf\"".into(),
                "init.file=\"x.bin\"".into(),
            ],
            ..Overrides::default()
        };
        let r = resolve::<SimulateConfig>("simulate", &ov).unwrap();
        let text = toml::to_string(&r).unwrap();
        let back: Resolved<SimulateConfig> = toml::from_str(&text).unwrap();
        assert_eq!(back, r);
        let json = serde_json::to_string(&r).unwrap();
        let back: Resolved<SimulateConfig> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn set_parses_scalars_and_strings() {
        assert_eq!(parse_value("3"), Value::Integer(3));
        assert_eq!(parse_value("2.5"), Value::Float(2.5));
        assert_eq!(parse_value("true"), Value::Boolean(true));
        assert_eq!(parse_value("runs/a"), Value::String("runs/a".into()));
        assert_eq!(
            parse_value("[8, 16]"),
            Value::Array(vec![Value::Integer(8), Value::Integer(16)])
        );
    }
}
