//! Scenario files: schema, parsing and resolution into core configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use qprobe_core::evolve::{StepControl, DEFAULT_SAMPLES};
use qprobe_core::iontrap::{IonTrapParams, DEFAULT_DELTA_RANGE_MULTIPLE};
use qprobe_core::linalg::{ket_from_bloch, BlochVector};
use qprobe_core::model::{EnvironmentConfig, MeasurementConfig, ProbeSelfConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Single,
    Repeat,
    Sweep,
    Env,
    Iontrap,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ScenarioKind::Single => "single",
            ScenarioKind::Repeat => "repeat",
            ScenarioKind::Sweep => "sweep",
            ScenarioKind::Env => "env",
            ScenarioKind::Iontrap => "iontrap",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Optional; when present it must match the subcommand.
    pub scenario: Option<ScenarioKind>,
    pub chain_length: Option<usize>,
    pub measurement: Option<MeasurementSection>,
    pub probe_self: Option<ProbeSelfSection>,
    pub environment: Option<EnvironmentSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    pub iontrap: Option<IonTrapSection>,
}

/// Vectors are Bloch vectors `[x, y, z]`; axes are normalized on load.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub xi: f64,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub measured_axis: Option<[f64; 3]>,
    pub probe_axis: Option<[f64; 3]>,
    pub system_init: Option<[f64; 3]>,
    pub probe_init: Option<[f64; 3]>,
    pub readout_axis: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSelfSection {
    pub delta_p: f64,
    pub axis: [f64; 3],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    #[serde(default)]
    pub kappa_s: f64,
    #[serde(default)]
    pub kappa_p: f64,
    pub system_axis: [f64; 3],
    pub probe_axis: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Xi,
    Lambda,
    Gamma,
    Eta,
    DeltaP,
    KappaS,
    KappaP,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Xi => "xi",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Eta => "eta",
            SweepParameter::DeltaP => "delta_p",
            SweepParameter::KappaS => "kappa_s",
            SweepParameter::KappaP => "kappa_p",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub trajectory_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub sample_count: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub dt: Option<f64>,
}

/// Physical units: s^-1 and radians.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonTrapSection {
    pub j0: f64,
    pub delta1: f64,
    #[serde(default)]
    pub delta2: f64,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    pub delta_range_multiple: Option<f64>,
}

impl IonTrapSection {
    pub fn params(&self) -> IonTrapParams {
        IonTrapParams {
            j0: self.j0,
            delta1: self.delta1,
            delta2: self.delta2,
            theta: self.theta,
            phi: self.phi,
            delta_range_multiple: self
                .delta_range_multiple
                .unwrap_or(DEFAULT_DELTA_RANGE_MULTIPLE),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub dt: Option<f64>,
    pub samples: Option<usize>,
}

/// A measurement setup ready to hand to the core.
#[derive(Clone, Debug, PartialEq)]
pub struct Setup {
    pub config: MeasurementConfig,
    pub probe: Option<ProbeSelfConfig>,
    pub env: Option<EnvironmentConfig>,
    pub chain_length: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// `None` only for ion-trap scenarios, whose setup is derived.
    pub setup: Option<Setup>,
    pub sweep: Option<SweepSection>,
    pub iontrap: Option<IonTrapParams>,
    pub control: StepControl,
    pub trajectory_path: PathBuf,
    pub report_path: PathBuf,
}

fn finite(field: &str, x: f64) -> Result<f64, String> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{field} = {x} is not finite"))
    }
}

fn axis(field: &str, v: [f64; 3]) -> Result<BlochVector, String> {
    for x in v {
        finite(field, x)?;
    }
    BlochVector::from(v)
        .normalized()
        .map_err(|_| format!("{field} = ({}, {}, {}) has no direction", v[0], v[1], v[2]))
}

impl MeasurementSection {
    fn to_config(&self) -> Result<MeasurementConfig, String> {
        let mut cfg = MeasurementConfig::new(finite("measurement.xi", self.xi)?);
        if let Some(l) = self.lambda {
            cfg = cfg.with_lambda(finite("measurement.lambda", l)?);
        }
        match (self.measured_axis, self.gamma, self.eta) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err("measurement.measured_axis conflicts with measurement.gamma/eta".into())
            }
            (Some(m), None, None) => {
                cfg = cfg
                    .with_measured_axis(axis("measurement.measured_axis", m)?)
                    .map_err(|e| e.to_string())?;
            }
            (None, g, e) => {
                cfg = cfg.with_angles(
                    finite("measurement.gamma", g.unwrap_or(0.0))?,
                    finite("measurement.eta", e.unwrap_or(0.0))?,
                );
            }
        }
        if let Some(n) = self.probe_axis {
            cfg.probe_axis = axis("measurement.probe_axis", n)?;
        }
        if let Some(s) = self.system_init {
            let v = axis("measurement.system_init", s)?;
            cfg.system_init = ket_from_bloch(&v).map_err(|e| e.to_string())?;
        }
        if let Some(p) = self.probe_init {
            let v = axis("measurement.probe_init", p)?;
            cfg.probe_init = ket_from_bloch(&v).map_err(|e| e.to_string())?;
        }
        if let Some(k) = self.readout_axis {
            cfg.readout_axis = Some(axis("measurement.readout_axis", k)?);
        }
        cfg.validate().map_err(|e| format!("measurement: {e}"))?;
        Ok(cfg)
    }
}

impl ProbeSelfSection {
    fn to_config(&self) -> Result<ProbeSelfConfig, String> {
        let axis = axis("probe_self.axis", self.axis)?;
        ProbeSelfConfig::new(finite("probe_self.delta_p", self.delta_p)?, axis)
            .map_err(|e| format!("probe_self: {e}"))
    }
}

impl EnvironmentSection {
    fn to_config(&self) -> Result<EnvironmentConfig, String> {
        EnvironmentConfig::new(
            self.kappa_s,
            self.kappa_p,
            axis("environment.system_axis", self.system_axis)?,
            axis("environment.probe_axis", self.probe_axis)?,
        )
        .map_err(|e| format!("environment: {e}"))
    }
}

impl Setup {
    /// Copy of this setup with one parameter replaced.
    pub fn with_parameter(&self, p: SweepParameter, value: f64) -> Result<Setup, String> {
        let mut s = self.clone();
        let missing = |section: &str| format!("sweep.parameter needs a [{section}] section");
        match p {
            SweepParameter::Xi => s.config.xi = value,
            SweepParameter::Lambda => s.config.lambda = value,
            SweepParameter::Gamma => s.config.gamma = value,
            SweepParameter::Eta => s.config.eta = value,
            SweepParameter::DeltaP => {
                s.probe
                    .as_mut()
                    .ok_or_else(|| missing("probe_self"))?
                    .delta_p = value
            }
            SweepParameter::KappaS => {
                s.env
                    .as_mut()
                    .ok_or_else(|| missing("environment"))?
                    .kappa_s = value
            }
            SweepParameter::KappaP => {
                s.env
                    .as_mut()
                    .ok_or_else(|| missing("environment"))?
                    .kappa_p = value
            }
        }
        s.config
            .validate()
            .map_err(|e| format!("sweep value {value}: {e}"))?;
        if let Some(p) = &s.probe {
            p.validate()
                .map_err(|e| format!("sweep value {value}: {e}"))?;
        }
        if let Some(e) = &s.env {
            e.validate()
                .map_err(|err| format!("sweep value {value}: {err}"))?;
        }
        Ok(s)
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Checks the file against the requested scenario and builds core configs.
    pub fn resolve(
        &self,
        kind: ScenarioKind,
        stem: &str,
        overrides: &Overrides,
    ) -> Result<Scenario, String> {
        if let Some(declared) = self.scenario {
            if declared != kind {
                return Err(format!(
                    "scenario = \"{declared}\" in the file but the `{kind}` subcommand was used"
                ));
            }
        }
        let forbid = |present: bool, what: &str| -> Result<(), String> {
            if present {
                Err(format!("{what} is not used by the `{kind}` scenario"))
            } else {
                Ok(())
            }
        };
        let require = |present: bool, what: &str| -> Result<(), String> {
            if present {
                Ok(())
            } else {
                Err(format!("the `{kind}` scenario requires {what}"))
            }
        };
        match kind {
            ScenarioKind::Single => {
                forbid(self.environment.is_some(), "[environment] (use `env`)")?;
                forbid(self.chain_length.is_some(), "chain_length (use `repeat`)")?;
                forbid(self.sweep.is_some(), "[sweep]")?;
            }
            ScenarioKind::Repeat => {
                require(self.chain_length.is_some(), "chain_length")?;
                forbid(self.sweep.is_some(), "[sweep]")?;
            }
            ScenarioKind::Sweep => require(self.sweep.is_some(), "a [sweep] section")?,
            ScenarioKind::Env => {
                require(self.environment.is_some(), "an [environment] section")?;
                forbid(self.chain_length.is_some(), "chain_length (use `repeat`)")?;
                forbid(self.sweep.is_some(), "[sweep]")?;
            }
            ScenarioKind::Iontrap => {
                require(self.iontrap.is_some(), "an [iontrap] section")?;
                forbid(
                    self.measurement.is_some(),
                    "[measurement] (it is derived from [iontrap])",
                )?;
                forbid(
                    self.probe_self.is_some(),
                    "[probe_self] (it is derived from [iontrap])",
                )?;
                forbid(self.chain_length.is_some(), "chain_length")?;
                forbid(self.sweep.is_some(), "[sweep]")?;
            }
        }
        if kind != ScenarioKind::Iontrap {
            forbid(self.iontrap.is_some(), "[iontrap]")?;
        }

        let setup = match &self.measurement {
            Some(m) => Some(Setup {
                config: m.to_config()?,
                probe: self
                    .probe_self
                    .as_ref()
                    .map(|p| p.to_config())
                    .transpose()?,
                env: self
                    .environment
                    .as_ref()
                    .map(|e| e.to_config())
                    .transpose()?,
                chain_length: self.chain_length,
            }),
            None if kind == ScenarioKind::Iontrap => None,
            None => return Err("missing [measurement] section".into()),
        };
        if self.chain_length == Some(0) {
            return Err("chain_length must be at least 1".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err("sweep.values is empty".into());
            }
            for &v in &sweep.values {
                finite("sweep.values", v)?;
            }
        }

        let samples = overrides
            .samples
            .or(self.output.sample_count)
            .unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(format!(
                "output.sample_count = {samples} must be at least 2"
            ));
        }
        let dt = overrides.dt.or(self.integration.dt);
        if let Some(dt) = dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(format!("integration.dt = {dt} must be positive"));
            }
        }
        let place = |p: Option<&PathBuf>, ext: &str| {
            let p = p
                .cloned()
                .unwrap_or_else(|| PathBuf::from(format!("{stem}.{ext}")));
            match &overrides.out_dir {
                Some(dir) => dir.join(p),
                None => p,
            }
        };
        Ok(Scenario {
            kind,
            setup,
            sweep: self.sweep.clone(),
            iontrap: self.iontrap.as_ref().map(IonTrapSection::params),
            control: StepControl { dt, samples },
            trajectory_path: place(self.output.trajectory_path.as_ref(), "csv"),
            report_path: place(self.output.report_path.as_ref(), "json"),
        })
    }
}
