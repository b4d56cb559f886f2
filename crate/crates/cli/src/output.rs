//! Trajectory CSV and report JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qprobe_core::evolve::{StateDiagnostics, StepControl, TrajectoryRecord};
use qprobe_core::iontrap::{IonTrapMapping, IonTrapParams};
use qprobe_core::linalg::{bloch_vector, BlochVector, Mat2};
use qprobe_core::protocol::{ChainReport, CorrectedReadout, MeasurementReport};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{ScenarioKind, Setup, SweepParameter};

pub const CSV_HEADER: &str = "t,sx_S,sy_S,sz_S,sx_P,sy_P,sz_P,purity_S,purity_P,pointer";

pub fn write_trajectory(path: &Path, traj: &TrajectoryRecord) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    create_parent(path)?;
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "{CSV_HEADER}").map_err(io_err)?;
    for i in 0..traj.len() {
        let (s, p) = (traj.system_bloch[i], traj.probe_bloch[i]);
        let row = [
            traj.times[i],
            s.x,
            s.y,
            s.z,
            p.x,
            p.y,
            p.z,
            traj.system_purity[i],
            traj.probe_purity[i],
            traj.probe_pointer[i],
        ];
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", line.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })
        }
        _ => Ok(()),
    }
}

/// `stem_<index>.ext` next to `path`.
pub fn indexed_path(path: &Path, index: usize) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{index}.{ext}"),
        None => format!("{stem}_{index}"),
    };
    path.with_file_name(name)
}

fn vec3(v: &BlochVector) -> [f64; 3] {
    v.to_array()
}

fn ket_bloch(k: &qprobe_core::linalg::Ket2) -> [f64; 3] {
    vec3(&bloch_vector(&Mat2::projector(k)))
}

#[derive(Serialize)]
pub struct ProbeSelfJson {
    pub delta_p: f64,
    pub axis: [f64; 3],
}

#[derive(Serialize)]
pub struct EnvironmentJson {
    pub kappa_s: f64,
    pub kappa_p: f64,
    pub system_axis: [f64; 3],
    pub probe_axis: [f64; 3],
}

/// Fully resolved inputs, enough to rerun the scenario.
#[derive(Serialize)]
pub struct ConfigJson {
    pub xi: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub eta: f64,
    pub interaction_time: f64,
    pub measured_axis: [f64; 3],
    pub probe_axis: [f64; 3],
    pub system_init: [f64; 3],
    pub probe_init: [f64; 3],
    pub readout_axis: [f64; 3],
    pub probe_self: Option<ProbeSelfJson>,
    pub environment: Option<EnvironmentJson>,
    pub chain_length: Option<usize>,
    /// `null` means the default step for master-equation runs.
    pub dt: Option<f64>,
    pub samples: usize,
}

impl ConfigJson {
    pub fn new(setup: &Setup, control: &StepControl) -> Self {
        let c = &setup.config;
        Self {
            xi: c.xi,
            lambda: c.lambda,
            gamma: c.gamma,
            eta: c.eta,
            interaction_time: c.duration(),
            measured_axis: vec3(&c.measured_axis()),
            probe_axis: vec3(&c.probe_axis),
            system_init: ket_bloch(&c.system_init),
            probe_init: ket_bloch(&c.probe_init),
            readout_axis: vec3(&c.readout().expect("validated config")),
            probe_self: setup.probe.map(|p| ProbeSelfJson {
                delta_p: p.delta_p,
                axis: vec3(&p.axis),
            }),
            environment: setup.env.map(|e| EnvironmentJson {
                kappa_s: e.kappa_s,
                kappa_p: e.kappa_p,
                system_axis: vec3(&e.system_axis),
                probe_axis: vec3(&e.probe_axis),
            }),
            chain_length: setup.chain_length,
            dt: control.dt,
            samples: control.samples,
        }
    }
}

#[derive(Serialize)]
pub struct DiagnosticsJson {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl From<&StateDiagnostics> for DiagnosticsJson {
    fn from(d: &StateDiagnostics) -> Self {
        Self {
            max_trace_error: d.trace_error,
            max_hermiticity_error: d.hermiticity_error,
            min_eigenvalue: d.min_eigenvalue,
        }
    }
}

#[derive(Serialize)]
pub struct CorrectedJson {
    pub probe_bloch: [f64; 3],
    pub pointer: f64,
    pub deviation: f64,
}

impl From<&CorrectedReadout> for CorrectedJson {
    fn from(c: &CorrectedReadout) -> Self {
        Self {
            probe_bloch: vec3(&c.probe_bloch),
            pointer: c.pointer,
            deviation: c.deviation,
        }
    }
}

/// Scalar content of a measurement report; the trajectory itself goes to CSV.
#[derive(Serialize)]
pub struct MeasurementJson {
    pub disturbance: f64,
    pub final_system_purity: f64,
    pub final_probe_purity: f64,
    pub final_system_max_eigenvalue: f64,
    pub final_probe_max_eigenvalue: f64,
    pub final_system_bloch: [f64; 3],
    pub final_probe_bloch: [f64; 3],
    pub final_pointer: f64,
    pub ideal_pointer: f64,
    pub pointer_deviation: f64,
    pub counter_rotated: Option<CorrectedJson>,
    pub trajectory_samples: usize,
    pub diagnostics: DiagnosticsJson,
}

impl From<&MeasurementReport> for MeasurementJson {
    fn from(r: &MeasurementReport) -> Self {
        Self {
            disturbance: r.disturbance,
            final_system_purity: r.final_system_purity,
            final_probe_purity: r.final_probe_purity,
            final_system_max_eigenvalue: r.final_system_max_eigenvalue,
            final_probe_max_eigenvalue: r.final_probe_max_eigenvalue,
            final_system_bloch: vec3(&r.final_system_bloch),
            final_probe_bloch: vec3(&r.final_probe_bloch),
            final_pointer: r.final_pointer,
            ideal_pointer: r.ideal_pointer,
            pointer_deviation: r.pointer_deviation,
            counter_rotated: r.counter_rotated.as_ref().map(CorrectedJson::from),
            trajectory_samples: r.trajectory.len(),
            diagnostics: (&r.trajectory.diagnostics).into(),
        }
    }
}

#[derive(Serialize)]
pub struct ChainJson {
    pub cumulative_disturbance: f64,
    pub worst_case_deviation: f64,
    pub average_deviation: f64,
    pub final_system_purity: f64,
    pub final_system_max_eigenvalue: f64,
    pub trajectory_samples: usize,
    pub diagnostics: DiagnosticsJson,
    pub per_cycle: Vec<MeasurementJson>,
}

impl From<&ChainReport> for ChainJson {
    fn from(c: &ChainReport) -> Self {
        Self {
            cumulative_disturbance: c.cumulative_disturbance,
            worst_case_deviation: c.worst_case_deviation,
            average_deviation: c.average_deviation,
            final_system_purity: c.final_system_purity,
            final_system_max_eigenvalue: c.final_system_max_eigenvalue,
            trajectory_samples: c.trajectory.len(),
            diagnostics: (&c.trajectory.diagnostics).into(),
            per_cycle: c.per_cycle.iter().map(MeasurementJson::from).collect(),
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum ResultJson {
    Single(MeasurementJson),
    Chain(ChainJson),
}

#[derive(Serialize)]
pub struct SweepRowJson {
    pub index: usize,
    pub value: f64,
    pub trajectory_path: String,
    pub config: ConfigJson,
    pub report: ResultJson,
}

#[derive(Serialize)]
pub struct IonTrapJson {
    pub j0: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta: f64,
    pub phi: f64,
    pub delta_range_multiple: f64,
    pub xi_min: f64,
    /// Seconds.
    pub interaction_time: f64,
}

impl IonTrapJson {
    pub fn new(p: &IonTrapParams, m: &IonTrapMapping) -> Self {
        Self {
            j0: p.j0,
            delta1: p.delta1,
            delta2: p.delta2,
            theta: p.theta,
            phi: p.phi,
            delta_range_multiple: p.delta_range_multiple,
            xi_min: p.xi_min(),
            interaction_time: m.interaction_time,
        }
    }
}

#[derive(Serialize)]
pub struct ReportJson {
    pub scenario: ScenarioKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iontrap: Option<IonTrapJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ResultJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<SweepParameter>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<SweepRowJson>>,
}
