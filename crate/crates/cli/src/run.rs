//! Scenario execution.

use std::path::Path;

use qprobe_core::evolve::{StepControl, TrajectoryRecord};
use qprobe_core::iontrap::to_measurement_config;
use qprobe_core::protocol::{run_repeated, run_single};
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::{
    indexed_path, write_json, write_trajectory, ConfigJson, IonTrapJson, MeasurementJson,
    ReportJson, ResultJson, SweepRowJson,
};
use crate::scenario::{Scenario, ScenarioKind, Setup};

/// One finished run, before anything is written.
struct Outcome {
    result: ResultJson,
    trajectory: TrajectoryRecord,
    summary: String,
}

fn execute(setup: &Setup, control: &StepControl) -> qprobe_core::error::Result<Outcome> {
    let Setup {
        config,
        probe,
        env,
        chain_length,
    } = setup;
    match chain_length {
        Some(n) => {
            let c = run_repeated(config, *n, probe.as_ref(), env.as_ref(), control)?;
            let summary = format!(
                "cycles={n} cumulative_disturbance={:.6} worst_case_deviation={:.6} \
                 average_deviation={:.6} system_max_eigenvalue={:.6}",
                c.cumulative_disturbance,
                c.worst_case_deviation,
                c.average_deviation,
                c.final_system_max_eigenvalue
            );
            Ok(Outcome {
                result: ResultJson::Chain((&c).into()),
                trajectory: c.trajectory,
                summary,
            })
        }
        None => {
            let r = run_single(config, probe.as_ref(), env.as_ref(), control)?;
            let mut summary = format!(
                "disturbance={:.6} pointer={:.6} ideal={:.6} deviation={:.6} \
                 system_max_eigenvalue={:.6} probe_max_eigenvalue={:.6}",
                r.disturbance,
                r.final_pointer,
                r.ideal_pointer,
                r.pointer_deviation,
                r.final_system_max_eigenvalue,
                r.final_probe_max_eigenvalue
            );
            if let Some(c) = &r.counter_rotated {
                summary.push_str(&format!(" counter_rotated_deviation={:.6}", c.deviation));
            }
            Ok(Outcome {
                result: ResultJson::Single(MeasurementJson::from(&r)),
                trajectory: r.trajectory,
                summary,
            })
        }
    }
}

/// How the report refers to a trajectory file: by name when the two files
/// share a directory, so reports do not depend on where they were written.
fn reference(trajectory: &Path, report: &Path) -> String {
    if trajectory.parent() == report.parent() {
        if let Some(name) = trajectory.file_name() {
            return name.to_string_lossy().into_owned();
        }
    }
    trajectory.display().to_string()
}

pub fn run(scenario: &Scenario, config_path: &Path) -> Result<(), CliError> {
    let core_err = |e| CliError::from_core(config_path, e);
    let config_err = |message: String| CliError::Config {
        path: config_path.to_path_buf(),
        message,
    };
    let mut report = ReportJson {
        scenario: scenario.kind,
        iontrap: None,
        config: None,
        trajectory_path: None,
        report: None,
        sweep_parameter: None,
        rows: None,
    };

    let setup = match (scenario.kind, &scenario.setup, &scenario.iontrap) {
        (ScenarioKind::Iontrap, _, Some(params)) => {
            let mapping = to_measurement_config(params).map_err(core_err)?;
            println!(
                "xi={:.12} gamma={:.12} eta={:.12} delta_p={:.12} interaction_time_s={:.12e}",
                mapping.config.xi,
                mapping.config.gamma,
                mapping.config.eta,
                mapping.probe_self.map_or(0.0, |p| p.delta_p),
                mapping.interaction_time
            );
            report.iontrap = Some(IonTrapJson::new(params, &mapping));
            Setup {
                config: mapping.config,
                probe: mapping.probe_self,
                env: None,
                chain_length: None,
            }
        }
        (_, Some(setup), _) => setup.clone(),
        _ => unreachable!("resolve guarantees a setup"),
    };

    if let Some(sweep) = &scenario.sweep {
        let points = sweep
            .values
            .iter()
            .map(|&v| setup.with_parameter(sweep.parameter, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(config_err)?;
        let outcomes: Vec<_> = points
            .par_iter()
            .map(|s| execute(s, &scenario.control))
            .collect();
        let mut rows = Vec::with_capacity(points.len());
        for (index, (point, outcome)) in points.iter().zip(outcomes).enumerate() {
            let outcome = outcome.map_err(core_err)?;
            let path = indexed_path(&scenario.trajectory_path, index);
            write_trajectory(&path, &outcome.trajectory)?;
            let value = sweep.values[index];
            println!(
                "[{index}] {}={value} {}",
                sweep.parameter.name(),
                outcome.summary
            );
            rows.push(SweepRowJson {
                index,
                value,
                trajectory_path: reference(&path, &scenario.report_path),
                config: ConfigJson::new(point, &scenario.control),
                report: outcome.result,
            });
        }
        report.sweep_parameter = Some(sweep.parameter);
        report.rows = Some(rows);
    } else {
        let outcome = execute(&setup, &scenario.control).map_err(core_err)?;
        write_trajectory(&scenario.trajectory_path, &outcome.trajectory)?;
        println!("{}", outcome.summary);
        report.config = Some(ConfigJson::new(&setup, &scenario.control));
        report.trajectory_path = Some(reference(&scenario.trajectory_path, &scenario.report_path));
        report.report = Some(outcome.result);
    }
    write_json(&scenario.report_path, &report)?;
    println!("wrote {}", scenario.report_path.display());
    Ok(())
}

/// Default output stem: the config file name without extension.
pub fn stem_of(config: &Path) -> String {
    config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "qprobe".to_string())
}
