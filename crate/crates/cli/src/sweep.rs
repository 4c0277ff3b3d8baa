//! One-parameter sweeps over a scenario.

use std::io::Write;

use cframe::gallery::ExampleName;
use cframe::report::Record;
use serde::Serialize;

use crate::error::CliError;
use crate::runner::{run_scenario, RunOptions};
use crate::scenario::{Kind, Scenario};

/// Table row summarizing the first record of each run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub residual_max: f64,
    pub verdict: bool,
}

fn integer(parameter: &str, v: f64) -> Result<u64, CliError> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
        Ok(v as u64)
    } else {
        Err(CliError::Config {
            path: Default::default(),
            message: format!("`{parameter}` needs nonnegative integer values, got {v}"),
        })
    }
}

/// Scenario with `parameter` set to `value`.
///
/// Addressable parameters: `seed`, `rtol`, `instances` (harness), `dims`
/// (ladder, one dimension per value), and any numeric input parameter of the
/// scenario or of its example.
pub fn apply(scn: &Scenario, parameter: &str, value: f64) -> Result<Scenario, CliError> {
    let mut s = scn.clone();
    match parameter {
        "seed" => s.seed = Some(integer(parameter, value)?),
        "rtol" => s.tolerances.rtol = Some(value),
        "instances" if s.kind == Kind::EquivalenceHarness => {
            s.inputs.instances = Some(integer(parameter, value)?)
        }
        "dims" if s.ladder.is_some() => {
            s.ladder.as_mut().expect("checked").dims = vec![integer(parameter, value)? as usize]
        }
        p if addressable(scn, p) => {
            s.inputs.params.insert(p.to_string(), value);
        }
        p => return Err(CliError::UnknownParameter(p.to_string())),
    }
    s.validate().map_err(|message| CliError::Config {
        path: s.base_dir.clone(),
        message,
    })?;
    Ok(s)
}

fn addressable(scn: &Scenario, p: &str) -> bool {
    if scn.inputs.params.contains_key(p) {
        return true;
    }
    if let Some(Ok(name)) = scn.inputs.example.as_deref().map(ExampleName::parse) {
        return name.defaults().iter().any(|(k, _)| *k == p);
    }
    scn.kind == Kind::DivergenceProbe
        && ["m_min", "m_max", "points", "tail_n"].contains(&p)
}

/// Runs the scenario once per value; returns all records in order and one
/// table row per value.
pub fn sweep(
    scn: &Scenario,
    parameter: &str,
    values: &[f64],
    opts: &RunOptions,
) -> Result<(Vec<Record>, Vec<SweepRow>), CliError> {
    if values.is_empty() {
        // Still reject parameters that could never be swept.
        apply(scn, parameter, 1.0).map(|_| ())?;
        return Ok((Vec::new(), Vec::new()));
    }
    let mut records = Vec::new();
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let s = apply(scn, parameter, v)?;
        let mut run_opts = *opts;
        match parameter {
            "seed" => run_opts.seed = None,
            "rtol" => run_opts.rtol = None,
            _ => {}
        }
        let recs = run_scenario(&s, &run_opts)?;
        let first = recs.first();
        rows.push(SweepRow {
            value: v,
            alpha: first.and_then(|r| r.alpha),
            beta: first.and_then(|r| r.beta),
            residual_max: first.map_or(0.0, Record::max_residual),
            verdict: recs.iter().all(|r| r.verdict),
        });
        records.extend(recs.into_iter().map(|mut r| {
            r.extra("sweep_parameter", parameter);
            r.extra("sweep_value", v);
            r
        }));
    }
    Ok((records, rows))
}

/// Writes the CSV table with header `value,alpha,beta,residual_max,verdict`.
pub fn write_table<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value", "alpha", "beta", "residual_max", "verdict"])?;
    let fmt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in rows {
        w.write_record([
            r.value.to_string(),
            fmt(r.alpha),
            fmt(r.beta),
            r.residual_max.to_string(),
            r.verdict.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
