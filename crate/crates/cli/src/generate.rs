//! `gen`: writes example fixtures and a ready-to-run scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cframe::gallery::{generate, ExampleName, ExampleSpec, Generated};
use cframe::io::{save_family, save_matrix};

use crate::error::CliError;
use crate::scenario::{Inputs, Kind, Scenario, Tolerances};

/// Generates `example` into `dir` and returns the written paths, scenario last.
pub fn gen(
    example: &str,
    params: &BTreeMap<String, f64>,
    choice: Option<String>,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let name = ExampleName::parse(example)?;
    let spec = ExampleSpec::with_overrides(name, params, choice.clone())?;
    std::fs::create_dir_all(dir)?;
    let stem = name.as_str();
    let mut written = Vec::new();
    let inputs = match generate(&spec)? {
        Generated::Divergence(p) => Inputs {
            params: [("p", p.p), ("alpha", p.alpha), ("beta", p.beta)]
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            ..Default::default()
        },
        Generated::Family {
            psi,
            operator,
            base,
        } => {
            let fam = PathBuf::from(format!("{stem}.family"));
            let op = PathBuf::from(format!("{stem}.operator"));
            save_family(&dir.join(&fam), &psi)?;
            save_matrix(&dir.join(&op), &operator)?;
            written.push(dir.join(&fam));
            written.push(dir.join(&op));
            if let Some(b) = base {
                let p = dir.join(format!("{stem}.base.family"));
                save_family(&p, &b)?;
                written.push(p);
            }
            Inputs {
                family: Some(fam),
                operator: Some(op),
                ..Default::default()
            }
        }
    };
    let kind = match name {
        ExampleName::DivergenceFamily => Kind::DivergenceProbe,
        ExampleName::MultiplicationFrame => Kind::KFrameCheck,
        _ => Kind::WeakACheck,
    };
    let scn = Scenario {
        id: stem.to_string(),
        kind,
        seed: None,
        tolerances: Tolerances::default(),
        inputs,
        ladder: None,
        sweep: None,
        base_dir: PathBuf::new(),
    };
    let text = toml::to_string(&scn).map_err(|e| CliError::Config {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let path = dir.join(format!("{stem}.scenario.toml"));
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
