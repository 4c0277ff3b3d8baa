//! Scenario files.
//!
//! ```toml
//! id = "onb"
//! kind = "frame_check"
//! seed = 7
//!
//! [tolerances]
//! rtol = 1e-10
//!
//! [inputs]
//! family = "fixtures/onb3.family"
//! ```
//!
//! Relative fixture paths resolve against the directory of the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    FrameCheck,
    KFrameCheck,
    WeakACheck,
    GraphCheck,
    EquivalenceHarness,
    DivergenceProbe,
    Gallery,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::FrameCheck => "frame_check",
            Kind::KFrameCheck => "k_frame_check",
            Kind::WeakACheck => "weak_a_check",
            Kind::GraphCheck => "graph_check",
            Kind::EquivalenceHarness => "equivalence_harness",
            Kind::DivergenceProbe => "divergence_probe",
            Kind::Gallery => "gallery",
        }
    }

    pub const ALL: [Kind; 7] = [
        Kind::FrameCheck,
        Kind::KFrameCheck,
        Kind::WeakACheck,
        Kind::GraphCheck,
        Kind::EquivalenceHarness,
        Kind::DivergenceProbe,
        Kind::Gallery,
    ];
}

/// Which equivalence table the harness evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Harness {
    /// Five K-frame characterizations on random `(psi, K)`.
    #[default]
    KFrame,
    /// Seven graph-norm characterizations on random square `(psi, A)`.
    Graph,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative pass floor of the lower frame bound.
    pub rtol: Option<f64>,
    /// Accepted distance of the fitted growth exponent from its prediction.
    pub slope_window: Option<f64>,
    /// Largest accepted tail bound of the square-summable series.
    pub tail_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub family: Option<PathBuf>,
    pub operator: Option<PathBuf>,
    pub example: Option<String>,
    /// Window, multiplier or ladder name for the chosen example.
    pub choice: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub instances: Option<u64>,
    pub harness: Option<Harness>,
}

/// Family used along a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderFamily {
    /// `psi = A_n e_k / sqrt(mu_k)` on unit blocks.
    #[default]
    OnbConstruction,
    /// The standard basis at every dimension.
    FixedBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    pub name: String,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub family: LadderFamily,
    pub points_per_block: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub kind: Kind,
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub inputs: Inputs,
    pub ladder: Option<LadderSpec>,
    pub sweep: Option<SweepSpec>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::MissingFixture(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|message| CliError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses and validates a scenario; fixture paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, String> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
        s.base_dir = base_dir.to_path_buf();
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("`id` must be nonempty".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("rtol", t.rtol),
            ("slope_window", t.slope_window),
            ("tail_max", t.tail_max),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("tolerance `{name}` must be positive, got {v}"));
                }
            }
        }
        let i = &self.inputs;
        let has_fixture_pair = i.family.is_some() && i.operator.is_some();
        let ok = match self.kind {
            Kind::FrameCheck => i.family.is_some() || i.example.is_some(),
            Kind::KFrameCheck | Kind::GraphCheck => has_fixture_pair || i.example.is_some(),
            Kind::WeakACheck => self.ladder.is_some() || has_fixture_pair || i.example.is_some(),
            Kind::EquivalenceHarness => {
                if self.seed.is_none() {
                    return Err("`seed` is required for equivalence_harness".into());
                }
                true
            }
            Kind::DivergenceProbe => ["p", "alpha", "beta"].iter().all(|k| i.params.contains_key(*k)),
            Kind::Gallery => i.example.is_some(),
        };
        if !ok {
            return Err(format!(
                "kind `{}` is missing its required inputs (see the scenario schema)",
                self.kind.as_str()
            ));
        }
        if i.operator.is_some() && i.family.is_none() {
            return Err("`inputs.operator` requires `inputs.family`".into());
        }
        if let Some(l) = &self.ladder {
            if l.dims.is_empty() {
                return Err("`ladder.dims` must be nonempty".into());
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
