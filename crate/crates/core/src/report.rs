//! JSON-lines report records shared by every check.
//!
//! Non-finite floats serialize as `null`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::frame::{FrameCertificate, Residual};
use crate::kframe::EquivalenceTable;
use crate::weak::WeakFrameCertificate;

/// One JSON object per check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub scenario: String,
    pub check: String,
    pub kind: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub residuals: BTreeMap<String, Residual>,
    /// Named thresholds used by the check beyond the residual ones.
    pub thresholds: BTreeMap<String, f64>,
    pub rtol: f64,
    pub verdict: bool,
    pub instance_id: Option<u64>,
    pub extras: BTreeMap<String, Value>,
}

impl Record {
    pub fn new(scenario: &str, check: &str, kind: &str, rtol: f64, verdict: bool) -> Self {
        Self {
            scenario: scenario.to_string(),
            check: check.to_string(),
            kind: kind.to_string(),
            alpha: None,
            beta: None,
            residuals: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            rtol,
            verdict,
            instance_id: None,
            extras: BTreeMap::new(),
        }
    }

    pub fn from_certificate(scenario: &str, check: &str, cert: &FrameCertificate) -> Self {
        let mut r = Self::new(scenario, check, cert.kind.as_str(), cert.rtol, cert.verdict);
        r.alpha = Some(cert.alpha);
        r.beta = Some(cert.beta);
        r.residuals = cert.residuals.clone();
        r.thresholds.insert("alpha_floor".into(), cert.alpha_floor);
        r.extra("alpha_raw", cert.alpha_raw);
        if !cert.diagnostics.is_empty() {
            r.extra("diagnostics", &cert.diagnostics);
        }
        if !cert.notes.is_empty() {
            r.extra("notes", &cert.notes);
        }
        r
    }

    /// Ladder certificate with one sub-record per dimension under `per_dim`.
    pub fn from_ladder(scenario: &str, check: &str, cert: &WeakFrameCertificate) -> Self {
        let rtol = cert.per_dim.values().next().map_or(0.0, |c| c.rtol);
        let mut r = Self::new(scenario, check, "weak_a_frame", rtol, cert.verdict());
        r.alpha = Some(cert.uniform_alpha);
        r.beta = Some(cert.per_dim.values().map(|c| c.beta).fold(0.0, f64::max));
        for (n, c) in &cert.per_dim {
            for (name, res) in &c.residuals {
                r.residuals.insert(format!("{name}@{n}"), *res);
            }
        }
        r.thresholds
            .insert("stability_ratio".into(), crate::weak::STABILITY_RATIO);
        let per_dim: BTreeMap<String, Value> = cert
            .per_dim
            .iter()
            .map(|(n, c)| {
                let sub = Record::from_certificate(scenario, check, c);
                let mut v = serde_json::to_value(sub).expect("records serialize");
                if let Value::Object(ref mut o) = v {
                    o.insert("operator_norm".into(), to_value(cert.norms[n]));
                    o.remove("scenario");
                    o.remove("check");
                }
                (n.to_string(), v)
            })
            .collect();
        r.extra("per_dim", per_dim);
        r.extra("ladder", &cert.ladder);
        r.extra("stable", cert.stable);
        r.extra("max_alpha", cert.max_alpha);
        r
    }

    /// Equivalence table; the verdict is the agreement flag.
    pub fn from_table(scenario: &str, check: &str, kind: &str, table: &EquivalenceTable, rtol: f64) -> Self {
        let mut r = Self::new(scenario, check, kind, rtol, table.agreement);
        let preds: BTreeMap<String, bool> = table.predicates.iter().cloned().collect();
        r.extra("predicates", preds);
        r.extra("order", table.predicates.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
        r.extra("agreement", table.agreement);
        r.extra("common_value", table.verdict());
        r.extra("diagnostics", &table.diagnostics);
        r.thresholds
            .insert("factorization".into(), crate::FACTORIZATION_THRESHOLD);
        r.thresholds
            .insert("rank_test".into(), crate::kframe::RANK_TEST_RTOL);
        r
    }

    pub fn with_instance(mut self, id: u64) -> Self {
        self.instance_id = Some(id);
        self
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.extras.insert(key.to_string(), to_value(value));
        self
    }

    /// Largest residual value, 0 when there are none.
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    /// Writes the record followed by a newline in a single call.
    pub fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut line = self.to_line();
        line.push('\n');
        out.write_all(line.as_bytes())
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("values serialize")
}
