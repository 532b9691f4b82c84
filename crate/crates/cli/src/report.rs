//! The JSON run report written by every subcommand except `gen`.

use boxlab_core::{SearchMode, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Name of the tool as recorded in reports.
pub const TOOL: &str = "boxlab";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDigest {
    pub label: String,
    pub sha256: String,
}

/// Outcome of one check. Measurements without an inequality leave `rhs`
/// and `slack` empty and always hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub holds: Verdict,
    #[serde(with = "opt_float", default)]
    pub lhs: Option<f64>,
    #[serde(with = "opt_float", default)]
    pub rhs: Option<f64>,
    #[serde(with = "opt_float", default)]
    pub slack: Option<f64>,
    pub mode: SearchMode,
    pub detail: Value,
}

impl CheckResult {
    pub fn measurement(name: impl Into<String>, value: f64, detail: Value) -> Self {
        Self {
            name: name.into(),
            holds: Verdict::True,
            lhs: Some(value),
            rhs: None,
            slack: None,
            mode: SearchMode::Exact,
            detail,
        }
    }

    /// `lhs ≤ rhs` with a verdict computed by the caller.
    pub fn inequality(
        name: impl Into<String>,
        holds: Verdict,
        lhs: f64,
        rhs: f64,
        mode: SearchMode,
        detail: Value,
    ) -> Self {
        Self {
            name: name.into(),
            holds,
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(rhs - lhs),
            mode,
            detail,
        }
    }

    pub fn verdict(name: impl Into<String>, holds: Verdict, mode: SearchMode, detail: Value) -> Self {
        Self {
            name: name.into(),
            holds,
            lhs: None,
            rhs: None,
            slack: None,
            mode,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub instances: Vec<InstanceDigest>,
    pub checks: Vec<CheckResult>,
    /// Wall-clock times, only with `--timings` since they break reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
    pub verdict: Verdict,
}

impl RunReport {
    pub fn new(command: Vec<String>, instances: Vec<InstanceDigest>, checks: Vec<CheckResult>) -> Self {
        let verdict = Verdict::all(checks.iter().map(|c| c.holds));
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            instances,
            checks,
            timings: None,
            verdict,
        }
    }

    /// 0 when every check holds, 1 when any fails, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::True => 0,
            Verdict::False => 1,
            Verdict::Unknown => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// [`boxlab_core::certificate::float`] for optional values; `None` is `null`.
mod opt_float {
    use boxlab_core::certificate::float;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => float::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "float")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
