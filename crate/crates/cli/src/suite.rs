//! Suite files: a list of instances, loaded or generated, and the checks to
//! run on them.
//!
//! ```json
//! {"name": "example",
//!  "instances": [{"label": "ones", "generate": {"n": 3, "r": 2, "atoms": 2, "kind": "ones", "seed": 0}},
//!                {"label": "file", "path": "instances/triangle.json"}],
//!  "checks": [{"check": "pseudorandom", "instance": "ones", "c": 1, "eta": 0.1, "p": "inf"}]}
//! ```
//!
//! Paths are relative to the suite file.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use boxlab_core::box_norms::Method;
use boxlab_core::generators::GenSpec;
use boxlab_core::{ExtendedExponent, SearchMode, Verdict};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::{self, generated, load_instance, read_json, Loaded, PseudoOptions};
use crate::error::{CliError, CliResult};
use crate::report::{CheckResult, RunReport, Timing};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub name: String,
    pub instances: Vec<InstanceSource>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSource {
    pub label: String,
    #[serde(flatten)]
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Path(PathBuf),
    Generate(GenSpec),
}

fn default_restarts() -> usize {
    32
}

fn default_mode() -> SearchMode {
    SearchMode::Exact
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoSpec {
    pub c: f64,
    pub eta: f64,
    pub p: ExtendedExponent,
    #[serde(default)]
    pub ell: Option<u32>,
    #[serde(default = "default_mode")]
    pub mode: SearchMode,
    #[serde(default = "default_restarts")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

impl PseudoSpec {
    fn options(&self) -> PseudoOptions {
        PseudoOptions {
            c: self.c,
            eta: self.eta,
            p: self.p,
            ell: self.ell,
            mode: self.mode,
            budget: self.budget,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    BoxNorm {
        instance: String,
        #[serde(default)]
        edge: Option<Vec<usize>>,
        ell: u32,
        #[serde(default)]
        p: Option<ExtendedExponent>,
        #[serde(default)]
        method: Option<Method>,
    },
    BoxNormOracle {
        instance: String,
        ell: u32,
    },
    CutNorm {
        instance: String,
        #[serde(default)]
        edge: Option<Vec<usize>>,
        #[serde(default = "default_mode")]
        mode: SearchMode,
        #[serde(default = "default_restarts")]
        restarts: usize,
        #[serde(default)]
        seed: u64,
    },
    Gcs {
        instance: String,
        edge: Vec<usize>,
        ell: u32,
    },
    VonNeumann {
        instance: String,
        c: f64,
        p: ExtendedExponent,
    },
    Counting {
        instance: String,
        other: String,
        c: f64,
        p: ExtendedExponent,
    },
    Pseudorandom {
        instance: String,
        #[serde(default)]
        psi: Option<String>,
        #[serde(flatten)]
        params: PseudoSpec,
    },
    Thm42 {
        lambda: String,
        phi: String,
        #[serde(flatten)]
        params: PseudoSpec,
    },
    Thm43 {
        nu: String,
        psi: String,
        #[serde(flatten)]
        params: PseudoSpec,
    },
    MeasureEta {
        instance: String,
        ell: u32,
        #[serde(default = "default_mode")]
        mode: SearchMode,
        max: f64,
    },
}

impl CheckSpec {
    fn kind(&self) -> &'static str {
        match self {
            Self::BoxNorm { .. } => "box_norm",
            Self::BoxNormOracle { .. } => "box_norm_oracle",
            Self::CutNorm { .. } => "cut_norm",
            Self::Gcs { .. } => "gcs",
            Self::VonNeumann { .. } => "von_neumann",
            Self::Counting { .. } => "counting",
            Self::Pseudorandom { .. } => "pseudorandom",
            Self::Thm42 { .. } => "thm42",
            Self::Thm43 { .. } => "thm43",
            Self::MeasureEta { .. } => "measure_eta",
        }
    }

    fn labels(&self) -> Vec<&str> {
        match self {
            Self::BoxNorm { instance, .. }
            | Self::BoxNormOracle { instance, .. }
            | Self::CutNorm { instance, .. }
            | Self::Gcs { instance, .. }
            | Self::VonNeumann { instance, .. }
            | Self::MeasureEta { instance, .. } => vec![instance],
            Self::Counting { instance, other, .. } => vec![instance, other],
            Self::Pseudorandom { instance, psi, .. } => {
                let mut v = vec![instance.as_str()];
                v.extend(psi.as_deref());
                v
            }
            Self::Thm42 { lambda, phi, .. } => vec![lambda, phi],
            Self::Thm43 { nu, psi, .. } => vec![nu, psi],
        }
    }

    fn run(&self, by_label: &HashMap<&str, &Loaded>) -> CliResult<Vec<CheckResult>> {
        let get = |label: &str| &by_label[label].instance;
        Ok(match self {
            Self::BoxNorm {
                instance,
                edge,
                ell,
                p,
                method,
            } => commands::norm(
                get(instance),
                edge.as_deref(),
                *ell,
                *p,
                method.unwrap_or(Method::Recursive),
            )?,
            Self::BoxNormOracle { instance, ell } => commands::norm_oracle(get(instance), *ell)?,
            Self::CutNorm {
                instance,
                edge,
                mode,
                restarts,
                seed,
            } => commands::cutnorm(get(instance), edge.as_deref(), *mode, *restarts, *seed)?,
            Self::Gcs { instance, edge, ell } => vec![commands::gcs(get(instance), edge, *ell)?],
            Self::VonNeumann { instance, c, p } => {
                vec![commands::vonneumann(get(instance), *c, *p)?]
            }
            Self::Counting { instance, other, c, p } => {
                vec![commands::counting(get(instance), get(other), *c, *p)?]
            }
            Self::Pseudorandom { instance, psi, params } => vec![commands::pseudorandom(
                get(instance),
                psi.as_deref().map(get),
                &params.options(),
            )?],
            Self::Thm42 { lambda, phi, params } => {
                vec![commands::thm42(get(lambda), get(phi), &params.options())?]
            }
            Self::Thm43 { nu, psi, params } => {
                vec![commands::thm43(get(nu), get(psi), &params.options())?]
            }
            Self::MeasureEta {
                instance,
                ell,
                mode,
                max,
            } => vec![commands::eta_at_most(get(instance), *ell, *mode, *max)?],
        })
    }
}

pub fn load_suite(path: &Path) -> CliResult<SuiteSpec> {
    let (_, value) = read_json(path)?;
    let spec: SuiteSpec =
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut seen = HashMap::new();
    for (i, inst) in spec.instances.iter().enumerate() {
        if seen.insert(inst.label.as_str(), i).is_some() {
            return Err(CliError::Usage(format!(
                "{}: duplicate instance label {:?}",
                path.display(),
                inst.label
            )));
        }
    }
    for (i, check) in spec.checks.iter().enumerate() {
        for label in check.labels() {
            if !seen.contains_key(label) {
                return Err(CliError::Usage(format!(
                    "{}: check {i} refers to unknown instance {label:?}",
                    path.display()
                )));
            }
        }
    }
    Ok(spec)
}

/// Runs every check of a suite. Checks run in parallel and are reported in
/// file order; a check that errors is reported as failing with the message.
pub fn run_suite(path: &Path, command: Vec<String>, timings: bool) -> CliResult<RunReport> {
    let start = Instant::now();
    let spec = load_suite(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let loaded: Vec<Loaded> = spec
        .instances
        .iter()
        .map(|inst| match &inst.source {
            Source::Path(p) => load_instance(&base.join(p), inst.label.clone()),
            Source::Generate(g) => generated(inst.label.clone(), g),
        })
        .collect::<CliResult<_>>()?;
    let by_label: HashMap<&str, &Loaded> = loaded.iter().map(|l| (l.label.as_str(), l)).collect();
    let outcomes: Vec<(Vec<CheckResult>, f64)> = spec
        .checks
        .par_iter()
        .enumerate()
        .map(|(i, check)| {
            let t = Instant::now();
            let prefix = format!("{i}:{}", check.kind());
            let results = match check.run(&by_label) {
                Ok(rs) => rs
                    .into_iter()
                    .map(|r| CheckResult {
                        name: format!("{prefix}:{}", r.name),
                        ..r
                    })
                    .collect(),
                Err(e) => vec![CheckResult::verdict(
                    prefix,
                    Verdict::False,
                    SearchMode::Exact,
                    json!({"error": e.to_string()}),
                )],
            };
            (results, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut report = RunReport::new(
        command,
        loaded.iter().map(Loaded::digest).collect(),
        outcomes.iter().flat_map(|(r, _)| r.clone()).collect(),
    );
    if timings {
        let mut t: Vec<Timing> = spec
            .checks
            .iter()
            .zip(&outcomes)
            .enumerate()
            .map(|(i, (c, (_, secs)))| Timing {
                name: format!("{i}:{}", c.kind()),
                seconds: *secs,
            })
            .collect();
        t.push(Timing {
            name: "total".into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        report.timings = Some(t);
    }
    Ok(report)
}
