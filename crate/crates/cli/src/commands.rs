//! Check evaluators shared by the subcommands and the suite runner.

use std::path::Path;

use boxlab_core::box_norms::{box_norm, box_norm_by, gcs_check, lp_box_norm, GcsFamily, Method};
use boxlab_core::counting::{counting_lemma_certificate, von_neumann_certificate, FunctionAssignment};
use boxlab_core::cut_norms::cut_norm;
use boxlab_core::generators::{generate, GenSpec};
use boxlab_core::pseudo::{
    certify_pseudorandom, linear_forms_deviation, thm42_certificate, thm43_certificate, PseudoParams,
    TheoremCertificate, WeightFamily,
};
use boxlab_core::{Certificate, ExtendedExponent, Instance, OmegaIndex, SearchMode, Verdict};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::report::{CheckResult, InstanceDigest};

/// Patterns sampled by [`eta_at_most`] when it cannot enumerate.
const ETA_SAMPLES: usize = 1024;

/// An instance together with the label and digest recorded in reports.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub label: String,
    pub instance: Instance,
    pub sha256: String,
}

impl Loaded {
    pub fn digest(&self) -> InstanceDigest {
        InstanceDigest {
            label: self.label.clone(),
            sha256: self.sha256.clone(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a JSON file, reporting syntax errors with their line and column.
pub fn read_json(path: &Path) -> CliResult<(Vec<u8>, Value)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| CliError::parse(path, &e))?;
    Ok((bytes, value))
}

pub fn load_instance(path: &Path, label: impl Into<String>) -> CliResult<Loaded> {
    let (bytes, _) = read_json(path)?;
    let instance = Instance::from_json_bytes(&bytes).map_err(|source| CliError::Invalid {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Loaded {
        label: label.into(),
        instance,
        sha256: sha256_hex(&bytes),
    })
}

/// Generated instances are digested through their canonical JSON text.
pub fn generated(label: impl Into<String>, spec: &GenSpec) -> CliResult<Loaded> {
    let instance = generate(spec)?;
    let sha256 = sha256_hex(instance.to_json_string().as_bytes());
    Ok(Loaded {
        label: label.into(),
        instance,
        sha256,
    })
}

fn family(inst: &Instance) -> CliResult<WeightFamily> {
    Ok(WeightFamily::new(&inst.system, inst.assignment()?)?)
}

fn same_system(a: &Instance, b: &Instance) -> CliResult<()> {
    if a.system != b.system {
        return Err(CliError::Usage(
            "the two instances must share one hypergraph system".into(),
        ));
    }
    Ok(())
}

fn edges_or_all(inst: &Instance, edge: Option<&[usize]>) -> Vec<Vec<usize>> {
    match edge {
        Some(e) => vec![e.to_vec()],
        None => inst.system.edges().to_vec(),
    }
}

fn function<'a>(inst: &'a Instance, e: &[usize]) -> CliResult<&'a boxlab_core::EdgeFunction> {
    inst.function_on(e)
        .ok_or_else(|| CliError::Usage(format!("no function on edge {e:?}")))
}

fn from_certificate(name: String, cert: &Certificate) -> CheckResult {
    let holds = Verdict::from_bool(cert.holds);
    CheckResult::inequality(
        name,
        holds,
        cert.lhs,
        cert.rhs,
        cert.mode,
        serde_json::to_value(cert).expect("certificate serializes"),
    )
}

/// `‖f_e‖_{□_ℓ}`, and `‖f_e‖_{□_{ℓ,p}}` when `p` is given.
pub fn norm(
    inst: &Instance,
    edge: Option<&[usize]>,
    ell: u32,
    p: Option<ExtendedExponent>,
    method: Method,
) -> CliResult<Vec<CheckResult>> {
    let sys = &inst.system;
    edges_or_all(inst, edge)
        .iter()
        .map(|e| {
            let f = function(inst, e)?;
            let r = box_norm_by(sys, e, f, ell, method)?;
            let (name, value) = match p {
                Some(p) => (format!("lp_box_norm{e:?}"), lp_box_norm(sys, e, f, ell, p)?),
                None => (format!("box_norm{e:?}"), r.value),
            };
            Ok(CheckResult::measurement(
                name,
                value,
                json!({"edge": e, "ell": ell, "p": p, "box_norm": r}),
            ))
        })
        .collect()
}

/// Recursive against direct box norm on every edge, to `1e-9` relative.
pub fn norm_oracle(inst: &Instance, ell: u32) -> CliResult<Vec<CheckResult>> {
    let sys = &inst.system;
    edges_or_all(inst, None)
        .iter()
        .map(|e| {
            let f = function(inst, e)?;
            let a = box_norm_by(sys, e, f, ell, Method::Recursive)?.value;
            let b = box_norm_by(sys, e, f, ell, Method::Direct)?.value;
            let diff = (a - b).abs();
            let tol = 1e-9 * a.abs().max(b.abs());
            Ok(CheckResult::inequality(
                format!("box_norm_methods_agree{e:?}"),
                Verdict::from_bool(diff <= tol),
                diff,
                tol,
                SearchMode::Exact,
                json!({"edge": e, "ell": ell, "recursive": a, "direct": b}),
            ))
        })
        .collect()
}

/// `‖f_e‖_cut ≤ ‖f_e‖_{□_2}`, reporting the cut witness.
pub fn cutnorm(
    inst: &Instance,
    edge: Option<&[usize]>,
    mode: SearchMode,
    restarts: usize,
    seed: u64,
) -> CliResult<Vec<CheckResult>> {
    let sys = &inst.system;
    edges_or_all(inst, edge)
        .iter()
        .map(|e| {
            let f = function(inst, e)?;
            let r = cut_norm(sys, e, f, mode, restarts, seed)?;
            let b = box_norm(sys, e, f, 2)?.value;
            let tol = 1e-12 * f.max_abs();
            // A heuristic value is only a lower bound on the cut norm.
            let holds = match (r.value <= b + tol, r.mode) {
                (false, _) => Verdict::False,
                (true, SearchMode::Exact) => Verdict::True,
                (true, SearchMode::Heuristic) => Verdict::Unknown,
            };
            Ok(CheckResult::inequality(
                format!("cut_norm{e:?}"),
                holds,
                r.value,
                b,
                r.mode,
                json!({"edge": e, "cut_norm": r}),
            ))
        })
        .collect()
}

/// The Gowers–Cauchy–Schwarz bound on `e`. The functions listed on `e` are
/// taken in ω rank order; a single function is used for every ω.
pub fn gcs(inst: &Instance, edge: &[usize], ell: u32) -> CliResult<CheckResult> {
    let fs: Vec<_> = inst.functions.iter().filter(|f| f.edge() == edge).collect();
    let omegas = OmegaIndex::all(edge, ell as usize);
    let family: GcsFamily = match fs.len() {
        0 => return Err(CliError::Usage(format!("no function on edge {edge:?}"))),
        1 => omegas.into_iter().map(|w| (w, fs[0].clone())).collect(),
        k if k == omegas.len() => omegas.into_iter().zip(fs.into_iter().cloned()).collect(),
        k => {
            return Err(CliError::Usage(format!(
                "{k} functions on {edge:?}; expected 1 or {}",
                omegas.len()
            )))
        }
    };
    let cert = gcs_check(&inst.system, edge, &family, ell)?;
    Ok(from_certificate(format!("gcs{edge:?}"), &cert))
}

pub fn vonneumann(inst: &Instance, c: f64, p: ExtendedExponent) -> CliResult<CheckResult> {
    let assign = FunctionAssignment::new(&inst.system, inst.assignment()?)?;
    let cert = von_neumann_certificate(&inst.system, &assign, c, p)?;
    Ok(CheckResult::inequality(
        "von_neumann",
        Verdict::from_bool(cert.holds),
        cert.lhs,
        cert.rhs,
        SearchMode::Exact,
        serde_json::to_value(&cert).expect("certificate serializes"),
    ))
}

pub fn counting(f: &Instance, g: &Instance, c: f64, p: ExtendedExponent) -> CliResult<CheckResult> {
    same_system(f, g)?;
    let fa = FunctionAssignment::new(&f.system, f.assignment()?)?;
    let ga = FunctionAssignment::new(&g.system, g.assignment()?)?;
    let cert = counting_lemma_certificate(&f.system, &fa, &ga, c, p)?;
    Ok(from_certificate("counting_lemma".into(), &cert))
}

pub struct PseudoOptions {
    pub c: f64,
    pub eta: f64,
    pub p: ExtendedExponent,
    pub ell: Option<u32>,
    pub mode: SearchMode,
    pub budget: usize,
    pub seed: u64,
}

/// Every condition for `ν` against `ψ` (constant 1 when absent).
pub fn pseudorandom(nu: &Instance, psi: Option<&Instance>, o: &PseudoOptions) -> CliResult<CheckResult> {
    let sys = &nu.system;
    let nu_f = family(nu)?;
    let psi_f = match psi {
        Some(psi) => {
            same_system(nu, psi)?;
            family(psi)?
        }
        None => WeightFamily::constant(sys, 1.0)?,
    };
    let mut params = PseudoParams::new(o.c, o.eta, o.p)?;
    if let Some(ell) = o.ell {
        params = params.with_ell(ell)?;
    }
    let report = certify_pseudorandom(sys, &nu_f, &psi_f, &params, o.mode, o.budget, o.seed)?;
    let mode = if report.all_exact() {
        SearchMode::Exact
    } else {
        SearchMode::Heuristic
    };
    Ok(CheckResult::verdict(
        "pseudorandom",
        report.verdict,
        mode,
        serde_json::to_value(&report).expect("report serializes"),
    ))
}

fn from_theorem(cert: &TheoremCertificate) -> CheckResult {
    let mode = if cert.report.all_exact() && cert.linear_forms.exhaustive {
        SearchMode::Exact
    } else {
        SearchMode::Heuristic
    };
    CheckResult::verdict(
        cert.theorem.clone(),
        cert.verdict,
        mode,
        serde_json::to_value(cert).expect("certificate serializes"),
    )
}

pub fn thm42(lambda: &Instance, phi: &Instance, o: &PseudoOptions) -> CliResult<CheckResult> {
    same_system(lambda, phi)?;
    let cert = thm42_certificate(
        &lambda.system,
        &family(lambda)?,
        &family(phi)?,
        o.c,
        o.p,
        o.eta,
        o.mode,
        o.budget,
        o.seed,
    )?;
    Ok(from_theorem(&cert))
}

pub fn thm43(nu: &Instance, psi: &Instance, o: &PseudoOptions) -> CliResult<CheckResult> {
    same_system(nu, psi)?;
    let cert = thm43_certificate(
        &nu.system,
        &family(nu)?,
        &family(psi)?,
        o.c,
        o.p,
        o.eta,
        o.mode,
        o.budget,
        o.seed,
    )?;
    Ok(from_theorem(&cert))
}

/// The measured linear forms deviation is at most `max`. Sampled patterns
/// can refute this but not confirm it.
pub fn eta_at_most(inst: &Instance, ell: u32, mode: SearchMode, max: f64) -> CliResult<CheckResult> {
    let lf = linear_forms_deviation(&inst.system, &family(inst)?, ell, mode, ETA_SAMPLES, 0)?;
    let eta = lf.deviation();
    let holds = match (eta <= max, lf.exhaustive) {
        (false, _) => Verdict::False,
        (true, true) => Verdict::True,
        (true, false) => Verdict::Unknown,
    };
    let mode = if lf.exhaustive {
        SearchMode::Exact
    } else {
        SearchMode::Heuristic
    };
    Ok(CheckResult::inequality(
        "measured_eta",
        holds,
        eta,
        max,
        mode,
        json!({"ell": ell, "linear_forms": lf}),
    ))
}
