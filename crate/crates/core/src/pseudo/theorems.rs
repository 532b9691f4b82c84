//! Two sufficient criteria for pseudorandomness on the hypergraph of all
//! `(n-1)`-subsets of `[n]`. Each certificate records the measured hypotheses,
//! the derived constants and the outcome of running every condition directly.

use serde::{Deserialize, Serialize};

use super::conditions::{certify_pseudorandom, PseudoReport};
use super::linear_forms::{linear_forms_deviation, LinearFormsResult};
use super::{ell_pseudorandom, PseudoParams, WeightFamily};
use crate::box_norms::{box_norm, lp_box_norm, root};
use crate::certificate::{Hypothesis, SearchMode, Verdict};
use crate::counting::HYPOTHESIS_TOL;
use crate::error::{Error, Result};
use crate::spaces::{ExtendedExponent, HypergraphSystem};

/// Samples drawn by the linear forms check when it cannot enumerate.
pub const LINEAR_FORMS_SAMPLES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub ell: u32,
    #[serde(with = "crate::certificate::float")]
    pub c_prime: f64,
    #[serde(with = "crate::certificate::float")]
    pub eta_prime: f64,
    /// Largest η the theorem admits.
    #[serde(with = "crate::certificate::float")]
    pub eta_cap: f64,
    /// `max_e ‖ν_e‖_{□_{ℓ,p}}`, only for the second criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremCertificate {
    pub theorem: String,
    pub n: usize,
    #[serde(with = "crate::certificate::float")]
    pub c: f64,
    pub p: ExtendedExponent,
    #[serde(with = "crate::certificate::float")]
    pub eta: f64,
    pub constants: TheoremConstants,
    pub hypotheses: Vec<Hypothesis>,
    pub hypotheses_hold: Verdict,
    pub linear_forms: LinearFormsResult,
    pub report: PseudoReport,
    /// Whether the derived family satisfies every condition, as checked.
    pub verdict: Verdict,
}

fn check_system(sys: &HypergraphSystem) -> Result<()> {
    if sys.n() < 3 || !sys.is_codegree_one_complete() {
        return Err(Error::WrongHypergraph);
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::BadParameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

/// The two-sided linear forms hypothesis; sampled patterns can refute it but
/// never confirm it.
fn linear_forms_hypotheses(lf: &LinearFormsResult, lower: f64, upper: f64, tol: f64) -> Vec<Hypothesis> {
    let soften = |h: Hypothesis| {
        if !lf.exhaustive && h.holds == Verdict::True {
            Hypothesis {
                holds: Verdict::Unknown,
                ..h
            }
        } else {
            h
        }
    };
    vec![
        soften(Hypothesis::at_most("linear_forms_max", lf.max_value, upper, tol)),
        soften(Hypothesis::at_least("linear_forms_min", lf.min_value, lower, tol)),
    ]
}

/// `λ` close to 1 in the linear forms sense and `φ` bounded in the
/// (ℓ,p)-box norm make `ν = λ + φ` pseudorandom with `ψ = φ + 1` and
/// constants `C' = (4C)^{nℓ}`, `η' = C'·η^{1/ℓ^{n-1}}`.
///
/// The linear forms hypothesis is compared against η with a tolerance of
/// `1e-9·η`, since η is typically far below any absolute slack.
#[allow(clippy::too_many_arguments)]
pub fn thm42_certificate(
    sys: &HypergraphSystem,
    lambda: &WeightFamily,
    phi: &WeightFamily,
    c: f64,
    p: ExtendedExponent,
    eta: f64,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<TheoremCertificate> {
    check_system(sys)?;
    check_eta(eta)?;
    let ell = ell_pseudorandom(c, p)?;
    let n = sys.n();
    let l = ell as f64;
    let eta_cap = (-(n as f64) * l.powi(n as i32) * (4.0 * c).ln()).exp();
    let c_prime = (4.0 * c).powf(n as f64 * l);
    let eta_prime = c_prime * root(eta, l.powi(n as i32 - 1));

    let lf = linear_forms_deviation(sys, lambda, ell, mode, LINEAR_FORMS_SAMPLES, seed)?;
    let mut hypotheses = vec![Hypothesis::at_most("eta_within_cap", eta, eta_cap, 0.0)];
    hypotheses.extend(linear_forms_hypotheses(&lf, 1.0 - eta, 1.0 + eta, 1e-9 * eta));
    for (k, e) in sys.edges().iter().enumerate() {
        let v = lp_box_norm(sys, e, phi.get(k), ell, p)?;
        hypotheses.push(Hypothesis::at_most(
            format!("phi_lp_box_norm{e:?}"),
            v,
            c,
            HYPOTHESIS_TOL * c,
        ));
    }
    let hypotheses_hold = Verdict::all(hypotheses.iter().map(|h| h.holds));

    let nu = lambda.add(phi)?;
    let psi = phi.shift(1.0)?;
    let params = PseudoParams::with_any_eta(c_prime, eta_prime, p)?;
    let report = certify_pseudorandom(sys, &nu, &psi, &params, mode, budget, seed)?;
    Ok(TheoremCertificate {
        theorem: "thm42".into(),
        n,
        c,
        p,
        eta,
        constants: TheoremConstants {
            ell,
            c_prime,
            eta_prime,
            eta_cap,
            m: None,
        },
        hypotheses,
        hypotheses_hold,
        linear_forms: lf,
        verdict: report.verdict,
        report,
    })
}

/// `ψ` satisfying the linear forms bounds `[1-η, C+η]`, `ψ` and `ν` bounded
/// in the (ℓ,p)-box norm and `‖ν_e - ψ_e‖_{□_ℓ} ≤ η(C·M)^{-(n-1)ℓ}` make `ν`
/// pseudorandom with constants `(C, nℓη)`.
#[allow(clippy::too_many_arguments)]
pub fn thm43_certificate(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    c: f64,
    p: ExtendedExponent,
    eta: f64,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<TheoremCertificate> {
    check_system(sys)?;
    check_eta(eta)?;
    let ell = ell_pseudorandom(c, p)?;
    let n = sys.n();
    let l = ell as f64;
    let eta_cap = 1.0 / (n as f64 * l);
    let eta_prime = n as f64 * l * eta;

    let lf = linear_forms_deviation(sys, psi, ell, mode, LINEAR_FORMS_SAMPLES, seed)?;
    let mut hypotheses = vec![Hypothesis::at_most("eta_within_cap", eta, eta_cap, 0.0)];
    hypotheses.extend(linear_forms_hypotheses(&lf, 1.0 - eta, c + eta, 1e-9 * eta));
    let mut nu_norms = Vec::new();
    for (k, e) in sys.edges().iter().enumerate() {
        let vn = lp_box_norm(sys, e, nu.get(k), ell, p)?;
        let vp = lp_box_norm(sys, e, psi.get(k), ell, p)?;
        let finite = Verdict::from_bool(vn.is_finite());
        let lower = Hypothesis::at_least(format!("nu_lp_box_norm{e:?}"), vn, 1.0, HYPOTHESIS_TOL);
        hypotheses.push(Hypothesis {
            holds: lower.holds.and(finite),
            ..lower
        });
        hypotheses.push(Hypothesis::at_most(
            format!("psi_lp_box_norm{e:?}"),
            vp,
            c,
            HYPOTHESIS_TOL * c,
        ));
        nu_norms.push(vn);
    }
    let m = nu_norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let close_bound = eta * (c * m).powf(-((n - 1) as f64) * l);
    for (k, e) in sys.edges().iter().enumerate() {
        let diff = nu.get(k).sub(psi.get(k))?;
        let b = box_norm(sys, e, &diff, ell)?.value;
        hypotheses.push(Hypothesis::at_most(
            format!("difference_box_norm{e:?}"),
            b,
            close_bound,
            1e-9 * close_bound,
        ));
    }
    let hypotheses_hold = Verdict::all(hypotheses.iter().map(|h| h.holds));

    let params = PseudoParams::with_any_eta(c, eta_prime, p)?;
    let report = certify_pseudorandom(sys, nu, psi, &params, mode, budget, seed)?;
    Ok(TheoremCertificate {
        theorem: "thm43".into(),
        n,
        c,
        p,
        eta,
        constants: TheoremConstants {
            ell,
            c_prime: c,
            eta_prime,
            eta_cap,
            m: Some(m),
        },
        hypotheses,
        hypotheses_hold,
        linear_forms: lf,
        verdict: report.verdict,
        report,
    })
}
