//! The supremum bounds behind the two criteria, evaluated directly.
//!
//! In all four, `e = [n] \ {i}` is the base edge, its coordinates are shared
//! and `x_i` is replicated `ℓ` times; a slot is a pair `(e', ω)` with
//! `e' ≠ e`, reading `x_{e'\{i}}` and `x_i^{(ω)}`.

use serde::{Deserialize, Serialize};

use super::sup::{sup_multilinear, Families, Selector, Slot, SupProblem, SupWitness};
use super::WeightFamily;
use crate::certificate::{SearchMode, Verdict};
use crate::counting::HYPOTHESIS_TOL;
use crate::error::{Error, Result};
use crate::spaces::{EdgeFunction, HypergraphSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaOracle {
    pub name: String,
    pub base_edge: Vec<usize>,
    #[serde(with = "crate::certificate::float")]
    pub value: f64,
    #[serde(with = "crate::certificate::float")]
    pub bound: f64,
    pub holds: Verdict,
    pub mode: SearchMode,
    pub witness: SupWitness,
    pub notes: Vec<String>,
}

/// Settings shared by every oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleSearch {
    pub mode: SearchMode,
    pub budget: usize,
    pub seed: u64,
}

fn slots(
    sys: &HypergraphSystem,
    base: &[usize],
    ell: u32,
    choices: &[Selector],
    skip: Option<(usize, usize)>,
) -> Vec<Slot> {
    let mut out = Vec::new();
    for (k, e) in sys.edges().iter().enumerate() {
        if e.as_slice() == base {
            continue;
        }
        for w in 0..ell as usize {
            if skip == Some((k, w)) {
                continue;
            }
            out.push(Slot {
                edge: e.clone(),
                choices: choices.to_vec(),
                replica: w,
            });
        }
    }
    out
}

fn base_of(sys: &HypergraphSystem, k: usize) -> Result<Vec<usize>> {
    if sys.n() < 3 || !sys.is_codegree_one_complete() {
        return Err(Error::WrongHypergraph);
    }
    sys.edges()
        .get(k)
        .cloned()
        .ok_or_else(|| Error::BadParameter(format!("edge number {k} of {}", sys.edges().len())))
}

fn run(
    name: &str,
    sys: &HypergraphSystem,
    prob: &SupProblem,
    families: &Families,
    bound: f64,
    search: OracleSearch,
    notes: Vec<String>,
) -> Result<LemmaOracle> {
    let r = sup_multilinear(sys, prob, families, search.mode, search.budget, search.seed)?;
    let within = r.value <= bound + HYPOTHESIS_TOL;
    Ok(LemmaOracle {
        name: name.into(),
        base_edge: prob.base_edge.clone(),
        value: r.value,
        bound,
        holds: match (r.mode, within) {
            (_, false) => Verdict::False,
            (SearchMode::Exact, true) => Verdict::True,
            (SearchMode::Heuristic, true) => Verdict::Unknown,
        },
        mode: r.mode,
        witness: r.witness,
        notes,
    })
}

/// `η̄ = (2C)^{nℓ} η^{1/ℓ^{n-1}}` and `C̄ = (2C)^{nℓ}`.
pub fn lemma51_constants(n: usize, ell: u32, c: f64, eta: f64) -> (f64, f64) {
    let c_bar = (2.0 * c).powf((n as u32 * ell) as f64);
    let eta_bar = c_bar * crate::box_norms::root(eta, (ell as f64).powi(n as i32 - 1));
    (eta_bar, c_bar)
}

/// `|E[(λ_e - 1) ∏ g]| ≤ η̄` with each `g` below `λ`, `φ` or 1.
#[allow(clippy::too_many_arguments)]
pub fn lemma51_deviation(
    sys: &HypergraphSystem,
    lambda: &WeightFamily,
    phi: &WeightFamily,
    k: usize,
    c: f64,
    eta: f64,
    ell: u32,
    search: OracleSearch,
) -> Result<LemmaOracle> {
    let base = base_of(sys, k)?;
    let prob = SupProblem {
        kernel: lambda.get(k).map(|v| v - 1.0),
        kernel_replica: 0,
        slots: slots(sys, &base, ell, &[Selector::Lambda, Selector::Phi, Selector::One], None),
        replicas: ell as usize,
        base_edge: base,
    };
    let fams = Families::new().with(Selector::Lambda, lambda).with(Selector::Phi, phi);
    let (eta_bar, _) = lemma51_constants(sys.n(), ell, c, eta);
    run("lemma51_deviation", sys, &prob, &fams, eta_bar, search, vec![])
}

/// `E[∏ g] ≤ C̄` with each `g` below `λ`, `φ` or 1.
pub fn lemma51_mass(
    sys: &HypergraphSystem,
    lambda: &WeightFamily,
    phi: &WeightFamily,
    k: usize,
    c: f64,
    ell: u32,
    search: OracleSearch,
) -> Result<LemmaOracle> {
    let base = base_of(sys, k)?;
    let prob = SupProblem {
        kernel: EdgeFunction::constant(sys, &base, 1.0)?,
        kernel_replica: 0,
        slots: slots(sys, &base, ell, &[Selector::Lambda, Selector::Phi, Selector::One], None),
        replicas: ell as usize,
        base_edge: base,
    };
    let fams = Families::new().with(Selector::Lambda, lambda).with(Selector::Phi, phi);
    let (_, c_bar) = lemma51_constants(sys.n(), ell, c, 1.0);
    run("lemma51_mass", sys, &prob, &fams, c_bar, search, vec![])
}

/// `|E[(ν_e - ψ_e) ∏ g]| ≤ η` with each `g` below `ν`, `ψ` or 1.
///
/// The kernel reads `x_i` from replica 0, so the difference is evaluated at a
/// single copy of `x_i` while the slots range over all `ℓ` copies.
#[allow(clippy::too_many_arguments)]
pub fn lemma61_deviation(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    k: usize,
    eta: f64,
    ell: u32,
    search: OracleSearch,
) -> Result<LemmaOracle> {
    let base = base_of(sys, k)?;
    let prob = SupProblem {
        kernel: nu.get(k).sub(psi.get(k))?,
        kernel_replica: 0,
        slots: slots(sys, &base, ell, &[Selector::Nu, Selector::Psi, Selector::One], None),
        replicas: ell as usize,
        base_edge: base,
    };
    let fams = Families::new().with(Selector::Nu, nu).with(Selector::Psi, psi);
    let notes = vec![
        "the kernel depends on x_e only; the display writes a single x_i while averaging over every replica of x_i, \
         and the kernel is read on its own edge without a replica"
            .to_string(),
    ];
    run("lemma61_deviation", sys, &prob, &fams, eta, search, notes)
}

/// `|E[(ν_{e'} - ψ_{e'})(x_{e'\{i}}, x_i^{(ω')}) ∏ g]| ≤ η` over slots
/// `(e'', ω) ≠ (e', ω')`, each `g` below `ν`, `ψ` or 1.
#[allow(clippy::too_many_arguments)]
pub fn lemma63_deviation(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    k: usize,
    k_prime: usize,
    omega_prime: usize,
    eta: f64,
    ell: u32,
    search: OracleSearch,
) -> Result<LemmaOracle> {
    let base = base_of(sys, k)?;
    if k_prime == k || k_prime >= sys.edges().len() {
        return Err(Error::BadParameter(format!(
            "edge number {k_prime} must be another edge"
        )));
    }
    if omega_prime >= ell as usize {
        return Err(Error::DigitOutOfRange {
            digit: omega_prime,
            ell: ell as usize,
        });
    }
    let prob = SupProblem {
        kernel: nu.get(k_prime).sub(psi.get(k_prime))?,
        kernel_replica: omega_prime,
        slots: slots(
            sys,
            &base,
            ell,
            &[Selector::Nu, Selector::Psi, Selector::One],
            Some((k_prime, omega_prime)),
        ),
        replicas: ell as usize,
        base_edge: base,
    };
    let fams = Families::new().with(Selector::Nu, nu).with(Selector::Psi, psi);
    run("lemma63_deviation", sys, &prob, &fams, eta, search, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ProbSpace;

    const EXACT: OracleSearch = OracleSearch {
        mode: SearchMode::Exact,
        budget: 1,
        seed: 0,
    };

    fn sys3() -> HypergraphSystem {
        let s = ProbSpace::uniform(2).unwrap();
        HypergraphSystem::complete(vec![s; 3], 2).unwrap()
    }

    #[test]
    fn trivial_families() {
        let sys = sys3();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let zero = WeightFamily::constant(&sys, 0.0).unwrap();
        let d = lemma51_deviation(&sys, &one, &zero, 0, 1.0, 1e-16, 2, EXACT).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.holds, Verdict::True);
        let m = lemma51_mass(&sys, &one, &zero, 0, 1.0, 2, EXACT).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.bound, 64.0);
        let a = lemma61_deviation(&sys, &one, &one, 1, 0.1, 2, EXACT).unwrap();
        assert_eq!(a.value, 0.0);
        assert_eq!(a.notes.len(), 1);
        let b = lemma63_deviation(&sys, &one, &one, 1, 2, 1, 0.1, 2, EXACT).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(lemma63_deviation(&sys, &one, &one, 1, 1, 0, 0.1, 2, EXACT).is_err());
    }

    #[test]
    fn constants() {
        let (eta_bar, c_bar) = lemma51_constants(3, 2, 1.0, 1e-16);
        assert_eq!(c_bar, 64.0);
        assert!((eta_bar - 64e-4).abs() < 1e-15);
    }
}
