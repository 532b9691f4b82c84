//! (C,η,p)-pseudorandomness of weighted hypergraphs: the four defining
//! conditions, the linear forms deviation, the two sufficient criteria and the
//! auxiliary supremum bounds used in their proofs.

pub mod conditions;
pub mod lemmas;
pub mod linear_forms;
pub mod sup;
pub mod theorems;

use serde::{Deserialize, Serialize};

use crate::box_norms::check_ell;
use crate::certificate::{SearchMode, Verdict};
use crate::counting::{even_ceiling, FunctionAssignment};
use crate::error::{Error, Result};
use crate::spaces::{EdgeFunction, ExtendedExponent, HypergraphSystem};

pub use conditions::{certify_pseudorandom, check_c1, check_c2a, check_c2b, check_c3, PseudoReport};
pub use linear_forms::{linear_forms_deviation, LinearFormsResult};
pub use sup::{sup_multilinear, Families, Selector, Slot, SupProblem, SupResult, SupWitness};
pub use theorems::{thm42_certificate, thm43_certificate, TheoremCertificate};

/// A nonnegative function on every edge of a system, in edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFamily {
    functions: Vec<EdgeFunction>,
}

impl WeightFamily {
    pub fn new(sys: &HypergraphSystem, functions: Vec<EdgeFunction>) -> Result<Self> {
        let assign = FunctionAssignment::new(sys, functions)?;
        for f in assign.functions() {
            if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        Ok(Self {
            functions: assign.functions().to_vec(),
        })
    }

    pub fn constant(sys: &HypergraphSystem, c: f64) -> Result<Self> {
        let fs = sys
            .edges()
            .iter()
            .map(|e| EdgeFunction::constant(sys, e, c))
            .collect::<Result<_>>()?;
        Self::new(sys, fs)
    }

    pub fn functions(&self) -> &[EdgeFunction] {
        &self.functions
    }

    /// The function on edge number `k`.
    pub fn get(&self, k: usize) -> &EdgeFunction {
        &self.functions[k]
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Edgewise sum of two families.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let functions = self
            .functions
            .iter()
            .zip(&other.functions)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self { functions })
    }

    /// Edgewise `f + c`.
    pub fn shift(&self, c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::BadParameter(format!("shift {c} may break nonnegativity")));
        }
        Ok(Self {
            functions: self.functions.iter().map(|f| f.map(|v| v + c)).collect(),
        })
    }

    pub(crate) fn check(&self, sys: &HypergraphSystem) -> Result<()> {
        if self.functions.len() != sys.edges().len() {
            return Err(Error::ShapeMismatch("family does not cover the edge set".into()));
        }
        for (f, e) in self.functions.iter().zip(sys.edges()) {
            f.check_on(sys, e)?;
        }
        Ok(())
    }
}

/// Least even `ℓ ≥ 2q + (1 - 1/C) + 1/p`, with `q` conjugate to `p` and `1/∞ = 0`.
pub fn ell_pseudorandom(c: f64, p: ExtendedExponent) -> Result<u32> {
    check_c(c)?;
    if let ExtendedExponent::Finite(v) = p {
        if !(v > 1.0) {
            return Err(Error::POutOfRange(v));
        }
    }
    let q = p.conjugate().value();
    even_ceiling(2.0 * q + (1.0 - 1.0 / c) + p.reciprocal())
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::BadParameter(format!("C must be a finite number >= 1, got {c}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoParams {
    pub c: f64,
    pub eta: f64,
    pub p: ExtendedExponent,
    pub ell: u32,
}

impl PseudoParams {
    /// Requires `C ≥ 1`, `0 < η < 1` and `p > 1`; ℓ follows from `C` and `p`.
    pub fn new(c: f64, eta: f64, p: ExtendedExponent) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::BadParameter(format!("eta must lie in (0, 1), got {eta}")));
        }
        Self::with_any_eta(c, eta, p)
    }

    /// Like [`PseudoParams::new`] but accepts any positive finite η. Used when a
    /// theorem's derived η has left the unit interval and the checks should
    /// still run.
    pub(crate) fn with_any_eta(c: f64, eta: f64, p: ExtendedExponent) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::BadParameter(format!("eta must be positive, got {eta}")));
        }
        Ok(Self {
            c,
            eta,
            p,
            ell: ell_pseudorandom(c, p)?,
        })
    }

    pub fn with_ell(mut self, ell: u32) -> Result<Self> {
        check_ell(ell)?;
        self.ell = ell;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2a,
    C2b,
    C3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub holds: Verdict,
    #[serde(with = "crate::certificate::float")]
    pub worst_value: f64,
    pub worst_witness: serde_json::Value,
    #[serde(with = "crate::certificate::float")]
    pub bound: f64,
    pub search_mode: SearchMode,
}
