//! ℓ-box norms, (ℓ,p)-box norms and the Gowers–Cauchy–Schwarz form.
//!
//! The norm is computed through its `ℓ^{|e|}`-th power
//!
//! ```text
//! P(f) = E[ ∏_{ω ∈ {0..ℓ-1}^e} f(x_e^(ω)) ]
//! ```
//!
//! either by enumerating every ℓ-tuple of points of `X_e` ([`box_power_direct`])
//! or by peeling one axis at a time: with `g(y) = ∏_m f(y, a_m)`,
//! `P(f) = E_{a_0..a_{ℓ-1} ∈ X_j}[ P(g) ]`, bottoming out at `P(f) = E[f]^ℓ`
//! for a single axis. The peeled ℓ-tuple only matters up to order, so the
//! default enumerates multisets with multinomial weights.

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Hypothesis};
use crate::error::{Error, Result};
use crate::reduce::{slice_sum, tree_sum};
use crate::spaces::{
    decode_index, lp_norm, row_major_strides, EdgeFunction, ExtendedExponent, HypergraphSystem, OmegaIndex,
};

/// Default cap on `(tuple count) × ℓ^{|e|}` for direct enumeration.
pub const DEFAULT_PRODUCT_CAP: f64 = 1e8;

/// Negative powers down to `-CLAMP_RELATIVE · max|f|^{ℓ^{|e|}}` count as roundoff.
pub const CLAMP_RELATIVE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Recursive,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "recursive" => Ok(Self::Recursive),
            other => Err(Error::BadParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxNormParams {
    pub ell: u32,
    pub p: Option<ExtendedExponent>,
}

impl BoxNormParams {
    pub fn new(ell: u32, p: Option<ExtendedExponent>) -> Result<Self> {
        check_ell(ell)?;
        Ok(Self { ell, p })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxNormResult {
    pub value: f64,
    pub power_value: f64,
    pub clamped: bool,
    pub method: Method,
}

pub fn check_ell(ell: u32) -> Result<()> {
    if ell < 2 || ell % 2 != 0 {
        return Err(Error::OddEll(ell));
    }
    Ok(())
}

/// `ℓ^{|e|}`, refusing anything above `2^62`.
pub fn box_exponent(ell: u32, arity: usize) -> Result<u64> {
    let overflow = Error::ExponentOverflow { ell, arity };
    let k = u32::try_from(arity).map_err(|_| overflow.clone())?;
    match u64::from(ell).checked_pow(k) {
        Some(v) if v <= 1 << 62 => Ok(v),
        _ => Err(overflow),
    }
}

/// `x^{1/n}` through `exp(ln x / n)`.
pub(crate) fn root(x: f64, n: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x.ln() / n).exp()
    }
}

fn finish(power: f64, exponent: u64, max_abs: f64, method: Method) -> Result<BoxNormResult> {
    let floor = CLAMP_RELATIVE * max_abs.powf(exponent as f64);
    let (value, clamped) = if power >= 0.0 {
        (root(power, exponent as f64), false)
    } else if power >= -floor {
        (0.0, true)
    } else {
        return Err(Error::NumericalInconsistency {
            value: power,
            floor: -floor,
        });
    };
    Ok(BoxNormResult {
        value,
        power_value: power,
        clamped,
        method,
    })
}

/// Enumeration of ℓ independent replicas of every coordinate of an edge.
///
/// A replica tuple is decoded axis-major: digit `k·ℓ + m` is the atom of
/// replica `m` on axis `k`.
pub(crate) struct ReplicaPlan {
    weights: Vec<Vec<f64>>,
    strides: Vec<usize>,
    ell: usize,
    tuple_shape: Vec<usize>,
    tuples: usize,
    omegas: usize,
    omega_digits: Vec<usize>,
}

impl ReplicaPlan {
    pub(crate) fn new(sys: &HypergraphSystem, e: &[usize], ell: u32, cap: f64) -> Result<Self> {
        let factors = box_exponent(ell, e.len())?;
        let ell = ell as usize;
        let shape = sys.shape_of(e);
        let tuples_f: f64 = shape.iter().map(|&m| (m as f64).powi(ell as i32)).product();
        let required = tuples_f * factors as f64;
        if required > cap {
            return Err(Error::SizeCapExceeded { required, cap });
        }
        let tuple_shape: Vec<usize> = shape.iter().flat_map(|&m| std::iter::repeat(m).take(ell)).collect();
        let omegas = factors as usize;
        let arity = e.len();
        let mut omega_digits = vec![0; omegas * arity];
        for w in 0..omegas {
            decode_index(w, &vec![ell; arity], &mut omega_digits[w * arity..(w + 1) * arity]);
        }
        Ok(Self {
            weights: e.iter().map(|&i| sys.space(i).weights().to_vec()).collect(),
            strides: row_major_strides(&shape),
            ell,
            tuple_shape,
            tuples: tuples_f as usize,
            omegas,
            omega_digits,
        })
    }

    /// `Σ_tuples weight · ∏_ω factor(rank(ω), cell of x_e^(ω))`.
    pub(crate) fn sum<F>(&self, factor: F) -> f64
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let arity = self.strides.len();
        let ell = self.ell;
        tree_sum(self.tuples, |t| {
            let mut digits = vec![0; self.tuple_shape.len()];
            decode_index(t, &self.tuple_shape, &mut digits);
            let mut prod = 1.0;
            for (k, w) in self.weights.iter().enumerate() {
                for m in 0..ell {
                    prod *= w[digits[k * ell + m]];
                }
            }
            for w in 0..self.omegas {
                let omega = &self.omega_digits[w * arity..(w + 1) * arity];
                let offset: usize = (0..arity).map(|k| self.strides[k] * digits[k * ell + omega[k]]).sum();
                prod *= factor(w, offset);
            }
            prod
        })
    }
}

/// The `ℓ^{|e|}`-th power of the ℓ-box norm by brute-force enumeration.
pub fn box_power_direct(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction, ell: u32) -> Result<f64> {
    box_power_direct_capped(sys, e, f, ell, DEFAULT_PRODUCT_CAP)
}

pub fn box_power_direct_capped(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    ell: u32,
    cap: f64,
) -> Result<f64> {
    check_ell(ell)?;
    f.check_on(sys, e)?;
    let plan = ReplicaPlan::new(sys, e, ell, cap)?;
    let values = f.values();
    Ok(plan.sum(|_, offset| values[offset]))
}

/// The ℓ-box norm from the direct power, with the clamp rule applied.
pub fn box_norm_direct(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction, ell: u32) -> Result<BoxNormResult> {
    let power = box_power_direct(sys, e, f, ell)?;
    finish(power, box_exponent(ell, e.len())?, f.max_abs(), Method::Direct)
}

/// Which axis the recursion removes first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PeelOrder {
    #[default]
    Last,
    First,
}

/// How the ℓ-tuples of the peeled axis are enumerated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TupleEnumeration {
    #[default]
    Multiset,
    Naive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecursionOptions {
    pub peel: PeelOrder,
    pub tuples: TupleEnumeration,
}

pub fn box_norm(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction, ell: u32) -> Result<BoxNormResult> {
    box_norm_with(sys, e, f, ell, RecursionOptions::default())
}

pub fn box_norm_with(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    ell: u32,
    opts: RecursionOptions,
) -> Result<BoxNormResult> {
    check_ell(ell)?;
    f.check_on(sys, e)?;
    let exponent = box_exponent(ell, e.len())?;
    let weights: Vec<&[f64]> = e.iter().map(|&i| sys.space(i).weights()).collect();
    let power = recursive_power(f.values(), f.shape(), &weights, ell as usize, opts);
    finish(power, exponent, f.max_abs(), Method::Recursive)
}

/// Box norm by the requested method.
pub fn box_norm_by(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    ell: u32,
    method: Method,
) -> Result<BoxNormResult> {
    match method {
        Method::Direct => box_norm_direct(sys, e, f, ell),
        Method::Recursive => box_norm(sys, e, f, ell),
    }
}

fn recursive_power(values: &[f64], shape: &[usize], weights: &[&[f64]], ell: usize, opts: RecursionOptions) -> f64 {
    let k = shape.len();
    if k == 1 {
        let mean = tree_sum(shape[0], |a| weights[0][a] * values[a]);
        return mean.powi(ell as i32);
    }
    let j = match opts.peel {
        PeelOrder::Last => k - 1,
        PeelOrder::First => 0,
    };
    let m = shape[j];
    let rest_len = values.len() / m;
    let mut rest_shape = shape.to_vec();
    rest_shape.remove(j);
    let mut rest_weights = weights.to_vec();
    rest_weights.remove(j);
    let at = |c: usize, a: usize| match opts.peel {
        PeelOrder::Last => values[c * m + a],
        PeelOrder::First => values[a * rest_len + c],
    };
    let groups = replica_groups(weights[j], ell, opts.tuples);
    let terms: Vec<f64> = groups
        .par_iter()
        .map(|(w, atoms)| {
            let g: Vec<f64> = (0..rest_len)
                .map(|c| atoms.iter().fold(1.0, |acc, &a| acc * at(c, a)))
                .collect();
            w * recursive_power(&g, &rest_shape, &rest_weights, ell, opts)
        })
        .collect();
    slice_sum(&terms)
}

/// ℓ-tuples of atoms with their probabilities, either one entry per ordered
/// tuple or one per multiset carrying the multinomial weight.
fn replica_groups(mu: &[f64], ell: usize, mode: TupleEnumeration) -> Vec<(f64, Vec<usize>)> {
    let m = mu.len();
    let mut out = Vec::new();
    match mode {
        TupleEnumeration::Naive => {
            let shape = vec![m; ell];
            let count = m.pow(ell as u32);
            let mut atoms = vec![0; ell];
            for t in 0..count {
                decode_index(t, &shape, &mut atoms);
                let w = atoms.iter().map(|&a| mu[a]).product();
                out.push((w, atoms.clone()));
            }
        }
        TupleEnumeration::Multiset => {
            let mut atoms = Vec::with_capacity(ell);
            multisets(mu, ell, 0, &mut atoms, &mut out);
        }
    }
    out
}

fn multisets(mu: &[f64], ell: usize, start: usize, atoms: &mut Vec<usize>, out: &mut Vec<(f64, Vec<usize>)>) {
    if atoms.len() == ell {
        let mut coef = 1.0;
        let mut placed = 0.0;
        let mut w = 1.0;
        let mut i = 0;
        while i < atoms.len() {
            let mut run = 0;
            while i + run < atoms.len() && atoms[i + run] == atoms[i] {
                run += 1;
            }
            for t in 1..=run {
                placed += 1.0;
                coef = coef * placed / t as f64;
            }
            w *= mu[atoms[i]].powi(run as i32);
            i += run;
        }
        out.push((coef * w, atoms.clone()));
        return;
    }
    for a in start..mu.len() {
        atoms.push(a);
        multisets(mu, ell, a, atoms, out);
        atoms.pop();
    }
}

/// A family of functions indexed by `ω ∈ {0..ℓ-1}^e`; absent indices stand for the constant 1.
pub type GcsFamily = BTreeMap<OmegaIndex, EdgeFunction>;

fn gcs_slots<'a>(
    sys: &HypergraphSystem,
    e: &[usize],
    family: &'a GcsFamily,
    ell: u32,
) -> Result<Vec<Option<&'a EdgeFunction>>> {
    check_ell(ell)?;
    sys.check_subset(e)?;
    let count = box_exponent(ell, e.len())? as usize;
    let mut slots = vec![None; count];
    for (omega, f) in family {
        if omega.edge() != e {
            return Err(Error::ShapeMismatch(format!(
                "index on {:?} in a family for {:?}",
                omega.edge(),
                e
            )));
        }
        if let Some(&digit) = omega.digits().iter().find(|&&d| d >= ell as usize) {
            return Err(Error::DigitOutOfRange {
                digit,
                ell: ell as usize,
            });
        }
        f.check_on(sys, e)?;
        slots[omega.rank(ell as usize)] = Some(f);
    }
    Ok(slots)
}

/// `E[∏_ω f_ω(x_e^(ω))]` by direct enumeration.
pub fn gcs_form(sys: &HypergraphSystem, e: &[usize], family: &GcsFamily, ell: u32) -> Result<f64> {
    let slots = gcs_slots(sys, e, family, ell)?;
    let plan = ReplicaPlan::new(sys, e, ell, DEFAULT_PRODUCT_CAP)?;
    Ok(plan.sum(|w, offset| slots[w].map_or(1.0, |f| f.values()[offset])))
}

/// Checks `|gcs_form| ≤ ∏_ω ‖f_ω‖_{□_ℓ}`.
///
/// The slack is `1e-9` relative to the right side plus `1e-12` relative to
/// `∏_ω max|f_ω|`, which bounds the size of every term of the form.
pub fn gcs_check(sys: &HypergraphSystem, e: &[usize], family: &GcsFamily, ell: u32) -> Result<Certificate> {
    let lhs = gcs_form(sys, e, family, ell)?.abs();
    let slots = gcs_slots(sys, e, family, ell)?;
    let mut rhs = 1.0;
    let mut sup = 1.0;
    for f in slots.iter().flatten() {
        rhs *= box_norm(sys, e, f, ell)?.value;
        sup *= f.max_abs();
    }
    Ok(Certificate::new(
        "gowers_cauchy_schwarz",
        Vec::new(),
        lhs,
        rhs,
        1e-9 * rhs + 1e-12 * sup,
    ))
}

/// The (ℓ,p)-box norm: `‖ |f|^p ‖_{□_ℓ}^{1/p}`, and `max|f|` for `p = ∞`.
///
/// For finite `p > 1` the function is first divided by `max|f|` so that large
/// exponents stay in range.
pub fn lp_box_norm(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    ell: u32,
    p: ExtendedExponent,
) -> Result<f64> {
    check_ell(ell)?;
    f.check_on(sys, e)?;
    box_exponent(ell, e.len())?;
    match p {
        ExtendedExponent::Infinity => Ok(f.max_abs()),
        ExtendedExponent::Finite(p) if p == 1.0 => Ok(box_norm(sys, e, &f.abs(), ell)?.value),
        ExtendedExponent::Finite(p) => {
            let m = f.max_abs();
            if m == 0.0 {
                return Ok(0.0);
            }
            let g = f.map(|v| (v.abs() / m).powf(p));
            let b = box_norm(sys, e, &g, ell)?.value;
            Ok(m * root(b, p))
        }
    }
}

/// Checks `|E[f(x_i,x_j) u(x_i) v(x_j)]| ≤ ‖f‖_{□_ℓ} ‖u‖_{L_p} ‖v‖_{L_p}` on a doubleton.
///
/// `ℓ ≥ q` (the conjugate of `p`) is reported as a hypothesis flag, not enforced.
pub fn bilinear_bound_report(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    u: &EdgeFunction,
    v: &EdgeFunction,
    ell: u32,
    p: ExtendedExponent,
) -> Result<Certificate> {
    if e.len() != 2 {
        return Err(Error::NotDoubleton(e.to_vec()));
    }
    check_ell(ell)?;
    f.check_on(sys, e)?;
    u.check_on(sys, &e[..1])?;
    v.check_on(sys, &e[1..])?;
    let q = p.conjugate().value();
    let hypothesis = Hypothesis::at_least("ell_at_least_conjugate", ell as f64, q, 1e-12);
    let (mi, mj) = (u.len(), v.len());
    let (wi, wj) = (sys.space(e[0]).weights(), sys.space(e[1]).weights());
    let lhs = tree_sum(mi * mj, |c| {
        let (a, b) = (c / mj, c % mj);
        wi[a] * wj[b] * f.values()[c] * u.values()[a] * v.values()[b]
    })
    .abs();
    let rhs = box_norm(sys, e, f, ell)?.value * lp_norm(sys, &e[..1], u, p)? * lp_norm(sys, &e[1..], v, p)?;
    let sup = f.max_abs() * u.max_abs() * v.max_abs();
    Ok(Certificate::new(
        "bilinear_bound",
        vec![hypothesis],
        lhs,
        rhs,
        1e-9 * rhs + 1e-12 * sup,
    ))
}
