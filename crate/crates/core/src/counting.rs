//! The counting functional `Λ(f) = E[∏_e f_e]`, the ℓ selection rules and the
//! generalized von Neumann and counting lemma certificates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::box_norms::{box_norm, lp_box_norm};
use crate::certificate::{Certificate, Hypothesis};
use crate::error::{Error, Result};
use crate::reduce::tree_sum;
use crate::spaces::{decode_index, max_degree, weighted_lp, EdgeFunction, ExtendedExponent, HypergraphSystem};

/// Cap on `points × functions` when lifting to the full product space.
pub const LIFT_CAP: f64 = 1e8;
/// Cap on the number of edge subsets (and disjoint subset pairs) enumerated.
pub const SUBSET_CAP: f64 = (1u64 << 20) as f64;
/// Additive slack on hypothesis checks.
pub const HYPOTHESIS_TOL: f64 = 1e-9;

/// Weights of every point of the full product space together with the values
/// of a list of lifted edge functions, stored `points × functions`.
pub(crate) struct LiftedTable {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    pub width: usize,
}

impl LiftedTable {
    pub(crate) fn new(sys: &HypergraphSystem, funcs: &[&EdgeFunction]) -> Result<Self> {
        let points = sys.total_points();
        let required = points * funcs.len().max(1) as f64;
        if required > LIFT_CAP {
            return Err(Error::SizeCapExceeded {
                required,
                cap: LIFT_CAP,
            });
        }
        let points = points as usize;
        let shape = sys.shape_of(&(0..sys.n()).collect::<Vec<_>>());
        let width = funcs.len();
        let mut weights = Vec::with_capacity(points);
        let mut values = Vec::with_capacity(points * width);
        let mut x = vec![0; shape.len()];
        for p in 0..points {
            decode_index(p, &shape, &mut x);
            weights.push(x.iter().enumerate().map(|(i, &a)| sys.space(i).weights()[a]).product());
            values.extend(funcs.iter().map(|f| f.at_point(&x)));
        }
        Ok(Self { weights, values, width })
    }

    pub(crate) fn points(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn get(&self, point: usize, func: usize) -> f64 {
        self.values[point * self.width + func]
    }

    /// Pointwise product of the functions with the given indices.
    pub(crate) fn product(&self, funcs: &[usize]) -> Vec<f64> {
        (0..self.points())
            .map(|p| funcs.iter().fold(1.0, |acc, &k| acc * self.get(p, k)))
            .collect()
    }

    pub(crate) fn mean(&self, column: &[f64]) -> f64 {
        tree_sum(column.len(), |p| self.weights[p] * column[p])
    }
}

/// One function per edge of a system, stored in edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionAssignment {
    functions: Vec<EdgeFunction>,
}

impl FunctionAssignment {
    /// Matches each function to its edge; every edge must be covered exactly once.
    pub fn new(sys: &HypergraphSystem, functions: Vec<EdgeFunction>) -> Result<Self> {
        let mut slots: Vec<Option<EdgeFunction>> = vec![None; sys.edges().len()];
        for f in functions {
            let k = sys
                .edge_index(f.edge())
                .ok_or_else(|| Error::UnknownEdge(f.edge().to_vec()))?;
            f.check_on(sys, &sys.edges()[k])?;
            if slots[k].is_some() {
                return Err(Error::ShapeMismatch(format!(
                    "two functions given for edge {:?}",
                    f.edge()
                )));
            }
            slots[k] = Some(f);
        }
        let functions = slots
            .into_iter()
            .zip(sys.edges())
            .map(|(f, e)| f.ok_or_else(|| Error::ShapeMismatch(format!("no function given for edge {e:?}"))))
            .collect::<Result<_>>()?;
        Ok(Self { functions })
    }

    pub fn functions(&self) -> &[EdgeFunction] {
        &self.functions
    }

    fn check(&self, sys: &HypergraphSystem) -> Result<()> {
        if self.functions.len() != sys.edges().len() {
            return Err(Error::ShapeMismatch("assignment does not cover the edge set".into()));
        }
        for (f, e) in self.functions.iter().zip(sys.edges()) {
            f.check_on(sys, e)?;
        }
        Ok(())
    }
}

/// `E[∏_e f_e]` over the full product space, by direct enumeration.
pub fn lambda_form(sys: &HypergraphSystem, assign: &FunctionAssignment) -> Result<f64> {
    assign.check(sys)?;
    let funcs: Vec<&EdgeFunction> = assign.functions.iter().collect();
    let table = LiftedTable::new(sys, &funcs)?;
    let all: Vec<usize> = (0..funcs.len()).collect();
    Ok(tree_sum(table.points(), |p| {
        all.iter().fold(table.weights[p], |acc, &k| acc * table.get(p, k))
    }))
}

struct Factor {
    vars: Vec<usize>,
    values: Vec<f64>,
}

/// `E[∏_e f_e]` by variable elimination: repeatedly sum out the vertex whose
/// neighbourhood table is smallest (ties to the smaller index).
pub fn lambda_form_eliminated(sys: &HypergraphSystem, assign: &FunctionAssignment) -> Result<f64> {
    assign.check(sys)?;
    let mut factors: Vec<Factor> = assign
        .functions
        .iter()
        .map(|f| Factor {
            vars: f.edge().to_vec(),
            values: f.values().to_vec(),
        })
        .collect();
    let mut remaining: Vec<usize> = (0..sys.n()).collect();
    loop {
        let scope_of = |v: usize| -> Vec<usize> {
            let mut scope: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .collect();
            scope.sort_unstable();
            scope.dedup();
            scope
        };
        let candidate = remaining
            .iter()
            .copied()
            .filter(|&v| factors.iter().any(|f| f.vars.contains(&v)))
            .map(|v| {
                let size: f64 = scope_of(v).iter().map(|&u| sys.space(u).atoms() as f64).product();
                (size, v)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some((size, v)) = candidate else { break };
        if size > LIFT_CAP {
            return Err(Error::SizeCapExceeded {
                required: size,
                cap: LIFT_CAP,
            });
        }
        let scope = scope_of(v);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        factors.push(sum_out(sys, &touching, &scope, v));
        remaining.retain(|&u| u != v);
    }
    Ok(factors.iter().map(|f| f.values[0]).product())
}

fn sum_out(sys: &HypergraphSystem, factors: &[Factor], scope: &[usize], v: usize) -> Factor {
    let shape = sys.shape_of(scope);
    let kept: Vec<usize> = scope.iter().copied().filter(|&u| u != v).collect();
    let kept_shape = sys.shape_of(&kept);
    let vpos = scope.iter().position(|&u| u == v).expect("v in scope");
    let positions: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| {
            f.vars
                .iter()
                .map(|u| scope.iter().position(|w| w == u).expect("var in scope"))
                .collect()
        })
        .collect();
    let mu = sys.space(v).weights();
    let total: usize = shape.iter().product();
    let mut out = vec![0.0; kept_shape.iter().product()];
    let mut idx = vec![0; scope.len()];
    for c in 0..total {
        decode_index(c, &shape, &mut idx);
        let mut prod = mu[idx[vpos]];
        for (f, pos) in factors.iter().zip(&positions) {
            let offset = pos
                .iter()
                .zip(&f.vars)
                .fold(0, |acc, (&q, &u)| acc * sys.space(u).atoms() + idx[q]);
            prod *= f.values[offset];
        }
        let kept_offset = (0..scope.len())
            .filter(|&q| q != vpos)
            .fold(0, |acc, q| acc * shape[q] + idx[q]);
        out[kept_offset] += prod;
    }
    Factor {
        vars: kept,
        values: out,
    }
}

/// Least even integer `≥ x`, where `x` within `1e-9` of an even integer counts as equal.
pub(crate) fn even_ceiling(x: f64) -> Result<u32> {
    if !x.is_finite() || x > f64::from(u32::MAX - 1) {
        return Err(Error::BadParameter(format!("ell threshold {x} is out of range")));
    }
    let k = (x / 2.0).round();
    let ell = if (x - 2.0 * k).abs() <= 1e-9 {
        2.0 * k
    } else {
        2.0 * (x / 2.0).ceil()
    };
    Ok(ell.max(2.0) as u32)
}

fn require_p_above_one(p: ExtendedExponent) -> Result<()> {
    match p {
        ExtendedExponent::Finite(v) if !(v > 1.0) => Err(Error::POutOfRange(v)),
        _ => Ok(()),
    }
}

/// The ℓ of the generalized von Neumann theorem for maximum degree `delta`.
pub fn ell_von_neumann(delta: usize, p: ExtendedExponent) -> Result<u32> {
    if delta == 0 {
        return Err(Error::BadParameter("maximum degree must be at least 1".into()));
    }
    require_p_above_one(p)?;
    match p {
        ExtendedExponent::Infinity => Ok(2),
        _ if delta == 1 => Ok(2),
        ExtendedExponent::Finite(p) => {
            let s = p.powf(1.0 / (delta - 1) as f64);
            even_ceiling(s / (s - 1.0))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlag {
    pub edge: Vec<usize>,
    pub value: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetFlag {
    pub worst_value: f64,
    pub worst_subset: Vec<Vec<usize>>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VonNeumannCertificate {
    pub ell: u32,
    pub delta: usize,
    pub p: ExtendedExponent,
    pub c: f64,
    pub hypothesis_32: Vec<EdgeFlag>,
    pub hypothesis_33: SubsetFlag,
    pub hypotheses_hold: bool,
    pub box_norms: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::BadParameter(format!("C must be a finite number >= 1, got {c}")));
    }
    Ok(())
}

/// Index of the largest value, the first one on ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

pub fn von_neumann_certificate(
    sys: &HypergraphSystem,
    assign: &FunctionAssignment,
    c: f64,
    p: ExtendedExponent,
) -> Result<VonNeumannCertificate> {
    if !sys.is_uniform(2) {
        return Err(Error::NotTwoUniform);
    }
    check_c(c)?;
    assign.check(sys)?;
    let delta = max_degree(sys)?;
    let ell = ell_von_neumann(delta, p)?;
    let m = sys.edges().len();
    let count = 2f64.powi(m as i32);
    if count > SUBSET_CAP {
        return Err(Error::SubsetCapExceeded { count, cap: SUBSET_CAP });
    }
    let funcs: Vec<&EdgeFunction> = assign.functions.iter().collect();
    let hypothesis_32 = funcs
        .iter()
        .map(|f| {
            let value = lp_box_norm(sys, f.edge(), f, ell, p)?;
            Ok(EdgeFlag {
                edge: f.edge().to_vec(),
                value,
                holds: value <= 1.0 + HYPOTHESIS_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = LiftedTable::new(sys, &funcs)?;
    let norms: Vec<f64> = (0..1usize << m)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<usize> = (0..m).filter(|k| mask >> k & 1 == 1).collect();
            weighted_lp(&table.product(&members), &table.weights, p)
        })
        .collect();
    let worst = argmax(&norms);
    let hypothesis_33 = SubsetFlag {
        worst_value: norms[worst],
        worst_subset: (0..m)
            .filter(|k| worst >> k & 1 == 1)
            .map(|k| sys.edges()[k].clone())
            .collect(),
        holds: norms[worst] <= c + HYPOTHESIS_TOL,
    };
    let all: Vec<usize> = (0..m).collect();
    let lhs = table.mean(&table.product(&all)).abs();
    let box_norms = funcs
        .iter()
        .map(|f| Ok(box_norm(sys, f.edge(), f, ell)?.value))
        .collect::<Result<Vec<_>>>()?;
    let rhs = c * box_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let hypotheses_hold = hypothesis_32.iter().all(|h| h.holds) && hypothesis_33.holds;
    Ok(VonNeumannCertificate {
        ell,
        delta,
        p,
        c,
        hypothesis_32,
        hypothesis_33,
        hypotheses_hold,
        box_norms,
        lhs,
        rhs,
        holds: lhs <= rhs + HYPOTHESIS_TOL * rhs.max(1.0),
        slack: rhs - lhs,
    })
}

/// Certificate for `|Λ(f) - Λ(g)| ≤ C Σ_e ‖f_e - g_e‖_{□_ℓ}`.
///
/// Hypotheses: every `f_e` and `g_e` has (ℓ,p)-box norm at most 1, and for all
/// disjoint edge sets `G1, G2` the product `∏_{G1} f_e ∏_{G2} g_e` has
/// `L_p` norm at most `C`.
pub fn counting_lemma_certificate(
    sys: &HypergraphSystem,
    f: &FunctionAssignment,
    g: &FunctionAssignment,
    c: f64,
    p: ExtendedExponent,
) -> Result<Certificate> {
    if !sys.is_uniform(2) {
        return Err(Error::NotTwoUniform);
    }
    check_c(c)?;
    f.check(sys)?;
    g.check(sys)?;
    let ell = ell_von_neumann(max_degree(sys)?, p)?;
    let m = sys.edges().len();
    let count = 3f64.powi(m as i32);
    if count > SUBSET_CAP {
        return Err(Error::PairCapExceeded { count, cap: SUBSET_CAP });
    }
    let mut hypotheses = Vec::new();
    for (tag, family) in [("f", f), ("g", g)] {
        for func in &family.functions {
            let value = lp_box_norm(sys, func.edge(), func, ell, p)?;
            hypotheses.push(Hypothesis::at_most(
                format!("lp_box_norm {tag}{:?}", func.edge()),
                value,
                1.0,
                HYPOTHESIS_TOL,
            ));
        }
    }
    let funcs: Vec<&EdgeFunction> = f.functions.iter().chain(&g.functions).collect();
    let table = LiftedTable::new(sys, &funcs)?;
    let pairs = count as usize;
    let norms: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|code| {
            let mut digits = vec![0; m];
            decode_index(code, &vec![3; m], &mut digits);
            let members: Vec<usize> = digits
                .iter()
                .enumerate()
                .filter_map(|(k, &d)| match d {
                    1 => Some(k),
                    2 => Some(m + k),
                    _ => None,
                })
                .collect();
            weighted_lp(&table.product(&members), &table.weights, p)
        })
        .collect();
    let worst = argmax(&norms);
    hypotheses.push(Hypothesis::at_most(
        "disjoint_product_lp_norms",
        norms[worst],
        c,
        HYPOTHESIS_TOL,
    ));
    let lf = table.mean(&table.product(&(0..m).collect::<Vec<_>>()));
    let lg = table.mean(&table.product(&(m..2 * m).collect::<Vec<_>>()));
    let lhs = (lf - lg).abs();
    let mut sum = 0.0;
    for (fe, ge) in f.functions.iter().zip(&g.functions) {
        sum += box_norm(sys, fe.edge(), &fe.sub(ge)?, ell)?.value;
    }
    let rhs = c * sum;
    Ok(Certificate::new(
        "counting_lemma",
        hypotheses,
        lhs,
        rhs,
        HYPOTHESIS_TOL * rhs.max(1.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ProbSpace;

    fn triangle(atoms: usize) -> HypergraphSystem {
        let s = ProbSpace::uniform(atoms).unwrap();
        HypergraphSystem::new(vec![s; 3], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn constants(sys: &HypergraphSystem, c: f64) -> FunctionAssignment {
        let fs = sys
            .edges()
            .iter()
            .map(|e| EdgeFunction::constant(sys, e, c).unwrap())
            .collect();
        FunctionAssignment::new(sys, fs).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let sys = triangle(2);
        assert_eq!(lambda_form(&sys, &constants(&sys, 1.0)).unwrap(), 1.0);
        let mut fs: Vec<EdgeFunction> = constants(&sys, 1.0).functions().to_vec();
        fs[2] = EdgeFunction::constant(&sys, &[1, 2], 0.0).unwrap();
        let a = FunctionAssignment::new(&sys, fs).unwrap();
        assert_eq!(lambda_form(&sys, &a).unwrap(), 0.0);
        // f_e = u_i ⊗ u_j: each vertex carries two factors of its vector
        let u = [vec![1.0, 2.0], vec![0.5, 3.0], vec![1.5, 1.0]];
        let fs = sys
            .edges()
            .iter()
            .map(|e| EdgeFunction::tensor_product(&sys, e, &[u[e[0]].clone(), u[e[1]].clone()]).unwrap())
            .collect();
        let a = FunctionAssignment::new(&sys, fs).unwrap();
        let expected: f64 = u.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>() / 2.0).product();
        assert!((lambda_form(&sys, &a).unwrap() - expected).abs() < 1e-12 * expected);
        assert!((lambda_form_eliminated(&sys, &a).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn assignment_validation() {
        let sys = triangle(2);
        let one = EdgeFunction::constant(&sys, &[0, 1], 1.0).unwrap();
        assert!(FunctionAssignment::new(&sys, vec![one.clone()]).is_err());
        let stray = EdgeFunction::constant(&sys, &[0], 1.0).unwrap();
        assert!(matches!(
            FunctionAssignment::new(&sys, vec![stray]),
            Err(Error::UnknownEdge(_))
        ));
    }

    #[test]
    fn ell_rule_examples() {
        assert_eq!(ell_von_neumann(1, ExtendedExponent::Finite(7.0)).unwrap(), 2);
        assert_eq!(ell_von_neumann(2, ExtendedExponent::Finite(2.0)).unwrap(), 2);
        assert_eq!(ell_von_neumann(3, ExtendedExponent::Finite(2.0)).unwrap(), 4);
        assert_eq!(ell_von_neumann(5, ExtendedExponent::Infinity).unwrap(), 2);
        assert_eq!(
            ell_von_neumann(2, ExtendedExponent::Finite(1.0)),
            Err(Error::POutOfRange(1.0))
        );
        assert_eq!(even_ceiling(4.0000000001).unwrap(), 4);
        assert_eq!(even_ceiling(4.01).unwrap(), 6);
        assert_eq!(even_ceiling(0.3).unwrap(), 2);
    }

    #[test]
    fn von_neumann_constants() {
        let sys = triangle(2);
        let cert = von_neumann_certificate(&sys, &constants(&sys, 0.5), 1.0, ExtendedExponent::Finite(4.0)).unwrap();
        assert!(cert.hypotheses_hold);
        assert!((cert.lhs - 0.125).abs() < 1e-15);
        assert!((cert.rhs - 0.5).abs() < 1e-15);
        assert!(cert.holds);
        assert_eq!(cert.hypothesis_33.worst_subset, Vec::<Vec<usize>>::new());
        let sys4 = HypergraphSystem::new(vec![ProbSpace::uniform(2).unwrap(); 3], vec![vec![0, 1, 2]]).unwrap();
        let a = constants(&sys4, 1.0);
        assert!(matches!(
            von_neumann_certificate(&sys4, &a, 1.0, ExtendedExponent::Infinity),
            Err(Error::NotTwoUniform)
        ));
    }

    #[test]
    fn counting_equal_families() {
        let sys = triangle(2);
        let f = constants(&sys, 0.7);
        let cert = counting_lemma_certificate(&sys, &f, &f, 1.0, ExtendedExponent::Finite(3.0)).unwrap();
        assert_eq!(cert.lhs, 0.0);
        assert_eq!(cert.rhs, 0.0);
        assert!(cert.holds);
        assert_eq!(cert.hypotheses.len(), 7);
    }
}
