//! The four conditions of (C,η,p)-pseudorandomness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::sup::{exact_vertex_count, sup_multilinear, Families, Selector, Slot, SupProblem};
use super::{Condition, ConditionReport, PseudoParams, WeightFamily};
use crate::certificate::{SearchMode, Verdict};
use crate::counting::{LiftedTable, HYPOTHESIS_TOL, LIFT_CAP, SUBSET_CAP};
use crate::cut_norms::EXACT_BITS;
use crate::cut_norms::{cut_norm, exact_feasible};
use crate::error::{Error, Result};
use crate::reduce::tree_sum;
use crate::spaces::{decode_index, lp_norm, HypergraphSystem};

/// Replica count of the C2(b) display.
pub const C2B_REPLICAS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoReport {
    pub params: PseudoParams,
    pub c1: ConditionReport,
    pub c2a: ConditionReport,
    pub c2b: ConditionReport,
    pub c3: ConditionReport,
    pub verdict: Verdict,
}

impl PseudoReport {
    pub fn conditions(&self) -> [&ConditionReport; 4] {
        [&self.c1, &self.c2a, &self.c2b, &self.c3]
    }

    /// Whether every sup was certified by exhaustive search.
    pub fn all_exact(&self) -> bool {
        self.conditions().iter().all(|c| c.search_mode == SearchMode::Exact)
    }
}

fn subset_count(m: usize) -> Result<usize> {
    let count = 2f64.powi(m as i32) - 1.0;
    if count > SUBSET_CAP {
        return Err(Error::SubsetCapExceeded { count, cap: SUBSET_CAP });
    }
    Ok(count as usize)
}

fn edges_of_mask(sys: &HypergraphSystem, members: &[usize], mask: usize) -> Vec<Vec<usize>> {
    members
        .iter()
        .enumerate()
        .filter(|(j, _)| mask >> j & 1 == 1)
        .map(|(_, &k)| sys.edges()[k].clone())
        .collect()
}

/// First position of the extreme value; `better(a, b)` is strict.
fn arg_extreme(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// `min over nonempty G ⊆ H of E[∏_{e∈G} ν_e] ≥ 1 - η`.
pub fn check_c1(sys: &HypergraphSystem, nu: &WeightFamily, params: &PseudoParams) -> Result<ConditionReport> {
    nu.check(sys)?;
    let m = sys.edges().len();
    let count = subset_count(m)?;
    let funcs: Vec<_> = nu.functions().iter().collect();
    let table = LiftedTable::new(sys, &funcs)?;
    let values: Vec<f64> = (1..=count)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
            table.mean(&table.product(&members))
        })
        .collect();
    let worst = arg_extreme(&values, |a, b| a < b);
    let bound = 1.0 - params.eta;
    Ok(ConditionReport {
        condition: Condition::C1,
        holds: Verdict::from_bool(values[worst] >= bound - HYPOTHESIS_TOL),
        worst_value: values[worst],
        worst_witness: json!({
            "subset": edges_of_mask(sys, &(0..m).collect::<Vec<_>>(), worst + 1),
        }),
        bound,
        search_mode: SearchMode::Exact,
    })
}

/// Per edge, `‖ψ_e‖_p ≤ C` and `‖ν_e - ψ_e‖_cut ≤ η`. The cut norm is exact
/// whenever the edge is small enough, otherwise a heuristic lower bound that
/// can refute but not certify.
pub fn check_c2a(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    params: &PseudoParams,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<ConditionReport> {
    nu.check(sys)?;
    psi.check(sys)?;
    let mut psi_norms = Vec::new();
    let mut psi_violations = Vec::new();
    let mut cuts = Vec::new();
    let mut verdicts = Vec::new();
    let mut all_exact = true;
    for (k, e) in sys.edges().iter().enumerate() {
        let norm = lp_norm(sys, e, psi.get(k), params.p)?;
        if norm > params.c + HYPOTHESIS_TOL {
            psi_violations.push(e.clone());
        }
        psi_norms.push(norm);
        let diff = nu.get(k).sub(psi.get(k))?;
        let edge_mode = if mode == SearchMode::Exact && exact_feasible(sys, e) {
            SearchMode::Exact
        } else {
            SearchMode::Heuristic
        };
        let cut = cut_norm(sys, e, &diff, edge_mode, budget.max(1), seed)?;
        let within = cut.value <= params.eta + HYPOTHESIS_TOL;
        verdicts.push(match (edge_mode, within) {
            (_, false) => Verdict::False,
            (SearchMode::Exact, true) => Verdict::True,
            (SearchMode::Heuristic, true) => Verdict::Unknown,
        });
        all_exact &= edge_mode == SearchMode::Exact;
        cuts.push(cut);
    }
    let values: Vec<f64> = cuts.iter().map(|c| c.value).collect();
    let worst = arg_extreme(&values, |a, b| a > b);
    let holds = Verdict::from_bool(psi_violations.is_empty()).and(Verdict::all(verdicts));
    Ok(ConditionReport {
        condition: Condition::C2a,
        holds,
        worst_value: values[worst],
        worst_witness: json!({
            "edge": sys.edges()[worst],
            "cut": cuts[worst].witness,
            "psi_lp_norms": psi_norms,
            "psi_violations": psi_violations,
        }),
        bound: params.eta,
        search_mode: if all_exact {
            SearchMode::Exact
        } else {
            SearchMode::Heuristic
        },
    })
}

/// The C2(b) sup problem of edge number `k`: kernel `ν_e - ψ_e` and one slot
/// per other edge and replica, bounded by `ν` or by 1.
pub fn c2b_problem(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    k: usize,
    replicas: usize,
) -> Result<SupProblem> {
    let e = &sys.edges()[k];
    let slots = (0..replicas)
        .flat_map(|r| {
            sys.edges().iter().filter(move |f| *f != e).map(move |f| Slot {
                edge: f.clone(),
                choices: vec![Selector::Nu, Selector::One],
                replica: r,
            })
        })
        .collect();
    Ok(SupProblem {
        base_edge: e.clone(),
        kernel: nu.get(k).sub(psi.get(k))?,
        kernel_replica: 0,
        slots,
        replicas,
    })
}

pub fn check_c2b(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    params: &PseudoParams,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<ConditionReport> {
    check_c2b_with_replicas(sys, nu, psi, params, mode, budget, seed, C2B_REPLICAS)
}

/// [`check_c2b`] with a configurable replica count. Exact mode falls back to
/// the heuristic on edges whose vertex count exceeds the enumeration cap.
#[allow(clippy::too_many_arguments)]
pub fn check_c2b_with_replicas(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    params: &PseudoParams,
    mode: SearchMode,
    budget: usize,
    seed: u64,
    replicas: usize,
) -> Result<ConditionReport> {
    nu.check(sys)?;
    psi.check(sys)?;
    let families = Families::new().with(Selector::Nu, nu);
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    for k in 0..sys.edges().len() {
        let prob = c2b_problem(sys, nu, psi, k, replicas)?;
        let feasible = exact_vertex_count(sys, &prob, &families)? <= 2f64.powi(EXACT_BITS as i32);
        let edge_mode = if mode == SearchMode::Exact && feasible {
            SearchMode::Exact
        } else {
            SearchMode::Heuristic
        };
        let r = sup_multilinear(sys, &prob, &families, edge_mode, budget.max(1), seed)?;
        let within = r.value <= params.eta + HYPOTHESIS_TOL;
        verdicts.push(match (edge_mode, within) {
            (_, false) => Verdict::False,
            (SearchMode::Exact, true) => Verdict::True,
            (SearchMode::Heuristic, true) => Verdict::Unknown,
        });
        results.push(r);
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let worst = arg_extreme(&values, |a, b| a > b);
    let all_exact = results.iter().all(|r| r.mode == SearchMode::Exact);
    Ok(ConditionReport {
        condition: Condition::C2b,
        holds: Verdict::all(verdicts),
        worst_value: values[worst],
        worst_witness: json!({
            "edge": sys.edges()[worst],
            "replicas": replicas,
            "slots": c2b_problem(sys, nu, psi, worst, replicas)?
                .slots
                .iter()
                .map(|s| json!({"edge": s.edge, "replica": s.replica}))
                .collect::<Vec<_>>(),
            "selectors": results[worst].witness.selectors,
            "sets": results[worst].witness.sets,
        }),
        bound: params.eta,
        search_mode: if all_exact {
            SearchMode::Exact
        } else {
            SearchMode::Heuristic
        },
    })
}

/// Values of the other edges' functions at every (cell of `e`, outside point)
/// pair, together with the two weight vectors.
struct Conditional {
    cell_weights: Vec<f64>,
    out_weights: Vec<f64>,
    /// `cells × outs × others`.
    values: Vec<f64>,
    others: Vec<usize>,
}

impl Conditional {
    fn new(sys: &HypergraphSystem, nu: &WeightFamily, k: usize) -> Result<Self> {
        let e = &sys.edges()[k];
        let out: Vec<usize> = (0..sys.n()).filter(|v| !e.contains(v)).collect();
        let others: Vec<usize> = (0..sys.edges().len()).filter(|&j| j != k).collect();
        let cell_weights = sys.cell_weights(e);
        let out_weights = sys.cell_weights(&out);
        let required = (cell_weights.len() * out_weights.len() * others.len().max(1)) as f64;
        if required > LIFT_CAP {
            return Err(Error::SizeCapExceeded {
                required,
                cap: LIFT_CAP,
            });
        }
        let e_shape = sys.shape_of(e);
        let out_shape = sys.shape_of(&out);
        let mut x = vec![0; sys.n()];
        let mut cd = vec![0; e.len()];
        let mut od = vec![0; out.len()];
        let mut values = Vec::with_capacity(required as usize);
        for c in 0..cell_weights.len() {
            decode_index(c, &e_shape, &mut cd);
            for (&v, &d) in e.iter().zip(&cd) {
                x[v] = d;
            }
            for o in 0..out_weights.len() {
                decode_index(o, &out_shape, &mut od);
                for (&v, &d) in out.iter().zip(&od) {
                    x[v] = d;
                }
                values.extend(others.iter().map(|&j| nu.get(j).at_point(&x)));
            }
        }
        Ok(Self {
            cell_weights,
            out_weights,
            values,
            others,
        })
    }

    /// `E[ν_{e,G}^ℓ]` for the subset of `others` given by `mask`.
    fn moment(&self, mask: usize, ell: u32) -> f64 {
        let m = self.others.len();
        let outs = self.out_weights.len();
        let members: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        tree_sum(self.cell_weights.len(), |c| {
            let cond = tree_sum(outs, |o| {
                let row = &self.values[(c * outs + o) * m..(c * outs + o + 1) * m];
                members.iter().fold(self.out_weights[o], |acc, &j| acc * row[j])
            });
            self.cell_weights[c] * cond.powi(ell as i32)
        })
    }
}

/// `E[ν_{e,G}^ℓ] ≤ C + η` for every edge `e` and nonempty `G ⊆ H \ {e}`, with
/// `ν_{e,G}` the conditional expectation of `∏_{e'∈G} ν_{e'}` given `x_e`.
pub fn check_c3(sys: &HypergraphSystem, nu: &WeightFamily, params: &PseudoParams) -> Result<ConditionReport> {
    nu.check(sys)?;
    let m = sys.edges().len();
    let count = subset_count(m.saturating_sub(1))?;
    let bound = params.c + params.eta;
    let mut worst: Option<(f64, usize, usize)> = None;
    for k in 0..m {
        let table = Conditional::new(sys, nu, k)?;
        let values: Vec<f64> = (1..=count)
            .into_par_iter()
            .map(|mask| table.moment(mask, params.ell))
            .collect();
        if values.is_empty() {
            continue;
        }
        let i = arg_extreme(&values, |a, b| a > b);
        if worst.map_or(true, |w| values[i] > w.0) {
            worst = Some((values[i], k, i + 1));
        }
    }
    let (value, witness) = match worst {
        Some((v, k, mask)) => {
            let others: Vec<usize> = (0..m).filter(|&j| j != k).collect();
            (
                v,
                json!({
                    "edge": sys.edges()[k],
                    "subset": edges_of_mask(sys, &others, mask),
                    "ell": params.ell,
                }),
            )
        }
        // a single edge has no nonempty G: the condition is vacuous
        None => (0.0, json!(null)),
    };
    Ok(ConditionReport {
        condition: Condition::C3,
        holds: Verdict::from_bool(value <= bound + HYPOTHESIS_TOL),
        worst_value: value,
        worst_witness: witness,
        bound,
        search_mode: SearchMode::Exact,
    })
}

/// Runs all four conditions. The verdict is unknown only when a heuristic
/// search stayed below its bound without certifying it.
pub fn certify_pseudorandom(
    sys: &HypergraphSystem,
    nu: &WeightFamily,
    psi: &WeightFamily,
    params: &PseudoParams,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<PseudoReport> {
    let c1 = check_c1(sys, nu, params)?;
    let c2a = check_c2a(sys, nu, psi, params, mode, budget, seed)?;
    let c2b = check_c2b(sys, nu, psi, params, mode, budget, seed)?;
    let c3 = check_c3(sys, nu, params)?;
    let verdict = Verdict::all([c1.holds, c2a.holds, c2b.holds, c3.holds]);
    Ok(PseudoReport {
        params: *params,
        c1,
        c2a,
        c2b,
        c3,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{EdgeFunction, ExtendedExponent, ProbSpace};

    fn triangle() -> HypergraphSystem {
        let s = ProbSpace::uniform(2).unwrap();
        HypergraphSystem::complete(vec![s; 3], 2).unwrap()
    }

    fn params(c: f64, eta: f64) -> PseudoParams {
        PseudoParams::new(c, eta, ExtendedExponent::Infinity).unwrap()
    }

    #[test]
    fn ones_family_is_pseudorandom() {
        let sys = triangle();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let r = certify_pseudorandom(&sys, &one, &one, &params(1.0, 0.1), SearchMode::Exact, 8, 0).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        assert!(r.all_exact());
        assert_eq!(r.c1.worst_value, 1.0);
        assert_eq!(r.c2a.worst_value, 0.0);
        assert_eq!(r.c2b.worst_value, 0.0);
        assert_eq!(r.c3.worst_value, 1.0);
    }

    #[test]
    fn zero_edge_fails_c1() {
        let sys = triangle();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let mut fs = one.functions().to_vec();
        fs[1] = EdgeFunction::constant(&sys, &[0, 2], 0.0).unwrap();
        let nu = WeightFamily::new(&sys, fs).unwrap();
        let r = certify_pseudorandom(&sys, &nu, &one, &params(1.0, 0.5), SearchMode::Exact, 8, 0).unwrap();
        assert_eq!(r.c1.holds, Verdict::False);
        assert_eq!(r.c1.worst_value, 0.0);
        assert_eq!(r.c1.worst_witness["subset"], json!([[0, 2]]));
        assert_eq!(r.verdict, Verdict::False);
    }

    #[test]
    fn c2a_single_cell_bump() {
        let s = ProbSpace::uniform(2).unwrap();
        let sys = HypergraphSystem::new(vec![s; 2], vec![vec![0, 1]]).unwrap();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let delta = 0.2;
        let nu = WeightFamily::new(
            &sys,
            vec![EdgeFunction::new(&sys, &[0, 1], vec![1.0 + delta, 1.0, 1.0, 1.0]).unwrap()],
        )
        .unwrap();
        let r = check_c2a(&sys, &nu, &one, &params(1.0, 0.06), SearchMode::Exact, 1, 0).unwrap();
        assert!((r.worst_value - delta / 4.0).abs() < 1e-15);
        assert_eq!(r.holds, Verdict::True);
        let r = check_c2a(&sys, &nu, &one, &params(1.0, 0.04), SearchMode::Exact, 1, 0).unwrap();
        assert_eq!(r.holds, Verdict::False);
        let big = WeightFamily::constant(&sys, 2.0).unwrap();
        let r = check_c2a(&sys, &big, &big, &params(1.0, 0.5), SearchMode::Exact, 1, 0).unwrap();
        assert_eq!(r.holds, Verdict::False);
        assert_eq!(r.worst_witness["psi_violations"], json!([[0, 1]]));
    }

    #[test]
    fn c3_constants() {
        let sys = triangle();
        let nu = WeightFamily::constant(&sys, 1.5).unwrap();
        let p = params(8.0, 0.5).with_ell(4).unwrap();
        let r = check_c3(&sys, &nu, &p).unwrap();
        // G of both other edges: (1.5²)^4
        assert_eq!(r.worst_value, 1.5f64.powi(8));
        assert_eq!(r.holds, Verdict::False);
    }

    #[test]
    fn heuristic_mode_is_unknown_below_bound() {
        let sys = triangle();
        let one = WeightFamily::constant(&sys, 1.0).unwrap();
        let r = check_c2b(&sys, &one, &one, &params(1.0, 0.1), SearchMode::Heuristic, 4, 0).unwrap();
        assert_eq!(r.holds, Verdict::Unknown);
        assert_eq!(r.search_mode, SearchMode::Heuristic);
    }
}
