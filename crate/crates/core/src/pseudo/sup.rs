//! Suprema of multilinear forms over order intervals.
//!
//! A [`SupProblem`] describes
//!
//! `| E[ h(x_e) · ∏_slots g_s(x_{e_s}^{(ω_s)}) ] |`
//!
//! where the base coordinates `x_e` are shared and every coordinate outside
//! `e` is drawn independently for each replica `ω`. Each slot function ranges
//! over `0 ≤ g ≤ b` for one of the bounds `b` listed in the slot's choices.
//! The form is linear in each `g` separately, so the supremum is attained at
//! `g = b · 1_A` for an atom subset `A`, and only those vertices are searched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WeightFamily;
use crate::bitmask;
use crate::certificate::SearchMode;
use crate::counting::LIFT_CAP;
use crate::cut_norms::{EXACT_BITS, MAX_CYCLES};
use crate::error::{Error, Result};
use crate::reduce::tree_sum;
use crate::spaces::{decode_index, row_major_strides, EdgeFunction, HypergraphSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Nu,
    Psi,
    Lambda,
    Phi,
    One,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub edge: Vec<usize>,
    pub choices: Vec<Selector>,
    pub replica: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupProblem {
    pub base_edge: Vec<usize>,
    pub kernel: EdgeFunction,
    /// Replica whose outside coordinates the kernel reads.
    pub kernel_replica: usize,
    pub slots: Vec<Slot>,
    pub replicas: usize,
}

/// The weight families that slot selectors refer to.
#[derive(Clone, Copy, Debug, Default)]
pub struct Families<'a> {
    nu: Option<&'a WeightFamily>,
    psi: Option<&'a WeightFamily>,
    lambda: Option<&'a WeightFamily>,
    phi: Option<&'a WeightFamily>,
}

impl<'a> Families<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, selector: Selector, family: &'a WeightFamily) -> Self {
        match selector {
            Selector::Nu => self.nu = Some(family),
            Selector::Psi => self.psi = Some(family),
            Selector::Lambda => self.lambda = Some(family),
            Selector::Phi => self.phi = Some(family),
            Selector::One => {}
        }
        self
    }

    pub fn get(&self, selector: Selector) -> Option<&'a WeightFamily> {
        match selector {
            Selector::Nu => self.nu,
            Selector::Psi => self.psi,
            Selector::Lambda => self.lambda,
            Selector::Phi => self.phi,
            Selector::One => None,
        }
    }
}

/// Bound choice and atom subset (hex, see [`crate::bitmask`]) of every slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupWitness {
    pub selectors: Vec<Selector>,
    pub sets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    #[serde(with = "crate::certificate::float")]
    pub value: f64,
    pub witness: SupWitness,
    pub mode: SearchMode,
    pub restarts_used: usize,
}

/// The problem lowered to nonzero points of the replica space.
struct Compiled {
    /// `weight · h` at every point where it is nonzero.
    coef: Vec<f64>,
    /// `points × slots`, the slot cell read at every point.
    cells: Vec<usize>,
    slots: usize,
    sizes: Vec<usize>,
    /// `slot → choice → cell`, the upper bound of that choice.
    bounds: Vec<Vec<Vec<f64>>>,
    choices: Vec<Vec<Selector>>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedProblem(msg.into())
}

impl Compiled {
    fn new(sys: &HypergraphSystem, prob: &SupProblem, families: &Families) -> Result<Self> {
        let base = &prob.base_edge;
        sys.check_subset(base)
            .map_err(|e| malformed(format!("base edge: {e}")))?;
        if prob.replicas == 0 {
            return Err(malformed("at least one replica is required"));
        }
        if prob.kernel_replica >= prob.replicas {
            return Err(malformed(format!(
                "kernel replica {} is not below {}",
                prob.kernel_replica, prob.replicas
            )));
        }
        let kernel_edge = prob.kernel.edge().to_vec();
        prob.kernel
            .check_on(sys, &kernel_edge)
            .map_err(|e| malformed(format!("kernel: {e}")))?;
        let mut bounds = Vec::with_capacity(prob.slots.len());
        for (s, slot) in prob.slots.iter().enumerate() {
            sys.check_subset(&slot.edge)
                .map_err(|e| malformed(format!("slot {s}: {e}")))?;
            if slot.edge == *base {
                return Err(malformed(format!("slot {s} uses the base edge")));
            }
            if slot.replica >= prob.replicas {
                return Err(malformed(format!(
                    "slot {s} has replica {} of {}",
                    slot.replica, prob.replicas
                )));
            }
            if slot.choices.is_empty() {
                return Err(malformed(format!("slot {s} has no bound choices")));
            }
            let size: usize = sys.shape_of(&slot.edge).iter().product();
            let per_choice = slot
                .choices
                .iter()
                .map(|&sel| match sel {
                    Selector::One => Ok(vec![1.0; size]),
                    _ => {
                        let fam = families
                            .get(sel)
                            .ok_or_else(|| malformed(format!("slot {s}: no family for {sel:?}")))?;
                        let k = sys
                            .edge_index(&slot.edge)
                            .ok_or_else(|| malformed(format!("slot {s}: {:?} is not an edge", slot.edge)))?;
                        if fam.len() != sys.edges().len() {
                            return Err(malformed(format!("family for {sel:?} does not cover the edges")));
                        }
                        Ok(fam.get(k).values().to_vec())
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            bounds.push(per_choice);
        }

        let out: Vec<usize> = (0..sys.n()).filter(|v| !base.contains(v)).collect();
        let mut shape = sys.shape_of(base);
        for _ in 0..prob.replicas {
            shape.extend(sys.shape_of(&out));
        }
        let points: f64 = shape.iter().map(|&m| m as f64).product();
        let required = points * (prob.slots.len() + 1) as f64;
        if required > LIFT_CAP {
            return Err(Error::SizeCapExceeded {
                required,
                cap: LIFT_CAP,
            });
        }
        let slot_strides: Vec<Vec<usize>> = prob
            .slots
            .iter()
            .map(|s| row_major_strides(&sys.shape_of(&s.edge)))
            .collect();
        let kernel_strides = row_major_strides(prob.kernel.shape());
        let cell_of = |edge: &[usize], strides: &[usize], x: &[usize]| -> usize {
            edge.iter().zip(strides).map(|(&v, &st)| x[v] * st).sum()
        };

        let mut digits = vec![0; shape.len()];
        let mut full = vec![vec![0; sys.n()]; prob.replicas];
        let mut coef = Vec::new();
        let mut cells = Vec::new();
        for p in 0..points as usize {
            decode_index(p, &shape, &mut digits);
            let mut weight = 1.0;
            for (k, &v) in base.iter().enumerate() {
                weight *= sys.space(v).weights()[digits[k]];
                for x in full.iter_mut() {
                    x[v] = digits[k];
                }
            }
            for (r, x) in full.iter_mut().enumerate() {
                for (k, &v) in out.iter().enumerate() {
                    let d = digits[base.len() + r * out.len() + k];
                    weight *= sys.space(v).weights()[d];
                    x[v] = d;
                }
            }
            let h = prob.kernel.values()[cell_of(&kernel_edge, &kernel_strides, &full[prob.kernel_replica])];
            let a = weight * h;
            if a == 0.0 {
                continue;
            }
            coef.push(a);
            for (slot, strides) in prob.slots.iter().zip(&slot_strides) {
                cells.push(cell_of(&slot.edge, strides, &full[slot.replica]));
            }
        }
        Ok(Self {
            coef,
            cells,
            slots: prob.slots.len(),
            sizes: prob
                .slots
                .iter()
                .map(|s| sys.shape_of(&s.edge).iter().product())
                .collect(),
            bounds,
            choices: prob.slots.iter().map(|s| s.choices.clone()).collect(),
        })
    }

    fn points(&self) -> usize {
        self.coef.len()
    }

    fn objective(&self, g: &[Vec<f64>]) -> f64 {
        let s = self.slots;
        tree_sum(self.points(), |p| {
            let row = &self.cells[p * s..(p + 1) * s];
            row.iter().zip(g).fold(self.coef[p], |acc, (&c, gs)| acc * gs[c])
        })
    }

    /// Coefficients of the form as a linear function of slot `k`.
    fn coefficients(&self, g: &[Vec<f64>], k: usize) -> Vec<f64> {
        let s = self.slots;
        let mut out = vec![0.0; self.sizes[k]];
        for p in 0..self.points() {
            let row = &self.cells[p * s..(p + 1) * s];
            let mut prod = self.coef[p];
            for (t, &c) in row.iter().enumerate() {
                if t != k {
                    prod *= g[t][c];
                }
            }
            out[row[k]] += prod;
        }
        out
    }

    fn vertex(&self, choice: &[usize], masks: &[Vec<bool>]) -> Vec<Vec<f64>> {
        (0..self.slots)
            .map(|s| {
                self.bounds[s][choice[s]]
                    .iter()
                    .zip(&masks[s])
                    .map(|(&b, &on)| if on { b } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Masks restricted to cells where the chosen bound is positive, so a
    /// witness names exactly the support of `g`.
    fn witness(&self, choice: &[usize], masks: &[Vec<bool>]) -> SupWitness {
        SupWitness {
            selectors: (0..self.slots).map(|s| self.choices[s][choice[s]]).collect(),
            sets: (0..self.slots)
                .map(|s| {
                    let bits: Vec<bool> = masks[s]
                        .iter()
                        .zip(&self.bounds[s][choice[s]])
                        .map(|(&on, &b)| on && b > 0.0)
                        .collect();
                    bitmask::to_hex(&bits)
                })
                .collect(),
        }
    }
}

/// Number of vertex combinations exact mode would visit.
fn vertex_count(c: &Compiled) -> f64 {
    c.bounds
        .iter()
        .map(|per_choice| {
            per_choice
                .iter()
                .map(|b| 2f64.powi(b.iter().filter(|&&v| v > 0.0).count() as i32))
                .sum::<f64>()
        })
        .product()
}

/// Number of vertex combinations exact mode would visit; at most
/// `2^EXACT_BITS` is feasible.
pub fn exact_vertex_count(sys: &HypergraphSystem, prob: &SupProblem, families: &Families) -> Result<f64> {
    Compiled::new(sys, prob, families).map(|c| vertex_count(&c))
}

/// `E[h · ∏ g_s]` for explicit slot functions, signed.
pub fn sup_objective(sys: &HypergraphSystem, prob: &SupProblem, slot_functions: &[EdgeFunction]) -> Result<f64> {
    let unbounded = SupProblem {
        slots: prob
            .slots
            .iter()
            .map(|s| Slot {
                choices: vec![Selector::One],
                ..s.clone()
            })
            .collect(),
        ..prob.clone()
    };
    let c = Compiled::new(sys, &unbounded, &Families::new())?;
    if slot_functions.len() != prob.slots.len() {
        return Err(malformed(format!(
            "{} slot functions for {} slots",
            slot_functions.len(),
            prob.slots.len()
        )));
    }
    for (f, slot) in slot_functions.iter().zip(&prob.slots) {
        f.check_on(sys, &slot.edge)?;
    }
    let g: Vec<Vec<f64>> = slot_functions.iter().map(|f| f.values().to_vec()).collect();
    Ok(c.objective(&g))
}

pub fn sup_multilinear(
    sys: &HypergraphSystem,
    prob: &SupProblem,
    families: &Families,
    mode: SearchMode,
    budget: usize,
    seed: u64,
) -> Result<SupResult> {
    let c = Compiled::new(sys, prob, families)?;
    match mode {
        SearchMode::Exact => exact(&c),
        SearchMode::Heuristic => heuristic(&c, budget, seed),
    }
}

fn exact(c: &Compiled) -> Result<SupResult> {
    let cap = 2f64.powi(EXACT_BITS as i32);
    let required = vertex_count(c);
    if required > cap {
        return Err(Error::SizeCapExceeded { required, cap });
    }
    let result = |value: f64, choice: &[usize], masks: &[Vec<bool>]| SupResult {
        value,
        witness: c.witness(choice, masks),
        mode: SearchMode::Exact,
        restarts_used: 0,
    };
    if c.slots == 0 {
        return Ok(result(c.objective(&[]).abs(), &[], &[]));
    }
    let last = c.slots - 1;
    let assignments: usize = c.choices.iter().map(Vec::len).product();
    let mut choice = vec![0; c.slots];
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<bool>>)> = None;
    for a in 0..assignments {
        decode_index(a, &c.choices.iter().map(Vec::len).collect::<Vec<_>>(), &mut choice);
        let active: Vec<Vec<usize>> = (0..c.slots)
            .map(|s| {
                let b = &c.bounds[s][choice[s]];
                (0..b.len()).filter(|&k| b[k] > 0.0).collect()
            })
            .collect();
        let outer_bits: usize = active[..last].iter().map(Vec::len).sum();
        let outer_masks = |counter: u64| -> Vec<Vec<bool>> {
            let mut pos = 0;
            let mut masks: Vec<Vec<bool>> = active[..last]
                .iter()
                .zip(&c.sizes)
                .map(|(cells, &size)| {
                    let mut m = vec![false; size];
                    for &k in cells {
                        m[k] = counter >> (outer_bits - 1 - pos) & 1 == 1;
                        pos += 1;
                    }
                    m
                })
                .collect();
            masks.push(vec![true; c.sizes[last]]);
            masks
        };
        let b_last = &c.bounds[last][choice[last]];
        let local = (0..1u64 << outer_bits)
            .into_par_iter()
            .map(|counter| {
                let masks = outer_masks(counter);
                let g = c.vertex(&choice, &masks);
                let coef = c.coefficients(&g, last);
                let contrib: Vec<f64> = coef.iter().zip(b_last).map(|(&x, &b)| x * b).collect();
                let plus: Vec<bool> = contrib.iter().map(|&x| x > 0.0).collect();
                let minus: Vec<bool> = contrib.iter().map(|&x| x < 0.0).collect();
                let vp: f64 = contrib.iter().filter(|&&x| x > 0.0).sum();
                let vm: f64 = -contrib.iter().filter(|&&x| x < 0.0).sum::<f64>();
                let inner = if vp > vm || (vp == vm && plus <= minus) {
                    plus
                } else {
                    minus
                };
                (vp.max(vm), counter, inner)
            })
            .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
            .expect("at least one vertex");
        if best.as_ref().map_or(true, |b| local.0 > b.0) {
            let mut masks = outer_masks(local.1);
            masks[last] = local.2;
            best = Some((local.0, choice.clone(), masks));
        }
    }
    let (_, choice, masks) = best.expect("at least one assignment");
    // recompute in tree order so the reported value matches `sup_objective`
    let value = c.objective(&c.vertex(&choice, &masks)).abs();
    Ok(result(value, &choice, &masks))
}

struct Run {
    value: f64,
    choice: Vec<usize>,
    masks: Vec<Vec<bool>>,
    trace: Vec<f64>,
}

/// Best-response ascent on `sigma · objective`: each slot in turn takes the
/// bound and subset maximizing its linear coefficient. A move is accepted only
/// when it gains more than roundoff, so the trace never decreases.
fn ascend(c: &Compiled, mut choice: Vec<usize>, mut masks: Vec<Vec<bool>>, sigma: f64) -> Run {
    let mut g = c.vertex(&choice, &masks);
    let mut trace = vec![sigma * c.objective(&g)];
    for _ in 0..MAX_CYCLES {
        let mut changed = false;
        for s in 0..c.slots {
            let coef = c.coefficients(&g, s);
            let current: f64 = coef.iter().zip(&g[s]).map(|(&x, &v)| sigma * x * v).sum();
            let scale: f64 = c.bounds[s]
                .iter()
                .map(|b| coef.iter().zip(b).map(|(x, b)| (x * b).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            let (best_choice, best_gain) = c.bounds[s]
                .iter()
                .enumerate()
                .map(|(ch, b)| {
                    let gain: f64 = coef.iter().zip(b).map(|(&x, &v)| (sigma * x * v).max(0.0)).sum();
                    (ch, gain)
                })
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_gain > current + 1e-12 * scale {
                choice[s] = best_choice;
                masks[s] = coef
                    .iter()
                    .zip(&c.bounds[s][best_choice])
                    .map(|(&x, &b)| sigma * x * b > 0.0)
                    .collect();
                g[s] = c.bounds[s][best_choice]
                    .iter()
                    .zip(&masks[s])
                    .map(|(&b, &on)| if on { b } else { 0.0 })
                    .collect();
                trace.push(sigma * c.objective(&g));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let value = c.objective(&g).abs();
    Run {
        value,
        choice,
        masks,
        trace,
    }
}

fn random_start(c: &Compiled, seed: u64, restart: usize) -> (Vec<usize>, Vec<Vec<bool>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let choice = c.choices.iter().map(|ch| rng.gen_range(0..ch.len())).collect();
    let masks = c
        .sizes
        .iter()
        .map(|&size| (0..size).map(|_| rng.gen::<bool>()).collect())
        .collect();
    (choice, masks)
}

fn heuristic(c: &Compiled, budget: usize, seed: u64) -> Result<SupResult> {
    if budget == 0 {
        return Err(Error::BadParameter(
            "heuristic search needs at least one restart".into(),
        ));
    }
    let runs: Vec<Run> = (0..budget)
        .into_par_iter()
        .map(|r| {
            let (choice, masks) = random_start(c, seed, r);
            let plus = ascend(c, choice.clone(), masks.clone(), 1.0);
            let minus = ascend(c, choice, masks, -1.0);
            if minus.value > plus.value {
                minus
            } else {
                plus
            }
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.value > best.value {
            best = run;
        }
    }
    Ok(SupResult {
        value: best.value,
        witness: c.witness(&best.choice, &best.masks),
        mode: SearchMode::Heuristic,
        restarts_used: budget,
    })
}

/// Objective values `sigma · E[..]` after every accepted ascent move of one
/// restart, starting from its random vertex.
pub fn ascent_trace(
    sys: &HypergraphSystem,
    prob: &SupProblem,
    families: &Families,
    seed: u64,
    restart: usize,
    sigma: f64,
) -> Result<Vec<f64>> {
    let c = Compiled::new(sys, prob, families)?;
    let (choice, masks) = random_start(&c, seed, restart);
    Ok(ascend(&c, choice, masks, sigma).trace)
}
