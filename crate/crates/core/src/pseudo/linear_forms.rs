//! The linear forms condition: expectations over the ℓ-replica product space of
//! products of replicated edge functions, one on/off bit per (edge, ω).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WeightFamily;
use crate::bitmask;
use crate::box_norms::check_ell;
use crate::certificate::SearchMode;
use crate::counting::LIFT_CAP;
use crate::error::{Error, Result};
use crate::reduce::tree_sum;
use crate::spaces::{decode_index, row_major_strides, HypergraphSystem, OmegaIndex};

/// Exact mode enumerates every pattern up to this many.
pub const PATTERN_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFormsResult {
    #[serde(with = "crate::certificate::float")]
    pub min_value: f64,
    #[serde(with = "crate::certificate::float")]
    pub max_value: f64,
    /// Hex bit strings; bit `b` is the `b`-th (edge, ω) pair with edges in
    /// order and ω row-major within an edge.
    pub min_pattern: String,
    pub max_pattern: String,
    pub patterns_checked: u64,
    /// False when the patterns were sampled, in which case the extremes only
    /// bound the true ones from inside.
    pub exhaustive: bool,
    pub bits: usize,
}

impl LinearFormsResult {
    /// Largest deviation from 1 among the patterns checked.
    pub fn deviation(&self) -> f64 {
        (self.max_value - 1.0).max(1.0 - self.min_value).max(0.0)
    }
}

struct ReplicaTable {
    weights: Vec<f64>,
    /// `points × bits`.
    values: Vec<f64>,
    bits: usize,
    /// First bit of every edge.
    offsets: Vec<usize>,
}

impl ReplicaTable {
    fn new(sys: &HypergraphSystem, family: &WeightFamily, ell: u32) -> Result<Self> {
        let l = ell as usize;
        let mut offsets = Vec::new();
        let mut bits = 0usize;
        for e in sys.edges() {
            offsets.push(bits);
            bits += l.pow(e.len() as u32);
        }
        let mut shape = Vec::new();
        for i in 0..sys.n() {
            shape.extend(std::iter::repeat(sys.space(i).atoms()).take(l));
        }
        let points: f64 = shape.iter().map(|&m| m as f64).product();
        let required = points * bits as f64;
        if required > LIFT_CAP {
            return Err(Error::SizeCapExceeded {
                required,
                cap: LIFT_CAP,
            });
        }
        let omegas: Vec<Vec<OmegaIndex>> = sys.edges().iter().map(|e| OmegaIndex::all(e, l)).collect();
        let strides: Vec<Vec<usize>> = sys
            .edges()
            .iter()
            .map(|e| row_major_strides(&sys.shape_of(e)))
            .collect();
        let mut x = vec![0; shape.len()];
        let mut weights = Vec::with_capacity(points as usize);
        let mut values = Vec::with_capacity(required as usize);
        for p in 0..points as usize {
            decode_index(p, &shape, &mut x);
            weights.push(
                x.iter()
                    .enumerate()
                    .map(|(k, &a)| sys.space(k / l).weights()[a])
                    .product(),
            );
            for (k, e) in sys.edges().iter().enumerate() {
                let f = family.get(k).values();
                for w in &omegas[k] {
                    let cell: usize = e
                        .iter()
                        .zip(w.digits())
                        .zip(&strides[k])
                        .map(|((&v, &d), &st)| x[v * l + d] * st)
                        .sum();
                    values.push(f[cell]);
                }
            }
        }
        Ok(Self {
            weights,
            values,
            bits,
            offsets,
        })
    }

    fn eval(&self, on: &[usize]) -> f64 {
        let b = self.bits;
        tree_sum(self.weights.len(), |p| {
            let row = &self.values[p * b..(p + 1) * b];
            on.iter().fold(self.weights[p], |acc, &k| acc * row[k])
        })
    }

    fn eval_mask(&self, mask: u64) -> f64 {
        let on: Vec<usize> = (0..self.bits).filter(|k| mask >> k & 1 == 1).collect();
        self.eval(&on)
    }

    fn eval_bits(&self, pattern: &[bool]) -> f64 {
        let on: Vec<usize> = (0..self.bits).filter(|&k| pattern[k]).collect();
        self.eval(&on)
    }
}

/// Fixed patterns always included when sampling: nothing, everything, and for
/// each edge all of its bits or only its first bit.
fn structured_patterns(table: &ReplicaTable) -> Vec<Vec<bool>> {
    let b = table.bits;
    let mut out = vec![vec![false; b], vec![true; b]];
    for (k, &start) in table.offsets.iter().enumerate() {
        let end = table.offsets.get(k + 1).copied().unwrap_or(b);
        let mut whole = vec![false; b];
        whole[start..end].iter_mut().for_each(|x| *x = true);
        out.push(whole);
        let mut single = vec![false; b];
        single[start] = true;
        out.push(single);
    }
    out
}

pub fn linear_forms_deviation(
    sys: &HypergraphSystem,
    family: &WeightFamily,
    ell: u32,
    mode: SearchMode,
    samples: usize,
    seed: u64,
) -> Result<LinearFormsResult> {
    check_ell(ell)?;
    family.check(sys)?;
    let table = ReplicaTable::new(sys, family, ell)?;
    let b = table.bits;
    let exhaustive = mode == SearchMode::Exact && b < 64 && (1u64 << b) <= PATTERN_CAP;
    let (patterns, values): (Vec<Vec<bool>>, Vec<f64>) = if exhaustive {
        let values: Vec<f64> = (0..1u64 << b).into_par_iter().map(|m| table.eval_mask(m)).collect();
        let to_bits = |m: u64| (0..b).map(|k| m >> k & 1 == 1).collect::<Vec<bool>>();
        let lo = first_extreme(&values, |x, y| x < y);
        let hi = first_extreme(&values, |x, y| x > y);
        return Ok(LinearFormsResult {
            min_value: values[lo],
            max_value: values[hi],
            min_pattern: bitmask::to_hex(&to_bits(lo as u64)),
            max_pattern: bitmask::to_hex(&to_bits(hi as u64)),
            patterns_checked: values.len() as u64,
            exhaustive: true,
            bits: b,
        });
    } else {
        let mut patterns = structured_patterns(&table);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            patterns.push((0..b).map(|_| rng.gen::<bool>()).collect());
        }
        let values = patterns.par_iter().map(|p| table.eval_bits(p)).collect();
        (patterns, values)
    };
    let lo = first_extreme(&values, |x, y| x < y);
    let hi = first_extreme(&values, |x, y| x > y);
    Ok(LinearFormsResult {
        min_value: values[lo],
        max_value: values[hi],
        min_pattern: bitmask::to_hex(&patterns[lo]),
        max_pattern: bitmask::to_hex(&patterns[hi]),
        patterns_checked: values.len() as u64,
        exhaustive: false,
        bits: b,
    })
}

fn first_extreme(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}
