//! The cut norm over intersections of cylinder sets on the faces of an edge.
//!
//! The faces of `e` are its `(|e|-1)`-subsets in lexicographic order. A cut
//! set picks a subset of the atom tuples of every face; a cell of `X_e` lies
//! in the cut when each of its face projections is picked.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmask;
use crate::certificate::SearchMode;
use crate::error::{Error, Result};
use crate::reduce::tree_sum;
use crate::spaces::{decode_index, expectation, k_subsets, EdgeFunction, HypergraphSystem};

/// Exact mode enumerates at most `2^EXACT_BITS` cut sets.
pub const EXACT_BITS: usize = 24;
/// Alternating maximization stops after this many passes over the faces.
pub const MAX_CYCLES: usize = 1000;

/// One atom-tuple subset per face of an edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RawCutSet", try_from = "RawCutSet")]
pub struct CutSet {
    pub faces: Vec<Vec<usize>>,
    pub masks: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct RawCutSet {
    faces: Vec<Vec<usize>>,
    sizes: Vec<usize>,
    masks: Vec<String>,
}

impl From<CutSet> for RawCutSet {
    fn from(c: CutSet) -> Self {
        Self {
            sizes: c.masks.iter().map(Vec::len).collect(),
            masks: c.masks.iter().map(|m| bitmask::to_hex(m)).collect(),
            faces: c.faces,
        }
    }
}

impl TryFrom<RawCutSet> for CutSet {
    type Error = Error;

    fn try_from(raw: RawCutSet) -> Result<Self> {
        if raw.faces.len() != raw.masks.len() || raw.sizes.len() != raw.masks.len() {
            return Err(Error::ShapeMismatch("faces, sizes and masks differ in length".into()));
        }
        let masks = raw
            .masks
            .iter()
            .zip(&raw.sizes)
            .map(|(m, &len)| bitmask::from_hex(m, len))
            .collect::<Result<_>>()?;
        Ok(Self {
            faces: raw.faces,
            masks,
        })
    }
}

impl CutSet {
    /// Every face fully included.
    pub fn full(sys: &HypergraphSystem, e: &[usize]) -> Self {
        Self::filled(sys, e, true)
    }

    pub fn empty(sys: &HypergraphSystem, e: &[usize]) -> Self {
        Self::filled(sys, e, false)
    }

    fn filled(sys: &HypergraphSystem, e: &[usize], bit: bool) -> Self {
        let faces = faces(e);
        let masks = faces
            .iter()
            .map(|face| vec![bit; sys.shape_of(face).iter().product()])
            .collect();
        Self { faces, masks }
    }

    pub fn hex_masks(&self) -> Vec<String> {
        self.masks.iter().map(|m| bitmask::to_hex(m)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutNormResult {
    pub value: f64,
    pub witness: CutSet,
    pub mode: SearchMode,
    pub restarts_used: usize,
    /// Set for singleton edges, whose cut norm is taken to be `|E[f]|`.
    pub singleton: bool,
}

/// The `(|e|-1)`-subsets of `e`, lexicographically; empty for singletons.
pub fn faces(e: &[usize]) -> Vec<Vec<usize>> {
    if e.len() < 2 {
        return Vec::new();
    }
    k_subsets(e.len(), e.len() - 1)
        .into_iter()
        .map(|pos| pos.into_iter().map(|k| e[k]).collect())
        .collect()
}

/// Per-cell weighted values and face projections of an edge function.
struct Layout {
    sizes: Vec<usize>,
    /// `cells × faces`, the face tuple index of every cell.
    face_cell: Vec<usize>,
    weighted: Vec<f64>,
}

impl Layout {
    fn new(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction) -> Self {
        let shape = f.shape().to_vec();
        let positions = if e.len() < 2 {
            Vec::new()
        } else {
            k_subsets(e.len(), e.len() - 1)
        };
        let sizes = positions
            .iter()
            .map(|pos| pos.iter().map(|&k| shape[k]).product())
            .collect();
        let weights = sys.cell_weights(e);
        let nf = positions.len();
        let mut face_cell = vec![0; f.len() * nf];
        let mut idx = vec![0; shape.len()];
        for c in 0..f.len() {
            decode_index(c, &shape, &mut idx);
            for (k, pos) in positions.iter().enumerate() {
                face_cell[c * nf + k] = pos.iter().fold(0, |acc, &q| acc * shape[q] + idx[q]);
            }
        }
        Self {
            sizes,
            face_cell,
            weighted: f.values().iter().zip(&weights).map(|(v, w)| v * w).collect(),
        }
    }

    fn faces(&self) -> usize {
        self.sizes.len()
    }

    fn inside(&self, c: usize, masks: &[Vec<bool>], skip: usize) -> bool {
        let nf = self.faces();
        (0..nf).all(|k| k == skip || masks[k][self.face_cell[c * nf + k]])
    }

    fn value(&self, masks: &[Vec<bool>]) -> f64 {
        tree_sum(self.weighted.len(), |c| {
            if self.inside(c, masks, usize::MAX) {
                self.weighted[c]
            } else {
                0.0
            }
        })
    }

    /// Contribution of every tuple of face `k` given the other faces.
    fn coefficients(&self, masks: &[Vec<bool>], k: usize) -> Vec<f64> {
        let nf = self.faces();
        let mut coef = vec![0.0; self.sizes[k]];
        for c in 0..self.weighted.len() {
            if self.inside(c, masks, k) {
                coef[self.face_cell[c * nf + k]] += self.weighted[c];
            }
        }
        coef
    }
}

fn check_cut(sys: &HypergraphSystem, e: &[usize], cut: &CutSet) -> Result<()> {
    let expected = faces(e);
    if cut.faces != expected {
        return Err(Error::ShapeMismatch(format!(
            "cut lists faces {:?}, edge {e:?} has {expected:?}",
            cut.faces
        )));
    }
    for (face, mask) in expected.iter().zip(&cut.masks) {
        let size: usize = sys.shape_of(face).iter().product();
        if mask.len() != size {
            return Err(Error::ShapeMismatch(format!(
                "mask for face {face:?} has {} bits, face has {size} tuples",
                mask.len()
            )));
        }
    }
    Ok(())
}

/// `∫_A f dμ` where `A` is the intersection of the face cylinders of `cut`.
pub fn cut_value(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction, cut: &CutSet) -> Result<f64> {
    f.check_on(sys, e)?;
    check_cut(sys, e, cut)?;
    Ok(Layout::new(sys, e, f).value(&cut.masks))
}

pub fn cut_norm(
    sys: &HypergraphSystem,
    e: &[usize],
    f: &EdgeFunction,
    mode: SearchMode,
    restarts: usize,
    seed: u64,
) -> Result<CutNormResult> {
    f.check_on(sys, e)?;
    if e.len() == 1 {
        return Ok(CutNormResult {
            value: expectation(sys, e, f)?.abs(),
            witness: CutSet::full(sys, e),
            mode,
            restarts_used: 0,
            singleton: true,
        });
    }
    let layout = Layout::new(sys, e, f);
    let (masks, restarts_used) = match mode {
        SearchMode::Exact => (exact(&layout)?, 0),
        SearchMode::Heuristic => (heuristic(&layout, restarts, seed)?, restarts),
    };
    Ok(CutNormResult {
        value: layout.value(&masks).abs(),
        witness: CutSet { faces: faces(e), masks },
        mode,
        restarts_used,
        singleton: false,
    })
}

/// Whether exact mode is within the enumeration cap for this edge.
pub fn exact_feasible(sys: &HypergraphSystem, e: &[usize]) -> bool {
    let bits: f64 = faces(e)
        .iter()
        .map(|face| sys.shape_of(face).iter().map(|&m| m as f64).product::<f64>())
        .sum();
    bits <= EXACT_BITS as f64
}

/// Enumerates every choice for all faces but the last; the last face is then
/// a linear problem solved by taking the positive or the negative tuples.
///
/// Cut sets are ordered lexicographically by their concatenated bit strings
/// and the first maximizer wins.
fn exact(layout: &Layout) -> Result<Vec<Vec<bool>>> {
    let total: usize = layout.sizes.iter().sum();
    if total > EXACT_BITS {
        return Err(Error::SizeCapExceeded {
            required: 2f64.powi(total as i32),
            cap: 2f64.powi(EXACT_BITS as i32),
        });
    }
    let nf = layout.faces();
    let last = nf - 1;
    let outer_bits: usize = layout.sizes[..last].iter().sum();
    let outer_masks = |counter: u64| -> Vec<Vec<bool>> {
        let mut pos = 0;
        let mut masks: Vec<Vec<bool>> = layout.sizes[..last]
            .iter()
            .map(|&size| {
                let m = (0..size)
                    .map(|t| counter >> (outer_bits - 1 - (pos + t)) & 1 == 1)
                    .collect();
                pos += size;
                m
            })
            .collect();
        masks.push(vec![true; layout.sizes[last]]);
        masks
    };
    let best = (0..1u64 << outer_bits)
        .into_par_iter()
        .map(|counter| {
            let masks = outer_masks(counter);
            let coef = layout.coefficients(&masks, last);
            let plus: Vec<bool> = coef.iter().map(|&c| c > 0.0).collect();
            let minus: Vec<bool> = coef.iter().map(|&c| c < 0.0).collect();
            let vp: f64 = coef.iter().filter(|&&c| c > 0.0).sum();
            let vm: f64 = -coef.iter().filter(|&&c| c < 0.0).sum::<f64>();
            let inner = if vp > vm || (vp == vm && plus <= minus) {
                plus
            } else {
                minus
            };
            (vp.max(vm), counter, inner)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("at least one cut set");
    let mut masks = outer_masks(best.1);
    masks[last] = best.2;
    Ok(masks)
}

fn heuristic(layout: &Layout, restarts: usize, seed: u64) -> Result<Vec<Vec<bool>>> {
    if restarts == 0 {
        return Err(Error::BadParameter(
            "heuristic cut norm needs at least one restart".into(),
        ));
    }
    let runs: Vec<(f64, Vec<Vec<bool>>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let init: Vec<Vec<bool>> = layout
                .sizes
                .iter()
                .map(|&size| (0..size).map(|_| rng.gen::<bool>()).collect())
                .collect();
            let mut best: Option<(f64, Vec<Vec<bool>>)> = None;
            for sigma in [1.0, -1.0] {
                let mut masks = init.clone();
                ascend(layout, &mut masks, sigma);
                let v = layout.value(&masks).abs();
                if best.as_ref().map_or(true, |(b, _)| v > *b) {
                    best = Some((v, masks));
                }
            }
            best.expect("two signs tried")
        })
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = run;
        }
    }
    Ok(best.1.clone())
}

/// Coordinate ascent on `sigma · value`: each face in turn keeps exactly the
/// tuples whose contribution has the sign `sigma`. Tuples contributing zero
/// keep their membership, so an empty face does not empty the others.
fn ascend(layout: &Layout, masks: &mut [Vec<bool>], sigma: f64) {
    for _ in 0..MAX_CYCLES {
        let mut changed = false;
        for k in 0..layout.faces() {
            let coef = layout.coefficients(masks, k);
            let next: Vec<bool> = coef
                .iter()
                .zip(&masks[k])
                .map(|(&c, &cur)| sigma * c > 0.0 || (c == 0.0 && cur))
                .collect();
            if next != masks[k] {
                masks[k] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}
