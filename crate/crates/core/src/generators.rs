//! Seeded instance builders.
//!
//! Streams come from `ChaCha8Rng::seed_from_u64(seed)`. Values are drawn in a
//! fixed order: for `product_weights` one factor per space in vertex order,
//! otherwise edge by edge in sorted order and cell by cell row-major within an
//! edge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::SearchMode;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::pseudo::{linear_forms_deviation, WeightFamily};
use crate::reduce::tree_sum;
use crate::spaces::{EdgeFunction, HypergraphSystem, ProbSpace};

/// Attempts at clipping and recentring a perturbed edge before giving up.
const RECENTRE_ROUNDS: usize = 8;
/// Patterns sampled by [`measure_eta`] when it cannot enumerate.
const ETA_SAMPLES: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atoms {
    Uniform(usize),
    PerSpace(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    Ones,
    PerturbedOnes { eps: f64 },
    ProductWeights,
    RandomNonneg { scale: f64 },
    RandomSigned { scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub r: usize,
    pub atoms: Atoms,
    #[serde(flatten)]
    pub kind: Kind,
    pub seed: u64,
}

impl GenSpec {
    fn validate(&self) -> Result<Vec<usize>> {
        let bad = |msg: String| Err(Error::BadSpec(msg));
        if self.r < 2 || self.r > self.n {
            return bad(format!("need 2 <= r <= n, got r = {}, n = {}", self.r, self.n));
        }
        let atoms = match &self.atoms {
            Atoms::Uniform(m) => vec![*m; self.n],
            Atoms::PerSpace(list) => list.clone(),
        };
        if atoms.len() != self.n {
            return bad(format!("{} atom counts for {} spaces", atoms.len(), self.n));
        }
        if atoms.contains(&0) {
            return bad("every space needs at least one atom".into());
        }
        match self.kind {
            Kind::PerturbedOnes { eps } if !(eps >= 0.0 && eps.is_finite()) => bad(format!("eps = {eps}")),
            Kind::RandomNonneg { scale } | Kind::RandomSigned { scale } if !(scale > 0.0 && scale.is_finite()) => {
                bad(format!("scale = {scale}"))
            }
            _ => Ok(atoms),
        }
    }
}

fn mean(weights: &[f64], values: &[f64]) -> f64 {
    tree_sum(values.len(), |c| weights[c] * values[c])
}

fn perturbed(weights: &[f64], eps: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let h: Vec<f64> = (0..weights.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let hm = mean(weights, &h);
    let mut nu: Vec<f64> = h.iter().map(|&x| 1.0 + eps * (x - hm)).collect();
    for _ in 0..RECENTRE_ROUNDS {
        if nu.iter().all(|&v| v >= 0.0) {
            return Ok(nu);
        }
        nu.iter_mut().for_each(|v| *v = v.max(0.0));
        let shift = mean(weights, &nu) - 1.0;
        nu.iter_mut().for_each(|v| *v -= shift);
    }
    if nu.iter().all(|&v| v >= 0.0) {
        return Ok(nu);
    }
    Err(Error::BadSpec(format!(
        "eps = {eps} leaves negative values after {RECENTRE_ROUNDS} rounds of clipping and recentring"
    )))
}

/// Builds the system (uniform spaces, all `r`-subsets as edges) and one
/// function per edge.
pub fn generate(spec: &GenSpec) -> Result<Instance> {
    let atoms = spec.validate()?;
    let spaces = atoms
        .iter()
        .map(|&m| ProbSpace::uniform(m))
        .collect::<Result<Vec<_>>>()?;
    let sys = HypergraphSystem::complete(spaces, spec.r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut functions = Vec::with_capacity(sys.edges().len());
    match spec.kind {
        Kind::ProductWeights => {
            let factors: Vec<Vec<f64>> = (0..sys.n())
                .map(|i| {
                    let w = sys.space(i).weights();
                    let u: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
                    let m = mean(w, &u);
                    u.into_iter().map(|x| x / m).collect()
                })
                .collect();
            for e in sys.edges() {
                let fs: Vec<Vec<f64>> = e.iter().map(|&i| factors[i].clone()).collect();
                functions.push(EdgeFunction::tensor_product(&sys, e, &fs)?);
            }
        }
        kind => {
            for e in sys.edges() {
                let weights = sys.cell_weights(e);
                let cells = weights.len();
                let values = match kind {
                    Kind::Ones => vec![1.0; cells],
                    Kind::PerturbedOnes { eps } => perturbed(&weights, eps, &mut rng)?,
                    Kind::RandomNonneg { scale } => (0..cells).map(|_| rng.gen_range(0.0..scale)).collect(),
                    Kind::RandomSigned { scale } => (0..cells).map(|_| rng.gen_range(-scale..=scale)).collect(),
                    Kind::ProductWeights => unreachable!(),
                };
                functions.push(EdgeFunction::new(&sys, e, values)?);
            }
        }
    }
    Ok(Instance::new(sys, functions))
}

/// [`generate`] for the nonnegative kinds, as a weight family.
pub fn generate_family(spec: &GenSpec) -> Result<(HypergraphSystem, WeightFamily)> {
    if let Kind::RandomSigned { .. } = spec.kind {
        return Err(Error::BadSpec("random_signed does not produce weights".into()));
    }
    let inst = generate(spec)?;
    let fam = WeightFamily::new(&inst.system, inst.functions)?;
    Ok((inst.system, fam))
}

/// Smallest η for which the family meets the two-sided linear forms bound
/// `1 - η ≤ D ≤ 1 + η` on the patterns checked.
pub fn measure_eta(sys: &HypergraphSystem, family: &WeightFamily, ell: u32, mode: SearchMode) -> Result<f64> {
    Ok(linear_forms_deviation(sys, family, ell, mode, ETA_SAMPLES, 0)?.deviation())
}
