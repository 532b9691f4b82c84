//! Finite probability spaces, hypergraph systems and edge tensors.
//!
//! Vertices are 0-based. Edges are stored as strictly increasing index lists
//! and every tensor on an edge is laid out row-major with axes in that same
//! sorted order. A function on an edge is never lifted to the full product
//! space; evaluating it at a full point reads the coordinates of the edge.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::reduce::tree_sum;

/// A finite probability space given by strictly positive atom weights
/// summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbSpace {
    weights: Vec<f64>,
}

impl ProbSpace {
    /// Validates `raw` and renormalizes it by its computed sum.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &value) in raw.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        let total = crate::reduce::slice_sum(raw);
        Ok(Self {
            weights: raw.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(atoms: usize) -> Result<Self> {
        Self::new(&vec![1.0; atoms])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Builds a probability space from raw positive weights.
pub fn make_prob_space(raw_weights: &[f64]) -> Result<ProbSpace> {
    ProbSpace::new(raw_weights)
}

/// `n` finite probability spaces together with a hypergraph on `{0, .., n-1}`.
///
/// Edges are kept in lexicographic order; that order defines edge indices
/// everywhere else in the crate.
#[derive(Clone, Debug, PartialEq)]
pub struct HypergraphSystem {
    spaces: Vec<ProbSpace>,
    edges: Vec<Vec<usize>>,
}

impl HypergraphSystem {
    pub fn new(spaces: Vec<ProbSpace>, edges: Vec<Vec<usize>>) -> Result<Self> {
        let n = spaces.len();
        let mut canonical = Vec::with_capacity(edges.len());
        for edge in edges {
            canonical.push(canonical_subset(n, edge)?);
        }
        canonical.sort();
        for pair in canonical.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateEdge(pair[0].clone()));
            }
        }
        Ok(Self {
            spaces,
            edges: canonical,
        })
    }

    /// All `r`-subsets of `{0, .., n-1}` as edges, over the given spaces.
    pub fn complete(spaces: Vec<ProbSpace>, r: usize) -> Result<Self> {
        let n = spaces.len();
        if r == 0 || r > n {
            return Err(Error::BadParameter(format!("edge size {r} for {n} vertices")));
        }
        let edges = k_subsets(n, r);
        Self::new(spaces, edges)
    }

    pub fn n(&self) -> usize {
        self.spaces.len()
    }

    pub fn spaces(&self) -> &[ProbSpace] {
        &self.spaces
    }

    pub fn space(&self, i: usize) -> &ProbSpace {
        &self.spaces[i]
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_index(&self, edge: &[usize]) -> Option<usize> {
        self.edges.binary_search_by(|e| e.as_slice().cmp(edge)).ok()
    }

    /// True iff every edge has exactly `r` vertices.
    pub fn is_uniform(&self, r: usize) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| e.len() == r)
    }

    /// The common edge size, if there is one.
    pub fn uniformity(&self) -> Option<usize> {
        let r = self.edges.first()?.len();
        self.is_uniform(r).then_some(r)
    }

    /// True iff the edges are exactly the `(n-1)`-subsets of `[n]`.
    pub fn is_codegree_one_complete(&self) -> bool {
        let n = self.n();
        n >= 2 && self.edges == k_subsets(n, n - 1)
    }

    /// Checks that `edge` is a nonempty strictly increasing list of vertices.
    pub fn check_subset(&self, edge: &[usize]) -> Result<()> {
        let canonical = canonical_subset(self.n(), edge.to_vec())?;
        if canonical != edge {
            return Err(Error::ShapeMismatch(format!("edge {edge:?} is not sorted")));
        }
        Ok(())
    }

    /// Atom counts of the spaces indexed by `edge`.
    pub fn shape_of(&self, edge: &[usize]) -> Vec<usize> {
        edge.iter().map(|&i| self.spaces[i].atoms()).collect()
    }

    /// Product-measure weights of every cell of `X_edge`, row-major.
    pub fn cell_weights(&self, edge: &[usize]) -> Vec<f64> {
        let mut weights = vec![1.0];
        for &i in edge {
            let atom_w = self.spaces[i].weights();
            let mut next = Vec::with_capacity(weights.len() * atom_w.len());
            for &w in &weights {
                for &a in atom_w {
                    next.push(w * a);
                }
            }
            weights = next;
        }
        weights
    }

    /// Number of points of the full product space, as a float to avoid overflow.
    pub fn total_points(&self) -> f64 {
        self.spaces.iter().map(|s| s.atoms() as f64).product()
    }
}

fn canonical_subset(n: usize, mut edge: Vec<usize>) -> Result<Vec<usize>> {
    if edge.is_empty() {
        return Err(Error::EmptyEdge(edge));
    }
    if let Some(&vertex) = edge.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { edge, vertex, n });
    }
    edge.sort_unstable();
    if edge.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::RepeatedVertex(edge));
    }
    Ok(edge)
}

/// All `k`-subsets of `{0, .., n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for v in start..n {
            if n - v < k - current.len() {
                break;
            }
            current.push(v);
            rec(v + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

pub(crate) fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Writes the mixed-radix digits of `index` (last digit fastest) into `out`.
pub(crate) fn decode_index(mut index: usize, shape: &[usize], out: &mut [usize]) {
    for k in (0..shape.len()).rev() {
        out[k] = index % shape[k];
        index /= shape[k];
    }
}

/// A real tensor on `X_e`, one axis per vertex of `e` in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFunction {
    edge: Vec<usize>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl EdgeFunction {
    /// Checks `values` against the atom counts of `edge` in `sys`.
    pub fn new(sys: &HypergraphSystem, edge: &[usize], values: Vec<f64>) -> Result<Self> {
        sys.check_subset(edge)?;
        let shape = sys.shape_of(edge);
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "edge {edge:?} has {expected} cells but {} values were given",
                values.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index, value });
        }
        Ok(Self {
            edge: edge.to_vec(),
            shape,
            values,
        })
    }

    pub fn constant(sys: &HypergraphSystem, edge: &[usize], c: f64) -> Result<Self> {
        sys.check_subset(edge)?;
        let len = sys.shape_of(edge).iter().product();
        Self::new(sys, edge, vec![c; len])
    }

    /// Fills the tensor from a closure of the per-axis atom indices.
    pub fn from_fn<F>(sys: &HypergraphSystem, edge: &[usize], mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        sys.check_subset(edge)?;
        let shape = sys.shape_of(edge);
        let len: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let values = (0..len)
            .map(|c| {
                decode_index(c, &shape, &mut idx);
                f(&idx)
            })
            .collect();
        Self::new(sys, edge, values)
    }

    /// The outer product `u_0 ⊗ u_1 ⊗ ...` with one factor per vertex of `edge`.
    pub fn tensor_product(sys: &HypergraphSystem, edge: &[usize], factors: &[Vec<f64>]) -> Result<Self> {
        if factors.len() != edge.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for an edge of size {}",
                factors.len(),
                edge.len()
            )));
        }
        for (k, (&v, u)) in edge.iter().zip(factors).enumerate() {
            if v < sys.n() && u.len() != sys.space(v).atoms() {
                return Err(Error::ShapeMismatch(format!("factor {k} has {} entries", u.len())));
            }
        }
        Self::from_fn(sys, edge, |idx| {
            idx.iter().enumerate().map(|(k, &a)| factors[k][a]).product()
        })
    }

    pub fn edge(&self) -> &[usize] {
        &self.edge
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let offset: usize = idx.iter().zip(self.strides()).map(|(a, s)| a * s).sum();
        self.values[offset]
    }

    /// Evaluates the lift of this function at a point of the full product space.
    pub fn at_point(&self, point: &[usize]) -> f64 {
        let mut offset = 0;
        for (k, &v) in self.edge.iter().enumerate() {
            offset = offset * self.shape[k] + point[v];
        }
        self.values[offset]
    }

    /// Row-major cell index of the projection of a full point onto the edge.
    pub fn cell_of_point(&self, point: &[usize]) -> usize {
        let mut offset = 0;
        for (k, &v) in self.edge.iter().enumerate() {
            offset = offset * self.shape[k] + point[v];
        }
        offset
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            edge: self.edge.clone(),
            shape: self.shape.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// Pointwise combination of two functions on the same edge.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        if self.edge != other.edge || self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "functions on {:?} and {:?} cannot be combined",
                self.edge, other.edge
            )));
        }
        Ok(Self {
            edge: self.edge.clone(),
            shape: self.shape.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Confirms that this function lives on `edge` with the atom counts of `sys`.
    pub fn check_on(&self, sys: &HypergraphSystem, edge: &[usize]) -> Result<()> {
        if self.edge != edge {
            return Err(Error::ShapeMismatch(format!(
                "function lives on {:?}, expected {:?}",
                self.edge, edge
            )));
        }
        sys.check_subset(edge)?;
        if self.shape != sys.shape_of(edge) {
            return Err(Error::ShapeMismatch(format!(
                "tensor shape {:?} does not match atom counts {:?}",
                self.shape,
                sys.shape_of(edge)
            )));
        }
        Ok(())
    }
}

/// A choice of replica `digits[k]` for the `k`-th vertex of `edge`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaIndex {
    edge: Vec<usize>,
    digits: Vec<usize>,
}

impl OmegaIndex {
    pub fn new(edge: &[usize], digits: Vec<usize>, ell: usize) -> Result<Self> {
        if digits.len() != edge.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} digits for an edge of size {}",
                digits.len(),
                edge.len()
            )));
        }
        if let Some(&digit) = digits.iter().find(|&&d| d >= ell) {
            return Err(Error::DigitOutOfRange { digit, ell });
        }
        Ok(Self {
            edge: edge.to_vec(),
            digits,
        })
    }

    /// The index `m^e`, selecting replica `m` on every vertex.
    pub fn constant(edge: &[usize], m: usize) -> Self {
        Self {
            edge: edge.to_vec(),
            digits: vec![m; edge.len()],
        }
    }

    /// Every index in `{0, .., ell-1}^edge`, row-major.
    pub fn all(edge: &[usize], ell: usize) -> Vec<Self> {
        let shape = vec![ell; edge.len()];
        let count = ell.pow(edge.len() as u32);
        let mut digits = vec![0; edge.len()];
        (0..count)
            .map(|c| {
                decode_index(c, &shape, &mut digits);
                Self {
                    edge: edge.to_vec(),
                    digits: digits.clone(),
                }
            })
            .collect()
    }

    pub fn edge(&self) -> &[usize] {
        &self.edge
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Row-major position of this index within `{0, .., ell-1}^edge`.
    pub fn rank(&self, ell: usize) -> usize {
        self.digits.iter().fold(0, |acc, &d| acc * ell + d)
    }
}

/// Selects `x_e^(omega)`: coordinate `k` is taken from tuple number `omega_k`.
pub fn omega_select(tuples: &[Vec<usize>], omega: &OmegaIndex) -> Result<Vec<usize>> {
    let ell = tuples.len();
    let arity = omega.digits.len();
    if let Some(t) = tuples.iter().find(|t| t.len() != arity) {
        return Err(Error::ShapeMismatch(format!(
            "tuple of length {} for an edge of size {arity}",
            t.len()
        )));
    }
    omega
        .digits
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if d >= ell {
                Err(Error::DigitOutOfRange { digit: d, ell })
            } else {
                Ok(tuples[d][k])
            }
        })
        .collect()
}

/// An exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedExponent {
    Finite(f64),
    Infinity,
}

impl ExtendedExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::POutOfRange(p));
        }
        if p.is_infinite() {
            return Ok(Self::Infinity);
        }
        Ok(Self::Finite(p))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// The exponent as a float, `f64::INFINITY` for ∞.
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::Infinity => Self::Finite(1.0),
            Self::Finite(p) if p == 1.0 => Self::Infinity,
            Self::Finite(p) => Self::Finite(p / (p - 1.0)),
        }
    }
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtendedExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(Self::Infinity),
            _ => {}
        }
        let p: f64 = t.parse().map_err(|_| Error::BadExponent(s.to_string()))?;
        if p.is_infinite() && p > 0.0 {
            return Ok(Self::Infinity);
        }
        Self::finite(p)
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(p) => serializer.serialize_f64(*p),
            Self::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(p) => Self::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// `E[f]` under the product measure of the spaces indexed by `e`.
pub fn expectation(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction) -> Result<f64> {
    f.check_on(sys, e)?;
    let weights = sys.cell_weights(e);
    Ok(tree_sum(weights.len(), |c| weights[c] * f.values[c]))
}

/// Maximum over vertices of the number of edges containing the vertex.
pub fn max_degree(sys: &HypergraphSystem) -> Result<usize> {
    if sys.edges().is_empty() {
        return Err(Error::EmptyHypergraph);
    }
    let mut degree = vec![0usize; sys.n()];
    for e in sys.edges() {
        for &v in e {
            degree[v] += 1;
        }
    }
    Ok(degree.into_iter().max().unwrap_or(0))
}

/// `‖f‖_{L_p}` on `X_e`.
pub fn lp_norm(sys: &HypergraphSystem, e: &[usize], f: &EdgeFunction, p: ExtendedExponent) -> Result<f64> {
    f.check_on(sys, e)?;
    Ok(weighted_lp(f.values(), &sys.cell_weights(e), p))
}

/// `(Σ w |v|^p)^{1/p}` computed as `M (Σ w (|v|/M)^p)^{1/p}` with `M = max |v|`,
/// so that very large `p` neither overflows nor underflows needlessly.
pub(crate) fn weighted_lp(values: &[f64], weights: &[f64], p: ExtendedExponent) -> f64 {
    let m = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    match p {
        ExtendedExponent::Infinity => m,
        ExtendedExponent::Finite(_) if m == 0.0 => 0.0,
        ExtendedExponent::Finite(p) => {
            let s = tree_sum(values.len(), |c| weights[c] * (values[c].abs() / m).powf(p));
            m * s.powf(1.0 / p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys_2x2() -> HypergraphSystem {
        let s = ProbSpace::uniform(2).unwrap();
        HypergraphSystem::new(vec![s.clone(), s], vec![vec![0, 1]]).unwrap()
    }

    #[test]
    fn prob_space_normalizes() {
        assert_eq!(make_prob_space(&[1.0, 1.0]).unwrap().weights(), &[0.5, 0.5]);
        assert_eq!(make_prob_space(&[2.0, 1.0, 1.0]).unwrap().weights(), &[0.5, 0.25, 0.25]);
        assert!(matches!(
            make_prob_space(&[0.3, -0.1]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert_eq!(make_prob_space(&[]), Err(Error::EmptySpace));
        assert!(make_prob_space(&[f64::NAN]).is_err());
    }

    #[test]
    fn system_validation() {
        let s = ProbSpace::uniform(2).unwrap();
        let spaces = vec![s.clone(), s.clone(), s];
        assert!(matches!(
            HypergraphSystem::new(spaces.clone(), vec![vec![0, 3]]),
            Err(Error::VertexOutOfRange { vertex: 3, .. })
        ));
        assert!(matches!(
            HypergraphSystem::new(spaces.clone(), vec![vec![1, 0], vec![0, 1]]),
            Err(Error::DuplicateEdge(_))
        ));
        assert!(matches!(
            HypergraphSystem::new(spaces.clone(), vec![vec![1, 1]]),
            Err(Error::RepeatedVertex(_))
        ));
        assert!(matches!(
            HypergraphSystem::new(spaces.clone(), vec![vec![]]),
            Err(Error::EmptyEdge(_))
        ));
        let sys = HypergraphSystem::new(spaces, vec![vec![2, 1], vec![0, 1]]).unwrap();
        assert_eq!(sys.edges(), &[vec![0, 1], vec![1, 2]]);
        assert!(sys.is_uniform(2));
        assert!(!sys.is_uniform(3));
        assert_eq!(sys.edge_index(&[1, 2]), Some(1));
    }

    #[test]
    fn expectation_examples() {
        let sys = sys_2x2();
        let c = EdgeFunction::constant(&sys, &[0, 1], 3.5).unwrap();
        assert!((expectation(&sys, &[0, 1], &c).unwrap() - 3.5).abs() < 1e-15);
        let f = EdgeFunction::new(&sys, &[0], vec![3.0, 1.0]).unwrap();
        assert_eq!(expectation(&sys, &[0], &f).unwrap(), 2.0);
        let g = EdgeFunction::new(&sys, &[0, 1], vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert_eq!(expectation(&sys, &[0, 1], &g).unwrap(), 0.0);
        assert!(matches!(expectation(&sys, &[1], &f), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn omega_select_examples() {
        let tuples = vec![vec![3, 4], vec![5, 6]];
        let edge = [2, 7];
        assert_eq!(
            omega_select(&tuples, &OmegaIndex::constant(&edge, 1)).unwrap(),
            vec![5, 6]
        );
        let w = OmegaIndex::new(&edge, vec![0, 1], 2).unwrap();
        assert_eq!(omega_select(&tuples, &w).unwrap(), vec![3, 6]);
        let same = vec![vec![1, 2]; 4];
        for w in OmegaIndex::all(&edge, 4) {
            assert_eq!(omega_select(&same, &w).unwrap(), vec![1, 2]);
        }
        let bad = OmegaIndex::new(&edge, vec![0, 3], 4).unwrap();
        assert_eq!(
            omega_select(&tuples, &bad),
            Err(Error::DigitOutOfRange { digit: 3, ell: 2 })
        );
        assert!(OmegaIndex::new(&edge, vec![0, 2], 2).is_err());
    }

    #[test]
    fn max_degree_examples() {
        let s = ProbSpace::uniform(2).unwrap();
        let four = vec![s.clone(); 4];
        let matching = HypergraphSystem::new(four.clone(), vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(max_degree(&matching).unwrap(), 1);
        let tri = HypergraphSystem::new(vec![s.clone(); 3], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(max_degree(&tri).unwrap(), 2);
        for n in 2..7 {
            let sys = HypergraphSystem::complete(vec![s.clone(); n], n - 1).unwrap();
            // a fixed vertex lies in every (n-1)-subset except its own complement
            assert_eq!(max_degree(&sys).unwrap(), n - 1);
        }
        let empty = HypergraphSystem::new(four, vec![]).unwrap();
        assert_eq!(max_degree(&empty), Err(Error::EmptyHypergraph));
    }

    #[test]
    fn lp_norm_examples() {
        let sys = sys_2x2();
        let c = EdgeFunction::constant(&sys, &[0, 1], -1.5).unwrap();
        for p in [1.0, 2.0, 7.5] {
            let v = lp_norm(&sys, &[0, 1], &c, ExtendedExponent::Finite(p)).unwrap();
            assert!((v - 1.5).abs() < 1e-14);
        }
        let f = EdgeFunction::new(&sys, &[0], vec![0.0, 2.0]).unwrap();
        let v = lp_norm(&sys, &[0], &f, ExtendedExponent::Finite(2.0)).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(lp_norm(&sys, &[0], &f, ExtendedExponent::Infinity).unwrap(), 2.0);
    }

    #[test]
    fn exponent_parsing_and_conjugates() {
        assert_eq!("inf".parse::<ExtendedExponent>().unwrap(), ExtendedExponent::Infinity);
        assert_eq!(
            "2.5".parse::<ExtendedExponent>().unwrap(),
            ExtendedExponent::Finite(2.5)
        );
        assert!("0.5".parse::<ExtendedExponent>().is_err());
        assert!("abc".parse::<ExtendedExponent>().is_err());
        assert_eq!(ExtendedExponent::Finite(2.0).conjugate(), ExtendedExponent::Finite(2.0));
        assert_eq!(ExtendedExponent::Infinity.conjugate(), ExtendedExponent::Finite(1.0));
        assert_eq!(ExtendedExponent::Finite(1.0).conjugate(), ExtendedExponent::Infinity);
        let json = serde_json::to_string(&ExtendedExponent::Infinity).unwrap();
        assert_eq!(json, "\"inf\"");
        let back: ExtendedExponent = serde_json::from_str("4").unwrap();
        assert_eq!(back, ExtendedExponent::Finite(4.0));
    }

    #[test]
    fn at_point_reads_edge_coordinates() {
        let s2 = ProbSpace::uniform(2).unwrap();
        let s3 = ProbSpace::uniform(3).unwrap();
        let sys = HypergraphSystem::new(vec![s2.clone(), s3, s2], vec![vec![0, 2]]).unwrap();
        let f = EdgeFunction::new(&sys, &[1, 2], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(f.at_point(&[1, 2, 1]), 5.0);
        assert_eq!(f.get(&[1, 0]), 2.0);
    }
}
