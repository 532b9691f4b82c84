//! Verdict and certificate types shared by the inequality checkers.

use serde::{Deserialize, Serialize};

/// Outcome of a check that may be inconclusive when the search was incomplete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::True
        } else {
            Self::False
        }
    }

    /// Conjunction: any `False` wins, then any `Unknown`.
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Self::False, _) | (_, Self::False) => Self::False,
            (Self::Unknown, _) | (_, Self::Unknown) => Self::Unknown,
            _ => Self::True,
        }
    }

    pub fn all<I: IntoIterator<Item = Verdict>>(items: I) -> Self {
        items.into_iter().fold(Self::True, Self::and)
    }

    pub fn is_true(self) -> bool {
        self == Self::True
    }
}

/// Whether a supremum was certified by exhaustive search or only bounded below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exact,
    Heuristic,
}

impl std::str::FromStr for SearchMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "heuristic" => Ok(Self::Heuristic),
            other => Err(crate::Error::BadParameter(format!("unknown search mode {other:?}"))),
        }
    }
}

/// One hypothesis of a theorem, with the measured value and its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: Verdict,
    #[serde(with = "float")]
    pub value: f64,
    #[serde(with = "float")]
    pub bound: f64,
}

impl Hypothesis {
    pub fn new(name: impl Into<String>, holds: Verdict, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            holds,
            value,
            bound,
        }
    }

    /// `value <= bound + tol`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tol: f64) -> Self {
        Self::new(name, Verdict::from_bool(value <= bound + tol), value, bound)
    }

    /// `value >= bound - tol`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tol: f64) -> Self {
        Self::new(name, Verdict::from_bool(value >= bound - tol), value, bound)
    }
}

/// Verdict of an inequality `lhs <= rhs` together with the hypotheses under
/// which the inequality is a theorem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub hypotheses: Vec<Hypothesis>,
    #[serde(with = "float")]
    pub lhs: f64,
    #[serde(with = "float")]
    pub rhs: f64,
    pub holds: bool,
    #[serde(with = "float")]
    pub slack: f64,
    pub mode: SearchMode,
}

impl Certificate {
    pub fn new(name: impl Into<String>, hypotheses: Vec<Hypothesis>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            hypotheses,
            lhs,
            rhs,
            holds: lhs <= rhs + tol,
            slack: rhs - lhs,
            mode: SearchMode::Exact,
        }
    }

    pub fn hypotheses_hold(&self) -> Verdict {
        Verdict::all(self.hypotheses.iter().map(|h| h.holds))
    }
}

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`, which plain JSON cannot represent.
pub mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other:?}"))),
            },
        }
    }
}
