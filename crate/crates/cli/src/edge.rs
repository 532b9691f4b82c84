use std::str::FromStr;

use boxlab_core::Instance;

use crate::error::{CliError, CliResult};

/// An edge given by its index in sorted edge order (`2`) or by its
/// vertices (`0,1`).
#[derive(Clone, Debug)]
pub enum EdgeArg {
    Index(usize),
    Vertices(Vec<usize>),
}

impl FromStr for EdgeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        let nums = parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|_| format!("bad edge {s:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if parts.len() == 1 && !s.contains(',') {
            Ok(Self::Index(nums[0]))
        } else {
            Ok(Self::Vertices(nums))
        }
    }
}

impl EdgeArg {
    pub fn resolve(&self, inst: &Instance) -> CliResult<Vec<usize>> {
        match self {
            Self::Index(k) => inst
                .system
                .edges()
                .get(*k)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("edge index {k} out of range"))),
            Self::Vertices(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                Ok(v)
            }
        }
    }
}
