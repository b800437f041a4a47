//! Change plans: per-feature target intervals in normalized `[0, 1]` space.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;

use crate::data::CodeUnit;
use crate::error::{Error, Result};
use crate::explain::Explanation;
use crate::precedence::PrecedenceProfile;
use crate::seed;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::param("interval", alloc::format!("lo {lo} exceeds hi {hi}")));
        }
        Ok(Interval { lo, hi })
    }

    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    /// Containment with slack `tol` at both endpoints.
    pub fn contains_within(&self, value: f64, tol: f64) -> bool {
        self.lo - tol <= value && value <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PlannerId {
    Classical,
    Time,
    Random,
}

impl PlannerId {
    pub const ALL: [PlannerId; 3] = [PlannerId::Classical, PlannerId::Time, PlannerId::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PlannerId::Classical => "classical",
            PlannerId::Time => "time",
            PlannerId::Random => "random",
        }
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(PlannerId::Classical),
            "time" => Ok(PlannerId::Time),
            "random" => Ok(PlannerId::Random),
            other => Err(Error::param("planner", alloc::format!("unknown planner `{other}`"))),
        }
    }
}

/// Proposed target intervals for one code unit. Features absent from
/// `proposals` are left unchanged.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plan {
    pub unit: String,
    pub planner: PlannerId,
    pub proposals: BTreeMap<usize, Interval>,
    /// Seed of the random planner; `None` for explanation-based planners.
    pub seed: Option<u64>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.proposals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proposals.is_empty()
    }
}

/// Reflect an interval about the midpoint of `[0, 1]`.
pub fn flip_around_mid(v: Interval) -> Interval {
    Interval { lo: 1.0 - v.hi, hi: 1.0 - v.lo }
}

/// Flip every explained bin whose weight is non-negative.
pub fn classical_plan(e: &Explanation) -> Plan {
    filtered_plan(e, PlannerId::Classical, |_| true)
}

/// As [`classical_plan`], restricted to precedented features.
pub fn time_plan(e: &Explanation, profile: &PrecedenceProfile) -> Plan {
    filtered_plan(e, PlannerId::Time, |feature| profile.is_precedented(feature))
}

fn filtered_plan(e: &Explanation, planner: PlannerId, allowed: impl Fn(usize) -> bool) -> Plan {
    let proposals = e
        .entries
        .iter()
        .filter(|entry| entry.weight >= 0.0 && allowed(entry.feature))
        .map(|entry| (entry.feature, flip_around_mid(entry.interval)))
        .collect();
    Plan { unit: e.unit.clone(), planner, proposals, seed: None }
}

/// Default per-feature change probability of the random planner.
pub const DEFAULT_P_CHANGE: f64 = 0.5;

/// Baseline planner: one random interval `(a, b)` drawn up front, then each
/// feature independently receives it with probability `p_change`.
pub fn random_walk_plan(unit: &CodeUnit, p_change: f64, seed: u64) -> Result<Plan> {
    if !(0.0..=1.0).contains(&p_change) {
        return Err(Error::param("p_change", "must lie in [0, 1]"));
    }
    let mut rng = seed::rng(seed);
    let (a, b): (f64, f64) = (rng.gen(), rng.gen());
    let interval = Interval { lo: a.min(b), hi: a.max(b) };
    let mut proposals = BTreeMap::new();
    for feature in 0..unit.features.len() {
        let draw: f64 = rng.gen();
        if draw < p_change {
            proposals.insert(feature, interval);
        }
    }
    Ok(Plan { unit: unit.name.clone(), planner: PlannerId::Random, proposals, seed: Some(seed) })
}
