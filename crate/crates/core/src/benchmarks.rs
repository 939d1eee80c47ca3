//! Pseudo-Boolean benchmark functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};

/// An integer-valued objective to be maximized.
pub trait Fitness: Sync {
    fn n(&self) -> usize;

    fn evaluate(&self, x: &BitString) -> i64;

    fn optimum_fitness(&self) -> i64;

    fn is_optimum(&self, x: &BitString) -> bool {
        self.evaluate(x) == self.optimum_fitness()
    }

    /// Fitness as a function of the OneMax value, for objectives that only
    /// depend on `‖x‖₁`. `None` otherwise.
    fn onemax_profile(&self, _om: usize) -> Option<i64> {
        None
    }
}

/// `‖x‖₁`.
#[inline]
pub fn onemax(x: &BitString) -> i64 {
    x.onemax() as i64
}

#[inline]
fn jump_of_om(n: usize, k: usize, om: usize) -> i64 {
    if om <= n - k || om == n {
        (om + k) as i64
    } else {
        (n - om) as i64
    }
}

fn check_jump_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!("jump size k={k} outside [1..{n}]")));
    }
    Ok(())
}

/// Jump function with gap width `k - 1`; the unique optimum is all-ones with
/// fitness `n + k`.
pub fn jump(x: &BitString, k: usize) -> Result<i64> {
    check_jump_k(x.len(), k)?;
    Ok(jump_of_om(x.len(), k, x.onemax()))
}

/// True iff `n - k < ‖x‖₁ < n`.
pub fn in_gap(x: &BitString, k: usize) -> Result<bool> {
    let n = x.len();
    check_jump_k(n, k)?;
    let om = x.onemax();
    Ok(om > n - k && om < n)
}

#[inline]
fn cliff_of_om(n: usize, om: usize) -> i64 {
    let drop = n / 3;
    if om < n - drop {
        om as i64
    } else {
        om as i64 - drop as i64
    }
}

/// Cliff: OneMax up to `n - ⌊n/3⌋`, then a drop of `⌊n/3⌋`.
pub fn cliff(x: &BitString) -> i64 {
    cliff_of_om(x.len(), x.onemax())
}

pub fn leadingones(x: &BitString) -> i64 {
    x.leading_ones() as i64
}

/// A benchmark instance of fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Objective {
    OneMax { n: usize },
    Jump { n: usize, k: usize },
    Cliff { n: usize },
    LeadingOnes { n: usize },
}

impl Objective {
    pub fn onemax(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::OneMax { n })
    }

    pub fn jump(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        check_jump_k(n, k)?;
        Ok(Self::Jump { n, k })
    }

    pub fn cliff(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("cliff needs n >= 3, got {n}")));
        }
        Ok(Self::Cliff { n })
    }

    pub fn leadingones(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self::LeadingOnes { n })
    }

    pub fn kind(&self) -> ObjectiveKind {
        match *self {
            Self::OneMax { .. } => ObjectiveKind::OneMax,
            Self::Jump { k, .. } => ObjectiveKind::Jump { k: Some(k) },
            Self::Cliff { .. } => ObjectiveKind::Cliff,
            Self::LeadingOnes { .. } => ObjectiveKind::LeadingOnes,
        }
    }

    /// Jump size, if this is a jump function.
    pub fn jump_k(&self) -> Option<usize> {
        match *self {
            Self::Jump { k, .. } => Some(k),
            _ => None,
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension n must be positive".into()));
    }
    Ok(())
}

impl Fitness for Objective {
    fn n(&self) -> usize {
        match *self {
            Self::OneMax { n } | Self::Jump { n, .. } | Self::Cliff { n } | Self::LeadingOnes { n } => n,
        }
    }

    #[inline]
    fn evaluate(&self, x: &BitString) -> i64 {
        debug_assert_eq!(x.len(), self.n());
        match *self {
            Self::OneMax { .. } => onemax(x),
            Self::Jump { n, k } => jump_of_om(n, k, x.onemax()),
            Self::Cliff { n } => cliff_of_om(n, x.onemax()),
            Self::LeadingOnes { .. } => leadingones(x),
        }
    }

    fn optimum_fitness(&self) -> i64 {
        match *self {
            Self::OneMax { n } | Self::LeadingOnes { n } => n as i64,
            Self::Jump { n, k } => (n + k) as i64,
            Self::Cliff { n } => (n - n / 3) as i64,
        }
    }

    fn onemax_profile(&self, om: usize) -> Option<i64> {
        match *self {
            Self::OneMax { .. } => Some(om as i64),
            Self::Jump { n, k } => Some(jump_of_om(n, k, om)),
            Self::Cliff { n } => Some(cliff_of_om(n, om)),
            Self::LeadingOnes { .. } => None,
        }
    }
}

/// Dimension-free objective identifier as used on the command line and in
/// configs: `onemax`, `jump`, `jump:k=K`, `cliff`, `leadingones`.
///
/// A bare `jump` leaves `k` to be supplied separately (e.g. from a sweep grid).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    OneMax,
    Jump { k: Option<usize> },
    Cliff,
    LeadingOnes,
}

impl ObjectiveKind {
    /// Builds an instance of dimension `n`. `k` overrides any jump size
    /// embedded in the identifier.
    pub fn instantiate(&self, n: usize, k: Option<usize>) -> Result<Objective> {
        match *self {
            Self::OneMax => Objective::onemax(n),
            Self::Jump { k: own } => {
                let k = k
                    .or(own)
                    .ok_or_else(|| Error::InvalidConfig("jump objective needs a jump size k".into()))?;
                Objective::jump(n, k)
            }
            Self::Cliff => Objective::cliff(n),
            Self::LeadingOnes => Objective::leadingones(n),
        }
    }

    pub fn is_jump(&self) -> bool {
        matches!(self, Self::Jump { .. })
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ObjectiveId(s.to_owned());
        let (name, params) = match s.split_once(':') {
            Some((name, params)) => (name, Some(params)),
            None => (s, None),
        };
        match (name.trim().to_ascii_lowercase().as_str(), params) {
            ("onemax", None) => Ok(Self::OneMax),
            ("cliff", None) => Ok(Self::Cliff),
            ("leadingones", None) => Ok(Self::LeadingOnes),
            ("jump", None) => Ok(Self::Jump { k: None }),
            ("jump", Some(params)) => {
                let (key, value) = params.split_once('=').ok_or_else(bad)?;
                if key.trim() != "k" {
                    return Err(bad());
                }
                let k: usize = value.trim().parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(Self::Jump { k: Some(k) })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OneMax => f.write_str("onemax"),
            Self::Jump { k: None } => f.write_str("jump"),
            Self::Jump { k: Some(k) } => write!(f, "jump:k={k}"),
            Self::Cliff => f.write_str("cliff"),
            Self::LeadingOnes => f.write_str("leadingones"),
        }
    }
}
