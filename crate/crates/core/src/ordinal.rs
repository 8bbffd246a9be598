//! Ordinal time indices of the form ω·k + n.
//!
//! Desk-scale transfinite execution never needs ordinals at or beyond ω²,
//! so a pair of counters is a complete representation. The textual forms
//! are `17`, `w`, `w+3`, `w*2+1`.

use std::fmt;
use std::str::FromStr;

/// A time index ω·`limits` + `offset`.
///
/// The derived ordering is lexicographic on (limits, offset), which is
/// exactly the ordinal order for this fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalTime {
    /// Number of ω-multiples (k in ω·k + n).
    pub limits: u64,
    /// Finite offset past the last limit ordinal (n in ω·k + n).
    pub offset: u64,
}

impl OrdinalTime {
    pub const ZERO: OrdinalTime = OrdinalTime {
        limits: 0,
        offset: 0,
    };

    /// A finite time step n.
    pub fn finite(n: u64) -> Self {
        OrdinalTime {
            limits: 0,
            offset: n,
        }
    }

    /// The limit ordinal ω·k. Requires k ≥ 1.
    pub fn limit(k: u64) -> Self {
        assert!(k >= 1, "limit ordinal needs k >= 1");
        OrdinalTime {
            limits: k,
            offset: 0,
        }
    }

    /// The successor ordinal (adds 1 to the finite offset).
    pub fn succ(self) -> Self {
        OrdinalTime {
            limits: self.limits,
            offset: self.offset + 1,
        }
    }

    pub fn plus(self, n: u64) -> Self {
        OrdinalTime {
            limits: self.limits,
            offset: self.offset + n,
        }
    }

    /// True for ordinals with no immediate predecessor (ω, ω·2, …).
    pub fn is_limit(self) -> bool {
        self.limits >= 1 && self.offset == 0
    }

    pub fn is_finite(self) -> bool {
        self.limits == 0
    }
}

impl fmt::Display for OrdinalTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.limits, self.offset) {
            (0, n) => write!(f, "{n}"),
            (1, 0) => write!(f, "w"),
            (1, n) => write!(f, "w+{n}"),
            (k, 0) => write!(f, "w*{k}"),
            (k, n) => write!(f, "w*{k}+{n}"),
        }
    }
}

/// Failure to parse an ordinal literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad ordinal literal {literal:?}: {reason}")]
pub struct BadOrdinal {
    pub literal: String,
    pub reason: String,
}

impl FromStr for OrdinalTime {
    type Err = BadOrdinal;

    /// Grammar: `k` | `w` | `w*a` | `w+b` | `w*a+b` with a ≥ 1, b ≥ 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| BadOrdinal {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let count = |text: &str, what: &str| -> Result<u64, BadOrdinal> {
            if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad(&format!("expected a count {what}")));
            }
            text.parse()
                .map_err(|_| bad(&format!("count {what} is out of range")))
        };
        if s.is_empty() {
            return Err(bad("empty literal"));
        }
        if let Some(rest) = s.strip_prefix('w') {
            let (limits, offset_part) = if let Some(rest) = rest.strip_prefix('*') {
                let (a, tail) = match rest.split_once('+') {
                    Some((a, b)) => (a, Some(b)),
                    None => (rest, None),
                };
                let a = count(a, "after `w*`")?;
                if a == 0 {
                    return Err(bad("the ω-multiple must be at least 1"));
                }
                (a, tail)
            } else if let Some(b) = rest.strip_prefix('+') {
                (1, Some(b))
            } else if rest.is_empty() {
                (1, None)
            } else {
                return Err(bad("expected `*`, `+`, or end after `w`"));
            };
            let offset = match offset_part {
                Some(b) => count(b, "after `+`")?,
                None => 0,
            };
            Ok(OrdinalTime { limits, offset })
        } else {
            Ok(OrdinalTime::finite(count(s, "or `w…` form")?))
        }
    }
}
