//! Sheets of the Riemann surface carried by the square roots `r_n(λ)`.
//!
//! A sheet is labelled by the finite set `E ⊂ ℕ₀` of indices whose square
//! root is taken on branch 1. Only finitely supported sets are representable,
//! which is exactly the component reachable from the physical sheet by
//! finitely many crossings of the real axis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest index that fits in a [`SheetId`].
pub const MAX_INDEX: usize = 63;

/// A sheet `Z_E`, stored as the bitmask of its characteristic vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SheetId(u64);

impl SheetId {
    /// The physical sheet `Z_∅`.
    pub const PHYSICAL: SheetId = SheetId(0);

    pub fn from_mask(mask: u64) -> Self {
        SheetId(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    /// Builds a sheet from its member indices. Panics on an index above [`MAX_INDEX`].
    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut mask = 0u64;
        for m in members {
            assert!(m <= MAX_INDEX, "sheet index {m} exceeds {MAX_INDEX}");
            mask |= 1 << m;
        }
        SheetId(mask)
    }

    pub fn members(self) -> Vec<usize> {
        (0..=MAX_INDEX).filter(|&k| self.0 >> k & 1 == 1).collect()
    }

    pub fn is_physical(self) -> bool {
        self.0 == 0
    }

    /// Largest member, `None` for the physical sheet.
    pub fn max_member(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// The characteristic vector entry `l_n^E`; zero for `n = -1` and beyond the support.
    pub fn branch(self, n: isize) -> u8 {
        if n < 0 || n as usize > MAX_INDEX {
            0
        } else {
            (self.0 >> n & 1) as u8
        }
    }

    /// The sheet reached by crossing the interval `(ν_n, ν_{n+1})`: branches
    /// `0..=n` are flipped. `n = -1` crosses `(-∞, ν_0)` and is the identity.
    pub fn adjacent_through(self, n: isize) -> SheetId {
        assert!(n >= -1, "adjacency index must be >= -1");
        assert!(
            n < MAX_INDEX as isize,
            "adjacency index {n} leaves the representable support"
        );
        if n < 0 {
            return self;
        }
        let prefix = (1u64 << (n + 1)) - 1;
        SheetId(self.0 ^ prefix)
    }

    /// Number of sheets on a shortest adjacency path from `self` to `other`
    /// (so a sheet is at distance 1 from itself).
    ///
    /// A move through `(ν_n, ν_{n+1})` toggles a prefix, so in the difference
    /// `d = E Δ F` each move accounts for exactly one position where `d_m ≠ d_{m+1}`.
    pub fn rho(self, other: SheetId) -> usize {
        let d = self.0 ^ other.0;
        1 + (d ^ (d >> 1)).count_ones() as usize
    }

    /// Threshold indices `n ∈ 1..=n_max` with `(l_{n-1}, l_n, l_{n+1})` equal to
    /// `(1,0,0)` or `(0,1,1)`: the thresholds that shed a resonance onto the lower
    /// half of this sheet at weak coupling.
    pub fn threshold_set(self, n_max: usize) -> Vec<usize> {
        (1..=n_max)
            .filter(|&n| {
                let n = n as isize;
                matches!(
                    (self.branch(n - 1), self.branch(n), self.branch(n + 1)),
                    (1, 0, 0) | (0, 1, 1)
                )
            })
            .collect()
    }

    /// [`threshold_set`](Self::threshold_set) up to `max(E) + 2`, past which every
    /// branch triple is `(0,0,0)` and the set cannot grow.
    pub fn threshold_set_complete(self) -> Vec<usize> {
        let n_max = self.max_member().map_or(1, |m| m + 2);
        self.threshold_set(n_max)
    }

    /// The four sheets glued around the threshold `ν_n` in the uniformizing
    /// variable `κ` (`λ = ν_n - κ⁴`).
    pub fn sector_chain(self, n: usize) -> SectorChain {
        let n = n as isize;
        let f = self.adjacent_through(n - 1);
        let g = f.adjacent_through(n);
        let h = g.adjacent_through(n - 1);
        SectorChain { e: self, f, g, h }
    }
}

/// Sheets `E ∼_{n-1} F ∼_n G ∼_{n-1} H ∼_n E` glued around the threshold `ν_n`.
///
/// Walking the chain from `E` to `F` crosses `(ν_{n-1}, ν_n)`, which in the
/// `κ`-plane is the ray `arg κ = 0`; so `F` is met by decreasing `arg κ`.
/// See `localred::sector_sheet` for the assignment of angular sectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorChain {
    pub e: SheetId,
    pub f: SheetId,
    pub g: SheetId,
    pub h: SheetId,
}

impl SectorChain {
    pub fn as_array(&self) -> [SheetId; 4] {
        [self.e, self.f, self.g, self.h]
    }
}

impl fmt::Display for SheetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for SheetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SheetId::PHYSICAL);
        }
        let mut mask = 0u64;
        for tok in s.split(',') {
            let tok = tok.trim();
            let k: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad sheet member {tok:?} in {s:?}")))?;
            if k > MAX_INDEX {
                return Err(Error::Parse(format!(
                    "sheet member {k} exceeds supported index {MAX_INDEX}"
                )));
            }
            mask |= 1 << k;
        }
        Ok(SheetId(mask))
    }
}

impl Serialize for SheetId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SheetId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
