//! Bounded chain complexes of free modules over ℤ or 𝔽_p and their homology.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{field_matrix, rank, smith_normal_form, IntMatrix, PrimeField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Prime(u64),
}

impl Ring {
    pub fn is_field(self) -> bool {
        matches!(self, Ring::Prime(_))
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// `C_n` free of rank `ranks[n - min_degree]`, with `∂_n : C_n → C_{n-1}`
/// stored as a `rank_{n-1} × rank_n` matrix.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    ring: Ring,
    min_degree: i64,
    ranks: Vec<usize>,
    boundaries: Vec<IntMatrix>,
}

impl ChainComplex {
    /// `boundaries[i]` is `∂` out of degree `min_degree + i + 1`. Shapes and
    /// `∂∂ = 0` (mod p over 𝔽_p) are checked.
    pub fn new(ring: Ring, min_degree: i64, ranks: Vec<usize>, boundaries: Vec<IntMatrix>) -> Result<Self> {
        if boundaries.len() + 1 != ranks.len().max(1) {
            return Err(Error::Shape(format!(
                "{} ranks need {} boundary maps, got {}",
                ranks.len(),
                ranks.len().saturating_sub(1),
                boundaries.len()
            )));
        }
        for (i, b) in boundaries.iter().enumerate() {
            if b.rows() != ranks[i] || b.cols() != ranks[i + 1] {
                return Err(Error::Shape(format!(
                    "boundary out of degree {} is {}x{}, expected {}x{}",
                    min_degree + i as i64 + 1,
                    b.rows(),
                    b.cols(),
                    ranks[i],
                    ranks[i + 1]
                )));
            }
        }
        for i in 1..boundaries.len() {
            let sq = boundaries[i - 1].mul(&boundaries[i]);
            let vanishes = match ring {
                Ring::Integers => sq.is_zero(),
                Ring::Prime(p) => sq.reduce_mod(p).iter().flatten().all(|&x| x == 0),
            };
            if !vanishes {
                return Err(Error::BoundaryNotNilpotent { degree: min_degree + i as i64 + 1 });
            }
        }
        Ok(Self { ring, min_degree, ranks, boundaries })
    }

    /// The zero complex.
    pub fn empty(ring: Ring) -> Self {
        Self { ring, min_degree: 0, ranks: Vec::new(), boundaries: Vec::new() }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.ranks.len() as i64 - 1
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.min_degree..=self.max_degree()
    }

    pub fn rank(&self, n: i64) -> usize {
        usize::try_from(n - self.min_degree).ok().and_then(|i| self.ranks.get(i).copied()).unwrap_or(0)
    }

    /// `∂_n`, a zero matrix of the right shape outside the stored range.
    pub fn boundary(&self, n: i64) -> IntMatrix {
        let i = n - self.min_degree - 1;
        if i >= 0 && (i as usize) < self.boundaries.len() {
            self.boundaries[i as usize].clone()
        } else {
            IntMatrix::zeros(self.rank(n - 1), self.rank(n))
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|n| sign(n) * self.rank(n) as i64).sum()
    }

    /// Same matrices read over another ring.
    pub fn with_ring(&self, ring: Ring) -> Result<Self> {
        Self::new(ring, self.min_degree, self.ranks.clone(), self.boundaries.clone())
    }

    /// Rank of `∂_n` over `ℚ` (ℤ) or `𝔽_p`.
    fn boundary_rank(&self, n: i64) -> usize {
        let b = self.boundary(n);
        if b.rows() == 0 || b.cols() == 0 {
            return 0;
        }
        match self.ring {
            Ring::Integers => smith_normal_form(&b).rank(),
            Ring::Prime(p) => {
                let f = PrimeField(p);
                rank(&f, &field_matrix(&f, &b))
            }
        }
    }
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// One homology group: `R^rank ⊕ ⊕ ℤ/d_i`. Over a field `torsion` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn zero() -> Self {
        Self { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        Self { rank, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn render(&self, ring: Ring) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        if self.rank > 0 {
            let base = ring.to_string();
            parts.push(if self.rank == 1 { base } else { format!("{base}^{}", self.rank) });
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        parts.join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologySummary {
    pub ring: Ring,
    pub min_degree: i64,
    pub groups: Vec<HomologyGroup>,
}

impl HomologySummary {
    pub fn degree(&self, n: i64) -> HomologyGroup {
        usize::try_from(n - self.min_degree)
            .ok()
            .and_then(|i| self.groups.get(i).cloned())
            .unwrap_or_else(HomologyGroup::zero)
    }

    /// Betti numbers (ℤ) or dimensions (𝔽_p) from `from` through `to`.
    pub fn ranks(&self, from: i64, to: i64) -> Vec<usize> {
        (from..=to).map(|n| self.degree(n).rank).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.groups.iter().enumerate().map(|(i, g)| sign(self.min_degree + i as i64) * g.rank as i64).sum()
    }

    /// Drops trailing and leading zero groups for display.
    pub fn top_degree(&self) -> Option<i64> {
        self.groups.iter().rposition(|g| !g.is_zero()).map(|i| self.min_degree + i as i64)
    }

    /// Isomorphism of graded groups.
    pub fn same_groups(&self, other: &HomologySummary) -> bool {
        let lo = self.min_degree.min(other.min_degree);
        let hi = (self.min_degree + self.groups.len() as i64).max(other.min_degree + other.groups.len() as i64);
        (lo..hi).all(|n| self.degree(n) == other.degree(n))
    }
}

impl fmt::Display for HomologySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .enumerate()
            .map(|(i, g)| format!("H{}={}", self.min_degree + i as i64, g.render(self.ring)))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

pub fn homology(c: &ChainComplex) -> HomologySummary {
    let groups = c
        .degrees()
        .map(|n| {
            let kernel = c.rank(n) - c.boundary_rank(n);
            let image = c.boundary_rank(n + 1);
            let rank = kernel - image;
            let torsion = match c.ring {
                Ring::Prime(_) => Vec::new(),
                Ring::Integers => {
                    let b = c.boundary(n + 1);
                    if b.rows() == 0 || b.cols() == 0 {
                        Vec::new()
                    } else {
                        smith_normal_form(&b).invariant_factors().into_iter().filter(|d| !d.is_one()).collect()
                    }
                }
            };
            HomologyGroup { rank, torsion }
        })
        .collect();
    HomologySummary { ring: c.ring, min_degree: c.min_degree, groups }
}

/// Direct sum of complexes over the same ring.
pub fn direct_sum(a: &ChainComplex, b: &ChainComplex) -> Result<ChainComplex> {
    if a.ring != b.ring {
        return Err(Error::Shape("direct sum over different rings".into()));
    }
    if a.ranks.is_empty() {
        return Ok(b.clone());
    }
    if b.ranks.is_empty() {
        return Ok(a.clone());
    }
    let lo = a.min_degree.min(b.min_degree);
    let hi = a.max_degree().max(b.max_degree());
    let ranks: Vec<usize> = (lo..=hi).map(|n| a.rank(n) + b.rank(n)).collect();
    let boundaries = (lo + 1..=hi)
        .map(|n| {
            let mut m = IntMatrix::zeros(a.rank(n - 1) + b.rank(n - 1), a.rank(n) + b.rank(n));
            m.set_block(0, 0, &a.boundary(n));
            m.set_block(a.rank(n - 1), a.rank(n), &b.boundary(n));
            m
        })
        .collect();
    ChainComplex::new(a.ring, lo, ranks, boundaries)
}

/// Integer entry helper for tests and fixtures.
pub fn int(x: i64) -> BigInt {
    BigInt::from(x)
}
