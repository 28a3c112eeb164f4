//! G-CW complexes described by cell orbits and labelled boundary data.
//!
//! A cell orbit `α` of dimension `n` has a representative cell `e_α`
//! pointwise fixed by its stabilizer `H_α`; the cells of the orbit are the
//! translates `g·e_α`, one per coset `gH_α`. A boundary record
//! `(α, β, x, d)` contributes `d·(x·e_β)` to `∂e_α`, which requires
//! `x⁻¹ H_α x ⊆ H_β`, i.e. an orbit morphism `G/H_α → G/H_β`.
//!
//! An optional G-subcomplex `A` turns every assembler into the relative
//! version for the pair `(X, A)`.

mod flat;

pub use flat::FlatComplex;

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::coeff::{CoefficientSystem, SystemKind, Variance};
use crate::complexes::{ChainComplex, Ring};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, OrbitMorphism, Subgroup};
use crate::linalg::IntMatrix;
use crate::specseq::FilteredComplex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellOrbit {
    pub dim: usize,
    pub label: String,
    pub stabilizer: Subgroup,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryRecord {
    pub cell: usize,
    pub face: usize,
    pub coset: usize,
    pub degree: i64,
}

#[derive(Clone, Debug)]
pub struct GCWComplex {
    group: FiniteGroup,
    cells: Vec<CellOrbit>,
    records: Vec<BoundaryRecord>,
    subcomplex: Vec<bool>,
}

impl GCWComplex {
    /// Validates stabilizers, record dimensions, the morphism condition on
    /// every record, and `∂∂ = 0` on the underlying complex.
    pub fn new(group: FiniteGroup, cells: Vec<CellOrbit>, records: Vec<BoundaryRecord>) -> Result<Self> {
        for c in &cells {
            group.subgroup(c.stabilizer.elements())?;
        }
        for r in &records {
            let (Some(a), Some(b)) = (cells.get(r.cell), cells.get(r.face)) else {
                return Err(Error::Fixture(format!("boundary record refers to missing cell: {r:?}")));
            };
            if a.dim != b.dim + 1 {
                return Err(Error::Fixture(format!(
                    "face {} of {} has dimension {}, expected {}",
                    b.label,
                    a.label,
                    b.dim,
                    a.dim as i64 - 1
                )));
            }
            if r.coset >= group.order() {
                return Err(Error::Fixture(format!("coset representative {} out of range", r.coset)));
            }
            OrbitMorphism::new(&group, a.stabilizer.clone(), b.stabilizer.clone(), r.coset)?;
        }
        let x = Self { subcomplex: vec![false; cells.len()], group, cells, records };
        x.underlying()?;
        Ok(x)
    }

    /// Marks a G-subcomplex; it must contain every face of its cells.
    pub fn with_subcomplex(mut self, cells: &[usize]) -> Result<Self> {
        let mut mask = vec![false; self.cells.len()];
        for &c in cells {
            *mask.get_mut(c).ok_or_else(|| Error::Fixture(format!("subcomplex cell {c} out of range")))? = true;
        }
        for r in &self.records {
            if mask[r.cell] && !mask[r.face] && r.degree != 0 {
                return Err(Error::Fixture(format!(
                    "subcomplex is not closed: {} has face {} outside it",
                    self.cells[r.cell].label, self.cells[r.face].label
                )));
            }
        }
        self.subcomplex = mask;
        Ok(self)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn cells(&self) -> &[CellOrbit] {
        &self.cells
    }

    pub fn records(&self) -> &[BoundaryRecord] {
        &self.records
    }

    pub fn in_subcomplex(&self, cell: usize) -> bool {
        self.subcomplex[cell]
    }

    pub fn dimension(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    /// Cell orbits of dimension `n` outside the subcomplex, in order.
    pub fn relative_cells(&self, n: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].dim == n && !self.subcomplex[i]).collect()
    }

    /// Bredon chains `C_n = ⊕_α M(G/H_α)` of a covariant system.
    pub fn bredon_chain_complex(&self, m: &CoefficientSystem) -> Result<ChainComplex> {
        if m.variance() != Variance::Covariant {
            return Err(Error::VarianceMismatch);
        }
        self.check_group(m)?;
        let top = self.dimension();
        let layout: Vec<Vec<(usize, usize)>> = (0..=top)
            .map(|n| {
                let mut offset = 0;
                self.relative_cells(n)
                    .into_iter()
                    .map(|a| {
                        let start = offset;
                        offset += m.value(&self.cells[a].stabilizer).rank();
                        (a, start)
                    })
                    .collect()
            })
            .collect();
        let ranks: Vec<usize> = (0..=top)
            .map(|n| layout[n].iter().map(|&(a, _)| m.value(&self.cells[a].stabilizer).rank()).sum())
            .collect();
        let boundaries = (1..=top)
            .map(|n| {
                let mut mat = IntMatrix::zeros(ranks[n - 1], ranks[n]);
                for &(a, col) in &layout[n] {
                    for r in self.records.iter().filter(|r| r.cell == a) {
                        let Some(&(_, row)) = layout[n - 1].iter().find(|&&(b, _)| b == r.face) else {
                            continue;
                        };
                        let block = m.induced_matrix(&self.morphism(r)).scale(&BigInt::from(r.degree));
                        add_block(&mut mat, row, col, &block);
                    }
                }
                mat
            })
            .collect();
        ChainComplex::new(m.ring(), 0, ranks, boundaries)
    }

    /// Bredon chains filtered by dimension, with free cells one step late,
    /// so that `E¹` separates the singular part from the free part.
    pub fn orbit_type_filtration(&self, m: &CoefficientSystem) -> Result<FilteredComplex> {
        let base = self.bredon_chain_complex(m)?;
        let filt = (0..=self.dimension())
            .map(|n| {
                self.relative_cells(n)
                    .into_iter()
                    .flat_map(|a| {
                        let cell = &self.cells[a];
                        let level = n + usize::from(cell.stabilizer.order() == 1);
                        std::iter::repeat_n(level, m.value(&cell.stabilizer).rank())
                    })
                    .collect()
            })
            .collect();
        FilteredComplex::new(base, filt)
    }

    /// Bredon cochains of a contravariant system, placed in degree `-n` so
    /// that the coboundary is an ordinary chain-complex differential.
    pub fn bredon_cochain_complex(&self, m: &CoefficientSystem) -> Result<ChainComplex> {
        if m.variance() != Variance::Contravariant {
            return Err(Error::VarianceMismatch);
        }
        self.check_group(m)?;
        let covariant_shape = CoefficientSystem::new(&self.group, m.kind().clone(), Variance::Covariant, m.ring())?;
        let chains = self.bredon_chain_complex(&covariant_shape)?;
        // Transposing the covariant matrices gives the contravariant maps.
        let top = chains.max_degree();
        let ranks: Vec<usize> = (0..=top).rev().map(|n| chains.rank(n)).collect();
        let boundaries = (1..=top).rev().map(|n| chains.boundary(n).transpose()).collect();
        ChainComplex::new(m.ring(), -top, ranks, boundaries)
    }

    fn check_group(&self, m: &CoefficientSystem) -> Result<()> {
        if m.group() != &self.group {
            return Err(Error::Shape("coefficient system over a different group".into()));
        }
        Ok(())
    }

    fn morphism(&self, r: &BoundaryRecord) -> OrbitMorphism {
        OrbitMorphism::new(
            &self.group,
            self.cells[r.cell].stabilizer.clone(),
            self.cells[r.face].stabilizer.clone(),
            r.coset,
        )
        .expect("validated at construction")
    }

    /// The ordinary cellular chain complex of the underlying space (or pair).
    pub fn underlying(&self) -> Result<ChainComplex> {
        let e = self.group.trivial_subgroup();
        self.subquotient_complex(&e, &e)
    }

    /// Cellular chains of `((X/H)^K, (A/H)^K)`.
    pub fn subquotient_complex(&self, h: &Subgroup, k: &Subgroup) -> Result<ChainComplex> {
        self.subquotient_with(h, k, |_| false)
    }

    /// Cellular chains of `(X/G, A/G ∪ X^G)`.
    pub fn quotient_rel_fixed_complex(&self) -> Result<ChainComplex> {
        let g = self.group.whole();
        let e = self.group.trivial_subgroup();
        let order = self.group.order();
        self.subquotient_with(&g, &e, |a| self.cells[a].stabilizer.order() == order)
    }

    fn subquotient_with(&self, h: &Subgroup, k: &Subgroup, drop: impl Fn(usize) -> bool) -> Result<ChainComplex> {
        let grp = &self.group;
        let h = grp.subgroup(h.elements())?;
        let k = grp.subgroup(k.elements())?;
        if !k.is_subgroup_of(&grp.normalizer(&h)) {
            return Err(Error::InvalidPair(format!("{k} does not normalize {h}")));
        }
        let excluded = |a: usize| self.subcomplex[a] || drop(a);
        // canonical H-orbit representative of the cell g·e_α
        let canon = |a: usize, g: usize| -> usize {
            let stab = &self.cells[a].stabilizer;
            h.elements().iter().map(|&y| grp.coset_rep(grp.mul(y, g), stab)).min().expect("nonempty")
        };
        let top = self.dimension();
        let mut index: Vec<BTreeMap<(usize, usize), usize>> = vec![BTreeMap::new(); top + 1];
        let mut cells_by_dim: Vec<Vec<(usize, usize)>> = vec![Vec::new(); top + 1];
        for (a, cell) in self.cells.iter().enumerate() {
            if excluded(a) {
                continue;
            }
            let mut reps: Vec<usize> = grp.left_cosets(&cell.stabilizer).into_iter().map(|g| canon(a, g)).collect();
            reps.sort_unstable();
            reps.dedup();
            for g in reps {
                let fixed = k.elements().iter().all(|&y| canon(a, grp.mul(y, g)) == g);
                if fixed {
                    let n = cell.dim;
                    index[n].insert((a, g), cells_by_dim[n].len());
                    cells_by_dim[n].push((a, g));
                }
            }
        }
        let ranks: Vec<usize> = cells_by_dim.iter().map(Vec::len).collect();
        let mut boundaries = Vec::with_capacity(top);
        for n in 1..=top {
            let mut mat = IntMatrix::zeros(ranks[n - 1], ranks[n]);
            for (col, &(a, g)) in cells_by_dim[n].iter().enumerate() {
                for r in self.records.iter().filter(|r| r.cell == a) {
                    if excluded(r.face) {
                        continue;
                    }
                    let face = (r.face, canon(r.face, grp.mul(g, r.coset)));
                    let row = *index[n - 1].get(&face).ok_or_else(|| {
                        Error::Fixture(format!(
                            "face {} of a fixed cell of {} is not fixed",
                            self.cells[r.face].label, self.cells[a].label
                        ))
                    })?;
                    mat.add_to(row, col, &BigInt::from(r.degree));
                }
            }
            boundaries.push(mat);
        }
        ChainComplex::new(Ring::Integers, 0, ranks, boundaries)
    }

    /// The complex computing the theory named by `kind` with constant ℤ
    /// values, assembled directly from cells rather than through Bredon
    /// chains.
    pub fn oracle_complex(&self, kind: &SystemKind) -> Result<ChainComplex> {
        let e = self.group.trivial_subgroup();
        let g = self.group.whole();
        match kind {
            SystemKind::Singular => self.subquotient_complex(&e, &e),
            SystemKind::Constant | SystemKind::Quotient => self.subquotient_complex(&g, &e),
            SystemKind::FixedPoint => self.subquotient_complex(&e, &g),
            SystemKind::QuotientRelFixed => self.quotient_rel_fixed_complex(),
            SystemKind::General { h, k } => self.subquotient_complex(h, k),
        }
    }
}

fn add_block(mat: &mut IntMatrix, r0: usize, c0: usize, block: &IntMatrix) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            mat.add_to(r0 + i, c0 + j, block.get(i, j));
        }
    }
}

#[cfg(test)]
pub(crate) mod tests;
