//! Bredon coefficient systems with free values.
//!
//! Every built-in system except the relative one is a member of the family
//! `G/L ↦ ℤ[((G/L)/H)^K]` for `K ≤ N_G(H)`, with morphisms acting through
//! the underlying map of finite sets. Covariant systems push forward along
//! that map; contravariant systems pull back, so their matrices are
//! transposes.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::complexes::Ring;
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, OrbitMorphism, Subgroup};
use crate::linalg::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Covariant,
    Contravariant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemKind {
    /// `ℤ` everywhere, identity maps.
    Constant,
    /// `G/L ↦ ℤ[G/L]`, computing the homology of the underlying space.
    Singular,
    /// `G/L ↦ ℤ[(G/L)^G]`, computing the homology of `X^G`.
    FixedPoint,
    /// `G/L ↦ ℤ[(G/L)/G]`, computing the homology of `X/G`.
    Quotient,
    /// `G/L ↦ H₀(pt, (G/L)^G)`, computing the homology of `(X/G, X^G)`.
    QuotientRelFixed,
    /// `G/L ↦ ℤ[((G/L)/H)^K]`, computing the homology of `(X/H)^K`.
    General { h: Subgroup, k: Subgroup },
}

impl SystemKind {
    pub fn name(&self) -> String {
        match self {
            SystemKind::Constant => "constant".into(),
            SystemKind::Singular => "singular".into(),
            SystemKind::FixedPoint => "fixed".into(),
            SystemKind::Quotient => "quotient".into(),
            SystemKind::QuotientRelFixed => "quotient-rel-fixed".into(),
            SystemKind::General { h, k } => format!("general(H={h},K={k})"),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeModule {
    pub ring: Ring,
    pub labels: Vec<String>,
}

impl FreeModule {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientSystem {
    group: FiniteGroup,
    kind: SystemKind,
    variance: Variance,
    ring: Ring,
    /// `(H, K)` realizing the kind, absent for the relative system.
    family: Option<(Subgroup, Subgroup)>,
}

impl CoefficientSystem {
    pub fn new(group: &FiniteGroup, kind: SystemKind, variance: Variance, ring: Ring) -> Result<Self> {
        let e = group.trivial_subgroup();
        let g = group.whole();
        let family = match &kind {
            SystemKind::Constant | SystemKind::Quotient => Some((g, e)),
            SystemKind::Singular => Some((e.clone(), e)),
            SystemKind::FixedPoint => Some((e, g)),
            SystemKind::QuotientRelFixed => None,
            SystemKind::General { h, k } => {
                let h = group.subgroup(h.elements())?;
                let k = group.subgroup(k.elements())?;
                if !k.is_subgroup_of(&group.normalizer(&h)) {
                    return Err(Error::InvalidSubgroup(format!("{k} does not normalize {h}")));
                }
                Some((h, k))
            }
        };
        Ok(Self { group: group.clone(), kind, variance, ring, family })
    }

    pub fn covariant(group: &FiniteGroup, kind: SystemKind, ring: Ring) -> Result<Self> {
        Self::new(group, kind, Variance::Covariant, ring)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// Canonical element (minimum of the double coset `H r L`) for each
    /// basis vector of `M(G/L)`.
    fn basis(&self, l: &Subgroup) -> Vec<usize> {
        let grp = &self.group;
        match &self.family {
            None => {
                if l.order() == grp.order() {
                    Vec::new()
                } else {
                    vec![grp.identity()]
                }
            }
            Some((h, k)) => {
                let mut reps: Vec<usize> =
                    grp.left_cosets(l).into_iter().map(|r| self.double_coset_min(h, r, l)).collect();
                reps.sort_unstable();
                reps.dedup();
                reps.retain(|&r| k.elements().iter().all(|&y| self.double_coset_min(h, grp.mul(y, r), l) == r));
                reps
            }
        }
    }

    fn double_coset_min(&self, h: &Subgroup, g: usize, l: &Subgroup) -> usize {
        let grp = &self.group;
        h.elements()
            .iter()
            .flat_map(|&a| l.elements().iter().map(move |&b| grp.mul(grp.mul(a, g), b)))
            .min()
            .expect("nonempty double coset")
    }

    pub fn value(&self, l: &Subgroup) -> FreeModule {
        let labels = self
            .basis(l)
            .into_iter()
            .map(|r| match &self.family {
                Some((h, _)) => format!("{h}·{r}·{l}"),
                None => format!("G/{l}"),
            })
            .collect();
        FreeModule { ring: self.ring, labels }
    }

    /// Matrix of `M(f)` in the bases of [`Self::value`]. Covariant systems
    /// give `rank M(G/K) × rank M(G/H)` for `f: G/H → G/K`, contravariant
    /// ones the transpose.
    pub fn induced_matrix(&self, f: &OrbitMorphism) -> IntMatrix {
        let src = self.basis(f.source());
        let tgt = self.basis(f.target());
        let mut m = IntMatrix::zeros(tgt.len(), src.len());
        match &self.family {
            None => {
                if !src.is_empty() && !tgt.is_empty() {
                    m.set(0, 0, BigInt::one());
                }
            }
            Some((h, _)) => {
                for (j, &r) in src.iter().enumerate() {
                    let image = self.double_coset_min(h, self.group.mul(r, f.coset()), f.target());
                    let i = tgt.binary_search(&image).expect("equivariant map preserves fixed orbits");
                    m.set(i, j, BigInt::one());
                }
            }
        }
        match self.variance {
            Variance::Covariant => m,
            Variance::Contravariant => m.transpose(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_subgroups, orbit_homs};

    fn all_kinds(g: &FiniteGroup) -> Vec<SystemKind> {
        let mut kinds = vec![
            SystemKind::Constant,
            SystemKind::Singular,
            SystemKind::FixedPoint,
            SystemKind::Quotient,
            SystemKind::QuotientRelFixed,
        ];
        let subs = enumerate_subgroups(g);
        for h in &subs {
            let n = g.normalizer(h);
            for k in &subs {
                if k.is_subgroup_of(&n) {
                    kinds.push(SystemKind::General { h: h.clone(), k: k.clone() });
                }
            }
        }
        kinds
    }

    fn check_functorial(g: &FiniteGroup) {
        let subs = enumerate_subgroups(g);
        for kind in all_kinds(g) {
            for variance in [Variance::Covariant, Variance::Contravariant] {
                let m = CoefficientSystem::new(g, kind.clone(), variance, Ring::Integers).unwrap();
                for a in &subs {
                    let id = OrbitMorphism::identity(g, a);
                    let r = m.value(a).rank();
                    assert_eq!(m.induced_matrix(&id), IntMatrix::identity(r));
                    for b in &subs {
                        for f in orbit_homs(g, a, b) {
                            for c in &subs {
                                for second in orbit_homs(g, b, c) {
                                    let comp = second.after(g, &f).unwrap();
                                    let lhs = m.induced_matrix(&comp);
                                    let rhs = match variance {
                                        Variance::Covariant => m.induced_matrix(&second).mul(&m.induced_matrix(&f)),
                                        Variance::Contravariant => m.induced_matrix(&f).mul(&m.induced_matrix(&second)),
                                    };
                                    assert_eq!(lhs, rhs, "{kind} {variance:?} on {a} -> {b} -> {c}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn functoriality_small_groups() {
        let c2 = FiniteGroup::cyclic(2);
        check_functorial(&c2);
        check_functorial(&FiniteGroup::cyclic(4));
        check_functorial(&c2.product(&c2));
        check_functorial(&FiniteGroup::symmetric(3).0);
    }

    #[test]
    fn c2_values() {
        let g = FiniteGroup::cyclic(2);
        let e = g.trivial_subgroup();
        let whole = g.whole();
        let sing = CoefficientSystem::covariant(&g, SystemKind::Singular, Ring::Integers).unwrap();
        assert_eq!(sing.value(&e).rank(), 2);
        assert_eq!(sing.value(&whole).rank(), 1);
        let fix = CoefficientSystem::covariant(&g, SystemKind::FixedPoint, Ring::Integers).unwrap();
        assert_eq!(fix.value(&e).rank(), 0);
        assert_eq!(fix.value(&whole).rank(), 1);
        let rel = CoefficientSystem::covariant(&g, SystemKind::QuotientRelFixed, Ring::Integers).unwrap();
        assert_eq!(rel.value(&e).rank(), 1);
        assert_eq!(rel.value(&whole).rank(), 0);
    }

    #[test]
    fn projection_sums_over_fibres() {
        let g = FiniteGroup::cyclic(2);
        let sing = CoefficientSystem::covariant(&g, SystemKind::Singular, Ring::Integers).unwrap();
        let proj = OrbitMorphism::new(&g, g.trivial_subgroup(), g.whole(), 0).unwrap();
        assert_eq!(sing.induced_matrix(&proj), IntMatrix::from_rows(&[vec![1, 1]]));
        let constant = CoefficientSystem::covariant(&g, SystemKind::Constant, Ring::Integers).unwrap();
        assert_eq!(constant.induced_matrix(&proj), IntMatrix::from_rows(&[vec![1]]));
        let swap = OrbitMorphism::new(&g, g.trivial_subgroup(), g.trivial_subgroup(), 1).unwrap();
        assert_eq!(constant.induced_matrix(&swap), IntMatrix::from_rows(&[vec![1]]));
    }

    #[test]
    fn singular_ranks_are_indices() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let sing = CoefficientSystem::covariant(&s3, SystemKind::Singular, Ring::Integers).unwrap();
        for l in enumerate_subgroups(&s3) {
            assert_eq!(sing.value(&l).rank(), 6 / l.order());
        }
    }

    #[test]
    fn general_with_trivial_pair_is_singular() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let e = s3.trivial_subgroup();
        let sing = CoefficientSystem::covariant(&s3, SystemKind::Singular, Ring::Integers).unwrap();
        let gen =
            CoefficientSystem::covariant(&s3, SystemKind::General { h: e.clone(), k: e }, Ring::Integers).unwrap();
        let subs = enumerate_subgroups(&s3);
        for a in &subs {
            assert_eq!(sing.value(a).rank(), gen.value(a).rank());
            for b in &subs {
                for f in orbit_homs(&s3, a, b) {
                    assert_eq!(sing.induced_matrix(&f), gen.induced_matrix(&f));
                }
            }
        }
    }

    #[test]
    fn rejects_non_normalizing_pair() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let t = s3.generated_by(&[1]);
        let other = s3.generated_by(&[2]);
        let bad = CoefficientSystem::covariant(&s3, SystemKind::General { h: t, k: other }, Ring::Integers);
        assert!(matches!(bad, Err(Error::InvalidSubgroup(_))));
    }
}
