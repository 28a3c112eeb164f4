//! Finite groups given by multiplication tables, their subgroups, and the
//! orbit category `Orb_G` whose objects are the homogeneous sets `G/H`.
//!
//! Elements are indices `0..order`. Subgroups are stored as sorted element
//! lists and are always interpreted relative to the group they came from.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates a row-major multiplication table: closure, identity,
    /// inverses and associativity are all checked exhaustively.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Self> {
        let order = mul.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGroup(format!("row {i} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= order) {
                return Err(Error::InvalidGroup(format!("entry {bad} out of range in row {i}")));
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0; order];
        for x in 0..order {
            inverse[x] = (0..order)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {x} has no inverse")))?;
        }
        for a in 0..order {
            for b in 0..order {
                let ab = mul[a][b];
                for c in 0..order {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(Error::InvalidGroup(format!("associativity fails on ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(Self { order, mul, inverse, identity })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `C_n` with element `i` standing for the `i`-th power of a generator.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order zero");
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(mul).expect("cyclic table is a group")
    }

    /// The symmetric group on `n` letters. Elements are listed in
    /// lexicographic order of their image vectors, so element 0 is the
    /// identity; the second return value holds those image vectors.
    /// Multiplication is composition: `(a * b)(i) = a(b(i))`.
    pub fn symmetric(n: usize) -> (Self, Vec<Vec<usize>>) {
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..n).collect();
        loop {
            perms.push(current.clone());
            if !next_permutation(&mut current) {
                break;
            }
        }
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let mul =
            perms.iter().map(|a| perms.iter().map(|b| index(&b.iter().map(|&i| a[i]).collect())).collect()).collect();
        (Self::from_table(mul).expect("symmetric table is a group"), perms)
    }

    /// Direct product; element `(a, b)` has index `a * other.order + b`.
    pub fn product(&self, other: &FiniteGroup) -> Self {
        let n = self.order * other.order;
        let mul = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let (a1, b1) = (x / other.order, x % other.order);
                        let (a2, b2) = (y / other.order, y % other.order);
                        self.mul[a1][a2] * other.order + other.mul[b1][b2]
                    })
                    .collect()
            })
            .collect();
        Self::from_table(mul).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }

    /// `g^{-1} h g`
    pub fn conjugate(&self, h: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), h), g)
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { elements: (0..self.order).collect() }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup { elements: vec![self.identity] }
    }

    /// Validates an explicit element set as a subgroup.
    pub fn subgroup(&self, elements: &[usize]) -> Result<Subgroup> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= self.order) {
            return Err(Error::InvalidSubgroup(format!("element {bad} not in group")));
        }
        if !set.contains(&self.identity) {
            return Err(Error::InvalidSubgroup("missing identity".into()));
        }
        for &a in &set {
            if !set.contains(&self.inv(a)) {
                return Err(Error::InvalidSubgroup(format!("not closed under inverse at {a}")));
            }
            for &b in &set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(Error::InvalidSubgroup(format!("not closed under multiplication at ({a}, {b})")));
                }
            }
        }
        Ok(Subgroup { elements: set.into_iter().collect() })
    }

    /// Smallest subgroup containing `gens`.
    pub fn generated_by(&self, gens: &[usize]) -> Subgroup {
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Subgroup { elements: set.into_iter().collect() }
    }

    /// Canonical representative (smallest element) of the left coset `xK`.
    pub fn coset_rep(&self, x: usize, k: &Subgroup) -> usize {
        k.elements.iter().map(|&h| self.mul(x, h)).min().expect("subgroup is nonempty")
    }

    /// Canonical representatives of the left cosets `G/K`, ascending.
    pub fn left_cosets(&self, k: &Subgroup) -> Vec<usize> {
        let reps: BTreeSet<usize> = (0..self.order).map(|x| self.coset_rep(x, k)).collect();
        reps.into_iter().collect()
    }

    pub fn normalizer(&self, h: &Subgroup) -> Subgroup {
        let elements =
            (0..self.order).filter(|&g| h.elements.iter().all(|&x| h.contains(self.conjugate(x, g)))).collect();
        Subgroup { elements }
    }

    /// `x^{-1} H x ⊆ K`, i.e. `xK` is an `H`-fixed point of `G/K`.
    pub fn subconjugate_by(&self, h: &Subgroup, x: usize, k: &Subgroup) -> bool {
        h.elements.iter().all(|&y| k.contains(self.conjugate(y, x)))
    }

    /// `H` as a group in its own right; element `i` is `h.elements()[i]`.
    pub fn restrict_to(&self, h: &Subgroup) -> FiniteGroup {
        let pos = |x: usize| h.elements.binary_search(&x).expect("closed subgroup");
        let mul = h.elements.iter().map(|&a| h.elements.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        FiniteGroup::from_table(mul).expect("subgroup table is a group")
    }

    pub fn is_p_group(&self, p: u64) -> bool {
        let mut n = self.order as u64;
        while n.is_multiple_of(p) {
            n /= p;
        }
        n == 1
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elements: Vec<usize>,
}

impl Subgroup {
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        Subgroup { elements: self.elements.iter().copied().filter(|&x| other.contains(x)).collect() }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Every subgroup exactly once, sorted by order and then by element list.
pub fn enumerate_subgroups(g: &FiniteGroup) -> Vec<Subgroup> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier = vec![g.trivial_subgroup()];
    found.insert(g.trivial_subgroup().elements);
    while let Some(h) = frontier.pop() {
        for x in g.elements() {
            if h.contains(x) {
                continue;
            }
            let mut gens = h.elements.clone();
            gens.push(x);
            let bigger = g.generated_by(&gens);
            if found.insert(bigger.elements.clone()) {
                frontier.push(bigger);
            }
        }
    }
    let mut out: Vec<Subgroup> = found.into_iter().map(|elements| Subgroup { elements }).collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elements.cmp(&b.elements)));
    out
}

/// A `G`-map `G/H → G/K`, `gH ↦ gxK`. Identified by the coset `xK`, stored
/// through its canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitMorphism {
    source: Subgroup,
    target: Subgroup,
    coset: usize,
}

impl OrbitMorphism {
    pub fn new(g: &FiniteGroup, source: Subgroup, target: Subgroup, x: usize) -> Result<Self> {
        if !g.subconjugate_by(&source, x, &target) {
            return Err(Error::InvalidMorphism(format!("coset {x}{target} is not fixed by {source}")));
        }
        let coset = g.coset_rep(x, &target);
        Ok(Self { source, target, coset })
    }

    pub fn identity(g: &FiniteGroup, h: &Subgroup) -> Self {
        Self::new(g, h.clone(), h.clone(), g.identity()).expect("identity is a morphism")
    }

    pub fn source(&self) -> &Subgroup {
        &self.source
    }

    pub fn target(&self) -> &Subgroup {
        &self.target
    }

    pub fn coset(&self) -> usize {
        self.coset
    }

    /// Image of the coset with representative `g` (any representative).
    pub fn apply(&self, grp: &FiniteGroup, g: usize) -> usize {
        grp.coset_rep(grp.mul(g, self.coset), &self.target)
    }

    /// `self ∘ first`: first `first: G/H → G/K`, then `self: G/K → G/L`.
    pub fn after(&self, grp: &FiniteGroup, first: &OrbitMorphism) -> Result<OrbitMorphism> {
        if first.target != self.source {
            return Err(Error::InvalidMorphism("morphisms are not composable".into()));
        }
        OrbitMorphism::new(grp, first.source.clone(), self.target.clone(), grp.mul(first.coset, self.coset))
    }
}

/// One morphism per `H`-fixed coset `xK ∈ (G/K)^H`.
pub fn orbit_homs(g: &FiniteGroup, h: &Subgroup, k: &Subgroup) -> Vec<OrbitMorphism> {
    g.left_cosets(k)
        .into_iter()
        .filter(|&x| g.subconjugate_by(h, x, k))
        .map(|x| OrbitMorphism { source: h.clone(), target: k.clone(), coset: x })
        .collect()
}

/// The orbit category with every subgroup as an object.
#[derive(Clone, Debug)]
pub struct OrbitCategory {
    group: FiniteGroup,
    objects: Vec<Subgroup>,
}

impl OrbitCategory {
    pub fn new(group: FiniteGroup) -> Self {
        let objects = enumerate_subgroups(&group);
        Self { group, objects }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn objects(&self) -> &[Subgroup] {
        &self.objects
    }

    pub fn homs(&self, h: &Subgroup, k: &Subgroup) -> Vec<OrbitMorphism> {
        orbit_homs(&self.group, h, k)
    }
}

/// `W_G H = N_G(H)/H` with the coset representative of each Weyl element.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub group: FiniteGroup,
    pub normalizer: Subgroup,
    /// `reps[w]` is the canonical representative in `G` of the coset `w`.
    pub reps: Vec<usize>,
}

impl WeylGroup {
    /// Weyl element of a normalizer element, `None` outside `N_G(H)`.
    pub fn project(&self, parent: &FiniteGroup, h: &Subgroup, g: usize) -> Option<usize> {
        if !self.normalizer.contains(g) {
            return None;
        }
        let rep = parent.coset_rep(g, h);
        self.reps.iter().position(|&r| r == rep)
    }
}

pub fn weyl_group(g: &FiniteGroup, h: &Subgroup) -> WeylGroup {
    let normalizer = g.normalizer(h);
    let reps: Vec<usize> =
        normalizer.elements().iter().map(|&n| g.coset_rep(n, h)).collect::<BTreeSet<_>>().into_iter().collect();
    let index = |x: usize| {
        let r = g.coset_rep(x, h);
        reps.iter().position(|&y| y == r).expect("normalizer coset")
    };
    let mul = reps.iter().map(|&a| reps.iter().map(|&b| index(g.mul(a, b))).collect()).collect();
    let group = FiniteGroup::from_table(mul).expect("quotient by a normal subgroup is a group");
    WeylGroup { group, normalizer, reps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_subgroups(g: &FiniteGroup) -> Vec<Vec<usize>> {
        let n = g.order();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let elems: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if g.subgroup(&elems).is_ok() {
                out.push(elems);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    fn dihedral4() -> FiniteGroup {
        // rotations r^i are 0..4, reflections s r^i are 4..8
        let n = 4;
        let mul = (0..2 * n)
            .map(|a| {
                (0..2 * n)
                    .map(|b| {
                        let (sa, ra) = (a / n, a % n);
                        let (sb, rb) = (b / n, b % n);
                        // (s^sa r^ra)(s^sb r^rb) = s^(sa+sb) r^(±ra + rb)
                        let r = if sb == 1 { (n - ra + rb) % n } else { (ra + rb) % n };
                        ((sa + sb) % 2) * n + r
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(mul).unwrap()
    }

    #[test]
    fn rejects_non_associative_table() {
        // a Latin square with identity 0 that is not a group
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table(t), Err(Error::InvalidGroup(_))));
    }

    #[test]
    fn subgroups_of_small_groups() {
        assert_eq!(enumerate_subgroups(&FiniteGroup::trivial()).len(), 1);
        let c2 = FiniteGroup::cyclic(2);
        let subs = enumerate_subgroups(&c2);
        assert_eq!(subs, vec![c2.trivial_subgroup(), c2.whole()]);

        let (s3, _) = FiniteGroup::symmetric(3);
        let subs = enumerate_subgroups(&s3);
        let orders: Vec<usize> = subs.iter().map(|s| s.order()).collect();
        assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
    }

    #[test]
    fn enumeration_matches_exhaustive_subset_check() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let c2 = FiniteGroup::cyclic(2);
        let groups = vec![
            FiniteGroup::cyclic(4),
            FiniteGroup::cyclic(6),
            c2.product(&c2),
            s3,
            dihedral4(),
            c2.product(&c2).product(&c2),
        ];
        for g in groups {
            let ours: Vec<Vec<usize>> = enumerate_subgroups(&g).into_iter().map(|s| s.elements().to_vec()).collect();
            assert_eq!(ours, brute_force_subgroups(&g));
        }
    }

    #[test]
    fn orbit_hom_counts() {
        let c2 = FiniteGroup::cyclic(2);
        let e = c2.trivial_subgroup();
        let g = c2.whole();
        assert_eq!(orbit_homs(&c2, &e, &e).len(), 2);
        assert!(orbit_homs(&c2, &g, &e).is_empty());
        assert_eq!(orbit_homs(&c2, &e, &g).len(), 1);

        let (s3, _) = FiniteGroup::symmetric(3);
        let t = s3.generated_by(&[1]);
        assert_eq!(t.order(), 2);
        assert_eq!(orbit_homs(&s3, &t, &t).len(), 1);
    }

    #[test]
    fn homs_into_free_orbit() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let e = s3.trivial_subgroup();
        for h in enumerate_subgroups(&s3) {
            let expected = if h.order() == 1 { 6 } else { 0 };
            assert_eq!(orbit_homs(&s3, &h, &e).len(), expected);
        }
    }

    #[test]
    fn composition_closes_and_has_identities() {
        for g in [dihedral4(), FiniteGroup::symmetric(3).0] {
            let cat = OrbitCategory::new(g.clone());
            for h in cat.objects() {
                let id = OrbitMorphism::identity(&g, h);
                for k in cat.objects() {
                    for f in cat.homs(h, k) {
                        assert_eq!(f.after(&g, &id).unwrap(), f);
                        for l in cat.objects() {
                            for second in cat.homs(k, l) {
                                let comp = second.after(&g, &f).unwrap();
                                assert!(cat.homs(h, l).contains(&comp));
                                // agrees with composing the underlying set maps
                                for x in g.left_cosets(h) {
                                    assert_eq!(comp.apply(&g, x), second.apply(&g, f.apply(&g, x)));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn morphisms_identified_by_coset() {
        let c2 = FiniteGroup::cyclic(2);
        let e = c2.trivial_subgroup();
        let g = c2.whole();
        let a = OrbitMorphism::new(&c2, e.clone(), g.clone(), 0).unwrap();
        let b = OrbitMorphism::new(&c2, e.clone(), g.clone(), 1).unwrap();
        assert_eq!(a, b);
        assert!(OrbitMorphism::new(&c2, g, e, 0).is_err());
    }

    #[test]
    fn weyl_groups() {
        let (s3, _) = FiniteGroup::symmetric(3);
        let w = weyl_group(&s3, &s3.whole());
        assert_eq!(w.group.order(), 1);

        let c4 = FiniteGroup::cyclic(4);
        let c2 = c4.generated_by(&[2]);
        let w = weyl_group(&c4, &c2);
        assert_eq!(w.group.order(), 2);

        let a3 = s3.generated_by(&[3]);
        assert_eq!(a3.order(), 3);
        let w = weyl_group(&s3, &a3);
        assert_eq!(w.group.order(), 2);
        assert_eq!(w.normalizer, s3.whole());

        let t = s3.generated_by(&[1]);
        let w = weyl_group(&s3, &t);
        assert_eq!(w.group.order(), 1);
        assert_eq!(w.project(&s3, &t, 1), Some(0));
        assert_eq!(w.project(&s3, &t, 3), None);
    }
}
