use super::*;
use crate::complexes::{homology, HomologyGroup, HomologySummary};

fn cell(dim: usize, label: &str, stabilizer: Subgroup) -> CellOrbit {
    CellOrbit { dim, label: label.into(), stabilizer }
}

fn rec(cell: usize, face: usize, coset: usize, degree: i64) -> BoundaryRecord {
    BoundaryRecord { cell, face, coset, degree }
}

pub(crate) fn point() -> GCWComplex {
    let g = FiniteGroup::cyclic(2);
    GCWComplex::new(g.clone(), vec![cell(0, "p", g.whole())], vec![]).unwrap()
}

/// Reflection of the circle: fixed poles, one free arc orbit.
pub(crate) fn circle_reflection() -> GCWComplex {
    let g = FiniteGroup::cyclic(2);
    let (e, whole) = (g.trivial_subgroup(), g.whole());
    GCWComplex::new(
        g,
        vec![cell(0, "N", whole.clone()), cell(0, "S", whole), cell(1, "a", e)],
        vec![rec(2, 0, 0, 1), rec(2, 1, 0, -1)],
    )
    .unwrap()
}

/// Reflection of the sphere in the equatorial plane.
pub(crate) fn sphere_reflection() -> GCWComplex {
    let g = FiniteGroup::cyclic(2);
    let (e, whole) = (g.trivial_subgroup(), g.whole());
    GCWComplex::new(g, vec![cell(0, "v", whole.clone()), cell(1, "c", whole), cell(2, "D", e)], vec![rec(2, 1, 0, 1)])
        .unwrap()
}

/// Torus as the double of an annulus; the two boundary circles are fixed.
pub(crate) fn torus_double() -> GCWComplex {
    let g = FiniteGroup::cyclic(2);
    let (e, whole) = (g.trivial_subgroup(), g.whole());
    GCWComplex::new(
        g,
        vec![
            cell(0, "v1", whole.clone()),
            cell(0, "v2", whole.clone()),
            cell(1, "c1", whole.clone()),
            cell(1, "c2", whole),
            cell(1, "e", e.clone()),
            cell(2, "D", e),
        ],
        vec![rec(2, 0, 0, 0), rec(4, 0, 0, 1), rec(4, 1, 0, -1), rec(5, 2, 0, 1), rec(5, 3, 0, -1)],
    )
    .unwrap()
}

/// `S₃` acting on a triangle's boundary through its vertices.
pub(crate) fn triangle_s3() -> GCWComplex {
    let (s3, _) = FiniteGroup::symmetric(3);
    let t = s3.subgroup(&[0, 1]).unwrap();
    GCWComplex::new(
        s3.clone(),
        vec![cell(0, "vertex", t.clone()), cell(0, "midpoint", t), cell(1, "half-edge", s3.trivial_subgroup())],
        vec![rec(2, 1, 2, 1), rec(2, 0, 0, -1)],
    )
    .unwrap()
}

pub(crate) fn antipodal_circle() -> GCWComplex {
    let g = FiniteGroup::cyclic(2);
    let e = g.trivial_subgroup();
    GCWComplex::new(g, vec![cell(0, "v", e.clone()), cell(1, "a", e)], vec![rec(1, 0, 1, 1), rec(1, 0, 0, -1)]).unwrap()
}

fn fixtures() -> Vec<(&'static str, GCWComplex)> {
    vec![
        ("point", point()),
        ("circle", circle_reflection()),
        ("sphere", sphere_reflection()),
        ("torus", torus_double()),
        ("triangle", triangle_s3()),
        ("antipodal", antipodal_circle()),
    ]
}

fn ranks(h: &HomologySummary, top: i64) -> Vec<usize> {
    h.ranks(0, top)
}

#[test]
fn underlying_homology_of_fixtures() {
    assert_eq!(ranks(&homology(&circle_reflection().underlying().unwrap()), 1), vec![1, 1]);
    assert_eq!(ranks(&homology(&sphere_reflection().underlying().unwrap()), 2), vec![1, 0, 1]);
    assert_eq!(ranks(&homology(&torus_double().underlying().unwrap()), 2), vec![1, 2, 1]);
    assert_eq!(ranks(&homology(&triangle_s3().underlying().unwrap()), 1), vec![1, 1]);
    assert_eq!(ranks(&homology(&antipodal_circle().underlying().unwrap()), 1), vec![1, 1]);
}

#[test]
fn circle_reflection_examples() {
    let x = circle_reflection();
    let g = x.group().clone();
    let sing = CoefficientSystem::covariant(&g, SystemKind::Singular, Ring::Integers).unwrap();
    let h = homology(&x.bredon_chain_complex(&sing).unwrap());
    assert_eq!(ranks(&h, 1), vec![1, 1]);
    let constant = CoefficientSystem::covariant(&g, SystemKind::Constant, Ring::Integers).unwrap();
    let h = homology(&x.bredon_chain_complex(&constant).unwrap());
    assert_eq!(ranks(&h, 1), vec![1, 0]);

    let quotient = homology(&x.subquotient_complex(&g.whole(), &g.trivial_subgroup()).unwrap());
    assert_eq!(ranks(&quotient, 1), vec![1, 0]);
    let fixed = homology(&x.subquotient_complex(&g.trivial_subgroup(), &g.whole()).unwrap());
    assert_eq!(ranks(&fixed, 1), vec![2, 0]);
}

#[test]
fn point_gives_value_at_g_mod_g() {
    let x = point();
    let g = x.group().clone();
    for kind in [SystemKind::Singular, SystemKind::Constant, SystemKind::FixedPoint, SystemKind::QuotientRelFixed] {
        let m = CoefficientSystem::covariant(&g, kind, Ring::Integers).unwrap();
        let h = homology(&x.bredon_chain_complex(&m).unwrap());
        assert_eq!(h.degree(0), HomologyGroup::free(m.value(&g.whole()).rank()));
    }
}

#[test]
fn bredon_matches_subquotient_oracle_on_all_fixtures() {
    for (name, x) in fixtures() {
        let g = x.group().clone();
        let mut kinds = vec![
            SystemKind::Singular,
            SystemKind::Constant,
            SystemKind::FixedPoint,
            SystemKind::Quotient,
            SystemKind::QuotientRelFixed,
        ];
        for h in crate::groups::enumerate_subgroups(&g) {
            let n = g.normalizer(&h);
            for k in crate::groups::enumerate_subgroups(&g) {
                if k.is_subgroup_of(&n) {
                    kinds.push(SystemKind::General { h: h.clone(), k });
                }
            }
        }
        for kind in kinds {
            let m = CoefficientSystem::covariant(&g, kind.clone(), Ring::Integers).unwrap();
            let bredon = homology(&x.bredon_chain_complex(&m).unwrap());
            let oracle = homology(&x.oracle_complex(&kind).unwrap());
            assert!(bredon.same_groups(&oracle), "{name} {kind}: {bredon} vs {oracle}");
        }
    }
}

#[test]
fn contravariant_system_rejected_by_chain_assembler() {
    let x = circle_reflection();
    let m = CoefficientSystem::new(x.group(), SystemKind::Singular, Variance::Contravariant, Ring::Integers).unwrap();
    assert!(matches!(x.bredon_chain_complex(&m), Err(Error::VarianceMismatch)));
    let c = x.bredon_cochain_complex(&m).unwrap();
    // cohomology of the circle sits in degrees 0 and -1
    let h = homology(&c);
    assert_eq!(h.ranks(-1, 0), vec![1, 1]);
}

#[test]
fn constant_cochains_see_the_hemisphere() {
    let x = sphere_reflection();
    let m = CoefficientSystem::new(x.group(), SystemKind::Constant, Variance::Contravariant, Ring::Integers).unwrap();
    let h = homology(&x.bredon_cochain_complex(&m).unwrap());
    assert_eq!(h.ranks(-2, 0), vec![0, 0, 1]);
}

#[test]
fn rejects_missing_morphism() {
    let g = FiniteGroup::cyclic(2);
    // a fixed cell cannot have a free face
    let bad = GCWComplex::new(
        g.clone(),
        vec![cell(0, "v", g.trivial_subgroup()), cell(1, "c", g.whole())],
        vec![rec(1, 0, 0, 1)],
    );
    assert!(matches!(bad, Err(Error::InvalidMorphism(_))));
}

#[test]
fn rejects_nonzero_square() {
    let g = FiniteGroup::trivial();
    let e = g.whole();
    let bad = GCWComplex::new(
        g,
        vec![cell(0, "v", e.clone()), cell(1, "a", e.clone()), cell(2, "D", e)],
        vec![rec(1, 0, 0, 1), rec(2, 1, 0, 1)],
    );
    assert!(matches!(bad, Err(Error::BoundaryNotNilpotent { .. })));
}

#[test]
fn subquotient_needs_normalizing_pair() {
    let x = triangle_s3();
    let g = x.group().clone();
    let t = g.subgroup(&[0, 1]).unwrap();
    let other = g.subgroup(&[0, 2]).unwrap();
    assert!(matches!(x.subquotient_complex(&t, &other), Err(Error::InvalidPair(_))));
}

#[test]
fn flat_products_and_induction_fold_correctly() {
    let c2 = FiniteGroup::cyclic(2);
    let sign = FlatComplex::sign_interval(&c2, |g| g == 1);
    let square = sign.product(&FlatComplex::trivial_interval(&c2)).unwrap();
    let x = square.to_gcw().unwrap();
    // (D², S¹) relative homology is ℤ in degree 2
    let h = homology(&x.underlying().unwrap());
    assert_eq!(h.ranks(0, 2), vec![0, 0, 1]);

    let trivial = FiniteGroup::trivial();
    let disc = FlatComplex::trivial_interval(&trivial);
    let induced = disc.induce(&c2, &c2.trivial_subgroup()).unwrap().to_gcw().unwrap();
    let h = homology(&induced.underlying().unwrap());
    assert_eq!(h.ranks(0, 1), vec![0, 2]);

    let c3 = FiniteGroup::cyclic(3);
    let rot = FlatComplex::rotation_disc(&c3, 3, |g| g).unwrap().to_gcw().unwrap();
    let h = homology(&rot.underlying().unwrap());
    assert_eq!(h.ranks(0, 2), vec![0, 0, 1]);
    let fixed = homology(&rot.subquotient_complex(&c3.trivial_subgroup(), &c3.whole()).unwrap());
    assert_eq!(fixed.ranks(0, 2), vec![1, 0, 0]);
}

#[test]
fn flat_rejects_orientation_reversing_fixed_cell() {
    let c2 = FiniteGroup::cyclic(2);
    let bad = FlatComplex::new(
        c2,
        vec![0, 0, 1],
        vec!["a".into(), "b".into(), "e".into()],
        vec![vec![], vec![], vec![(1, 1), (0, -1)]],
        vec![vec![(0, 1), (1, 1), (2, 1)], vec![(1, 1), (0, 1), (2, -1)]],
        vec![false; 3],
    );
    assert!(matches!(bad, Err(Error::InvalidAction(_))));
}
