//! Smith inequalities and mod-`p` Euler characteristics for `p`-group
//! actions.

use std::fmt;

use crate::coeff::{CoefficientSystem, SystemKind};
use crate::complexes::{homology, ChainComplex, Ring};
use crate::gcw::GCWComplex;
use crate::groups::FiniteGroup;
use crate::morse::{morse_complex, MorseData};
use crate::{Error, Result};

/// One tail comparison `Σ_{k≥ℓ} dim H_k(X^G) ≤ Σ_{k≥ℓ} dim H_k(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailCheck {
    pub ell: usize,
    pub fixed: usize,
    pub total: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithReport {
    pub p: u64,
    pub dims_total: Vec<usize>,
    pub dims_fixed: Vec<usize>,
    pub per_ell: Vec<TailCheck>,
    pub euler_total: i64,
    pub euler_fixed: i64,
    pub euler_congruent: bool,
}

impl SmithReport {
    /// Builds the report from the two dimension vectors.
    pub fn from_dims(p: u64, dims_total: Vec<usize>, dims_fixed: Vec<usize>) -> Self {
        let top = dims_total.len().max(dims_fixed.len());
        let tail = |d: &[usize], ell: usize| d.iter().skip(ell).sum::<usize>();
        let per_ell = (0..top)
            .map(|ell| {
                let (fixed, total) = (tail(&dims_fixed, ell), tail(&dims_total, ell));
                TailCheck { ell, fixed, total, pass: fixed <= total }
            })
            .collect();
        let euler =
            |d: &[usize]| d.iter().enumerate().map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) }).sum();
        let (euler_total, euler_fixed): (i64, i64) = (euler(&dims_total), euler(&dims_fixed));
        let euler_congruent = (euler_total - euler_fixed).rem_euclid(p as i64) == 0;
        Self { p, dims_total, dims_fixed, per_ell, euler_total, euler_fixed, euler_congruent }
    }

    pub fn passes(&self) -> bool {
        self.euler_congruent && self.per_ell.iter().all(|t| t.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,fixed_tail,total_tail,pass\n");
        for t in &self.per_ell {
            out.push_str(&format!("{},{},{},{}\n", t.ell, t.fixed, t.total, t.pass));
        }
        out.push_str(&format!("chi,{},{},{}\n", self.euler_fixed, self.euler_total, self.euler_congruent));
        out
    }
}

impl fmt::Display for SmithReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        writeln!(f, "dim H_k(X; F{})   = {:?}", self.p, self.dims_total)?;
        writeln!(f, "dim H_k(X^G; F{}) = {:?}", self.p, self.dims_fixed)?;
        for t in &self.per_ell {
            let mark = if t.pass { "ok" } else { "FAIL" };
            writeln!(f, "l = {}: {} <= {}  {mark}", t.ell, t.fixed, t.total)?;
        }
        let mark = if self.euler_congruent { "ok" } else { "FAIL" };
        write!(f, "chi: {} = {} mod {}  {mark}", self.euler_fixed, self.euler_total, self.p)
    }
}

fn check_group(g: &FiniteGroup, p: u64) -> Result<()> {
    let prime = p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    if !prime || !g.is_p_group(p) {
        return Err(Error::NotAPGroup(g.order(), p));
    }
    Ok(())
}

fn dims(c: &ChainComplex) -> Vec<usize> {
    let h = homology(c);
    match h.top_degree() {
        Some(top) => h.ranks(0, top),
        None => Vec::new(),
    }
}

/// The report for a finite G-CW complex, from cellular chains of `X` and of
/// `X^G`.
pub fn smith_report(x: &GCWComplex, p: u64) -> Result<SmithReport> {
    let g = x.group();
    check_group(g, p)?;
    let ring = Ring::Prime(p);
    let total = x.underlying()?.with_ring(ring)?;
    let fixed = x.subquotient_complex(&g.trivial_subgroup(), &g.whole())?.with_ring(ring)?;
    Ok(SmithReport::from_dims(p, dims(&total), dims(&fixed)))
}

/// The report from a mod-2 Morse complex, reading `H_*(M)` and `H_*(M^G)`
/// through the singular and fixed-point systems.
pub fn smith_report_morse(data: &MorseData, p: u64) -> Result<SmithReport> {
    check_group(&data.group, p)?;
    let chains = |kind| -> Result<ChainComplex> {
        let coeff = CoefficientSystem::covariant(&data.group, kind, Ring::Prime(p))?;
        morse_complex(data, &coeff)
    };
    let total = chains(SystemKind::Singular)?;
    let fixed = chains(SystemKind::FixedPoint)?;
    Ok(SmithReport::from_dims(p, dims(&total), dims(&fixed)))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::gcw::tests::{antipodal_circle, circle_reflection, point, sphere_reflection, torus_double, triangle_s3};
    use crate::gcw::{BoundaryRecord, CellOrbit};

    #[test]
    fn sphere_reflection_report() {
        let r = smith_report(&sphere_reflection(), 2).unwrap();
        assert_eq!(r.dims_total, vec![1, 0, 1]);
        assert_eq!(r.dims_fixed, vec![1, 1]);
        let tails: Vec<(usize, usize)> = r.per_ell.iter().map(|t| (t.fixed, t.total)).collect();
        assert_eq!(tails, vec![(2, 2), (1, 1), (0, 1)]);
        assert_eq!((r.euler_total, r.euler_fixed), (2, 0));
        assert!(r.passes());
    }

    #[test]
    fn free_action_has_empty_fixed_set() {
        let r = smith_report(&antipodal_circle(), 2).unwrap();
        assert!(r.dims_fixed.is_empty());
        assert_eq!(r.dims_total, vec![1, 1]);
        assert_eq!((r.euler_total, r.euler_fixed), (0, 0));
        assert!(r.passes());
    }

    #[test]
    fn trivial_action_gives_equalities() {
        let g = FiniteGroup::cyclic(2);
        let cell = |dim, label: &str| CellOrbit { dim, label: label.into(), stabilizer: g.whole() };
        let rec = |degree| BoundaryRecord { cell: 1, face: 0, coset: 0, degree };
        let circle = GCWComplex::new(g.clone(), vec![cell(0, "v"), cell(1, "e")], vec![rec(1), rec(-1)]).unwrap();
        let r = smith_report(&circle, 2).unwrap();
        assert_eq!(r.dims_fixed, vec![1, 1]);
        assert!(r.per_ell.iter().all(|t| t.fixed == t.total));
        assert!(r.passes());
        let r = smith_report(&point(), 2).unwrap();
        assert!(r.per_ell.iter().all(|t| t.fixed == t.total));
        assert!(r.passes());
    }

    #[test]
    fn other_fixtures_pass() {
        for x in [circle_reflection(), torus_double()] {
            assert!(smith_report(&x, 2).unwrap().passes());
        }
    }

    #[test]
    fn non_p_groups_are_rejected() {
        assert!(matches!(smith_report(&triangle_s3(), 2), Err(Error::NotAPGroup(6, 2))));
        assert!(matches!(smith_report(&sphere_reflection(), 3), Err(Error::NotAPGroup(2, 3))));
        assert!(matches!(smith_report(&sphere_reflection(), 4), Err(Error::NotAPGroup(2, 4))));
    }

    proptest! {
        #[test]
        fn tails_are_recomputable(total in prop::collection::vec(0usize..5, 0..6), fixed in prop::collection::vec(0usize..5, 0..6)) {
            let r = SmithReport::from_dims(2, total.clone(), fixed.clone());
            for w in r.per_ell.windows(2) {
                prop_assert!(w[0].fixed >= w[1].fixed && w[0].total >= w[1].total);
            }
            for t in &r.per_ell {
                prop_assert_eq!(t.fixed, fixed.iter().skip(t.ell).sum::<usize>());
                prop_assert_eq!(t.total, total.iter().skip(t.ell).sum::<usize>());
                prop_assert_eq!(t.pass, t.fixed <= t.total);
            }
        }
    }
}
