use crate::coeff::{CoefficientSystem, SystemKind};
use crate::complexes::{homology, HomologySummary, Ring};
use crate::gcw::FlatComplex;
use crate::groups::{FiniteGroup, Subgroup};
use crate::{Error, Result};

/// A nontrivial irreducible summand of a representation of `H`; elements
/// are named in the ambient group `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepFactor {
    /// `ℝ` on which the listed elements act by `−1`.
    Sign { flips: Vec<usize> },
    /// `ℝ²` on which `generator` turns by `2π/m`; `H` must be cyclic of
    /// order `m` generated by it.
    Rotation { m: usize, generator: usize },
}

/// `ℝ^trivial ⊕ factors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub trivial: usize,
    pub factors: Vec<RepFactor>,
}

impl Representation {
    pub fn trivial(n: usize) -> Self {
        Self { trivial: n, factors: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.trivial
            + self
                .factors
                .iter()
                .map(|f| match f {
                    RepFactor::Sign { .. } => 1,
                    RepFactor::Rotation { .. } => 2,
                })
                .sum::<usize>()
    }
}

fn factor_complex(g: &FiniteGroup, h: &Subgroup, local: &FiniteGroup, factor: &RepFactor) -> Result<FlatComplex> {
    let el = |i: usize| h.elements()[i];
    match factor {
        RepFactor::Sign { flips } => {
            if let Some(&x) = flips.iter().find(|&&x| !h.contains(x)) {
                return Err(Error::UnsupportedRep(format!("sign factor flips {x}, which is not in {h}")));
            }
            let flip = |x: usize| flips.contains(&x);
            for &a in h.elements() {
                for &b in h.elements() {
                    if flip(g.mul(a, b)) != (flip(a) ^ flip(b)) {
                        return Err(Error::UnsupportedRep("sign factor is not a homomorphism".into()));
                    }
                }
            }
            Ok(FlatComplex::sign_interval(local, |i| flip(el(i))))
        }
        RepFactor::Rotation { m, generator } => {
            if !h.contains(*generator) || g.element_order(*generator) != h.order() || h.order() != *m {
                return Err(Error::UnsupportedRep(format!(
                    "rotation by 2π/{m} needs H cyclic of order {m} generated by {generator}"
                )));
            }
            let mut power = vec![0; h.order()];
            let mut x = g.identity();
            for k in 0..*m {
                power[h.elements().binary_search(&x).expect("power of the generator lies in H")] = k;
                x = g.mul(x, *generator);
            }
            FlatComplex::rotation_disc(local, *m, |i| power[i])
        }
    }
}

/// `(G ×_H D(V), G ×_H S(V))` as a G-CW pair.
pub fn representation_cell(g: &FiniteGroup, h: &Subgroup, rep: &Representation) -> Result<FlatComplex> {
    let local = g.restrict_to(h);
    let mut x = FlatComplex::point(&local);
    for _ in 0..rep.trivial {
        x = x.product(&FlatComplex::trivial_interval(&local))?;
    }
    for f in &rep.factors {
        x = x.product(&factor_complex(g, h, &local, f)?)?;
    }
    x.induce(g, h)
}

/// `h_n(G ×_H D(V), G ×_H S(V))` for the theory computed by `kind`, via
/// integral Bredon chains.
pub fn representation_cell_groups(
    g: &FiniteGroup,
    h: &Subgroup,
    rep: &Representation,
    kind: &SystemKind,
) -> Result<HomologySummary> {
    if !matches!(
        kind,
        SystemKind::Singular | SystemKind::FixedPoint | SystemKind::Quotient | SystemKind::QuotientRelFixed
    ) {
        return Err(Error::UnsupportedRep(format!("theory {kind} is not one of the four ordinary kinds")));
    }
    let x = representation_cell(g, h, rep)?.to_gcw()?;
    let coeff = CoefficientSystem::covariant(g, kind.clone(), Ring::Integers)?;
    Ok(homology(&x.bredon_chain_complex(&coeff)?))
}
