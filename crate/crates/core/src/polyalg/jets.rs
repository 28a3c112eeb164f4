use super::{binomial, Coefficient, Polynomial};
use crate::{Error, Result};

/// Order-`k` Taylor data at a point, stored as a polynomial in the
/// displacement `z = x − p` with all terms of total degree `< k`.
#[derive(Clone, PartialEq, Debug)]
pub struct Jet<C: Coefficient> {
    basepoint: Vec<C>,
    order: usize,
    poly: Polynomial<C>,
}

impl<C: Coefficient> Jet<C> {
    pub fn new(basepoint: Vec<C>, order: usize, poly: Polynomial<C>) -> Result<Self> {
        if poly.nvars() != basepoint.len() {
            return Err(Error::Shape(format!(
                "jet in {} variables at a point of dimension {}",
                poly.nvars(),
                basepoint.len()
            )));
        }
        if poly.degree().is_some_and(|d| d as usize >= order) {
            return Err(Error::Shape(format!("jet of order {order} has a term of degree ≥ {order}")));
        }
        Ok(Self { basepoint, order, poly })
    }

    /// The jet of a polynomial given in absolute coordinates `x`.
    pub fn from_absolute(basepoint: Vec<C>, order: usize, f: &Polynomial<C>) -> Result<Self> {
        let local = f.shift(&basepoint);
        Self::new(basepoint, order, local)
    }

    pub fn basepoint(&self) -> &[C] {
        &self.basepoint
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients in the displacement variables.
    pub fn local(&self) -> &Polynomial<C> {
        &self.poly
    }

    pub fn nvars(&self) -> usize {
        self.basepoint.len()
    }

    /// The polynomial representative `x ↦ J(x − p)`.
    pub fn representative(&self) -> Polynomial<C> {
        let minus: Vec<C> = self.basepoint.iter().map(|c| c.neg()).collect();
        self.poly.shift(&minus)
    }

    /// Largest coefficient difference from another jet at the same order.
    pub fn max_difference(&self, other: &Self) -> f64 {
        (&self.poly - &other.poly).max_abs_coeff()
    }
}

/// The order-`k` Taylor expansion of `f` about `p`.
pub fn taylor_jet<C: Coefficient>(f: &Polynomial<C>, p: &[C], k: usize) -> Jet<C> {
    assert_eq!(f.nvars(), p.len(), "point dimension mismatch");
    Jet { basepoint: p.to_vec(), order: k, poly: C::taylor(f, p, k) }
}

fn check_distinct<C: Coefficient>(points: &[Vec<C>]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoints(i, j));
            }
        }
    }
    Ok(())
}

fn squared_distance_poly<C: Coefficient>(p: &[C]) -> Polynomial<C> {
    let n = p.len();
    (0..n).fold(Polynomial::zero(n), |acc, i| {
        let l = &Polynomial::var(n, i) - &Polynomial::constant(n, p[i].clone());
        &acc + &(&l * &l)
    })
}

fn squared_distance<C: Coefficient>(p: &[C], q: &[C]) -> C {
    p.iter().zip(q).fold(C::zero(), |acc, (a, b)| {
        let d = a.sub(b);
        acc.add(&d.mul(&d))
    })
}

/// `φ_j(x) = ∏_{i≠j} ‖x − p_i‖² / ‖p_j − p_i‖²`.
pub fn bump_poly<C: Coefficient>(points: &[Vec<C>], j: usize) -> Result<Polynomial<C>> {
    check_distinct(points)?;
    let n = points.get(j).map(Vec::len).ok_or_else(|| Error::Shape(format!("no point {j}")))?;
    let mut phi = Polynomial::one(n);
    for (i, p) in points.iter().enumerate() {
        if i == j {
            continue;
        }
        let scale = C::one().div(&squared_distance(&points[j], p));
        phi = &phi * &squared_distance_poly(p).scale(&scale);
    }
    Ok(phi)
}

/// Degree of the interpolant for `d` points and order `k`.
pub fn degree_bound(d: usize, k: usize) -> usize {
    (2 * d.saturating_sub(1)) * k * k + k.saturating_sub(1)
}

/// A polynomial with the prescribed order-`k` jets at the given points:
/// `f = Σ_j f_j · (1 − (1 − φ_j^k)^k)` with `f_j` the jet representatives.
pub fn jet_interpolate<C: Coefficient>(points: &[Vec<C>], jets: &[Jet<C>], k: usize) -> Result<Polynomial<C>> {
    if points.len() != jets.len() {
        return Err(Error::Shape(format!("{} points but {} jets", points.len(), jets.len())));
    }
    let Some(n) = points.first().map(Vec::len) else {
        return Err(Error::Shape("no interpolation points".into()));
    };
    for (j, (p, jet)) in points.iter().zip(jets).enumerate() {
        if p.len() != n || jet.basepoint() != p.as_slice() {
            return Err(Error::Shape(format!("jet {j} is not based at point {j}")));
        }
        if jet.order() > k {
            return Err(Error::Shape(format!("jet {j} has order {} > {k}", jet.order())));
        }
    }
    check_distinct(points)?;
    let bumps = (0..points.len()).map(|j| bump_poly(points, j)).collect::<Result<Vec<_>>>()?;
    let reps: Vec<_> = jets.iter().map(Jet::representative).collect();
    Ok(C::interpolate(&bumps, &reps, k))
}

/// `1 − (1 − t)^k = Σ_{i=1}^k (−1)^{i+1} C(k,i) tⁱ` at `t = φ^k`, built from
/// successive powers of `φ`.
fn cutoff<C: Coefficient>(phi: &Polynomial<C>, k: usize) -> Polynomial<C> {
    let mut out = Polynomial::zero(phi.nvars());
    let mut power = Polynomial::one(phi.nvars());
    for m in 1..=k * k {
        power = &power * phi;
        if m % k == 0 {
            let i = (m / k) as u32;
            let c = C::from_rational(&num_rational::BigRational::from_integer(binomial(k as u32, i)));
            let c = if i % 2 == 1 { c } else { c.neg() };
            out = &out + &power.scale(&c);
        }
    }
    out
}

pub(super) fn interpolate_generic<C: Coefficient>(
    bumps: &[Polynomial<C>],
    reps: &[Polynomial<C>],
    k: usize,
) -> Polynomial<C> {
    let n = bumps.first().map_or(0, Polynomial::nvars);
    bumps
        .iter()
        .zip(reps)
        .filter(|(_, rep)| !rep.is_zero())
        .fold(Polynomial::zero(n), |f, (phi, rep)| &f + &(rep * &cutoff(phi, k)))
}
