use num_rational::BigRational;

use super::jets::{jet_interpolate, Jet};
use super::{Coefficient, Polynomial};
use crate::groups::FiniteGroup;
use crate::{Error, Result};

const FLOAT_LAW_TOL: f64 = 1e-12;

/// Matrices of a linear action, one per group element.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixBackend {
    Exact(Vec<Vec<Vec<BigRational>>>),
    Float(Vec<Vec<Vec<f64>>>),
}

/// A linear representation `σ ↦ A_σ` of a finite group on `ℝⁿ`.
#[derive(Clone, Debug)]
pub struct LinearAction {
    group: FiniteGroup,
    dim: usize,
    backend: MatrixBackend,
}

fn matmul<C: Coefficient>(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(C::zero(), |acc, l| acc.add(&a[i][l].mul(&b[l][j])))).collect()).collect()
}

fn check_law<C: Coefficient>(
    group: &FiniteGroup,
    mats: &[Vec<Vec<C>>],
    close: impl Fn(&C, &C) -> bool,
) -> Result<usize> {
    if mats.len() != group.order() {
        return Err(Error::InvalidAction(format!("{} matrices for a group of order {}", mats.len(), group.order())));
    }
    let n = mats.first().map_or(0, Vec::len);
    if mats.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
        return Err(Error::InvalidAction("matrices must all be n×n".into()));
    }
    let eq = |a: &[Vec<C>], b: &[Vec<C>]| a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| close(x, y)));
    for s in group.elements() {
        for t in group.elements() {
            if !eq(&matmul(&mats[s], &mats[t]), &mats[group.mul(s, t)]) {
                return Err(Error::InvalidAction(format!("A_{s} A_{t} ≠ A_{}", group.mul(s, t))));
            }
        }
    }
    Ok(n)
}

impl LinearAction {
    pub fn exact(group: &FiniteGroup, matrices: Vec<Vec<Vec<BigRational>>>) -> Result<Self> {
        let dim = check_law(group, &matrices, |a, b| a == b)?;
        Ok(Self { group: group.clone(), dim, backend: MatrixBackend::Exact(matrices) })
    }

    pub fn float(group: &FiniteGroup, matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = check_law(group, &matrices, |a, b| (a - b).abs() <= FLOAT_LAW_TOL)?;
        for (s, m) in matrices.iter().enumerate() {
            let t: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| m[j][i]).collect()).collect();
            let p = matmul(m, &t);
            let orthogonal =
                (0..dim).all(|i| (0..dim).all(|j| (p[i][j] - if i == j { 1.0 } else { 0.0 }).abs() <= FLOAT_LAW_TOL));
            if !orthogonal {
                return Err(Error::InvalidAction(format!("matrix of element {s} is not orthogonal")));
            }
        }
        Ok(Self { group: group.clone(), dim, backend: MatrixBackend::Float(matrices) })
    }

    /// Signed permutation matrices: element `σ` sends `e_i` to
    /// `signs[σ][i] · e_{perms[σ][i]}`.
    pub fn signed_permutations(group: &FiniteGroup, perms: &[Vec<usize>], signs: &[Vec<i64>]) -> Result<Self> {
        let mats = perms
            .iter()
            .zip(signs)
            .map(|(perm, sign)| {
                let n = perm.len();
                let mut m = vec![vec![<BigRational as Coefficient>::zero(); n]; n];
                for (i, (&j, &s)) in perm.iter().zip(sign).enumerate() {
                    m[j][i] = BigRational::from_integer(s.into());
                }
                m
            })
            .collect();
        Self::exact(group, mats)
    }

    /// `Sₙ` permuting coordinates of `ℝⁿ`.
    pub fn permutation(n: usize) -> Result<Self> {
        let (g, perms) = FiniteGroup::symmetric(n);
        let signs = vec![vec![1; n]; perms.len()];
        Self::signed_permutations(&g, &perms, &signs)
    }

    /// `C₂` acting on `ℝⁿ` by `x ↦ −x`.
    pub fn sign(n: usize) -> Result<Self> {
        let g = FiniteGroup::cyclic(2);
        let id: Vec<usize> = (0..n).collect();
        Self::signed_permutations(&g, &[id.clone(), id], &[vec![1; n], vec![-1; n]])
    }

    /// `Cₘ` rotating `ℝ²`, element `j` by angle `2πj/m`.
    pub fn rotation(m: usize) -> Result<Self> {
        let g = FiniteGroup::cyclic(m);
        let mats = (0..m)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / m as f64;
                vec![vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]
            })
            .collect();
        Self::float(&g, mats)
    }

    pub fn trivial(n: usize) -> Self {
        let id = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            <BigRational as Coefficient>::one()
                        } else {
                            <BigRational as Coefficient>::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { group: FiniteGroup::trivial(), dim: n, backend: MatrixBackend::Exact(vec![id]) }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backend(&self) -> &MatrixBackend {
        &self.backend
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.backend, MatrixBackend::Exact(_))
    }

    /// `A_σ` over the coefficient type `C`; float matrices cannot be read
    /// exactly.
    pub fn matrix<C: Coefficient>(&self, sigma: usize) -> Result<Vec<Vec<C>>> {
        match &self.backend {
            MatrixBackend::Exact(m) => Ok(m[sigma].iter().map(|r| r.iter().map(C::from_rational).collect()).collect()),
            MatrixBackend::Float(m) => m[sigma]
                .iter()
                .map(|r| r.iter().map(|&x| C::from_f64(x)).collect::<Option<Vec<C>>>())
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidAction("float action applied to exact coefficients".into())),
        }
    }

    pub fn apply<C: Coefficient>(&self, sigma: usize, p: &[C]) -> Result<Vec<C>> {
        let a = self.matrix::<C>(sigma)?;
        Ok(a.iter().map(|row| row.iter().zip(p).fold(C::zero(), |acc, (x, y)| acc.add(&x.mul(y)))).collect())
    }

    /// Elements fixing `p`.
    pub fn stabilizer<C: Coefficient>(&self, p: &[C]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for s in self.group.elements() {
            let q = self.apply(s, p)?;
            if q.iter().zip(p).all(|(a, b)| a.close(b)) {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Invariance defect `max_σ sup_{|x|≤1} |f∘A_σ − f|`. Exact
    /// coefficients give the coefficient ℓ¹ norm of `f∘A_σ − f` (zero iff
    /// invariant); float coefficients are sampled on a grid of the ball.
    pub fn invariance_defect<C: Coefficient>(&self, f: &Polynomial<C>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        if C::EXACT {
            for s in self.group.elements() {
                let g = f.compose_linear(&self.matrix::<C>(s)?);
                if &g != f {
                    worst = worst.max((&g - f).terms().map(|(_, c)| c.to_f64().abs()).sum());
                }
            }
            return Ok(worst);
        }
        let samples = ball_grid(self.dim, BALL_GRID_STEPS);
        for s in self.group.elements() {
            let a = self.matrix::<C>(s)?;
            for x in &samples {
                let ax: Vec<f64> = a.iter().map(|row| row.iter().zip(x).map(|(c, xi)| c.to_f64() * xi).sum()).collect();
                worst = worst.max((f.eval_f64(&ax) - f.eval_f64(x)).abs());
            }
        }
        Ok(worst)
    }
}

const BALL_GRID_STEPS: usize = 24;

/// Points of the grid `{-1, …, 1}ⁿ` with `steps + 1` nodes per axis lying
/// in the closed unit ball.
fn ball_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..=steps).map(|i| -1.0 + 2.0 * i as f64 / steps as f64).collect();
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().map(|t| t * t).sum::<f64>() <= 1.0 + 1e-12);
    out
}

/// `(1/|G|) Σ_σ f∘A_σ`.
pub fn equivariant_average<C: Coefficient>(f: &Polynomial<C>, act: &LinearAction) -> Result<Polynomial<C>> {
    let mats = act.group().elements().map(|s| act.matrix::<C>(s)).collect::<Result<Vec<_>>>()?;
    Ok(C::average(f, &mats))
}

pub(super) fn average_generic<C: Coefficient>(f: &Polynomial<C>, mats: &[Vec<Vec<C>>]) -> Polynomial<C> {
    let sum = mats.iter().fold(Polynomial::zero(f.nvars()), |acc, a| &acc + &f.compose_linear(a));
    sum.scale(&C::one().div(&C::from_i64(mats.len() as i64)))
}

/// The jet of `f∘σ⁻¹` at `σp`, given the jet of `f` at `p`.
pub fn transport_jet<C: Coefficient>(jet: &Jet<C>, sigma: usize, act: &LinearAction) -> Result<Jet<C>> {
    let inv = act.group().inv(sigma);
    let base = act.apply(sigma, jet.basepoint())?;
    let local = jet.local().compose_linear(&act.matrix::<C>(inv)?).truncate(jet.order());
    Jet::new(base, jet.order(), local)
}

fn jets_close<C: Coefficient>(a: &Jet<C>, b: &Jet<C>) -> bool {
    let d = a.local() - b.local();
    let zero = C::zero();
    let all_close = d.terms().all(|(_, c)| c.close(&zero));
    all_close
}

/// An invariant polynomial with the given jet at `p`: transport along the
/// orbit, interpolate, average.
pub fn equivariant_jet_lift<C: Coefficient>(
    p: &[C],
    jet: &Jet<C>,
    act: &LinearAction,
    k: usize,
) -> Result<Polynomial<C>> {
    if jet.basepoint() != p || p.len() != act.dim() {
        return Err(Error::Shape("jet must be based at p in the representation space".into()));
    }
    for h in act.stabilizer(p)? {
        if !jets_close(&transport_jet(jet, h, act)?, jet) {
            return Err(Error::JetNotFixed(h));
        }
    }
    let mut points: Vec<Vec<C>> = Vec::new();
    let mut jets = Vec::new();
    for s in act.group().elements() {
        let q = act.apply(s, p)?;
        if points.iter().any(|r| r.iter().zip(&q).all(|(a, b)| a.close(b))) {
            continue;
        }
        jets.push(transport_jet(jet, s, act)?);
        points.push(q);
    }
    let f = jet_interpolate(&points, &jets, k)?;
    equivariant_average(&f, act)
}
