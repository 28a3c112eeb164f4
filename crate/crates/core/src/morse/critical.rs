use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::manifold::{normalize_sign, EqFunction, ImplicitGManifold};
use super::{DEDUP_TOL, STAB_TOL, TOL_CRIT, TOL_NONDEG};
use crate::groups::Subgroup;
use crate::{Error, Result};

const NEWTON_ITERS: usize = 80;
const RESIDUAL_TOL: f64 = 1e-12;
const ESCAPE_RADIUS: f64 = 1e6;

/// Seeds for the critical-point search: a uniform grid on a box plus
/// explicit points.
#[derive(Clone, Debug)]
pub struct SeedGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub per_axis: usize,
    pub extra: Vec<Vec<f64>>,
}

impl SeedGrid {
    /// The cube `[-r, r]ᴺ` with `per_axis` nodes per axis.
    pub fn cube(n: usize, r: f64, per_axis: usize) -> Self {
        Self { lower: vec![-r; n], upper: vec![r; n], per_axis, extra: Vec::new() }
    }

    pub fn with_extra(mut self, pts: impl IntoIterator<Item = Vec<f64>>) -> Self {
        self.extra.extend(pts);
        self
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let k = self.per_axis.max(1);
        let axis = |i: usize| -> Vec<f64> {
            if k == 1 {
                return vec![(self.lower[i] + self.upper[i]) / 2.0];
            }
            (0..k).map(|j| self.lower[i] + (self.upper[i] - self.lower[i]) * j as f64 / (k - 1) as f64).collect()
        };
        let mut out: Vec<Vec<f64>> = vec![vec![]];
        for i in 0..self.lower.len() {
            let ax = axis(i);
            out = out
                .into_iter()
                .flat_map(|p| {
                    ax.iter().map(move |&t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                })
                .collect();
        }
        out.extend(self.extra.iter().cloned());
        out
    }
}

/// Result of a critical-point search.
#[derive(Clone, Debug)]
pub struct CriticalSearch {
    pub points: Vec<Vec<f64>>,
    pub diverged: usize,
}

/// Newton's method on the Lagrange system `∇f = Jᵀλ, F = 0` from a point.
pub fn newton_critical(f: &dyn EqFunction, m: &ImplicitGManifold, seed: &[f64]) -> Option<DVector<f64>> {
    let (n, c) = (m.ambient_dim(), m.codim());
    let mut x = m.project(seed)?;
    let mut lambda = m.multipliers(x.as_slice(), &f.gradient(x.as_slice()));
    let residual = |x: &DVector<f64>, l: &DVector<f64>| -> DVector<f64> {
        let g = f.gradient(x.as_slice());
        let mut r = DVector::zeros(n + c);
        let eq = if c == 0 { g } else { g - m.jacobian(x.as_slice()).transpose() * l };
        r.rows_mut(0, n).copy_from(&eq);
        if c > 0 {
            r.rows_mut(n, c).copy_from(&m.residual(x.as_slice()));
        }
        r
    };
    let mut r = residual(&x, &lambda);
    for _ in 0..NEWTON_ITERS {
        if r.norm() < RESIDUAL_TOL {
            break;
        }
        let mut k = DMatrix::zeros(n + c, n + c);
        let mut hl = f.hessian(x.as_slice());
        if c > 0 {
            for (l, h) in lambda.iter().zip(m.constraint_hessians(x.as_slice())) {
                hl -= h * *l;
            }
            let j = m.jacobian(x.as_slice());
            k.view_mut((0, n), (n, c)).copy_from(&(-j.transpose()));
            k.view_mut((n, 0), (c, n)).copy_from(&j);
        }
        k.view_mut((0, 0), (n, n)).copy_from(&hl);
        let step = k.lu().solve(&(-&r))?;
        let mut t = 1.0;
        let norm = r.norm();
        let accepted = loop {
            let xn = &x + step.rows(0, n) * t;
            let ln = &lambda + step.rows(n, c) * t;
            let rn = residual(&xn, &ln);
            if rn.norm() < norm || t < 1e-6 {
                break Some((xn, ln, rn));
            }
            t /= 2.0;
        };
        let (xn, ln, rn) = accepted?;
        let moved = (&xn - &x).norm();
        x = xn;
        lambda = ln;
        r = rn;
        if x.norm() > ESCAPE_RADIUS || !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        if moved < 1e-16 {
            break;
        }
    }
    let ok = m.projected_gradient(f, x.as_slice()).norm() < TOL_CRIT && m.residual(x.as_slice()).amax() < 1e-10;
    ok.then_some(x)
}

/// Newton from every seed, symmetrized over the approximate stabilizer,
/// deduplicated and closed under the action. Seeds that fail are counted.
pub fn find_critical_points(f: &dyn EqFunction, m: &ImplicitGManifold, seeds: &SeedGrid) -> CriticalSearch {
    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut diverged = 0;
    let push = |found: &mut Vec<DVector<f64>>, p: DVector<f64>| {
        if !found.iter().any(|q| (q - &p).norm() < DEDUP_TOL) {
            found.push(p);
        }
    };
    for seed in seeds.points() {
        match newton_critical(f, m, &seed).map(|p| symmetrize(f, m, p)) {
            Some(p) => push(&mut found, p),
            None => diverged += 1,
        }
    }
    if diverged > 0 {
        log::debug!("critical point search: {diverged} seeds did not converge");
    }
    let base = found.clone();
    for p in &base {
        for s in m.group().elements() {
            let q = m.act(s, p.as_slice());
            let q = newton_critical(f, m, q.as_slice()).unwrap_or(q);
            push(&mut found, q);
        }
    }
    let mut points: Vec<Vec<f64>> = found.into_iter().map(|p| p.as_slice().to_vec()).collect();
    points.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    CriticalSearch { points, diverged }
}

/// Average over the elements nearly fixing `p`, then polish.
fn symmetrize(f: &dyn EqFunction, m: &ImplicitGManifold, p: DVector<f64>) -> DVector<f64> {
    let h = m.stabilizer(p.as_slice(), DEDUP_TOL);
    if h.order() == 1 {
        return p;
    }
    let q = m.average_over(&h, p.as_slice());
    match newton_critical(f, m, q.as_slice()) {
        Some(r) if (&r - &q).norm() < DEDUP_TOL => r,
        _ => p,
    }
}

/// A classified critical point. Subspace bases are in ambient coordinates;
/// the Hessian is in the orthonormal tangent basis `tangent`.
#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub coords: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub stabilizer: Subgroup,
    pub tangent: DMatrix<f64>,
    pub hessian: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of the Hessian in ambient coordinates, ascending
    /// eigenvalue order.
    pub eigenvectors: DMatrix<f64>,
    pub index: usize,
    pub fixed_subspace: DMatrix<f64>,
    pub prime_subspace: DMatrix<f64>,
    pub stable: bool,
    /// `(h, matrix of h on the negative eigenspace)` for `h` in the
    /// stabilizer, in the basis of negative eigenvectors.
    pub descending_rep: Vec<(usize, DMatrix<f64>)>,
}

impl CriticalPoint {
    pub fn dim(&self) -> usize {
        self.tangent.ncols()
    }

    /// Traces of the descending representation.
    pub fn descending_character(&self) -> Vec<f64> {
        self.descending_rep.iter().map(|(_, m)| m.trace()).collect()
    }

    /// Whether the stabilizer fixes the negative eigenspace pointwise.
    pub fn descending_fixed(&self) -> bool {
        self.descending_rep.iter().all(|(_, m)| (m - DMatrix::identity(m.nrows(), m.ncols())).amax() < 1e-6)
    }

    pub fn negative_directions(&self) -> DMatrix<f64> {
        self.eigenvectors.columns(0, self.index).into_owned()
    }

    pub fn positive_directions(&self) -> DMatrix<f64> {
        self.eigenvectors.columns(self.index, self.dim() - self.index).into_owned()
    }
}

/// Eigen-decomposition with ascending eigenvalues.
pub(crate) fn sorted_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new((a + a.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> =
        order.iter().map(|&i| normalize_sign(eig.eigenvectors.column(i).into_owned())).collect();
    (vals, DMatrix::from_columns(&cols))
}

fn columns_or_empty(rows: usize, cols: Vec<DVector<f64>>) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Stabilizer, Riemannian Hessian, index, isotropy splitting and stability.
pub fn classify(f: &dyn EqFunction, m: &ImplicitGManifold, p: &[f64]) -> Result<CriticalPoint> {
    let grad = f.gradient(p);
    let pg = m.projected_gradient(f, p);
    if pg.norm() >= TOL_CRIT {
        return Err(Error::Precondition(format!("gradient norm {:e} at {p:?} exceeds the tolerance", pg.norm())));
    }
    let t = m.tangent_basis(p);
    let n = t.ncols();
    let mut hl = f.hessian(p);
    if m.codim() > 0 {
        let lambda = m.multipliers(p, &grad);
        for (l, h) in lambda.iter().zip(m.constraint_hessians(p)) {
            hl -= h * *l;
        }
    }
    let hessian = t.transpose() * hl * &t;
    let hessian = (&hessian + hessian.transpose()) * 0.5;
    let (eigenvalues, vecs) = sorted_eigen(&hessian);
    if let Some(&e) = eigenvalues.iter().find(|e| e.abs() <= TOL_NONDEG) {
        return Err(Error::DegenerateHessian { point: p.to_vec(), eigenvalue: e });
    }
    let index = eigenvalues.iter().filter(|&&e| e < 0.0).count();
    let stabilizer = m.stabilizer(p, STAB_TOL);
    let tangent_action = |s: usize| t.transpose() * m.matrix(s) * &t;
    let averaging = stabilizer.elements().iter().fold(DMatrix::zeros(n, n), |acc, &s| acc + tangent_action(s))
        / stabilizer.order() as f64;
    let (pvals, pvecs) = sorted_eigen(&averaging);
    let (mut fixed, mut prime) = (Vec::new(), Vec::new());
    for (i, &v) in pvals.iter().enumerate() {
        let col = pvecs.column(i).into_owned();
        if v > 0.5 {
            fixed.push(col);
        } else {
            prime.push(col);
        }
    }
    let prime_t = columns_or_empty(n, prime);
    let restricted = prime_t.transpose() * &hessian * &prime_t;
    let stable = sorted_eigen(&restricted).0.iter().all(|&e| e > TOL_NONDEG);
    let neg = vecs.columns(0, index).into_owned();
    let descending_rep =
        stabilizer.elements().iter().map(|&s| (s, neg.transpose() * tangent_action(s) * &neg)).collect();
    Ok(CriticalPoint {
        coords: p.to_vec(),
        value: f.value(p),
        gradient_norm: pg.norm(),
        fixed_subspace: &t * columns_or_empty(n, fixed),
        prime_subspace: &t * prime_t,
        eigenvectors: &t * vecs,
        tangent: t,
        hessian,
        eigenvalues,
        index,
        stable,
        descending_rep,
        stabilizer,
    })
}

/// Classifies every point of a search.
pub fn classify_all(f: &dyn EqFunction, m: &ImplicitGManifold, points: &[Vec<f64>]) -> Result<Vec<CriticalPoint>> {
    points.iter().map(|p| classify(f, m, p)).collect()
}
