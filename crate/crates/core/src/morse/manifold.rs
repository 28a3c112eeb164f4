use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::groups::{FiniteGroup, Subgroup};
use crate::polyalg::{FPoly, LinearAction, MatrixBackend, QPoly};
use crate::{Error, Result};

const FD_STEP: f64 = 1e-5;
const PROJECTION_TOL: f64 = 1e-13;
const PROJECTION_ITERS: usize = 60;
const SAMPLED_INVARIANCE_TOL: f64 = 1e-9;

/// A smooth invariant function with gradient, and a Hessian that defaults
/// to central differences of the gradient.
pub trait EqFunction: Send + Sync {
    fn nvars(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> DVector<f64>;

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        central_difference(self, x)
    }
}

/// Symmetrized central-difference Jacobian of the gradient.
pub fn central_difference<F: EqFunction + ?Sized>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let mut y = x.to_vec();
    for j in 0..n {
        let step = FD_STEP * (1.0 + x[j].abs());
        y[j] = x[j] + step;
        let plus = f.gradient(&y);
        y[j] = x[j] - step;
        let minus = f.gradient(&y);
        y[j] = x[j];
        h.set_column(j, &((plus - minus) / (2.0 * step)));
    }
    (&h + h.transpose()) * 0.5
}

/// How invariance under the action was established.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Invariance {
    Exact,
    Sampled(f64),
}

/// A polynomial function with precomputed derivative polynomials.
#[derive(Clone, Debug)]
pub struct PolyFunction {
    poly: FPoly,
    grad: Vec<FPoly>,
    hess: Vec<Vec<FPoly>>,
    certificate: Invariance,
}

impl PolyFunction {
    /// Checks invariance exactly when the action has rational matrices.
    pub fn new(f: &QPoly, action: &LinearAction) -> Result<Self> {
        if f.nvars() != action.dim() {
            return Err(Error::Shape(format!("function in {} variables, action on ℝ^{}", f.nvars(), action.dim())));
        }
        let certificate = if action.is_exact() {
            let defect = action.invariance_defect(f)?;
            if defect != 0.0 {
                return Err(Error::InvalidAction(format!("function is not invariant (defect {defect:e})")));
            }
            Invariance::Exact
        } else {
            sampled_certificate(&f.to_f64(), action)?
        };
        Ok(Self::with_certificate(f.to_f64(), certificate))
    }

    pub fn from_float(f: FPoly, action: &LinearAction) -> Result<Self> {
        let certificate = sampled_certificate(&f, action)?;
        Ok(Self::with_certificate(f, certificate))
    }

    fn with_certificate(poly: FPoly, certificate: Invariance) -> Self {
        let n = poly.nvars();
        let grad: Vec<FPoly> = (0..n).map(|i| poly.derivative(i)).collect();
        let hess = grad.iter().map(|g| (0..n).map(|j| g.derivative(j)).collect()).collect();
        Self { poly, grad, hess, certificate }
    }

    pub fn poly(&self) -> &FPoly {
        &self.poly
    }

    pub fn certificate(&self) -> Invariance {
        self.certificate
    }
}

fn sampled_certificate(f: &FPoly, action: &LinearAction) -> Result<Invariance> {
    let defect = action.invariance_defect(f)?;
    if defect > SAMPLED_INVARIANCE_TOL * (1.0 + f.max_abs_coeff()) {
        return Err(Error::InvalidAction(format!("function is not invariant (sampled defect {defect:e})")));
    }
    Ok(Invariance::Sampled(defect))
}

impl EqFunction for PolyFunction {
    fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.poly.eval_f64(x)
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.grad.len(), self.grad.iter().map(|g| g.eval_f64(x)))
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.grad.len();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j].eval_f64(x))
    }
}

/// Orthogonal matrices of an action, in floating point.
pub fn float_matrices(action: &LinearAction) -> Vec<DMatrix<f64>> {
    let n = action.dim();
    match action.backend() {
        MatrixBackend::Exact(ms) => {
            ms.iter().map(|m| DMatrix::from_fn(n, n, |i, j| crate::polyalg::Coefficient::to_f64(&m[i][j]))).collect()
        }
        MatrixBackend::Float(ms) => ms.iter().map(|m| DMatrix::from_fn(n, n, |i, j| m[i][j])).collect(),
    }
}

/// The zero set of `F : ℝᴺ → ℝᶜ` with an orthogonal action preserving it,
/// carrying the induced metric.
#[derive(Clone, Debug)]
pub struct ImplicitGManifold {
    ambient: usize,
    constraints: Vec<PolyFunction>,
    group: FiniteGroup,
    matrices: Vec<DMatrix<f64>>,
}

impl ImplicitGManifold {
    /// `ℝᴺ` itself.
    pub fn euclidean(action: &LinearAction) -> Self {
        Self {
            ambient: action.dim(),
            constraints: Vec::new(),
            group: action.group().clone(),
            matrices: float_matrices(action),
        }
    }

    /// The zero set of the constraints; each must be invariant, and the
    /// action is checked on sample points of the zero set.
    pub fn new(constraints: &[QPoly], action: &LinearAction) -> Result<Self> {
        let constraints = constraints.iter().map(|c| PolyFunction::new(c, action)).collect::<Result<Vec<_>>>()?;
        let m = Self {
            ambient: action.dim(),
            constraints,
            group: action.group().clone(),
            matrices: float_matrices(action),
        };
        for x in m.sample_points() {
            for a in &m.matrices {
                let y = a * &x;
                let r = m.residual(y.as_slice());
                if r.amax() > SAMPLED_INVARIANCE_TOL {
                    return Err(Error::InvalidAction(format!("action leaves the zero set (residual {:e})", r.amax())));
                }
            }
        }
        Ok(m)
    }

    /// Projections of the scaled coordinate points `±2eᵢ` that converge.
    pub fn sample_points(&self) -> Vec<DVector<f64>> {
        let n = self.ambient;
        (0..n)
            .flat_map(|i| {
                [2.0, -2.0].map(|s| DVector::from_fn(n, |j, _| if j == i { s } else { 0.3 * (j + 1) as f64 }))
            })
            .filter_map(|x| self.project(x.as_slice()))
            .collect()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn codim(&self) -> usize {
        self.constraints.len()
    }

    pub fn dim(&self) -> usize {
        self.ambient - self.constraints.len()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn matrix(&self, sigma: usize) -> &DMatrix<f64> {
        &self.matrices[sigma]
    }

    pub fn act(&self, sigma: usize, x: &[f64]) -> DVector<f64> {
        &self.matrices[sigma] * DVector::from_column_slice(x)
    }

    pub fn residual(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| c.value(x)))
    }

    /// `c × N` Jacobian of the constraints.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.constraints.len(), self.ambient);
        for (i, c) in self.constraints.iter().enumerate() {
            j.set_row(i, &c.gradient(x).transpose());
        }
        j
    }

    pub fn constraint_hessians(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        self.constraints.iter().map(|c| c.hessian(x)).collect()
    }

    /// Gauss–Newton projection onto the zero set along minimum-norm steps.
    pub fn project(&self, x: &[f64]) -> Option<DVector<f64>> {
        let mut y = DVector::from_column_slice(x);
        if self.constraints.is_empty() {
            return Some(y);
        }
        for _ in 0..PROJECTION_ITERS {
            let r = self.residual(y.as_slice());
            if r.amax() < PROJECTION_TOL {
                return Some(y);
            }
            let j = self.jacobian(y.as_slice());
            let jjt = &j * j.transpose();
            let step = j.transpose() * jjt.lu().solve(&r)?;
            y -= step;
            if !y.iter().all(|t| t.is_finite()) {
                return None;
            }
        }
        (self.residual(y.as_slice()).amax() < 1e-10).then_some(y)
    }

    /// `N × n` orthonormal basis of `T_xM`, deterministic up to the
    /// eigensolver: the null space of the Jacobian, signs normalized so
    /// the largest entry of each column is positive.
    pub fn tangent_basis(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.ambient;
        if self.constraints.is_empty() {
            return DMatrix::identity(n, n);
        }
        let j = self.jacobian(x);
        let eig = SymmetricEigen::new(j.transpose() * &j);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let cols: Vec<DVector<f64>> =
            order[..self.dim()].iter().map(|&i| normalize_sign(eig.eigenvectors.column(i).into_owned())).collect();
        if cols.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&cols)
    }

    /// Orthogonal projection onto `T_xM`.
    pub fn tangent_projector(&self, x: &[f64]) -> DMatrix<f64> {
        let t = self.tangent_basis(x);
        &t * t.transpose()
    }

    /// Least-squares multipliers with `∇f ≈ Jᵀλ`.
    pub fn multipliers(&self, x: &[f64], grad: &DVector<f64>) -> DVector<f64> {
        if self.constraints.is_empty() {
            return DVector::zeros(0);
        }
        let j = self.jacobian(x);
        (&j * j.transpose()).lu().solve(&(&j * grad)).unwrap_or_else(|| DVector::zeros(self.codim()))
    }

    /// `∇f − Jᵀλ`, the gradient of `f|_M` in ambient coordinates.
    pub fn projected_gradient(&self, f: &dyn EqFunction, x: &[f64]) -> DVector<f64> {
        let g = f.gradient(x);
        if self.constraints.is_empty() {
            return g;
        }
        let lambda = self.multipliers(x, &g);
        &g - self.jacobian(x).transpose() * lambda
    }

    /// Elements `σ` with `|A_σx − x| < tol`.
    pub fn stabilizer(&self, x: &[f64], tol: f64) -> Subgroup {
        let p = DVector::from_column_slice(x);
        let els: Vec<usize> = self.group.elements().filter(|&s| (&self.matrices[s] * &p - &p).norm() < tol).collect();
        self.group.subgroup(&els).expect("stabilizer is a subgroup")
    }

    /// `(1/|H|) Σ_{h∈H} A_h x`.
    pub fn average_over(&self, h: &Subgroup, x: &[f64]) -> DVector<f64> {
        let p = DVector::from_column_slice(x);
        h.elements().iter().fold(DVector::zeros(self.ambient), |acc, &s| acc + &self.matrices[s] * &p)
            / h.order() as f64
    }
}

pub(crate) fn normalize_sign(mut v: DVector<f64>) -> DVector<f64> {
    let big = v.iter().copied().fold(0.0f64, |m, t| if t.abs() > m.abs() + 1e-12 { t } else { m });
    if big < 0.0 {
        v.neg_mut();
    }
    v
}

/// `(1/|G|) Σ_σ A_σᵀ g(A_σx) A_σ`, the invariant average of a metric field.
pub fn metric_average<'a>(
    g: impl Fn(&[f64]) -> DMatrix<f64> + 'a,
    action: &LinearAction,
) -> impl Fn(&[f64]) -> DMatrix<f64> + 'a {
    let mats = float_matrices(action);
    move |x: &[f64]| {
        let p = DVector::from_column_slice(x);
        let n = p.len();
        let sum = mats.iter().fold(DMatrix::zeros(n, n), |acc, a| {
            let y = a * &p;
            acc + a.transpose() * g(y.as_slice()) * a
        });
        sum / mats.len() as f64
    }
}
