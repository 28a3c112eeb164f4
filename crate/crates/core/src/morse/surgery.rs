use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;

use super::critical::{classify, find_critical_points, sorted_eigen, CriticalPoint, SeedGrid};
use super::cutoff::{CutoffPair, Transition};
use super::manifold::{float_matrices, EqFunction, ImplicitGManifold, PolyFunction};
use super::DEDUP_TOL;
use crate::groups::FiniteGroup;
use crate::polyalg::{FPoly, LinearAction, MatrixBackend, QPoly};
use crate::{Error, Result};

const H_EQUIVARIANCE_TOL: f64 = 1e-9;
const CHART_TOL: f64 = 1e-6;
const RADIAL_SAMPLES: usize = 600;

/// Sample points of the unit sphere in `ℝᵐ`.
pub fn sphere_samples(m: usize) -> Vec<DVector<f64>> {
    match m {
        0 => Vec::new(),
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => (0..720)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 720.0;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => {
            let k = 12usize;
            let mut out = Vec::new();
            let mut idx = vec![0usize; m];
            loop {
                let x = DVector::from_fn(m, |i, _| -1.0 + 2.0 * idx[i] as f64 / k as f64);
                if x.iter().any(|t| t.abs() == 1.0) {
                    out.push(x.normalize());
                }
                let mut i = 0;
                while i < m && idx[i] == k {
                    idx[i] = 0;
                    i += 1;
                }
                if i == m {
                    break;
                }
                idx[i] += 1;
            }
            out
        }
    }
}

/// `h` on the unit sphere of `U`, evaluated at `u/‖u‖`.
#[derive(Clone, Debug)]
struct SphereFunction {
    h: FPoly,
    dh: Vec<FPoly>,
}

impl SphereFunction {
    fn new(h: FPoly) -> Self {
        let dh = (0..h.nvars()).map(|i| h.derivative(i)).collect();
        Self { h, dh }
    }

    fn sup(&self) -> f64 {
        sphere_samples(self.h.nvars()).iter().map(|u| self.h.eval_f64(u.as_slice()).abs()).fold(0.0, f64::max)
    }

    /// `max_{h, u} |h(M_h u) − h(u)|` over sphere samples.
    fn defect(&self, mats: &[DMatrix<f64>]) -> f64 {
        let samples = sphere_samples(self.h.nvars());
        mats.iter()
            .flat_map(|a| samples.iter().map(move |u| (a * u, u)))
            .map(|(au, u)| (self.h.eval_f64(au.as_slice()) - self.h.eval_f64(u.as_slice())).abs())
            .fold(0.0, f64::max)
    }
}

/// The perturbation term `D(u) = ‖u‖²(1 − φ(‖u‖−2)) + a·ψ(‖u‖)·h(u/‖u‖)`,
/// supported in `‖u‖ < 3`. Adding it to `−‖u‖²` gives the construction.
#[derive(Clone, Debug)]
pub struct Bubble {
    cut: CutoffPair,
    h: SphereFunction,
    amplitude: f64,
}

impl Bubble {
    fn new(cut: CutoffPair, h: FPoly) -> Self {
        let h = SphereFunction::new(h);
        let sup = h.sup();
        let amplitude = if sup > 0.0 { cut.epsilon() / sup } else { cut.epsilon() };
        Self { cut, h, amplitude }
    }

    pub fn cutoffs(&self) -> &CutoffPair {
        &self.cut
    }

    /// The effective `ε` multiplying `h`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dim(&self) -> usize {
        self.h.h.nvars()
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let r2: f64 = u.iter().map(|t| t * t).sum();
        if r2 <= 1.0 {
            return 2.0 * r2;
        }
        let r = r2.sqrt();
        if r >= 3.0 {
            return 0.0;
        }
        let mut out = r2 * (1.0 - self.cut.phi(r - 2.0));
        let psi = self.cut.psi(r);
        if psi != 0.0 {
            let unit: Vec<f64> = u.iter().map(|t| t / r).collect();
            out += self.amplitude * psi * self.h.h.eval_f64(&unit);
        }
        out
    }

    pub fn gradient(&self, u: &[f64]) -> DVector<f64> {
        let m = u.len();
        let r2: f64 = u.iter().map(|t| t * t).sum();
        if r2 <= 1.0 {
            return DVector::from_iterator(m, u.iter().map(|t| 4.0 * t));
        }
        let r = r2.sqrt();
        if r >= 3.0 {
            return DVector::zeros(m);
        }
        let unit = DVector::from_iterator(m, u.iter().map(|t| t / r));
        let radial = 2.0 * r * (1.0 - self.cut.phi(r - 2.0)) - r2 * self.cut.dphi(r - 2.0);
        let mut g = &unit * radial;
        let (psi, dpsi) = (self.cut.psi(r), self.cut.dpsi(r));
        if psi != 0.0 || dpsi != 0.0 {
            let hv = self.h.h.eval_f64(unit.as_slice());
            let dh = DVector::from_iterator(m, self.h.dh.iter().map(|d| d.eval_f64(unit.as_slice())));
            let tangential = &dh - &unit * unit.dot(&dh);
            g += (&unit * (dpsi * hv) + tangential * (psi / r)) * self.amplitude;
        }
        g
    }

    /// `sup_{‖u‖≤3} |D(u)|`, sampled.
    pub fn sup(&self) -> f64 {
        let dirs = sphere_samples(self.dim());
        (0..=RADIAL_SAMPLES)
            .map(|i| 3.0 * i as f64 / RADIAL_SAMPLES as f64)
            .flat_map(|r| dirs.iter().map(move |d| d * r))
            .map(|u| self.value(u.as_slice()).abs())
            .fold(0.0, f64::max)
    }
}

/// `(v, w, u) ↦ ‖v‖² − ‖w‖² − ‖u‖²φ(‖u‖−2) + εψ(‖u‖)h(u/‖u‖)` on `V ⊕ W ⊕ U`.
#[derive(Clone, Debug)]
pub struct ModelFunction {
    dv: usize,
    dw: usize,
    bubble: Bubble,
}

impl ModelFunction {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.dv, self.dw, self.bubble.dim())
    }

    pub fn bubble(&self) -> &Bubble {
        &self.bubble
    }

    /// `‖v‖² − ‖w‖² + sign·‖u‖²`.
    pub fn quadratic(&self, x: &[f64], sign: f64) -> f64 {
        let sq = |r: std::ops::Range<usize>| x[r].iter().map(|t| t * t).sum::<f64>();
        let n = x.len();
        sq(0..self.dv) - sq(self.dv..self.dv + self.dw) + sign * sq(self.dv + self.dw..n)
    }

    pub fn u_norm(&self, x: &[f64]) -> f64 {
        x[self.dv + self.dw..].iter().map(|t| t * t).sum::<f64>().sqrt()
    }
}

impl EqFunction for ModelFunction {
    fn nvars(&self) -> usize {
        self.dv + self.dw + self.bubble.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.quadratic(x, -1.0) + self.bubble.value(&x[self.dv + self.dw..])
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let k = self.dv + self.dw;
        let mut g = DVector::from_iterator(
            x.len(),
            x.iter().enumerate().map(|(i, t)| if i < self.dv { 2.0 * t } else { -2.0 * t }),
        );
        let mut tail = g.rows_mut(k, x.len() - k);
        tail += self.bubble.gradient(&x[k..]);
        g
    }
}

/// A critical point predicted by the construction.
#[derive(Clone, Debug)]
pub struct PredictedPoint {
    pub coords: Vec<f64>,
    pub index: usize,
}

/// The construction on `V ⊕ W ⊕ U` with its predicted and verified
/// critical points.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub function: ModelFunction,
    pub manifold: ImplicitGManifold,
    pub action: LinearAction,
    pub predicted: Vec<PredictedPoint>,
    pub critical: Vec<CriticalPoint>,
}

/// Block-diagonal sum of actions of one group.
pub fn direct_sum(parts: &[&LinearAction]) -> Result<LinearAction> {
    let group = parts.first().ok_or_else(|| Error::Shape("empty direct sum".into()))?.group().clone();
    if parts.iter().any(|a| a.group() != &group) {
        return Err(Error::InvalidAction("direct sum of actions of different groups".into()));
    }
    let n: usize = parts.iter().map(|a| a.dim()).sum();
    if parts.iter().all(|a| a.is_exact()) {
        let zero = <BigRational as crate::polyalg::Coefficient>::zero();
        let mats = group
            .elements()
            .map(|s| {
                let mut m = vec![vec![zero.clone(); n]; n];
                let mut off = 0;
                for a in parts {
                    let MatrixBackend::Exact(ms) = a.backend() else { unreachable!() };
                    for i in 0..a.dim() {
                        for j in 0..a.dim() {
                            m[off + i][off + j] = ms[s][i][j].clone();
                        }
                    }
                    off += a.dim();
                }
                m
            })
            .collect();
        return LinearAction::exact(&group, mats);
    }
    let blocks: Vec<Vec<DMatrix<f64>>> = parts.iter().map(|a| float_matrices(a)).collect();
    let mats = group
        .elements()
        .map(|s| {
            let mut m = vec![vec![0.0; n]; n];
            let mut off = 0;
            for b in &blocks {
                let d = b[s].nrows();
                for i in 0..d {
                    for j in 0..d {
                        m[off + i][off + j] = b[s][(i, j)];
                    }
                }
                off += d;
            }
            m
        })
        .collect();
    LinearAction::float(&group, mats)
}

/// Critical points of `h` on the unit sphere of `U`, classified.
fn sphere_critical_points(h: &FPoly, u: &LinearAction) -> Result<Vec<CriticalPoint>> {
    let m = u.dim();
    let norm = QPoly::from_terms(
        m,
        (0..m)
            .map(|i| {
                let mut e = vec![0; m];
                e[i] = 2;
                (e, crate::polyalg::q(1, 1))
            })
            .chain(std::iter::once((vec![0; m], crate::polyalg::q(-1, 1)))),
    );
    let sphere = ImplicitGManifold::new(&[norm], u)?;
    let f = PolyFunction::from_float(h.clone(), u).map_err(|e| match e {
        Error::InvalidAction(_) => Error::HNotEquivariant(u.invariance_defect(h).unwrap_or(f64::NAN)),
        other => other,
    })?;
    let per_axis = match m {
        1 => 3,
        2 => 25,
        _ => 9,
    };
    let found = find_critical_points(&f, &sphere, &SeedGrid::cube(m, 1.0, per_axis));
    found.points.iter().map(|p| classify(&f, &sphere, p)).collect()
}

fn grid_per_axis(n: usize) -> usize {
    match n {
        0 | 1 => 241,
        2 => 49,
        3 => 17,
        _ => 7,
    }
}

/// Builds the construction on `V ⊕ W ⊕ U` and checks its critical set
/// against the prediction `{0} ∪ {(0, 0, t₀u) : u ∈ crit(h)}` with a grid
/// search over `[-3.5, 3.5]ᴺ`.
pub fn stable_perturb(
    v: &LinearAction,
    w: &LinearAction,
    u: &LinearAction,
    h: &FPoly,
    cut: &CutoffPair,
) -> Result<Perturbation> {
    if h.nvars() != u.dim() {
        return Err(Error::Shape(format!("h in {} variables on U of dimension {}", h.nvars(), u.dim())));
    }
    let sphere_fn = SphereFunction::new(h.clone());
    let defect = sphere_fn.defect(&float_matrices(u));
    if defect > H_EQUIVARIANCE_TOL {
        return Err(Error::HNotEquivariant(defect));
    }
    let action = direct_sum(&[v, w, u])?;
    let manifold = ImplicitGManifold::euclidean(&action);
    let function = ModelFunction { dv: v.dim(), dw: w.dim(), bubble: Bubble::new(cut.clone(), h.clone()) };
    let n = action.dim();
    let k = v.dim() + w.dim();
    let mut predicted = vec![PredictedPoint { coords: vec![0.0; n], index: w.dim() }];
    if u.dim() > 0 {
        for c in sphere_critical_points(h, u)? {
            let mut coords = vec![0.0; n];
            for (i, t) in c.coords.iter().enumerate() {
                coords[k + i] = cut.t0() * t;
            }
            predicted.push(PredictedPoint { coords, index: w.dim() + c.index + 1 });
        }
    }
    let seeds = SeedGrid::cube(n, 3.5, grid_per_axis(n)).with_extra(predicted.iter().map(|p| p.coords.clone()));
    let found = find_critical_points(&function, &manifold, &seeds);
    let near = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() < 1e-5;
    let spurious = found.points.iter().filter(|p| !predicted.iter().any(|q| near(p, &q.coords))).count();
    if spurious > 0 {
        return Err(Error::EpsilonTooLarge(spurious));
    }
    if let Some(missing) = predicted.iter().find(|q| !found.points.iter().any(|p| near(p, &q.coords))) {
        return Err(Error::Precondition(format!("predicted critical point {:?} not found", missing.coords)));
    }
    let critical = found.points.iter().map(|p| classify(&function, &manifold, p)).collect::<Result<Vec<_>>>()?;
    Ok(Perturbation { function, manifold, action, predicted, critical })
}

/// An equivariant Morse chart at a critical point: orthonormal tangent
/// vectors spanning the unstable prime directions, each an eigenvector of
/// the Hessian, and a function `h` in the corresponding coordinates.
#[derive(Clone, Debug)]
pub struct MorseChart {
    pub point: Vec<f64>,
    pub u_basis: Vec<Vec<f64>>,
    pub h: FPoly,
}

/// One copy of the construction, at an orbit point.
#[derive(Clone, Debug)]
struct Site {
    center: DVector<f64>,
    rows: DMatrix<f64>,
    scale: f64,
    /// Projector onto the complement of the `u` directions.
    side: DMatrix<f64>,
    reach: f64,
}

/// `f + Σ_sites s²·D(R(x − c)/s)·χ(‖P(x − c)‖/τ)`, where `P` projects off
/// the `u` directions and the collar `χ` is 1 on `[0, 1]` and 0 past 2.
#[derive(Clone)]
pub struct SurgeredFunction {
    base: Arc<dyn EqFunction>,
    sites: Vec<Site>,
    bubble: Option<Bubble>,
}

impl std::fmt::Debug for SurgeredFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurgeredFunction").field("sites", &self.sites).finish()
    }
}

impl SurgeredFunction {
    pub fn base(&self) -> &Arc<dyn EqFunction> {
        &self.base
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    fn local(&self, site: &Site, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let d = DVector::from_column_slice(x) - &site.center;
        (&site.rows * &d / site.scale, &site.side * d / site.reach)
    }
}

/// `χ(t)` and `χ'(t)`.
fn collar(t: &Transition, q: f64) -> (f64, f64) {
    if q <= 1.0 {
        (1.0, 0.0)
    } else if q >= 2.0 {
        (0.0, 0.0)
    } else {
        ((1.0 - t.phi(2.0 * q - 3.0)) / 2.0, -t.dphi(2.0 * q - 3.0))
    }
}

impl EqFunction for SurgeredFunction {
    fn nvars(&self) -> usize {
        self.base.nvars()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let Some(b) = &self.bubble else { return self.base.value(x) };
        let t = b.cutoffs().transition();
        self.sites.iter().fold(self.base.value(x), |acc, s| {
            let (u, q) = self.local(s, x);
            let (chi, _) = collar(t, q.norm());
            if chi == 0.0 {
                return acc;
            }
            acc + s.scale * s.scale * chi * b.value(u.as_slice())
        })
    }

    fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let Some(b) = &self.bubble else { return self.base.gradient(x) };
        let t = b.cutoffs().transition();
        self.sites.iter().fold(self.base.gradient(x), |acc, s| {
            let (u, q) = self.local(s, x);
            let qn = q.norm();
            let (chi, dchi) = collar(t, qn);
            if chi == 0.0 {
                return acc;
            }
            let mut g = acc + s.rows.transpose() * b.gradient(u.as_slice()) * (s.scale * chi);
            if dchi != 0.0 {
                let coef = s.scale * s.scale * b.value(u.as_slice()) * dchi / (s.reach * qn);
                g += s.side.transpose() * q * coef;
            }
            g
        })
    }
}

/// The surgered function with its predicted critical points and the
/// `C⁰` distance bound `s²·sup|D|`.
#[derive(Clone, Debug)]
pub struct Localized {
    pub function: SurgeredFunction,
    pub predicted: Vec<Vec<f64>>,
    pub c0_bound: f64,
    pub scale: f64,
}

/// Splices the construction into `f` on the orbit of `p`. Along the chart
/// directions the change is confined to ambient radius `radius`; across
/// them it is cut off by a collar whose width scales with `radius`.
pub fn localize_surgery(
    f: Arc<dyn EqFunction>,
    m: &ImplicitGManifold,
    p: &CriticalPoint,
    chart: Option<&MorseChart>,
    radius: f64,
    cut: &CutoffPair,
) -> Result<Localized> {
    if p.stable {
        log::warn!("critical point {:?} is already stable; surgery skipped", p.coords);
        return Ok(Localized {
            function: SurgeredFunction { base: f, sites: Vec::new(), bubble: None },
            predicted: Vec::new(),
            c0_bound: 0.0,
            scale: 0.0,
        });
    }
    let chart = chart.ok_or_else(|| Error::ChartMissing(p.coords.clone()))?;
    let n = m.ambient_dim();
    if chart.point.len() != n || dist(&chart.point, &p.coords) > DEDUP_TOL {
        return Err(Error::InvalidChart(format!("chart is not centred at {:?}", p.coords)));
    }
    let dim_u = chart.u_basis.len();
    if chart.h.nvars() != dim_u || chart.u_basis.iter().any(|b| b.len() != n) {
        return Err(Error::InvalidChart("basis and h dimensions disagree".into()));
    }
    let b = DMatrix::from_fn(n, dim_u, |i, j| chart.u_basis[j][i]);
    if (b.transpose() * &b - DMatrix::identity(dim_u, dim_u)).amax() > CHART_TOL {
        return Err(Error::InvalidChart("u basis is not orthonormal".into()));
    }
    let tangent_hessian = &p.tangent * &p.hessian * p.tangent.transpose();
    let fixed = &p.fixed_subspace * p.fixed_subspace.transpose();
    let mut scales = Vec::with_capacity(dim_u);
    for j in 0..dim_u {
        let col = b.column(j).into_owned();
        let mu = col.dot(&(&tangent_hessian * &col));
        let normal = &col - &p.tangent * (p.tangent.transpose() * &col);
        if normal.norm() > CHART_TOL || (&fixed * &col).norm() > CHART_TOL {
            return Err(Error::InvalidChart(format!("u direction {j} is not a prime tangent vector")));
        }
        if (&tangent_hessian * &col - &col * mu).norm() > CHART_TOL * (1.0 + mu.abs()) || mu >= 0.0 {
            return Err(Error::InvalidChart(format!("u direction {j} is not a negative eigenvector")));
        }
        scales.push((-mu / 2.0).sqrt());
    }
    let prime_h = p.prime_subspace.transpose() * &tangent_hessian * &p.prime_subspace;
    let unstable = sorted_eigen(&prime_h).0.iter().filter(|&&e| e < 0.0).count();
    if unstable != dim_u {
        return Err(Error::InvalidChart(format!("{unstable} unstable prime directions, chart lists {dim_u}")));
    }
    let c = DMatrix::from_diagonal(&DVector::from_vec(scales.clone()));
    let c_inv = DMatrix::from_diagonal(&DVector::from_iterator(dim_u, scales.iter().map(|s| 1.0 / s)));
    let u_action: Vec<DMatrix<f64>> =
        p.stabilizer.elements().iter().map(|&s| &c * b.transpose() * m.matrix(s) * &b * &c_inv).collect();
    for a in &u_action {
        if (a.transpose() * a - DMatrix::identity(dim_u, dim_u)).amax() > CHART_TOL {
            return Err(Error::InvalidChart("stabilizer does not act orthogonally in chart coordinates".into()));
        }
    }
    let defect = SphereFunction::new(chart.h.clone()).defect(&u_action);
    if defect > H_EQUIVARIANCE_TOL {
        return Err(Error::HNotEquivariant(defect));
    }
    let bubble = Bubble::new(cut.clone(), chart.h.clone());
    let min_scale = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let s = radius * min_scale / 3.0;
    let rows = &c * b.transpose();
    let side = DMatrix::identity(n, n) - &b * b.transpose();
    let reach = s * collar_width(p, &b, bubble.sup(), cut.transition());
    let u_group = restricted_action(m.group(), &p.stabilizer, &u_action)?;
    let sphere_points = if dim_u > 0 { sphere_critical_points(&chart.h, &u_group)? } else { Vec::new() };
    let mut sites = Vec::new();
    let mut predicted = Vec::new();
    for sigma in m.group().left_cosets(&p.stabilizer) {
        let a = m.matrix(sigma);
        let center = a * DVector::from_column_slice(&p.coords);
        predicted.push(center.as_slice().to_vec());
        for u in &sphere_points {
            let x = &center + a * (&b * &c_inv * DVector::from_column_slice(&u.coords)) * (cut.t0() * s);
            let x = m.project(x.as_slice()).unwrap_or(x);
            predicted.push(x.as_slice().to_vec());
        }
        sites.push(Site { center, rows: &rows * a.transpose(), scale: s, side: &side * a.transpose(), reach });
    }
    let c0_bound = s * s * bubble.sup();
    Ok(Localized { function: SurgeredFunction { base: f, sites, bubble: Some(bubble) }, predicted, c0_bound, scale: s })
}

/// `τ/s` large enough that on the collar the gradient of `f` across the `u`
/// directions beats the one introduced by `χ`.
fn collar_width(p: &CriticalPoint, b: &DMatrix<f64>, sup_d: f64, t: &Transition) -> f64 {
    let across = (0..p.eigenvalues.len())
        .filter(|&i| (b.transpose() * p.eigenvectors.column(i)).norm() < 0.5)
        .map(|i| p.eigenvalues[i].abs())
        .fold(f64::INFINITY, f64::min);
    if across.is_finite() {
        (2.0 * (sup_d * t.dphi(0.0) / across).sqrt()).max(1.0)
    } else {
        1.0
    }
}

/// The stabilizer acting on `U` as a [`LinearAction`] of its own group.
fn restricted_action(g: &FiniteGroup, h: &crate::groups::Subgroup, mats: &[DMatrix<f64>]) -> Result<LinearAction> {
    let sub = g.restrict_to(h);
    let n = mats.first().map_or(0, |a| a.nrows());
    let rows = mats.iter().map(|a| (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect()).collect();
    LinearAction::float(&sub, rows)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
