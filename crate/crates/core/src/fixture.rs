//! TOML fixtures: a group with either a G-CW complex or an invariant
//! function on an implicit G-manifold.
//!
//! ```toml
//! name = "circle_reflection"
//! group = { kind = "cyclic", order = 2 }
//! coefficients = ["singular", "fixed"]
//!
//! [gcw]
//! cells = [
//!     { dim = 0, label = "N", stabilizer = [1] },
//!     { dim = 1, label = "a", stabilizer = [] },
//! ]
//! records = [[1, 0, 0, 1]]
//! ```
//!
//! Stabilizers list generators; records are `[cell, face, coset, degree]`.
//! Polynomials are lists of `{ e = [exponents], c = 3 }` terms, where `c`
//! may also be a string such as `"-3/2"`.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::coeff::SystemKind;
use crate::gcw::{BoundaryRecord, CellOrbit, GCWComplex};
use crate::groups::FiniteGroup;
use crate::morse::{
    classify_all, find_critical_points, localize_surgery, CriticalPoint, CutoffPair, EqFunction, ImplicitGManifold,
    MorseChart, PolyFunction, SeedGrid, DEDUP_TOL,
};
use crate::polyalg::{LinearAction, QPoly};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixture {
    name: String,
    group: GroupSpec,
    gcw: Option<GcwSpec>,
    manifold: Option<ManifoldSpec>,
    #[serde(default)]
    coefficients: Vec<String>,
    #[serde(default)]
    format: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GroupSpec {
    Trivial,
    Cyclic { order: usize },
    Symmetric { letters: usize },
}

impl GroupSpec {
    pub fn build(&self) -> FiniteGroup {
        match self {
            GroupSpec::Trivial => FiniteGroup::trivial(),
            GroupSpec::Cyclic { order } => FiniteGroup::cyclic(*order),
            GroupSpec::Symmetric { letters } => FiniteGroup::symmetric(*letters).0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GcwSpec {
    cells: Vec<CellSpec>,
    #[serde(default)]
    records: Vec<(usize, usize, usize, i64)>,
    #[serde(default)]
    subcomplex: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    dim: usize,
    label: String,
    stabilizer: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Term {
    e: Vec<u32>,
    c: Number,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ActionSpec {
    Trivial,
    Rotation,
    SignedPermutation { perms: Vec<Vec<usize>>, signs: Vec<Vec<i64>> },
    Matrices { matrices: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartSpec {
    point: Vec<f64>,
    u_basis: Vec<Vec<f64>>,
    h: Vec<Term>,
    #[serde(default)]
    radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldSpec {
    nvars: usize,
    action: ActionSpec,
    #[serde(default)]
    constraints: Vec<Vec<Term>>,
    function: Vec<Term>,
    seed_radius: f64,
    #[serde(default)]
    charts: Vec<ChartSpec>,
}

/// A chart together with the ambient radius of the surgery it drives.
#[derive(Clone, Debug)]
pub struct SurgerySite {
    pub chart: MorseChart,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct ManifoldFixture {
    pub manifold: ImplicitGManifold,
    pub function: PolyFunction,
    pub action: LinearAction,
    pub seed_radius: f64,
    pub charts: Vec<SurgerySite>,
}

#[derive(Clone, Debug)]
pub enum FixtureBody {
    Gcw(GCWComplex),
    Manifold(Box<ManifoldFixture>),
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub group: FiniteGroup,
    pub body: FixtureBody,
    pub coefficients: Vec<SystemKind>,
    pub format: Option<String>,
}

/// Default surgery radius when a chart gives none.
pub const DEFAULT_RADIUS: f64 = 0.3;
/// Default seeds per axis of the critical-point search grid.
pub const DEFAULT_SEEDS: usize = 9;

/// The function after surgery on every charted unstable orbit.
#[derive(Clone)]
pub struct Stabilized {
    pub function: Arc<dyn EqFunction>,
    pub predicted: Vec<Vec<f64>>,
    pub surgeries: usize,
    pub c0_bound: f64,
}

impl ManifoldFixture {
    pub fn seed_grid(&self, per_axis: usize) -> SeedGrid {
        SeedGrid::cube(self.manifold.ambient_dim(), self.seed_radius, per_axis)
    }

    /// Critical points of `f` from the seed grid plus `extra` seeds,
    /// classified.
    pub fn critical_points(
        &self,
        f: &dyn EqFunction,
        per_axis: usize,
        extra: &[Vec<f64>],
    ) -> Result<Vec<CriticalPoint>> {
        let seeds = self.seed_grid(per_axis).with_extra(extra.iter().cloned());
        classify_all(f, &self.manifold, &find_critical_points(f, &self.manifold, &seeds).points)
    }

    /// Applies the construction at each chart, in order. Every unstable
    /// critical point must lie on the orbit of some chart.
    pub fn stabilize(&self, crits: &[CriticalPoint], cut: &CutoffPair) -> Result<Stabilized> {
        let near =
            |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() < 10.0 * DEDUP_TOL;
        let covered = |x: &[f64]| {
            self.charts.iter().any(|site| {
                (0..self.manifold.group().order()).any(|g| near(self.manifold.act(g, &site.chart.point).as_slice(), x))
            })
        };
        if let Some(c) = crits.iter().find(|c| !c.stable && !covered(&c.coords)) {
            return Err(Error::ChartMissing(c.coords.clone()));
        }
        let mut function: Arc<dyn EqFunction> = Arc::new(self.function.clone());
        let mut predicted = Vec::new();
        let mut surgeries = 0;
        let mut c0_bound: f64 = 0.0;
        for site in &self.charts {
            let p = crits.iter().find(|c| near(&c.coords, &site.chart.point)).ok_or_else(|| {
                Error::InvalidChart(format!("chart point {:?} is not a critical point", site.chart.point))
            })?;
            let loc = localize_surgery(function.clone(), &self.manifold, p, Some(&site.chart), site.radius, cut)?;
            if loc.function.num_sites() > 0 {
                surgeries += 1;
            }
            c0_bound = c0_bound.max(loc.c0_bound);
            predicted.extend(loc.predicted);
            function = Arc::new(loc.function);
        }
        Ok(Stabilized { function, predicted, surgeries, c0_bound })
    }
}

/// One of the five named coefficient systems.
pub fn parse_kind(name: &str) -> Result<SystemKind> {
    Ok(match name {
        "constant" => SystemKind::Constant,
        "singular" => SystemKind::Singular,
        "fixed" => SystemKind::FixedPoint,
        "quotient" => SystemKind::Quotient,
        "quotient-rel-fixed" => SystemKind::QuotientRelFixed,
        other => return Err(Error::Fixture(format!("unknown coefficient system {other:?}"))),
    })
}

fn parse_number(n: &Number) -> Result<(i64, i64)> {
    match n {
        Number::Int(k) => Ok((*k, 1)),
        Number::Text(s) => {
            let bad = || Error::Fixture(format!("bad coefficient {s:?}"));
            let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            Ok((num.trim().parse().map_err(|_| bad())?, den.trim().parse().map_err(|_| bad())?))
        }
    }
}

fn parse_poly(nvars: usize, terms: &[Term]) -> Result<QPoly> {
    let records =
        terms.iter().map(|t| parse_number(&t.c).map(|(n, d)| (t.e.clone(), n, d))).collect::<Result<Vec<_>>>()?;
    QPoly::from_records(nvars, &records)
}

fn build_gcw(group: &FiniteGroup, spec: &GcwSpec) -> Result<GCWComplex> {
    let cells = spec
        .cells
        .iter()
        .map(|c| {
            if let Some(&x) = c.stabilizer.iter().find(|&&x| x >= group.order()) {
                return Err(Error::Fixture(format!("cell {}: element {x} is not in the group", c.label)));
            }
            Ok(CellOrbit { dim: c.dim, label: c.label.clone(), stabilizer: group.generated_by(&c.stabilizer) })
        })
        .collect::<Result<Vec<_>>>()?;
    let records =
        spec.records.iter().map(|&(cell, face, coset, degree)| BoundaryRecord { cell, face, coset, degree }).collect();
    let x = GCWComplex::new(group.clone(), cells, records)?;
    if spec.subcomplex.is_empty() {
        Ok(x)
    } else {
        x.with_subcomplex(&spec.subcomplex)
    }
}

fn build_action(group: &FiniteGroup, spec: &GroupSpec, nvars: usize, action: &ActionSpec) -> Result<LinearAction> {
    let act = match action {
        ActionSpec::Trivial => {
            let perms = vec![(0..nvars).collect::<Vec<_>>(); group.order()];
            let signs = vec![vec![1; nvars]; group.order()];
            LinearAction::signed_permutations(group, &perms, &signs)?
        }
        ActionSpec::Rotation => match spec {
            GroupSpec::Cyclic { order } if nvars == 2 => LinearAction::rotation(*order)?,
            _ => return Err(Error::Fixture("rotation needs a cyclic group on two variables".into())),
        },
        ActionSpec::SignedPermutation { perms, signs } => LinearAction::signed_permutations(group, perms, signs)?,
        ActionSpec::Matrices { matrices } => LinearAction::float(group, matrices.clone())?,
    };
    if act.dim() != nvars {
        return Err(Error::Fixture(format!("action has dimension {}, expected {nvars}", act.dim())));
    }
    Ok(act)
}

fn build_manifold(group: &FiniteGroup, spec: &GroupSpec, m: &ManifoldSpec) -> Result<ManifoldFixture> {
    let action = build_action(group, spec, m.nvars, &m.action)?;
    let constraints = m.constraints.iter().map(|c| parse_poly(m.nvars, c)).collect::<Result<Vec<_>>>()?;
    let manifold = if constraints.is_empty() {
        ImplicitGManifold::euclidean(&action)
    } else {
        ImplicitGManifold::new(&constraints, &action)?
    };
    let function = PolyFunction::new(&parse_poly(m.nvars, &m.function)?, &action)?;
    let charts = m
        .charts
        .iter()
        .map(|c| {
            let h = parse_poly(c.u_basis.len(), &c.h)?.to_f64();
            let chart = MorseChart { point: c.point.clone(), u_basis: c.u_basis.clone(), h };
            Ok(SurgerySite { chart, radius: c.radius.unwrap_or(DEFAULT_RADIUS) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ManifoldFixture { manifold, function, action, seed_radius: m.seed_radius, charts })
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFixture = toml::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        let group = raw.group.build();
        let body = match (&raw.gcw, &raw.manifold) {
            (Some(g), None) => FixtureBody::Gcw(build_gcw(&group, g)?),
            (None, Some(m)) => FixtureBody::Manifold(Box::new(build_manifold(&group, &raw.group, m)?)),
            _ => return Err(Error::Fixture("exactly one of [gcw] and [manifold] must be present".into())),
        };
        let coefficients = raw.coefficients.iter().map(|c| parse_kind(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self { name: raw.name, group, body, coefficients, format: raw.format })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Fixture(msg) => Error::Fixture(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn gcw(&self) -> Option<&GCWComplex> {
        match &self.body {
            FixtureBody::Gcw(x) => Some(x),
            FixtureBody::Manifold(_) => None,
        }
    }

    pub fn manifold(&self) -> Option<&ManifoldFixture> {
        match &self.body {
            FixtureBody::Gcw(_) => None,
            FixtureBody::Manifold(m) => Some(m),
        }
    }
}
