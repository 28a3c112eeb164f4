use nalgebra::DVector;
use rayon::prelude::*;

use super::critical::CriticalPoint;
use super::manifold::{EqFunction, ImplicitGManifold};
use super::{CAPTURE_TOL, DEDUP_TOL, TOL_CRIT};
use crate::groups::{FiniteGroup, OrbitMorphism};
use crate::{Error, Result};

/// Direction of integration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Along `−∇f`.
    Descending,
    /// Along `+∇f`.
    Ascending,
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub max_steps: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Distance from the start point along the chosen eigenvector.
    pub offset: f64,
    pub keep_path: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { max_steps: 50_000, atol: 1e-11, rtol: 1e-9, offset: 1e-4, keep_path: false }
    }
}

/// An integrated trajectory; `limit` indexes the target list.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub limit: Option<usize>,
    /// The trajectory left every compact set (possible only on a
    /// noncompact `M`).
    pub escaped: bool,
    pub end: Vec<f64>,
    pub steps: usize,
    pub path: Vec<Vec<f64>>,
}

/// Norm past which a trajectory counts as escaped.
pub const ESCAPE_RADIUS: f64 = 1e6;

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn velocity(f: &dyn EqFunction, m: &ImplicitGManifold, x: &DVector<f64>, dir: Direction) -> DVector<f64> {
    let g = m.projected_gradient(f, x.as_slice());
    match dir {
        Direction::Descending => -g,
        Direction::Ascending => g,
    }
}

/// Adaptive Dormand–Prince integration of `∓` the projected gradient,
/// retracted onto `M` after each step, until the trajectory comes within
/// the capture tolerance of a target or the step budget runs out.
pub fn flow_trajectory(
    f: &dyn EqFunction,
    m: &ImplicitGManifold,
    x0: &[f64],
    dir: Direction,
    targets: &[Vec<f64>],
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if m.projected_gradient(f, x0).norm() < TOL_CRIT {
        return Err(Error::Precondition(format!("flow started at a critical point {x0:?}")));
    }
    let mut x = m.project(x0).ok_or_else(|| Error::Precondition("start point does not project to M".into()))?;
    let mut h = 1e-3;
    let mut path = if opts.keep_path { vec![x.as_slice().to_vec()] } else { Vec::new() };
    let captured = |x: &DVector<f64>| {
        targets
            .iter()
            .position(|t| t.iter().zip(x.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < CAPTURE_TOL)
    };
    let mut k: [DVector<f64>; 7] = std::array::from_fn(|_| DVector::zeros(x.len()));
    for step in 0..opts.max_steps {
        if let Some(i) = captured(&x) {
            return Ok(Trajectory { limit: Some(i), escaped: false, end: x.as_slice().to_vec(), steps: step, path });
        }
        k[0] = velocity(f, m, &x, dir);
        if x.norm() > ESCAPE_RADIUS {
            return Ok(Trajectory { limit: None, escaped: true, end: x.as_slice().to_vec(), steps: step, path });
        }
        if k[0].norm() < 1e-14 || !x.iter().all(|t| t.is_finite()) {
            break;
        }
        loop {
            for s in 1..7 {
                let mut y = x.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        y += kj * (h * A[s][j]);
                    }
                }
                k[s] = velocity(f, m, &y, dir);
            }
            let mut high = x.clone();
            let mut err = DVector::zeros(x.len());
            for j in 0..7 {
                high += &k[j] * (h * B5[j]);
                err += &k[j] * (h * (B5[j] - B4[j]));
            }
            let scale = err
                .iter()
                .zip(high.iter())
                .map(|(e, y)| e.abs() / (opts.atol + opts.rtol * y.abs()))
                .fold(0.0, f64::max);
            if scale <= 1.0 {
                x = m.project(high.as_slice()).unwrap_or(high);
                if opts.keep_path {
                    path.push(x.as_slice().to_vec());
                }
                let grow = if scale == 0.0 { 5.0 } else { (0.9 * scale.powf(-0.2)).clamp(0.2, 5.0) };
                h = (h * grow).min(10.0);
                break;
            }
            h *= (0.9 * scale.powf(-0.2)).clamp(0.1, 0.9);
            if h < 1e-14 {
                return Ok(Trajectory { limit: None, escaped: false, end: x.as_slice().to_vec(), steps: step, path });
            }
        }
    }
    let limit = captured(&x);
    Ok(Trajectory { limit, escaped: false, end: x.as_slice().to_vec(), steps: opts.max_steps, path })
}

/// A critical orbit: its representative and the members of the orbit as
/// `(position in the critical list, σ with A_σ·rep = member)`.
#[derive(Clone, Debug)]
pub struct CriticalOrbit {
    pub rep: CriticalPoint,
    pub members: Vec<(usize, usize)>,
}

impl CriticalOrbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.rep.index
    }
}

/// Flow lines from the representative of `source` to points of `target`
/// through one orbit morphism.
#[derive(Clone, Debug)]
pub struct FlowCount {
    pub source: usize,
    pub target: usize,
    pub morphism: OrbitMorphism,
    pub count: usize,
}

impl FlowCount {
    pub fn parity(&self) -> usize {
        self.count % 2
    }
}

#[derive(Clone, Debug)]
pub struct MorseData {
    pub group: FiniteGroup,
    pub dim: usize,
    pub orbits: Vec<CriticalOrbit>,
    pub flows: Vec<FlowCount>,
    pub trajectories: usize,
    /// Trajectories leaving to infinity; they bound nothing.
    pub escaped: usize,
    pub unresolved: usize,
    pub non_consecutive: usize,
}

impl MorseData {
    pub fn orbits_of_index(&self, k: usize) -> impl Iterator<Item = (usize, &CriticalOrbit)> {
        self.orbits.iter().enumerate().filter(move |(_, o)| o.index() == k)
    }
}

/// Groups critical points into orbits; representatives are the first
/// member in the order `(index, value, coordinates)`.
pub fn critical_orbits(m: &ImplicitGManifold, crits: &[CriticalPoint]) -> Result<Vec<CriticalOrbit>> {
    let mut order: Vec<usize> = (0..crits.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&crits[a], &crits[b]);
        p.index.cmp(&q.index).then(p.value.total_cmp(&q.value)).then_with(|| {
            p.coords
                .iter()
                .zip(&q.coords)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut assigned = vec![false; crits.len()];
    let mut orbits = Vec::new();
    for &i in &order {
        if assigned[i] {
            continue;
        }
        let rep = &crits[i];
        let mut members: Vec<(usize, usize)> = Vec::new();
        for s in m.group().elements() {
            let image = m.act(s, &rep.coords);
            let j = crits
                .iter()
                .position(|c| {
                    c.coords.iter().zip(image.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                        < 10.0 * DEDUP_TOL
                })
                .ok_or_else(|| {
                    Error::Precondition(format!("critical set is not closed under the action at {:?}", rep.coords))
                })?;
            if !members.iter().any(|&(k, _)| k == j) {
                members.push((j, s));
            }
            assigned[j] = true;
        }
        orbits.push(CriticalOrbit { rep: rep.clone(), members });
    }
    Ok(orbits)
}

struct Job {
    orbit: usize,
    start: Vec<f64>,
    dir: Direction,
    /// Ascending shots whose mirror image under the stabilizer is the
    /// other shot are counted once.
    counted: bool,
}

/// Flow-line counts between consecutive indices. Index-1 points shoot
/// their two descending trajectories; when `dim M ≥ 2`, index-`(dim − 1)`
/// points shoot their two ascending trajectories to reach the top index.
/// Other index pairs are unsupported.
pub fn morse_differentials(
    f: &dyn EqFunction,
    m: &ImplicitGManifold,
    crits: &[CriticalPoint],
    opts: &FlowOptions,
) -> Result<MorseData> {
    if let Some(p) = crits.iter().find(|c| !c.stable) {
        return Err(Error::Precondition(format!("critical point {:?} is not stable", p.coords)));
    }
    let orbits = critical_orbits(m, crits)?;
    let mut orbit_of = vec![0; crits.len()];
    let mut element_of = vec![0; crits.len()];
    for (o, orbit) in orbits.iter().enumerate() {
        for &(j, s) in &orbit.members {
            orbit_of[j] = o;
            element_of[j] = s;
        }
    }
    let n = m.dim();
    let has_index = |k: usize| orbits.iter().any(|o| o.index() == k);
    let mut jobs = Vec::new();
    for k in 1..=n {
        if !has_index(k) || !has_index(k - 1) {
            continue;
        }
        if k == 1 {
            for (o, orbit) in orbits.iter().enumerate().filter(|(_, o)| o.index() == 1) {
                let e = orbit.rep.negative_directions().column(0).into_owned();
                for sign in [1.0, -1.0] {
                    let start = DVector::from_column_slice(&orbit.rep.coords) + &e * (sign * opts.offset);
                    jobs.push(Job {
                        orbit: o,
                        start: start.as_slice().to_vec(),
                        dir: Direction::Descending,
                        counted: true,
                    });
                }
            }
        } else if k == n {
            for (o, orbit) in orbits.iter().enumerate().filter(|(_, o)| o.index() == n - 1) {
                let e = orbit.rep.positive_directions().column(0).into_owned();
                let mirrored = orbit.rep.stabilizer.elements().iter().any(|&l| (m.matrix(l) * &e + &e).norm() < 1e-6);
                for (i, sign) in [1.0, -1.0].into_iter().enumerate() {
                    let start = DVector::from_column_slice(&orbit.rep.coords) + &e * (sign * opts.offset);
                    jobs.push(Job {
                        orbit: o,
                        start: start.as_slice().to_vec(),
                        dir: Direction::Ascending,
                        counted: i == 0 || !mirrored,
                    });
                }
            }
        } else {
            return Err(Error::UnsupportedFlow(format!(
                "flow lines from index {k} to index {} on a manifold of dimension {n}",
                k - 1
            )));
        }
    }
    let targets: Vec<Vec<f64>> = crits.iter().map(|c| c.coords.clone()).collect();
    let results: Vec<Result<Trajectory>> =
        jobs.par_iter().map(|j| flow_trajectory(f, m, &j.start, j.dir, &targets, opts)).collect();
    let g = m.group().clone();
    let mut counts: Vec<FlowCount> = Vec::new();
    let (mut escaped, mut unresolved, mut non_consecutive) = (0, 0, 0);
    for (job, res) in jobs.iter().zip(results) {
        let t = res?;
        let Some(arrival) = t.limit else {
            if t.escaped {
                escaped += 1;
            } else {
                unresolved += 1;
            }
            continue;
        };
        let (a_orbit, a_elem) = (orbit_of[arrival], element_of[arrival]);
        let (source, target, coset) = match job.dir {
            Direction::Descending => (job.orbit, a_orbit, a_elem),
            Direction::Ascending => (a_orbit, job.orbit, g.inv(a_elem)),
        };
        if orbits[source].index() != orbits[target].index() + 1 {
            non_consecutive += 1;
            log::warn!("trajectory joins indices {} and {}", orbits[source].index(), orbits[target].index());
            continue;
        }
        if !job.counted {
            continue;
        }
        if orbits[source].rep.value <= orbits[target].rep.value {
            return Err(Error::Precondition("flow line does not decrease f".into()));
        }
        let morphism = OrbitMorphism::new(
            &g,
            orbits[source].rep.stabilizer.clone(),
            orbits[target].rep.stabilizer.clone(),
            coset,
        )?;
        match counts.iter_mut().find(|c| c.source == source && c.target == target && c.morphism == morphism) {
            Some(c) => c.count += 1,
            None => counts.push(FlowCount { source, target, morphism, count: 1 }),
        }
    }
    counts.sort_by_key(|c| (c.source, c.target, c.morphism.coset()));
    if unresolved > 0 {
        log::warn!("{unresolved} trajectories did not resolve");
    }
    Ok(MorseData {
        group: g,
        dim: n,
        orbits,
        flows: counts,
        trajectories: jobs.len(),
        escaped,
        unresolved,
        non_consecutive,
    })
}
