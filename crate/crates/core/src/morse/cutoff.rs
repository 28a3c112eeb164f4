use std::sync::{Arc, OnceLock};

use crate::{Error, Result};

const KNOTS: usize = 512;
const GAUSS_NODES: usize = 16;
const BISECTION_TOL: f64 = 1e-12;
const MARGIN_SAMPLES: usize = 4000;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The standard bump `exp(−1/(1−t²))` on `(−1, 1)`, zero elsewhere.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_derivative(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        bump(t) * (-2.0 * t / (s * s))
    }
}

/// `φ(t) = 2B(t)/B(1) − 1` with `B(t) = ∫_{−1}^t bump`: odd, nondecreasing,
/// `±1` outside `(−1, 1)`.
#[derive(Debug)]
pub struct Transition {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl Transition {
    fn build() -> Self {
        let (nodes, weights) = gauss_legendre(GAUSS_NODES);
        let knots: Vec<f64> = (0..=KNOTS).map(|i| -1.0 + 2.0 * i as f64 / KNOTS as f64).collect();
        let mut t = Self { knots, cumulative: vec![0.0; KNOTS + 1], nodes, weights, total: 0.0 };
        for i in 0..KNOTS {
            t.cumulative[i + 1] = t.cumulative[i] + t.integrate(t.knots[i], t.knots[i + 1]);
        }
        t.total = t.cumulative[KNOTS];
        t
    }

    /// The shared instance.
    pub fn get() -> Arc<Transition> {
        static CELL: OnceLock<Arc<Transition>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(Self::build())).clone()
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        half * self.nodes.iter().zip(&self.weights).map(|(x, w)| w * bump(mid + half * x)).sum::<f64>()
    }

    fn primitive(&self, t: f64) -> f64 {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return self.total;
        }
        let i = (((t + 1.0) / 2.0 * KNOTS as f64) as usize).min(KNOTS - 1);
        self.cumulative[i] + self.integrate(self.knots[i], t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        if t >= 1.0 {
            1.0
        } else if t <= -1.0 {
            -1.0
        } else if t > 0.0 {
            1.0 - 2.0 * self.primitive(-t) / self.total
        } else {
            2.0 * self.primitive(t) / self.total - 1.0
        }
    }

    pub fn dphi(&self, t: f64) -> f64 {
        2.0 * bump(t) / self.total
    }

    pub fn ddphi(&self, t: f64) -> f64 {
        2.0 * bump_derivative(t) / self.total
    }

    /// Smooth step `[0, 1] → [0, 1]`, `S(x) = (φ(2x − 1) + 1)/2`.
    fn step(&self, x: f64) -> f64 {
        (self.phi(2.0 * x - 1.0) + 1.0) / 2.0
    }

    fn dstep(&self, x: f64) -> f64 {
        self.dphi(2.0 * x - 1.0)
    }
}

/// `r(t) = d/dt (−t²φ(t−2)) = −2tφ(t−2) − t²φ'(t−2)`.
pub fn radial_slope(phi: &Transition, t: f64) -> f64 {
    -2.0 * t * phi.phi(t - 2.0) - t * t * phi.dphi(t - 2.0)
}

/// `r'(t) = −2φ(t−2) − 4tφ'(t−2) − t²φ''(t−2)`.
pub fn radial_curvature(phi: &Transition, t: f64) -> f64 {
    -2.0 * phi.phi(t - 2.0) - 4.0 * t * phi.dphi(t - 2.0) - t * t * phi.ddphi(t - 2.0)
}

/// The transition `φ`, the plateau `ψ`, the critical radius `t₀` and the
/// perturbation amplitude `ε` (for a sphere function bounded by 1).
#[derive(Clone, Debug)]
pub struct CutoffPair {
    phi: Arc<Transition>,
    t0: f64,
    delta: f64,
    epsilon: f64,
}

impl CutoffPair {
    pub fn transition(&self) -> &Transition {
        &self.phi
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi.phi(t)
    }

    pub fn dphi(&self, t: f64) -> f64 {
        self.phi.dphi(t)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The two intervals on which `ψ` is not locally constant.
    pub fn ramps(&self) -> [(f64, f64); 2] {
        [(1.0 + self.delta, self.t0 - self.delta), (self.t0 + self.delta, 3.0 - self.delta)]
    }

    pub fn psi(&self, t: f64) -> f64 {
        let [(a, b), (c, d)] = self.ramps();
        if t <= a || t >= d {
            0.0
        } else if t < b {
            self.phi.step((t - a) / (b - a))
        } else if t <= c {
            1.0
        } else {
            self.phi.step((d - t) / (d - c))
        }
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        let [(a, b), (c, d)] = self.ramps();
        if t <= a || t >= d || (b..=c).contains(&t) {
            0.0
        } else if t < b {
            self.phi.dstep((t - a) / (b - a)) / (b - a)
        } else {
            -self.phi.dstep((d - t) / (d - c)) / (d - c)
        }
    }

    /// `sup |ψ'|`, attained at the ramp midpoints.
    pub fn dpsi_sup(&self) -> f64 {
        let [(a, b), (c, d)] = self.ramps();
        self.phi.dphi(0.0) / (b - a).min(d - c)
    }

    /// `min |r(t)|` over both ramps, sampled.
    pub fn ramp_margin(&self) -> f64 {
        self.ramps()
            .iter()
            .flat_map(|&(a, b)| (0..=MARGIN_SAMPLES).map(move |i| a + (b - a) * i as f64 / MARGIN_SAMPLES as f64))
            .map(|t| radial_slope(&self.phi, t).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// The unique root of `2φ(t−2) + tφ'(t−2)` in `(1, 2)`.
pub fn critical_radius(phi: &Transition) -> f64 {
    let g = |t: f64| 2.0 * phi.phi(t - 2.0) + t * phi.dphi(t - 2.0);
    let (mut lo, mut hi) = (1.0, 2.0);
    while hi - lo > BISECTION_TOL {
        let mid = (lo + hi) / 2.0;
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

/// Cutoffs with plateau half-width `delta`; `ε` is half the largest value
/// allowed by the ramp margin for `sup |h| = 1`.
pub fn build_cutoffs(delta: f64) -> Result<CutoffPair> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::DeltaTooLarge(delta));
    }
    let phi = Transition::get();
    let t0 = critical_radius(&phi);
    if 1.0 + delta >= t0 - delta || t0 + delta >= 3.0 - delta {
        return Err(Error::DeltaTooLarge(delta));
    }
    let mut cut = CutoffPair { phi, t0, delta, epsilon: 0.0 };
    cut.epsilon = 0.5 * cut.ramp_margin() / cut.dpsi_sup();
    Ok(cut)
}

/// [`build_cutoffs`], halving `delta` until the interval conditions hold.
pub fn build_cutoffs_shrinking(delta: f64) -> Result<CutoffPair> {
    let mut d = delta;
    for _ in 0..30 {
        match build_cutoffs(d) {
            Err(Error::DeltaTooLarge(_)) if d > 0.0 => d /= 2.0,
            other => return other,
        }
    }
    Err(Error::DeltaTooLarge(delta))
}
