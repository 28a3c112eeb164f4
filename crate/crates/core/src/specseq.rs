//! The spectral sequence of a finitely filtered chain complex.
//!
//! Pages are computed over a field (𝔽_p, or ℚ for integral complexes) from
//! `Z^r_p = {x ∈ F_p : ∂x ∈ F_{p-r}}` and
//! `E^r_p = Z^r_p / (Z^{r-1}_{p-1} + ∂Z^{r-1}_{p+r-1})`; `d_r` is induced by
//! `∂` and has bidegree `(-r, r-1)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::complexes::{homology, ChainComplex, Ring};
use crate::error::{Error, Result};
use crate::linalg::{
    apply, field_matrix, nullspace, rank, solve_in_span, span_basis, FMat, Field, PrimeField, Rationals,
};

#[derive(Clone, Debug)]
pub struct FilteredComplex {
    base: ChainComplex,
    /// `filt[n - min_degree][i]` is the filtration degree of generator `i`.
    filt: Vec<Vec<usize>>,
}

impl FilteredComplex {
    pub fn new(base: ChainComplex, filt: Vec<Vec<usize>>) -> Result<Self> {
        let degrees: Vec<i64> = base.degrees().collect();
        if filt.len() != degrees.len() {
            return Err(Error::Shape(format!(
                "filtration lists {} degrees, complex has {}",
                filt.len(),
                degrees.len()
            )));
        }
        for (i, &n) in degrees.iter().enumerate() {
            if filt[i].len() != base.rank(n) {
                return Err(Error::Shape(format!("filtration of degree {n} has wrong length")));
            }
        }
        let fc = Self { base, filt };
        for &n in &degrees {
            let d = fc.base.boundary(n);
            for j in 0..d.cols() {
                let pj = fc.filtration(n, j);
                if (0..d.rows()).any(|i| !is_zero_in(fc.base.ring(), d.get(i, j)) && fc.filtration(n - 1, i) > pj) {
                    return Err(Error::FiltrationViolation { degree: n, generator: j });
                }
            }
        }
        Ok(fc)
    }

    pub fn base(&self) -> &ChainComplex {
        &self.base
    }

    pub fn filtration(&self, n: i64, generator: usize) -> usize {
        self.filt[(n - self.base.min_degree()) as usize][generator]
    }

    /// Largest filtration degree in use.
    pub fn length(&self) -> usize {
        self.filt.iter().flatten().copied().max().unwrap_or(0)
    }
}

fn is_zero_in(ring: Ring, x: &num_bigint::BigInt) -> bool {
    use num_traits::Zero;
    match ring {
        Ring::Integers => x.is_zero(),
        Ring::Prime(p) => (x % num_bigint::BigInt::from(p)).is_zero(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Differential {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Entries over 𝔽_p; absent for rational pages.
    pub entries: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug)]
pub struct SSPage {
    pub r: usize,
    /// `(p, q) ↦ dim E^r_{p,q}`, zero entries omitted.
    pub groups: BTreeMap<(i64, i64), usize>,
    /// `d_r` out of `(p, q)`, present when source and target are nonzero.
    pub differentials: BTreeMap<(i64, i64), Differential>,
    /// `d_r ∘ d_r = 0` was verified on this page.
    pub square_zero: bool,
}

impl SSPage {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.groups.get(&(p, q)).copied().unwrap_or(0)
    }

    /// `Σ_p dim E_{p, n-p}`.
    pub fn total(&self, n: i64) -> usize {
        self.groups.iter().filter(|(&(p, q), _)| p + q == n).map(|(_, &d)| d).sum()
    }

    fn rank_out(&self, p: i64, q: i64) -> usize {
        self.differentials.get(&(p, q)).map_or(0, |d| d.rank)
    }

    /// Dimensions of the homology of `(E^r, d_r)`.
    pub fn homology_dims(&self) -> BTreeMap<(i64, i64), usize> {
        let r = self.r as i64;
        self.groups
            .iter()
            .map(|(&(p, q), &d)| {
                let incoming = self.rank_out(p + r, q - r + 1);
                ((p, q), d - self.rank_out(p, q) - incoming)
            })
            .filter(|&(_, d)| d > 0)
            .collect()
    }
}

/// Pages `E^1 … E^{r_max}`.
pub fn spectral_pages(fc: &FilteredComplex, r_max: usize) -> Vec<SSPage> {
    match fc.base.ring() {
        Ring::Prime(p) => Pages::new(PrimeField(p), fc).run(r_max, |m| Some(m.clone())),
        Ring::Integers => Pages::new(Rationals, fc).run(r_max, |_| None),
    }
}

/// Pages up to the first index at which the sequence has certainly
/// degenerated.
pub fn spectral_sequence(fc: &FilteredComplex) -> Vec<SSPage> {
    spectral_pages(fc, fc.length() + 1)
}

struct Pages<'a, F: Field> {
    field: F,
    fc: &'a FilteredComplex,
    /// `∂_n` as a field matrix, keyed by `n`.
    d: BTreeMap<i64, FMat<F>>,
}

impl<'a, F: Field> Pages<'a, F> {
    fn new(field: F, fc: &'a FilteredComplex) -> Self {
        let base = &fc.base;
        let d =
            (base.min_degree()..=base.max_degree() + 1).map(|n| (n, field_matrix(&field, &base.boundary(n)))).collect();
        Self { field, fc, d }
    }

    fn rank_c(&self, n: i64) -> usize {
        self.fc.base.rank(n)
    }

    fn filt(&self, n: i64, i: usize) -> i64 {
        self.fc.filtration(n, i) as i64
    }

    /// Basis of `Z^r_p` in degree `n`, as full-length vectors.
    fn z(&self, r: i64, p: i64, n: i64) -> Vec<Vec<F::Elem>> {
        let f = &self.field;
        let len = self.rank_c(n);
        let cols: Vec<usize> = (0..len).filter(|&j| self.filt(n, j) <= p).collect();
        if cols.is_empty() {
            return Vec::new();
        }
        let rows: Vec<usize> = (0..self.rank_c(n - 1)).filter(|&i| self.filt(n - 1, i) > p - r).collect();
        let d = &self.d[&n];
        let sub: FMat<F> = rows.iter().map(|&i| cols.iter().map(|&j| d[i][j].clone()).collect()).collect();
        nullspace(f, &sub, cols.len())
            .into_iter()
            .map(|v| {
                let mut full = vec![f.zero(); len];
                for (k, &j) in cols.iter().enumerate() {
                    full[j] = v[k].clone();
                }
                full
            })
            .collect()
    }

    /// `Z^{r-1}_{p-1} + ∂Z^{r-1}_{p+r-1}` in degree `n`.
    fn denominator(&self, r: i64, p: i64, n: i64) -> Vec<Vec<F::Elem>> {
        let mut gens = self.z(r - 1, p - 1, n);
        if self.rank_c(n + 1) > 0 {
            let d = &self.d[&(n + 1)];
            gens.extend(self.z(r - 1, p + r - 1, n + 1).iter().map(|y| apply(&self.field, d, y)));
        }
        span_basis(&self.field, &gens)
    }

    /// Representatives of a basis of `E^r_p` in degree `n`, followed by a
    /// basis of the denominator.
    fn quotient(&self, r: i64, p: i64, n: i64) -> (Vec<Vec<F::Elem>>, Vec<Vec<F::Elem>>) {
        let f = &self.field;
        let den = self.denominator(r, p, n);
        let mut span = den.clone();
        let mut reps = Vec::new();
        for z in self.z(r, p, n) {
            let mut trial = span.clone();
            trial.push(z.clone());
            if rank(f, &trial) > span.len() {
                span.push(z.clone());
                reps.push(z);
            }
        }
        (reps, den)
    }

    /// Matrix of `d_r` from `E^r_p(n)` to `E^r_{p-r}(n-1)`.
    fn differential(&self, r: i64, p: i64, n: i64, src: &[Vec<F::Elem>]) -> FMat<F> {
        let f = &self.field;
        let (tgt_reps, tgt_den) = self.quotient(r, p - r, n - 1);
        let mut basis = tgt_reps.clone();
        basis.extend(tgt_den);
        let d = &self.d[&n];
        let mut m: FMat<F> = vec![vec![f.zero(); src.len()]; tgt_reps.len()];
        for (j, x) in src.iter().enumerate() {
            let y = apply(f, d, x);
            let c = solve_in_span(f, &basis, &y).expect("boundary of a Z^r cycle lies in Z^r");
            for i in 0..tgt_reps.len() {
                m[i][j] = c[i].clone();
            }
        }
        m
    }

    fn run(&self, r_max: usize, encode: impl Fn(&FMat<F>) -> Option<Vec<Vec<u64>>>) -> Vec<SSPage> {
        let f = &self.field;
        let base = &self.fc.base;
        let p_max = self.fc.length() as i64;
        let mut pages = Vec::new();
        for r in 1..=r_max as i64 {
            let mut groups = BTreeMap::new();
            let mut reps: BTreeMap<(i64, i64), Vec<Vec<F::Elem>>> = BTreeMap::new();
            for n in base.degrees() {
                for p in 0..=p_max {
                    let (rp, _) = self.quotient(r, p, n);
                    if !rp.is_empty() {
                        groups.insert((p, n - p), rp.len());
                        reps.insert((p, n - p), rp);
                    }
                }
            }
            let mut mats: BTreeMap<(i64, i64), FMat<F>> = BTreeMap::new();
            for (&(p, q), src) in &reps {
                if groups.contains_key(&(p - r, q + r - 1)) {
                    mats.insert((p, q), self.differential(r, p, p + q, src));
                }
            }
            let mut square_zero = true;
            for (&(p, q), m) in &mats {
                if let Some(next) = mats.get(&(p - r, q + r - 1)) {
                    let comp = mat_mul(f, next, m);
                    if comp.iter().flatten().any(|x| !f.is_zero(x)) {
                        square_zero = false;
                    }
                }
            }
            let differentials = mats
                .iter()
                .map(|(&k, m)| {
                    let entries = encode(m);
                    (k, Differential { rows: m.len(), cols: m.first().map_or(0, Vec::len), rank: rank(f, m), entries })
                })
                .collect();
            pages.push(SSPage { r: r as usize, groups, differentials, square_zero });
        }
        pages
    }
}

fn mat_mul<F: Field>(f: &F, a: &FMat<F>, b: &FMat<F>) -> FMat<F> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols).map(|j| (0..inner).fold(f.zero(), |acc, k| f.add(&acc, &f.mul(&row[k], &b[k][j])))).collect()
        })
        .collect()
}

/// Consistency of a computed sequence: `d² = 0` on every page,
/// `E^{r+1} = H(E^r, d_r)` and dimensions non-increasing in `r`.
pub fn pages_consistent(pages: &[SSPage]) -> bool {
    pages.iter().all(|pg| pg.square_zero)
        && pages.windows(2).all(|w| {
            let h = w[0].homology_dims();
            h == w[1].groups && w[1].groups.iter().all(|(&(p, q), &d)| d <= w[0].dim(p, q))
        })
}

#[derive(Clone, Debug)]
pub struct EinftyReport {
    pub passes: bool,
    /// `(n, Σ_p dim E^∞_{p,n-p}, dim H_n)`
    pub rows: Vec<(i64, usize, usize)>,
}

/// Compares the stable page with the homology of the total complex.
pub fn einfty_check(fc: &FilteredComplex) -> EinftyReport {
    let pages = spectral_sequence(fc);
    let last = pages.last().expect("at least one page");
    let h = homology(&fc.base);
    let rows: Vec<(i64, usize, usize)> = fc.base.degrees().map(|n| (n, last.total(n), h.degree(n).rank)).collect();
    let passes = rows.iter().all(|&(_, a, b)| a == b) && pages_consistent(&pages);
    EinftyReport { passes, rows }
}

/// `r,p,q,dim` lines for every nonzero entry of every page.
pub fn pages_csv(pages: &[SSPage]) -> String {
    let mut out = String::from("r,p,q,dim\n");
    for pg in pages {
        for (&(p, q), &d) in &pg.groups {
            let _ = writeln!(out, "{},{p},{q},{d}", pg.r);
        }
    }
    out
}

/// Text grid of one page: rows `q` descending, columns `p`.
pub fn page_grid(page: &SSPage) -> String {
    let (mut pmax, mut qmin, mut qmax) = (0i64, 0i64, 0i64);
    for &(p, q) in page.groups.keys() {
        pmax = pmax.max(p);
        qmin = qmin.min(q);
        qmax = qmax.max(q);
    }
    let mut out = format!("E^{}\n", page.r);
    for q in (qmin..=qmax).rev() {
        let _ = write!(out, "q={q:>3} |");
        for p in 0..=pmax {
            let _ = write!(out, " {:>3}", page.dim(p, q));
        }
        out.push('\n');
    }
    let _ = write!(out, "      +");
    for p in 0..=pmax {
        let _ = write!(out, " {:>3}", format!("p{p}"));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;

    fn sphere() -> FilteredComplex {
        let c =
            ChainComplex::new(Ring::Prime(2), 0, vec![1, 0, 1], vec![IntMatrix::zeros(1, 0), IntMatrix::zeros(0, 1)])
                .unwrap();
        FilteredComplex::new(c, vec![vec![0], vec![], vec![2]]).unwrap()
    }

    fn torus_height(ring: Ring) -> FilteredComplex {
        // minimum, two saddles, maximum; all boundaries vanish mod 2
        let c =
            ChainComplex::new(ring, 0, vec![1, 2, 1], vec![IntMatrix::zeros(1, 2), IntMatrix::zeros(2, 1)]).unwrap();
        FilteredComplex::new(c, vec![vec![0], vec![1, 1], vec![2]]).unwrap()
    }

    /// Two points at filtration 0 joined by an edge born at filtration 2,
    /// so `d_2` is the first nonzero differential.
    fn late_edge() -> FilteredComplex {
        let c =
            ChainComplex::new(Ring::Prime(2), 0, vec![2, 1], vec![IntMatrix::from_rows(&[vec![1], vec![1]])]).unwrap();
        FilteredComplex::new(c, vec![vec![0, 0], vec![2]]).unwrap()
    }

    #[test]
    fn degenerate_filtration_gives_homology_on_e1() {
        let c = torus_height(Ring::Prime(2)).base().clone();
        let fc = FilteredComplex::new(c, vec![vec![0], vec![0, 0], vec![0]]).unwrap();
        let pages = spectral_pages(&fc, 3);
        assert_eq!(pages[0].groups, BTreeMap::from([((0, 0), 1), ((0, 1), 2), ((0, 2), 1)]));
        assert!(pages.windows(2).all(|w| w[0].groups == w[1].groups));
        assert!(einfty_check(&fc).passes);
    }

    #[test]
    fn sphere_pages() {
        let fc = sphere();
        let pages = spectral_pages(&fc, 3);
        assert_eq!(pages[0].groups, BTreeMap::from([((0, 0), 1), ((2, 0), 1)]));
        assert!(pages.iter().all(|p| p.differentials.is_empty()));
        let report = einfty_check(&fc);
        assert!(report.passes);
        assert_eq!(report.rows.iter().map(|r| r.1).collect::<Vec<_>>(), vec![1, 0, 1]);
    }

    #[test]
    fn torus_totals() {
        for ring in [Ring::Prime(2), Ring::Integers] {
            let fc = torus_height(ring);
            let report = einfty_check(&fc);
            assert!(report.passes);
            assert_eq!(report.rows.iter().map(|r| r.1).collect::<Vec<_>>(), vec![1, 2, 1]);
        }
    }

    #[test]
    fn second_differential_fires() {
        let fc = late_edge();
        let pages = spectral_pages(&fc, 3);
        assert_eq!(pages[0].groups, BTreeMap::from([((0, 0), 2), ((2, -1), 1)]));
        assert!(pages[0].differentials.is_empty());
        let d2 = &pages[1].differentials[&(2, -1)];
        assert_eq!(d2.rank, 1);
        assert_eq!(d2.entries.as_ref().unwrap(), &vec![vec![1], vec![1]]);
        assert_eq!(pages[2].groups, BTreeMap::from([((0, 0), 1)]));
        assert!(pages_consistent(&pages));
        assert!(einfty_check(&fc).passes);
    }

    #[test]
    fn filtration_raising_boundary_rejected() {
        let c = late_edge().base().clone();
        let bad = FilteredComplex::new(c, vec![vec![0, 3], vec![2]]);
        assert!(matches!(bad, Err(Error::FiltrationViolation { degree: 1, generator: 0 })));
    }

    #[test]
    fn csv_and_grid_render() {
        let pages = spectral_pages(&sphere(), 1);
        assert_eq!(pages_csv(&pages), "r,p,q,dim\n1,0,0,1\n1,2,0,1\n");
        assert!(page_grid(&pages[0]).contains("q=  0 |   1   0   1"));
    }
}
