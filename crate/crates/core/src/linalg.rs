//! Dense matrices over ℤ (arbitrary precision) and over fields, with Smith
//! normal form and the subspace operations used by homology and spectral
//! sequence computations.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        let data = rows.iter().flat_map(|row| row.iter().cloned().map(Into::into)).collect();
        Self { rows: r, cols: c, data }
    }

    /// Builds a `rows × cols` matrix from a dense row-major list.
    pub fn from_flat(rows: usize, cols: usize, data: Vec<BigInt>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &BigInt) -> IntMatrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Places `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &IntMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    /// Entries reduced into `0..p`.
    pub fn reduce_mod(&self, p: u64) -> Vec<Vec<u64>> {
        let m = BigInt::from(p);
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.mod_floor(&m).to_u64().expect("residue fits in u64")).collect())
            .collect()
    }

    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += c * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, c: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * c;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += c * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, c: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * c;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = v;
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// `U·A·V = D` with `U`, `V` unimodular and `D` diagonal, `d₁ | d₂ | …`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// The nonzero diagonal entries, all positive.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).take_while(|x| !x.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form by repeated pivoting on the smallest nonzero entry.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = smallest_nonzero(&d, t) else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut changed = false;
            for i in t + 1..m {
                if !d.get(i, t).is_zero() {
                    let q = -d.get(i, t).div_floor(d.get(t, t));
                    d.row_axpy(i, t, &q);
                    u.row_axpy(i, t, &q);
                    changed = true;
                }
            }
            for j in t + 1..n {
                if !d.get(t, j).is_zero() {
                    let q = -d.get(t, j).div_floor(d.get(t, t));
                    d.col_axpy(j, t, &q);
                    v.col_axpy(j, t, &q);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            // a remainder smaller than the pivot may have appeared
            let Some((pi, pj)) = smallest_in_cross(&d, t) else { break };
            if (pi, pj) != (t, t) {
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
            }
        }
        // enforce divisibility against the remaining block
        let pivot = d.get(t, t).clone();
        let bad = (t + 1..m)
            .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !d.get(i, j).is_multiple_of(&pivot));
        if let Some((i, _)) = bad {
            let one = BigInt::one();
            d.row_axpy(t, i, &one);
            u.row_axpy(t, i, &one);
            continue;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    SmithForm { d, u, v }
}

fn smallest_nonzero(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            let x = d.get(i, j);
            if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

fn smallest_in_cross(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let cells = std::iter::once((t, t)).chain((t + 1..d.rows).map(|i| (i, t))).chain((t + 1..d.cols).map(|j| (t, j)));
    cells.filter(|&(i, j)| !d.get(i, j).is_zero()).min_by(|&(a, b), &(c, e)| d.get(a, b).abs().cmp(&d.get(c, e).abs()))
}

/// Arithmetic in a field whose elements are `Self::Elem`.
pub trait Field: Clone + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn from_int(&self, a: &BigInt) -> Self::Elem;

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField(pub u64);

impl Field for PrimeField {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.0
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.0
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.0 as u128) as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        let mut result = 1u64;
        let (mut base, mut e) = (*a, self.0 - 2);
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }
    fn from_int(&self, a: &BigInt) -> u64 {
        a.mod_floor(&BigInt::from(self.0)).to_u64().expect("residue fits in u64")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn from_int(&self, a: &BigInt) -> BigRational {
        BigRational::from_integer(a.clone())
    }
}

/// Dense matrix over a field, stored as rows.
pub type FMat<F> = Vec<Vec<<F as Field>::Elem>>;

pub fn field_matrix<F: Field>(f: &F, m: &IntMatrix) -> FMat<F> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| f.from_int(x)).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(f: &F, m: &mut FMat<F>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !f.is_zero(&m[i][c])) else { continue };
        m.swap(r, pr);
        let inv = f.inv(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = f.mul(x, &inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !f.is_zero(&row[c]) {
                let factor = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !f.is_zero(p) {
                        *x = f.sub(x, &f.mul(&factor, p));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(f: &F, m: &FMat<F>) -> usize {
    let mut work = m.clone();
    rref(f, &mut work).len()
}

/// Basis (as vectors of length `cols`) of `{x : m x = 0}`.
pub fn nullspace<F: Field>(f: &F, m: &FMat<F>, cols: usize) -> Vec<Vec<F::Elem>> {
    let mut work = m.clone();
    let pivots = rref(f, &mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![f.zero(); cols];
            v[fc] = f.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(&work[r][fc]);
            }
            v
        })
        .collect()
}

/// Row-reduced basis of the span of `vectors`.
pub fn span_basis<F: Field>(f: &F, vectors: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    let mut work = vectors.to_vec();
    let k = rref(f, &mut work).len();
    work.truncate(k);
    work
}

/// Matrix-vector product.
pub fn apply<F: Field>(f: &F, m: &FMat<F>, v: &[F::Elem]) -> Vec<F::Elem> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(
                f.zero(),
                |acc, (a, b)| {
                    if f.is_zero(a) || f.is_zero(b) {
                        acc
                    } else {
                        f.add(&acc, &f.mul(a, b))
                    }
                },
            )
        })
        .collect()
}

/// Coefficients `c` with `Σ c_i basis_i = v`, if `v` lies in the span of
/// the (linearly independent) `basis`.
pub fn solve_in_span<F: Field>(f: &F, basis: &[Vec<F::Elem>], v: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let n = v.len();
    let k = basis.len();
    // columns are the basis vectors, augmented by v
    let mut m: FMat<F> = (0..n)
        .map(|i| {
            let mut row: Vec<F::Elem> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let pivots = rref(f, &mut m);
    if pivots.contains(&k) {
        return None;
    }
    let mut c = vec![f.zero(); k];
    for (r, &pc) in pivots.iter().enumerate() {
        c[pc] = m[r][k].clone();
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_unimodular(m: &IntMatrix) -> bool {
        let f = Rationals;
        let q = field_matrix(&f, m);
        let n = m.rows();
        if rank(&f, &q) != n {
            return false;
        }
        // |det| = 1 via fraction-free elimination over ℚ
        let mut work = q;
        let mut det = BigRational::one();
        for c in 0..n {
            let p = (c..n).find(|&i| !work[i][c].is_zero()).unwrap();
            if p != c {
                work.swap(p, c);
                det = -det;
            }
            det *= work[c][c].clone();
            for i in c + 1..n {
                let factor = &work[i][c] / &work[c][c];
                for j in c..n {
                    let v = &work[c][j] * &factor;
                    work[i][j] -= v;
                }
            }
        }
        det.abs().is_one()
    }

    fn check_smith(a: &IntMatrix) {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        assert!(is_unimodular(&s.u) && is_unimodular(&s.v));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        let f = s.invariant_factors();
        assert!(f.iter().all(|x| x.is_positive()));
        for w in f.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        // nothing nonzero after the invariant factors
        for i in f.len()..s.d.rows().min(s.d.cols()) {
            assert!(s.d.get(i, i).is_zero());
        }
    }

    /// gcd of all k×k minors; the product d₁⋯d_k of invariant factors.
    fn determinantal_divisor(a: &IntMatrix, k: usize) -> BigInt {
        fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = combos(n - 1, k);
            for mut c in combos(n - 1, k - 1) {
                c.push(n - 1);
                out.push(c);
            }
            out
        }
        fn det(m: Vec<Vec<BigInt>>) -> BigInt {
            let n = m.len();
            if n == 1 {
                return m[0][0].clone();
            }
            let mut total = BigInt::zero();
            for j in 0..n {
                let minor: Vec<Vec<BigInt>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = &m[0][j] * det(minor);
                if j % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
        let mut g = BigInt::zero();
        for rs in combos(a.rows(), k) {
            for cs in combos(a.cols(), k) {
                let sub = rs.iter().map(|&r| cs.iter().map(|&c| a.get(r, c).clone()).collect()).collect();
                g = g.gcd(&det(sub));
            }
        }
        g
    }

    #[test]
    fn smith_of_zero_matrix() {
        let z = IntMatrix::zeros(3, 2);
        let s = smith_normal_form(&z);
        assert_eq!(s.d, z);
        assert_eq!(s.u, IntMatrix::identity(3));
        assert_eq!(s.v, IntMatrix::identity(2));
    }

    #[test]
    fn smith_of_diag_2_3() {
        let a = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(1), BigInt::from(6)]);
        check_smith(&a);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn smith_random_5x7(entries in proptest::collection::vec(-9i64..=9, 35)) {
            let rows: Vec<Vec<i64>> = entries.chunks(7).map(<[i64]>::to_vec).collect();
            let a = IntMatrix::from_rows(&rows);
            check_smith(&a);
            let s = smith_normal_form(&a);
            let factors = s.invariant_factors();
            let mut prod = BigInt::one();
            for k in 1..=5 {
                let dk = determinantal_divisor(&a, k);
                if k <= factors.len() {
                    prod *= &factors[k - 1];
                    prop_assert_eq!(&prod, &dk);
                } else {
                    prop_assert!(dk.is_zero());
                }
            }
        }

        #[test]
        fn nullspace_vectors_are_killed(entries in proptest::collection::vec(-3i64..=3, 20)) {
            let rows: Vec<Vec<i64>> = entries.chunks(5).map(<[i64]>::to_vec).collect();
            let a = IntMatrix::from_rows(&rows);
            for p in [2u64, 3, 7] {
                let f = PrimeField(p);
                let m = field_matrix(&f, &a);
                let ns = nullspace(&f, &m, 5);
                prop_assert_eq!(ns.len() + rank(&f, &m), 5);
                for v in &ns {
                    prop_assert!(apply(&f, &m, v).iter().all(|x| *x == 0));
                }
            }
        }
    }

    #[test]
    fn solve_in_span_finds_coefficients() {
        let f = Rationals;
        let q = |x: i64| BigRational::from_integer(x.into());
        let basis = vec![vec![q(1), q(0), q(1)], vec![q(0), q(1), q(1)]];
        let c = solve_in_span(&f, &basis, &[q(2), q(3), q(5)]).unwrap();
        assert_eq!(c, vec![q(2), q(3)]);
        assert!(solve_in_span(&f, &basis, &[q(1), q(0), q(0)]).is_none());
    }
}
