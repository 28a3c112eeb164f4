//! Exact rational kernels: products are computed on integer numerators
//! modulo word-sized primes and recombined by Garner's algorithm.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::sync::OnceLock;

use std::collections::BTreeMap;

use super::{binomial, multi_indices, signed_permutation, Monomial, QPoly};

/// Products with fewer term pairs than this use the plain rational loop.
const SMALL_PRODUCT: usize = 4096;
/// Dense accumulator budget (slots).
const MAX_DENSE: usize = 1 << 24;

const PRIME_COUNT: usize = 256;

/// The largest primes below 2³¹, descending.
pub(super) fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let is_prime = |n: u64| (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        (1..(1u64 << 31)).rev().filter(|&n| is_prime(n)).take(PRIME_COUNT).collect()
    })
}

/// Integer form `(1/den) · Σ c_e x^e`.
struct IntPoly {
    den: BigInt,
    terms: Vec<(Monomial, BigInt)>,
}

fn integer_form(p: &QPoly) -> IntPoly {
    let den = p.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let terms = p.terms().map(|(e, c)| (e.clone(), c.numer() * (&den / c.denom()))).collect();
    IntPoly { den, terms }
}

fn max_abs(terms: &[(Monomial, BigInt)]) -> BigInt {
    terms.iter().map(|(_, c)| c.abs()).max().unwrap_or_default()
}

fn residue(x: &BigInt, p: u64) -> u64 {
    let r = (x.magnitude() % p).to_u64().expect("residue fits");
    if x.is_negative() && r != 0 {
        p - r
    } else {
        r
    }
}

// all moduli are below 2³¹, so products of residues fit in a u64
fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Garner reconstruction of the symmetric-range integer with the given
/// residues modulo the first `count` kernel primes.
struct Garner {
    primes: Vec<u64>,
    // inv[i][j] = p_j^{-1} mod p_i for j < i
    inv: Vec<Vec<u64>>,
    modulus: BigInt,
}

impl Garner {
    fn new(count: usize) -> Self {
        let primes = primes()[..count].to_vec();
        let inv = (0..count).map(|i| (0..i).map(|j| inv_mod(primes[j] % primes[i], primes[i])).collect()).collect();
        let modulus = primes.iter().fold(BigInt::one(), |m, &p| m * BigInt::from(p));
        Self { primes, inv, modulus }
    }

    fn reconstruct(&self, residues: &[u64]) -> BigInt {
        let m = self.primes.len();
        let mut digits = vec![0u64; m];
        for i in 0..m {
            let p = self.primes[i];
            let mut x = residues[i];
            for j in 0..i {
                // x = (x - digits[j]) * inv(p_j) mod p
                let d = digits[j] % p;
                x = if x >= d { x - d } else { x + p - d };
                x = x * self.inv[i][j] % p;
            }
            digits[i] = x;
        }
        let mut value = BigInt::zero();
        for i in (0..m).rev() {
            value = value * BigInt::from(self.primes[i]) + BigInt::from(digits[i]);
        }
        if &value * 2 > self.modulus {
            value - &self.modulus
        } else {
            value
        }
    }
}

/// Exact product of rational polynomials.
pub(super) fn mul_exact(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.nvars();
    if a.num_terms() * b.num_terms() < SMALL_PRODUCT || n == 0 {
        return a.mul_naive(b);
    }
    let ia = integer_form(a);
    let ib = integer_form(b);
    let pairs = ia.terms.len().min(ib.terms.len()) as u64;
    let bound_bits = max_abs(&ia.terms).bits() + max_abs(&ib.terms).bits() + 64 - pairs.leading_zeros() as u64 + 2;
    let count = (bound_bits as usize).div_ceil(30);
    let radix: Vec<usize> = (0..n)
        .map(|v| {
            let ma = ia.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0);
            let mb = ib.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0);
            (ma + mb + 1) as usize
        })
        .collect();
    let size = radix.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
    let size = match size {
        Some(s) if s <= MAX_DENSE && count <= PRIME_COUNT => s,
        _ => return a.mul_naive(b),
    };
    let mut stride = vec![1usize; n];
    for v in 1..n {
        stride[v] = stride[v - 1] * radix[v - 1];
    }
    let index = |e: &Monomial| e.iter().zip(&stride).map(|(&k, &s)| k as usize * s).sum::<usize>();
    let pa: Vec<usize> = ia.terms.iter().map(|(e, _)| index(e)).collect();
    let pb: Vec<usize> = ib.terms.iter().map(|(e, _)| index(e)).collect();

    let per_prime: Vec<Vec<u64>> = primes()[..count]
        .par_iter()
        .map(|&p| {
            let ra: Vec<u64> = ia.terms.iter().map(|(_, c)| residue(c, p)).collect();
            let rb: Vec<u64> = ib.terms.iter().map(|(_, c)| residue(c, p)).collect();
            let mut acc = vec![0u128; size];
            for (&i, &x) in pa.iter().zip(&ra) {
                if x == 0 {
                    continue;
                }
                for (&j, &y) in pb.iter().zip(&rb) {
                    acc[i + j] += x as u128 * y as u128;
                }
            }
            acc.into_iter().map(|s| (s % p as u128) as u64).collect()
        })
        .collect();

    let garner = Garner::new(count);
    let reducer = Reducer::new(&(&ia.den * &ib.den));
    let terms: Vec<(Monomial, BigRational)> = (0..size)
        .into_par_iter()
        .filter_map(|s| {
            let residues: Vec<u64> = per_prime.iter().map(|r| r[s]).collect();
            if residues.iter().all(|&r| r == 0) {
                return None;
            }
            let value = garner.reconstruct(&residues);
            let mut e = vec![0u32; n];
            let mut rest = s;
            for v in (0..n).rev() {
                e[v] = (rest / stride[v]) as u32;
                rest %= stride[v];
            }
            Some((e, reducer.fraction(value)))
        })
        .collect();
    QPoly::from_terms(n, terms)
}

/// Truncated Taylor coefficients of an exact polynomial at a rational
/// point, accumulated over a common denominator.
pub(super) fn taylor_exact(f: &QPoly, p: &[BigRational], k: usize) -> QPoly {
    let n = f.nvars();
    if f.num_terms() < 64 {
        return f.taylor_generic(p, k);
    }
    let form = integer_form(f);
    let q = p.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num: Vec<BigInt> = p.iter().map(|x| x.numer() * (&q / x.denom())).collect();
    let top = f.degree().unwrap_or(0);
    let q_pow = powers(&q, top);
    // f(p + z) = (1 / (den q^top)) Σ_β F_β q^{top-|β|} Π_i (P_i + q z_i)^{β_i}
    let base: Vec<BigInt> =
        form.terms.iter().map(|(e, c)| c * &q_pow[(top - e.iter().sum::<u32>()) as usize]).collect();
    // table[i][b][a] = C(b, a) P_i^{b-a} q^a
    let table: Vec<Vec<Vec<BigInt>>> = (0..n)
        .map(|i| {
            let d = form.terms.iter().map(|(e, _)| e[i]).max().unwrap_or(0);
            let np = powers(&num[i], d);
            (0..=d)
                .map(|b| {
                    (0..=b.min(k as u32)).map(|a| binomial(b, a) * &np[(b - a) as usize] * &q_pow[a as usize]).collect()
                })
                .collect()
        })
        .collect();
    let den = &form.den * &q_pow[top as usize];
    let terms: Vec<(Monomial, BigRational)> = multi_indices(n, k)
        .into_par_iter()
        .map(|alpha| {
            let mut acc = BigInt::zero();
            for ((e, _), b) in form.terms.iter().zip(&base) {
                if e.iter().zip(&alpha).any(|(b, a)| b < a) {
                    continue;
                }
                let factor = (0..n).fold(BigInt::one(), |m, i| m * &table[i][e[i] as usize][alpha[i] as usize]);
                acc += b * factor;
            }
            (alpha, BigRational::new(acc, den.clone()))
        })
        .collect();
    QPoly::from_terms(n, terms)
}

fn powers(x: &BigInt, d: u32) -> Vec<BigInt> {
    let mut v = vec![BigInt::one()];
    for i in 1..=d as usize {
        v.push(&v[i - 1] * x);
    }
    v
}

fn l1(terms: &[(Monomial, BigInt)]) -> BigInt {
    terms.iter().map(|(_, c)| c.abs()).sum()
}

type Sparse = Vec<(usize, u64)>;

fn mul_sparse(a: &[(usize, u64)], b: &[(usize, u64)], p: u64, scratch: &mut [u128]) -> Sparse {
    let (mut lo, mut hi) = (usize::MAX, 0);
    for &(i, x) in a {
        for &(j, y) in b {
            scratch[i + j] += x as u128 * y as u128;
        }
    }
    if let (Some(a0), Some(b0)) = (a.iter().map(|t| t.0).min(), b.iter().map(|t| t.0).min()) {
        lo = a0 + b0;
        hi = a.iter().map(|t| t.0).max().unwrap_or(0) + b.iter().map(|t| t.0).max().unwrap_or(0);
    }
    let mut out = Vec::new();
    for (s, slot) in scratch.iter_mut().enumerate().take(hi.saturating_add(1)).skip(lo) {
        if *slot != 0 {
            let r = (*slot % p as u128) as u64;
            *slot = 0;
            if r != 0 {
                out.push((s, r));
            }
        }
    }
    out
}

/// `Σ_j rep_j · (1 − (1 − φ_j^k)^k)` for exact inputs. The numerator over a
/// common denominator is accumulated modulo enough primes to cover an
/// ℓ¹ coefficient bound, then reconstructed once.
pub(super) fn interpolate_exact(bumps: &[QPoly], reps: &[QPoly], k: usize) -> Option<QPoly> {
    let n = bumps.first()?.nvars();
    let active: Vec<usize> = (0..reps.len()).filter(|&j| !reps[j].is_zero()).collect();
    if n == 0 || k == 0 || active.is_empty() {
        return None;
    }
    let kk = (k * k) as u32;
    let top = active
        .iter()
        .map(|&j| reps[j].degree().unwrap_or(0) as usize + k * k * bumps[j].degree().unwrap_or(0) as usize)
        .max()?;
    let radix = top + 1;
    let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(radix)).filter(|&s| s <= MAX_DENSE)?;
    let stride: Vec<usize> = (0..n).map(|v| radix.pow(v as u32)).collect();
    let index = |e: &Monomial| e.iter().zip(&stride).map(|(&x, &s)| x as usize * s).sum::<usize>();

    struct Piece {
        phi: IntPoly,
        rep: IntPoly,
        weight: BigInt,
        // cutoff numerator Σ_i coeffs[i-1] Φ^{ki}
        coeffs: Vec<BigInt>,
    }
    let mut pieces: Vec<Piece> = active
        .iter()
        .map(|&j| {
            let phi = integer_form(&bumps[j]);
            let rep = integer_form(&reps[j]);
            let coeffs = (1..=k as u32)
                .map(|i| {
                    let c = binomial(k as u32, i) * phi.den.pow(kk - k as u32 * i);
                    if i % 2 == 1 {
                        c
                    } else {
                        -c
                    }
                })
                .collect();
            Piece { phi, rep, weight: BigInt::one(), coeffs }
        })
        .collect();
    let dens: Vec<BigInt> = pieces.iter().map(|pc| &pc.rep.den * pc.phi.den.pow(kk)).collect();
    let common = dens.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
    let mut bound = BigInt::zero();
    for (pc, d) in pieces.iter_mut().zip(&dens) {
        pc.weight = &common / d;
        let phi_l1 = l1(&pc.phi.terms);
        let cut: BigInt =
            pc.coeffs.iter().enumerate().map(|(i, c)| c.abs() * phi_l1.pow(k as u32 * (i as u32 + 1))).sum();
        bound += &pc.weight * l1(&pc.rep.terms) * cut;
    }
    let count = (bound.bits() as usize + 2).div_ceil(30);
    if count > PRIME_COUNT {
        return None;
    }

    let sparse = |form: &IntPoly, p: u64| -> Sparse {
        form.terms.iter().map(|(e, c)| (index(e), residue(c, p))).filter(|t| t.1 != 0).collect()
    };
    let per_prime: Vec<Vec<u64>> = primes()[..count]
        .par_iter()
        .map(|&p| {
            let mut scratch = vec![0u128; size];
            let mut total = vec![0u64; size];
            for pc in &pieces {
                let phi = sparse(&pc.phi, p);
                let mut cut = vec![0u64; size];
                let mut power = phi.clone();
                for m in 1..=k * k {
                    if m > 1 {
                        power = mul_sparse(&power, &phi, p, &mut scratch);
                    }
                    if m % k == 0 {
                        let c = residue(&pc.coeffs[m / k - 1], p);
                        for &(s, r) in &power {
                            cut[s] = (cut[s] + c * r % p) % p;
                        }
                    }
                }
                let w = residue(&pc.weight, p);
                let rep: Sparse = sparse(&pc.rep, p).into_iter().map(|(s, r)| (s, r * w % p)).collect();
                let cut: Sparse = cut.into_iter().enumerate().filter(|t| t.1 != 0).collect();
                for (s, r) in mul_sparse(&rep, &cut, p, &mut scratch) {
                    total[s] = (total[s] + r) % p;
                }
            }
            total
        })
        .collect();

    let garner = Garner::new(count);
    let reducer = Reducer::new(&common);
    let terms: Vec<(Monomial, BigRational)> = (0..size)
        .into_par_iter()
        .filter_map(|s| {
            let residues: Vec<u64> = per_prime.iter().map(|r| r[s]).collect();
            if residues.iter().all(|&r| r == 0) {
                return None;
            }
            let e: Monomial = (0..n).map(|v| ((s / stride[v]) % radix) as u32).collect();
            Some((e, reducer.fraction(garner.reconstruct(&residues))))
        })
        .collect();
    Some(QPoly::from_terms(n, terms))
}

/// Normalizes fractions over a fixed denominator. When the denominator
/// factors over small primes the gcd is found by trial division, which is
/// much cheaper than a full gcd against a large numerator.
struct Reducer {
    den: BigInt,
    factors: Option<Vec<(u64, u32)>>,
}

const TRIAL_LIMIT: u64 = 1 << 16;

impl Reducer {
    fn new(den: &BigInt) -> Self {
        let mut rest = den.magnitude().clone();
        let mut factors = Vec::new();
        let mut d = 2u64;
        while d < TRIAL_LIMIT && !rest.is_one() {
            let mut e = 0;
            while (&rest % d).is_zero() {
                rest /= d;
                e += 1;
            }
            if e > 0 {
                factors.push((d, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        Self { den: den.clone(), factors: rest.is_one().then_some(factors) }
    }

    fn fraction(&self, num: BigInt) -> BigRational {
        let Some(factors) = &self.factors else {
            return BigRational::new(num, self.den.clone());
        };
        if num.is_zero() {
            return BigRational::zero();
        }
        let mut num = num;
        let mut g = BigInt::one();
        for &(p, e) in factors {
            for _ in 0..e {
                if !(num.magnitude() % p).is_zero() {
                    break;
                }
                num /= p;
                g *= p;
            }
        }
        let mut den = &self.den / g;
        if den.is_negative() {
            den = -den;
            num = -num;
        }
        BigRational::new_raw(num, den)
    }
}

/// Group average over signed permutation matrices, summed on integer
/// numerators.
pub(super) fn average_exact(f: &QPoly, mats: &[Vec<Vec<BigRational>>]) -> Option<QPoly> {
    let perms = mats.iter().map(|a| signed_permutation(a)).collect::<Option<Vec<_>>>()?;
    let n = f.nvars();
    let form = integer_form(f);
    let mut sum: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    for perm in &perms {
        for (e, c) in &form.terms {
            let mut image = vec![0u32; n];
            let mut negate = false;
            for (i, &k) in e.iter().enumerate() {
                let (j, flip) = perm[i];
                image[j] += k;
                negate ^= flip && k % 2 == 1;
            }
            let slot = sum.entry(image).or_default();
            if negate {
                *slot -= c;
            } else {
                *slot += c;
            }
        }
    }
    let reducer = Reducer::new(&(&form.den * BigInt::from(mats.len())));
    Some(QPoly::from_terms(n, sum.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e, reducer.fraction(c)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn reducer_matches_gcd(num in -1_000_000i64..1_000_000, a in 0u32..6, b in 0u32..4, big in 0u32..2) {
            let den = BigInt::from(2).pow(a) * BigInt::from(45).pow(b) * BigInt::from(65537u64).pow(big);
            let r = Reducer::new(&den);
            prop_assert_eq!(r.factors.is_some(), big == 0);
            prop_assert_eq!(r.fraction(BigInt::from(num)), BigRational::new(BigInt::from(num), den));
        }
    }
}
