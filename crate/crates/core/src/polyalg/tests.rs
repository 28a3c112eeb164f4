use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn x(n: usize, i: usize) -> QPoly {
    QPoly::var(n, i)
}

fn c(n: usize, a: i64, b: i64) -> QPoly {
    QPoly::constant(n, q(a, b))
}

fn random_q(rng: &mut ChaCha8Rng) -> BigRational {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: usize, density: f64) -> QPoly {
    let mut terms = Vec::new();
    for e in multi_indices(n, deg + 1) {
        if rng.gen_bool(density) {
            terms.push((e, random_q(rng)));
        }
    }
    QPoly::from_terms(n, terms)
}

/// `∂^α f(p) / α!` by repeated formal differentiation.
fn derivative_oracle(f: &QPoly, p: &[BigRational], alpha: &[u32]) -> BigRational {
    let mut g = f.clone();
    let mut fact = BigInt::from(1);
    for (i, &a) in alpha.iter().enumerate() {
        for j in 1..=a {
            g = g.derivative(i);
            fact *= BigInt::from(j);
        }
    }
    g.eval(p) / BigRational::from_integer(fact)
}

fn assert_matches_oracle(f: &QPoly, p: &[BigRational], k: usize) {
    let jet = taylor_jet(f, p, k);
    for alpha in multi_indices(f.nvars(), k) {
        assert_eq!(jet.local().coeff(&alpha), derivative_oracle(f, p, &alpha), "alpha {alpha:?}");
    }
    assert!(jet.local().degree().is_none_or(|d| (d as usize) < k));
}

#[test]
fn taylor_jet_examples() {
    let f = &x(1, 0) * &x(1, 0);
    assert_eq!(taylor_jet(&f, &[q(0, 1)], 3).local(), &f);
    let jet = taylor_jet(&f, &[q(1, 1)], 2);
    assert_eq!(jet.local(), &(&c(1, 1, 1) + &x(1, 0).scale(&q(2, 1))));
    assert_eq!(jet.representative(), &x(1, 0).scale(&q(2, 1)) - &c(1, 1, 1));
}

#[test]
fn taylor_jet_matches_derivative_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = random_poly(&mut rng, 3, 4, 0.7);
        let p: Vec<_> = (0..3).map(|_| random_q(&mut rng)).collect();
        assert_matches_oracle(&f, &p, 3);
    }
    // large enough for the common-denominator kernel
    let f = random_poly(&mut rng, 3, 8, 0.8);
    assert!(f.num_terms() >= 64);
    let p: Vec<_> = (0..3).map(|_| random_q(&mut rng)).collect();
    assert_matches_oracle(&f, &p, 3);
}

#[test]
fn kernel_primes_are_prime() {
    for &p in modular::primes() {
        assert!((2..).take_while(|d| d * d <= p).all(|d| p % d != 0), "{p}");
    }
}

#[test]
fn modular_product_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let a = random_poly(&mut rng, n, 10, 0.9);
        let b = random_poly(&mut rng, n, 9, 0.9).pow(2);
        assert!(a.num_terms() * b.num_terms() >= 4096 || n == 1);
        assert_eq!(&a * &b, a.mul_naive(&b));
    }
}

#[test]
fn modular_interpolation_matches_plain_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (n, d, k) in [(1, 3, 3), (2, 2, 3), (2, 3, 2), (3, 2, 2)] {
        let points: Vec<Vec<_>> = (0..d).map(|_| (0..n).map(|_| random_q(&mut rng)).collect()).collect();
        let bumps: Vec<_> = (0..d).map(|j| bump_poly(&points, j).unwrap()).collect();
        let reps: Vec<_> = (0..d).map(|_| random_poly(&mut rng, n, k - 1, 0.8)).collect();
        let fast = modular::interpolate_exact(&bumps, &reps, k).unwrap();
        assert_eq!(fast, jets::interpolate_generic(&bumps, &reps, k), "n={n} d={d} k={k}");
    }
}

#[test]
fn bump_examples() {
    let pts = |v: &[i64]| v.iter().map(|&a| vec![q(a, 1)]).collect::<Vec<_>>();
    assert_eq!(bump_poly(&pts(&[5]), 0).unwrap(), QPoly::one(1));
    let l = &x(1, 0) - &c(1, 1, 1);
    assert_eq!(bump_poly(&pts(&[0, 1]), 0).unwrap(), &l * &l);
    let phi = bump_poly(&pts(&[0, 1, 2]), 1).unwrap();
    assert_eq!(phi.degree(), Some(4));
    assert_eq!(phi.eval(&[q(1, 1)]), q(1, 1));
    assert_eq!(phi.eval(&[q(0, 1)]), q(0, 1));
    assert_eq!(phi.eval(&[q(2, 1)]), q(0, 1));
    assert!(matches!(bump_poly(&pts(&[3, 1, 3]), 0), Err(crate::Error::DuplicatePoints(0, 2))));
}

#[test]
fn interpolation_examples() {
    let p = vec![q(2, 1)];
    let jet = Jet::new(p.clone(), 2, &c(1, 3, 1) + &x(1, 0)).unwrap();
    let f = jet_interpolate(std::slice::from_ref(&p), std::slice::from_ref(&jet), 2).unwrap();
    assert_eq!(taylor_jet(&f, &p, 2), jet);

    let pts = vec![vec![q(0, 1)], vec![q(1, 1)]];
    let jets =
        vec![Jet::new(pts[0].clone(), 1, QPoly::zero(1)).unwrap(), Jet::new(pts[1].clone(), 1, QPoly::one(1)).unwrap()];
    let f = jet_interpolate(&pts, &jets, 1).unwrap();
    assert_eq!(f.eval(&pts[0]), q(0, 1));
    assert_eq!(f.eval(&pts[1]), q(1, 1));

    let pts = vec![vec![q(1, 2), q(-1, 1)], vec![q(0, 1), q(3, 2)]];
    let jets = vec![
        Jet::new(pts[0].clone(), 3, &(&x(2, 0) * &x(2, 1)) - &c(2, 2, 3)).unwrap(),
        Jet::new(pts[1].clone(), 3, &(&x(2, 1) * &x(2, 1)).scale(&q(5, 1)) + &x(2, 0)).unwrap(),
    ];
    let f = jet_interpolate(&pts, &jets, 3).unwrap();
    for (p, jet) in pts.iter().zip(&jets) {
        assert_eq!(&taylor_jet(&f, p, 3), jet);
    }
    assert!(f.degree().unwrap() as usize <= degree_bound(2, 3));
}

#[test]
fn interpolation_rejects_bad_input() {
    let p = vec![q(1, 1)];
    let jet = Jet::new(p.clone(), 1, QPoly::one(1)).unwrap();
    let pts = vec![p.clone(), p.clone()];
    assert!(matches!(jet_interpolate(&pts, &[jet.clone(), jet.clone()], 1), Err(crate::Error::DuplicatePoints(0, 1))));
    assert!(jet_interpolate(&[vec![q(0, 1)]], std::slice::from_ref(&jet), 1).is_err());
    assert!(Jet::new(p, 1, x(1, 0)).is_err());
}

#[test]
fn averaging_examples() {
    let sign = LinearAction::sign(1).unwrap();
    assert!(equivariant_average(&x(1, 0), &sign).unwrap().is_zero());
    let sq = &x(1, 0) * &x(1, 0);
    assert_eq!(equivariant_average(&sq, &sign).unwrap(), sq);
    let s3 = LinearAction::permutation(3).unwrap();
    let avg = equivariant_average(&x(3, 0), &s3).unwrap();
    assert_eq!(avg, (&(&x(3, 0) + &x(3, 1)) + &x(3, 2)).scale(&q(1, 3)));
}

#[test]
fn lift_examples() {
    let sign = LinearAction::sign(1).unwrap();
    let p = vec![q(1, 1)];
    let jet = Jet::new(p.clone(), 2, x(1, 0)).unwrap();
    let f = equivariant_jet_lift(&p, &jet, &sign, 2).unwrap();
    assert_eq!(sign.invariance_defect(&f).unwrap(), 0.0);
    assert_eq!(taylor_jet(&f, &p, 2), jet);
    let mirrored = Jet::new(vec![q(-1, 1)], 2, -&x(1, 0)).unwrap();
    assert_eq!(taylor_jet(&f, &[q(-1, 1)], 2), mirrored);

    let origin = vec![q(0, 1)];
    let odd = Jet::new(origin.clone(), 2, x(1, 0)).unwrap();
    assert!(matches!(equivariant_jet_lift(&origin, &odd, &sign, 2), Err(crate::Error::JetNotFixed(1))));

    let trivial = LinearAction::trivial(2);
    let p = vec![q(1, 3), q(2, 1)];
    let jet = Jet::new(p.clone(), 2, &c(2, 1, 1) + &x(2, 1)).unwrap();
    assert_eq!(
        equivariant_jet_lift(&p, &jet, &trivial, 2).unwrap(),
        jet_interpolate(std::slice::from_ref(&p), std::slice::from_ref(&jet), 2).unwrap()
    );
}

#[test]
fn float_rotation_lift() {
    let rot = LinearAction::rotation(3).unwrap();
    let p = vec![0.6, 0.2];
    let local = FPoly::from_terms(2, [(vec![0, 0], 0.5), (vec![1, 0], -1.0), (vec![0, 2], 2.0), (vec![1, 1], 0.25)]);
    let jet = Jet::new(p.clone(), 3, local).unwrap();
    let f = equivariant_jet_lift(&p, &jet, &rot, 3).unwrap();
    assert!(rot.invariance_defect(&f).unwrap() < 1e-9);
    assert!(taylor_jet(&f, &p, 3).max_difference(&jet) < 1e-9);
    // the centre is fixed, so only rotation-invariant jets lift there
    let centre = vec![0.0, 0.0];
    let tilted = Jet::new(centre.clone(), 2, FPoly::var(2, 0)).unwrap();
    assert!(matches!(equivariant_jet_lift(&centre, &tilted, &rot, 2), Err(crate::Error::JetNotFixed(_))));
}

#[test]
fn float_action_needs_float_coefficients() {
    let rot = LinearAction::rotation(3).unwrap();
    assert!(equivariant_average(&x(2, 0), &rot).is_err());
    let bad = LinearAction::float(&crate::groups::FiniteGroup::cyclic(2), vec![vec![vec![1.0]], vec![vec![2.0]]]);
    assert!(bad.is_err());
}

fn small_poly(n: usize) -> impl Strategy<Value = QPoly> {
    proptest::collection::vec((proptest::collection::vec(0u32..3, n), -5i64..=5, 1i64..=3), 0..8)
        .prop_map(move |records| QPoly::from_records(n, &records).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn averaging_is_a_projection(f in small_poly(3)) {
        let act = LinearAction::permutation(3).unwrap();
        let once = equivariant_average(&f, &act).unwrap();
        prop_assert_eq!(act.invariance_defect(&once).unwrap(), 0.0);
        prop_assert_eq!(equivariant_average(&once, &act).unwrap(), once);
    }

    #[test]
    fn shift_round_trips(f in small_poly(2), a in -4i64..4, b in 1i64..4) {
        let p = vec![q(a, b), q(b, 2)];
        let back: Vec<_> = p.iter().map(|c| -c).collect();
        prop_assert_eq!(f.shift(&p).shift(&back), f);
    }

    #[test]
    fn compose_linear_is_a_homomorphism(f in small_poly(2), g in small_poly(2)) {
        let a = vec![vec![q(1, 2), q(3, 1)], vec![q(-1, 1), q(2, 3)]];
        prop_assert_eq!((&f * &g).compose_linear(&a), &f.compose_linear(&a) * &g.compose_linear(&a));
    }
}
